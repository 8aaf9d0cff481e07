#!/usr/bin/env python3
# Copyright 2026 The privtrain Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Reference accounting query computed with Google's dp_accounting package.

The RDP curve comes from dp_accounting; the (eps, delta) conversion is the
classic eps(a) + log(1/delta)/(a-1) minimum, which is what privtrain reports.
dp_accounting's own epsilon uses a tighter conversion and is written for
information only.
"""
import json
import sys

import dp_accounting
import numpy as np
from dp_accounting.rdp import rdp_privacy_accountant as rdp

Q, SIGMA, STEPS, DELTA = 0.1, 4.0, 500, 1e-5
ORDERS = list(range(2, 65)) + [128, 256]

acc = rdp.RdpAccountant(orders=ORDERS)
acc.compose(dp_accounting.PoissonSampledDpEvent(Q, dp_accounting.GaussianDpEvent(SIGMA)), STEPS)
orders = np.array(ORDERS, dtype=float)
eps = acc._rdp + np.log(1.0 / DELTA) / (orders - 1.0)
i = int(np.argmin(eps))
tight_eps, tight_order = acc.get_epsilon_and_optimal_order(DELTA)
json.dump({
    "q": Q, "sigma": SIGMA, "steps": STEPS, "delta": DELTA,
    "epsilon": float(eps[i]), "argmin_alpha": float(orders[i]),
    "dp_accounting_version": getattr(dp_accounting, "__version__", "0.6.0"),
    "dp_accounting_tight_epsilon": float(tight_eps),
}, open(sys.argv[1] if len(sys.argv) > 1 else "external_accountant.json", "w"), indent=2)
