// Copyright 2026 The privtrain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVTRAIN_PARALLEL_HPP_
#define PRIVTRAIN_PARALLEL_HPP_

#include <cstdint>
#include <functional>

namespace privtrain {

// Thread cap from PRIVTRAIN_THREADS, else hardware concurrency (>= 1).
int DefaultThreadCount();

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items are
// claimed dynamically; callers must write results to per-item slots so the
// outcome does not depend on scheduling. The first exception is rethrown.
void ParallelFor(int64_t n, int threads, const std::function<void(int64_t)>& fn);

}  // namespace privtrain

#endif  // PRIVTRAIN_PARALLEL_HPP_
