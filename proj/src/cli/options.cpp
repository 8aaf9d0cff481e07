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


#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "privtrain/cli.hpp"

namespace privtrain::cli {
namespace {

using nlohmann::json;
using T = OptionType;

OptionSpec Opt(std::string key, T type, json def, std::string help) {
  return {std::move(key), type, std::move(def), std::move(help)};
}
OptionSpec Required(std::string key, T type, std::string help) {
  OptionSpec s{std::move(key), type, nullptr, std::move(help)};
  s.required = true;
  return s;
}
OptionSpec Input(std::string key, std::string help, bool required = true) {
  OptionSpec s{std::move(key), T::kString, nullptr, std::move(help)};
  s.required = required;
  s.input_path = true;
  return s;
}
OptionSpec OutputOnly(std::string key, T type, json def, std::string help) {
  OptionSpec s{std::move(key), type, std::move(def), std::move(help)};
  s.output_only = true;
  return s;
}

void Append(std::vector<OptionSpec>& to, const std::vector<OptionSpec>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

std::vector<OptionSpec> CommonOptions() {
  return {
      OutputOnly("out_root", T::kString, "runs", "parent of per-run output directories"),
      OutputOnly("run_dir", T::kString, nullptr, "explicit output directory"),
      OutputOnly("threads", T::kInt, 0, "worker threads (0: PRIVTRAIN_THREADS or all cores)"),
  };
}

std::vector<OptionSpec> ExtractorOptions() {
  return {
      Opt("kernel", T::kInt, 3, "DCT kernel size K"),
      Opt("stages", T::kInt, 2, "harmonic stages"),
      Opt("pool", T::kInt, 2, "average-pool window"),
      Opt("max_dim", T::kInt, int64_t{1} << 22, "feature dimension cap"),
  };
}

// Everything a training run needs except the framework and its noise.
std::vector<OptionSpec> TrainingOptions() {
  return {
      Input("train", "labeled PVTF training features"),
      Input("test", "labeled PVTF test features", false),
      Input("public", "unlabeled PVTF public features (pate)", false),
      Opt("arch", T::kString, "auto", "linear_1layer, mlp_2layer or auto"),
      Opt("hidden_dim", T::kInt, 64, "MLP hidden width"),
      Opt("clip", T::kFloat, 0.1, "per-sample L2 clip C"),
      Opt("lr", T::kFloat, 0.1, "learning rate"),
      Opt("batch", T::kInt, 256, "expected Poisson batch size"),
      Opt("epochs", T::kInt, 10, "training epochs"),
      Opt("delta", T::kFloat, 1e-5, "target delta"),
      Opt("seed", T::kInt, 0, "RNG seed"),
      Opt("test_mode", T::kBool, false, "permit zero noise"),
      Opt("epsilon_budget", T::kFloat, nullptr, "report best accuracy within this epsilon"),
      Opt("dfa_activation_clip", T::kFloat, nullptr, "DFA hidden-activation clip"),
      Opt("dfa_error_clip", T::kFloat, nullptr, "DFA output-error clip"),
      Opt("dfa_feedback_scale", T::kFloat, 1.0, "spectral norm of B (0: unscaled)"),
      Opt("dfa_feedback_init_std", T::kFloat, 0.0, "std of B entries (0: 1/sqrt(classes))"),
      Opt("pate_teachers", T::kInt, 1000, "PATE teacher count"),
      Opt("pate_queries", T::kInt, 1000, "PATE student queries"),
      Opt("pate_teacher_epochs", T::kInt, 50, "teacher SGD epochs"),
      Opt("pate_teacher_lr", T::kFloat, 0.1, "teacher SGD learning rate"),
      Opt("pate_teacher_batch", T::kInt, 32, "teacher SGD batch size"),
  };
}

std::vector<OptionSpec> BuildOptions(std::string_view command) {
  std::vector<OptionSpec> out;
  if (command == "synth") {
    out = {
        Input("input", "source image (PNG or PNM)"),
        Opt("count", T::kInt, 50000, "number of synthetic images"),
        Opt("height", T::kInt, 32, "output height"),
        Opt("width", T::kInt, 32, "output width"),
        Opt("crop_min", T::kFloat, 0.08, "smallest crop area fraction"),
        Opt("crop_max", T::kFloat, 1.0, "largest crop area fraction"),
        Opt("rotation", T::kFloat, 30.0, "max rotation in degrees"),
        Opt("contrast_min", T::kFloat, 0.6, "smallest contrast factor"),
        Opt("contrast_max", T::kFloat, 1.4, "largest contrast factor"),
        Opt("noise_std", T::kFloat, 0.02, "pixel noise std"),
        Opt("seed", T::kInt, 0, "augmentation seed"),
    };
    Append(out, ExtractorOptions());
  } else if (command == "extract") {
    out = {Input("input", "image file, or directory of images or of class subdirectories")};
    Append(out, ExtractorOptions());
  } else if (command == "train") {
    out = {Opt("framework", T::kString, "dpsgd", "dpsgd, dpsgld, dpdfa or pate"),
           Opt("sigma", T::kFloat, 1.0, "noise multiplier (pate: vote noise std)")};
    Append(out, TrainingOptions());
  } else if (command == "account") {
    out = {
        Required("q", T::kFloat, "sampling rate"),
        Required("sigma", T::kFloat, "noise multiplier"),
        Opt("steps", T::kInt, 0, "composed steps"),
        Opt("delta", T::kFloat, 1e-5, "target delta"),
    };
  } else if (command == "sweep") {
    out = {
        Opt("frameworks", T::kString, "dpsgd,dpsgld,dpdfa", "comma-separated frameworks"),
        Opt("sigmas", T::kString, nullptr, "comma-separated noise levels"),
        Opt("target_epsilons", T::kString, nullptr, "comma-separated epsilon targets"),
    };
    Append(out, TrainingOptions());
  } else if (command == "evaluate") {
    out = {Input("model", "PVTM checkpoint"), Input("data", "labeled PVTF features")};
  } else {
    throw Error(ErrorCode::kConfig, fmt::format("unknown command '{}'", command));
  }
  Append(out, CommonOptions());
  return out;
}

const OptionSpec* Find(const std::vector<OptionSpec>& specs, std::string_view key) {
  for (const auto& s : specs) {
    if (s.key == key) return &s;
  }
  return nullptr;
}

json CheckType(const OptionSpec& spec, const json& value, std::string_view origin) {
  if (value.is_null()) return value;
  auto bad = [&] {
    return Error(ErrorCode::kConfig,
                 fmt::format("{}: '{}' has the wrong type ({})", origin, spec.key, value.dump()));
  };
  switch (spec.type) {
    case T::kInt:
      if (value.is_number_integer()) return value;
      if (value.is_number_float() && std::trunc(value.get<double>()) == value.get<double>()) {
        return static_cast<int64_t>(value.get<double>());
      }
      throw bad();
    case T::kFloat:
      if (value.is_number()) return value.get<double>();
      throw bad();
    case T::kBool:
      if (value.is_boolean()) return value;
      throw bad();
    case T::kString:
      if (value.is_string()) return value;
      throw bad();
  }
  throw bad();
}

uint64_t Fnv1a(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  return code == ErrorCode::kNumerical || code == ErrorCode::kIo ? kExitCompute : kExitUsage;
}

const std::vector<std::string>& CommandNames() {
  static const std::vector<std::string> names = {"synth", "extract", "train",
                                                 "account", "sweep", "evaluate"};
  return names;
}

const std::vector<OptionSpec>& CommandOptions(std::string_view command) {
  static const auto table = [] {
    std::map<std::string, std::vector<OptionSpec>, std::less<>> t;
    for (const auto& name : CommandNames()) t[name] = BuildOptions(name);
    return t;
  }();
  const auto it = table.find(command);
  if (it == table.end()) throw Error(ErrorCode::kConfig, fmt::format("unknown command '{}'", command));
  return it->second;
}

std::optional<std::string> ProcessEnv(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

std::string EnvName(std::string_view key) {
  std::string out = "PRIVTRAIN_";
  for (char c : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

json ParseValue(const OptionSpec& spec, std::string_view text) {
  const std::string s(text);
  auto bad = [&] {
    return Error(ErrorCode::kConfig, fmt::format("'{}': cannot parse '{}'", spec.key, s));
  };
  switch (spec.type) {
    case T::kInt: {
      size_t used = 0;
      int64_t v = 0;
      try {
        v = std::stoll(s, &used);
      } catch (const std::exception&) {
        throw bad();
      }
      if (used != s.size()) throw bad();
      return v;
    }
    case T::kFloat: {
      size_t used = 0;
      double v = 0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        throw bad();
      }
      if (used != s.size()) throw bad();
      return v;
    }
    case T::kBool:
      if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
      if (s == "0" || s == "false" || s == "no" || s == "off") return false;
      throw bad();
    case T::kString:
      return s;
  }
  throw bad();
}

json ResolveConfig(std::string_view command, const std::string& config_file, const EnvLookup& env,
                   const std::map<std::string, std::string>& flags) {
  const auto& specs = CommandOptions(command);
  json config = json::object();
  for (const auto& s : specs) config[s.key] = s.default_value;

  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw Error(ErrorCode::kConfig, fmt::format("cannot open config file {}", config_file));
    json file;
    try {
      file = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kConfig, fmt::format("{}: {}", config_file, e.what()));
    }
    if (!file.is_object()) throw Error(ErrorCode::kConfig, config_file + ": expected a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (key == "command") {
        if (value != command) {
          throw Error(ErrorCode::kConfig,
                      fmt::format("{} is a '{}' config", config_file, value.dump()));
        }
        continue;
      }
      const OptionSpec* spec = Find(specs, key);
      if (!spec) throw Error(ErrorCode::kConfig, fmt::format("{}: unknown key '{}'", config_file, key));
      config[key] = CheckType(*spec, value, config_file);
    }
  }
  for (const auto& s : specs) {
    if (auto v = env(EnvName(s.key))) config[s.key] = ParseValue(s, *v);
  }
  for (const auto& [key, text] : flags) {
    const OptionSpec* spec = Find(specs, key);
    if (!spec) throw Error(ErrorCode::kConfig, fmt::format("unknown option '{}'", key));
    config[key] = ParseValue(*spec, text);
  }
  for (const auto& s : specs) {
    if (s.required && config[s.key].is_null()) {
      throw Error(ErrorCode::kConfig, fmt::format("missing required option '{}'", s.key));
    }
    if (s.input_path && !config[s.key].is_null() &&
        !std::filesystem::exists(config[s.key].get<std::string>())) {
      throw Error(ErrorCode::kConfig,
                  fmt::format("input '{}' not found: {}", s.key, config[s.key].get<std::string>()));
    }
  }
  return config;
}

std::string ConfigHash(std::string_view command, const json& config) {
  json canonical = config;
  for (const auto& s : CommandOptions(command)) {
    if (s.output_only) canonical.erase(s.key);
  }
  canonical["command"] = command;
  return fmt::format("{:016x}", Fnv1a(canonical.dump()));
}

json ArchivedConfig(std::string_view command, const json& config) {
  json out = config;
  out["command"] = command;
  return out;
}

std::filesystem::path CreateRunDir(std::string_view command, const json& config) {
  namespace fs = std::filesystem;
  if (config.contains("run_dir") && !config["run_dir"].is_null()) {
    const fs::path dir = config["run_dir"].get<std::string>();
    fs::create_directories(dir);
    if (fs::exists(dir / "config.json")) {
      throw Error(ErrorCode::kConfig, fmt::format("{} already holds a run", dir.string()));
    }
    return dir;
  }
  const fs::path root = config["out_root"].get<std::string>();
  fs::create_directories(root);
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  const std::string base = fmt::format("{:%Y%m%dT%H%M%SZ}-{}", now, ConfigHash(command, config));
  for (int k = 0;; ++k) {
    const fs::path dir = root / (k == 0 ? base : fmt::format("{}-{}", base, k));
    if (fs::create_directory(dir)) return dir;
  }
}

}  // namespace privtrain::cli
