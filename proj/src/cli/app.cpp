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


#include <iostream>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "privtrain/cli.hpp"

namespace privtrain::cli {
namespace {

struct Bindings {
  std::string config_file;
  std::map<std::string, std::string> text;
  std::map<std::string, bool> flag;
};

std::string FlagName(const std::string& key) {
  std::string name = "--" + key;
  for (char& c : name) {
    if (c == '_') c = '-';
  }
  return name;
}

const std::map<std::string, std::string, std::less<>>& Descriptions() {
  static const std::map<std::string, std::string, std::less<>> d = {
      {"synth", "augment a single image into a synthetic set and extract its features"},
      {"extract", "extract harmonic features from images"},
      {"train", "train a classifier under a DP framework"},
      {"account", "privacy budget of a subsampled Gaussian run"},
      {"sweep", "train over a framework x noise grid and collect a utility-vs-epsilon CSV"},
      {"evaluate", "accuracy and loss of a checkpoint on a feature file"},
  };
  return d;
}

using Command = CommandResult (*)(const nlohmann::json&);

Command Dispatch(std::string_view name) {
  if (name == "synth") return CmdSynth;
  if (name == "extract") return CmdExtract;
  if (name == "train") return CmdTrain;
  if (name == "account") return CmdAccount;
  if (name == "sweep") return CmdSweep;
  return CmdEvaluate;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const EnvLookup& env) {
  CLI::App app{"Differentially private training on fixed features"};
  app.name("privtrain");
  app.require_subcommand(1);
  std::map<std::string, Bindings> bindings;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  for (const auto& name : CommandNames()) {
    CLI::App* sub = app.add_subcommand(name, Descriptions().find(name)->second);
    Bindings& b = bindings[name];
    sub->add_option("--config", b.config_file, "JSON config file")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    for (const auto& spec : CommandOptions(name)) {
      std::string help = spec.help + " [env " + EnvName(spec.key) + "]";
      if (spec.type == OptionType::kBool) {
        options[name][spec.key] = sub->add_flag(FlagName(spec.key), b.flag[spec.key], help);
      } else {
        if (!spec.default_value.is_null()) help += " (default " + spec.default_value.dump() + ")";
        options[name][spec.key] = sub->add_option(FlagName(spec.key), b.text[spec.key], help)
                                      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      }
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const Bindings& b = bindings[command];
  std::map<std::string, std::string> flags;
  for (const auto& [key, option] : options[command]) {
    if (option->count() == 0) continue;
    const auto it = b.flag.find(key);
    flags[key] = it != b.flag.end() ? (it->second ? "true" : "false") : b.text.at(key);
  }
  try {
    const nlohmann::json config = ResolveConfig(command, b.config_file, env, flags);
    const CommandResult result = Dispatch(command)(config);
    out << "run_dir: " << result.run_dir.string() << "\n" << result.summary.dump(1) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "privtrain " << command << ": " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "privtrain " << command << ": " << e.what() << "\n";
    return kExitCompute;
  }
}

}  // namespace privtrain::cli
