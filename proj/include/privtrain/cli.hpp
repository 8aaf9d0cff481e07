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


#ifndef PRIVTRAIN_CLI_HPP_
#define PRIVTRAIN_CLI_HPP_

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "privtrain/errors.hpp"

namespace privtrain::cli {

enum ExitCode : int { kExitOk = 0, kExitCompute = 1, kExitUsage = 2 };

// kNumerical and kIo are compute failures; everything else is a usage or
// validation error.
int ExitCodeFor(ErrorCode code);

enum class OptionType { kInt, kFloat, kBool, kString };

struct OptionSpec {
  std::string key;
  OptionType type = OptionType::kString;
  // null: unset unless supplied.
  nlohmann::json default_value;
  std::string help;
  bool required = false;
  // Input path that must exist before any compute starts.
  bool input_path = false;
  // Excluded from the run-directory hash.
  bool output_only = false;
};

const std::vector<std::string>& CommandNames();
const std::vector<OptionSpec>& CommandOptions(std::string_view command);

// Returns the value of an environment variable, if set.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> ProcessEnv(const std::string& name);

// "PRIVTRAIN_" + upper-cased key.
std::string EnvName(std::string_view key);

nlohmann::json ParseValue(const OptionSpec& spec, std::string_view text);

// defaults < config file < environment < flags. Unknown keys in the file and
// missing required keys are kConfig errors; required input paths must exist.
nlohmann::json ResolveConfig(std::string_view command, const std::string& config_file,
                             const EnvLookup& env, const std::map<std::string, std::string>& flags);

// 16 hex digits of FNV-1a over the canonical config, output-only keys removed.
std::string ConfigHash(std::string_view command, const nlohmann::json& config);

// config["run_dir"] if set, else out_root/<UTC timestamp>-<hash>[-k]. The
// directory is created and must not already contain a run.
std::filesystem::path CreateRunDir(std::string_view command, const nlohmann::json& config);

// Archived as config.json; loadable again through --config.
nlohmann::json ArchivedConfig(std::string_view command, const nlohmann::json& config);

struct CommandResult {
  std::filesystem::path run_dir;
  nlohmann::json summary;
};

CommandResult CmdSynth(const nlohmann::json& config);
CommandResult CmdExtract(const nlohmann::json& config);
CommandResult CmdTrain(const nlohmann::json& config);
CommandResult CmdAccount(const nlohmann::json& config);
CommandResult CmdSweep(const nlohmann::json& config);
CommandResult CmdEvaluate(const nlohmann::json& config);

// Full command line: privtrain <command> [--config file] [--key value ...].
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const EnvLookup& env = ProcessEnv);

}  // namespace privtrain::cli

#endif  // PRIVTRAIN_CLI_HPP_
