/*
 * Copyright 2026 The qchannel Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef QCHANNEL_TOOLS_COMMANDS_H_
#define QCHANNEL_TOOLS_COMMANDS_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "run_config.h"
#include "table.h"

namespace qchannel::cli {

struct RunOutput {
  Table table;
  // Subcommand-specific scalars (T_IT, markers) recorded in the manifest.
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

// Runs the configured subcommand. Progress lines go to `progress` unless the
// config is quiet.
RunOutput run(const RunConfig& config, std::ostream& progress);

struct WrittenFiles {
  std::filesystem::path table;
  std::filesystem::path manifest;
};

// <out_dir>/<subcommand>.<csv|json> and <out_dir>/<subcommand>.manifest.json
WrittenFiles output_paths(const RunConfig& config);

nlohmann::ordered_json make_manifest(const RunConfig& config, const RunOutput& output,
                                     double wall_seconds);

// Runs, then writes the table and the manifest atomically.
WrittenFiles execute(const RunConfig& config, std::ostream& progress);

// Rebuilds the RunConfig recorded in a manifest. `workers` and `out_dir`
// override the recorded values when set; neither changes the table bytes.
RunConfig config_from_manifest(const nlohmann::json& manifest, std::optional<int> workers,
                               std::optional<std::string> out_dir);

// Full command-line entry point; returns the process exit status.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qchannel::cli

#endif  // QCHANNEL_TOOLS_COMMANDS_H_
