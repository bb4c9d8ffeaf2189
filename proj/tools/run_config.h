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

#ifndef QCHANNEL_TOOLS_RUN_CONFIG_H_
#define QCHANNEL_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qchannel/core_model.h"
#include "qchannel/rng.h"
#include "table.h"

namespace qchannel::cli {

inline constexpr std::string_view kOutputDirEnv = "QCHANNEL_OUT_DIR";

// Every subcommand's parameters. Only the fields a subcommand exposes are
// read by it; the rest keep their defaults.
struct RunConfig {
  std::string subcommand;

  int d = 12;
  int k = 2;
  double sigma = 0.1;
  double alpha = 0.0;
  double p = 0.5;
  int t = 25;
  AmplitudeMode amplitudes = AmplitudeMode::kStandardNormal;
  std::vector<int> t_grid;
  std::vector<double> sigma_grid;
  std::vector<double> alpha_grid;
  std::vector<int> d_grid;
  int trials = 500;
  int n_outer = 2000;
  int n_inner = 2000;
  std::optional<double> lambda;
  double lambda_ridge = 1.0;
  double range_bits = 8.0;
  int width = 64;
  int height = 64;
  std::vector<int> rect = {8, 8, 40, 40};
  std::int64_t q_seed = 1;
  Seed seed = 0;

  std::string out_dir = ".";
  OutputFormat format = OutputFormat::kCsv;
  int workers = 0;
  bool quiet = false;
};

std::vector<std::string> subcommand_names();

// Defaults of one subcommand (with output_dir taken from the environment).
RunConfig default_config(std::string_view subcommand);

// Constraint violations, each naming the offending flag. Empty when valid.
std::vector<std::string> validate(const RunConfig& config);

// Resolved parameters as flag -> value text, enough to rebuild the config
// through parse(). Reals are printed with 17 significant digits.
std::map<std::string, std::string> to_flag_values(const RunConfig& config);

// Grid syntax: comma-separated items; integer grids also accept a:b and a:b:s
// inclusive ranges.
std::vector<int> parse_int_grid(std::string_view text);
std::vector<double> parse_real_grid(std::string_view text);

enum class ParseStatus { kRun, kExit };

struct ParseResult {
  ParseStatus status = ParseStatus::kRun;
  int exit_code = 0;
  RunConfig config;
  // Set for "replay": the manifest to rerun.
  std::optional<std::string> manifest;
};

// Parses argv (argv[0] is the program name). Help, usage errors and
// validation failures are printed to `out` / `err` and reported as kExit
// with exit codes 0 or 2.
ParseResult parse(int argc, const char* const* argv, std::string* out, std::string* err);

}  // namespace qchannel::cli

#endif  // QCHANNEL_TOOLS_RUN_CONFIG_H_
