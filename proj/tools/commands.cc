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

#include "commands.h"

#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/core.h>

#include "qchannel/errors.h"
#include "qchannel/experiments.h"
#include "qchannel/info_theory.h"
#include "qchannel/mi_estimator.h"

namespace qchannel::cli {

namespace {

using std::int64_t;

Cell integer(int64_t v) { return Cell(v); }
Cell integer(std::optional<int64_t> v) { return v ? Cell(*v) : Cell(std::monostate{}); }
Cell real(double v) { return Cell(v); }

nlohmann::ordered_json json_or_null(std::optional<int> v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

MiConfig mi_config(const RunConfig& c) {
  MiConfig mi;
  mi.d = c.d;
  mi.k = c.k;
  mi.sigma = c.sigma;
  mi.p = c.p;
  mi.n_outer = c.n_outer;
  mi.n_inner = c.n_inner;
  mi.t_grid = c.t_grid;
  mi.seed = c.seed;
  mi.amplitude_mode = c.amplitudes;
  mi.workers = c.workers;
  return mi;
}

WaterfallConfig waterfall_config(const RunConfig& c) {
  WaterfallConfig w;
  w.d = c.d;
  w.k = c.k;
  w.t = c.t;
  w.p = c.p;
  w.n_trials = c.trials;
  w.lasso_lambda = c.lambda;
  w.seed = c.seed;
  w.workers = c.workers;
  return w;
}

class Progress {
 public:
  Progress(const RunConfig& c, std::ostream& out, std::size_t total)
      : quiet_(c.quiet), name_(c.subcommand), out_(out), total_(total) {}

  void step(const std::string& what) {
    ++done_;
    if (!quiet_) out_ << fmt::format("[{}] {} ({}/{})\n", name_, what, done_, total_) << std::flush;
  }

 private:
  bool quiet_;
  std::string name_;
  std::ostream& out_;
  std::size_t total_;
  std::size_t done_ = 0;
};

std::vector<std::string> waterfall_columns(const std::string& variable, const std::string& ratio,
                                           const std::string& distortion) {
  return {variable,     ratio,          "signal_power",   distortion,       "sparse_perr",
          "sparse_stderr", "dense_perr", "dense_stderr", "sparse_errored", "dense_errored"};
}

void add_waterfall_row(Table& table, const SweepResult& r) {
  const DecoderStat& s = r.decoder("sparse");
  const DecoderStat& d = r.decoder("dense");
  table.add_row({real(r.value), cell(r.power->ratio_db), real(r.power->signal_power),
                 real(r.power->distortion_power), real(s.value), real(s.std_error),
                 real(d.value), real(d.std_error), integer(s.errored), integer(d.errored)});
}

RunOutput run_achievability(const RunConfig& c, std::ostream& progress) {
  AchievabilityConfig a;
  a.d = c.d;
  a.k = c.k;
  a.sigma = c.sigma;
  a.p = c.p;
  a.t_grid = c.t_grid;
  a.n_trials = c.trials;
  a.n_outer = c.n_outer;
  a.n_inner = c.n_inner;
  a.lasso_lambda = c.lambda;
  a.seed = c.seed;
  a.workers = c.workers;
  Progress bar(c, progress, c.t_grid.size());
  const AchievabilityReport report = run_achievability_sweep(
      a, [&](const SweepResult& r) { bar.step(fmt::format("T = {}", r.value)); });

  RunOutput out{Table({"T", "mi_bits", "mi_stderr", "entropy_bits", "ml_rate", "ml_stderr",
                       "lasso_rate", "lasso_stderr", "ols_rate", "ols_stderr"})};
  for (const SweepResult& r : report.rows) {
    const DecoderStat& ml = r.decoder("ml");
    const DecoderStat& lasso = r.decoder("lasso");
    const DecoderStat& ols = r.decoder("ols");
    out.table.add_row({integer(static_cast<int64_t>(r.value)), real(r.mi->value_bits),
                       real(r.mi->std_error_bits), real(r.entropy_bits), real(ml.value),
                       real(ml.std_error), real(lasso.value), real(lasso.std_error),
                       real(ols.value), real(ols.std_error)});
  }
  out.summary["entropy_bits"] = report.entropy_bits;
  out.summary["t_it"] = json_or_null(report.t_it);
  out.summary["analytic_marker_bits"] = report.analytic_marker;
  return out;
}

RunOutput run_noise(const RunConfig& c, std::ostream& progress) {
  Progress bar(c, progress, c.sigma_grid.size());
  const auto rows = run_noise_sweep(waterfall_config(c), c.sigma_grid, [&](const SweepResult& r) {
    bar.step(fmt::format("sigma = {:.6g}", r.value));
  });
  RunOutput out{Table(waterfall_columns("sigma", "snr_db", "noise_power"))};
  for (const SweepResult& r : rows) add_waterfall_row(out.table, r);
  return out;
}

RunOutput run_curvature(const RunConfig& c, std::ostream& progress) {
  CurvatureConfig cc;
  cc.base = waterfall_config(c);
  cc.q_seed = static_cast<Seed>(c.q_seed);
  Progress bar(c, progress, c.alpha_grid.size());
  const auto rows = run_curvature_sweep(cc, c.alpha_grid, [&](const SweepResult& r) {
    bar.step(fmt::format("alpha = {:.6g}", r.value));
  });
  RunOutput out{Table(waterfall_columns("alpha", "sir_db", "interference_power"))};
  for (const SweepResult& r : rows) add_waterfall_row(out.table, r);
  return out;
}

RunOutput run_resolution(const RunConfig& c, std::ostream& progress) {
  ResolutionConfig rc;
  rc.width = c.width;
  rc.height = c.height;
  rc.salient_rect = {c.rect[0], c.rect[1], c.rect[2], c.rect[3]};
  rc.d_grid = c.d_grid;
  rc.t = c.t;
  rc.sigma = c.sigma;
  rc.p = c.p;
  rc.lambda_ridge = c.lambda_ridge;
  rc.n_outer = c.n_outer;
  rc.n_inner = c.n_inner;
  rc.n_trials = c.trials;
  rc.seed = c.seed;
  rc.workers = c.workers;
  Progress bar(c, progress, c.d_grid.size());
  const auto rows = run_resolution_sweep(
      rc, [&](const SweepResult& r) { bar.step(fmt::format("d = {}", r.value)); });
  RunOutput out{Table({"d_requested", "d", "grid_rows", "grid_cols", "k_eff", "entropy_bits",
                       "mi_bits", "mi_stderr", "correlation", "feasible"})};
  for (const SweepResult& r : rows) {
    const ResolutionInfo& info = *r.resolution;
    out.table.add_row({integer(info.requested_d), integer(static_cast<int64_t>(r.value)),
                       integer(info.grid_rows), integer(info.grid_cols), integer(info.k_eff),
                       real(r.entropy_bits), real(r.mi->value_bits), real(r.mi->std_error_bits),
                       cell(r.correlation), integer(info.information_feasible ? 1 : 0)});
  }
  return out;
}

RunOutput run_mi(const RunConfig& c, std::ostream& progress) {
  const MiConfig mi = mi_config(c);
  validate(mi);
  Progress bar(c, progress, c.t_grid.size());
  const double h = support_entropy(c.d, c.k);
  RunOutput out{Table({"T", "mi_bits", "mi_stderr", "n_outer", "n_inner", "entropy_bits"})};
  for (int t : c.t_grid) {
    const MiEstimate e = estimate_mutual_information(mi, t);
    out.table.add_row({integer(t), real(e.value_bits), real(e.std_error_bits), integer(e.n_outer),
                       integer(e.n_inner), real(h)});
    bar.step(fmt::format("T = {}", t));
  }
  return out;
}

RunOutput run_threshold(const RunConfig& c, std::ostream& progress) {
  Progress bar(c, progress, 1);
  const ThresholdResult res = find_information_threshold(mi_config(c));
  bar.step("grid done");
  RunOutput out{Table({"T", "mi_bits", "mi_stderr", "entropy_bits", "reached"})};
  for (const MiEstimate& e : res.table) {
    out.table.add_row({integer(e.t), real(e.value_bits), real(e.std_error_bits),
                       real(res.entropy_bits), integer(e.value_bits >= res.entropy_bits ? 1 : 0)});
  }
  out.summary["entropy_bits"] = res.entropy_bits;
  out.summary["t_it"] = json_or_null(res.t_it);
  return out;
}

RunOutput run_bounds(const RunConfig& c) {
  const double h = support_entropy(c.d, c.k);
  const double c_env = capacity_envelope(c.d, c.k, c.sigma, c.amplitudes);
  const double c_pol = policy_capacity_bound(c.d, c.k, c.sigma, c.p, c.amplitudes);
  RunOutput out{Table({"d", "k", "T", "sigma", "entropy_bits", "rate_bits_per_query",
                       "capacity_envelope_bits", "policy_capacity_bits", "dense_query_bound",
                       "sparse_query_bound", "d_crit"})};
  out.table.add_row({integer(c.d), integer(c.k), integer(c.t), real(c.sigma), real(h),
                     real(explanation_rate(h, c.t)), real(c_env), real(c_pol),
                     real(dense_query_lower_bound(c.d, c.range_bits, c_env)),
                     real(sparse_query_lower_bound(c.d, c.k, c_env)),
                     integer(critical_resolution(c.t, c.k, c_env))});
  return out;
}

}  // namespace

RunOutput run(const RunConfig& c, std::ostream& progress) {
  if (c.subcommand == "achievability") return run_achievability(c, progress);
  if (c.subcommand == "noise-sweep") return run_noise(c, progress);
  if (c.subcommand == "curvature-sweep") return run_curvature(c, progress);
  if (c.subcommand == "resolution-sweep") return run_resolution(c, progress);
  if (c.subcommand == "mi-estimate") return run_mi(c, progress);
  if (c.subcommand == "threshold") return run_threshold(c, progress);
  if (c.subcommand == "bounds") return run_bounds(c);
  throw InvalidArgument(fmt::format("unknown subcommand '{}'", c.subcommand));
}

WrittenFiles output_paths(const RunConfig& c) {
  const std::filesystem::path dir = c.out_dir.empty() ? "." : c.out_dir;
  return {dir / fmt::format("{}.{}", c.subcommand, to_string(c.format)),
          dir / fmt::format("{}.manifest.json", c.subcommand)};
}

nlohmann::ordered_json make_manifest(const RunConfig& c, const RunOutput& output,
                                     double wall_seconds) {
  nlohmann::ordered_json m;
  m["tool"] = "qchannel";
  m["version"] = QCHANNEL_VERSION;
  m["subcommand"] = c.subcommand;
  m["seed"] = c.seed;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [flag, value] : to_flag_values(c)) params[flag] = value;
  m["params"] = std::move(params);
  m["workers"] = c.workers;
  m["output_dir"] = c.out_dir;
  m["table"] = output_paths(c).table.filename().string();
  m["summary"] = output.summary;
  m["wall_time_seconds"] = wall_seconds;
  return m;
}

WrittenFiles execute(const RunConfig& c, std::ostream& progress) {
  const auto start = std::chrono::steady_clock::now();
  const RunOutput output = run(c, progress);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const WrittenFiles files = output_paths(c);
  write_atomically(files.table, format_table(output.table, c.format));
  write_atomically(files.manifest, make_manifest(c, output, wall).dump(2) + "\n");
  return files;
}

RunConfig config_from_manifest(const nlohmann::json& manifest, std::optional<int> workers,
                               std::optional<std::string> out_dir) {
  require(manifest.is_object() && manifest.contains("subcommand") && manifest.contains("params"),
          "manifest must hold 'subcommand' and 'params'");
  std::vector<std::string> args = {"qchannel", manifest.at("subcommand").get<std::string>()};
  for (const auto& [flag, value] : manifest.at("params").items()) {
    args.push_back("--" + flag);
    args.push_back(value.get<std::string>());
  }
  args.push_back("--workers");
  args.push_back(std::to_string(workers.value_or(manifest.value("workers", 0))));
  args.push_back("--out");
  args.push_back(out_dir.value_or(manifest.value("output_dir", std::string("."))));
  args.push_back("--quiet");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::string err;
  ParseResult parsed = parse(static_cast<int>(argv.size()), argv.data(), nullptr, &err);
  if (parsed.status != ParseStatus::kRun) {
    throw InvalidArgument("manifest does not describe a valid run: " + err);
  }
  return parsed.config;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::string out_text;
  std::string err_text;
  ParseResult parsed;
  try {
    parsed = parse(argc, argv, &out_text, &err_text);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  out << out_text;
  err << err_text;
  if (parsed.status == ParseStatus::kExit) return parsed.exit_code;

  try {
    RunConfig config = parsed.config;
    if (parsed.manifest) {
      std::ifstream in(*parsed.manifest);
      if (!in) {
        err << "error: cannot read manifest " << *parsed.manifest << '\n';
        return 2;
      }
      nlohmann::json m;
      try {
        m = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        err << "error: manifest is not valid JSON: " << e.what() << '\n';
        return 2;
      }
      const std::optional<int> workers =
          parsed.config.workers >= 0 ? std::optional<int>(parsed.config.workers) : std::nullopt;
      const std::optional<std::string> dir =
          parsed.config.out_dir.empty() ? std::nullopt : std::optional(parsed.config.out_dir);
      try {
        config = config_from_manifest(m, workers, dir);
      } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
      }
    }
    const WrittenFiles files = execute(config, err);
    out << files.table.string() << '\n' << files.manifest.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace qchannel::cli
