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

#include "run_config.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "qchannel/errors.h"
#include "qchannel/experiments.h"

namespace qchannel::cli {

namespace {

// Flags each subcommand exposes, in help order.
const std::map<std::string, std::vector<std::string>, std::less<>>& subcommand_flags() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> flags = {
      {"achievability",
       {"d", "k", "sigma", "p", "t-grid", "trials", "n-outer", "n-inner", "lambda", "seed"}},
      {"noise-sweep", {"d", "k", "t", "p", "sigma-grid", "trials", "lambda", "seed"}},
      {"curvature-sweep",
       {"d", "k", "t", "p", "alpha", "alpha-grid", "trials", "lambda", "q-seed", "seed"}},
      {"resolution-sweep",
       {"width", "height", "rect", "d-grid", "t", "sigma", "p", "lambda", "trials", "n-outer",
        "n-inner", "seed"}},
      {"mi-estimate", {"d", "k", "sigma", "p", "amplitudes", "t-grid", "n-outer", "n-inner", "seed"}},
      {"threshold", {"d", "k", "sigma", "p", "amplitudes", "t-grid", "n-outer", "n-inner", "seed"}},
      {"bounds", {"d", "k", "sigma", "t", "p", "amplitudes", "range-bits"}},
  };
  return flags;
}

std::string_view description(std::string_view subcommand) {
  if (subcommand == "achievability") return "Decoder success and MI estimate versus query budget T";
  if (subcommand == "noise-sweep") return "Block error of sparse and dense decoders versus noise level";
  if (subcommand == "curvature-sweep")
    return "Block error versus quadratic interference strength at zero noise";
  if (subcommand == "resolution-sweep")
    return "Ridge recovery of a synthetic image versus super-pixel count";
  if (subcommand == "mi-estimate") return "Monte Carlo mutual information estimate per T";
  if (subcommand == "threshold") return "Smallest T on the grid whose MI estimate reaches H(S)";
  if (subcommand == "bounds") return "Support entropy, capacity bounds and query lower bounds";
  return "";
}

std::string real_text(double v) { return fmt::format("{:.17g}", v); }

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += real_text(values[i]);
    } else {
      out += fmt::format("{}", values[i]);
    }
  }
  return out;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

long parse_long(const std::string& s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument(fmt::format("'{}' is not an integer", s));
  }
  return v;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw InvalidArgument(fmt::format("'{}' is not a finite number", s));
  }
  return v;
}

// Text-valued options, converted after CLI11 has parsed.
struct RawText {
  std::string t_grid, sigma_grid, alpha_grid, d_grid, rect, lambda, alpha, amplitudes, format;
};

struct Binding {
  RunConfig config;
  RawText raw;
  CLI::App* app = nullptr;
};

void add_flag(CLI::App& sub, const std::string& name, Binding& b) {
  RunConfig& c = b.config;
  RawText& r = b.raw;
  const std::string flag = "--" + name;
  if (name == "d") {
    sub.add_option(flag, c.d, "Number of features (super-pixels)")->capture_default_str();
  } else if (name == "k") {
    sub.add_option(flag, c.k, "Support size of the explanation")->capture_default_str();
  } else if (name == "sigma") {
    sub.add_option(flag, c.sigma, "Noise standard deviation")->capture_default_str();
  } else if (name == "p") {
    sub.add_option(flag, c.p, "Bernoulli mask keep-probability")->capture_default_str();
  } else if (name == "t") {
    sub.add_option(flag, c.t, "Number of queries T")->capture_default_str();
  } else if (name == "trials") {
    sub.add_option(flag, c.trials, "Monte Carlo trials per grid point")->capture_default_str();
  } else if (name == "n-outer") {
    sub.add_option(flag, c.n_outer, "Outer samples of the MI estimator")->capture_default_str();
  } else if (name == "n-inner") {
    sub.add_option(flag, c.n_inner, "Inner prior samples of the MI estimator")
        ->capture_default_str();
  } else if (name == "seed") {
    sub.add_option(flag, c.seed, "Master seed")->capture_default_str();
  } else if (name == "q-seed") {
    sub.add_option(flag, c.q_seed, "Seed of the interaction matrix")->capture_default_str();
  } else if (name == "range-bits") {
    sub.add_option(flag, c.range_bits, "Dynamic range log2(B / delta) of dense amplitudes")
        ->capture_default_str();
  } else if (name == "width") {
    sub.add_option(flag, c.width, "Image width in pixels")->capture_default_str();
  } else if (name == "height") {
    sub.add_option(flag, c.height, "Image height in pixels")->capture_default_str();
  } else if (name == "t-grid") {
    r.t_grid = join(c.t_grid);
    sub.add_option(flag, r.t_grid, "Query budgets T, e.g. 2:60 or 1,2,4")->capture_default_str();
  } else if (name == "sigma-grid") {
    r.sigma_grid = join(c.sigma_grid);
    sub.add_option(flag, r.sigma_grid, "Comma-separated noise levels");
  } else if (name == "alpha-grid") {
    r.alpha_grid = join(c.alpha_grid);
    sub.add_option(flag, r.alpha_grid, "Comma-separated interference strengths")
        ->capture_default_str();
  } else if (name == "alpha") {
    sub.add_option(flag, r.alpha, "Single interference strength (replaces --alpha-grid)");
  } else if (name == "d-grid") {
    r.d_grid = join(c.d_grid);
    sub.add_option(flag, r.d_grid, "Super-pixel counts; snapped to near-square grids")
        ->capture_default_str();
  } else if (name == "rect") {
    r.rect = join(c.rect);
    sub.add_option(flag, r.rect, "Salient rectangle x0,y0,x1,y1 (inclusive)")
        ->capture_default_str();
  } else if (name == "lambda") {
    if (c.subcommand == "resolution-sweep") {
      r.lambda = real_text(c.lambda_ridge);
      sub.add_option(flag, r.lambda, "Ridge penalty")->capture_default_str();
    } else {
      sub.add_option(flag, r.lambda,
                     "Lasso penalty (default: 0.1 sigma sqrt(2 ln d) sqrt(T), floored)");
    }
  } else if (name == "amplitudes") {
    r.amplitudes = std::string(to_string(c.amplitudes));
    sub.add_option(flag, r.amplitudes, "Amplitude prior")
        ->check(CLI::IsMember({"standard-normal", "signed-unit", "fixed-unit"}))
        ->capture_default_str();
  } else {
    throw std::logic_error("unknown flag " + name);
  }
}

void add_output_flags(CLI::App& sub, Binding& b) {
  b.raw.format = std::string(to_string(b.config.format));
  sub.add_option("--out", b.config.out_dir, "Output directory (default from " +
                                                std::string(kOutputDirEnv) + " or .)")
      ->capture_default_str();
  sub.add_option("--format", b.raw.format, "Result table format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub.add_option("--workers", b.config.workers, "Worker threads; 0 uses all cores")
      ->capture_default_str();
  sub.add_flag("--quiet", b.config.quiet, "Suppress progress lines");
}

// Applies the text options; conversion failures are reported like other
// constraint violations.
void resolve_text(Binding& b, std::vector<std::string>& errors) {
  RunConfig& c = b.config;
  const RawText& r = b.raw;
  const auto& flags = subcommand_flags().find(c.subcommand)->second;
  const auto has = [&](std::string_view f) {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
  };
  const auto guard = [&](std::string_view flag, const std::function<void()>& f) {
    try {
      f();
    } catch (const std::exception& e) {
      errors.push_back(fmt::format("--{}: {}", flag, e.what()));
    }
  };
  if (has("t-grid")) guard("t-grid", [&] { c.t_grid = parse_int_grid(r.t_grid); });
  if (has("sigma-grid")) guard("sigma-grid", [&] { c.sigma_grid = parse_real_grid(r.sigma_grid); });
  if (has("alpha-grid")) guard("alpha-grid", [&] { c.alpha_grid = parse_real_grid(r.alpha_grid); });
  if (has("alpha") && !r.alpha.empty()) {
    guard("alpha", [&] {
      c.alpha = parse_double(trim(r.alpha));
      c.alpha_grid = {c.alpha};
    });
  }
  if (has("d-grid")) guard("d-grid", [&] { c.d_grid = parse_int_grid(r.d_grid); });
  if (has("rect")) {
    guard("rect", [&] {
      c.rect = parse_int_grid(r.rect);
      require(c.rect.size() == 4, "expected four values x0,y0,x1,y1");
    });
  }
  if (has("lambda")) {
    guard("lambda", [&] {
      if (c.subcommand == "resolution-sweep") {
        c.lambda_ridge = parse_double(trim(r.lambda));
      } else if (!trim(r.lambda).empty()) {
        c.lambda = parse_double(trim(r.lambda));
      }
    });
  }
  if (has("amplitudes")) guard("amplitudes", [&] { c.amplitudes = parse_amplitude_mode(r.amplitudes); });
  c.format = *parse_output_format(r.format);
}

}  // namespace

std::vector<std::string> subcommand_names() {
  std::vector<std::string> names;
  for (const auto& [name, flags] : subcommand_flags()) names.push_back(name);
  return names;
}

RunConfig default_config(std::string_view subcommand) {
  require(subcommand_flags().count(subcommand) == 1,
          fmt::format("unknown subcommand '{}'", subcommand));
  RunConfig c;
  c.subcommand = std::string(subcommand);
  if (const char* dir = std::getenv(std::string(kOutputDirEnv).c_str()); dir && *dir) {
    c.out_dir = dir;
  }
  if (subcommand == "achievability") {
    c.t_grid = default_achievability_grid();
  } else if (subcommand == "noise-sweep" || subcommand == "curvature-sweep") {
    const WaterfallConfig w;
    c.d = w.d;
    c.k = w.k;
    c.t = w.t;
    c.trials = w.n_trials;
    c.sigma_grid = default_sigma_grid();
    c.alpha_grid = default_alpha_grid();
  } else if (subcommand == "resolution-sweep") {
    const ResolutionConfig r;
    c.width = r.width;
    c.height = r.height;
    c.rect = {r.salient_rect.x0, r.salient_rect.y0, r.salient_rect.x1, r.salient_rect.y1};
    c.t = r.t;
    c.sigma = r.sigma;
    c.lambda_ridge = r.lambda_ridge;
    c.trials = r.n_trials;
    c.n_outer = r.n_outer;
    c.n_inner = r.n_inner;
    c.d_grid = default_resolution_grid(r.t);
  } else if (subcommand == "mi-estimate") {
    c.t_grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  } else if (subcommand == "threshold") {
    c.t_grid.resize(40);
    std::iota(c.t_grid.begin(), c.t_grid.end(), 1);
  } else if (subcommand == "bounds") {
    c.t = 60;
  }
  return c;
}

std::vector<int> parse_int_grid(std::string_view text) {
  std::vector<int> out;
  for (const std::string& item : split(text, ',')) {
    const std::string s = trim(item);
    require(!s.empty(), "empty grid entry");
    const std::vector<std::string> parts = split(s, ':');
    require(parts.size() <= 3, fmt::format("bad range '{}'", s));
    if (parts.size() == 1) {
      out.push_back(static_cast<int>(parse_long(s)));
      continue;
    }
    const long lo = parse_long(trim(parts[0]));
    const long hi = parse_long(trim(parts[1]));
    const long step = parts.size() == 3 ? parse_long(trim(parts[2])) : 1;
    require(step > 0, fmt::format("range step must be > 0 in '{}'", s));
    require(lo <= hi, fmt::format("empty range '{}'", s));
    for (long v = lo; v <= hi; v += step) out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<double> parse_real_grid(std::string_view text) {
  std::vector<double> out;
  for (const std::string& item : split(text, ',')) {
    const std::string s = trim(item);
    require(!s.empty(), "empty grid entry");
    out.push_back(parse_double(s));
  }
  return out;
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> errors;
  const auto& flags = subcommand_flags().find(c.subcommand)->second;
  const auto has = [&](std::string_view f) {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
  };
  const auto check = [&](bool ok, std::string msg) {
    if (!ok) errors.push_back(std::move(msg));
  };
  const auto increasing = [](const auto& g) {
    for (std::size_t i = 1; i < g.size(); ++i) {
      if (!(g[i] > g[i - 1])) return false;
    }
    return true;
  };

  if (has("d")) check(c.d >= 1, fmt::format("--d: must be >= 1 (got {})", c.d));
  if (has("k")) {
    check(c.k >= 1, fmt::format("--k: must be >= 1 (got {})", c.k));
    check(c.k <= c.d, fmt::format("--k: must satisfy k <= d (k = {}, d = {})", c.k, c.d));
  }
  if (has("sigma")) {
    check(c.sigma > 0.0, fmt::format("--sigma: must be > 0 (got {})", c.sigma));
  }
  if (has("p")) check(c.p > 0.0 && c.p < 1.0, fmt::format("--p: must lie in (0, 1) (got {})", c.p));
  if (has("t")) check(c.t >= 1, fmt::format("--t: must be >= 1 (got {})", c.t));
  if (has("trials")) check(c.trials >= 1, fmt::format("--trials: must be >= 1 (got {})", c.trials));
  if (has("n-outer")) {
    check(c.n_outer >= 1, fmt::format("--n-outer: must be >= 1 (got {})", c.n_outer));
  }
  if (has("n-inner")) {
    check(c.n_inner >= 2, fmt::format("--n-inner: must be >= 2 (got {})", c.n_inner));
  }
  if (has("t-grid")) {
    check(!c.t_grid.empty(), "--t-grid: must be nonempty");
    check(increasing(c.t_grid), "--t-grid: must be strictly increasing");
    for (int t : c.t_grid) {
      if (t < 1) {
        errors.push_back(fmt::format("--t-grid: entries must be >= 1 (got {})", t));
        break;
      }
    }
  }
  if (has("sigma-grid")) {
    check(!c.sigma_grid.empty(), "--sigma-grid: must be nonempty");
    for (double s : c.sigma_grid) {
      if (s < 0.0) {
        errors.push_back(fmt::format("--sigma-grid: entries must be >= 0 (got {})", s));
        break;
      }
    }
  }
  if (has("alpha-grid")) {
    check(!c.alpha_grid.empty(), "--alpha-grid: must be nonempty");
    for (double a : c.alpha_grid) {
      if (a < 0.0) {
        errors.push_back(fmt::format("--alpha-grid: entries must be >= 0 (got {})", a));
        break;
      }
    }
  }
  if (has("d-grid")) {
    check(!c.d_grid.empty(), "--d-grid: must be nonempty");
    for (int d : c.d_grid) {
      if (d < 1 || d > c.width * c.height) {
        errors.push_back(fmt::format("--d-grid: entries must lie in [1, {}] (got {})",
                                     c.width * c.height, d));
        break;
      }
    }
  }
  if (has("width")) check(c.width >= 1, fmt::format("--width: must be >= 1 (got {})", c.width));
  if (has("height")) check(c.height >= 1, fmt::format("--height: must be >= 1 (got {})", c.height));
  if (has("rect") && c.rect.size() == 4) {
    const bool fits = 0 <= c.rect[0] && c.rect[0] <= c.rect[2] && c.rect[2] < c.width &&
                      0 <= c.rect[1] && c.rect[1] <= c.rect[3] && c.rect[3] < c.height;
    check(fits, fmt::format("--rect: ({},{})-({},{}) must fit inside the {}x{} image", c.rect[0],
                            c.rect[1], c.rect[2], c.rect[3], c.width, c.height));
  }
  if (has("lambda")) {
    if (c.subcommand == "resolution-sweep") {
      check(c.lambda_ridge > 0.0, fmt::format("--lambda: must be > 0 (got {})", c.lambda_ridge));
    } else if (c.lambda) {
      check(*c.lambda >= 0.0, fmt::format("--lambda: must be >= 0 (got {})", *c.lambda));
    }
  }
  if (has("range-bits")) {
    check(c.range_bits > 0.0, fmt::format("--range-bits: must be > 0 (got {})", c.range_bits));
  }
  check(c.workers >= 0, fmt::format("--workers: must be >= 0 (got {})", c.workers));
  return errors;
}

std::map<std::string, std::string> to_flag_values(const RunConfig& c) {
  std::map<std::string, std::string> out;
  for (const std::string& f : subcommand_flags().find(c.subcommand)->second) {
    std::string v;
    if (f == "d") v = fmt::format("{}", c.d);
    else if (f == "k") v = fmt::format("{}", c.k);
    else if (f == "sigma") v = real_text(c.sigma);
    else if (f == "p") v = real_text(c.p);
    else if (f == "t") v = fmt::format("{}", c.t);
    else if (f == "trials") v = fmt::format("{}", c.trials);
    else if (f == "n-outer") v = fmt::format("{}", c.n_outer);
    else if (f == "n-inner") v = fmt::format("{}", c.n_inner);
    else if (f == "seed") v = fmt::format("{}", c.seed);
    else if (f == "q-seed") v = fmt::format("{}", c.q_seed);
    else if (f == "range-bits") v = real_text(c.range_bits);
    else if (f == "width") v = fmt::format("{}", c.width);
    else if (f == "height") v = fmt::format("{}", c.height);
    else if (f == "t-grid") v = join(c.t_grid);
    else if (f == "sigma-grid") v = join(c.sigma_grid);
    else if (f == "alpha-grid") v = join(c.alpha_grid);
    else if (f == "d-grid") v = join(c.d_grid);
    else if (f == "rect") v = join(c.rect);
    else if (f == "amplitudes") v = std::string(to_string(c.amplitudes));
    else if (f == "alpha") continue;  // folded into alpha-grid
    else if (f == "lambda") {
      if (c.subcommand == "resolution-sweep") {
        v = real_text(c.lambda_ridge);
      } else if (c.lambda) {
        v = real_text(*c.lambda);
      } else {
        continue;
      }
    }
    out[f] = v;
  }
  out["format"] = std::string(to_string(c.format));
  return out;
}

ParseResult parse(int argc, const char* const* argv, std::string* out, std::string* err) {
  CLI::App app{"Simulate sparse explanation recovery over a masked query channel"};
  app.name("qchannel");
  app.set_version_flag("--version", QCHANNEL_VERSION);
  app.set_config("--config", "", "INI file; [subcommand] sections hold flag = value lines");
  app.require_subcommand(1);

  std::map<std::string, std::unique_ptr<Binding>> bindings;
  for (const std::string& name : subcommand_names()) {
    auto b = std::make_unique<Binding>();
    b->config = default_config(name);
    b->app = app.add_subcommand(name, std::string(description(name)));
    for (const std::string& f : subcommand_flags().find(name)->second) add_flag(*b->app, f, *b);
    add_output_flags(*b->app, *b);
    bindings.emplace(name, std::move(b));
  }
  std::string manifest;
  int replay_workers = -1;
  std::string replay_out;
  CLI::App* replay = app.add_subcommand("replay", "Rerun a subcommand from its run manifest");
  replay->add_option("manifest", manifest, "Manifest JSON written by an earlier run")->required();
  replay->add_option("--workers", replay_workers, "Override the worker count");
  replay->add_option("--out", replay_out, "Override the output directory");

  ParseResult result;
  std::ostringstream out_stream;
  std::ostringstream err_stream;
  if (argc <= 1) {
    out_stream << app.help();
    result.status = ParseStatus::kExit;
    result.exit_code = 2;
    if (err) *err = out_stream.str();
    return result;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    result.status = ParseStatus::kExit;
    result.exit_code = app.exit(e, out_stream, err_stream) == 0 ? 0 : 2;
    if (out) *out = out_stream.str();
    if (err) *err = err_stream.str();
    return result;
  }

  if (replay->parsed()) {
    result.manifest = manifest;
    result.config.subcommand = "replay";
    result.config.workers = replay_workers;
    result.config.out_dir = replay_out;
    return result;
  }
  for (auto& [name, b] : bindings) {
    if (!b->app->parsed()) continue;
    std::vector<std::string> errors;
    resolve_text(*b, errors);
    if (errors.empty()) errors = validate(b->config);
    if (!errors.empty()) {
      for (const std::string& e : errors) err_stream << "error: " << e << '\n';
      err_stream << "Run with " << name << " --help for the parameter table.\n";
      result.status = ParseStatus::kExit;
      result.exit_code = 2;
      if (err) *err = err_stream.str();
      return result;
    }
    result.config = b->config;
    return result;
  }
  throw std::logic_error("no subcommand parsed");
}

}  // namespace qchannel::cli
