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

#include "qchannel/experiments.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <fmt/core.h>

#include "qchannel/errors.h"
#include "qchannel/info_theory.h"
#include "qchannel/parallel.h"
#include "qchannel/stats.h"

namespace qchannel {

namespace {

DecoderStat make_stat(std::string name, const std::vector<TrialOutcome>& trials,
                      std::size_t index, bool report_error) {
  const RecoveryStats s = summarize(trials, index);
  DecoderStat stat;
  stat.name = std::move(name);
  stat.value = report_error ? 1.0 - s.rate : s.rate;
  stat.std_error = s.std_error;
  stat.errored = s.errored;
  stat.trial_success.reserve(trials.size());
  for (const TrialOutcome& t : trials) stat.trial_success.push_back(t.success[index]);
  return stat;
}

PowerStats make_power(const std::vector<TrialOutcome>& trials, bool interference) {
  PowerStats power;
  for (const TrialOutcome& t : trials) {
    power.trial_signal_power.push_back(t.signal_power);
    power.trial_distortion_power.push_back(interference ? t.interference_power : t.noise_power);
  }
  const double n = static_cast<double>(trials.size());
  power.signal_power =
      std::accumulate(power.trial_signal_power.begin(), power.trial_signal_power.end(), 0.0) / n;
  power.distortion_power = std::accumulate(power.trial_distortion_power.begin(),
                                           power.trial_distortion_power.end(), 0.0) /
                           n;
  power.ratio_db = power_ratio_db(power.signal_power, power.distortion_power);
  return power;
}

void validate_waterfall(const WaterfallConfig& c) {
  require(c.d >= 1, fmt::format("d must be >= 1, got {}", c.d));
  require(c.k >= 1 && c.k <= c.d, fmt::format("k must satisfy 1 <= k <= d = {}, got {}", c.d, c.k));
  require(c.t >= 1, fmt::format("T must be >= 1, got {}", c.t));
  require(c.p > 0.0 && c.p < 1.0, fmt::format("p must lie in (0, 1), got {}", c.p));
  require(c.n_trials >= 1, fmt::format("trials must be >= 1, got {}", c.n_trials));
}

DecoderSpec spec_for(DecoderId id) {
  DecoderSpec spec;
  spec.id = id;
  return spec;
}

std::vector<DecoderSpec> waterfall_decoders(const WaterfallConfig& c) {
  DecoderSpec sparse = spec_for(DecoderId::kLasso);
  sparse.lasso_lambda = c.lasso_lambda;
  sparse.lasso = c.lasso;
  return {sparse, spec_for(DecoderId::kOls)};
}

std::vector<int> divisors_near_sqrt(int d) {
  std::vector<int> out;
  for (int r = 1; static_cast<long>(r) * r <= d; ++r) {
    if (d % r == 0) out.push_back(r);
  }
  return out;
}

}  // namespace

const DecoderStat& SweepResult::decoder(const std::string& name) const {
  for (const DecoderStat& s : decoders) {
    if (s.name == name) return s;
  }
  throw InvalidArgument(fmt::format("no decoder named '{}' in this row", name));
}

std::optional<double> power_ratio_db(double signal_power, double distortion_power) {
  if (!(distortion_power > 0.0) || !(signal_power > 0.0)) return std::nullopt;
  return 10.0 * std::log10(signal_power / distortion_power);
}

std::vector<int> default_achievability_grid() {
  std::vector<int> grid(59);
  std::iota(grid.begin(), grid.end(), 2);
  return grid;
}

AchievabilityReport run_achievability_sweep(const AchievabilityConfig& config,
                                            const RowCallback& on_row) {
  require(config.d >= 1, fmt::format("d must be >= 1, got {}", config.d));
  require(config.k >= 1 && config.k <= config.d,
          fmt::format("k must satisfy 1 <= k <= d = {}, got {}", config.d, config.k));
  require(config.sigma > 0.0, fmt::format("sigma must be > 0, got {}", config.sigma));
  require(config.n_trials >= 1, fmt::format("trials must be >= 1, got {}", config.n_trials));
  const std::vector<int> grid = config.t_grid.empty() ? default_achievability_grid() : config.t_grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] >= 0, "T grid entries must be >= 0");
    require(i == 0 || grid[i] > grid[i - 1], "T grid must be strictly increasing");
  }

  AchievabilityReport report;
  report.entropy_bits = support_entropy(config.d, config.k);
  report.analytic_marker =
      config.k * std::log2(static_cast<double>(config.d) / static_cast<double>(config.k));

  MiConfig mi;
  mi.d = config.d;
  mi.k = config.k;
  mi.sigma = config.sigma;
  mi.p = config.p;
  mi.n_outer = config.n_outer;
  mi.n_inner = config.n_inner;
  mi.seed = config.seed;
  mi.workers = config.workers;

  ChannelConfig channel;
  channel.d = config.d;
  channel.k = config.k;
  channel.sigma = config.sigma;
  channel.p = config.p;

  DecoderSpec ml = spec_for(DecoderId::kMaximumLikelihood);
  ml.enumeration_cap = config.enumeration_cap;
  DecoderSpec lasso = spec_for(DecoderId::kLasso);
  lasso.lasso_lambda = config.lasso_lambda;
  lasso.lasso = config.lasso;
  const std::vector<DecoderSpec> decoders = {ml, lasso, spec_for(DecoderId::kOls)};
  const Seed trial_seed = derive_seed(config.seed, Stream::kSweepPoint);

  for (int t : grid) {
    SweepResult row;
    row.variable = "T";
    row.value = t;
    row.entropy_bits = report.entropy_bits;
    if (config.estimate_mi) {
      row.mi = estimate_mutual_information(mi, t);
    }
    const auto trials =
        run_recovery_trials(decoders, channel, t, config.n_trials, trial_seed, config.workers);
    row.decoders.push_back(make_stat("ml", trials, 0, false));
    row.decoders.push_back(make_stat("lasso", trials, 1, false));
    row.decoders.push_back(make_stat("ols", trials, 2, false));
    if (on_row) on_row(row);
    report.rows.push_back(std::move(row));
  }
  if (config.estimate_mi) {
    std::vector<MiEstimate> table;
    for (const SweepResult& r : report.rows) table.push_back(*r.mi);
    report.t_it = threshold_crossing(table, report.entropy_bits);
  }
  return report;
}

std::vector<double> default_sigma_grid() {
  // Mean signal power is p k = 1.5 for the default configuration, so these
  // span roughly -25 dB to +45 dB.
  std::vector<double> grid;
  for (int i = 0; i <= 28; ++i) grid.push_back(std::pow(10.0, 1.5 - 0.125 * i));
  return grid;
}

std::vector<double> default_alpha_grid() {
  return {0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0};
}

std::vector<SweepResult> run_noise_sweep(const WaterfallConfig& config,
                                         const std::vector<double>& sigma_grid,
                                         const RowCallback& on_row) {
  validate_waterfall(config);
  require(!sigma_grid.empty(), "sigma grid must be nonempty");
  ChannelConfig channel;
  channel.d = config.d;
  channel.k = config.k;
  channel.p = config.p;
  channel.amplitude_mode = AmplitudeMode::kSignedUnit;
  const auto decoders = waterfall_decoders(config);

  std::vector<SweepResult> rows;
  for (double sigma : sigma_grid) {
    require(sigma >= 0.0 && std::isfinite(sigma), fmt::format("sigma must be >= 0, got {}", sigma));
    channel.sigma = sigma;
    const auto trials =
        run_recovery_trials(decoders, channel, config.t, config.n_trials, config.seed, config.workers);
    SweepResult row;
    row.variable = "sigma";
    row.value = sigma;
    row.entropy_bits = support_entropy(config.d, config.k);
    row.decoders.push_back(make_stat("sparse", trials, 0, true));
    row.decoders.push_back(make_stat("dense", trials, 1, true));
    row.power = make_power(trials, false);
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

double mean_signal_power(int d, int k, AmplitudeMode mode, double p, int n, Seed seed) {
  require(n >= 1, fmt::format("sample count must be >= 1, got {}", n));
  require(p > 0.0 && p < 1.0, fmt::format("p must lie in (0, 1), got {}", p));
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const Seed s = derive_seed(seed, i);
    const SparseExplanation phi = sample_sparse_explanation(d, k, mode, derive_seed(s, Stream::kExplanation));
    const MaskBatch z = sample_mask_batch(d, 1, p, derive_seed(s, Stream::kMasks));
    double v = 0.0;
    for (int j = 0; j < k; ++j) v += z.matrix()(0, phi.support()[j]) * phi.amplitudes()[j];
    acc += v * v;
  }
  return acc / n;
}

Eigen::MatrixXd calibrated_interaction(const CurvatureConfig& config) {
  const WaterfallConfig& b = config.base;
  validate_waterfall(b);
  const Eigen::MatrixXd q_raw =
      sample_symmetric_gaussian(b.d, derive_seed(config.q_seed, Stream::kInteraction));
  const double target = mean_signal_power(b.d, b.k, AmplitudeMode::kSignedUnit, b.p,
                                          config.n_calibration, derive_seed(config.q_seed, 0));
  return scale_interaction_matrix(q_raw, target, b.p, config.n_calibration,
                                  derive_seed(config.q_seed, Stream::kCalibration));
}

std::vector<SweepResult> run_curvature_sweep(const CurvatureConfig& config,
                                             const std::vector<double>& alpha_grid,
                                             const RowCallback& on_row) {
  const WaterfallConfig& b = config.base;
  validate_waterfall(b);
  require(!alpha_grid.empty(), "alpha grid must be nonempty");
  ChannelConfig channel;
  channel.d = b.d;
  channel.k = b.k;
  channel.p = b.p;
  channel.sigma = 0.0;
  channel.amplitude_mode = AmplitudeMode::kSignedUnit;
  channel.interaction = calibrated_interaction(config);
  const auto decoders = waterfall_decoders(b);

  std::vector<SweepResult> rows;
  for (double alpha : alpha_grid) {
    require(alpha >= 0.0 && std::isfinite(alpha), fmt::format("alpha must be >= 0, got {}", alpha));
    channel.alpha = alpha;
    const auto trials = run_recovery_trials(decoders, channel, b.t, b.n_trials, b.seed, b.workers);
    SweepResult row;
    row.variable = "alpha";
    row.value = alpha;
    row.entropy_bits = support_entropy(b.d, b.k);
    row.decoders.push_back(make_stat("sparse", trials, 0, true));
    row.decoders.push_back(make_stat("dense", trials, 1, true));
    row.power = make_power(trials, true);
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<GridShape> superpixel_grid(int d, int width, int height) {
  require(d >= 1, fmt::format("d must be >= 1, got {}", d));
  require(width >= 1 && height >= 1, "image must be nonempty");
  const int r = divisors_near_sqrt(d).back();
  const int c = d / r;
  if (c > 2 * r) return std::nullopt;
  GridShape shape = width >= height ? GridShape{r, c} : GridShape{c, r};
  if (shape.rows > height || shape.cols > width) return std::nullopt;
  return shape;
}

int snap_superpixel_count(int d, int width, int height) {
  require(d >= 1, fmt::format("d must be >= 1, got {}", d));
  require(width >= 1 && height >= 1, "image must be nonempty");
  const int max_d = width * height;
  for (int offset = 0; offset < max_d; ++offset) {
    if (d - offset >= 1 && d - offset <= max_d && superpixel_grid(d - offset, width, height)) {
      return d - offset;
    }
    if (d + offset <= max_d && superpixel_grid(d + offset, width, height)) return d + offset;
  }
  return 1;
}

SyntheticImage build_synthetic_image(int width, int height, const PixelRect& rect, int d) {
  require(width >= 1 && height >= 1,
          fmt::format("image must be nonempty, got {}x{}", width, height));
  require(0 <= rect.x0 && rect.x0 <= rect.x1 && rect.x1 < width && 0 <= rect.y0 &&
              rect.y0 <= rect.y1 && rect.y1 < height,
          fmt::format("salient rectangle ({}, {})-({}, {}) does not fit a {}x{} image", rect.x0,
                      rect.y0, rect.x1, rect.y1, width, height));
  require(d >= 1 && d <= width * height,
          fmt::format("super-pixel count must lie in [1, {}], got {}", width * height, d));
  const auto shape = superpixel_grid(d, width, height);
  require(shape.has_value(),
          fmt::format("d = {} has no near-square grid on a {}x{} image; nearest valid d is {}", d,
                      width, height, snap_superpixel_count(d, width, height)));

  SyntheticImage img;
  img.width_ = width;
  img.height_ = height;
  img.rect_ = rect;
  img.grid_ = *shape;
  img.labels_.resize(static_cast<std::size_t>(width) * height);
  img.sizes_.assign(d, 0);
  img.salient_counts_.assign(d, 0);
  for (int y = 0; y < height; ++y) {
    const int row = static_cast<int>(static_cast<long>(y) * shape->rows / height);
    for (int x = 0; x < width; ++x) {
      const int col = static_cast<int>(static_cast<long>(x) * shape->cols / width);
      const int label = row * shape->cols + col;
      img.labels_[static_cast<std::size_t>(y) * width + x] = label;
      ++img.sizes_[label];
      if (x >= rect.x0 && x <= rect.x1 && y >= rect.y0 && y <= rect.y1) ++img.salient_counts_[label];
    }
  }
  img.ground_truth_.resize(d);
  for (int i = 0; i < d; ++i) {
    img.ground_truth_[i] = static_cast<double>(img.salient_counts_[i]) / img.sizes_[i];
  }
  return img;
}

Eigen::VectorXd image_oracle_evaluate(const SyntheticImage& image, const MaskBatch& masks,
                                      double sigma, Seed seed) {
  require(masks.dim() == image.segments(),
          fmt::format("mask dimension {} does not match {} segments", masks.dim(), image.segments()));
  require(sigma >= 0.0, fmt::format("sigma must be >= 0, got {}", sigma));
  const std::vector<int>& counts = image.salient_counts();
  Eigen::VectorXd weights(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) weights[i] = counts[i];
  Eigen::VectorXd y = masks.matrix() * weights;
  if (sigma > 0.0) {
    Rng rng(seed);
    for (Eigen::Index t = 0; t < y.size(); ++t) y[t] += sigma * rng.normal();
  }
  return y;
}

std::vector<int> default_resolution_grid(int t) {
  std::vector<int> grid = {1,  2,  4,  6,  9,   12,  16,  20,  25,  30,  36,  42,
                           49, 56, 64, 81, 100, 121, 144, 169, 196, 225, 256};
  std::vector<int> out;
  for (int d : grid) {
    if (d <= 2 * t + 16) out.push_back(d);
  }
  return out;
}

std::vector<SweepResult> run_resolution_sweep(const ResolutionConfig& config,
                                              const RowCallback& on_row) {
  require(config.t >= 1, fmt::format("T must be >= 1, got {}", config.t));
  require(config.sigma > 0.0, fmt::format("sigma must be > 0, got {}", config.sigma));
  require(config.lambda_ridge > 0.0, "ridge penalty must be > 0");
  require(config.n_trials >= 1, fmt::format("trials must be >= 1, got {}", config.n_trials));
  const std::vector<int> grid =
      config.d_grid.empty() ? default_resolution_grid(config.t) : config.d_grid;
  require(!grid.empty(), "d grid must be nonempty");

  std::vector<SweepResult> rows;
  for (int requested : grid) {
    const int d = snap_superpixel_count(requested, config.width, config.height);
    const SyntheticImage image =
        build_synthetic_image(config.width, config.height, config.salient_rect, d);
    const std::vector<double>& truth = image.ground_truth_superpixel();
    std::vector<int> support;
    for (int i = 0; i < d; ++i) {
      if (truth[i] > config.support_threshold) support.push_back(i);
    }
    const int k_eff = static_cast<int>(support.size());

    SweepResult row;
    row.variable = "d";
    row.value = d;
    row.entropy_bits = support_entropy(d, k_eff);

    MiEstimate mi{config.t, 0.0, 0.0, config.n_outer, config.n_inner};
    if (k_eff > 0) {
      // Matched sparse model: k_eff active segments of equal weight, the mean
      // salient pixel count of the true support.
      double scale = 0.0;
      for (int i : support) scale += image.salient_counts()[i];
      scale /= k_eff;
      MiConfig mc;
      mc.d = d;
      mc.k = k_eff;
      mc.sigma = config.sigma;
      mc.p = config.p;
      mc.n_outer = config.n_outer;
      mc.n_inner = config.n_inner;
      mc.amplitude_mode = AmplitudeMode::kFixedUnit;
      mc.amplitude_scale = scale;
      mc.seed = derive_seed(config.seed, d);
      mc.workers = config.workers;
      mi = estimate_mutual_information(mc, config.t);
    }
    row.mi = mi;

    std::vector<std::optional<double>> corr(config.n_trials);
    const Seed trial_root = derive_seed(config.seed, Stream::kSweepPoint);
    parallel_for(config.n_trials, config.workers, [&](std::size_t i) {
      const Seed s = derive_seed(trial_root, i);
      const MaskBatch masks =
          sample_mask_batch(d, config.t, config.p, derive_seed(s, Stream::kMasks));
      const Eigen::VectorXd y =
          image_oracle_evaluate(image, masks, config.sigma, derive_seed(s, Stream::kNoise));
      const DecodeResult fit = ridge_decode(masks, y, 0, config.lambda_ridge);
      corr[i] = pearson_correlation(
          std::span<const double>(fit.coefficients.data(), fit.coefficients.size()), truth);
    });
    RunningMoments m;
    for (const auto& c : corr) {
      if (c) m.push(*c);
    }
    if (m.count() > 0) row.correlation = m.mean();

    row.resolution = ResolutionInfo{requested, image.grid().rows, image.grid().cols, k_eff,
                                    row.entropy_bits <= mi.value_bits};
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qchannel
