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

#include "qchannel/mi_estimator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/core.h>

#include "qchannel/errors.h"
#include "qchannel/info_theory.h"
#include "qchannel/parallel.h"
#include "qchannel/stats.h"

namespace qchannel {

namespace {

// Inner prior draws in a flat layout: row j holds k support indices and
// k amplitudes.
struct InnerSamples {
  int k = 0;
  std::vector<int> support;
  std::vector<double> amplitudes;
};

InnerSamples draw_inner(const MiConfig& config, Seed seed) {
  InnerSamples inner;
  inner.k = config.k;
  inner.support.reserve(static_cast<std::size_t>(config.n_inner) * config.k);
  inner.amplitudes.reserve(static_cast<std::size_t>(config.n_inner) * config.k);
  for (int j = 0; j < config.n_inner; ++j) {
    const SparseExplanation phi = sample_prior(config, derive_seed(seed, j));
    inner.support.insert(inner.support.end(), phi.support().begin(), phi.support().end());
    inner.amplitudes.insert(inner.amplitudes.end(), phi.amplitudes().begin(),
                            phi.amplitudes().end());
  }
  return inner;
}

// ||y - Z_S a||^2 for one sparse hypothesis, using `scratch` as workspace.
double residual_ss(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const int* support,
                   const double* amplitudes, int k, Eigen::VectorXd& scratch) {
  scratch = y;
  for (int s = 0; s < k; ++s) scratch.noalias() -= amplitudes[s] * z.col(support[s]);
  return scratch.squaredNorm();
}

double log_sum_exp(const std::vector<double>& x) {
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - top);
  return top + std::log(acc);
}

}  // namespace

void validate(const MiConfig& config) {
  require(config.d >= 1, fmt::format("d must be >= 1, got {}", config.d));
  require(config.k >= 0 && config.k <= config.d,
          fmt::format("k must satisfy 0 <= k <= d = {}, got {}", config.d, config.k));
  require(config.sigma > 0.0 && std::isfinite(config.sigma),
          fmt::format("sigma must be > 0 for the Gaussian likelihood, got {}", config.sigma));
  require(config.p > 0.0 && config.p < 1.0,
          fmt::format("p must lie in (0, 1), got {}", config.p));
  require(config.n_outer >= 1, fmt::format("n_outer must be >= 1, got {}", config.n_outer));
  require(config.n_inner >= 2, fmt::format("n_inner must be >= 2, got {}", config.n_inner));
  require(config.amplitude_scale > 0.0 && std::isfinite(config.amplitude_scale),
          "amplitude_scale must be > 0");
}

SparseExplanation sample_prior(const MiConfig& config, Seed seed) {
  SparseExplanation phi = sample_sparse_explanation(config.d, config.k, config.amplitude_mode, seed);
  if (config.amplitude_scale == 1.0) return phi;
  std::vector<double> amps(phi.amplitudes().begin(), phi.amplitudes().end());
  for (double& a : amps) a *= config.amplitude_scale;
  return SparseExplanation(phi.dim(), std::vector<int>(phi.support().begin(), phi.support().end()),
                           std::move(amps));
}

double gaussian_log_likelihood(const QueryDataset& dataset, const SparseExplanation& phi,
                               double sigma) {
  require(sigma > 0.0, fmt::format("sigma must be > 0, got {}", sigma));
  require(dataset.masks().dim() == phi.dim(),
          fmt::format("mask dimension {} does not match explanation dimension {}",
                      dataset.masks().dim(), phi.dim()));
  const int rows = dataset.rows();
  if (rows == 0) return 0.0;
  Eigen::VectorXd scratch;
  const double rss = residual_ss(dataset.masks().matrix(), dataset.responses(),
                                 phi.support().data(), phi.amplitudes().data(), phi.sparsity(),
                                 scratch);
  const double sigma2 = sigma * sigma;
  return -0.5 * rows * std::log(2.0 * std::numbers::pi * sigma2) - rss / (2.0 * sigma2);
}

MiEstimate estimate_mutual_information(const MiConfig& config, int t) {
  validate(config);
  require(t >= 0, fmt::format("blocklength must be >= 0, got {}", t));
  MiEstimate out{t, 0.0, 0.0, config.n_outer, config.n_inner};
  if (t == 0) return out;

  const Seed block_seed = derive_seed(derive_seed(config.seed, Stream::kBlocklength), t);
  const InnerSamples inner = draw_inner(config, derive_seed(block_seed, Stream::kInner));
  const double inv_two_sigma2 = 1.0 / (2.0 * config.sigma * config.sigma);
  const double log_n_inner = std::log(static_cast<double>(config.n_inner));

  std::vector<double> log_ratio(config.n_outer);
  parallel_for(config.n_outer, config.workers, [&](std::size_t i) {
    const Seed outer_seed = derive_seed(block_seed, i);
    const SparseExplanation phi = sample_prior(config, derive_seed(outer_seed, Stream::kExplanation));
    const MaskBatch masks =
        sample_mask_batch(config.d, t, config.p, derive_seed(outer_seed, Stream::kMasks));
    const OracleModel oracle(phi, config.sigma);
    const QueryDataset data = oracle_evaluate(masks, oracle, derive_seed(outer_seed, Stream::kNoise));
    const Eigen::MatrixXd& z = masks.matrix();
    const Eigen::VectorXd& y = data.responses();

    Eigen::VectorXd scratch(t);
    // The -T/2 log(2 pi sigma^2) normaliser is common to numerator and every
    // inner term, so only the quadratic parts are kept.
    const double own = -residual_ss(z, y, phi.support().data(), phi.amplitudes().data(),
                                    phi.sparsity(), scratch) *
                       inv_two_sigma2;
    std::vector<double> inner_ll(config.n_inner);
    for (int j = 0; j < config.n_inner; ++j) {
      const std::size_t offset = static_cast<std::size_t>(j) * inner.k;
      inner_ll[j] = -residual_ss(z, y, inner.support.data() + offset,
                                 inner.amplitudes.data() + offset, inner.k, scratch) *
                    inv_two_sigma2;
    }
    const double log_marginal = log_sum_exp(inner_ll) - log_n_inner;
    log_ratio[i] = (own - log_marginal) / std::numbers::ln2;
  });

  double mean = 0.0;
  for (double v : log_ratio) mean += v;
  mean /= config.n_outer;
  double ss = 0.0;
  for (double v : log_ratio) ss += (v - mean) * (v - mean);
  out.value_bits = mean;
  out.std_error_bits =
      config.n_outer > 1 ? std::sqrt(ss / (config.n_outer - 1)) / std::sqrt(double(config.n_outer))
                         : 0.0;
  return out;
}

ThresholdResult find_information_threshold(const MiConfig& config) {
  validate(config);
  require(!config.t_grid.empty(), "t_grid must be nonempty");
  for (std::size_t i = 0; i < config.t_grid.size(); ++i) {
    require(config.t_grid[i] >= 0, "t_grid entries must be >= 0");
    require(i == 0 || config.t_grid[i] > config.t_grid[i - 1], "t_grid must be strictly increasing");
  }
  ThresholdResult result;
  result.entropy_bits = support_entropy(config.d, config.k);
  result.table.reserve(config.t_grid.size());
  for (int t : config.t_grid) {
    result.table.push_back(estimate_mutual_information(config, t));
  }
  result.t_it = threshold_crossing(result.table, result.entropy_bits);
  return result;
}

std::optional<int> threshold_crossing(const std::vector<MiEstimate>& table, double entropy_bits) {
  std::vector<double> values;
  values.reserve(table.size());
  for (const MiEstimate& e : table) values.push_back(e.value_bits);
  const std::vector<double> fit = isotonic_fit(values);
  for (std::size_t i = 0; i < fit.size(); ++i) {
    if (fit[i] >= entropy_bits) return table[i].t;
  }
  return std::nullopt;
}

}  // namespace qchannel
