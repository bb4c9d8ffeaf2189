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

#include "qchannel/info_theory.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "qchannel/errors.h"

namespace qchannel {

namespace {

// Below this many factors the product form is both exact enough and cheaper
// than the log-gamma route.
constexpr std::int64_t kDirectProductLimit = 64;

constexpr std::int64_t kMaxResolution = std::int64_t{1} << 62;

double log2_binomial(std::int64_t d, std::int64_t k) {
  const std::int64_t m = std::min(k, d - k);
  if (m == 0) return 0.0;
  if (m <= kDirectProductLimit) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
      acc += std::log2(static_cast<double>(d - i) / static_cast<double>(m - i));
    }
    return acc;
  }
  const double nats = std::lgamma(static_cast<double>(d) + 1.0) -
                      std::lgamma(static_cast<double>(m) + 1.0) -
                      std::lgamma(static_cast<double>(d - m) + 1.0);
  return nats / std::numbers::ln2;
}

double binomial_pmf(int n, int m, double p) {
  const double log_choose = log2_binomial(n, m) * std::numbers::ln2;
  return std::exp(log_choose + m * std::log(p) + (n - m) * std::log1p(-p));
}

}  // namespace

double support_entropy(std::int64_t d, std::int64_t k) {
  require(d >= 0, fmt::format("dimension d must be >= 0, got {}", d));
  require(k >= 0 && k <= d,
          fmt::format("sparsity k must satisfy 0 <= k <= d = {}, got {}", d, k));
  return log2_binomial(d, k);
}

double explanation_rate(double entropy_bits, std::int64_t queries) {
  require(queries >= 1, fmt::format("query count T must be >= 1, got {}", queries));
  require(entropy_bits >= 0.0, "entropy must be >= 0");
  return entropy_bits / static_cast<double>(queries);
}

double per_query_mi_gaussian(double signal_variance, double sigma2) {
  require(sigma2 > 0.0, "noise variance must be > 0 (zero noise gives infinite information)");
  require(signal_variance >= 0.0, "signal variance must be >= 0");
  return 0.5 * std::log2(1.0 + signal_variance / sigma2);
}

double dense_query_lower_bound(std::int64_t d, double dynamic_range_bits, double c_max) {
  require(c_max > 0.0, "capacity bound c_max must be > 0");
  require(d >= 1, fmt::format("dimension d must be >= 1, got {}", d));
  require(dynamic_range_bits > 0.0, "dynamic range log2(B/delta) must be > 0");
  return static_cast<double>(d) * dynamic_range_bits / c_max;
}

double sparse_query_lower_bound(std::int64_t d, std::int64_t k, double c_max) {
  require(c_max > 0.0, "capacity bound c_max must be > 0");
  require(k >= 1 && k <= d, fmt::format("sparsity k must satisfy 1 <= k <= d = {}, got {}", d, k));
  return static_cast<double>(k) / c_max *
         std::log2(static_cast<double>(d) / static_cast<double>(k));
}

std::optional<std::int64_t> critical_resolution(std::int64_t queries, std::int64_t k,
                                 double capacity_bits_per_query) {
  require(queries >= 1, fmt::format("query count T must be >= 1, got {}", queries));
  require(k >= 1, fmt::format("sparsity k must be >= 1, got {}", k));
  require(capacity_bits_per_query > 0.0, "capacity must be > 0");
  const double budget = static_cast<double>(queries) * capacity_bits_per_query;
  // H(k, k) = 0 always fits; grow geometrically until the budget is exceeded,
  // then bisect. H(., k) is increasing in d, so the bracket is exact.
  std::int64_t lo = k;
  std::int64_t hi = k + 1;
  while (log2_binomial(hi, k) <= budget) {
    lo = hi;
    if (hi > kMaxResolution / 2) return std::nullopt;
    hi = std::max(hi * 2, hi + 1);
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (log2_binomial(mid, k) <= budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double mask_signal_variance(int d, int k, int active, AmplitudeMoments amplitude) {
  require(d >= 1 && k >= 0 && k <= d && active >= 0 && active <= d,
          "mask_signal_variance: need 0 <= k, active <= d");
  const double dd = d;
  const double mean_count = active * k / dd;
  const double var_count =
      d > 1 ? active * (k / dd) * (1.0 - k / dd) * (dd - active) / (dd - 1.0) : 0.0;
  return mean_count * amplitude.variance + amplitude.mean * amplitude.mean * var_count;
}

double capacity_envelope(int d, int k, double sigma, AmplitudeMode mode, double amplitude_scale) {
  require(sigma > 0.0, "capacity envelope needs sigma > 0");
  AmplitudeMoments m = amplitude_moments(mode);
  m.mean *= amplitude_scale;
  m.variance *= amplitude_scale * amplitude_scale;
  double best = 0.0;
  for (int active = 0; active <= d; ++active) {
    best = std::max(best, mask_signal_variance(d, k, active, m));
  }
  return per_query_mi_gaussian(best, sigma * sigma);
}

double policy_capacity_bound(int d, int k, double sigma, double p, AmplitudeMode mode,
                             double amplitude_scale) {
  require(sigma > 0.0, "capacity bound needs sigma > 0");
  require(p > 0.0 && p < 1.0, "mask probability p must lie in (0, 1)");
  AmplitudeMoments m = amplitude_moments(mode);
  m.mean *= amplitude_scale;
  m.variance *= amplitude_scale * amplitude_scale;
  double expected = 0.0;
  for (int active = 0; active <= d; ++active) {
    expected += binomial_pmf(d, active, p) * mask_signal_variance(d, k, active, m);
  }
  return per_query_mi_gaussian(expected, sigma * sigma);
}

InfoBudget make_info_budget(std::int64_t d, std::int64_t k, int queries, double capacity_bits) {
  const double h = support_entropy(d, k);
  return InfoBudget{h, explanation_rate(h, queries), capacity_bits, queries};
}

}  // namespace qchannel
