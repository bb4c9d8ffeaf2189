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

#ifndef QCHANNEL_MI_ESTIMATOR_H_
#define QCHANNEL_MI_ESTIMATOR_H_

// Monte Carlo estimate of I(phi; Y^T | Z^T) for the sparse prior and the
// linear Gaussian channel. For each outer triple (phi_i, Z_i, Y_i) the
// marginal p(Y_i | Z_i) is replaced by the average likelihood over a shared
// set of inner prior draws:
//
//   I_T = mean_i log2[ p(Y_i | Z_i, phi_i) / mean_j p(Y_i | Z_i, phi_j) ].
//
// The inner average is taken in log space. With few inner draws relative to
// the number of distinguishable hypotheses the estimate is biased upwards;
// std_error only reflects the outer Monte Carlo spread.

#include <optional>
#include <vector>

#include "qchannel/core_model.h"
#include "qchannel/rng.h"

namespace qchannel {

struct MiEstimate {
  int t = 0;
  double value_bits = 0.0;
  double std_error_bits = 0.0;
  int n_outer = 0;
  int n_inner = 0;
};

struct MiConfig {
  int d = 12;
  int k = 2;
  double sigma = 0.1;
  double p = 0.5;
  int n_outer = 2000;
  int n_inner = 2000;
  std::vector<int> t_grid;
  Seed seed = 0;
  AmplitudeMode amplitude_mode = AmplitudeMode::kStandardNormal;
  // Multiplies every sampled amplitude.
  double amplitude_scale = 1.0;
  int workers = 0;
};

void validate(const MiConfig& config);

// Exact log density (nats) of the responses given masks and phi.
double gaussian_log_likelihood(const QueryDataset& dataset, const SparseExplanation& phi,
                               double sigma);

MiEstimate estimate_mutual_information(const MiConfig& config, int t);

// First T whose isotonic (nondecreasing) fit of the estimates reaches
// `entropy_bits`. Smoothing keeps a single noisy spike from setting T_IT.
std::optional<int> threshold_crossing(const std::vector<MiEstimate>& table, double entropy_bits);

struct ThresholdResult {
  double entropy_bits = 0.0;
  // threshold_crossing over the table; nullopt when no grid point qualifies.
  std::optional<int> t_it;
  std::vector<MiEstimate> table;
};

ThresholdResult find_information_threshold(const MiConfig& config);

// Draw from the prior of `config` (amplitudes scaled by amplitude_scale).
SparseExplanation sample_prior(const MiConfig& config, Seed seed);

}  // namespace qchannel

#endif  // QCHANNEL_MI_ESTIMATOR_H_
