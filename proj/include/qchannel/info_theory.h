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

#ifndef QCHANNEL_INFO_THEORY_H_
#define QCHANNEL_INFO_THEORY_H_

// Closed-form information budget of the query channel. All quantities are in
// bits. Query lower bounds built on the single-mask envelope are necessary
// conditions, not exact capacities.

#include <cstdint>
#include <optional>

#include "qchannel/core_model.h"

namespace qchannel {

struct InfoBudget {
  double entropy_bits;
  double rate_bits_per_query;
  double capacity_bound_bits;
  int query_count;
};

// log2 C(d, k).
double support_entropy(std::int64_t d, std::int64_t k);

// H / T.
double explanation_rate(double entropy_bits, std::int64_t queries);

// 1/2 log2(1 + signal_variance / sigma2).
double per_query_mi_gaussian(double signal_variance, double sigma2);

// d * log2(B / delta) / c_max.
double dense_query_lower_bound(std::int64_t d, double dynamic_range_bits, double c_max);

// (k / c_max) * log2(d / k).
double sparse_query_lower_bound(std::int64_t d, std::int64_t k, double c_max);

// Largest d >= k with support_entropy(d, k) <= T * C, or nullopt when that d
// exceeds 2^62.
std::optional<std::int64_t> critical_resolution(std::int64_t queries, std::int64_t k,
                                 double capacity_bits_per_query);

// Var(z' phi) over the sparse prior (uniform k-support, i.i.d. amplitudes with
// the given moments) for a fixed mask with `active` ones out of d. The number
// of support coordinates under the mask is hypergeometric N, and
// Var(z' phi) = E[N] var(a) + mean(a)^2 Var(N).
double mask_signal_variance(int d, int k, int active, AmplitudeMoments amplitude);

// Single-mask envelope max_z 1/2 log2(1 + Var(z' phi) / sigma^2), the Gaussian
// bound maximised over the mask weight. For zero-mean amplitudes the maximiser
// is the all-ones mask and Var = k var(a).
double capacity_envelope(int d, int k, double sigma, AmplitudeMode mode,
                         double amplitude_scale = 1.0);

// Policy-averaged bound 1/2 log2(1 + E_z Var(z' phi) / sigma^2) for
// Bernoulli(p) masks; E_z Var = p k var(a) for zero-mean amplitudes. By
// Jensen it upper-bounds the mean per-query information under that policy and
// never exceeds capacity_envelope.
double policy_capacity_bound(int d, int k, double sigma, double p, AmplitudeMode mode,
                             double amplitude_scale = 1.0);

InfoBudget make_info_budget(std::int64_t d, std::int64_t k, int queries, double capacity_bits);

}  // namespace qchannel

#endif  // QCHANNEL_INFO_THEORY_H_
