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

#ifndef QCHANNEL_STATS_H_
#define QCHANNEL_STATS_H_

#include <optional>
#include <span>
#include <vector>

namespace qchannel {

// sqrt(r (1 - r) / n).
double binomial_std_error(double rate, int n);

// Least-squares nondecreasing fit (pool adjacent violators). Weights default
// to 1 when empty.
std::vector<double> isotonic_fit(std::span<const double> values,
                                 std::span<const double> weights = {});

// Pearson correlation of mean-centred vectors; nullopt when either vector has
// zero variance.
std::optional<double> pearson_correlation(std::span<const double> x, std::span<const double> y);

// Streaming mean / sample variance (Welford), order-dependent only through
// the order values are pushed.
class RunningMoments {
 public:
  void push(double x);
  long count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance; 0 for fewer than two values.
  double variance() const;

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace qchannel

#endif  // QCHANNEL_STATS_H_
