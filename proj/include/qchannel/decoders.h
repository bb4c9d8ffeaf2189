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

#ifndef QCHANNEL_DECODERS_H_
#define QCHANNEL_DECODERS_H_

// Support-recovery decoders over a (masks, responses) pair. Every decoder
// returns exactly k indices in ascending order; ties are always resolved
// towards smaller indices (lexicographically smaller supports for ML).

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qchannel/core_model.h"
#include "qchannel/rng.h"

namespace qchannel {

struct DecodeResult {
  std::vector<int> support;
  // Dense length-d fit. Lasso reports the least-squares refit on `support`;
  // OLS and ridge report the full coefficient vector.
  Eigen::VectorXd coefficients;
  double residual_ss = 0.0;
  bool tie_broken = false;
  // False only when an iterative solver hit its iteration cap.
  bool converged = true;
};

struct LassoSettings {
  double lambda = 0.0;
  int max_iterations = 100000;
  // Stop once a full sweep moves no coordinate by more than this.
  double tolerance = 1e-10;
  // Centre the columns of Z and the responses (an unpenalised intercept)
  // before solving. Coefficients are reported on the original columns.
  bool standardize = false;
};

struct LsFit {
  Eigen::VectorXd coefficients;  // aligned with the requested support
  double residual_ss = 0.0;
};

// Added to the Gram diagonal so supports containing never-active columns
// still solve; such coefficients come out as zero.
inline constexpr double kGramJitter = 1e-10;
// Default cap on the number of supports ml_decode will enumerate.
inline constexpr std::int64_t kDefaultEnumerationCap = 1'000'000;

LsFit ls_fit_on_support(const MaskBatch& masks, const Eigen::VectorXd& responses,
                        std::span<const int> support);

DecodeResult ml_decode(const MaskBatch& masks, const Eigen::VectorXd& responses, int k,
                       std::int64_t enumeration_cap = kDefaultEnumerationCap);

struct LassoSolution {
  Eigen::VectorXd beta;
  int iterations = 0;
  bool converged = false;
};

// Cyclic coordinate descent with soft thresholding for
// min_b 1/2 ||y - X b||^2 + lambda ||b||_1, starting from zero.
LassoSolution solve_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                          int max_iterations, double tolerance);

DecodeResult lasso_decode(const MaskBatch& masks, const Eigen::VectorXd& responses, int k,
                          const LassoSettings& settings);

// 0.1 sigma sqrt(2 log d) sqrt(T), the universal threshold on the
// unnormalised objective.
double default_lasso_lambda(double sigma, int d, int rows);

// Relative floor on the default penalty, as a fraction of ||Z' Y||_inf (the
// smallest penalty with an all-zero solution). Keeps the penalty positive
// when sigma is zero or tiny, where coordinate descent would otherwise fit
// interference exactly.
inline constexpr double kLassoLambdaFloor = 1e-3;

// max(default rule, kLassoLambdaFloor * ||Z' Y||_inf).
double default_lasso_lambda(double sigma, const MaskBatch& masks,
                            const Eigen::VectorXd& responses);

DecodeResult ols_decode(const MaskBatch& masks, const Eigen::VectorXd& responses, int k);

DecodeResult ridge_decode(const MaskBatch& masks, const Eigen::VectorXd& responses, int k,
                          double lambda_ridge);

// Indices of the k largest |values|, ascending; `tie_broken` is set when the
// k-th and (k+1)-th magnitudes are equal.
std::vector<int> top_k_support(const Eigen::VectorXd& values, int k, bool* tie_broken = nullptr);

enum class DecoderId { kMaximumLikelihood, kLasso, kOls, kRidge };

std::string_view to_string(DecoderId id);

struct DecoderSpec {
  DecoderId id = DecoderId::kMaximumLikelihood;
  // Lasso: explicit penalty; when unset the floored default rule is applied
  // per trial with the channel sigma.
  std::optional<double> lasso_lambda;
  LassoSettings lasso;
  // Ridge: penalty.
  double ridge_lambda = 1e-3;
  std::int64_t enumeration_cap = kDefaultEnumerationCap;
};

DecodeResult run_decoder(const DecoderSpec& spec, const MaskBatch& masks,
                         const Eigen::VectorXd& responses, int k, double sigma);

struct ChannelConfig {
  int d = 12;
  int k = 2;
  double sigma = 0.1;
  double p = 0.5;
  AmplitudeMode amplitude_mode = AmplitudeMode::kStandardNormal;
  // Curvature; when alpha > 0 `interaction` must hold a symmetric d x d matrix.
  double alpha = 0.0;
  std::optional<Eigen::MatrixXd> interaction;
};

// One draw-query-decode cycle, shared by every decoder in a trial batch.
struct TrialOutcome {
  std::vector<std::uint8_t> success;  // per decoder
  std::vector<std::uint8_t> errored;  // per decoder
  double signal_power = 0.0;       // mean_t (Z_t' phi)^2
  double noise_power = 0.0;        // mean_t eps_t^2
  double interference_power = 0.0; // mean_t (alpha Z_t' Q Z_t)^2
};

// Runs n_trials trials; trial i uses seeds derived from (seed, i), so the
// same data is decoded by every decoder and the result is independent of
// `workers`.
std::vector<TrialOutcome> run_recovery_trials(const std::vector<DecoderSpec>& decoders,
                                              const ChannelConfig& channel, int rows,
                                              int n_trials, Seed seed, int workers = 0);

struct RecoveryStats {
  double rate = 0.0;
  double std_error = 0.0;
  int successes = 0;
  int errored = 0;
  int n_trials = 0;
};

RecoveryStats summarize(const std::vector<TrialOutcome>& trials, std::size_t decoder_index);

RecoveryStats support_recovery_probability(const DecoderSpec& decoder,
                                           const ChannelConfig& channel, int rows, int n_trials,
                                           Seed seed, int workers = 0);

}  // namespace qchannel

#endif  // QCHANNEL_DECODERS_H_
