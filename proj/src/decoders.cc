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

#include "qchannel/decoders.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/core.h>

#include "qchannel/errors.h"
#include "qchannel/info_theory.h"
#include "qchannel/parallel.h"
#include "qchannel/stats.h"

namespace qchannel {

namespace {

// Number of k-subsets of [d], saturating just above `cap`.
std::int64_t bounded_binomial(std::int64_t d, std::int64_t k, std::int64_t cap) {
  k = std::min(k, d - k);
  unsigned __int128 c = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    c = c * static_cast<unsigned __int128>(d - k + i) / static_cast<unsigned __int128>(i);
    if (c > static_cast<unsigned __int128>(cap)) return cap + 1;
  }
  return static_cast<std::int64_t>(c);
}

// Advances `idx` to the next k-subset of [d] in lexicographic order.
bool next_combination(std::vector<int>& idx, int d) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[i] == d - k + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

Eigen::VectorXd scatter(int d, std::span<const int> support, const Eigen::VectorXd& values) {
  Eigen::VectorXd dense = Eigen::VectorXd::Zero(d);
  for (std::size_t s = 0; s < support.size(); ++s) dense[support[s]] = values[s];
  return dense;
}

void require_shapes(const MaskBatch& masks, const Eigen::VectorXd& responses, int k) {
  require(responses.size() == masks.rows(),
          fmt::format("{} responses for {} mask rows", responses.size(), masks.rows()));
  require(k >= 0 && k <= masks.dim(),
          fmt::format("sparsity k must satisfy 0 <= k <= d = {}, got {}", masks.dim(), k));
}

DecodeResult dense_result(const MaskBatch& masks, const Eigen::VectorXd& responses, int k,
                          Eigen::VectorXd beta) {
  DecodeResult result;
  result.support = top_k_support(beta, k, &result.tie_broken);
  result.residual_ss = (responses - masks.matrix() * beta).squaredNorm();
  result.coefficients = std::move(beta);
  return result;
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, double lambda) {
  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += lambda;
  return gram.llt().solve(z.transpose() * y);
}

}  // namespace

LsFit ls_fit_on_support(const MaskBatch& masks, const Eigen::VectorXd& responses,
                        std::span<const int> support) {
  require(responses.size() == masks.rows(),
          fmt::format("{} responses for {} mask rows", responses.size(), masks.rows()));
  const int k = static_cast<int>(support.size());
  for (int s = 0; s < k; ++s) {
    require(support[s] >= 0 && support[s] < masks.dim(),
            fmt::format("support index {} outside [0, {})", support[s], masks.dim()));
  }
  LsFit fit;
  if (k == 0) {
    fit.coefficients = Eigen::VectorXd(0);
    fit.residual_ss = responses.squaredNorm();
    return fit;
  }
  const Eigen::MatrixXd& z = masks.matrix();
  Eigen::MatrixXd cols(z.rows(), k);
  for (int s = 0; s < k; ++s) cols.col(s) = z.col(support[s]);
  Eigen::MatrixXd gram = cols.transpose() * cols;
  gram.diagonal().array() += kGramJitter;
  fit.coefficients = gram.ldlt().solve(cols.transpose() * responses);
  fit.residual_ss = (responses - cols * fit.coefficients).squaredNorm();
  return fit;
}

DecodeResult ml_decode(const MaskBatch& masks, const Eigen::VectorXd& responses, int k,
                       std::int64_t enumeration_cap) {
  require_shapes(masks, responses, k);
  require(k >= 1, fmt::format("ML decoding needs k >= 1, got {}", k));
  const int d = masks.dim();
  const std::int64_t count = bounded_binomial(d, k, enumeration_cap);
  if (count > enumeration_cap) {
    throw CapacityExceeded(
        fmt::format("ML decoding over C({}, {}) supports exceeds the enumeration cap of {}", d, k,
                    enumeration_cap),
        std::exp2(support_entropy(d, k)),
        static_cast<double>(enumeration_cap));
  }

  std::vector<double> residuals;
  residuals.reserve(static_cast<std::size_t>(count));
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  do {
    residuals.push_back(ls_fit_on_support(masks, responses, idx).residual_ss);
  } while (next_combination(idx, d));

  const double best = *std::min_element(residuals.begin(), residuals.end());
  // Residuals within 1e-12 of the response energy count as tied.
  const double tie_tolerance = 1e-12 * responses.squaredNorm();
  std::size_t winner = residuals.size();
  std::size_t ties = 0;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (residuals[i] - best <= tie_tolerance) {
      if (winner == residuals.size()) winner = i;
      ++ties;
    }
  }
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < winner; ++i) next_combination(idx, d);

  const LsFit fit = ls_fit_on_support(masks, responses, idx);
  DecodeResult result;
  result.support = idx;
  result.coefficients = scatter(d, idx, fit.coefficients);
  result.residual_ss = fit.residual_ss;
  result.tie_broken = ties > 1;
  return result;
}

LassoSolution solve_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                          int max_iterations, double tolerance) {
  require(x.rows() == y.size(), "solve_lasso: design and response lengths differ");
  require(lambda >= 0.0, fmt::format("lambda must be >= 0, got {}", lambda));
  require(max_iterations >= 1, "max_iterations must be >= 1");
  require(tolerance > 0.0, "tolerance must be > 0");
  const Eigen::Index d = x.cols();
  LassoSolution sol;
  sol.beta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd residual = y;
  const Eigen::VectorXd norms = x.colwise().squaredNorm().transpose();
  for (int it = 0; it < max_iterations; ++it) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (norms[j] == 0.0) continue;
      const double rho = x.col(j).dot(residual) + norms[j] * sol.beta[j];
      const double shrunk = std::max(std::abs(rho) - lambda, 0.0);
      const double updated = std::copysign(shrunk, rho) / norms[j];
      const double delta = updated - sol.beta[j];
      if (delta != 0.0) {
        residual.noalias() -= delta * x.col(j);
        sol.beta[j] = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    sol.iterations = it + 1;
    if (max_delta < tolerance) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

double default_lasso_lambda(double sigma, int d, int rows) {
  require(sigma >= 0.0, "sigma must be >= 0");
  require(d >= 1 && rows >= 0, "default_lasso_lambda: need d >= 1, T >= 0");
  return 0.1 * sigma * std::sqrt(2.0 * std::log(static_cast<double>(d))) *
         std::sqrt(static_cast<double>(rows));
}

double default_lasso_lambda(double sigma, const MaskBatch& masks,
                            const Eigen::VectorXd& responses) {
  require_shapes(masks, responses, 0);
  double floor = 0.0;
  if (masks.rows() > 0) {
    floor = kLassoLambdaFloor *
            (masks.matrix().transpose() * responses).lpNorm<Eigen::Infinity>();
  }
  return std::max(default_lasso_lambda(sigma, masks.dim(), masks.rows()), floor);
}

DecodeResult lasso_decode(const MaskBatch& masks, const Eigen::VectorXd& responses, int k,
                          const LassoSettings& settings) {
  require_shapes(masks, responses, k);
  LassoSolution sol;
  if (settings.standardize && masks.rows() > 0) {
    const Eigen::RowVectorXd col_means = masks.matrix().colwise().mean();
    const Eigen::MatrixXd centred = masks.matrix().rowwise() - col_means;
    const Eigen::VectorXd y = responses.array() - responses.mean();
    sol = solve_lasso(centred, y, settings.lambda, settings.max_iterations, settings.tolerance);
  } else {
    sol = solve_lasso(masks.matrix(), responses, settings.lambda, settings.max_iterations,
                      settings.tolerance);
  }
  DecodeResult result;
  result.support = top_k_support(sol.beta, k, &result.tie_broken);
  const LsFit refit = ls_fit_on_support(masks, responses, result.support);
  result.coefficients = scatter(masks.dim(), result.support, refit.coefficients);
  result.residual_ss = refit.residual_ss;
  result.converged = sol.converged;
  return result;
}

DecodeResult ols_decode(const MaskBatch& masks, const Eigen::VectorXd& responses, int k) {
  require_shapes(masks, responses, k);
  const Eigen::MatrixXd& z = masks.matrix();
  const int d = masks.dim();
  const Eigen::MatrixXd gram = z.transpose() * z;
  if (masks.rows() >= d) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (lo > 0.0 && hi / lo < 1e8) {
      return dense_result(masks, responses, k, gram.ldlt().solve(z.transpose() * responses));
    }
  }
  // Undersampled or ill-conditioned: trace-scaled ridge.
  double lambda = 1e-3 * gram.trace() / d;
  if (!(lambda > 0.0)) lambda = kGramJitter;
  return dense_result(masks, responses, k, ridge_solve(z, responses, lambda));
}

DecodeResult ridge_decode(const MaskBatch& masks, const Eigen::VectorXd& responses, int k,
                          double lambda_ridge) {
  require_shapes(masks, responses, k);
  require(lambda_ridge > 0.0, fmt::format("ridge penalty must be > 0, got {}", lambda_ridge));
  return dense_result(masks, responses, k, ridge_solve(masks.matrix(), responses, lambda_ridge));
}

std::vector<int> top_k_support(const Eigen::VectorXd& values, int k, bool* tie_broken) {
  const int d = static_cast<int>(values.size());
  require(k >= 0 && k <= d, fmt::format("cannot take top {} of {} values", k, d));
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  if (tie_broken) {
    *tie_broken = k > 0 && k < d && std::abs(values[order[k - 1]]) == std::abs(values[order[k]]);
  }
  std::vector<int> support(order.begin(), order.begin() + k);
  std::sort(support.begin(), support.end());
  return support;
}

std::string_view to_string(DecoderId id) {
  switch (id) {
    case DecoderId::kMaximumLikelihood:
      return "ml";
    case DecoderId::kLasso:
      return "lasso";
    case DecoderId::kOls:
      return "ols";
    case DecoderId::kRidge:
      return "ridge";
  }
  return "unknown";
}

DecodeResult run_decoder(const DecoderSpec& spec, const MaskBatch& masks,
                         const Eigen::VectorXd& responses, int k, double sigma) {
  switch (spec.id) {
    case DecoderId::kMaximumLikelihood:
      return ml_decode(masks, responses, k, spec.enumeration_cap);
    case DecoderId::kLasso: {
      LassoSettings settings = spec.lasso;
      settings.lambda = spec.lasso_lambda.value_or(
          default_lasso_lambda(sigma, masks, responses));
      return lasso_decode(masks, responses, k, settings);
    }
    case DecoderId::kOls:
      return ols_decode(masks, responses, k);
    case DecoderId::kRidge:
      return ridge_decode(masks, responses, k, spec.ridge_lambda);
  }
  throw InvalidArgument("unknown decoder");
}

std::vector<TrialOutcome> run_recovery_trials(const std::vector<DecoderSpec>& decoders,
                                              const ChannelConfig& channel, int rows,
                                              int n_trials, Seed seed, int workers) {
  require(n_trials >= 1, fmt::format("n_trials must be >= 1, got {}", n_trials));
  require(rows >= 0, fmt::format("query count T must be >= 0, got {}", rows));
  require(channel.k >= 0 && channel.k <= channel.d,
          fmt::format("sparsity k must satisfy 0 <= k <= d = {}, got {}", channel.d, channel.k));
  require(channel.alpha == 0.0 || channel.interaction.has_value(),
          "alpha > 0 needs an interaction matrix");
  std::vector<TrialOutcome> outcomes(n_trials);
  parallel_for(n_trials, workers, [&](std::size_t i) {
    const Seed trial_seed = derive_seed(seed, i);
    const SparseExplanation phi = sample_sparse_explanation(
        channel.d, channel.k, channel.amplitude_mode, derive_seed(trial_seed, Stream::kExplanation));
    const MaskBatch masks =
        sample_mask_batch(channel.d, rows, channel.p, derive_seed(trial_seed, Stream::kMasks));
    const OracleModel model =
        channel.alpha > 0.0
            ? OracleModel(phi, channel.sigma, channel.alpha, *channel.interaction)
            : OracleModel(phi, channel.sigma);
    const ChannelComponents parts =
        oracle_components(masks, model, derive_seed(trial_seed, Stream::kNoise));
    const Eigen::VectorXd y = parts.signal + parts.interference + parts.noise;

    TrialOutcome& out = outcomes[i];
    if (rows > 0) {
      out.signal_power = parts.signal.squaredNorm() / rows;
      out.noise_power = parts.noise.squaredNorm() / rows;
      out.interference_power = parts.interference.squaredNorm() / rows;
    }
    out.success.assign(decoders.size(), 0);
    out.errored.assign(decoders.size(), 0);
    const std::vector<int> truth(phi.support().begin(), phi.support().end());
    for (std::size_t k = 0; k < decoders.size(); ++k) {
      try {
        const DecodeResult r = run_decoder(decoders[k], masks, y, channel.k, channel.sigma);
        out.success[k] = r.support == truth ? 1 : 0;
      } catch (const std::exception&) {
        out.errored[k] = 1;
      }
    }
  });
  return outcomes;
}

RecoveryStats summarize(const std::vector<TrialOutcome>& trials, std::size_t decoder_index) {
  require(!trials.empty(), "no trials to summarize");
  RecoveryStats stats;
  stats.n_trials = static_cast<int>(trials.size());
  for (const TrialOutcome& t : trials) {
    stats.successes += t.success.at(decoder_index);
    stats.errored += t.errored.at(decoder_index);
  }
  stats.rate = static_cast<double>(stats.successes) / stats.n_trials;
  stats.std_error = binomial_std_error(stats.rate, stats.n_trials);
  return stats;
}

RecoveryStats support_recovery_probability(const DecoderSpec& decoder,
                                           const ChannelConfig& channel, int rows, int n_trials,
                                           Seed seed, int workers) {
  return summarize(run_recovery_trials({decoder}, channel, rows, n_trials, seed, workers), 0);
}

}  // namespace qchannel
