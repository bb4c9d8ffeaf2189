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

#include "qchannel/core_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include <fmt/core.h>

#include "qchannel/errors.h"

namespace qchannel {

namespace {

template <typename Row>
void draw_mask_row(Rng& rng, double p, Row&& row) {
  for (Eigen::Index j = 0; j < row.size(); ++j) row[j] = rng.bernoulli(p) ? 1.0 : 0.0;
}

double linear_response(const SparseExplanation& phi, const Eigen::RowVectorXd& z) {
  double acc = 0.0;
  const auto support = phi.support();
  const auto amplitudes = phi.amplitudes();
  for (std::size_t s = 0; s < support.size(); ++s) acc += z[support[s]] * amplitudes[s];
  return acc;
}

double quadratic_form(const Eigen::MatrixXd& q, const Eigen::RowVectorXd& z) {
  // z is binary, so z'Qz is the sum of Q over the active block.
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] == 0.0) continue;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      if (z[j] != 0.0) acc += q(i, j);
    }
  }
  return acc;
}

void require_symmetric(const Eigen::MatrixXd& q, int d) {
  require(q.rows() == d && q.cols() == d,
          fmt::format("interaction matrix must be {0}x{0}, got {1}x{2}", d, q.rows(), q.cols()));
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      require(q(i, j) == q(j, i),
              fmt::format("interaction matrix is not symmetric at ({}, {})", i, j));
    }
  }
}

}  // namespace

std::string_view to_string(AmplitudeMode mode) {
  switch (mode) {
    case AmplitudeMode::kStandardNormal:
      return "standard-normal";
    case AmplitudeMode::kSignedUnit:
      return "signed-unit";
    case AmplitudeMode::kFixedUnit:
      return "fixed-unit";
  }
  return "unknown";
}

AmplitudeMode parse_amplitude_mode(std::string_view name) {
  if (name == "standard-normal") return AmplitudeMode::kStandardNormal;
  if (name == "signed-unit") return AmplitudeMode::kSignedUnit;
  if (name == "fixed-unit") return AmplitudeMode::kFixedUnit;
  throw InvalidArgument(fmt::format("unknown amplitude mode '{}'", name));
}

AmplitudeMoments amplitude_moments(AmplitudeMode mode) {
  switch (mode) {
    case AmplitudeMode::kStandardNormal:
    case AmplitudeMode::kSignedUnit:
      return {0.0, 1.0};
    case AmplitudeMode::kFixedUnit:
      return {1.0, 0.0};
  }
  return {0.0, 0.0};
}

SparseExplanation::SparseExplanation(int dim, std::vector<int> support,
                                     std::vector<double> amplitudes)
    : dim_(dim) {
  require(dim >= 1, fmt::format("dimension must be >= 1, got {}", dim));
  require(support.size() == amplitudes.size(),
          fmt::format("support has {} indices but {} amplitudes", support.size(),
                      amplitudes.size()));
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
  support_.reserve(order.size());
  amplitudes_.reserve(order.size());
  for (std::size_t i : order) {
    const int index = support[i];
    require(index >= 0 && index < dim,
            fmt::format("support index {} outside [0, {})", index, dim));
    require(support_.empty() || support_.back() != index,
            fmt::format("support index {} repeated", index));
    require(amplitudes[i] != 0.0 && std::isfinite(amplitudes[i]),
            fmt::format("amplitude at index {} must be finite and nonzero", index));
    support_.push_back(index);
    amplitudes_.push_back(amplitudes[i]);
  }
}

Eigen::VectorXd SparseExplanation::dense() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  for (std::size_t s = 0; s < support_.size(); ++s) out[support_[s]] = amplitudes_[s];
  return out;
}

MaskBatch::MaskBatch(Eigen::MatrixXd bits, double policy_p)
    : bits_(std::move(bits)), policy_p_(policy_p) {
  require(policy_p > 0.0 && policy_p < 1.0,
          fmt::format("mask probability p must lie in (0, 1), got {}", policy_p));
  require(bits_.cols() >= 1, "mask dimension must be >= 1");
  const bool binary = (bits_.array() == 0.0 || bits_.array() == 1.0).all();
  require(binary, "mask entries must be 0 or 1");
}

MaskBatch::MaskBatch(int dim, double policy_p) : MaskBatch(Eigen::MatrixXd(0, dim), policy_p) {}

bool MaskBatch::operator==(const MaskBatch& other) const {
  return policy_p_ == other.policy_p_ && bits_.rows() == other.bits_.rows() &&
         bits_.cols() == other.bits_.cols() && bits_ == other.bits_;
}

OracleModel::OracleModel(SparseExplanation phi_star, double sigma)
    : phi_star_(std::move(phi_star)), sigma_(sigma) {
  require(sigma >= 0.0 && std::isfinite(sigma),
          fmt::format("noise sigma must be finite and >= 0, got {}", sigma));
}

OracleModel::OracleModel(SparseExplanation phi_star, double sigma, double alpha,
                         Eigen::MatrixXd interaction)
    : OracleModel(std::move(phi_star), sigma) {
  require(alpha >= 0.0 && std::isfinite(alpha),
          fmt::format("curvature alpha must be finite and >= 0, got {}", alpha));
  alpha_ = alpha;
  if (alpha > 0.0) {
    require_symmetric(interaction, phi_star_.dim());
    interaction_ = std::move(interaction);
  }
}

QueryDataset::QueryDataset(MaskBatch masks, Eigen::VectorXd responses,
                           OracleFingerprint fingerprint)
    : masks_(std::move(masks)), responses_(std::move(responses)), fingerprint_(fingerprint) {
  require(responses_.size() == masks_.rows(),
          fmt::format("{} responses for {} mask rows", responses_.size(), masks_.rows()));
}

SparseExplanation sample_sparse_explanation(int d, int k, AmplitudeMode mode, Seed seed) {
  require(d >= 1, fmt::format("dimension d must be >= 1, got {}", d));
  require(k >= 0 && k <= d, fmt::format("sparsity k must satisfy 0 <= k <= d = {}, got {}", d, k));
  Rng rng(seed);
  // Partial Fisher-Yates: the first k slots form a uniform k-subset.
  std::vector<int> pool(d);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - i)));
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> support(pool.begin(), pool.begin() + k);
  std::vector<double> amplitudes(k);
  for (int s = 0; s < k; ++s) {
    switch (mode) {
      case AmplitudeMode::kStandardNormal: {
        double a = rng.normal();
        while (a == 0.0) a = rng.normal();
        amplitudes[s] = a;
        break;
      }
      case AmplitudeMode::kSignedUnit:
        amplitudes[s] = rng.sign();
        break;
      case AmplitudeMode::kFixedUnit:
        amplitudes[s] = 1.0;
        break;
    }
  }
  return SparseExplanation(d, std::move(support), std::move(amplitudes));
}

MaskBatch sample_mask_batch(int d, int rows, double p, Seed seed) {
  require(d >= 1, fmt::format("dimension d must be >= 1, got {}", d));
  require(rows >= 0, fmt::format("row count T must be >= 0, got {}", rows));
  require(p > 0.0 && p < 1.0, fmt::format("mask probability p must lie in (0, 1), got {}", p));
  Rng rng(seed);
  Eigen::MatrixXd bits(rows, d);
  for (int t = 0; t < rows; ++t) draw_mask_row(rng, p, bits.row(t));
  return MaskBatch(std::move(bits), p);
}

ChannelComponents oracle_components(const MaskBatch& masks, const OracleModel& model,
                                    Seed seed) {
  const SparseExplanation& phi = model.phi_star();
  require(masks.dim() == phi.dim(),
          fmt::format("mask dimension {} does not match explanation dimension {}", masks.dim(),
                      phi.dim()));
  const int rows = masks.rows();
  ChannelComponents out{Eigen::VectorXd::Zero(rows), Eigen::VectorXd::Zero(rows),
                        Eigen::VectorXd::Zero(rows)};
  const Eigen::MatrixXd& z = masks.matrix();
  for (int t = 0; t < rows; ++t) out.signal[t] = linear_response(phi, z.row(t));
  if (model.alpha() > 0.0) {
    const Eigen::MatrixXd& q = *model.interaction();
    for (int t = 0; t < rows; ++t) out.interference[t] = model.alpha() * quadratic_form(q, z.row(t));
  }
  if (model.sigma() > 0.0) {
    Rng rng(seed);
    for (int t = 0; t < rows; ++t) out.noise[t] = model.sigma() * rng.normal();
  }
  return out;
}

QueryDataset oracle_evaluate(const MaskBatch& masks, const OracleModel& model, Seed seed) {
  ChannelComponents parts = oracle_components(masks, model, seed);
  Eigen::VectorXd y = parts.signal + parts.interference + parts.noise;
  return QueryDataset(masks, std::move(y), {model.sigma(), model.alpha()});
}

Eigen::MatrixXd sample_symmetric_gaussian(int d, Seed seed) {
  require(d >= 1, fmt::format("dimension d must be >= 1, got {}", d));
  Rng rng(seed);
  Eigen::MatrixXd q(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      q(i, j) = rng.normal();
      q(j, i) = q(i, j);
    }
  }
  return q;
}

Eigen::MatrixXd scale_interaction_matrix(const Eigen::MatrixXd& q_raw, double target_signal_power,
                                         double p, int n_cal, Seed seed) {
  const int d = static_cast<int>(q_raw.rows());
  require(d >= 1, "interaction matrix must be nonempty");
  require_symmetric(q_raw, d);
  require(p > 0.0 && p < 1.0, fmt::format("mask probability p must lie in (0, 1), got {}", p));
  require(n_cal >= 1, fmt::format("calibration sample count must be >= 1, got {}", n_cal));
  require(target_signal_power > 0.0 && std::isfinite(target_signal_power),
          "target signal power must be positive");
  Rng rng(seed);
  Eigen::RowVectorXd z(d);
  double interference_power = 0.0;
  for (int n = 0; n < n_cal; ++n) {
    draw_mask_row(rng, p, z);
    const double v = quadratic_form(q_raw, z);
    interference_power += v * v;
  }
  interference_power /= n_cal;
  if (!(interference_power > 0.0)) {
    throw DegenerateInteraction("interaction matrix has zero curvature power; cannot calibrate");
  }
  return std::sqrt(target_signal_power / interference_power) * q_raw;
}

Eigen::MatrixXd scale_interaction_matrix(const Eigen::MatrixXd& q_raw,
                                         const SparseExplanation& phi_star, double p, int n_cal,
                                         Seed seed) {
  require(phi_star.sparsity() > 0, "calibration needs a nonzero explanation");
  require(phi_star.dim() == q_raw.rows(),
          fmt::format("explanation dimension {} does not match interaction size {}",
                      phi_star.dim(), q_raw.rows()));
  require(n_cal >= 1, fmt::format("calibration sample count must be >= 1, got {}", n_cal));
  require(p > 0.0 && p < 1.0, fmt::format("mask probability p must lie in (0, 1), got {}", p));
  // Same mask stream as the interference pass, so both powers are measured on
  // identical draws.
  Rng rng(seed);
  Eigen::RowVectorXd z(phi_star.dim());
  double signal_power = 0.0;
  for (int n = 0; n < n_cal; ++n) {
    draw_mask_row(rng, p, z);
    const double s = linear_response(phi_star, z);
    signal_power += s * s;
  }
  signal_power /= n_cal;
  if (!(signal_power > 0.0)) {
    throw InvalidArgument("explanation produced zero signal power on the calibration masks");
  }
  return scale_interaction_matrix(q_raw, signal_power, p, n_cal, seed);
}

}  // namespace qchannel
