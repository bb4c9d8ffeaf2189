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

#ifndef QCHANNEL_CORE_MODEL_H_
#define QCHANNEL_CORE_MODEL_H_

// Query-channel forward model: sparse latent explanations, Bernoulli mask
// designs, and the oracle
//
//   Y_t = Z_t' phi + alpha * Z_t' Q Z_t + eps_t,   eps_t ~ N(0, sigma^2).
//
// All types are immutable once built and every sampler is a pure function of
// its arguments and seed.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qchannel/rng.h"

namespace qchannel {

enum class AmplitudeMode {
  kStandardNormal,  // i.i.d. N(0, 1) on the support.
  kSignedUnit,      // i.i.d. uniform on {-1, +1}.
  kFixedUnit,       // every support amplitude is +1 (support <-> explanation).
};

std::string_view to_string(AmplitudeMode mode);
AmplitudeMode parse_amplitude_mode(std::string_view name);

// First and second moments of one support amplitude under `mode`.
struct AmplitudeMoments {
  double mean;
  double variance;
};
AmplitudeMoments amplitude_moments(AmplitudeMode mode);

// A k-sparse vector in R^d stored as (support, amplitudes), support ascending.
class SparseExplanation {
 public:
  // Validates: indices distinct and < dim, amplitudes nonzero and aligned.
  // The pairs are reordered so the support is ascending.
  SparseExplanation(int dim, std::vector<int> support, std::vector<double> amplitudes);

  int dim() const { return dim_; }
  int sparsity() const { return static_cast<int>(support_.size()); }
  std::span<const int> support() const { return support_; }
  std::span<const double> amplitudes() const { return amplitudes_; }

  Eigen::VectorXd dense() const;

  bool operator==(const SparseExplanation&) const = default;

 private:
  int dim_;
  std::vector<int> support_;
  std::vector<double> amplitudes_;
};

// T x d binary design. Stored as doubles because every consumer multiplies it.
class MaskBatch {
 public:
  // Validates that every entry is exactly 0 or 1 and that 0 < policy_p < 1.
  MaskBatch(Eigen::MatrixXd bits, double policy_p);
  // An empty batch of the given dimension.
  MaskBatch(int dim, double policy_p);

  int rows() const { return static_cast<int>(bits_.rows()); }
  int dim() const { return static_cast<int>(bits_.cols()); }
  double policy_p() const { return policy_p_; }
  const Eigen::MatrixXd& matrix() const { return bits_; }
  bool active(int row, int feature) const { return bits_(row, feature) != 0.0; }

  bool operator==(const MaskBatch& other) const;

 private:
  Eigen::MatrixXd bits_;
  double policy_p_;
};

class OracleModel {
 public:
  // Linear Gaussian oracle (alpha = 0).
  OracleModel(SparseExplanation phi_star, double sigma);
  // Curved oracle. `interaction` must be a symmetric d x d matrix; it is
  // stored only when alpha > 0.
  OracleModel(SparseExplanation phi_star, double sigma, double alpha,
              Eigen::MatrixXd interaction);

  const SparseExplanation& phi_star() const { return phi_star_; }
  double sigma() const { return sigma_; }
  double alpha() const { return alpha_; }
  const std::optional<Eigen::MatrixXd>& interaction() const { return interaction_; }

 private:
  SparseExplanation phi_star_;
  double sigma_;
  double alpha_ = 0.0;
  std::optional<Eigen::MatrixXd> interaction_;
};

struct OracleFingerprint {
  double sigma;
  double alpha;
};

class QueryDataset {
 public:
  QueryDataset(MaskBatch masks, Eigen::VectorXd responses, OracleFingerprint fingerprint);

  const MaskBatch& masks() const { return masks_; }
  const Eigen::VectorXd& responses() const { return responses_; }
  const OracleFingerprint& oracle_fingerprint() const { return fingerprint_; }
  int rows() const { return masks_.rows(); }

 private:
  MaskBatch masks_;
  Eigen::VectorXd responses_;
  OracleFingerprint fingerprint_;
};

// Per-query split of one oracle run: signal Z_t' phi, interference
// alpha Z_t' Q Z_t and noise eps_t. Their sum is the response.
struct ChannelComponents {
  Eigen::VectorXd signal;
  Eigen::VectorXd interference;
  Eigen::VectorXd noise;
};

SparseExplanation sample_sparse_explanation(int d, int k, AmplitudeMode mode, Seed seed);

MaskBatch sample_mask_batch(int d, int rows, double p, Seed seed);

ChannelComponents oracle_components(const MaskBatch& masks, const OracleModel& model,
                                    Seed seed);

QueryDataset oracle_evaluate(const MaskBatch& masks, const OracleModel& model, Seed seed);

// Symmetric matrix whose upper triangle (diagonal included) is i.i.d. N(0, 1).
Eigen::MatrixXd sample_symmetric_gaussian(int d, Seed seed);

// Returns c * q_raw, c > 0, such that over n_cal Bernoulli(p) masks the mean
// of (z' c q_raw z)^2 equals the mean of (z' phi_star)^2.
Eigen::MatrixXd scale_interaction_matrix(const Eigen::MatrixXd& q_raw,
                                         const SparseExplanation& phi_star, double p,
                                         int n_cal, Seed seed);

// Same calibration against a prescribed mean signal power.
Eigen::MatrixXd scale_interaction_matrix(const Eigen::MatrixXd& q_raw,
                                         double target_signal_power, double p, int n_cal,
                                         Seed seed);

}  // namespace qchannel

#endif  // QCHANNEL_CORE_MODEL_H_
