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

#ifndef QCHANNEL_EXPERIMENTS_H_
#define QCHANNEL_EXPERIMENTS_H_

// Reproducible sweeps over the query channel:
//
//   achievability  - success of ML / Lasso / OLS and the MI estimate vs T;
//   noise          - block error vs additive noise (waterfall);
//   curvature      - block error vs quadratic interference (error floor);
//   resolution     - ridge recovery on a synthetic image vs super-pixel count.
//
// Within one sweep every grid point reuses the same trial seeds (common random
// numbers): trial i draws the same explanation, masks and standard-normal
// noise at every point, so curves are coupled across the grid and a noise
// sweep at sigma = 0 sees exactly the data of a curvature sweep at alpha = 0.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qchannel/core_model.h"
#include "qchannel/decoders.h"
#include "qchannel/mi_estimator.h"
#include "qchannel/rng.h"

namespace qchannel {

struct DecoderStat {
  std::string name;
  // Success probability or block error probability, depending on the sweep.
  double value = 0.0;
  double std_error = 0.0;
  int errored = 0;
  // Per-trial success flags, for paired comparisons between decoders.
  std::vector<std::uint8_t> trial_success;
};

struct PowerStats {
  double signal_power = 0.0;
  // Noise power (noise sweep) or interference power (curvature sweep).
  double distortion_power = 0.0;
  // 10 log10(signal / distortion); unset when the distortion power is zero.
  std::optional<double> ratio_db;
  std::vector<double> trial_signal_power;
  std::vector<double> trial_distortion_power;
};

struct ResolutionInfo {
  int requested_d = 0;
  int grid_rows = 0;
  int grid_cols = 0;
  int k_eff = 0;
  // H(S(d)) <= I_T(d).
  bool information_feasible = false;
};

struct SweepResult {
  std::string variable;  // "T", "sigma", "alpha" or "d"
  double value = 0.0;
  std::optional<MiEstimate> mi;
  double entropy_bits = 0.0;
  std::vector<DecoderStat> decoders;
  std::optional<PowerStats> power;
  // Mean Pearson correlation; unset when every trial was degenerate.
  std::optional<double> correlation;
  std::optional<ResolutionInfo> resolution;

  const DecoderStat& decoder(const std::string& name) const;
};

// Called after each grid point completes, in grid order.
using RowCallback = std::function<void(const SweepResult&)>;

// Ratio of mean powers in dB, or nullopt when the distortion is zero.
std::optional<double> power_ratio_db(double signal_power, double distortion_power);

// --- achievability --------------------------------------------------------

struct AchievabilityConfig {
  int d = 12;
  int k = 2;
  double sigma = 0.1;
  double p = 0.5;
  std::vector<int> t_grid;  // defaults to 2..60 when empty
  int n_trials = 500;
  int n_outer = 2000;
  int n_inner = 2000;
  // Skip the MI estimate (rows then carry no MI and T_IT is not computed).
  bool estimate_mi = true;
  std::optional<double> lasso_lambda;
  LassoSettings lasso;
  std::int64_t enumeration_cap = kDefaultEnumerationCap;
  Seed seed = 0;
  int workers = 0;
};

struct AchievabilityReport {
  std::vector<SweepResult> rows;  // decoders "ml", "lasso", "ols"; value = success rate
  double entropy_bits = 0.0;
  std::optional<int> t_it;
  // k log2(d / k), the analytic support-recovery scale.
  double analytic_marker = 0.0;
};

std::vector<int> default_achievability_grid();

AchievabilityReport run_achievability_sweep(const AchievabilityConfig& config,
                                            const RowCallback& on_row = {});

// --- noise / curvature ----------------------------------------------------

struct WaterfallConfig {
  int d = 40;
  int k = 3;
  int t = 25;
  double p = 0.5;
  int n_trials = 400;
  std::optional<double> lasso_lambda;
  LassoSettings lasso;
  Seed seed = 0;
  int workers = 0;
};

std::vector<double> default_sigma_grid();
std::vector<double> default_alpha_grid();

// Rows carry decoders "sparse" (Lasso) and "dense" (OLS / ridge proxy) with
// value = block error probability, plus signal and noise powers.
std::vector<SweepResult> run_noise_sweep(const WaterfallConfig& config,
                                         const std::vector<double>& sigma_grid,
                                         const RowCallback& on_row = {});

struct CurvatureConfig {
  WaterfallConfig base;
  Seed q_seed = 1;
  int n_calibration = 200000;
};

// Interaction matrix used by run_curvature_sweep: symmetric Gaussian drawn
// from q_seed, scaled so that at alpha = 1 the mean interference power equals
// the mean signal power under the signed-unit prior.
Eigen::MatrixXd calibrated_interaction(const CurvatureConfig& config);

std::vector<SweepResult> run_curvature_sweep(const CurvatureConfig& config,
                                             const std::vector<double>& alpha_grid,
                                             const RowCallback& on_row = {});

// Mean of (z' phi)^2 over n draws of phi from the sparse prior and z from
// Bernoulli(p).
double mean_signal_power(int d, int k, AmplitudeMode mode, double p, int n, Seed seed);

// --- resolution -----------------------------------------------------------

// Inclusive pixel rectangle.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
};

struct GridShape {
  int rows = 0;
  int cols = 0;
};

// Near-square grid for d cells: the factor pair closest to square, with the
// longer side along the longer image axis. nullopt when that pair has an
// aspect ratio above 2 or does not fit in the image.
std::optional<GridShape> superpixel_grid(int d, int width, int height);

// Nearest d with a valid grid (ties go to the smaller value).
int snap_superpixel_count(int d, int width, int height);

class SyntheticImage {
 public:
  int width() const { return width_; }
  int height() const { return height_; }
  int segments() const { return static_cast<int>(ground_truth_.size()); }
  const PixelRect& salient_rect() const { return rect_; }
  const GridShape& grid() const { return grid_; }
  // Row-major segment label of each pixel.
  const std::vector<int>& segmentation() const { return labels_; }
  // Fraction of each segment's pixels inside the salient rectangle.
  const std::vector<double>& ground_truth_superpixel() const { return ground_truth_; }
  const std::vector<int>& segment_sizes() const { return sizes_; }
  // Pixels of each segment inside the salient rectangle.
  const std::vector<int>& salient_counts() const { return salient_counts_; }

 private:
  friend SyntheticImage build_synthetic_image(int, int, const PixelRect&, int);
  int width_ = 0;
  int height_ = 0;
  PixelRect rect_;
  GridShape grid_;
  std::vector<int> labels_;
  std::vector<double> ground_truth_;
  std::vector<int> sizes_;
  std::vector<int> salient_counts_;
};

// Constant unit-intensity image with a salient rectangle, segmented into a
// regular grid of d cells.
SyntheticImage build_synthetic_image(int width, int height, const PixelRect& salient_rect, int d);

// Y_t = sum of unit intensities of salient pixels whose segment is active in
// Z_t, plus N(0, sigma^2) noise.
Eigen::VectorXd image_oracle_evaluate(const SyntheticImage& image, const MaskBatch& masks,
                                      double sigma, Seed seed);

struct ResolutionConfig {
  int width = 64;
  int height = 64;
  PixelRect salient_rect{8, 8, 40, 40};
  std::vector<int> d_grid;  // defaults to default_resolution_grid(t)
  int t = 120;
  double sigma = 2.0;
  double p = 0.5;
  double lambda_ridge = 1.0;
  // Segments whose ground truth exceeds this count towards the support.
  double support_threshold = 0.5;
  int n_outer = 400;
  int n_inner = 400;
  int n_trials = 100;
  Seed seed = 0;
  int workers = 0;
};

std::vector<int> default_resolution_grid(int t);

// Rows carry: entropy H(S(d)) with k = k_eff, the MI estimate of the matched
// fixed-amplitude sparse model, mean ridge correlation against the ground
// truth and the feasibility flag.
std::vector<SweepResult> run_resolution_sweep(const ResolutionConfig& config,
                                              const RowCallback& on_row = {});

}  // namespace qchannel

#endif  // QCHANNEL_EXPERIMENTS_H_
