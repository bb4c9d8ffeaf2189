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

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.h"
#include "qchannel/errors.h"

namespace qchannel {
namespace {

struct Instance {
  MaskBatch masks;
  Eigen::VectorXd y;
  SparseExplanation phi;
};

Instance make_instance(int d, int k, int t, double sigma, Seed seed,
                       AmplitudeMode mode = AmplitudeMode::kStandardNormal) {
  SparseExplanation phi = sample_sparse_explanation(d, k, mode, derive_seed(seed, Stream::kExplanation));
  MaskBatch masks = sample_mask_batch(d, t, 0.5, derive_seed(seed, Stream::kMasks));
  Eigen::VectorXd y =
      oracle_evaluate(masks, OracleModel(phi, sigma), derive_seed(seed, Stream::kNoise)).responses();
  return {std::move(masks), std::move(y), std::move(phi)};
}

std::vector<int> support_of(const SparseExplanation& phi) {
  return {phi.support().begin(), phi.support().end()};
}

TEST(LsFitTest, MatchesInversionOracle) {
  // Coefficients are compared only when the Gram matrix is nonsingular; binary
  // masks often repeat a column, and the jittered solve then amplifies
  // rounding along the null direction. Fitted residuals are compared always.
  int compared = 0;
  for (int i = 0; i < 200; ++i) {
    const Instance in = make_instance(6, 3, 8, 0.3, derive_seed(1, i));
    const std::vector<int> support = {0, 2, 5};
    const LsFit fit = ls_fit_on_support(in.masks, in.y, support);
    const auto ref = oracle::least_squares(in.masks.matrix(), in.y, support, kGramJitter);
    ASSERT_NEAR(fit.residual_ss, static_cast<double>(ref.residual_ss), 1e-10);
    if (oracle::min_gram_eigenvalue(in.masks.matrix(), support) < 1e-3) continue;
    ++compared;
    for (int s = 0; s < 3; ++s) {
      ASSERT_NEAR(fit.coefficients[s], static_cast<double>(ref.coefficients[s]), 1e-10);
    }
  }
  EXPECT_GE(compared, 100);
}

TEST(LsFitTest, TwoByTwoClosedForm) {
  Eigen::MatrixXd z(3, 2);
  z << 1, 0, 1, 1, 0, 1;
  Eigen::VectorXd y(3);
  y << 1, 3, 2;
  // Gram [[2,1],[1,2]], Z'y = [4, 5]; inverse / 3 * [[2,-1],[-1,2]].
  const std::vector<int> support = {0, 1};
  const LsFit fit = ls_fit_on_support(MaskBatch(z, 0.5), y, support);
  EXPECT_NEAR(fit.coefficients[0], 1.0, 1e-9);
  EXPECT_NEAR(fit.coefficients[1], 2.0, 1e-9);
  EXPECT_NEAR(fit.residual_ss, 0.0, 1e-9);
}

TEST(LsFitTest, EmptySupportAndDeadColumn) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 2);
  z.col(0).setOnes();
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  const MaskBatch m(z, 0.5);
  EXPECT_DOUBLE_EQ(ls_fit_on_support(m, y, std::vector<int>{}).residual_ss, 14.0);
  const LsFit fit = ls_fit_on_support(m, y, std::vector<int>{0, 1});
  EXPECT_NEAR(fit.coefficients[0], 2.0, 1e-9);
  EXPECT_EQ(fit.coefficients[1], 0.0);
  EXPECT_THROW(ls_fit_on_support(m, y, std::vector<int>{2}), InvalidArgument);
}

TEST(MlDecodeTest, MatchesBruteForce) {
  for (int i = 0; i < 200; ++i) {
    const int d = 3 + i % 4;
    const int k = 1 + i % 2;
    const Instance in = make_instance(d, k, 2 + i % 7, 0.5, derive_seed(2, i));
    const DecodeResult r = ml_decode(in.masks, in.y, k);
    const auto ref = oracle::brute_force_ml(in.masks.matrix(), in.y, k, kGramJitter,
                                            1e-12L * in.y.squaredNorm());
    ASSERT_EQ(r.support, ref) << "instance " << i;
  }
}

TEST(MlDecodeTest, NoiselessRecoveryWithEnoughQueries) {
  for (int i = 0; i < 50; ++i) {
    const Instance in = make_instance(10, 2, 40, 0.0, derive_seed(3, i), AmplitudeMode::kSignedUnit);
    EXPECT_EQ(ml_decode(in.masks, in.y, 2).support, support_of(in.phi));
  }
}

TEST(MlDecodeTest, TiesGoToLexicographicallySmallest) {
  // All-zero responses: every support fits perfectly.
  const MaskBatch m = sample_mask_batch(5, 6, 0.5, 1);
  const DecodeResult r = ml_decode(m, Eigen::VectorXd::Zero(6), 2);
  EXPECT_EQ(r.support, (std::vector<int>{0, 1}));
  EXPECT_TRUE(r.tie_broken);
}

TEST(MlDecodeTest, EnumerationCap) {
  const MaskBatch m = sample_mask_batch(30, 5, 0.5, 1);
  EXPECT_THROW(ml_decode(m, Eigen::VectorXd::Zero(5), 10, 1000), CapacityExceeded);
  try {
    ml_decode(m, Eigen::VectorXd::Zero(5), 3, 100);
    FAIL();
  } catch (const CapacityExceeded& e) {
    EXPECT_NEAR(e.requested(), 4060.0, 1e-6);
    EXPECT_EQ(e.cap(), 100.0);
  }
}

TEST(LassoTest, KktConditionsHold) {
  for (int i = 0; i < 200; ++i) {
    const Instance in = make_instance(8 + i % 10, 2, 10 + i % 15, 0.2, derive_seed(4, i));
    const Eigen::MatrixXd& x = in.masks.matrix();
    const double lambda = 0.05 + 0.5 * (i % 5);
    const LassoSolution sol = solve_lasso(x, in.y, lambda, 100000, 1e-12);
    ASSERT_TRUE(sol.converged);
    ASSERT_LE(oracle::lasso_kkt_violation(x, in.y, sol.beta, lambda), 1e-8) << "instance " << i;
  }
}

TEST(LassoTest, LargePenaltyGivesZero) {
  const Instance in = make_instance(10, 2, 20, 0.1, 7);
  const double lmax = (in.masks.matrix().transpose() * in.y).cwiseAbs().maxCoeff();
  const LassoSolution sol = solve_lasso(in.masks.matrix(), in.y, lmax * 1.0001, 1000, 1e-12);
  EXPECT_EQ(sol.beta.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LassoTest, ZeroPenaltyMatchesLeastSquares) {
  const Instance in = make_instance(4, 2, 30, 0.3, 8);
  const LassoSolution sol = solve_lasso(in.masks.matrix(), in.y, 0.0, 100000, 1e-13);
  const auto ref = oracle::least_squares(in.masks.matrix(), in.y, {0, 1, 2, 3}, 0.0L);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(sol.beta[j], static_cast<double>(ref.coefficients[j]), 1e-8);
}

TEST(LassoTest, DecodeReturnsRefitOnTopK) {
  const Instance in = make_instance(12, 2, 40, 0.05, 9, AmplitudeMode::kSignedUnit);
  LassoSettings s;
  s.lambda = default_lasso_lambda(0.05, 12, 40);
  const DecodeResult r = lasso_decode(in.masks, in.y, 2, s);
  EXPECT_EQ(r.support, support_of(in.phi));
  const LsFit refit = ls_fit_on_support(in.masks, in.y, r.support);
  EXPECT_NEAR(r.coefficients[r.support[0]], refit.coefficients[0], 1e-12);
  EXPECT_NEAR(r.residual_ss, refit.residual_ss, 1e-12);
  s.standardize = true;
  EXPECT_EQ(lasso_decode(in.masks, in.y, 2, s).support, support_of(in.phi));
}

TEST(LassoTest, DefaultPenaltyRuleAndFloor) {
  EXPECT_NEAR(default_lasso_lambda(0.1, 12, 25), 0.1 * 0.1 * std::sqrt(2 * std::log(12.0)) * 5, 1e-15);
  EXPECT_EQ(default_lasso_lambda(0.0, 12, 25), 0.0);
  const Instance in = make_instance(12, 2, 25, 0.0, 10);
  const double floor = kLassoLambdaFloor * (in.masks.matrix().transpose() * in.y).cwiseAbs().maxCoeff();
  EXPECT_NEAR(default_lasso_lambda(0.0, in.masks, in.y), floor, 1e-15);
  EXPECT_GT(floor, 0.0);
  EXPECT_NEAR(default_lasso_lambda(10.0, in.masks, in.y), default_lasso_lambda(10.0, 12, 25), 1e-15);
}

TEST(RidgeTest, MatchesIterativeRefinementOracle) {
  for (int i = 0; i < 50; ++i) {
    const Instance in = make_instance(15, 3, 10, 0.1, derive_seed(11, i));
    const double lambda = 0.3;
    const DecodeResult r = ridge_decode(in.masks, in.y, 3, lambda);
    // Richardson iteration on (Z'Z + lambda I) b = Z'y in long double.
    const Eigen::MatrixXd& z = in.masks.matrix();
    const int d = 15;
    std::vector<long double> b(d, 0), rhs(d, 0);
    oracle::Matrix g(d, std::vector<long double>(d, 0));
    for (int a = 0; a < d; ++a) {
      for (int t = 0; t < z.rows(); ++t) {
        rhs[a] += z(t, a) * in.y[t];
        for (int c = 0; c < d; ++c) g[a][c] += z(t, a) * z(t, c);
      }
      g[a][a] += lambda;
    }
    b = oracle::gauss_solve(g, rhs);
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<long double> res = rhs;
      for (int a = 0; a < d; ++a) {
        for (int c = 0; c < d; ++c) res[a] -= g[a][c] * b[c];
      }
      const auto corr = oracle::gauss_solve(g, res);
      for (int a = 0; a < d; ++a) b[a] += corr[a];
    }
    for (int a = 0; a < d; ++a) ASSERT_NEAR(r.coefficients[a], static_cast<double>(b[a]), 1e-9);
  }
  const Instance in = make_instance(5, 1, 5, 0.1, 1);
  EXPECT_THROW(ridge_decode(in.masks, in.y, 1, 0.0), InvalidArgument);
}

TEST(OlsTest, WellPosedIsLeastSquaresAndUnderdeterminedFallsBack) {
  const Instance tall = make_instance(5, 2, 60, 0.1, 12);
  const DecodeResult r = ols_decode(tall.masks, tall.y, 2);
  const auto ref = oracle::least_squares(tall.masks.matrix(), tall.y, {0, 1, 2, 3, 4}, 0.0L);
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(r.coefficients[j], static_cast<double>(ref.coefficients[j]), 1e-9);

  const Instance wide = make_instance(20, 2, 8, 0.1, 13);
  const DecodeResult w = ols_decode(wide.masks, wide.y, 2);
  const Eigen::MatrixXd& z = wide.masks.matrix();
  const double lambda = 1e-3 * (z.transpose() * z).trace() / 20;
  const DecodeResult ridge = ridge_decode(wide.masks, wide.y, 2, lambda);
  EXPECT_TRUE(w.coefficients.isApprox(ridge.coefficients, 1e-12));
  EXPECT_EQ(w.support.size(), 2u);
}

TEST(TopKTest, OrderingAndTies) {
  Eigen::VectorXd v(5);
  v << 0.1, -3.0, 2.0, -2.0, 0.5;
  bool tie = false;
  EXPECT_EQ(top_k_support(v, 2, &tie), (std::vector<int>{1, 2}));
  EXPECT_TRUE(tie);
  EXPECT_EQ(top_k_support(v, 3, &tie), (std::vector<int>{1, 2, 3}));
  EXPECT_FALSE(tie);
  EXPECT_TRUE(top_k_support(v, 0).empty());
  EXPECT_THROW(top_k_support(v, 6), InvalidArgument);
}

TEST(RecoveryTrialsTest, WorkerIndependentAndPaired) {
  ChannelConfig ch;
  ch.d = 10;
  ch.k = 2;
  ch.sigma = 0.2;
  std::vector<DecoderSpec> specs(3);
  specs[0].id = DecoderId::kMaximumLikelihood;
  specs[1].id = DecoderId::kLasso;
  specs[2].id = DecoderId::kOls;
  const auto a = run_recovery_trials(specs, ch, 15, 60, 5, 1);
  const auto b = run_recovery_trials(specs, ch, 15, 60, 5, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].success, b[i].success);
    EXPECT_EQ(a[i].signal_power, b[i].signal_power);
  }
  const RecoveryStats s = summarize(a, 0);
  EXPECT_EQ(s.n_trials, 60);
  EXPECT_NEAR(s.std_error, std::sqrt(s.rate * (1 - s.rate) / 60), 1e-15);
  // One decoder alone sees the same trial data.
  const RecoveryStats alone = support_recovery_probability(specs[0], ch, 15, 60, 5, 2);
  EXPECT_EQ(alone.successes, s.successes);
}

TEST(RecoveryTrialsTest, CapacityErrorsAreCountedNotThrown) {
  ChannelConfig ch;
  ch.d = 30;
  ch.k = 6;
  DecoderSpec ml;
  ml.enumeration_cap = 1000;
  const RecoveryStats s = support_recovery_probability(ml, ch, 5, 4, 1, 1);
  EXPECT_EQ(s.errored, 4);
  EXPECT_EQ(s.successes, 0);
}

TEST(DecoderIdTest, Names) {
  EXPECT_EQ(to_string(DecoderId::kMaximumLikelihood), "ml");
  EXPECT_EQ(to_string(DecoderId::kLasso), "lasso");
  EXPECT_EQ(to_string(DecoderId::kOls), "ols");
  EXPECT_EQ(to_string(DecoderId::kRidge), "ridge");
}

}  // namespace
}  // namespace qchannel
