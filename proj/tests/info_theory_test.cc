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

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.h"
#include "qchannel/errors.h"

namespace qchannel {
namespace {

// log2 C(d, k) by summing log2 over the Pascal-triangle row in long double.
long double log2_binomial_reference(int d, int k) {
  long double acc = 0;
  for (int i = 1; i <= k; ++i) acc += std::log2l(static_cast<long double>(d - k + i) / i);
  return acc;
}

TEST(SupportEntropyTest, KnownValues) {
  EXPECT_NEAR(support_entropy(12, 2), std::log2(66.0), 1e-12);
  EXPECT_EQ(support_entropy(7, 0), 0.0);
  EXPECT_EQ(support_entropy(7, 7), 0.0);
  EXPECT_NEAR(support_entropy(4, 1), 2.0, 1e-15);
  EXPECT_NEAR(support_entropy(40, 3), std::log2(9880.0), 1e-12);
  EXPECT_THROW(support_entropy(5, 6), InvalidArgument);
  EXPECT_THROW(support_entropy(5, -1), InvalidArgument);
}

TEST(SupportEntropyTest, MatchesReferenceAndPascal) {
  for (int d = 1; d <= 300; d += 7) {
    for (int k = 0; k <= d; ++k) {
      const double h = support_entropy(d, k);
      ASSERT_NEAR(h, static_cast<double>(log2_binomial_reference(d, k)), 1e-9 * std::max(1.0, h))
          << d << " " << k;
      if (d >= 2 && k >= 1 && k < d && h < 900) {
        // C(d, k) = C(d-1, k-1) + C(d-1, k)
        const double lhs = std::exp2(h);
        const double rhs = std::exp2(support_entropy(d - 1, k - 1)) + std::exp2(support_entropy(d - 1, k));
        ASSERT_NEAR(lhs / rhs, 1.0, 1e-10);
      }
    }
  }
}

TEST(SupportEntropyTest, SymmetryAndMonotonicity) {
  for (int d = 1; d <= 2000; d += 13) {
    for (int k = 0; k <= d; k += std::max(1, d / 50)) {
      ASSERT_NEAR(support_entropy(d, k), support_entropy(d, d - k), 1e-9 * (1 + support_entropy(d, k)));
      if (k <= d) ASSERT_LE(support_entropy(d, k), support_entropy(d + 1, k) + 1e-12);
      if (2 * (k + 1) <= d) ASSERT_LE(support_entropy(d, k), support_entropy(d, k + 1) + 1e-12);
    }
  }
}

TEST(RateTest, Basics) {
  EXPECT_DOUBLE_EQ(explanation_rate(12.0, 4), 3.0);
  EXPECT_THROW(explanation_rate(1.0, 0), InvalidArgument);
}

TEST(PerQueryMiTest, GaussianFormula) {
  EXPECT_NEAR(per_query_mi_gaussian(3.0, 1.0), 1.0, 1e-15);
  EXPECT_EQ(per_query_mi_gaussian(0.0, 2.0), 0.0);
  EXPECT_THROW(per_query_mi_gaussian(1.0, 0.0), InvalidArgument);
}

TEST(QueryBoundsTest, Formulas) {
  EXPECT_DOUBLE_EQ(dense_query_lower_bound(100, 8.0, 2.0), 400.0);
  EXPECT_DOUBLE_EQ(sparse_query_lower_bound(64, 4, 2.0), 8.0);
  EXPECT_THROW(sparse_query_lower_bound(4, 5, 1.0), InvalidArgument);
  EXPECT_THROW(dense_query_lower_bound(4, 8.0, 0.0), InvalidArgument);
}

TEST(CriticalResolutionTest, MatchesLinearScan) {
  for (int t : {1, 3, 10, 40}) {
    for (int k : {1, 2, 5}) {
      for (double c : {0.5, 1.0, 2.3}) {
        const double budget = t * c;
        int expected = k;
        for (int d = k; d < 100000; ++d) {
          if (static_cast<double>(log2_binomial_reference(d, k)) <= budget) expected = d;
          else break;
        }
        if (expected >= 99999) continue;
        ASSERT_EQ(critical_resolution(t, k, c), expected) << t << " " << k << " " << c;
      }
    }
  }
}

TEST(CriticalResolutionTest, LargeBudgets) {
  // k = 1: H = log2 d, so d_crit = floor(2^(T C)).
  EXPECT_EQ(critical_resolution(20, 1, 1.0), std::int64_t{1} << 20);
  EXPECT_FALSE(critical_resolution(1000, 1, 10.0).has_value());
}

TEST(MaskSignalVarianceTest, MatchesEnumeration) {
  // Enumerate every support for a fixed mask and compute Var(z' phi) from the
  // amplitude moments directly.
  const int d = 7;
  for (AmplitudeMode mode :
       {AmplitudeMode::kStandardNormal, AmplitudeMode::kSignedUnit, AmplitudeMode::kFixedUnit}) {
    const AmplitudeMoments mom = amplitude_moments(mode);
    for (int k = 0; k <= d; ++k) {
      for (int active = 0; active <= d; ++active) {
        double mean = 0.0;
        double second = 0.0;
        int count = 0;
        oracle::for_each_subset(d, k, [&](const std::vector<int>& s) {
          int n = 0;
          for (int j : s) n += j < active ? 1 : 0;  // mask = first `active` coordinates
          mean += n * mom.mean;
          // E[(sum of n amplitudes)^2] = n var + n^2 mean^2
          second += n * mom.variance + static_cast<double>(n) * n * mom.mean * mom.mean;
          ++count;
        });
        mean /= count;
        second /= count;
        ASSERT_NEAR(mask_signal_variance(d, k, active, mom), second - mean * mean, 1e-12)
            << to_string(mode) << " k=" << k << " active=" << active;
      }
    }
  }
}

TEST(CapacityTest, EnvelopeDominatesPolicyBound) {
  for (AmplitudeMode mode :
       {AmplitudeMode::kStandardNormal, AmplitudeMode::kSignedUnit, AmplitudeMode::kFixedUnit}) {
    for (int k : {1, 2, 3}) {
      for (double p : {0.2, 0.5, 0.8}) {
        const double env = capacity_envelope(12, k, 0.1, mode);
        const double pol = policy_capacity_bound(12, k, 0.1, p, mode);
        EXPECT_GE(env + 1e-12, pol);
        EXPECT_GT(pol, 0.0);
      }
    }
  }
  // Zero-mean amplitudes: the all-ones mask gives Var = k.
  EXPECT_NEAR(capacity_envelope(12, 2, 0.1, AmplitudeMode::kStandardNormal),
              0.5 * std::log2(1 + 2.0 / 0.01), 1e-12);
  EXPECT_NEAR(policy_capacity_bound(12, 2, 0.1, 0.5, AmplitudeMode::kSignedUnit),
              0.5 * std::log2(1 + 1.0 / 0.01), 1e-12);
  // Scaling amplitudes by c is the same as dividing sigma by c.
  EXPECT_NEAR(capacity_envelope(9, 2, 0.4, AmplitudeMode::kFixedUnit, 2.0),
              capacity_envelope(9, 2, 0.2, AmplitudeMode::kFixedUnit), 1e-12);
}

TEST(InfoBudgetTest, Fields) {
  const InfoBudget b = make_info_budget(12, 2, 6, 1.5);
  EXPECT_NEAR(b.entropy_bits, std::log2(66.0), 1e-12);
  EXPECT_NEAR(b.rate_bits_per_query, std::log2(66.0) / 6, 1e-12);
  EXPECT_EQ(b.capacity_bound_bits, 1.5);
  EXPECT_EQ(b.query_count, 6);
}

}  // namespace
}  // namespace qchannel
