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

#include "qchannel/stats.h"

#include <cmath>

#include "qchannel/errors.h"

namespace qchannel {

double binomial_std_error(double rate, int n) {
  require(n >= 1, "binomial standard error needs n >= 1");
  return std::sqrt(rate * (1.0 - rate) / n);
}

std::vector<double> isotonic_fit(std::span<const double> values, std::span<const double> weights) {
  require(weights.empty() || weights.size() == values.size(),
          "isotonic_fit: weights must match values");
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    blocks.push_back({values[i], w, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& below = blocks.back();
      const double total = below.weight + top.weight;
      below.mean = (below.mean * below.weight + top.mean * top.weight) / total;
      below.weight = total;
      below.count += top.count;
    }
  }
  std::vector<double> fit;
  fit.reserve(values.size());
  for (const Block& b : blocks) fit.insert(fit.end(), b.count, b.mean);
  return fit;
}

std::optional<double> pearson_correlation(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "pearson_correlation: length mismatch");
  if (x.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::fmax(-1.0, std::fmin(1.0, r));
}

void RunningMoments::push(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / n_;
  m2_ += delta * (x - mean_);
}

double RunningMoments::variance() const { return n_ > 1 ? m2_ / (n_ - 1) : 0.0; }

}  // namespace qchannel
