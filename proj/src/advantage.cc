// Copyright 2026 The socdil Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "socdil/advantage.h"

#include "socdil/errors.h"

namespace socdil {

std::vector<Series> LooAdvantages(std::span<const Series> group_returns) {
  const std::size_t k = group_returns.size();
  if (k < 2) {
    throw InvalidArgument("leave-one-out baseline needs at least 2 members");
  }
  const std::size_t length = group_returns[0].size();
  for (const Series& g : group_returns) {
    if (g.size() != length) {
      throw InvalidArgument("group members have different lengths");
    }
  }
  std::vector<Series> out(k, Series(length, 0.0));
  const double others = static_cast<double>(k - 1);
  // Mean of pairwise differences rather than own - mean(others): equal
  // returns then give exactly zero.
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      const double own = group_returns[i][t];
      double diff = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j != i) diff += own - group_returns[j][t];
      }
      out[i][t] = diff / others;
    }
  }
  return out;
}

Series ShapingCarry(std::span<const double> own_advantages, double gamma) {
  Series carry(own_advantages.size(), 0.0);
  for (std::size_t t = 1; t < own_advantages.size(); ++t) {
    carry[t] = gamma * (carry[t - 1] + own_advantages[t - 1]);
  }
  return carry;
}

Series AlignAdvantages(std::span<const double> own_advantages,
                       std::span<const double> opponent_advantages,
                       double beta, double gamma, bool outer_gamma) {
  if (own_advantages.size() != opponent_advantages.size()) {
    throw InvalidArgument("advantage series have different lengths");
  }
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be non-negative");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw InvalidArgument("gamma must lie in (0, 1]");
  }
  const Series carry = ShapingCarry(own_advantages, gamma);
  const double scale = outer_gamma ? beta * gamma : beta;
  Series out(own_advantages.begin(), own_advantages.end());
  if (beta == 0.0) return out;
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] += opponent_advantages[t] * scale * carry[t];
  }
  return out;
}

}  // namespace socdil
