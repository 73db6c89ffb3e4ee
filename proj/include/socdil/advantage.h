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

#ifndef SOCDIL_ADVANTAGE_H_
#define SOCDIL_ADVANTAGE_H_

#include <span>
#include <vector>

namespace socdil {

using Series = std::vector<double>;

// Leave-one-out advantages for one seat of one CRN group.
// `group_returns[i][t]` is member i's return-to-go at time index t. Returns
// A[i][t] = G[i][t] - mean_{j != i} G[j][t]. The baseline compares members
// at equal time index even though their states diverge after the first
// differing action. Throws InvalidArgument for fewer than two members or
// ragged input.
std::vector<Series> LooAdvantages(std::span<const Series> group_returns);

// Opponent-shaping carry S_t = sum_{k<t} gamma^(t-k) A_k, computed by the
// recursion S_0 = 0, S_t = gamma * (S_{t-1} + A_{t-1}).
Series ShapingCarry(std::span<const double> own_advantages, double gamma);

// Advantage Alignment surrogate
//   Ã_t = A_self_t + beta * gamma * A_opp_t * S_t
// with S_t from ShapingCarry. `outer_gamma = false` drops the leading gamma
// factor (a convention switch for sensitivity checks). Indices are rounds.
Series AlignAdvantages(std::span<const double> own_advantages,
                       std::span<const double> opponent_advantages,
                       double beta, double gamma, bool outer_gamma = true);

}  // namespace socdil

#endif  // SOCDIL_ADVANTAGE_H_
