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


#include <cmath>
#include <vector>

#include "doctest.h"
#include "socdil/advantage.h"
#include "socdil/errors.h"
#include "socdil/rng.h"

namespace socdil {
namespace {

TEST_SUITE("advantage") {

TEST_CASE("leave-one-out by hand") {
  const std::vector<Series> g = {{3.0}, {1.0}, {2.0}};
  const auto a = LooAdvantages(g);
  CHECK(a[0][0] == 1.5);
  CHECK(a[1][0] == -1.5);
  CHECK(a[2][0] == 0.0);
}

TEST_CASE("leave-one-out advantages sum to zero") {
  Rng rng(77);
  for (int c = 0; c < 1000; ++c) {
    const int k = 2 + rng.UniformInt(15);
    const int t = 1 + rng.UniformInt(20);
    std::vector<Series> g(k, Series(t));
    for (auto& s : g) {
      for (double& x : s) x = 200.0 * rng.Uniform() - 100.0;
    }
    const auto a = LooAdvantages(g);
    for (int j = 0; j < t; ++j) {
      double sum = 0.0;
      for (int i = 0; i < k; ++i) sum += a[i][j];
      CHECK(std::abs(sum) <= 1e-10);
    }
  }
}

TEST_CASE("equal returns give zero advantages") {
  const std::vector<Series> g(8, Series{2.5, 1.0, -3.0});
  for (const Series& a : LooAdvantages(g)) {
    for (double x : a) CHECK(x == 0.0);
  }
}

TEST_CASE("leave-one-out input checks") {
  CHECK_THROWS_AS(LooAdvantages(std::vector<Series>{{1.0}}), InvalidArgument);
  CHECK_THROWS_AS(LooAdvantages(std::vector<Series>{{1.0}, {1.0, 2.0}}),
                  InvalidArgument);
}

TEST_CASE("aligned advantages by hand") {
  // S_1 = 0.9, so the second entry is 2 + 1 * 0.9 * 0.5 * 0.9.
  const Series example = AlignAdvantages(Series{1.0, 2.0}, Series{0.5, 0.5},
                                         1.0, 0.9);
  CHECK(example[0] == 1.0);
  CHECK(example[1] == doctest::Approx(2.405).epsilon(1e-15));

  // S = [0, 0.9]; A~ = [1 + 0, 1 + 0.5 * 0.9 * 2 * 0.9].
  const Series own = {1.0, 1.0};
  const Series opp = {1.0, 2.0};
  const Series out = AlignAdvantages(own, opp, 0.5, 0.9);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == doctest::Approx(1.81).epsilon(1e-15));
  const Series raw = AlignAdvantages(own, opp, 0.5, 0.9, false);
  CHECK(raw[1] == doctest::Approx(1.9).epsilon(1e-15));
  const Series carry = ShapingCarry(Series{1.0, 1.0}, 0.9);
  CHECK(carry[0] == 0.0);
  CHECK(carry[1] == doctest::Approx(0.9));
}

TEST_CASE("shaping carry recursion equals the explicit sum") {
  Rng rng(3);
  for (int c = 0; c < 200; ++c) {
    const int t = 1 + rng.UniformInt(30);
    const double gamma = rng.Uniform();
    Series a(t);
    for (double& x : a) x = 2.0 * rng.Uniform() - 1.0;
    const Series s = ShapingCarry(a, gamma);
    for (int j = 0; j < t; ++j) {
      double direct = 0.0;
      for (int k = 0; k < j; ++k) direct += std::pow(gamma, j - k) * a[k];
      CHECK(s[j] == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta zero leaves advantages unchanged") {
  const Series own = {0.3, -1.2, 4.0};
  const Series opp = {5.0, 6.0, -7.0};
  CHECK(AlignAdvantages(own, opp, 0.0, 0.96) == own);
}

TEST_CASE("aligned advantages reject mismatched lengths") {
  CHECK_THROWS_AS(AlignAdvantages(Series{1.0}, Series{1.0, 2.0}, 1.0, 0.9),
                  InvalidArgument);
}

}  // TEST_SUITE

}  // namespace
}  // namespace socdil
