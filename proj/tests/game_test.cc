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


#include <set>
#include <vector>

#include "doctest.h"
#include "socdil/errors.h"
#include "socdil/game.h"

namespace socdil {
namespace {

TEST_SUITE("game") {

TEST_CASE("discounted returns by hand") {
  const auto g = DiscountedReturns({1.0, 1.0, 1.0}, 0.9, 1.0);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == doctest::Approx(2.71).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(1.9).epsilon(1e-15));
  CHECK(g[2] == 1.0);
  const auto scaled = DiscountedReturns({5.0, 0.0}, 0.5, 5.0);
  CHECK(scaled[0] == 1.0);
  CHECK(scaled[1] == 0.0);
}

TEST_CASE("crn batches share environment seeds within groups only") {
  const auto specs = MakeCrnBatch(EnvId::kSplitNoComm, 10, 64, 8, 99);
  REQUIRE(specs.size() == 64);
  std::set<std::uint64_t> env_seeds, action_seeds;
  for (int g = 0; g < 8; ++g) {
    for (int i = 0; i < 8; ++i) {
      const EpisodeSpec& s = specs[g * 8 + i];
      CHECK(s.crn_group == g);
      CHECK(s.env_seed == specs[g * 8].env_seed);
      action_seeds.insert(s.action_seeds[0]);
      action_seeds.insert(s.action_seeds[1]);
    }
    env_seeds.insert(specs[g * 8].env_seed);
  }
  CHECK(env_seeds.size() == 8);
  CHECK(action_seeds.size() == 128);
  CHECK(MakeCrnBatch(EnvId::kSplitNoComm, 10, 64, 8, 99) == specs);
  CHECK_THROWS_AS(MakeCrnBatch(EnvId::kIpd, 10, 64, 6, 1), InvalidArgument);
  CHECK_THROWS_AS(MakeCrnBatch(EnvId::kIpd, 10, 8, 1, 1), InvalidArgument);
}

TEST_CASE("episodes are deterministic given the spec") {
  for (EnvId env : {EnvId::kIpd, EnvId::kSplitNoComm, EnvId::kTrustAndSplit}) {
    const PolicyHandle p = MakeUniformPolicy(ObsSpace(env));
    const auto specs = MakeCrnBatch(env, 10, 16, 8, 5);
    for (const EpisodeSpec& spec : specs) {
      const Trajectory a = RunEpisode(spec, *p, *p);
      const Trajectory b = RunEpisode(spec, *p, *p);
      CHECK(a.steps == b.steps);
      CHECK(a.length() == 10 * StepsPerRound(env));
    }
  }
}

TEST_CASE("crn members see the same environment draws") {
  const PolicyHandle p = MakeUniformPolicy(ObsSpace(EnvId::kTrustAndSplit));
  const auto specs = MakeCrnBatch(EnvId::kTrustAndSplit, 10, 8, 8, 17);
  const Trajectory first = RunEpisode(specs[0], *p, *p);
  const auto& r0 = std::get<std::vector<TasRound>>(first.rounds);
  bool actions_differ = false;
  for (int i = 1; i < 8; ++i) {
    const Trajectory t = RunEpisode(specs[i], *p, *p);
    const auto& r = std::get<std::vector<TasRound>>(t.rounds);
    for (int k = 0; k < 10; ++k) {
      CHECK(r[k].hands == r0[k].hands);
      CHECK(r[k].first_speaker == r0[k].first_speaker);
    }
    actions_differ |= t.steps != first.steps;
  }
  CHECK(actions_differ);
}

TEST_CASE("deterministic policies give identical crn members") {
  const PolicyHandle d = MakeBuiltinPolicy(BuiltinName::kAlwaysDefect,
                                           EnvId::kSplitNoComm);
  const PolicyHandle c = MakeBuiltinPolicy(BuiltinName::kAlwaysCoop,
                                           EnvId::kSplitNoComm);
  const auto specs = MakeCrnBatch(EnvId::kSplitNoComm, 10, 8, 8, 3);
  const Trajectory first = RunEpisode(specs[0], *c, *d);
  for (const EpisodeSpec& s : specs) {
    CHECK(RunEpisode(s, *c, *d).steps == first.steps);
  }
}

TEST_CASE("step rewards agree with the round log") {
  const PolicyHandle p = MakeUniformPolicy(ObsSpace(EnvId::kTrustAndSplit));
  const auto specs = MakeCrnBatch(EnvId::kTrustAndSplit, 10, 16, 8, 23);
  for (const EpisodeSpec& spec : specs) {
    const Trajectory t = RunEpisode(spec, *p, *p);
    const auto& rounds = std::get<std::vector<TasRound>>(t.rounds);
    for (int seat = 0; seat < 2; ++seat) {
      const auto rr = t.RoundRewards(seat);
      for (int r = 0; r < 10; ++r) {
        CHECK(rr[r] == rounds[r].payoffs[seat]);
        CHECK(t.steps[seat][2 * r].reward == 0.0);
        CHECK(t.steps[seat][2 * r].phase == Phase::kMessage);
        CHECK(t.steps[seat][2 * r + 1].phase == Phase::kProposal);
      }
    }
    for (int r = 0; r < 10; ++r) {
      const double collective = rounds[r].payoffs[0] + rounds[r].payoffs[1];
      CHECK(collective <= 100.0 + 1e-12);
      CHECK(collective >= 10.0 * (rounds[r].allocations[0] +
                                  rounds[r].allocations[1]) * 0.1 - 1e-12);
    }
  }
}

TEST_CASE("returns-to-go are per round") {
  const PolicyHandle p = MakeUniformPolicy(ObsSpace(EnvId::kTrustAndSplit));
  const auto spec = MakeCrnBatch(EnvId::kTrustAndSplit, 4, 2, 2, 8)[0];
  const Trajectory t = RunEpisode(spec, *p, *p);
  const ReturnSeries rs = ReturnsToGo(t, 0.5, 10.0);
  for (int seat = 0; seat < 2; ++seat) {
    const auto oracle = DiscountedReturns(t.RoundRewards(seat), 0.5, 10.0);
    CHECK(rs.by_round[seat] == oracle);
    REQUIRE(rs.by_step[seat].size() == 8);
    for (int s = 0; s < 8; ++s) CHECK(rs.by_step[seat][s] == oracle[s / 2]);
  }
}

TEST_CASE("policies of another environment are rejected") {
  const PolicyHandle ipd = MakeUniformPolicy(ObsSpace(EnvId::kIpd));
  const PolicyHandle split = MakeUniformPolicy(ObsSpace(EnvId::kSplitNoComm));
  const auto spec = MakeCrnBatch(EnvId::kIpd, 10, 2, 2, 0)[0];
  CHECK_THROWS_AS(RunEpisode(spec, *ipd, *split), ConfigError);
}

TEST_CASE("parallel loops cover every index once") {
  for (int threads : {0, 1, 3, 8}) {
    std::vector<int> hits(101, 0);
    ParallelFor(101, threads, [&](int i) { ++hits[i]; });
    for (int h : hits) CHECK(h == 1);
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace socdil
