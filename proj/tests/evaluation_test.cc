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
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "scripted.h"
#include "socdil/errors.h"
#include "socdil/evaluation.h"

namespace socdil {
namespace {

// Independent IPD simulation of the four hardcoded strategies. A strategy
// maps (own moves, opponent moves) to the next move; true = defect.
using Strategy = std::function<bool(const std::vector<bool>&,
                                    const std::vector<bool>&)>;

std::pair<double, double> IpdOracle(const Strategy& a, const Strategy& b,
                                    int rounds) {
  const double payoff[2][2][2] = {{{3, 3}, {0, 5}}, {{5, 0}, {1, 1}}};
  std::vector<bool> ha, hb;
  double ra = 0.0, rb = 0.0;
  for (int r = 0; r < rounds; ++r) {
    const bool da = a(ha, hb);
    const bool db = b(hb, ha);
    ra += payoff[da][db][0];
    rb += payoff[da][db][1];
    ha.push_back(da);
    hb.push_back(db);
  }
  return {ra / rounds, rb / rounds};
}

// Scripted Split grim trigger: cooperates until the opponent has once been
// greedy, then claims everything.
class SplitGrim final : public Policy {
 public:
  const ObsSpace& space() const override { return space_; }
  std::string name() const override { return "SCRIPT_GRIM"; }
  void ActionProbs(const DecisionPoint& point, ObsKey,
                   std::span<double> probs) const override {
    std::fill(probs.begin(), probs.end(), 0.0);
    bool triggered = false;
    for (const SplitRound& r : point.split_history) {
      triggered |= space_.SplitLabel(r, point.seat) == OpponentLabel::kGreedy;
    }
    std::array<int, kNumCategories> idx{2, 2, 2};
    if (!triggered) {
      const SplitRound& cur = *point.split_current;
      for (int k = 0; k < kNumCategories; ++k) {
        const int mine = cur.values[point.seat][k];
        const int other = cur.values[1 - point.seat][k];
        idx[k] = mine > other ? 2 : mine == other ? 1 : 0;
      }
    }
    probs[space_.SplitAction(idx)] = 1.0;
  }

 private:
  ObsSpace space_{EnvId::kSplitNoComm};
};

TEST_SUITE("evaluation") {

TEST_CASE("ipd builtin cross-play is exact") {
  const Strategy coop = [](auto&, auto&) { return false; };
  const Strategy defect = [](auto&, auto&) { return true; };
  const Strategy tft = [](auto&, const std::vector<bool>& opp) {
    return !opp.empty() && opp.back();
  };
  const Strategy grim = [](auto&, const std::vector<bool>& opp) {
    for (bool d : opp) {
      if (d) return true;
    }
    return false;
  };
  const std::vector<Strategy> oracle = {coop, defect, tft, grim};
  const std::vector<PolicyHandle> roster = {
      MakeBuiltinPolicy(BuiltinName::kAlwaysCoop, EnvId::kIpd),
      MakeBuiltinPolicy(BuiltinName::kAlwaysDefect, EnvId::kIpd),
      MakeBuiltinPolicy(BuiltinName::kTitForTat, EnvId::kIpd),
      MakeBuiltinPolicy(BuiltinName::kGrim, EnvId::kIpd)};
  const CrossPlayReport report = CrossPlay(roster, EnvId::kIpd, 100, 10, 1);
  REQUIRE(report.pairs.size() == 16);
  std::set<std::uint64_t> seeds;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const PairResult& p = report.at(r, c);
      const auto [a, b] = IpdOracle(oracle[r], oracle[c], 10);
      CAPTURE(r);
      CAPTURE(c);
      CHECK(p.mean[0] == a);
      CHECK(p.mean[1] == b);
      CHECK(p.stderr_[0] == 0.0);
      CHECK(p.stderr_[1] == 0.0);
      CHECK(p.n_games == 100);
      for (std::uint64_t s : p.env_seeds) seeds.insert(s);
    }
  }
  // Disjoint seeds across pairs.
  CHECK(seeds.size() == 1600);
  // Round 1 pays (0, 5), rounds 2-10 pay (1, 1): (0 + 9) / 10 and (5 + 9) / 10.
  CHECK(report.at(2, 1).mean == std::array{0.9, 1.4});
  CHECK(report.at(1, 1).mean == std::array{1.0, 1.0});
  CHECK(report.at(0, 1).mean == std::array{0.0, 5.0});
}

TEST_CASE("cross-play is reproducible and thread independent") {
  const ObsSpace space(EnvId::kTrustAndSplit);
  const std::vector<PolicyHandle> roster = {
      MakeUniformPolicy(space), testing::MakeTruthfulCooperator()};
  const CrossPlayReport a =
      CrossPlay(roster, EnvId::kTrustAndSplit, 64, 10, 5, 1, true);
  const CrossPlayReport b =
      CrossPlay(roster, EnvId::kTrustAndSplit, 64, 10, 5, 4, true);
  CHECK(ToJson(a).dump() == ToJson(b).dump());
  std::ostringstream ma, mb;
  WriteCrossPlayPairsCsv(a, ma);
  WriteCrossPlayPairsCsv(b, mb);
  CHECK(ma.str() == mb.str());
  REQUIRE(a.at(0, 1).per_round.size() == 10);
  for (const PairResult& p : a.pairs) {
    CHECK(p.mean[0] + p.mean[1] <= 100.0 + 1e-9);
  }
  CHECK(a.at(1, 1).mean[0] + a.at(1, 1).mean[1] == doctest::Approx(100.0));
}

TEST_CASE("cross-play argument errors") {
  const std::vector<PolicyHandle> ipd = {
      MakeBuiltinPolicy(BuiltinName::kAlwaysCoop, EnvId::kIpd)};
  CHECK_THROWS_AS(CrossPlay(ipd, EnvId::kIpd, 0, 10, 0), ConfigError);
  CHECK_THROWS_AS(CrossPlay(ipd, EnvId::kSplitNoComm, 10, 10, 0), ConfigError);
  CHECK_THROWS_AS(CrossPlay({}, EnvId::kIpd, 10, 10, 0), ConfigError);
}

TEST_CASE("reciprocity probe on the baselines") {
  const auto tft = MakeBuiltinPolicy(BuiltinName::kTitForTat, EnvId::kIpd);
  const ReciprocityStats t = ReciprocityProbeIpd(*tft, 200, 3);
  CHECK(t.defect_after_defect == 1.0);
  CHECK(t.coop_after_coop == 1.0);
  CHECK(t.first_round_coop == 1.0);
  CHECK(t.after_coop_count + t.after_defect_count == 200 * 9);
  const auto ad = MakeBuiltinPolicy(BuiltinName::kAlwaysDefect, EnvId::kIpd);
  const ReciprocityStats d = ReciprocityProbeIpd(*ad, 200, 3);
  CHECK(d.defect_after_defect == 1.0);
  CHECK(d.coop_after_coop == 0.0);
  CHECK(d.first_round_coop == 0.0);
  // The random opponent cooperates about half the time.
  CHECK(std::abs(d.after_coop_count - 900) < 120);
}

TEST_CASE("grim probe") {
  const auto coop = MakeBuiltinPolicy(BuiltinName::kAlwaysCoop, EnvId::kSplitNoComm);
  const GrimStats c = GrimProbeSplit(*coop, 100, 2);
  REQUIRE(c.greedy_rate.size() == 10);
  for (double g : c.greedy_rate) CHECK(g == 0.0);
  const auto defect =
      MakeBuiltinPolicy(BuiltinName::kAlwaysDefect, EnvId::kSplitNoComm);
  const GrimStats d = GrimProbeSplit(*defect, 100, 2);
  for (double g : d.greedy_rate) CHECK(g == 1.0);
  const SplitGrim grim;
  const GrimStats g = GrimProbeSplit(grim, 100, 2);
  CHECK(g.before == 0.0);
  CHECK(g.after == 1.0);
  for (int r = 0; r < 10; ++r) CHECK(g.greedy_rate[r] == (r > 2 ? 1.0 : 0.0));
  CHECK_THROWS_AS(GrimProbeSplit(grim, 10, 2, 10, 9), InvalidArgument);
}

TEST_CASE("trust-and-split behavior of scripted policies") {
  const auto truthful = testing::MakeTruthfulCooperator();
  const TasBehaviorStats t = TasBehaviorProbe(*truthful, 100, 4);
  CHECK(t.proposal_upper == 10.0);
  CHECK(t.proposal_lower == 0.0);
  CHECK(t.honesty == 1.0);
  CHECK(t.collective == 100.0);
  const auto greedy = testing::MakeTruthfulCooperator(true);
  const TasBehaviorStats g = TasBehaviorProbe(*greedy, 100, 4);
  CHECK(g.proposal_lower == 10.0);
  CHECK(g.collective == 55.0);
}

TEST_CASE("split efficiency of the baselines") {
  const auto coop = MakeBuiltinPolicy(BuiltinName::kAlwaysCoop, EnvId::kSplitNoComm);
  const SplitEfficiency c = SplitEfficiencyProbe(*coop, 200, 8);
  CHECK(c.efficiency == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.raw_ratio == doctest::Approx(1.0).epsilon(1e-12));
  // One 10-valued category each: 2 * 100 + 2 * 5 = 210. Two each:
  // 200 + 200 + 5 + 5 = 410.
  CHECK(c.full_coop > 210.0 - 1e-9);
  CHECK(c.full_coop < 410.0 + 1e-9);
  const auto defect =
      MakeBuiltinPolicy(BuiltinName::kAlwaysDefect, EnvId::kSplitNoComm);
  const SplitEfficiency d = SplitEfficiencyProbe(*defect, 200, 8);
  CHECK(d.efficiency == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d.self_play == doctest::Approx(d.mutual_defection));
  CHECK(d.full_coop == c.full_coop);
}

TEST_CASE("exploitability of the ipd baselines") {
  ExploitConfig config;
  config.learner = DefaultTrainConfig(EnvId::kIpd, Algorithm::kGrpo);
  config.learner.steps = 400;
  config.eval_games = 128;
  const ExploitabilityReport coop = ExploitabilityReportFor(
      MakeBuiltinPolicy(BuiltinName::kAlwaysCoop, EnvId::kIpd), config);
  CHECK(coop.self_play_level == 3.0);
  CHECK(coop.verdict() == "EXPLOITABLE");
  CHECK(coop.runs.size() == 3);
  for (const ExploitRun& run : coop.runs) {
    CHECK(run.frozen_final < 0.5);
    CHECK(run.frozen_curve.size() == 400);
  }
  const ExploitabilityReport tft = ExploitabilityReportFor(
      MakeBuiltinPolicy(BuiltinName::kTitForTat, EnvId::kIpd), config);
  CHECK(tft.verdict() == "NOT EXPLOITABLE");
  const nlohmann::json j = ToJson(tft);
  CHECK(j["verdict"] == "NOT EXPLOITABLE");
  CHECK(j["runs"].size() == 3);

  config.learner_seeds = {1, 2};
  CHECK_THROWS_AS(
      ExploitabilityReportFor(
          MakeBuiltinPolicy(BuiltinName::kAlwaysCoop, EnvId::kIpd), config),
      ConfigError);
}

TEST_CASE("transcripts carry one line per decision") {
  const auto a = testing::MakeTruthfulCooperator();
  const auto b = MakeUniformPolicy(ObsSpace(EnvId::kTrustAndSplit));
  const Trajectory t =
      RunEpisode(EvaluationEpisode(EnvId::kTrustAndSplit, 10, 1, 0), *a, *b);
  std::stringstream out;
  WriteTranscript(t, {&a->space(), &b->space()}, 0, out);
  std::string line;
  int lines = 0;
  double reward = 0.0;
  while (std::getline(out, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key :
         {"game", "round", "phase", "seat", "key", "action", "reward"}) {
      CHECK(j.contains(key));
    }
    reward += j["reward"].get<double>();
    ++lines;
  }
  CHECK(lines == 40);
  double expected = 0.0;
  for (int s = 0; s < 2; ++s) {
    for (double r : t.RoundRewards(s)) expected += r;
  }
  CHECK(reward == doctest::Approx(expected));
}

TEST_CASE("training probes report per environment") {
  TrainConfig c = DefaultTrainConfig(EnvId::kTrustAndSplit, Algorithm::kGrpo);
  c.eval_games = 16;
  const auto probe = TrainingProbes(c);
  const auto records = probe(4, InitialParams(c));
  REQUIRE(records.size() == 4);
  CHECK(records[2].name == "honesty");
  CHECK(records[2].step == 4);
  CHECK(records[2].value > 0.9);  // the honest-message prior
  CHECK(probe(4, InitialParams(c))[3].value == records[3].value);
}

}  // TEST_SUITE

}  // namespace
}  // namespace socdil
