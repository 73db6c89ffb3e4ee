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


#include <array>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "socdil/environments.h"
#include "socdil/errors.h"

namespace socdil {
namespace {

// Direct reading of the split rule: proposals that fit are granted, an
// oversubscribed category is shared in proportion to the claims.
std::pair<double, double> SplitOracle(int q, int a, int b) {
  if (a + b <= q) return {static_cast<double>(a), static_cast<double>(b)};
  return {static_cast<double>(q) * a / (a + b),
          static_cast<double>(q) * b / (a + b)};
}

TEST_SUITE("environments") {

TEST_CASE("split rule matches the direct oracle on the full integer grid") {
  for (int a = 0; a <= 10; ++a) {
    for (int b = 0; b <= 10; ++b) {
      const auto [x, y] = SplitAllocation(10.0, a, b);
      const auto [ox, oy] = SplitOracle(10, a, b);
      CAPTURE(a);
      CAPTURE(b);
      CHECK(std::abs(x - ox) <= 1e-12);
      CHECK(std::abs(y - oy) <= 1e-12);
      CHECK(x + y <= 10.0 + 1e-12);
    }
  }
  CHECK(SplitAllocation(10, 10, 10) == std::pair{5.0, 5.0});
  CHECK(SplitAllocation(10, 3, 4) == std::pair{3.0, 4.0});
  CHECK(SplitAllocation(10, 0, 0) == std::pair{0.0, 0.0});
}

TEST_CASE("split rule rejects out-of-range proposals") {
  CHECK_THROWS_AS(SplitAllocation(10, -1, 0), InvalidArgument);
  CHECK_THROWS_AS(SplitAllocation(10, 0, 10.5), InvalidArgument);
  CHECK_THROWS_AS(SplitAllocation(10, NAN, 0), InvalidArgument);
}

TEST_CASE("twelve valid item value pairs, sampled uniformly") {
  std::set<std::pair<ItemValues, ItemValues>> valid;
  for (int ma = 0; ma < 8; ++ma) {
    for (int mb = 0; mb < 8; ++mb) {
      ItemValues a{}, b{};
      int sa = 0, sb = 0;
      for (int k = 0; k < 3; ++k) {
        a[k] = (ma >> k & 1) ? 10 : 1;
        b[k] = (mb >> k & 1) ? 10 : 1;
        sa += a[k];
        sb += b[k];
      }
      const bool oracle = sa == sb && a != b;
      CHECK(IsValidItemValuePair(a, b) == oracle);
      if (oracle) valid.insert({a, b});
    }
  }
  CHECK(valid.size() == 12);

  std::map<std::pair<ItemValues, ItemValues>, int> counts;
  Rng rng(3);
  const int n = 120000;
  for (int i = 0; i < n; ++i) {
    const ItemValuePair p = SampleItemValues(rng);
    REQUIRE(valid.count({p.first, p.second}) == 1);
    ++counts[{p.first, p.second}];
  }
  CHECK(counts.size() == 12);
  for (const auto& [pair, c] : counts) CHECK(std::abs(c - n / 12) < 500);
}

TEST_CASE("prisoner's dilemma payoffs") {
  using A = IpdAction;
  CHECK(IpdPayoff(A::kCooperate, A::kCooperate) == std::pair{3.0, 3.0});
  CHECK(IpdPayoff(A::kCooperate, A::kDefect) == std::pair{0.0, 5.0});
  CHECK(IpdPayoff(A::kDefect, A::kCooperate) == std::pair{5.0, 0.0});
  CHECK(IpdPayoff(A::kDefect, A::kDefect) == std::pair{1.0, 1.0});
}

TEST_CASE("split round scoring") {
  SplitRound r;
  r.values = {ItemValues{10, 1, 1}, ItemValues{1, 10, 1}};
  SUBCASE("cooperative proposals") {
    r.proposals = {CategoryAmounts{10, 0, 5}, CategoryAmounts{0, 10, 5}};
    ScoreSplitRound(r);
    CHECK(r.payoffs[0] == 105.0);
    CHECK(r.payoffs[1] == 105.0);
  }
  SUBCASE("mutual claims") {
    r.proposals = {CategoryAmounts{10, 10, 10}, CategoryAmounts{10, 10, 10}};
    ScoreSplitRound(r);
    CHECK(r.payoffs[0] == 60.0);
    CHECK(r.payoffs[1] == 60.0);
  }
  SUBCASE("one claims everything against a cooperator") {
    r.proposals = {CategoryAmounts{10, 10, 10}, CategoryAmounts{0, 10, 5}};
    ScoreSplitRound(r);
    // Category 2: 10 vs 10 -> 5 each; category 3: 10 vs 5 -> 20/3, 10/3.
    CHECK(r.payoffs[0] == doctest::Approx(100 + 5 + 20.0 / 3).epsilon(1e-12));
    CHECK(r.payoffs[1] == doctest::Approx(50 + 10.0 / 3).epsilon(1e-12));
  }
}

TEST_CASE("trust-and-split scoring values coins by hand") {
  TasRound r;
  r.hands = {Hand::kRock, Hand::kScissors};
  r.upper_seat = 0;
  r.proposals = {10, 0};
  ScoreTasRound(r);
  CHECK(r.payoffs[0] == 100.0);
  CHECK(r.payoffs[1] == 0.0);
  r.proposals = {10, 10};
  ScoreTasRound(r);
  CHECK(r.payoffs[0] + r.payoffs[1] == 55.0);
  r.proposals = {0, 10};
  ScoreTasRound(r);
  CHECK(r.payoffs[1] == 10.0);
}

TEST_CASE("rock-paper-scissors dominance and hand sampling") {
  CHECK(Beats(Hand::kRock, Hand::kScissors));
  CHECK(Beats(Hand::kScissors, Hand::kPaper));
  CHECK(Beats(Hand::kPaper, Hand::kRock));
  CHECK_FALSE(Beats(Hand::kRock, Hand::kPaper));
  CHECK_FALSE(Beats(Hand::kRock, Hand::kRock));
  Rng rng(11);
  std::map<std::pair<int, int>, int> counts;
  for (int i = 0; i < 60000; ++i) {
    const HandDeal d = SampleHands(rng);
    REQUIRE(d.hands[0] != d.hands[1]);
    REQUIRE(Beats(d.hands[d.upper_seat], d.hands[1 - d.upper_seat]));
    ++counts[{static_cast<int>(d.hands[0]), static_cast<int>(d.hands[1])}];
  }
  CHECK(counts.size() == 6);
  for (const auto& [k, c] : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("key names round-trip for every key") {
  for (EnvId env : {EnvId::kIpd, EnvId::kSplitNoComm, EnvId::kTrustAndSplit}) {
    const ObsSpace space(env);
    for (int i = 0; i < space.KeyCount(); ++i) {
      const ObsKey key{static_cast<std::uint32_t>(i)};
      const auto parsed = space.ParseKey(space.KeyName(key));
      REQUIRE(parsed.has_value());
      CHECK(*parsed == key);
      CHECK(space.ActionCount(key) >= 2);
    }
  }
  CHECK(ObsSpace(EnvId::kIpd).KeyCount() == 5);
  CHECK(ObsSpace(EnvId::kSplitNoComm).KeyCount() == 27 * 3);
  CHECK(ObsSpace(EnvId::kTrustAndSplit).KeyCount() ==
        kTasMessageKeys + kTasProposalKeys);
}

TEST_CASE("ipd encoding sees own move then the opponent's") {
  const ObsSpace space(EnvId::kIpd, ObsConfig{2, true, 5.0, 5.0, false});
  std::vector<IpdRound> history(2);
  history[0].actions = {IpdAction::kDefect, IpdAction::kCooperate};
  history[1].actions = {IpdAction::kCooperate, IpdAction::kCooperate};
  const IpdKeyView seat0 = space.DecodeIpd(space.EncodeIpd(history, 0));
  REQUIRE(seat0.recent.size() == 2);
  CHECK(seat0.recent[0] ==
        std::pair{IpdAction::kCooperate, IpdAction::kCooperate});
  CHECK(seat0.recent[1] == std::pair{IpdAction::kDefect, IpdAction::kCooperate});
  CHECK_FALSE(seat0.opponent_ever_defected);
  const IpdKeyView seat1 = space.DecodeIpd(space.EncodeIpd(history, 1));
  CHECK(seat1.recent[1] == std::pair{IpdAction::kCooperate, IpdAction::kDefect});
  CHECK(seat1.opponent_ever_defected);
  const IpdKeyView start = space.DecodeIpd(space.EncodeIpd({}, 0));
  CHECK_FALSE(start.recent[0].has_value());
}

TEST_CASE("split labels and relations") {
  const ObsSpace space(EnvId::kSplitNoComm);
  SplitRound prev;
  prev.values = {ItemValues{10, 1, 1}, ItemValues{1, 10, 1}};
  prev.proposals = {CategoryAmounts{10, 0, 5}, CategoryAmounts{5, 10, 5}};
  // Seat 1 took 5 of category 1 (worth 10 to seat 0): not above 5.
  CHECK(space.SplitLabel(prev, 0) == OpponentLabel::kCoop);
  prev.proposals[1][0] = 10;
  CHECK(space.SplitLabel(prev, 0) == OpponentLabel::kGreedy);
  // Claims on a category both value 1 are never greedy.
  prev.proposals[1] = {0, 10, 10};
  CHECK(space.SplitLabel(prev, 0) == OpponentLabel::kCoop);

  SplitRound current;
  current.values = {ItemValues{1, 10, 1}, ItemValues{10, 1, 1}};
  std::vector<SplitRound> history{prev};
  const SplitKeyView v = space.DecodeSplit(space.EncodeSplit(current, history, 0));
  CHECK(v.relations[0] == CategoryRelation::kMineLower);
  CHECK(v.relations[1] == CategoryRelation::kMineHigher);
  CHECK(v.relations[2] == CategoryRelation::kEqual);
  CHECK(v.label == OpponentLabel::kCoop);
  CHECK(space.DecodeSplit(space.EncodeSplit(current, {}, 0)).label ==
        OpponentLabel::kNone);
}

TEST_CASE("split action grid round-trip") {
  const ObsSpace space(EnvId::kSplitNoComm);
  for (int a = 0; a < 27; ++a) {
    const CategoryAmounts p = space.SplitProposal(a);
    std::array<int, 3> idx{};
    for (int k = 0; k < 3; ++k) idx[k] = static_cast<int>(p[k] / 5.0);
    CHECK(space.SplitAction(idx) == a);
  }
}

TEST_CASE("trust-and-split labels") {
  TasRound prev;
  prev.hands = {Hand::kPaper, Hand::kRock};
  prev.upper_seat = 0;
  prev.messages = {Message::kSayPaper, Message::kSayRock};
  prev.proposals = {10, 5};
  const ObsSpace standard(EnvId::kTrustAndSplit);
  CHECK(standard.TasLabel(prev, 0) == OpponentLabel::kGreedy);
  CHECK(standard.TasLabel(prev, 1) == OpponentLabel::kCoop);
  prev.proposals[1] = 4;
  CHECK(standard.TasLabel(prev, 0) == OpponentLabel::kCoop);

  ObsConfig excuse;
  excuse.tas_greedy_threshold = 3.0;
  excuse.tas_excuse_after_own_lie = true;
  const ObsSpace lenient(EnvId::kTrustAndSplit, excuse);
  CHECK(lenient.TasLabel(prev, 0) == OpponentLabel::kGreedy);
  prev.messages[0] = Message::kSilent;
  CHECK(lenient.TasLabel(prev, 0) == OpponentLabel::kCoop);
  CHECK(standard.TasLabel(prev, 0) == OpponentLabel::kCoop);
}

TEST_CASE("trust-and-split phase ordering is enforced") {
  const ObsSpace space(EnvId::kTrustAndSplit);
  TasRound r;
  r.hands = {Hand::kRock, Hand::kPaper};
  r.upper_seat = 1;
  r.first_speaker = 0;
  const ObsKey first = space.EncodeTas(r, Phase::kMessage, {}, 0);
  const TasKeyView v = space.DecodeTas(first);
  CHECK(v.phase == Phase::kMessage);
  CHECK(v.speaks_first);
  CHECK_FALSE(v.opponent.has_value());
  CHECK_THROWS_AS(space.EncodeTas(r, Phase::kMessage, {}, 1), InternalError);
  CHECK_THROWS_AS(space.EncodeTas(r, Phase::kProposal, {}, 0), InternalError);
  r.messages[0] = Message::kSayRock;
  const TasKeyView second =
      space.DecodeTas(space.EncodeTas(r, Phase::kMessage, {}, 1));
  CHECK(second.hand == Hand::kPaper);
  CHECK(second.opponent == Message::kSayRock);
  r.messages[1] = Message::kSilent;
  const TasKeyView prop =
      space.DecodeTas(space.EncodeTas(r, Phase::kProposal, {}, 0));
  CHECK(prop.phase == Phase::kProposal);
  CHECK(prop.opponent == Message::kSilent);
}

TEST_CASE("environment names") {
  CHECK(ParseEnvId("ipd") == EnvId::kIpd);
  CHECK(ParseEnvId("tas") == EnvId::kTrustAndSplit);
  CHECK(ParseEnvId(EnvName(EnvId::kSplitNoComm)) == EnvId::kSplitNoComm);
  CHECK_THROWS_AS(ParseEnvId("chess"), ConfigError);
}

}  // TEST_SUITE

}  // namespace
}  // namespace socdil
