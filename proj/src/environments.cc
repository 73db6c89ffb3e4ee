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

#include "socdil/environments.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "socdil/errors.h"

namespace socdil {

namespace {

constexpr int kIpdSlotValues = 5;  // empty, CC, CD, DC, DD
constexpr int kLabels = 3;
constexpr int kTasAbsent = kNumMessages;

std::string_view LabelName(OpponentLabel label) {
  switch (label) {
    case OpponentLabel::kNone:
      return "NONE";
    case OpponentLabel::kCoop:
      return "COOP";
    case OpponentLabel::kGreedy:
      return "GREEDY";
  }
  return "?";
}

int IntPow(int base, int exp) {
  int out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

void CheckLevels(const std::vector<double>& levels, const char* what) {
  if (levels.empty()) {
    throw ConfigError(std::string(what) + ": proposal grid is empty");
  }
  for (double level : levels) {
    if (!(level >= 0.0 && level <= kItemQuantity)) {
      throw ConfigError(std::string(what) +
                        ": proposal levels must lie in [0, 10]");
    }
  }
}

}  // namespace

std::string_view EnvName(EnvId env) {
  switch (env) {
    case EnvId::kIpd:
      return "ipd";
    case EnvId::kSplitNoComm:
      return "split_nocomm";
    case EnvId::kTrustAndSplit:
      return "trust_and_split";
  }
  return "?";
}

EnvId ParseEnvId(std::string_view name) {
  if (name == "ipd" || name == "IPD") return EnvId::kIpd;
  if (name == "split_nocomm" || name == "SplitNoComm" || name == "split") {
    return EnvId::kSplitNoComm;
  }
  if (name == "trust_and_split" || name == "TrustAndSplit" || name == "tas") {
    return EnvId::kTrustAndSplit;
  }
  throw ConfigError("unknown environment '" + std::string(name) +
                    "' (valid: ipd, split_nocomm, trust_and_split)");
}

std::pair<double, double> IpdPayoff(IpdAction first, IpdAction second) {
  static constexpr double kTable[2][2][2] = {
      {{3.0, 3.0}, {0.0, 5.0}},
      {{5.0, 0.0}, {1.0, 1.0}},
  };
  const auto& cell =
      kTable[static_cast<int>(first)][static_cast<int>(second)];
  return {cell[0], cell[1]};
}

std::pair<double, double> SplitAllocation(double quantity, double p_a,
                                          double p_b) {
  if (!(quantity > 0.0) || !std::isfinite(quantity)) {
    throw InvalidArgument("split allocation: quantity must be positive");
  }
  if (!(p_a >= 0.0 && p_a <= quantity) || !(p_b >= 0.0 && p_b <= quantity)) {
    std::ostringstream msg;
    msg << "invalid proposal (" << p_a << ", " << p_b << ") for quantity "
        << quantity;
    throw InvalidArgument(msg.str());
  }
  const double denom = std::max(quantity, p_a + p_b);
  return {quantity * p_a / denom, quantity * p_b / denom};
}

bool IsValidItemValuePair(const ItemValues& a, const ItemValues& b) {
  int sum_a = 0;
  int sum_b = 0;
  for (int k = 0; k < kNumCategories; ++k) {
    if ((a[k] != 1 && a[k] != 10) || (b[k] != 1 && b[k] != 10)) return false;
    sum_a += a[k];
    sum_b += b[k];
  }
  return sum_a == sum_b && a != b;
}

ItemValuePair SampleItemValues(Rng& env_rng) {
  const int tens = 1 + env_rng.UniformInt(2);
  // A size-1 subset is named by its member, a size-2 subset by the category
  // it leaves out; either way three subsets, indexed 0..2.
  const int first = env_rng.UniformInt(kNumCategories);
  const int second = (first + 1 + env_rng.UniformInt(2)) % kNumCategories;
  auto build = [tens](int subset) {
    ItemValues values{};
    for (int k = 0; k < kNumCategories; ++k) {
      const bool in_subset = (k == subset);
      values[k] = (tens == 1) == in_subset ? 10 : 1;
    }
    return values;
  };
  return {build(first), build(second)};
}

std::string_view HandName(Hand hand) {
  switch (hand) {
    case Hand::kRock:
      return "rock";
    case Hand::kPaper:
      return "paper";
    case Hand::kScissors:
      return "scissors";
  }
  return "?";
}

std::string_view MessageName(Message message) {
  switch (message) {
    case Message::kSayRock:
      return "SAY_ROCK";
    case Message::kSayPaper:
      return "SAY_PAPER";
    case Message::kSayScissors:
      return "SAY_SCISSORS";
    case Message::kSilent:
      return "SILENT";
  }
  return "?";
}

Message HonestMessage(Hand hand) {
  return static_cast<Message>(static_cast<int>(hand));
}

bool Beats(Hand x, Hand y) {
  return (static_cast<int>(x) - static_cast<int>(y) + kNumHands) %
             kNumHands ==
         1;
}

HandDeal SampleHands(Rng& env_rng) {
  const int pair = env_rng.UniformInt(6);
  const int first = pair / 2;
  const int second = (first + 1 + pair % 2) % kNumHands;
  HandDeal deal;
  deal.hands = {static_cast<Hand>(first), static_cast<Hand>(second)};
  deal.upper_seat = Beats(deal.hands[0], deal.hands[1]) ? 0 : 1;
  return deal;
}

Rng RoundStream(std::uint64_t env_seed, int round) {
  return Rng(DeriveSeed(env_seed, SeedTag::kRound,
                        static_cast<std::uint64_t>(round)));
}

void ScoreSplitRound(SplitRound& round) {
  round.payoffs = {0.0, 0.0};
  for (int k = 0; k < kNumCategories; ++k) {
    const auto [a, b] = SplitAllocation(kItemQuantity, round.proposals[0][k],
                                        round.proposals[1][k]);
    round.allocations[0][k] = a;
    round.allocations[1][k] = b;
    round.payoffs[0] += round.values[0][k] * a;
    round.payoffs[1] += round.values[1][k] * b;
  }
}

void ScoreTasRound(TasRound& round) {
  const auto [a, b] =
      SplitAllocation(kItemQuantity, round.proposals[0], round.proposals[1]);
  round.allocations = {a, b};
  for (int seat = 0; seat < kNumSeats; ++seat) {
    const double value =
        seat == round.upper_seat ? kUpperCoinValue : kLowerCoinValue;
    round.payoffs[seat] = value * round.allocations[seat];
  }
}

// ---------------------------------------------------------------------------
// ObsSpace

ObsSpace::ObsSpace(EnvId env, ObsConfig obs, ActionGrid grid)
    : env_(env), obs_(obs), grid_(std::move(grid)) {
  switch (env_) {
    case EnvId::kIpd:
      if (obs_.ipd_memory < 1 || obs_.ipd_memory > 6) {
        throw ConfigError("ipd_memory must be in [1, 6]");
      }
      key_count_ = IntPow(kIpdSlotValues, obs_.ipd_memory) *
                   (obs_.ipd_grim_bit ? 2 : 1);
      break;
    case EnvId::kSplitNoComm:
      CheckLevels(grid_.split_levels, "split_levels");
      key_count_ = kSplitRelationKeys * kLabels;
      break;
    case EnvId::kTrustAndSplit:
      CheckLevels(grid_.tas_levels, "tas_levels");
      key_count_ = kTasMessageKeys + kTasProposalKeys;
      break;
  }
}

int ObsSpace::ActionCount(ObsKey key) const {
  switch (env_) {
    case EnvId::kIpd:
      return 2;
    case EnvId::kSplitNoComm: {
      const int levels = static_cast<int>(grid_.split_levels.size());
      return levels * levels * levels;
    }
    case EnvId::kTrustAndSplit:
      return static_cast<int>(key.index) < kTasMessageKeys
                 ? kNumMessages
                 : static_cast<int>(grid_.tas_levels.size());
  }
  return 0;
}

int ObsSpace::MaxActionCount() const {
  switch (env_) {
    case EnvId::kIpd:
      return 2;
    case EnvId::kSplitNoComm:
      return ActionCount(ObsKey{0});
    case EnvId::kTrustAndSplit:
      return std::max(kNumMessages,
                      static_cast<int>(grid_.tas_levels.size()));
  }
  return 0;
}

IpdKeyView ObsSpace::DecodeIpd(ObsKey key) const {
  IpdKeyView view;
  int rest = static_cast<int>(key.index);
  for (int i = 0; i < obs_.ipd_memory; ++i) {
    const int slot = rest % kIpdSlotValues;
    rest /= kIpdSlotValues;
    if (slot == 0) {
      view.recent.emplace_back(std::nullopt);
    } else {
      view.recent.emplace_back(std::pair{static_cast<IpdAction>((slot - 1) / 2),
                                         static_cast<IpdAction>((slot - 1) % 2)});
    }
  }
  view.opponent_ever_defected = rest != 0;
  return view;
}

SplitKeyView ObsSpace::DecodeSplit(ObsKey key) const {
  SplitKeyView view;
  int rest = static_cast<int>(key.index);
  for (int k = 0; k < kNumCategories; ++k) {
    view.relations[k] = static_cast<CategoryRelation>(rest % 3);
    rest /= 3;
  }
  view.label = static_cast<OpponentLabel>(rest);
  return view;
}

TasKeyView ObsSpace::DecodeTas(ObsKey key) const {
  TasKeyView view{};
  int index = static_cast<int>(key.index);
  if (index < kTasMessageKeys) {
    view.phase = Phase::kMessage;
    view.label = static_cast<OpponentLabel>(index % kLabels);
    index /= kLabels;
    const int opp = index % (kNumMessages + 1);
    index /= kNumMessages + 1;
    view.speaks_first = index % 2 == 0;
    view.hand = static_cast<Hand>(index / 2);
    if (opp != kTasAbsent) view.opponent = static_cast<Message>(opp);
  } else {
    index -= kTasMessageKeys;
    view.phase = Phase::kProposal;
    view.label = static_cast<OpponentLabel>(index % kLabels);
    index /= kLabels;
    view.opponent = static_cast<Message>(index % kNumMessages);
    view.hand = static_cast<Hand>(index / kNumMessages);
    view.speaks_first = false;
  }
  return view;
}

std::string ObsSpace::KeyName(ObsKey key) const {
  std::ostringstream out;
  switch (env_) {
    case EnvId::kIpd: {
      const IpdKeyView view = DecodeIpd(key);
      const bool first = std::all_of(view.recent.begin(), view.recent.end(),
                                     [](const auto& s) { return !s; });
      if (first) {
        out << "FIRST";
      } else {
        for (std::size_t i = 0; i < view.recent.size(); ++i) {
          if (i > 0) out << '|';
          if (!view.recent[i]) {
            out << "--";
          } else {
            out << (view.recent[i]->first == IpdAction::kCooperate ? 'C' : 'D')
                << (view.recent[i]->second == IpdAction::kCooperate ? 'C'
                                                                     : 'D');
          }
        }
      }
      if (view.opponent_ever_defected) out << "+G";
      break;
    }
    case EnvId::kSplitNoComm: {
      const SplitKeyView view = DecodeSplit(key);
      for (CategoryRelation rel : view.relations) {
        out << (rel == CategoryRelation::kMineHigher ? 'H'
                : rel == CategoryRelation::kEqual    ? 'E'
                                                     : 'L');
      }
      out << '|' << LabelName(view.label);
      break;
    }
    case EnvId::kTrustAndSplit: {
      const TasKeyView view = DecodeTas(key);
      const std::string_view opp =
          view.opponent ? MessageName(*view.opponent) : "ABSENT";
      if (view.phase == Phase::kMessage) {
        out << "M:" << HandName(view.hand) << ','
            << (view.speaks_first ? "first" : "second") << ',' << opp << ','
            << LabelName(view.label);
      } else {
        out << "P:" << HandName(view.hand) << ',' << opp << ','
            << LabelName(view.label);
      }
      break;
    }
  }
  return out.str();
}

std::optional<ObsKey> ObsSpace::ParseKey(std::string_view name) const {
  for (int i = 0; i < key_count_; ++i) {
    const ObsKey key{static_cast<std::uint32_t>(i)};
    if (KeyName(key) == name) return key;
  }
  return std::nullopt;
}

std::string ObsSpace::ActionName(ObsKey key, int action) const {
  std::ostringstream out;
  switch (env_) {
    case EnvId::kIpd:
      return action == 0 ? "C" : "D";
    case EnvId::kSplitNoComm: {
      const CategoryAmounts p = SplitProposal(action);
      out << p[0] << ',' << p[1] << ',' << p[2];
      break;
    }
    case EnvId::kTrustAndSplit:
      if (static_cast<int>(key.index) < kTasMessageKeys) {
        return std::string(MessageName(static_cast<Message>(action)));
      }
      out << TasProposal(action);
      break;
  }
  return out.str();
}

ObsKey ObsSpace::EncodeIpd(std::span<const IpdRound> history,
                           int seat) const {
  int index = 0;
  int scale = 1;
  const int n = static_cast<int>(history.size());
  for (int i = 0; i < obs_.ipd_memory; ++i) {
    int slot = 0;
    if (i < n) {
      const IpdRound& round = history[n - 1 - i];
      slot = 1 + 2 * static_cast<int>(round.actions[seat]) +
             static_cast<int>(round.actions[1 - seat]);
    }
    index += slot * scale;
    scale *= kIpdSlotValues;
  }
  if (obs_.ipd_grim_bit) {
    const bool defected =
        std::any_of(history.begin(), history.end(), [seat](const IpdRound& r) {
          return r.actions[1 - seat] == IpdAction::kDefect;
        });
    if (defected) index += scale;
  }
  return ObsKey{static_cast<std::uint32_t>(index)};
}

OpponentLabel ObsSpace::SplitLabel(const SplitRound& previous,
                                   int seat) const {
  const int opp = 1 - seat;
  for (int k = 0; k < kNumCategories; ++k) {
    if (previous.values[opp][k] == 1 && previous.values[seat][k] == 10 &&
        previous.proposals[opp][k] > obs_.split_greedy_threshold) {
      return OpponentLabel::kGreedy;
    }
  }
  return OpponentLabel::kCoop;
}

OpponentLabel ObsSpace::TasLabel(const TasRound& previous, int seat) const {
  const int opp = 1 - seat;
  if (obs_.tas_excuse_after_own_lie &&
      previous.messages[seat] != HonestMessage(previous.hands[seat])) {
    return OpponentLabel::kCoop;
  }
  if (previous.upper_seat == seat &&
      previous.proposals[opp] >= obs_.tas_greedy_threshold) {
    return OpponentLabel::kGreedy;
  }
  return OpponentLabel::kCoop;
}

ObsKey ObsSpace::EncodeSplit(const SplitRound& current,
                             std::span<const SplitRound> history,
                             int seat) const {
  int index = 0;
  int scale = 1;
  for (int k = 0; k < kNumCategories; ++k) {
    const int mine = current.values[seat][k];
    const int other = current.values[1 - seat][k];
    const CategoryRelation rel = mine > other    ? CategoryRelation::kMineHigher
                                 : mine == other ? CategoryRelation::kEqual
                                                 : CategoryRelation::kMineLower;
    index += static_cast<int>(rel) * scale;
    scale *= 3;
  }
  const OpponentLabel label =
      history.empty() ? OpponentLabel::kNone : SplitLabel(history.back(), seat);
  index += static_cast<int>(label) * kSplitRelationKeys;
  return ObsKey{static_cast<std::uint32_t>(index)};
}

ObsKey ObsSpace::EncodeTas(const TasRound& current, Phase phase,
                           std::span<const TasRound> history,
                           int seat) const {
  const int hand = static_cast<int>(current.hands[seat]);
  const OpponentLabel label =
      history.empty() ? OpponentLabel::kNone : TasLabel(history.back(), seat);
  const auto& opp_message = current.messages[1 - seat];
  int index = 0;
  if (phase == Phase::kMessage) {
    const bool first = current.first_speaker == seat;
    int opp = kTasAbsent;
    if (!first) {
      if (!opp_message) {
        throw InternalError("second speaker encoded before the first message");
      }
      opp = static_cast<int>(*opp_message);
    }
    index = ((hand * 2 + (first ? 0 : 1)) * (kNumMessages + 1) + opp) * kLabels +
            static_cast<int>(label);
  } else if (phase == Phase::kProposal) {
    if (!current.messages[0] || !current.messages[1]) {
      throw InternalError("proposal phase encoded before both messages");
    }
    index = kTasMessageKeys +
            (hand * kNumMessages + static_cast<int>(*opp_message)) * kLabels +
            static_cast<int>(label);
  } else {
    throw InternalError("trust-and-split has no single-step phase");
  }
  return ObsKey{static_cast<std::uint32_t>(index)};
}

CategoryAmounts ObsSpace::SplitProposal(int action) const {
  const int levels = static_cast<int>(grid_.split_levels.size());
  CategoryAmounts out{};
  for (int k = 0; k < kNumCategories; ++k) {
    out[k] = grid_.split_levels[action % levels];
    action /= levels;
  }
  return out;
}

int ObsSpace::SplitAction(
    const std::array<int, kNumCategories>& level_indices) const {
  const int levels = static_cast<int>(grid_.split_levels.size());
  int action = 0;
  int scale = 1;
  for (int k = 0; k < kNumCategories; ++k) {
    if (level_indices[k] < 0 || level_indices[k] >= levels) {
      throw InvalidArgument("split level index out of range");
    }
    action += level_indices[k] * scale;
    scale *= levels;
  }
  return action;
}

double ObsSpace::TasProposal(int action) const {
  return grid_.tas_levels.at(static_cast<std::size_t>(action));
}

}  // namespace socdil
