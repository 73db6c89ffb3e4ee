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

#ifndef SOCDIL_ENVIRONMENTS_H_
#define SOCDIL_ENVIRONMENTS_H_

// The three social-dilemma games: iterated prisoner's dilemma, Split
// No-Comm (three item categories, public values, no messages) and
// Trust-and-Split (one coin pile, private rock-paper-scissors hands, one
// message per seat per round). Everything here is a pure function of its
// arguments; episode state lives in the runner (game.h).

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "socdil/rng.h"

namespace socdil {

enum class EnvId { kIpd, kSplitNoComm, kTrustAndSplit };

inline constexpr int kNumSeats = 2;
inline constexpr int kNumCategories = 3;
inline constexpr double kItemQuantity = 10.0;

std::string_view EnvName(EnvId env);
// Accepts the canonical names ("ipd", "split_nocomm", "trust_and_split")
// and a few aliases ("IPD", "SplitNoComm", "TrustAndSplit", "tas").
EnvId ParseEnvId(std::string_view name);

// ---------------------------------------------------------------------------
// Iterated prisoner's dilemma.

enum class IpdAction : int { kCooperate = 0, kDefect = 1 };

// Row player first: (C,C)=(3,3), (C,D)=(0,5), (D,C)=(5,0), (D,D)=(1,1).
std::pair<double, double> IpdPayoff(IpdAction first, IpdAction second);

// ---------------------------------------------------------------------------
// Split rule shared by both split games.

// Allocation q * p_x / max(q, p_a + p_b) for each side. Proposals outside
// [0, q] throw InvalidArgument.
std::pair<double, double> SplitAllocation(double quantity, double p_a,
                                          double p_b);

// Per-category values, each 1 or 10, ordered (hats, books, balls).
using ItemValues = std::array<int, kNumCategories>;

struct ItemValuePair {
  ItemValues first;
  ItemValues second;
};

// Equal totals and at least one differing category.
bool IsValidItemValuePair(const ItemValues& a, const ItemValues& b);

// Uniform over the valid pairs: the number c of 10-valued categories is 1
// or 2 with equal probability, then each seat gets a distinct size-c subset.
ItemValuePair SampleItemValues(Rng& env_rng);

// ---------------------------------------------------------------------------
// Trust-and-Split.

enum class Hand : int { kRock = 0, kPaper = 1, kScissors = 2 };
inline constexpr int kNumHands = 3;

enum class Message : int {
  kSayRock = 0,
  kSayPaper = 1,
  kSayScissors = 2,
  kSilent = 3,
};
inline constexpr int kNumMessages = 4;

std::string_view HandName(Hand hand);
std::string_view MessageName(Message message);
// The message that truthfully names `hand`.
Message HonestMessage(Hand hand);

// Standard rock-paper-scissors dominance.
bool Beats(Hand x, Hand y);

struct HandDeal {
  std::array<Hand, kNumSeats> hands;
  int upper_seat;
};

// Uniform over the six ordered pairs of distinct hands.
HandDeal SampleHands(Rng& env_rng);

inline constexpr double kUpperCoinValue = 10.0;
inline constexpr double kLowerCoinValue = 1.0;

// Environment randomness of round `round` of an episode. Each round gets its
// own stream so that draws never depend on how many actions were taken.
Rng RoundStream(std::uint64_t env_seed, int round);

// ---------------------------------------------------------------------------
// Round records. An episode keeps a vector of these; the last element is the
// round in progress while decisions are being made.

enum class Phase : int { kAct = 0, kMessage = 1, kProposal = 2 };

struct IpdRound {
  std::array<IpdAction, kNumSeats> actions{};
  std::array<double, kNumSeats> payoffs{};
};

using CategoryAmounts = std::array<double, kNumCategories>;

struct SplitRound {
  std::array<ItemValues, kNumSeats> values{};
  std::array<CategoryAmounts, kNumSeats> proposals{};
  std::array<CategoryAmounts, kNumSeats> allocations{};
  std::array<double, kNumSeats> payoffs{};
};

struct TasRound {
  std::array<Hand, kNumSeats> hands{};
  int upper_seat = 0;
  int first_speaker = 0;
  std::array<std::optional<Message>, kNumSeats> messages{};
  std::array<double, kNumSeats> proposals{};
  std::array<double, kNumSeats> allocations{};
  std::array<double, kNumSeats> payoffs{};
};

// Evaluates a fully proposed round in place (allocations and payoffs).
void ScoreSplitRound(SplitRound& round);
void ScoreTasRound(TasRound& round);

// ---------------------------------------------------------------------------
// Observations.

// Discrete label of what the opponent did last round.
enum class OpponentLabel : int { kNone = 0, kCoop = 1, kGreedy = 2 };

// Options of the observation encoders. Defaults give the memory-1 IPD key.
struct ObsConfig {
  int ipd_memory = 1;
  bool ipd_grim_bit = false;
  // Split: GREEDY iff the opponent proposed more than this on a category it
  // values 1 and the seat values 10.
  double split_greedy_threshold = 5.0;
  // Trust-and-Split: GREEDY iff the opponent held the lower hand and
  // proposed at least this much.
  double tas_greedy_threshold = 5.0;
  // Trust-and-Split: a lower-hand claim is not labeled GREEDY when the seat's
  // own message that round was not its honest hand (the opponent may have
  // been misled about its role).
  bool tas_excuse_after_own_lie = false;

  bool operator==(const ObsConfig&) const = default;
};

// Proposal grids. Split actions are joint per-category proposals, so the
// action count is levels^3.
struct ActionGrid {
  std::vector<double> split_levels = {0.0, 5.0, 10.0};
  std::vector<double> tas_levels = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  bool operator==(const ActionGrid&) const = default;
};

// Index of a decision context in an environment's finite key space.
struct ObsKey {
  std::uint32_t index = 0;
  auto operator<=>(const ObsKey&) const = default;
};

enum class CategoryRelation : int { kMineHigher = 0, kEqual = 1, kMineLower = 2 };

struct SplitKeyView {
  std::array<CategoryRelation, kNumCategories> relations;
  OpponentLabel label;
};

struct TasKeyView {
  Phase phase;
  Hand hand;
  bool speaks_first;                // message phase only
  std::optional<Message> opponent;  // empty = ABSENT
  OpponentLabel label;
};

struct IpdKeyView {
  // Most recent round first; empty slots mean "before the episode start".
  std::vector<std::optional<std::pair<IpdAction, IpdAction>>> recent;
  bool opponent_ever_defected;
};

// Everything a policy needs to agree on with the game: which environment,
// how decisions are encoded, and which proposal grid actions index into.
class ObsSpace {
 public:
  explicit ObsSpace(EnvId env, ObsConfig obs = {}, ActionGrid grid = {});

  EnvId env() const { return env_; }
  const ObsConfig& obs_config() const { return obs_; }
  const ActionGrid& grid() const { return grid_; }

  int KeyCount() const { return key_count_; }
  int ActionCount(ObsKey key) const;
  // Largest ActionCount over all keys.
  int MaxActionCount() const;

  std::string KeyName(ObsKey key) const;
  std::optional<ObsKey> ParseKey(std::string_view name) const;
  std::string ActionName(ObsKey key, int action) const;

  ObsKey EncodeIpd(std::span<const IpdRound> history, int seat) const;
  ObsKey EncodeSplit(const SplitRound& current,
                     std::span<const SplitRound> history, int seat) const;
  // Throws InternalError when the phase ordering is violated (proposal key
  // requested before both messages exist, or a second speaker encoded before
  // the first message).
  ObsKey EncodeTas(const TasRound& current, Phase phase,
                   std::span<const TasRound> history, int seat) const;

  IpdKeyView DecodeIpd(ObsKey key) const;
  SplitKeyView DecodeSplit(ObsKey key) const;
  TasKeyView DecodeTas(ObsKey key) const;

  // Action decoding.
  CategoryAmounts SplitProposal(int action) const;
  int SplitAction(const std::array<int, kNumCategories>& level_indices) const;
  double TasProposal(int action) const;

  OpponentLabel SplitLabel(const SplitRound& previous, int seat) const;
  OpponentLabel TasLabel(const TasRound& previous, int seat) const;

  bool operator==(const ObsSpace& other) const {
    return env_ == other.env_ && obs_ == other.obs_ && grid_ == other.grid_;
  }

 private:
  EnvId env_;
  ObsConfig obs_;
  ActionGrid grid_;
  int key_count_ = 0;
};

// Split key layout: relations (3^3) then label.
inline constexpr int kSplitRelationKeys = 27;
// Trust-and-Split key layout: message keys (hand x position x opponent
// message-or-absent x label) followed by proposal keys (hand x opponent
// message x label).
inline constexpr int kTasMessageKeys = kNumHands * 2 * (kNumMessages + 1) * 3;
inline constexpr int kTasProposalKeys = kNumHands * kNumMessages * 3;

}  // namespace socdil

#endif  // SOCDIL_ENVIRONMENTS_H_
