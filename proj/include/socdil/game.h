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

#ifndef SOCDIL_GAME_H_
#define SOCDIL_GAME_H_

// Two-player episode execution shared by every environment, trainer and
// evaluator.
//
// Randomness is split into disjoint streams. The environment stream (item
// values, hands) is derived from EpisodeSpec::env_seed and the round index
// only, so every episode of a common-random-number group sees the same
// draws no matter which actions are taken or which policies sit in the
// seats. Each seat samples its actions from its own stream.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "socdil/environments.h"
#include "socdil/policy.h"

namespace socdil {

struct EpisodeSpec {
  EnvId env = EnvId::kIpd;
  int rounds = 10;
  std::uint64_t env_seed = 0;
  int crn_group = 0;
  std::array<std::uint64_t, kNumSeats> action_seeds{};

  bool operator==(const EpisodeSpec&) const = default;
};

// One decision of one seat.
struct Step {
  ObsKey key;
  int action = 0;
  double reward = 0.0;
  int round = 0;
  Phase phase = Phase::kAct;

  bool operator==(const Step&) const = default;
};

using RoundLog = std::variant<std::vector<IpdRound>, std::vector<SplitRound>,
                              std::vector<TasRound>>;

struct Trajectory {
  EpisodeSpec spec;
  std::array<std::vector<Step>, kNumSeats> steps;
  std::array<std::string, kNumSeats> policy_names;
  // "self", "buffer@<step>", a builtin name or "frozen"; set by the caller.
  std::string opponent_id = "self";
  RoundLog rounds;

  // Decisions per seat: rounds for IPD and Split No-Comm, 2 * rounds for
  // Trust-and-Split (message step, then proposal step).
  int length() const { return static_cast<int>(steps[0].size()); }
  // Sum of the seat's step rewards in each round.
  std::vector<double> RoundRewards(int seat) const;
};

int StepsPerRound(EnvId env);

// Plays one episode. Throws ConfigError if a policy belongs to another
// environment or the seats disagree on the proposal grid, and InternalError
// if a policy returns a distribution that does not sum to 1 within 1e-9.
Trajectory RunEpisode(const EpisodeSpec& spec, const Policy& first,
                      const Policy& second);

// Partitions a batch into batch_size / group_size CRN groups. Members of a
// group share env_seed; group env seeds are pairwise distinct; all
// 2 * batch_size action seeds are pairwise distinct. Requires group_size >= 2
// dividing batch_size.
std::vector<EpisodeSpec> MakeCrnBatch(EnvId env, int rounds, int batch_size,
                                      int group_size,
                                      std::uint64_t master_seed);

// Discounted returns-to-go per seat after dividing rewards by
// norm_constant. Discounting is per round: every step of a round carries
// that round's return G_r = rhat_r + gamma * G_{r+1}.
struct ReturnSeries {
  std::array<std::vector<double>, kNumSeats> by_round;
  std::array<std::vector<double>, kNumSeats> by_step;
};

ReturnSeries ReturnsToGo(const Trajectory& traj, double gamma,
                         double norm_constant);
// Same recursion on a bare per-round reward sequence.
std::vector<double> DiscountedReturns(const std::vector<double>& round_rewards,
                                      double gamma, double norm_constant);

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency). Work is split into contiguous chunks; callers write results
// into preallocated slots so output order never depends on scheduling.
void ParallelFor(int n, int threads, const std::function<void(int)>& fn);

}  // namespace socdil

#endif  // SOCDIL_GAME_H_
