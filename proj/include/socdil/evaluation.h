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

#ifndef SOCDIL_EVALUATION_H_
#define SOCDIL_EVALUATION_H_

// Cross-play matrices, behavioral probes and the exploitability report.
// Every function here is deterministic given its seed: games are seeded by
// index and aggregated in index order whatever the thread count.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "socdil/environments.h"
#include "socdil/game.h"
#include "socdil/policy.h"
#include "socdil/training.h"

namespace socdil {

// Seeds of game `index` of a stream rooted at `stream_seed`.
EpisodeSpec EvaluationEpisode(EnvId env, int rounds, std::uint64_t stream_seed,
                              int index);

// ---------------------------------------------------------------------------
// Cross-play.

struct PairResult {
  int row = 0;  // roster index in seat 0
  int col = 0;  // roster index in seat 1
  int n_games = 0;
  std::array<double, kNumSeats> mean{};    // per round, per seat
  std::array<double, kNumSeats> stderr_{};  // of the per-game means
  std::vector<std::uint64_t> env_seeds;
  // Mean reward per round index and seat; empty unless traces were asked for.
  std::vector<std::array<double, kNumSeats>> per_round;
};

struct CrossPlayReport {
  EnvId env = EnvId::kIpd;
  int rounds = 10;
  int n_games = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::string> roster;
  std::vector<PairResult> pairs;  // row-major over the roster

  const PairResult& at(int row, int col) const {
    return pairs.at(static_cast<std::size_t>(row) * roster.size() + col);
  }
};

// Plays every ordered pair, self-pairs included. Each pair draws its games
// from its own seed stream. Throws ConfigError for an empty roster, a
// policy of another environment or n_games < 1.
CrossPlayReport CrossPlay(std::span<const PolicyHandle> roster, EnvId env,
                          int n_games, int rounds, std::uint64_t master_seed,
                          int threads = 1, bool per_round_traces = false);

// Row player's mean per round as a matrix, then one line per pair.
void WriteCrossPlayMatrixCsv(const CrossPlayReport& report, std::ostream& out);
void WriteCrossPlayPairsCsv(const CrossPlayReport& report, std::ostream& out);
nlohmann::json ToJson(const CrossPlayReport& report);

// ---------------------------------------------------------------------------
// Probes.

// Play against a uniformly random C/D opponent.
struct ReciprocityStats {
  int n_games = 0;
  double defect_after_defect = 0.0;  // P(D_t | opp D_{t-1})
  double coop_after_coop = 0.0;      // P(C_t | opp C_{t-1})
  double first_round_coop = 0.0;
  int after_defect_count = 0;
  int after_coop_count = 0;
};

ReciprocityStats ReciprocityProbeIpd(const Policy& policy, int n_games,
                                     std::uint64_t master_seed,
                                     int rounds = 10);

// The opponent plays ALWAYS_COOP except in `trigger_round`, where it plays
// ALWAYS_DEFECT. greedy_rate[r] is the fraction of games in which the
// probed policy's round-r proposal carries the GREEDY label (as judged by
// the probed policy's own encoder). `before` averages rounds up to and
// including the trigger round, `after` the rounds that follow it.
struct GrimStats {
  int n_games = 0;
  int trigger_round = 2;
  std::vector<double> greedy_rate;
  double before = 0.0;
  double after = 0.0;
};

GrimStats GrimProbeSplit(const Policy& policy, int n_games,
                         std::uint64_t master_seed, int rounds = 10,
                         int trigger_round = 2);

// Self-play Trust-and-Split statistics.
struct TasBehaviorStats {
  int n_games = 0;
  double proposal_upper = 0.0;
  double proposal_lower = 0.0;
  double honesty = 0.0;     // messages naming the sender's true hand
  double collective = 0.0;  // per round, both seats
};

TasBehaviorStats TasBehaviorProbe(const Policy& policy, int n_games,
                                  std::uint64_t master_seed, int rounds = 10,
                                  int threads = 1);

// Split No-Comm self-play welfare. Per round, full cooperation gives each
// category to the seat valuing it more (ties split evenly) and mutual
// defection is both seats claiming everything; both are evaluated on the
// same value draws as the self-play games.
struct SplitEfficiency {
  int n_games = 0;
  double self_play = 0.0;  // collective per round
  double full_coop = 0.0;
  double mutual_defection = 0.0;
  // (self_play - mutual_defection) / (full_coop - mutual_defection)
  double efficiency = 0.0;
  double raw_ratio = 0.0;  // self_play / full_coop
};

SplitEfficiency SplitEfficiencyProbe(const Policy& policy, int n_games,
                                     std::uint64_t master_seed,
                                     int rounds = 10, int threads = 1);

nlohmann::json ToJson(const ReciprocityStats& stats);
nlohmann::json ToJson(const GrimStats& stats);
nlohmann::json ToJson(const TasBehaviorStats& stats);
nlohmann::json ToJson(const SplitEfficiency& stats);

// Periodic training probes for config.env, seeded from config.seed and the
// step: IPD reciprocity, Split efficiency, Trust-and-Split behavior.
std::function<std::vector<ProbeRecord>(int, const PolicyParams&)>
TrainingProbes(const TrainConfig& config);

// ---------------------------------------------------------------------------
// Exploitability.

struct ExploitConfig {
  // Learner training setup. Its seed is replaced by learner_seeds[i].
  TrainConfig learner;
  std::vector<std::uint64_t> learner_seeds = {1, 2, 3};
  // A learner exploits the frozen policy when the frozen seat's final mean
  // reward is more than this fraction below its self-play level.
  double threshold = 0.15;
  int eval_games = 256;
  std::uint64_t eval_seed = 0;
  int threads = 1;
};

struct ExploitRun {
  std::uint64_t seed = 0;
  std::vector<double> frozen_curve;  // frozen seat's batch mean per step
  double frozen_final = 0.0;
  double learner_final = 0.0;
  double drop = 0.0;  // (self_play_level - frozen_final) / |self_play_level|
  bool exploited = false;
  bool aborted = false;
};

// EXPLOITABLE when a strict majority of learner seeds exploit the policy.
struct ExploitabilityReport {
  std::string frozen_name;
  EnvId env = EnvId::kIpd;
  double self_play_level = 0.0;
  double threshold = 0.15;
  std::vector<ExploitRun> runs;
  int exploited_runs = 0;
  bool exploitable = false;

  std::string verdict() const {
    return exploitable ? "EXPLOITABLE" : "NOT EXPLOITABLE";
  }
};

// Mean per-round reward of the frozen seat (seats alternate by game).
double FrozenSeatReward(const Policy& frozen, const Policy& other, int n_games,
                        int rounds, std::uint64_t master_seed,
                        int threads = 1);

// Requires at least three learner seeds. Throws ConfigError otherwise.
ExploitabilityReport ExploitabilityReportFor(const PolicyHandle& frozen,
                                             const ExploitConfig& config);

nlohmann::json ToJson(const ExploitabilityReport& report);
void WriteExploitCurvesCsv(const ExploitabilityReport& report,
                           std::ostream& out);

// ---------------------------------------------------------------------------
// Transcripts: one JSON object per decision, one line each.

void WriteTranscript(const Trajectory& traj,
                     const std::array<const ObsSpace*, kNumSeats>& spaces,
                     int game, std::ostream& out);

}  // namespace socdil

#endif  // SOCDIL_EVALUATION_H_
