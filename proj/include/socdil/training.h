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

#ifndef SOCDIL_TRAINING_H_
#define SOCDIL_TRAINING_H_

// Batch policy-gradient trainers over CRN rollouts:
//
//   GRPO      independent REINFORCE per seat with a leave-one-out group
//             baseline,
//   GRPO_SR   the same after replacing both seats' rewards by their sum,
//   ADALIGN   Advantage Alignment: the own advantage is reshaped with the
//             opponent's advantage and the discounted sum of past own
//             advantages, and opponents are drawn from a snapshot buffer
//             with probability rho.
//
// Both seats share one parameter table (self-play). Every step is
// on-policy; there is no importance correction and no value network.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "socdil/environments.h"
#include "socdil/game.h"
#include "socdil/policy.h"

namespace socdil {

enum class Algorithm { kGrpo, kGrpoSumRewards, kAdAlign };

std::string_view AlgorithmName(Algorithm algorithm);
// Throws ConfigError naming GRPO, GRPO_SR and ADALIGN on failure.
Algorithm ParseAlgorithm(std::string_view name);

enum class Optimizer { kSgd, kAdam };

std::string_view OptimizerName(Optimizer optimizer);
Optimizer ParseOptimizer(std::string_view name);

struct TrainConfig {
  Algorithm algorithm = Algorithm::kGrpo;
  EnvId env = EnvId::kIpd;
  int rounds = 10;
  int batch_size = 128;
  int group_size = 8;
  double gamma = 0.9;
  double beta = 0.5;
  double rho = 0.5;
  bool outer_gamma = true;
  Optimizer optimizer = Optimizer::kSgd;
  double learning_rate = 0.1;
  double entropy_coef = 0.01;
  // Penalty on KL(pi || uniform). Its gradient is an entropy bonus.
  double kl_coef = 0.0;
  double reward_norm = 5.0;
  // Trust-and-Split only: initial logit bonus on the honest message at every
  // message key. 0 starts from the uniform policy.
  double honest_message_prior = 0.0;
  int steps = 1000;
  std::uint64_t seed = 0;
  int buffer_capacity = 32;
  int buffer_cadence = 10;
  int eval_every = 0;  // 0 disables periodic probes and checkpoints
  int eval_games = 256;
  int threads = 0;  // rollout workers; 0 = hardware concurrency
  ObsConfig obs;
  ActionGrid grid;

  ObsSpace MakeSpace() const { return ObsSpace(env, obs, grid); }
  bool operator==(const TrainConfig&) const = default;
};

// Per-environment defaults used by the shipped presets: batch size, reward
// normalization, entropy coefficient, gamma, beta, optimizer, step budget
// and encoder options. See the README for the table.
TrainConfig DefaultTrainConfig(EnvId env, Algorithm algorithm);

// Throws ConfigError for out-of-range settings.
void ValidateConfig(const TrainConfig& config);

// One CRN group of a batch.
struct CrnGroup {
  std::vector<Trajectory> episodes;
  std::string opponent_id = "self";
  bool self_play = true;
  // Seat holding the learner when the opponent is not the current policy.
  int learner_seat = 0;
};

struct Batch {
  int step = 0;
  std::vector<CrnGroup> groups;
};

// Rolls out batch_size episodes in batch_size / group_size CRN groups. The
// opponent is drawn once per group: ADALIGN samples the buffer with
// probability rho, the GRPO variants always self-play. With `frozen`, every
// group plays against it instead. The learner seat alternates by group.
Batch CollectBatch(const TrainConfig& config, const PolicyParams& params,
                   const AgentBuffer& buffer, int step,
                   const PolicyHandle& frozen = nullptr);

// Replaces both seats' step rewards by their per-step sum.
Trajectory SumRewardsTransform(const Trajectory& traj);

struct GradientEstimate {
  SparseGradient gradient;
  int contributions = 0;   // (trajectory, learner seat) pairs
  int visits = 0;          // learner decisions
  double mean_entropy = 0.0;
};

// sum_t gamma^round(t) * coeff_t * grad log pi(a_t | s_t), averaged over
// contributing (trajectory, learner seat) pairs, plus the entropy bonus
// averaged over learner decisions. Throws StepAborted on any non-finite
// advantage or gradient.
GradientEstimate ComputeStepGradient(const Batch& batch,
                                     const TrainConfig& config,
                                     const PolicyParams& params);

struct CurveRecord {
  int step = 0;
  double mean_reward = 0.0;        // per round, learner seats, unnormalized
  double collective_reward = 0.0;  // per round, both seats summed
  double entropy = 0.0;
  double grad_norm = 0.0;
  double buffer_fraction = 0.0;
  double frozen_reward = std::numeric_limits<double>::quiet_NaN();
};

struct ProbeRecord {
  int step = 0;
  std::string name;
  double value = 0.0;
};

struct TrainingCurve {
  std::vector<CurveRecord> records;
  std::vector<ProbeRecord> probes;
};

void WriteCurveCsv(const TrainingCurve& curve, std::ostream& out);
void WriteProbeCsv(const TrainingCurve& curve, std::ostream& out);

// Starting parameters for `config`: uniform logits plus the honest-message
// prior when configured.
PolicyParams InitialParams(const TrainConfig& config);

struct TrainHooks {
  // Called every eval_every steps with the current parameters; returned
  // statistics are appended to the curve.
  std::function<std::vector<ProbeRecord>(int step, const PolicyParams&)> probe;
  // If set, checkpoints are written here at the eval cadence and at the end.
  std::optional<std::string> checkpoint_dir;
  // Called after every step (progress reporting).
  std::function<void(const CurveRecord&)> on_step;
  // Starting parameters (resume or warm start). Must match the config's
  // observation space; defaults to InitialParams(config).
  std::optional<PolicyParams> initial_params;
};

struct TrainResult {
  PolicyParams params;
  TrainingCurve curve;
  std::vector<std::string> checkpoints;
  bool aborted = false;
  std::string abort_message;
};

TrainResult Train(const TrainConfig& config, const TrainHooks& hooks = {});

// Trains a fresh learner against a fixed policy. The frozen policy never
// changes and receives no gradient; the curve logs its reward.
TrainResult TrainVsFrozen(const TrainConfig& config,
                          const PolicyHandle& frozen,
                          const TrainHooks& hooks = {});

}  // namespace socdil

#endif  // SOCDIL_TRAINING_H_
