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

#include "socdil/training.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <ostream>
#include <sstream>

#include "socdil/advantage.h"
#include "socdil/errors.h"

namespace socdil {

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kGrpo:
      return "GRPO";
    case Algorithm::kGrpoSumRewards:
      return "GRPO_SR";
    case Algorithm::kAdAlign:
      return "ADALIGN";
  }
  return "?";
}

Algorithm ParseAlgorithm(std::string_view name) {
  if (name == "GRPO" || name == "grpo") return Algorithm::kGrpo;
  if (name == "GRPO_SR" || name == "grpo_sr") return Algorithm::kGrpoSumRewards;
  if (name == "ADALIGN" || name == "adalign") return Algorithm::kAdAlign;
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (valid: GRPO, GRPO_SR, ADALIGN)");
}

std::string_view OptimizerName(Optimizer optimizer) {
  return optimizer == Optimizer::kSgd ? "sgd" : "adam";
}

Optimizer ParseOptimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::kSgd;
  if (name == "adam") return Optimizer::kAdam;
  throw ConfigError("unknown optimizer '" + std::string(name) +
                    "' (valid: sgd, adam)");
}

TrainConfig DefaultTrainConfig(EnvId env, Algorithm algorithm) {
  TrainConfig config;
  config.algorithm = algorithm;
  config.env = env;
  switch (env) {
    case EnvId::kIpd:
      config.batch_size = 128;
      config.reward_norm = 5.0;
      config.entropy_coef = 0.01;
      config.gamma = 0.9;
      config.beta = 0.5;
      config.optimizer = Optimizer::kSgd;
      config.learning_rate = 0.1;
      config.steps = algorithm == Algorithm::kAdAlign ? 3000 : 1000;
      break;
    case EnvId::kSplitNoComm:
      config.batch_size = 64;
      config.reward_norm = 100.0;
      config.entropy_coef = 0.0;
      config.gamma = 0.9;
      config.beta = 1.0;
      config.optimizer = Optimizer::kAdam;
      config.learning_rate = 0.005;
      config.steps = 6000;
      // Any claim on a contested low-value category counts as GREEDY.
      config.obs.split_greedy_threshold = 0.0;
      break;
    case EnvId::kTrustAndSplit:
      config.batch_size = 64;
      config.reward_norm = 100.0;
      config.entropy_coef = 0.0;
      config.gamma = 0.96;
      config.beta = 2.0;
      config.optimizer = Optimizer::kAdam;
      config.learning_rate = 0.01;
      config.steps = 4000;
      config.honest_message_prior = 5.0;
      config.obs.tas_greedy_threshold = 3.0;
      config.obs.tas_excuse_after_own_lie = true;
      break;
  }
  return config;
}

PolicyParams InitialParams(const TrainConfig& config) {
  PolicyParams params(config.MakeSpace());
  if (config.env != EnvId::kTrustAndSplit ||
      config.honest_message_prior == 0.0) {
    return params;
  }
  const ObsSpace& space = params.space();
  for (int i = 0; i < space.KeyCount(); ++i) {
    const ObsKey key{static_cast<std::uint32_t>(i)};
    const TasKeyView view = space.DecodeTas(key);
    if (view.phase != Phase::kMessage) continue;
    params.Logits(key)[static_cast<int>(HonestMessage(view.hand))] =
        config.honest_message_prior;
  }
  return params;
}

void ValidateConfig(const TrainConfig& config) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (config.rounds < 1) fail("rounds must be >= 1");
  if (config.group_size < 2) fail("group_size must be >= 2");
  if (config.threads < 0) fail("threads must be >= 0 (0 = all cores)");
  if (config.batch_size < config.group_size ||
      config.batch_size % config.group_size != 0) {
    fail("group_size must divide batch_size");
  }
  if (!(config.gamma > 0.0 && config.gamma <= 1.0)) fail("gamma must be in (0, 1]");
  if (!(config.beta >= 0.0)) fail("beta must be >= 0");
  if (!(config.rho >= 0.0 && config.rho <= 1.0)) fail("rho must be in [0, 1]");
  if (!(config.learning_rate >= 0.0)) fail("learning_rate must be >= 0");
  if (!(config.entropy_coef >= 0.0)) fail("entropy_coef must be >= 0");
  if (!(config.kl_coef >= 0.0)) fail("kl_coef must be >= 0");
  if (!(config.reward_norm > 0.0)) fail("reward_norm must be > 0");
  if (!std::isfinite(config.honest_message_prior)) {
    fail("honest_message_prior must be finite");
  }
  if (config.steps < 0) fail("steps must be >= 0");
  if (config.buffer_capacity < 1) fail("buffer capacity must be >= 1");
  if (config.buffer_cadence < 1) fail("buffer cadence must be >= 1");
  if (config.eval_every < 0) fail("eval_every must be >= 0");
  if (config.eval_games < 1) fail("eval_games must be >= 1");
  (void)config.MakeSpace();  // validates encoder options and grids
}

Batch CollectBatch(const TrainConfig& config, const PolicyParams& params,
                   const AgentBuffer& buffer, int step,
                   const PolicyHandle& frozen) {
  const std::uint64_t step_seed =
      DeriveSeed(config.seed, SeedTag::kStep, static_cast<std::uint64_t>(step));
  const std::vector<EpisodeSpec> specs =
      MakeCrnBatch(config.env, config.rounds, config.batch_size,
                   config.group_size, step_seed);
  const int groups = config.batch_size / config.group_size;

  const PolicyHandle current = std::make_shared<TabularPolicy>(
      std::make_shared<const PolicyParams>(params), "current");
  Rng opponent_rng(DeriveSeed(config.seed, SeedTag::kOpponent,
                              static_cast<std::uint64_t>(step)));

  Batch batch;
  batch.step = step;
  batch.groups.resize(groups);
  std::vector<PolicyHandle> opponents(groups);
  for (int g = 0; g < groups; ++g) {
    CrnGroup& group = batch.groups[g];
    group.learner_seat = g % kNumSeats;
    if (frozen) {
      opponents[g] = frozen;
      group.opponent_id = "frozen:" + frozen->name();
      group.self_play = false;
    } else if (config.algorithm == Algorithm::kAdAlign) {
      OpponentDraw draw = SampleOpponent(buffer, current, config.rho,
                                         opponent_rng);
      opponents[g] = std::move(draw.policy);
      group.opponent_id = draw.id;
      group.self_play = !draw.from_buffer;
    } else {
      opponents[g] = current;
    }
    group.episodes.resize(config.group_size);
  }

  ParallelFor(config.batch_size, config.threads, [&](int i) {
    const int g = i / config.group_size;
    CrnGroup& group = batch.groups[g];
    const Policy& learner = *current;
    const Policy& opponent = *opponents[g];
    const bool learner_first = group.learner_seat == 0;
    Trajectory traj = RunEpisode(specs[i], learner_first ? learner : opponent,
                                 learner_first ? opponent : learner);
    traj.opponent_id = group.opponent_id;
    group.episodes[i % config.group_size] = std::move(traj);
  });
  return batch;
}

Trajectory SumRewardsTransform(const Trajectory& traj) {
  Trajectory out = traj;
  for (std::size_t t = 0; t < traj.steps[0].size(); ++t) {
    const double total = traj.steps[0][t].reward + traj.steps[1][t].reward;
    out.steps[0][t].reward = total;
    out.steps[1][t].reward = total;
  }
  return out;
}

namespace {

std::array<bool, kNumSeats> LearnerSeats(const CrnGroup& group) {
  if (group.self_play) return {true, true};
  std::array<bool, kNumSeats> seats{false, false};
  seats[group.learner_seat] = true;
  return seats;
}

bool AllFinite(const Series& values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

GradientEstimate ComputeStepGradient(const Batch& batch,
                                     const TrainConfig& config,
                                     const PolicyParams& params) {
  GradientEstimate estimate;
  SparseGradient entropy_grad;
  const double entropy_weight = config.entropy_coef + config.kl_coef;
  std::vector<double> probs(params.space().MaxActionCount());
  std::vector<double> discount(config.rounds);
  for (int r = 0; r < config.rounds; ++r) discount[r] = std::pow(config.gamma, r);
  double entropy_total = 0.0;

  for (const CrnGroup& group : batch.groups) {
    const int k = static_cast<int>(group.episodes.size());
    // Per seat: member returns-to-go by round.
    std::array<std::vector<Series>, kNumSeats> returns;
    for (int i = 0; i < k; ++i) {
      const Trajectory& traj = group.episodes[i];
      const ReturnSeries series =
          config.algorithm == Algorithm::kGrpoSumRewards
              ? ReturnsToGo(SumRewardsTransform(traj), config.gamma,
                            config.reward_norm)
              : ReturnsToGo(traj, config.gamma, config.reward_norm);
      for (int seat = 0; seat < kNumSeats; ++seat) {
        returns[seat].push_back(series.by_round[seat]);
      }
    }
    std::array<std::vector<Series>, kNumSeats> advantages;
    for (int seat = 0; seat < kNumSeats; ++seat) {
      advantages[seat] = LooAdvantages(returns[seat]);
    }

    const auto learners = LearnerSeats(group);
    for (int i = 0; i < k; ++i) {
      const Trajectory& traj = group.episodes[i];
      for (int seat = 0; seat < kNumSeats; ++seat) {
        if (!learners[seat]) continue;
        const Series coeff =
            config.algorithm == Algorithm::kAdAlign
                ? AlignAdvantages(advantages[seat][i],
                                  advantages[1 - seat][i], config.beta,
                                  config.gamma, config.outer_gamma)
                : advantages[seat][i];
        if (!AllFinite(coeff)) {
          throw StepAborted(batch.step,
                            "non-finite advantage at step " +
                                std::to_string(batch.step));
        }
        for (const Step& step : traj.steps[seat]) {
          std::span<double> p(probs.data(), params.space().ActionCount(step.key));
          params.Probs(step.key, p);
          estimate.gradient.AddLogProb(step.key, step.action, p,
                                       discount[step.round] * coeff[step.round]);
          entropy_total += Entropy(p);
          if (entropy_weight > 0.0) entropy_grad.AddEntropy(step.key, p, 1.0);
          ++estimate.visits;
        }
        ++estimate.contributions;
      }
    }
  }

  if (estimate.contributions > 0) {
    estimate.gradient *= 1.0 / estimate.contributions;
  }
  if (estimate.visits > 0) {
    estimate.mean_entropy = entropy_total / estimate.visits;
    if (entropy_weight > 0.0) {
      entropy_grad *= entropy_weight / estimate.visits;
      estimate.gradient += entropy_grad;
    }
  }
  if (!estimate.gradient.AllFinite()) {
    throw StepAborted(batch.step, "non-finite gradient at step " +
                                      std::to_string(batch.step));
  }
  return estimate;
}

namespace {

class OptimizerState {
 public:
  OptimizerState(const TrainConfig& config, std::size_t size)
      : config_(config) {
    if (config_.optimizer == Optimizer::kAdam) {
      m_.assign(size, 0.0);
      v_.assign(size, 0.0);
    }
  }

  void Apply(const SparseGradient& grad, PolicyParams& params) {
    if (config_.optimizer == Optimizer::kSgd) {
      grad.ApplyTo(params, config_.learning_rate);
      return;
    }
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    ++t_;
    // Dense gradient in the flat layout of the parameters.
    std::vector<double> dense(m_.size(), 0.0);
    std::span<double> flat = params.flat();
    for (const auto& [key, row] : grad.rows()) {
      const std::span<double> logits = params.Logits(key);
      const std::size_t offset =
          static_cast<std::size_t>(logits.data() - flat.data());
      for (std::size_t a = 0; a < row.size(); ++a) dense[offset + a] = row[a];
    }
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t j = 0; j < dense.size(); ++j) {
      m_[j] = kBeta1 * m_[j] + (1.0 - kBeta1) * dense[j];
      v_[j] = kBeta2 * v_[j] + (1.0 - kBeta2) * dense[j] * dense[j];
      flat[j] += config_.learning_rate * (m_[j] / c1) /
                 (std::sqrt(v_[j] / c2) + kEps);
    }
  }

 private:
  const TrainConfig& config_;
  std::vector<double> m_;
  std::vector<double> v_;
  int t_ = 0;
};

CurveRecord Summarize(const Batch& batch, const GradientEstimate& estimate,
                      bool has_frozen) {
  CurveRecord record;
  record.step = batch.step;
  double learner_sum = 0.0;
  double learner_rounds = 0.0;
  double collective_sum = 0.0;
  double collective_rounds = 0.0;
  double frozen_sum = 0.0;
  double frozen_rounds = 0.0;
  int buffer_groups = 0;
  for (const CrnGroup& group : batch.groups) {
    if (!group.self_play && !has_frozen) ++buffer_groups;
    const auto learners = LearnerSeats(group);
    for (const Trajectory& traj : group.episodes) {
      const int rounds = traj.spec.rounds;
      for (int seat = 0; seat < kNumSeats; ++seat) {
        double total = 0.0;
        for (const Step& step : traj.steps[seat]) total += step.reward;
        collective_sum += total;
        if (learners[seat]) {
          learner_sum += total;
          learner_rounds += rounds;
        } else if (has_frozen) {
          frozen_sum += total;
          frozen_rounds += rounds;
        }
      }
      collective_rounds += rounds;
    }
  }
  record.mean_reward = learner_rounds > 0 ? learner_sum / learner_rounds : 0.0;
  record.collective_reward =
      collective_rounds > 0 ? collective_sum / collective_rounds : 0.0;
  if (has_frozen && frozen_rounds > 0) {
    record.frozen_reward = frozen_sum / frozen_rounds;
  }
  record.entropy = estimate.mean_entropy;
  record.grad_norm = estimate.gradient.Norm();
  record.buffer_fraction =
      batch.groups.empty()
          ? 0.0
          : static_cast<double>(buffer_groups) / batch.groups.size();
  return record;
}

std::string CheckpointPath(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

TrainResult RunTraining(const TrainConfig& config, const PolicyHandle& frozen,
                        const TrainHooks& hooks) {
  ValidateConfig(config);
  if (frozen && frozen->space().env() != config.env) {
    throw ConfigError("frozen policy " + frozen->name() + " is for " +
                      std::string(EnvName(frozen->space().env())));
  }
  TrainResult result{InitialParams(config), {}, {}, false, {}};
  PolicyParams& params = result.params;
  if (hooks.initial_params) {
    if (!(hooks.initial_params->space() == params.space())) {
      throw ConfigError("initial policy does not match the configured "
                        "observation space");
    }
    params = *hooks.initial_params;
  }
  AgentBuffer buffer(config.buffer_capacity, config.buffer_cadence);
  OptimizerState optimizer(config, params.flat().size());
  if (hooks.checkpoint_dir) {
    std::filesystem::create_directories(*hooks.checkpoint_dir);
  }
  for (int step = 0; step < config.steps; ++step) {
    const Batch batch = CollectBatch(config, params, buffer, step, frozen);
    GradientEstimate estimate;
    try {
      estimate = ComputeStepGradient(batch, config, params);
    } catch (const StepAborted& e) {
      result.aborted = true;
      result.abort_message = e.what();
      break;
    }
    optimizer.Apply(estimate.gradient, params);
    if (!frozen && config.algorithm == Algorithm::kAdAlign) {
      buffer.MaybePush(params, step);
    }
    const CurveRecord record = Summarize(batch, estimate, frozen != nullptr);
    result.curve.records.push_back(record);
    if (hooks.on_step) hooks.on_step(record);
    if (config.eval_every > 0 && (step + 1) % config.eval_every == 0) {
      if (hooks.probe) {
        for (ProbeRecord& probe : hooks.probe(step, params)) {
          probe.step = step;
          result.curve.probes.push_back(std::move(probe));
        }
      }
      if (hooks.checkpoint_dir) {
        const std::string path = CheckpointPath(
            *hooks.checkpoint_dir, "step_" + std::to_string(step + 1) + ".policy");
        SavePolicy(params, path);
        result.checkpoints.push_back(path);
      }
    }
  }
  if (hooks.checkpoint_dir) {
    const std::string path = CheckpointPath(*hooks.checkpoint_dir, "final.policy");
    SavePolicy(params, path);
    result.checkpoints.push_back(path);
  }
  return result;
}

std::string FormatNumber(double value) {
  if (std::isnan(value)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

}  // namespace

TrainResult Train(const TrainConfig& config, const TrainHooks& hooks) {
  return RunTraining(config, nullptr, hooks);
}

TrainResult TrainVsFrozen(const TrainConfig& config,
                          const PolicyHandle& frozen,
                          const TrainHooks& hooks) {
  if (!frozen) throw InvalidArgument("TrainVsFrozen needs a frozen policy");
  return RunTraining(config, frozen, hooks);
}

void WriteCurveCsv(const TrainingCurve& curve, std::ostream& out) {
  out << "step,mean_reward,collective_reward,entropy,grad_norm,"
         "buffer_fraction,frozen_reward\n";
  for (const CurveRecord& r : curve.records) {
    out << r.step << ',' << FormatNumber(r.mean_reward) << ','
        << FormatNumber(r.collective_reward) << ',' << FormatNumber(r.entropy)
        << ',' << FormatNumber(r.grad_norm) << ','
        << FormatNumber(r.buffer_fraction) << ','
        << FormatNumber(r.frozen_reward) << '\n';
  }
}

void WriteProbeCsv(const TrainingCurve& curve, std::ostream& out) {
  out << "step,probe,value\n";
  for (const ProbeRecord& p : curve.probes) {
    out << p.step << ',' << p.name << ',' << FormatNumber(p.value) << '\n';
  }
}

}  // namespace socdil
