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

#include "socdil/game.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "socdil/errors.h"

namespace socdil {

namespace {

// Inverse-CDF draw from a validated distribution.
int SampleAction(std::span<const double> probs, Rng& rng,
                 const Policy& policy) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) {
      throw InternalError("policy " + policy.name() +
                          " produced a negative or NaN probability");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "policy " << policy.name() << " produced probabilities summing to "
        << total;
    throw InternalError(msg.str());
  }
  const double u = rng.Uniform();
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (probs[a] <= 0.0) continue;
    last_positive = static_cast<int>(a);
    cumulative += probs[a];
    if (u < cumulative) return static_cast<int>(a);
  }
  return last_positive;
}

class Seats {
 public:
  Seats(const EpisodeSpec& spec, const Policy& first, const Policy& second)
      : policies_{&first, &second},
        rngs_{Rng(spec.action_seeds[0]), Rng(spec.action_seeds[1])} {
    for (const Policy* p : policies_) {
      if (p->space().env() != spec.env) {
        throw ConfigError("policy " + p->name() + " is for " +
                          std::string(EnvName(p->space().env())) +
                          ", episode is " + std::string(EnvName(spec.env)));
      }
    }
    if (!(first.space().grid() == second.space().grid())) {
      throw ConfigError("seats disagree on the proposal grid");
    }
    scratch_.resize(first.space().MaxActionCount());
  }

  const ObsSpace& space(int seat) const { return policies_[seat]->space(); }

  // Encodes, queries the policy and samples. Returns (key, action).
  std::pair<ObsKey, int> Decide(const DecisionPoint& point) {
    const Policy& policy = *policies_[point.seat];
    const ObsKey key = EncodeDecision(policy.space(), point);
    std::span<double> probs(scratch_.data(), policy.space().ActionCount(key));
    policy.ActionProbs(point, key, probs);
    return {key, SampleAction(probs, rngs_[point.seat], policy)};
  }

 private:
  std::array<const Policy*, kNumSeats> policies_;
  std::array<Rng, kNumSeats> rngs_;
  std::vector<double> scratch_;
};

void RunIpd(const EpisodeSpec& spec, Seats& seats, Trajectory& traj) {
  std::vector<IpdRound> rounds;
  rounds.reserve(spec.rounds);
  for (int r = 0; r < spec.rounds; ++r) {
    IpdRound round;
    std::array<ObsKey, kNumSeats> keys;
    for (int seat = 0; seat < kNumSeats; ++seat) {
      DecisionPoint point;
      point.seat = seat;
      point.round = r;
      point.ipd_history = rounds;
      const auto [key, action] = seats.Decide(point);
      keys[seat] = key;
      round.actions[seat] = static_cast<IpdAction>(action);
    }
    const auto [p0, p1] = IpdPayoff(round.actions[0], round.actions[1]);
    round.payoffs = {p0, p1};
    for (int seat = 0; seat < kNumSeats; ++seat) {
      traj.steps[seat].push_back({keys[seat],
                                  static_cast<int>(round.actions[seat]),
                                  round.payoffs[seat], r, Phase::kAct});
    }
    rounds.push_back(round);
  }
  traj.rounds = std::move(rounds);
}

void RunSplit(const EpisodeSpec& spec, Seats& seats, Trajectory& traj) {
  std::vector<SplitRound> rounds;
  rounds.reserve(spec.rounds);
  for (int r = 0; r < spec.rounds; ++r) {
    SplitRound round;
    Rng env_rng = RoundStream(spec.env_seed, r);
    const ItemValuePair values = SampleItemValues(env_rng);
    round.values = {values.first, values.second};
    std::array<std::pair<ObsKey, int>, kNumSeats> decisions;
    for (int seat = 0; seat < kNumSeats; ++seat) {
      DecisionPoint point;
      point.seat = seat;
      point.round = r;
      point.split_history = rounds;
      point.split_current = &round;
      decisions[seat] = seats.Decide(point);
    }
    for (int seat = 0; seat < kNumSeats; ++seat) {
      round.proposals[seat] =
          seats.space(seat).SplitProposal(decisions[seat].second);
    }
    ScoreSplitRound(round);
    for (int seat = 0; seat < kNumSeats; ++seat) {
      traj.steps[seat].push_back({decisions[seat].first,
                                  decisions[seat].second,
                                  round.payoffs[seat], r, Phase::kAct});
    }
    rounds.push_back(round);
  }
  traj.rounds = std::move(rounds);
}

void RunTas(const EpisodeSpec& spec, Seats& seats, Trajectory& traj) {
  std::vector<TasRound> rounds;
  rounds.reserve(spec.rounds);
  for (int r = 0; r < spec.rounds; ++r) {
    TasRound round;
    Rng env_rng = RoundStream(spec.env_seed, r);
    const HandDeal deal = SampleHands(env_rng);
    round.hands = deal.hands;
    round.upper_seat = deal.upper_seat;
    round.first_speaker = r % kNumSeats;

    std::array<std::pair<ObsKey, int>, kNumSeats> messages;
    for (int i = 0; i < kNumSeats; ++i) {
      const int seat = (round.first_speaker + i) % kNumSeats;
      DecisionPoint point;
      point.seat = seat;
      point.round = r;
      point.phase = Phase::kMessage;
      point.tas_history = rounds;
      point.tas_current = &round;
      messages[seat] = seats.Decide(point);
      round.messages[seat] = static_cast<Message>(messages[seat].second);
    }
    std::array<std::pair<ObsKey, int>, kNumSeats> proposals;
    for (int seat = 0; seat < kNumSeats; ++seat) {
      DecisionPoint point;
      point.seat = seat;
      point.round = r;
      point.phase = Phase::kProposal;
      point.tas_history = rounds;
      point.tas_current = &round;
      proposals[seat] = seats.Decide(point);
    }
    for (int seat = 0; seat < kNumSeats; ++seat) {
      round.proposals[seat] =
          seats.space(seat).TasProposal(proposals[seat].second);
    }
    ScoreTasRound(round);
    for (int seat = 0; seat < kNumSeats; ++seat) {
      traj.steps[seat].push_back({messages[seat].first,
                                  messages[seat].second, 0.0, r,
                                  Phase::kMessage});
      traj.steps[seat].push_back({proposals[seat].first,
                                  proposals[seat].second,
                                  round.payoffs[seat], r, Phase::kProposal});
    }
    rounds.push_back(round);
  }
  traj.rounds = std::move(rounds);
}

}  // namespace

int StepsPerRound(EnvId env) { return env == EnvId::kTrustAndSplit ? 2 : 1; }

std::vector<double> Trajectory::RoundRewards(int seat) const {
  std::vector<double> out(spec.rounds, 0.0);
  for (const Step& step : steps[seat]) out[step.round] += step.reward;
  return out;
}

Trajectory RunEpisode(const EpisodeSpec& spec, const Policy& first,
                      const Policy& second) {
  if (spec.rounds < 1) throw InvalidArgument("rounds must be positive");
  Seats seats(spec, first, second);
  Trajectory traj;
  traj.spec = spec;
  traj.policy_names = {first.name(), second.name()};
  const int length = spec.rounds * StepsPerRound(spec.env);
  for (auto& seq : traj.steps) seq.reserve(length);
  switch (spec.env) {
    case EnvId::kIpd:
      RunIpd(spec, seats, traj);
      break;
    case EnvId::kSplitNoComm:
      RunSplit(spec, seats, traj);
      break;
    case EnvId::kTrustAndSplit:
      RunTas(spec, seats, traj);
      break;
  }
  return traj;
}

std::vector<EpisodeSpec> MakeCrnBatch(EnvId env, int rounds, int batch_size,
                                      int group_size,
                                      std::uint64_t master_seed) {
  if (group_size < 2) {
    throw InvalidArgument("CRN group size must be at least 2");
  }
  if (batch_size < group_size || batch_size % group_size != 0) {
    throw InvalidArgument("CRN group size must divide the batch size");
  }
  std::vector<EpisodeSpec> specs(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    EpisodeSpec& spec = specs[i];
    spec.env = env;
    spec.rounds = rounds;
    spec.crn_group = i / group_size;
    spec.env_seed =
        DeriveSeed(master_seed, SeedTag::kEnvironment, spec.crn_group);
    spec.action_seeds = {
        DeriveSeed(master_seed, SeedTag::kAction, 2 * std::uint64_t(i)),
        DeriveSeed(master_seed, SeedTag::kAction, 2 * std::uint64_t(i) + 1)};
  }
  return specs;
}

std::vector<double> DiscountedReturns(const std::vector<double>& round_rewards,
                                      double gamma, double norm_constant) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw InvalidArgument("gamma must lie in (0, 1]");
  }
  if (!(norm_constant > 0.0)) {
    throw InvalidArgument("reward normalization constant must be positive");
  }
  std::vector<double> out(round_rewards.size(), 0.0);
  double next = 0.0;
  for (std::size_t r = round_rewards.size(); r-- > 0;) {
    next = round_rewards[r] / norm_constant + gamma * next;
    out[r] = next;
  }
  return out;
}

ReturnSeries ReturnsToGo(const Trajectory& traj, double gamma,
                         double norm_constant) {
  ReturnSeries out;
  for (int seat = 0; seat < kNumSeats; ++seat) {
    out.by_round[seat] =
        DiscountedReturns(traj.RoundRewards(seat), gamma, norm_constant);
    out.by_step[seat].reserve(traj.steps[seat].size());
    for (const Step& step : traj.steps[seat]) {
      out.by_step[seat].push_back(out.by_round[seat][step.round]);
    }
  }
  return out;
}

void ParallelFor(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) {
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    const int begin = n * w / threads;
    const int end = n * (w + 1) / threads;
    workers.emplace_back([&, begin, end] {
      try {
        for (int i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace socdil
