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

#include "socdil/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>

#include "socdil/errors.h"
#include "socdil/rng.h"

namespace socdil {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void CheckGames(int n_games) {
  if (n_games < 1) throw ConfigError("number of games must be >= 1");
}

void CheckRounds(int rounds) {
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
}

void CheckEnv(const Policy& policy, EnvId env) {
  if (policy.space().env() != env) {
    throw ConfigError("policy " + policy.name() + " is for " +
                      std::string(EnvName(policy.space().env())) + ", not " +
                      std::string(EnvName(env)));
  }
}

double Ratio(double num, double den) { return den > 0.0 ? num / den : kNaN; }

// Formats for CSV; NaN becomes an empty field.
std::string Num(double value) {
  if (std::isnan(value)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

nlohmann::json JsonNumber(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

// Scripted Split No-Comm opponent: cooperates except in one round.
class TriggerSplitPolicy final : public Policy {
 public:
  TriggerSplitPolicy(PolicyHandle coop, PolicyHandle defect, int trigger)
      : coop_(std::move(coop)), defect_(std::move(defect)), trigger_(trigger) {}

  const ObsSpace& space() const override { return coop_->space(); }
  std::string name() const override { return "COOP_DEFECT_ONCE"; }
  void ActionProbs(const DecisionPoint& point, ObsKey key,
                   std::span<double> probs) const override {
    const Policy& which = point.round == trigger_ ? *defect_ : *coop_;
    which.ActionProbs(point, key, probs);
  }

 private:
  PolicyHandle coop_;
  PolicyHandle defect_;
  int trigger_;
};

double MeanStderr(const std::vector<double>& values, double mean) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kAct:
      return "act";
    case Phase::kMessage:
      return "message";
    case Phase::kProposal:
      return "proposal";
  }
  return "?";
}

}  // namespace

EpisodeSpec EvaluationEpisode(EnvId env, int rounds, std::uint64_t stream_seed,
                              int index) {
  const auto i = static_cast<std::uint64_t>(index);
  EpisodeSpec spec;
  spec.env = env;
  spec.rounds = rounds;
  spec.crn_group = index;
  spec.env_seed = DeriveSeed(stream_seed, SeedTag::kEnvironment, i);
  spec.action_seeds = {DeriveSeed(stream_seed, SeedTag::kAction, 2 * i),
                       DeriveSeed(stream_seed, SeedTag::kAction, 2 * i + 1)};
  return spec;
}

// ---------------------------------------------------------------------------
// Cross-play.

CrossPlayReport CrossPlay(std::span<const PolicyHandle> roster, EnvId env,
                          int n_games, int rounds, std::uint64_t master_seed,
                          int threads, bool per_round_traces) {
  if (roster.empty()) throw ConfigError("cross-play roster is empty");
  CheckGames(n_games);
  CheckRounds(rounds);
  for (const PolicyHandle& p : roster) {
    if (!p) throw ConfigError("cross-play roster has a null policy");
    CheckEnv(*p, env);
  }
  CrossPlayReport report;
  report.env = env;
  report.rounds = rounds;
  report.n_games = n_games;
  report.master_seed = master_seed;
  for (const PolicyHandle& p : roster) report.roster.push_back(p->name());

  const int size = static_cast<int>(roster.size());
  for (int row = 0; row < size; ++row) {
    for (int col = 0; col < size; ++col) {
      const std::uint64_t stream = DeriveSeed(
          master_seed, SeedTag::kPair,
          static_cast<std::uint64_t>(row) * roster.size() + col);
      std::vector<Trajectory> games(n_games);
      ParallelFor(n_games, threads, [&](int g) {
        games[g] = RunEpisode(EvaluationEpisode(env, rounds, stream, g),
                              *roster[row], *roster[col]);
      });
      PairResult pair;
      pair.row = row;
      pair.col = col;
      pair.n_games = n_games;
      if (per_round_traces) pair.per_round.assign(rounds, {0.0, 0.0});
      for (int seat = 0; seat < kNumSeats; ++seat) {
        // Totals are summed before the single division, so integer payoffs
        // give correctly rounded (exact where representable) means.
        std::vector<double> per_game(n_games);
        double grand_total = 0.0;
        for (int g = 0; g < n_games; ++g) {
          const std::vector<double> r = games[g].RoundRewards(seat);
          double total = 0.0;
          for (int t = 0; t < rounds; ++t) {
            total += r[t];
            if (per_round_traces) pair.per_round[t][seat] += r[t];
          }
          grand_total += total;
          per_game[g] = total / rounds;
        }
        if (per_round_traces) {
          for (auto& slot : pair.per_round) slot[seat] /= n_games;
        }
        const double mean =
            grand_total / (static_cast<double>(n_games) * rounds);
        pair.mean[seat] = mean;
        pair.stderr_[seat] = MeanStderr(per_game, mean);
      }
      for (const Trajectory& t : games) pair.env_seeds.push_back(t.spec.env_seed);
      report.pairs.push_back(std::move(pair));
    }
  }
  return report;
}

void WriteCrossPlayMatrixCsv(const CrossPlayReport& report, std::ostream& out) {
  out << "row\\col";
  for (const std::string& name : report.roster) out << ',' << name;
  out << '\n';
  for (std::size_t row = 0; row < report.roster.size(); ++row) {
    out << report.roster[row];
    for (std::size_t col = 0; col < report.roster.size(); ++col) {
      out << ',' << Num(report.at(row, col).mean[0]);
    }
    out << '\n';
  }
}

void WriteCrossPlayPairsCsv(const CrossPlayReport& report, std::ostream& out) {
  out << "row,col,mean_row,mean_col,stderr_row,stderr_col,n_games\n";
  for (const PairResult& p : report.pairs) {
    out << report.roster[p.row] << ',' << report.roster[p.col] << ','
        << Num(p.mean[0]) << ',' << Num(p.mean[1]) << ','
        << Num(p.stderr_[0]) << ',' << Num(p.stderr_[1]) << ',' << p.n_games
        << '\n';
  }
}

nlohmann::json ToJson(const CrossPlayReport& report) {
  nlohmann::json j;
  j["env"] = EnvName(report.env);
  j["rounds"] = report.rounds;
  j["n_games"] = report.n_games;
  j["master_seed"] = report.master_seed;
  j["roster"] = report.roster;
  nlohmann::json pairs = nlohmann::json::array();
  for (const PairResult& p : report.pairs) {
    nlohmann::json e;
    e["row"] = report.roster[p.row];
    e["col"] = report.roster[p.col];
    e["mean"] = {JsonNumber(p.mean[0]), JsonNumber(p.mean[1])};
    e["stderr"] = {JsonNumber(p.stderr_[0]), JsonNumber(p.stderr_[1])};
    e["n_games"] = p.n_games;
    e["env_seeds"] = p.env_seeds;
    if (!p.per_round.empty()) {
      nlohmann::json trace = nlohmann::json::array();
      for (const auto& r : p.per_round) trace.push_back({r[0], r[1]});
      e["per_round"] = std::move(trace);
    }
    pairs.push_back(std::move(e));
  }
  j["pairs"] = std::move(pairs);
  return j;
}

// ---------------------------------------------------------------------------
// Probes.

ReciprocityStats ReciprocityProbeIpd(const Policy& policy, int n_games,
                                     std::uint64_t master_seed, int rounds) {
  CheckEnv(policy, EnvId::kIpd);
  CheckGames(n_games);
  CheckRounds(rounds);
  const PolicyHandle random = MakeUniformPolicy(ObsSpace(EnvId::kIpd));
  double first_coop = 0.0;
  int dd = 0;
  int cc = 0;
  ReciprocityStats stats;
  stats.n_games = n_games;
  for (int g = 0; g < n_games; ++g) {
    const Trajectory traj = RunEpisode(
        EvaluationEpisode(EnvId::kIpd, rounds, master_seed, g), policy,
        *random);
    const auto& log = std::get<std::vector<IpdRound>>(traj.rounds);
    if (log[0].actions[0] == IpdAction::kCooperate) first_coop += 1.0;
    for (int t = 1; t < rounds; ++t) {
      const bool own_defects = log[t].actions[0] == IpdAction::kDefect;
      if (log[t - 1].actions[1] == IpdAction::kDefect) {
        ++stats.after_defect_count;
        dd += own_defects ? 1 : 0;
      } else {
        ++stats.after_coop_count;
        cc += own_defects ? 0 : 1;
      }
    }
  }
  stats.first_round_coop = first_coop / n_games;
  stats.defect_after_defect = Ratio(dd, stats.after_defect_count);
  stats.coop_after_coop = Ratio(cc, stats.after_coop_count);
  return stats;
}

GrimStats GrimProbeSplit(const Policy& policy, int n_games,
                         std::uint64_t master_seed, int rounds,
                         int trigger_round) {
  CheckEnv(policy, EnvId::kSplitNoComm);
  CheckGames(n_games);
  CheckRounds(rounds);
  if (trigger_round < 0 || trigger_round >= rounds - 1) {
    throw InvalidArgument("trigger round must leave at least one later round");
  }
  const ActionGrid& grid = policy.space().grid();
  const TriggerSplitPolicy opponent(
      MakeBuiltinPolicy(BuiltinName::kAlwaysCoop, EnvId::kSplitNoComm, grid),
      MakeBuiltinPolicy(BuiltinName::kAlwaysDefect, EnvId::kSplitNoComm, grid),
      trigger_round);
  GrimStats stats;
  stats.n_games = n_games;
  stats.trigger_round = trigger_round;
  stats.greedy_rate.assign(rounds, 0.0);
  for (int g = 0; g < n_games; ++g) {
    const Trajectory traj = RunEpisode(
        EvaluationEpisode(EnvId::kSplitNoComm, rounds, master_seed, g), policy,
        opponent);
    const auto& log = std::get<std::vector<SplitRound>>(traj.rounds);
    for (int t = 0; t < rounds; ++t) {
      // Seat 1 judging seat 0's round-t proposal.
      if (policy.space().SplitLabel(log[t], 1) == OpponentLabel::kGreedy) {
        stats.greedy_rate[t] += 1.0;
      }
    }
  }
  double before = 0.0;
  double after = 0.0;
  for (int t = 0; t < rounds; ++t) {
    stats.greedy_rate[t] /= n_games;
    (t <= trigger_round ? before : after) += stats.greedy_rate[t];
  }
  stats.before = before / (trigger_round + 1);
  stats.after = after / (rounds - trigger_round - 1);
  return stats;
}

TasBehaviorStats TasBehaviorProbe(const Policy& policy, int n_games,
                                  std::uint64_t master_seed, int rounds,
                                  int threads) {
  CheckEnv(policy, EnvId::kTrustAndSplit);
  CheckGames(n_games);
  CheckRounds(rounds);
  std::vector<Trajectory> games(n_games);
  ParallelFor(n_games, threads, [&](int g) {
    games[g] = RunEpisode(
        EvaluationEpisode(EnvId::kTrustAndSplit, rounds, master_seed, g),
        policy, policy);
  });
  double upper = 0.0;
  double lower = 0.0;
  double honest = 0.0;
  double collective = 0.0;
  for (const Trajectory& traj : games) {
    for (const TasRound& r : std::get<std::vector<TasRound>>(traj.rounds)) {
      for (int seat = 0; seat < kNumSeats; ++seat) {
        (seat == r.upper_seat ? upper : lower) += r.proposals[seat];
        if (*r.messages[seat] == HonestMessage(r.hands[seat])) honest += 1.0;
        collective += r.payoffs[seat];
      }
    }
  }
  const double seat_rounds = static_cast<double>(n_games) * rounds;
  TasBehaviorStats stats;
  stats.n_games = n_games;
  stats.proposal_upper = upper / seat_rounds;
  stats.proposal_lower = lower / seat_rounds;
  stats.honesty = honest / (2.0 * seat_rounds);
  stats.collective = collective / seat_rounds;
  return stats;
}

SplitEfficiency SplitEfficiencyProbe(const Policy& policy, int n_games,
                                     std::uint64_t master_seed, int rounds,
                                     int threads) {
  CheckEnv(policy, EnvId::kSplitNoComm);
  CheckGames(n_games);
  CheckRounds(rounds);
  std::vector<Trajectory> games(n_games);
  ParallelFor(n_games, threads, [&](int g) {
    games[g] = RunEpisode(
        EvaluationEpisode(EnvId::kSplitNoComm, rounds, master_seed, g), policy,
        policy);
  });
  double self = 0.0;
  double coop = 0.0;
  double defect = 0.0;
  for (const Trajectory& traj : games) {
    for (const SplitRound& r : std::get<std::vector<SplitRound>>(traj.rounds)) {
      self += r.payoffs[0] + r.payoffs[1];
      for (int k = 0; k < kNumCategories; ++k) {
        const double a = r.values[0][k];
        const double b = r.values[1][k];
        coop += a == b ? kItemQuantity * a : kItemQuantity * std::max(a, b);
        const auto [qa, qb] =
            SplitAllocation(kItemQuantity, kItemQuantity, kItemQuantity);
        defect += a * qa + b * qb;
      }
    }
  }
  const double n = static_cast<double>(n_games) * rounds;
  SplitEfficiency stats;
  stats.n_games = n_games;
  stats.self_play = self / n;
  stats.full_coop = coop / n;
  stats.mutual_defection = defect / n;
  stats.efficiency = (stats.self_play - stats.mutual_defection) /
                     (stats.full_coop - stats.mutual_defection);
  stats.raw_ratio = stats.self_play / stats.full_coop;
  return stats;
}

std::function<std::vector<ProbeRecord>(int, const PolicyParams&)>
TrainingProbes(const TrainConfig& config) {
  const EnvId env = config.env;
  const int games = config.eval_games;
  const int rounds = config.rounds;
  const int threads = config.threads;
  const std::uint64_t root = DeriveSeed(config.seed, SeedTag::kEvaluation, 0);
  return [=](int step, const PolicyParams& params) {
    const TabularPolicy policy(std::make_shared<PolicyParams>(params),
                               "current");
    const std::uint64_t seed = DeriveSeed(root, SeedTag::kStep, step);
    std::vector<ProbeRecord> out;
    auto add = [&](const char* name, double value) {
      out.push_back(ProbeRecord{step, name, value});
    };
    switch (env) {
      case EnvId::kIpd: {
        const ReciprocityStats r =
            ReciprocityProbeIpd(policy, games, seed, rounds);
        add("defect_after_defect", r.defect_after_defect);
        add("coop_after_coop", r.coop_after_coop);
        add("first_round_coop", r.first_round_coop);
        break;
      }
      case EnvId::kSplitNoComm: {
        const SplitEfficiency e =
            SplitEfficiencyProbe(policy, games, seed, rounds, threads);
        add("self_play", e.self_play);
        add("efficiency", e.efficiency);
        break;
      }
      case EnvId::kTrustAndSplit: {
        const TasBehaviorStats t =
            TasBehaviorProbe(policy, games, seed, rounds, threads);
        add("proposal_upper", t.proposal_upper);
        add("proposal_lower", t.proposal_lower);
        add("honesty", t.honesty);
        add("collective", t.collective);
        break;
      }
    }
    return out;
  };
}

nlohmann::json ToJson(const ReciprocityStats& s) {
  return {{"probe", "reciprocity"},
          {"n_games", s.n_games},
          {"defect_after_defect", JsonNumber(s.defect_after_defect)},
          {"coop_after_coop", JsonNumber(s.coop_after_coop)},
          {"first_round_coop", JsonNumber(s.first_round_coop)},
          {"after_defect_count", s.after_defect_count},
          {"after_coop_count", s.after_coop_count}};
}

nlohmann::json ToJson(const GrimStats& s) {
  return {{"probe", "grim"},
          {"n_games", s.n_games},
          {"trigger_round", s.trigger_round},
          {"greedy_rate", s.greedy_rate},
          {"before", JsonNumber(s.before)},
          {"after", JsonNumber(s.after)}};
}

nlohmann::json ToJson(const TasBehaviorStats& s) {
  return {{"probe", "tas_behavior"},
          {"n_games", s.n_games},
          {"proposal_upper", JsonNumber(s.proposal_upper)},
          {"proposal_lower", JsonNumber(s.proposal_lower)},
          {"honesty", JsonNumber(s.honesty)},
          {"collective", JsonNumber(s.collective)}};
}

nlohmann::json ToJson(const SplitEfficiency& s) {
  return {{"probe", "split_efficiency"},
          {"n_games", s.n_games},
          {"self_play", JsonNumber(s.self_play)},
          {"full_coop", JsonNumber(s.full_coop)},
          {"mutual_defection", JsonNumber(s.mutual_defection)},
          {"efficiency", JsonNumber(s.efficiency)},
          {"raw_ratio", JsonNumber(s.raw_ratio)}};
}

// ---------------------------------------------------------------------------
// Exploitability.

double FrozenSeatReward(const Policy& frozen, const Policy& other, int n_games,
                        int rounds, std::uint64_t master_seed, int threads) {
  CheckGames(n_games);
  CheckRounds(rounds);
  const EnvId env = frozen.space().env();
  CheckEnv(other, env);
  std::vector<double> per_game(n_games, 0.0);
  ParallelFor(n_games, threads, [&](int g) {
    const int seat = g % kNumSeats;
    const EpisodeSpec spec = EvaluationEpisode(env, rounds, master_seed, g);
    const Trajectory traj = seat == 0 ? RunEpisode(spec, frozen, other)
                                      : RunEpisode(spec, other, frozen);
    for (double r : traj.RoundRewards(seat)) per_game[g] += r;
  });
  double total = 0.0;
  for (double v : per_game) total += v;
  return total / (static_cast<double>(n_games) * rounds);
}

ExploitabilityReport ExploitabilityReportFor(const PolicyHandle& frozen,
                                             const ExploitConfig& config) {
  if (!frozen) throw ConfigError("exploitability needs a frozen policy");
  if (config.learner_seeds.size() < 3) {
    throw ConfigError("exploitability needs at least 3 learner seeds");
  }
  if (!(config.threshold >= 0.0)) {
    throw ConfigError("exploit threshold must be >= 0");
  }
  CheckGames(config.eval_games);
  CheckEnv(*frozen, config.learner.env);

  ExploitabilityReport report;
  report.frozen_name = frozen->name();
  report.env = config.learner.env;
  report.threshold = config.threshold;
  const int rounds = config.learner.rounds;
  report.self_play_level =
      FrozenSeatReward(*frozen, *frozen, config.eval_games, rounds,
                       config.eval_seed, config.threads);
  const double scale = std::max(std::abs(report.self_play_level), 1e-12);

  for (std::uint64_t seed : config.learner_seeds) {
    TrainConfig learner_config = config.learner;
    learner_config.seed = seed;
    const TrainResult result = TrainVsFrozen(learner_config, frozen);
    const PolicyHandle learner =
        MakeTabularPolicy(result.params, "learner@" + std::to_string(seed));
    ExploitRun run;
    run.seed = seed;
    run.aborted = result.aborted;
    for (const CurveRecord& r : result.curve.records) {
      run.frozen_curve.push_back(r.frozen_reward);
    }
    run.frozen_final = FrozenSeatReward(*frozen, *learner, config.eval_games,
                                        rounds, config.eval_seed,
                                        config.threads);
    run.learner_final = FrozenSeatReward(*learner, *frozen, config.eval_games,
                                         rounds, config.eval_seed,
                                         config.threads);
    run.drop = (report.self_play_level - run.frozen_final) / scale;
    run.exploited = run.drop > config.threshold;
    report.exploited_runs += run.exploited ? 1 : 0;
    report.runs.push_back(std::move(run));
  }
  report.exploitable =
      2 * report.exploited_runs > static_cast<int>(report.runs.size());
  return report;
}

nlohmann::json ToJson(const ExploitabilityReport& report) {
  nlohmann::json runs = nlohmann::json::array();
  for (const ExploitRun& r : report.runs) {
    runs.push_back({{"seed", r.seed},
                    {"frozen_final", JsonNumber(r.frozen_final)},
                    {"learner_final", JsonNumber(r.learner_final)},
                    {"drop", JsonNumber(r.drop)},
                    {"exploited", r.exploited},
                    {"aborted", r.aborted}});
  }
  return {{"frozen", report.frozen_name},
          {"env", EnvName(report.env)},
          {"self_play_level", JsonNumber(report.self_play_level)},
          {"threshold", report.threshold},
          {"exploited_runs", report.exploited_runs},
          {"verdict", report.verdict()},
          {"runs", std::move(runs)}};
}

void WriteExploitCurvesCsv(const ExploitabilityReport& report,
                           std::ostream& out) {
  out << "seed,step,frozen_reward\n";
  for (const ExploitRun& r : report.runs) {
    for (std::size_t step = 0; step < r.frozen_curve.size(); ++step) {
      out << r.seed << ',' << step << ',' << Num(r.frozen_curve[step]) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Transcripts.

void WriteTranscript(const Trajectory& traj,
                     const std::array<const ObsSpace*, kNumSeats>& spaces,
                     int game, std::ostream& out) {
  const int per_round = StepsPerRound(traj.spec.env);
  const auto* tas = std::get_if<std::vector<TasRound>>(&traj.rounds);
  auto emit = [&](int seat, const Step& step) {
    const ObsSpace& space = *spaces[seat];
    nlohmann::json line = {{"game", game},
                           {"round", step.round},
                           {"phase", PhaseName(step.phase)},
                           {"seat", seat},
                           {"key", space.KeyName(step.key)},
                           {"action", space.ActionName(step.key, step.action)},
                           {"reward", step.reward}};
    out << line.dump() << '\n';
  };
  for (int r = 0; r < traj.spec.rounds; ++r) {
    for (int sub = 0; sub < per_round; ++sub) {
      const int index = r * per_round + sub;
      // Messages are logged in speaking order, simultaneous moves by seat.
      const int first =
          tas != nullptr && sub == 0 ? (*tas)[r].first_speaker : 0;
      for (int i = 0; i < kNumSeats; ++i) {
        const int seat = (first + i) % kNumSeats;
        emit(seat, traj.steps[seat][index]);
      }
    }
  }
}

}  // namespace socdil
