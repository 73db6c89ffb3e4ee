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

#include "cli.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"
#include "socdil/config.h"
#include "socdil/errors.h"
#include "socdil/evaluation.h"
#include "socdil/training.h"

namespace socdil {
namespace {

namespace fs = std::filesystem;

constexpr const char* kToolVersion = "socdil 1.0.0";

std::string Timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// --run-dir wins; otherwise <root>/<name>_<timestamp> with root taken from
// --out, then $SOCDIL_OUT, then ./runs.
fs::path OutputDir(const std::string& run_dir, const std::string& out_root,
                   const std::string& name) {
  if (!run_dir.empty()) return run_dir;
  std::string root = out_root;
  if (root.empty()) {
    const char* env = std::getenv("SOCDIL_OUT");
    root = env != nullptr && *env != '\0' ? env : "runs";
  }
  return fs::path(root) / (name + "_" + Timestamp());
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

// Written with status "incomplete" before any work starts and rewritten on
// exit. The [run] section is ignored when the file is loaded as a config.
class Manifest {
 public:
  Manifest(fs::path dir, std::string command)
      : path_(std::move(dir) / "manifest.ini") {
    Set("command", std::move(command));
    Set("tool_version", kToolVersion);
    Set("started", Timestamp());
  }

  void Set(const std::string& key, std::string value) {
    for (auto& [k, v] : fields_) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    fields_.emplace_back(key, std::move(value));
  }
  void SetConfig(const RunConfig& config) { config_ = config; }

  void Write(const std::string& status) {
    Set("status", status);
    if (status != "incomplete") Set("finished", Timestamp());
    std::ostringstream text;
    text << "[run]\n";
    for (const auto& [k, v] : fields_) text << k << " = " << v << '\n';
    if (config_) {
      text << '\n';
      WriteRunConfig(*config_, text);
    }
    WriteFile(path_, text.str());
  }

 private:
  fs::path path_;
  std::vector<std::pair<std::string, std::string>> fields_;
  std::optional<RunConfig> config_;
};

std::vector<std::string> ReadRoster(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open roster file " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(begin, end - begin + 1));
  }
  if (out.empty()) throw ConfigError("roster file " + path + " is empty");
  return out;
}

// Flattens a probe document into metric,value rows.
void WriteJsonAsCsv(const nlohmann::json& doc, std::ostream& out) {
  out << "metric,value\n";
  for (const auto& [key, value] : doc.items()) {
    if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        out << key << '[' << i << "]," << value[i].dump() << '\n';
      }
    } else if (!value.is_object()) {
      out << key << ',' << (value.is_string() ? value.get<std::string>()
                                              : value.dump())
          << '\n';
    }
  }
}

std::string SeedList(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(seeds[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands.

struct CommonOut {
  std::string out_root;
  std::string run_dir;
};

void AddOutputOptions(CLI::App* cmd, CommonOut& opts) {
  cmd->add_option("--out", opts.out_root,
                  "Output root (default: $SOCDIL_OUT, else ./runs)");
  cmd->add_option("--run-dir", opts.run_dir,
                  "Exact output directory (overrides --out)");
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> overrides;
  CommonOut output;
  bool quiet = false;
};

int CmdTrain(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  const RunConfig rc = LoadRunConfig(args.config, args.overrides);
  const TrainConfig& config = rc.train;
  PolicyHandle frozen;
  if (!rc.frozen.empty()) frozen = ResolvePolicy(rc.frozen, config.env, config.grid);

  const fs::path dir = OutputDir(
      args.output.run_dir, args.output.out_root,
      std::string(EnvName(config.env)) + "_" +
          Lower(AlgorithmName(config.algorithm)) + "_" +
          std::to_string(config.seed));
  fs::create_directories(dir);
  Manifest manifest(dir, "train");
  manifest.SetConfig(rc);
  manifest.Set("config_source", FindConfigFile(args.config));
  manifest.Set("seeds", std::to_string(config.seed));
  manifest.Set("artifacts",
               "curve.csv, probes.csv, checkpoints/final.policy");
  manifest.Write("incomplete");

  TrainHooks hooks;
  hooks.checkpoint_dir = (dir / "checkpoints").string();
  if (config.eval_every > 0) hooks.probe = TrainingProbes(config);
  const int report_every = std::max(1, config.steps / 10);
  if (!args.quiet) {
    hooks.on_step = [&](const CurveRecord& r) {
      if ((r.step + 1) % report_every != 0) return;
      out << "step " << r.step + 1 << "/" << config.steps
          << "  mean " << r.mean_reward << "  collective "
          << r.collective_reward << "  entropy " << r.entropy << '\n';
    };
  }
  const TrainResult result =
      frozen ? TrainVsFrozen(config, frozen, hooks) : Train(config, hooks);

  std::ostringstream curve, probes;
  WriteCurveCsv(result.curve, curve);
  WriteProbeCsv(result.curve, probes);
  WriteFile(dir / "curve.csv", curve.str());
  WriteFile(dir / "probes.csv", probes.str());
  if (result.aborted) {
    manifest.Set("abort", result.abort_message);
    manifest.Write("aborted");
    err << "error: training aborted: " << result.abort_message << '\n';
    return kExitAborted;
  }
  manifest.Write("complete");
  out << "run directory: " << dir.string() << '\n';
  return kExitOk;
}

struct MatrixArgs {
  std::string roster;
  std::string env;
  int games = 100;
  std::uint64_t seed = 0;
  int rounds = 10;
  int threads = 0;
  bool traces = false;
  CommonOut output;
};

int CmdMatrix(const MatrixArgs& args, std::ostream& out) {
  const EnvId env = ParseEnvId(args.env);
  if (args.games < 1) throw ConfigError("number of games must be >= 1");
  const std::vector<std::string> entries = ReadRoster(args.roster);
  std::vector<PolicyHandle> roster;
  for (const std::string& e : entries) roster.push_back(ResolvePolicy(e, env));

  const fs::path dir =
      OutputDir(args.output.run_dir, args.output.out_root,
                "matrix_" + std::string(EnvName(env)) + "_" +
                    std::to_string(args.seed));
  fs::create_directories(dir);
  Manifest manifest(dir, "matrix");
  manifest.Set("roster", args.roster);
  manifest.Set("entries", [&] {
    std::string s;
    for (const auto& e : entries) s += (s.empty() ? "" : ", ") + e;
    return s;
  }());
  manifest.Set("env", std::string(EnvName(env)));
  manifest.Set("games", std::to_string(args.games));
  manifest.Set("rounds", std::to_string(args.rounds));
  manifest.Set("seeds", std::to_string(args.seed));
  manifest.Set("artifacts", "matrix.csv, pairs.csv, report.json");
  manifest.Write("incomplete");

  const CrossPlayReport report = CrossPlay(
      roster, env, args.games, args.rounds, args.seed, args.threads,
      args.traces);
  std::ostringstream matrix, pairs;
  WriteCrossPlayMatrixCsv(report, matrix);
  WriteCrossPlayPairsCsv(report, pairs);
  WriteFile(dir / "matrix.csv", matrix.str());
  WriteFile(dir / "pairs.csv", pairs.str());
  WriteFile(dir / "report.json", ToJson(report).dump(2) + "\n");
  manifest.Write("complete");
  out << matrix.str() << "run directory: " << dir.string() << '\n';
  return kExitOk;
}

struct ProbeArgs {
  std::string policy;
  std::string probe;
  int games = 256;
  std::uint64_t seed = 0;
  int rounds = 10;
  int trigger = 2;
  int threads = 0;
  CommonOut output;
};

int CmdProbe(const ProbeArgs& args, std::ostream& out) {
  if (args.games < 1) throw ConfigError("number of games must be >= 1");
  EnvId env;
  if (args.probe == "reciprocity") {
    env = EnvId::kIpd;
  } else if (args.probe == "grim" || args.probe == "split_efficiency") {
    env = EnvId::kSplitNoComm;
  } else if (args.probe == "tas_behavior") {
    env = EnvId::kTrustAndSplit;
  } else {
    throw ConfigError("unknown probe '" + args.probe +
                      "' (valid: reciprocity, grim, split_efficiency, "
                      "tas_behavior)");
  }
  const PolicyHandle policy = ResolvePolicy(args.policy, env);

  const fs::path dir = OutputDir(args.output.run_dir, args.output.out_root,
                                 "probe_" + args.probe + "_" +
                                     std::to_string(args.seed));
  fs::create_directories(dir);
  Manifest manifest(dir, "probe");
  manifest.Set("policy", args.policy);
  manifest.Set("probe", args.probe);
  manifest.Set("games", std::to_string(args.games));
  manifest.Set("rounds", std::to_string(args.rounds));
  manifest.Set("seeds", std::to_string(args.seed));
  manifest.Set("artifacts", "probe.json, probe.csv");
  manifest.Write("incomplete");

  nlohmann::json doc;
  if (args.probe == "reciprocity") {
    doc = ToJson(ReciprocityProbeIpd(*policy, args.games, args.seed,
                                     args.rounds));
  } else if (args.probe == "grim") {
    doc = ToJson(GrimProbeSplit(*policy, args.games, args.seed, args.rounds,
                                args.trigger));
  } else if (args.probe == "split_efficiency") {
    doc = ToJson(SplitEfficiencyProbe(*policy, args.games, args.seed,
                                      args.rounds, args.threads));
  } else {
    doc = ToJson(TasBehaviorProbe(*policy, args.games, args.seed, args.rounds,
                                  args.threads));
  }
  doc["probe"] = args.probe;
  doc["policy"] = policy->name();
  std::ostringstream csv;
  WriteJsonAsCsv(doc, csv);
  WriteFile(dir / "probe.json", doc.dump(2) + "\n");
  WriteFile(dir / "probe.csv", csv.str());
  manifest.Write("complete");
  out << doc.dump(2) << "\nrun directory: " << dir.string() << '\n';
  return kExitOk;
}

struct ExploitArgs {
  std::string frozen;
  std::string config;
  std::vector<std::string> overrides;
  CommonOut output;
};

int CmdExploit(const ExploitArgs& args, std::ostream& out) {
  RunConfig rc = LoadRunConfig(args.config, args.overrides);
  rc.frozen = args.frozen;
  const PolicyHandle frozen =
      ResolvePolicy(args.frozen, rc.train.env, rc.train.grid);
  ExploitConfig config;
  config.learner = rc.train;
  config.learner_seeds = rc.learner_seeds;
  config.threshold = rc.exploit_threshold;
  config.eval_games = rc.train.eval_games;
  config.eval_seed = rc.train.seed;
  config.threads = rc.train.threads;

  const fs::path dir = OutputDir(
      args.output.run_dir, args.output.out_root,
      "exploit_" + std::string(EnvName(rc.train.env)) + "_" +
          Lower(AlgorithmName(rc.train.algorithm)) + "_" +
          std::to_string(rc.train.seed));
  fs::create_directories(dir);
  Manifest manifest(dir, "exploit");
  manifest.SetConfig(rc);
  manifest.Set("seeds", SeedList(rc.learner_seeds));
  manifest.Set("artifacts", "report.json, curves.csv");
  manifest.Write("incomplete");

  const ExploitabilityReport report = ExploitabilityReportFor(frozen, config);
  std::ostringstream curves;
  WriteExploitCurvesCsv(report, curves);
  WriteFile(dir / "curves.csv", curves.str());
  WriteFile(dir / "report.json", ToJson(report).dump(2) + "\n");
  manifest.Write("complete");
  out << "self-play level " << report.self_play_level << '\n';
  for (const ExploitRun& run : report.runs) {
    out << "seed " << run.seed << "  frozen " << run.frozen_final
        << "  learner " << run.learner_final << "  drop " << run.drop
        << (run.exploited ? "  exploited" : "") << '\n';
  }
  out << "verdict: " << report.verdict() << "\nrun directory: "
      << dir.string() << '\n';
  return kExitOk;
}

struct TranscriptArgs {
  std::vector<std::string> policies;
  std::string env;
  int games = 1;
  std::uint64_t seed = 0;
  int rounds = 10;
  std::string output;
};

int CmdTranscript(const TranscriptArgs& args, std::ostream& out) {
  const EnvId env = ParseEnvId(args.env);
  if (args.games < 1) throw ConfigError("number of games must be >= 1");
  const PolicyHandle first = ResolvePolicy(args.policies[0], env);
  const PolicyHandle second = ResolvePolicy(args.policies[1], env);
  std::ofstream file;
  if (!args.output.empty()) {
    file.open(args.output, std::ios::binary);
    if (!file) throw ConfigError("cannot write " + args.output);
  }
  std::ostream& sink = args.output.empty() ? out : file;
  for (int g = 0; g < args.games; ++g) {
    const Trajectory traj = RunEpisode(
        EvaluationEpisode(env, args.rounds, args.seed, g), *first, *second);
    WriteTranscript(traj, {&first->space(), &second->space()}, g, sink);
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Multi-agent policy-gradient training and evaluation on "
               "social dilemma games",
               "socdil"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  TrainArgs train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train a policy from a config file");
  train_cmd
      ->add_option("--config", train.config,
                   "Config file or preset name (e.g. ipd_adalign)")
      ->required();
  train_cmd->add_option("--override", train.overrides,
                        "key=value or section.key=value (repeatable)");
  train_cmd->add_flag("--quiet", train.quiet, "No progress lines");
  AddOutputOptions(train_cmd, train.output);

  MatrixArgs matrix;
  CLI::App* matrix_cmd = app.add_subcommand(
      "matrix", "Cross-play matrix over a roster of policies");
  matrix_cmd
      ->add_option("--roster", matrix.roster,
                   "File with one builtin name or checkpoint path per line")
      ->required();
  matrix_cmd->add_option("--env", matrix.env, "ipd, split or trust_and_split")
      ->required();
  matrix_cmd->add_option("-n,--games", matrix.games, "Games per pair");
  matrix_cmd->add_option("--seed", matrix.seed, "Master seed");
  matrix_cmd->add_option("--rounds", matrix.rounds, "Rounds per game");
  matrix_cmd->add_option("--threads", matrix.threads, "0 = all cores");
  matrix_cmd->add_flag("--traces", matrix.traces,
                       "Include per-round reward traces in report.json");
  AddOutputOptions(matrix_cmd, matrix.output);

  ProbeArgs probe;
  CLI::App* probe_cmd =
      app.add_subcommand("probe", "Behavioral probe of one policy");
  probe_cmd
      ->add_option("--policy", probe.policy, "Checkpoint path or builtin name")
      ->required();
  probe_cmd
      ->add_option("--probe", probe.probe,
                   "reciprocity, grim, split_efficiency or tas_behavior")
      ->required();
  probe_cmd->add_option("-n,--games", probe.games, "Number of games");
  probe_cmd->add_option("--seed", probe.seed, "Master seed");
  probe_cmd->add_option("--rounds", probe.rounds, "Rounds per game");
  probe_cmd->add_option("--trigger", probe.trigger,
                        "Defection round of the grim probe");
  probe_cmd->add_option("--threads", probe.threads, "0 = all cores");
  AddOutputOptions(probe_cmd, probe.output);

  ExploitArgs exploit;
  CLI::App* exploit_cmd = app.add_subcommand(
      "exploit", "Train fresh learners against a frozen policy");
  exploit_cmd
      ->add_option("--frozen", exploit.frozen,
                   "Checkpoint path or builtin name")
      ->required();
  exploit_cmd
      ->add_option("--config", exploit.config,
                   "Learner config file or preset name")
      ->required();
  exploit_cmd->add_option("--override", exploit.overrides,
                          "key=value (repeatable)");
  AddOutputOptions(exploit_cmd, exploit.output);

  TranscriptArgs transcript;
  CLI::App* transcript_cmd = app.add_subcommand(
      "transcript", "Play games and print one JSON line per decision");
  transcript_cmd
      ->add_option("--policies", transcript.policies,
                   "Seat 0 and seat 1 policies")
      ->required()
      ->expected(2);
  transcript_cmd
      ->add_option("--env", transcript.env, "ipd, split or trust_and_split")
      ->required();
  transcript_cmd->add_option("-n,--games", transcript.games, "Games");
  transcript_cmd->add_option("--seed", transcript.seed, "Master seed");
  transcript_cmd->add_option("--rounds", transcript.rounds, "Rounds per game");
  transcript_cmd->add_option("-o,--output", transcript.output,
                             "Output file (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*train_cmd) return CmdTrain(train, out, err);
    if (*matrix_cmd) return CmdMatrix(matrix, out);
    if (*probe_cmd) return CmdProbe(probe, out);
    if (*exploit_cmd) return CmdExploit(exploit, out);
    if (*transcript_cmd) return CmdTranscript(transcript, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const StepAborted& e) {
    err << "error: step " << e.step() << " aborted: " << e.what() << '\n';
    return kExitAborted;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace socdil
