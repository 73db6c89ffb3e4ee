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

#include "socdil/config.h"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "socdil/errors.h"

#ifndef SOCDIL_SOURCE_CONFIG_DIR
#define SOCDIL_SOURCE_CONFIG_DIR ""
#endif

namespace socdil {

namespace {

std::string_view Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string FormatDouble(double value) {
  // Shortest text that reads back to the same double.
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

double ParseDouble(std::string_view key, std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError("invalid number for " + std::string(key) + ": '" + s +
                      "'");
  }
  return value;
}

template <typename Int>
Int ParseInteger(std::string_view key, std::string_view text) {
  Int value{};
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("invalid integer for " + std::string(key) + ": '" +
                      std::string(text) + "'");
  }
  return value;
}

bool ParseBool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") {
    return true;
  }
  if (text == "false" || text == "0" || text == "no" || text == "off") {
    return false;
  }
  throw ConfigError("invalid boolean for " + std::string(key) + ": '" +
                    std::string(text) + "'");
}

std::vector<std::string_view> SplitList(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = Trim(text.substr(
        pos, comma == std::string_view::npos ? text.size() - pos
                                             : comma - pos));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<double> ParseDoubleList(std::string_view key,
                                    std::string_view text) {
  std::vector<double> out;
  for (std::string_view item : SplitList(text)) {
    out.push_back(ParseDouble(key, item));
  }
  if (out.empty()) throw ConfigError(std::string(key) + " must not be empty");
  return out;
}

template <typename T, typename F>
std::string JoinList(const std::vector<T>& values, F format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += format(values[i]);
  }
  return out;
}

struct Field {
  const char* name;  // section.key
  std::function<void(RunConfig&, std::string_view key, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SOCDIL_DOUBLE_FIELD(NAME, MEMBER)                                  \
  Field {                                                                  \
    NAME,                                                                  \
        [](RunConfig& c, std::string_view k, std::string_view v) {         \
          c.MEMBER = ParseDouble(k, v);                                    \
        },                                                                 \
        [](const RunConfig& c) { return FormatDouble(c.MEMBER); }          \
  }
#define SOCDIL_INT_FIELD(NAME, MEMBER)                                     \
  Field {                                                                  \
    NAME,                                                                  \
        [](RunConfig& c, std::string_view k, std::string_view v) {         \
          c.MEMBER = ParseInteger<int>(k, v);                              \
        },                                                                 \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }        \
  }
#define SOCDIL_BOOL_FIELD(NAME, MEMBER)                                    \
  Field {                                                                  \
    NAME,                                                                  \
        [](RunConfig& c, std::string_view k, std::string_view v) {         \
          c.MEMBER = ParseBool(k, v);                                      \
        },                                                                 \
        [](const RunConfig& c) {                                           \
          return std::string(c.MEMBER ? "true" : "false");                 \
        }                                                                  \
  }

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      {"game.env",
       [](RunConfig& c, std::string_view, std::string_view v) {
         c.train.env = ParseEnvId(v);
       },
       [](const RunConfig& c) { return std::string(EnvName(c.train.env)); }},
      SOCDIL_INT_FIELD("game.rounds", train.rounds),
      SOCDIL_INT_FIELD("game.ipd_memory", train.obs.ipd_memory),
      SOCDIL_BOOL_FIELD("game.ipd_grim_bit", train.obs.ipd_grim_bit),
      SOCDIL_DOUBLE_FIELD("game.split_greedy_threshold",
                          train.obs.split_greedy_threshold),
      SOCDIL_DOUBLE_FIELD("game.tas_greedy_threshold",
                          train.obs.tas_greedy_threshold),
      SOCDIL_BOOL_FIELD("game.tas_excuse_after_own_lie",
                        train.obs.tas_excuse_after_own_lie),
      {"game.split_levels",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.train.grid.split_levels = ParseDoubleList(k, v);
       },
       [](const RunConfig& c) {
         return JoinList(c.train.grid.split_levels, FormatDouble);
       }},
      {"game.tas_levels",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.train.grid.tas_levels = ParseDoubleList(k, v);
       },
       [](const RunConfig& c) {
         return JoinList(c.train.grid.tas_levels, FormatDouble);
       }},
      {"training.algorithm",
       [](RunConfig& c, std::string_view, std::string_view v) {
         c.train.algorithm = ParseAlgorithm(v);
       },
       [](const RunConfig& c) {
         return std::string(AlgorithmName(c.train.algorithm));
       }},
      SOCDIL_INT_FIELD("training.batch_size", train.batch_size),
      SOCDIL_INT_FIELD("training.group_size", train.group_size),
      SOCDIL_DOUBLE_FIELD("training.gamma", train.gamma),
      SOCDIL_DOUBLE_FIELD("training.beta", train.beta),
      SOCDIL_DOUBLE_FIELD("training.rho", train.rho),
      SOCDIL_BOOL_FIELD("training.outer_gamma", train.outer_gamma),
      {"training.optimizer",
       [](RunConfig& c, std::string_view, std::string_view v) {
         c.train.optimizer = ParseOptimizer(v);
       },
       [](const RunConfig& c) {
         return std::string(OptimizerName(c.train.optimizer));
       }},
      SOCDIL_DOUBLE_FIELD("training.learning_rate", train.learning_rate),
      SOCDIL_DOUBLE_FIELD("training.entropy_coef", train.entropy_coef),
      SOCDIL_DOUBLE_FIELD("training.kl_coef", train.kl_coef),
      SOCDIL_DOUBLE_FIELD("training.reward_norm", train.reward_norm),
      SOCDIL_DOUBLE_FIELD("training.honest_message_prior",
                          train.honest_message_prior),
      SOCDIL_INT_FIELD("training.steps", train.steps),
      {"training.seed",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.train.seed = ParseInteger<std::uint64_t>(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.train.seed); }},
      SOCDIL_INT_FIELD("training.threads", train.threads),
      SOCDIL_INT_FIELD("buffer.capacity", train.buffer_capacity),
      SOCDIL_INT_FIELD("buffer.cadence", train.buffer_cadence),
      SOCDIL_INT_FIELD("evaluation.eval_every", train.eval_every),
      SOCDIL_INT_FIELD("evaluation.eval_games", train.eval_games),
      SOCDIL_DOUBLE_FIELD("evaluation.exploit_threshold", exploit_threshold),
      {"evaluation.learner_seeds",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.learner_seeds.clear();
         for (std::string_view item : SplitList(v)) {
           c.learner_seeds.push_back(ParseInteger<std::uint64_t>(k, item));
         }
       },
       [](const RunConfig& c) {
         return JoinList(c.learner_seeds,
                         [](std::uint64_t s) { return std::to_string(s); });
       }},
      {"frozen.policy",
       [](RunConfig& c, std::string_view, std::string_view v) {
         c.frozen = std::string(v);
       },
       [](const RunConfig& c) { return c.frozen; }},
  };
  return fields;
}

#undef SOCDIL_DOUBLE_FIELD
#undef SOCDIL_INT_FIELD
#undef SOCDIL_BOOL_FIELD

const Field* FindField(std::string_view name) {
  for (const Field& f : Fields()) {
    if (name == f.name) return &f;
  }
  return nullptr;
}

std::string ValidKeyList() {
  std::string out;
  for (const Field& f : Fields()) {
    if (!out.empty()) out += ", ";
    out += f.name;
  }
  return out;
}

std::string_view SectionOf(std::string_view name) {
  return name.substr(0, name.find('.'));
}

std::string_view KeyOf(std::string_view name) {
  const auto dot = name.find('.');
  return dot == std::string_view::npos ? name : name.substr(dot + 1);
}

bool KnownSection(std::string_view section) {
  for (const Field& f : Fields()) {
    if (SectionOf(f.name) == section) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> out;
  for (const Field& f : Fields()) out.emplace_back(f.name);
  return out;
}

ConfigAssignments ParseConfigText(std::istream& in, std::string_view source) {
  ConfigAssignments out;
  std::string section;
  std::string line;
  int number = 0;
  auto where = [&] {
    return std::string(source) + ":" + std::to_string(number) + ": ";
  };
  while (std::getline(in, line)) {
    ++number;
    std::string_view text = line;
    const auto comment = text.find_first_of("#;");
    if (comment != std::string_view::npos) text = text.substr(0, comment);
    text = Trim(text);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(where() + "malformed section");
      section = std::string(Trim(text.substr(1, text.size() - 2)));
      if (section != "run" && !KnownSection(section)) {
        throw ConfigError(where() + "unknown section [" + section +
                          "] (valid: game, training, buffer, evaluation, "
                          "frozen)");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where() + "expected 'key = value'");
    }
    if (section.empty()) {
      throw ConfigError(where() + "assignment outside a section");
    }
    if (section == "run") continue;
    const std::string key =
        section + "." + std::string(Trim(text.substr(0, eq)));
    if (FindField(key) == nullptr) {
      throw ConfigError(where() + "unknown key '" + key +
                        "' (valid keys: " + ValidKeyList() + ")");
    }
    out.emplace_back(key, std::string(Trim(text.substr(eq + 1))));
  }
  return out;
}

std::pair<std::string, std::string> ParseOverride(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(text) +
                      "' is not of the form key=value");
  }
  const std::string key(Trim(text.substr(0, eq)));
  const std::string value(Trim(text.substr(eq + 1)));
  if (FindField(key) != nullptr) return {key, value};
  const Field* match = nullptr;
  for (const Field& f : Fields()) {
    if (KeyOf(f.name) == key) {
      if (match != nullptr) {
        throw ConfigError("override key '" + key +
                          "' is ambiguous; use section.key");
      }
      match = &f;
    }
  }
  if (match == nullptr) {
    throw ConfigError("unknown key '" + key + "' (valid keys: " +
                      ValidKeyList() + ")");
  }
  return {match->name, value};
}

RunConfig ResolveRunConfig(const ConfigAssignments& assignments) {
  RunConfig probe;
  for (const auto& [key, value] : assignments) {
    if (key == "game.env" || key == "training.algorithm") {
      FindField(key)->set(probe, key, value);
    }
  }
  RunConfig config;
  config.train =
      DefaultTrainConfig(probe.train.env, probe.train.algorithm);
  for (const auto& [key, value] : assignments) {
    const Field* field = FindField(key);
    if (field == nullptr) {
      throw ConfigError("unknown key '" + key + "' (valid keys: " +
                        ValidKeyList() + ")");
    }
    field->set(config, key, value);
  }
  ValidateConfig(config.train);
  return config;
}

std::string FindConfigFile(const std::string& path_or_preset) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(path_or_preset)) return path_or_preset;
  std::vector<std::string> dirs;
  if (const char* env = std::getenv("SOCDIL_CONFIG_DIR")) dirs.push_back(env);
  if (*SOCDIL_SOURCE_CONFIG_DIR) dirs.push_back(SOCDIL_SOURCE_CONFIG_DIR);
  for (const std::string& dir : dirs) {
    const fs::path candidate = fs::path(dir) / (path_or_preset + ".ini");
    if (fs::is_regular_file(candidate)) return candidate.string();
  }
  throw ConfigError("config file or preset '" + path_or_preset +
                    "' not found");
}

RunConfig LoadRunConfig(const std::string& path_or_preset,
                        const std::vector<std::string>& overrides) {
  const std::string path = FindConfigFile(path_or_preset);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  ConfigAssignments assignments = ParseConfigText(in, path);
  for (const std::string& o : overrides) {
    assignments.push_back(ParseOverride(o));
  }
  return ResolveRunConfig(assignments);
}

PolicyHandle ResolvePolicy(const std::string& entry, EnvId env,
                           const ActionGrid& grid) {
  std::optional<BuiltinName> builtin;
  try {
    builtin = ParseBuiltinName(entry);
  } catch (const ConfigError&) {
  }
  if (builtin) return MakeBuiltinPolicy(*builtin, env, grid);
  if (!std::filesystem::is_regular_file(entry)) {
    throw ConfigError("cannot resolve policy '" + entry +
                      "': not a builtin name or an existing checkpoint");
  }
  PolicyParams params = [&] {
    try {
      return LoadPolicy(entry);
    } catch (const std::exception& e) {
      throw ConfigError("cannot load checkpoint '" + entry + "': " + e.what());
    }
  }();
  if (params.space().env() != env) {
    throw ConfigError("checkpoint '" + entry + "' is for " +
                      std::string(EnvName(params.space().env())) + ", not " +
                      std::string(EnvName(env)));
  }
  return MakeTabularPolicy(params, entry);
}

void WriteRunConfig(const RunConfig& config, std::ostream& out) {
  std::string section;
  for (const Field& f : Fields()) {
    const std::string s(SectionOf(f.name));
    if (s != section) {
      if (!section.empty()) out << '\n';
      out << '[' << s << "]\n";
      section = s;
    }
    out << KeyOf(f.name) << " = " << f.get(config) << '\n';
  }
}

}  // namespace socdil
