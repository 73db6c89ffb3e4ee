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

#ifndef SOCDIL_CONFIG_H_
#define SOCDIL_CONFIG_H_

// Run configuration files: flat "key = value" lines grouped in sections
//
//   [game]        env, rounds, encoder options, proposal grids
//   [training]    algorithm, optimizer and estimator settings, seed
//   [buffer]      capacity, cadence
//   [evaluation]  cadence, games, exploitability rule
//   [frozen]      policy (checkpoint path or builtin name)
//
// '#' and ';' start comments. A [run] section (written into manifests) is
// ignored on load. Keys not given take DefaultTrainConfig(env, algorithm),
// so env and algorithm are resolved first.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "socdil/training.h"

namespace socdil {

struct RunConfig {
  TrainConfig train;
  // Empty for self-play training; otherwise a checkpoint path or builtin.
  std::string frozen;
  double exploit_threshold = 0.15;
  std::vector<std::uint64_t> learner_seeds = {1, 2, 3};

  bool operator==(const RunConfig&) const = default;
};

// Raw (section.key, value) assignments in file order.
using ConfigAssignments = std::vector<std::pair<std::string, std::string>>;

// Every accepted key as "section.key".
std::vector<std::string> ConfigKeys();

// Parses the file format. Throws ConfigError with the source name and line
// for syntax errors and unknown sections or keys.
ConfigAssignments ParseConfigText(std::istream& in, std::string_view source);

// "key=value" or "section.key=value"; a bare key must be unambiguous.
std::pair<std::string, std::string> ParseOverride(std::string_view text);

// Applies defaults for the resolved env and algorithm, then every
// assignment in order. Throws ConfigError naming the offending key.
RunConfig ResolveRunConfig(const ConfigAssignments& assignments);

// Loads a file (see FindConfigFile) and applies "key=value" overrides.
RunConfig LoadRunConfig(const std::string& path_or_preset,
                        const std::vector<std::string>& overrides = {});

// A path that exists is returned as is. Otherwise a preset name such as
// "ipd_adalign" is looked up as <dir>/<name>.ini in $SOCDIL_CONFIG_DIR and
// then in the source tree's configs/ directory. Throws ConfigError.
std::string FindConfigFile(const std::string& path_or_preset);

// A builtin name (ALWAYS_COOP, TFT, ...) or a checkpoint path. Throws
// ConfigError naming the entry when it resolves to neither, or when the
// policy belongs to another environment.
PolicyHandle ResolvePolicy(const std::string& entry, EnvId env,
                           const ActionGrid& grid = {});

// Writes every key with its resolved value; reading the output back
// yields an equal RunConfig.
void WriteRunConfig(const RunConfig& config, std::ostream& out);

}  // namespace socdil

#endif  // SOCDIL_CONFIG_H_
