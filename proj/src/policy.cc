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

#include "socdil/policy.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "socdil/errors.h"

namespace socdil {

ObsKey EncodeDecision(const ObsSpace& space, const DecisionPoint& point) {
  switch (space.env()) {
    case EnvId::kIpd:
      return space.EncodeIpd(point.ipd_history, point.seat);
    case EnvId::kSplitNoComm:
      if (point.split_current == nullptr) {
        throw InternalError("split decision without a current round");
      }
      return space.EncodeSplit(*point.split_current, point.split_history,
                               point.seat);
    case EnvId::kTrustAndSplit:
      if (point.tas_current == nullptr) {
        throw InternalError("trust-and-split decision without a current round");
      }
      return space.EncodeTas(*point.tas_current, point.phase,
                             point.tas_history, point.seat);
  }
  throw InternalError("unknown environment");
}

// ---------------------------------------------------------------------------
// PolicyParams

PolicyParams::PolicyParams(ObsSpace space) : space_(std::move(space)) {
  offsets_.reserve(space_.KeyCount() + 1);
  std::size_t offset = 0;
  for (int i = 0; i < space_.KeyCount(); ++i) {
    offsets_.push_back(offset);
    offset += space_.ActionCount(ObsKey{static_cast<std::uint32_t>(i)});
  }
  offsets_.push_back(offset);
  logits_.assign(offset, 0.0);
}

void PolicyParams::CheckKey(ObsKey key) const {
  if (key.index >= static_cast<std::uint32_t>(space_.KeyCount())) {
    throw InvalidArgument("observation key out of range for " +
                          std::string(EnvName(space_.env())));
  }
}

std::span<double> PolicyParams::Logits(ObsKey key) {
  CheckKey(key);
  return std::span<double>(logits_).subspan(
      offsets_[key.index], offsets_[key.index + 1] - offsets_[key.index]);
}

std::span<const double> PolicyParams::Logits(ObsKey key) const {
  CheckKey(key);
  return std::span<const double>(logits_).subspan(
      offsets_[key.index], offsets_[key.index + 1] - offsets_[key.index]);
}

void PolicyParams::Probs(ObsKey key, std::span<double> out) const {
  const std::span<const double> logits = Logits(key);
  if (out.size() != logits.size()) {
    throw InvalidArgument("probability buffer has the wrong size");
  }
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t a = 0; a < logits.size(); ++a) {
    out[a] = std::exp(logits[a] - max_logit);
    total += out[a];
  }
  for (double& p : out) p /= total;
}

std::vector<double> ActionDistribution(const PolicyParams& params,
                                       ObsKey key) {
  std::vector<double> probs(params.space().ActionCount(key));
  params.Probs(key, probs);
  return probs;
}

// ---------------------------------------------------------------------------
// SparseGradient

std::vector<double>& SparseGradient::RowFor(ObsKey key, std::size_t size) {
  auto [it, inserted] = rows_.try_emplace(key);
  if (inserted) {
    it->second.assign(size, 0.0);
  } else if (it->second.size() != size) {
    throw InvalidArgument("gradient row size mismatch");
  }
  return it->second;
}

void SparseGradient::AddScaled(ObsKey key, std::span<const double> values,
                               double scale) {
  std::vector<double>& row = RowFor(key, values.size());
  for (std::size_t a = 0; a < values.size(); ++a) row[a] += scale * values[a];
}

void SparseGradient::AddLogProb(ObsKey key, int action,
                                std::span<const double> probs, double scale) {
  if (action < 0 || static_cast<std::size_t>(action) >= probs.size()) {
    throw InvalidArgument("action index out of range");
  }
  std::vector<double>& row = RowFor(key, probs.size());
  for (std::size_t a = 0; a < probs.size(); ++a) row[a] -= scale * probs[a];
  row[action] += scale;
}

void SparseGradient::AddEntropy(ObsKey key, std::span<const double> probs,
                                double scale) {
  // dH/dz_a = -p_a (log p_a + H).
  const double entropy = Entropy(probs);
  std::vector<double>& row = RowFor(key, probs.size());
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (probs[a] > 0.0) {
      row[a] -= scale * probs[a] * (std::log(probs[a]) + entropy);
    }
  }
}

SparseGradient& SparseGradient::operator+=(const SparseGradient& other) {
  for (const auto& [key, values] : other.rows_) AddScaled(key, values, 1.0);
  return *this;
}

SparseGradient& SparseGradient::operator*=(double scale) {
  for (auto& [key, row] : rows_) {
    for (double& v : row) v *= scale;
  }
  return *this;
}

std::span<const double> SparseGradient::Row(ObsKey key) const {
  const auto it = rows_.find(key);
  if (it == rows_.end()) return {};
  return it->second;
}

double SparseGradient::Norm() const {
  double total = 0.0;
  for (const auto& [key, row] : rows_) {
    for (double v : row) total += v * v;
  }
  return std::sqrt(total);
}

bool SparseGradient::AllFinite() const {
  for (const auto& [key, row] : rows_) {
    for (double v : row) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void SparseGradient::ApplyTo(PolicyParams& params, double step_size) const {
  for (const auto& [key, row] : rows_) {
    std::span<double> logits = params.Logits(key);
    if (logits.size() != row.size()) {
      throw InvalidArgument("gradient does not match policy shape");
    }
    for (std::size_t a = 0; a < row.size(); ++a) logits[a] += step_size * row[a];
  }
}

SparseGradient LogProbGradient(const PolicyParams& params, ObsKey key,
                               int action) {
  const std::vector<double> probs = ActionDistribution(params, key);
  SparseGradient grad;
  grad.AddLogProb(key, action, probs, 1.0);
  return grad;
}

double Entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Policy handles

TabularPolicy::TabularPolicy(std::shared_ptr<const PolicyParams> params,
                             std::string name)
    : params_(std::move(params)), name_(std::move(name)) {
  if (!params_) throw InvalidArgument("tabular policy without parameters");
}

void TabularPolicy::ActionProbs(const DecisionPoint& /*point*/, ObsKey key,
                                std::span<double> probs) const {
  params_->Probs(key, probs);
}

PolicyHandle MakeTabularPolicy(const PolicyParams& params, std::string name) {
  return std::make_shared<TabularPolicy>(
      std::make_shared<const PolicyParams>(params), std::move(name));
}

namespace {

class UniformPolicy final : public Policy {
 public:
  explicit UniformPolicy(ObsSpace space) : space_(std::move(space)) {}
  const ObsSpace& space() const override { return space_; }
  std::string name() const override { return "UNIFORM"; }
  void ActionProbs(const DecisionPoint&, ObsKey,
                   std::span<double> probs) const override {
    std::fill(probs.begin(), probs.end(), 1.0 / probs.size());
  }

 private:
  ObsSpace space_;
};

int LevelIndex(const std::vector<double>& levels, double value) {
  const auto it = std::find(levels.begin(), levels.end(), value);
  if (it == levels.end()) {
    std::ostringstream msg;
    msg << "builtin split policy needs proposal level " << value
        << " in split_levels";
    throw ConfigError(msg.str());
  }
  return static_cast<int>(it - levels.begin());
}

class BuiltinPolicy final : public Policy {
 public:
  BuiltinPolicy(BuiltinName name, ObsSpace space)
      : name_(name), space_(std::move(space)) {
    if (space_.env() == EnvId::kSplitNoComm) {
      const auto& levels = space_.grid().split_levels;
      zero_ = LevelIndex(levels, 0.0);
      half_ = LevelIndex(levels, 5.0);
      full_ = LevelIndex(levels, 10.0);
    }
  }

  const ObsSpace& space() const override { return space_; }
  std::string name() const override {
    return std::string(BuiltinNameString(name_));
  }

  void ActionProbs(const DecisionPoint&, ObsKey key,
                   std::span<double> probs) const override {
    std::fill(probs.begin(), probs.end(), 0.0);
    probs[Choose(key)] = 1.0;
  }

 private:
  int Choose(ObsKey key) const {
    constexpr int kC = static_cast<int>(IpdAction::kCooperate);
    constexpr int kD = static_cast<int>(IpdAction::kDefect);
    if (space_.env() == EnvId::kIpd) {
      switch (name_) {
        case BuiltinName::kAlwaysCoop:
          return kC;
        case BuiltinName::kAlwaysDefect:
          return kD;
        case BuiltinName::kTitForTat: {
          const IpdKeyView view = space_.DecodeIpd(key);
          if (!view.recent.front()) return kC;
          return static_cast<int>(view.recent.front()->second);
        }
        case BuiltinName::kGrim:
          return space_.DecodeIpd(key).opponent_ever_defected ? kD : kC;
      }
    }
    // Split No-Comm.
    const SplitKeyView view = space_.DecodeSplit(key);
    std::array<int, kNumCategories> levels{};
    for (int k = 0; k < kNumCategories; ++k) {
      if (name_ == BuiltinName::kAlwaysDefect) {
        levels[k] = full_;
      } else {
        switch (view.relations[k]) {
          case CategoryRelation::kMineHigher:
            levels[k] = full_;
            break;
          case CategoryRelation::kEqual:
            levels[k] = half_;
            break;
          case CategoryRelation::kMineLower:
            levels[k] = zero_;
            break;
        }
      }
    }
    return space_.SplitAction(levels);
  }

  BuiltinName name_;
  ObsSpace space_;
  int zero_ = 0;
  int half_ = 0;
  int full_ = 0;
};

}  // namespace

PolicyHandle MakeUniformPolicy(const ObsSpace& space) {
  return std::make_shared<UniformPolicy>(space);
}

std::string_view BuiltinNameString(BuiltinName name) {
  switch (name) {
    case BuiltinName::kAlwaysCoop:
      return "ALWAYS_COOP";
    case BuiltinName::kAlwaysDefect:
      return "ALWAYS_DEFECT";
    case BuiltinName::kTitForTat:
      return "TIT_FOR_TAT";
    case BuiltinName::kGrim:
      return "GRIM";
  }
  return "?";
}

BuiltinName ParseBuiltinName(std::string_view name) {
  if (name == "ALWAYS_COOP" || name == "COOP") return BuiltinName::kAlwaysCoop;
  if (name == "ALWAYS_DEFECT" || name == "DEFECT") {
    return BuiltinName::kAlwaysDefect;
  }
  if (name == "TIT_FOR_TAT" || name == "TFT") return BuiltinName::kTitForTat;
  if (name == "GRIM") return BuiltinName::kGrim;
  throw ConfigError("unknown builtin policy '" + std::string(name) +
                    "' (valid: ALWAYS_COOP, ALWAYS_DEFECT, TIT_FOR_TAT, GRIM)");
}

PolicyHandle MakeBuiltinPolicy(BuiltinName name, EnvId env,
                               const ActionGrid& grid) {
  const std::string label(BuiltinNameString(name));
  switch (env) {
    case EnvId::kIpd: {
      ObsConfig obs;
      obs.ipd_grim_bit = name == BuiltinName::kGrim;
      return std::make_shared<BuiltinPolicy>(name, ObsSpace(env, obs, grid));
    }
    case EnvId::kSplitNoComm:
      if (name == BuiltinName::kAlwaysCoop ||
          name == BuiltinName::kAlwaysDefect) {
        return std::make_shared<BuiltinPolicy>(name, ObsSpace(env, {}, grid));
      }
      throw ConfigError(label + " is only available for ipd");
    case EnvId::kTrustAndSplit:
      throw ConfigError(
          "trust_and_split has no hardcoded baselines (" + label +
          "); use a trained checkpoint");
  }
  throw ConfigError("unknown environment");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr std::string_view kPolicyMagic = "socdil-policy";

void WriteLevels(std::ostream& out, std::string_view name,
                 const std::vector<double>& levels) {
  out << name;
  for (double v : levels) out << ' ' << v;
  out << '\n';
}

std::vector<double> ParseLevels(std::istringstream& in) {
  std::vector<double> levels;
  double v = 0.0;
  while (in >> v) levels.push_back(v);
  return levels;
}

}  // namespace

void WritePolicy(const PolicyParams& params, std::ostream& out) {
  const ObsSpace& space = params.space();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << kPolicyMagic << " 1\n";
  out << "env " << EnvName(space.env()) << '\n';
  out << "ipd_memory " << space.obs_config().ipd_memory << '\n';
  out << "ipd_grim_bit " << (space.obs_config().ipd_grim_bit ? 1 : 0) << '\n';
  out << "split_greedy_threshold " << space.obs_config().split_greedy_threshold
      << '\n';
  out << "tas_greedy_threshold " << space.obs_config().tas_greedy_threshold
      << '\n';
  WriteLevels(out, "split_levels", space.grid().split_levels);
  WriteLevels(out, "tas_levels", space.grid().tas_levels);
  out << "keys " << space.KeyCount() << '\n';
  for (int i = 0; i < space.KeyCount(); ++i) {
    const ObsKey key{static_cast<std::uint32_t>(i)};
    out << space.KeyName(key) << '\t';
    const auto logits = params.Logits(key);
    for (std::size_t a = 0; a < logits.size(); ++a) {
      if (a > 0) out << ' ';
      out << logits[a];
    }
    out << '\n';
  }
}

PolicyParams ReadPolicy(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kPolicyMagic, 0) != 0) {
    throw ConfigError("not a socdil policy file");
  }
  std::optional<EnvId> env;
  ObsConfig obs;
  ActionGrid grid;
  int keys = -1;
  while (keys < 0 && std::getline(in, line)) {
    std::istringstream fields(line);
    std::string name;
    fields >> name;
    if (name == "env") {
      std::string value;
      fields >> value;
      env = ParseEnvId(value);
    } else if (name == "ipd_memory") {
      fields >> obs.ipd_memory;
    } else if (name == "ipd_grim_bit") {
      int bit = 0;
      fields >> bit;
      obs.ipd_grim_bit = bit != 0;
    } else if (name == "split_greedy_threshold") {
      fields >> obs.split_greedy_threshold;
    } else if (name == "tas_greedy_threshold") {
      fields >> obs.tas_greedy_threshold;
    } else if (name == "split_levels") {
      grid.split_levels = ParseLevels(fields);
    } else if (name == "tas_levels") {
      grid.tas_levels = ParseLevels(fields);
    } else if (name == "keys") {
      fields >> keys;
    } else {
      throw ConfigError("unknown policy header field '" + name + "'");
    }
  }
  if (!env) throw ConfigError("policy file has no env header");
  PolicyParams params(ObsSpace(*env, obs, grid));
  if (keys != params.KeyCount()) {
    throw ConfigError("policy file key count does not match its header");
  }
  for (int i = 0; i < keys; ++i) {
    if (!std::getline(in, line)) {
      throw ConfigError("policy file is truncated");
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ConfigError("malformed policy line");
    const auto key = params.space().ParseKey(line.substr(0, tab));
    if (!key) {
      throw ConfigError("unknown observation key '" + line.substr(0, tab) + "'");
    }
    std::span<double> logits = params.Logits(*key);
    const char* cursor = line.c_str() + tab + 1;
    for (double& logit : logits) {
      char* end = nullptr;
      logit = std::strtod(cursor, &end);
      if (end == cursor || !std::isfinite(logit)) {
        throw ConfigError("bad logit for key '" + line.substr(0, tab) + "'");
      }
      cursor = end;
    }
  }
  return params;
}

void SavePolicy(const PolicyParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write policy file " + path);
  WritePolicy(params, out);
}

PolicyParams LoadPolicy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy file " + path);
  return ReadPolicy(in);
}

// ---------------------------------------------------------------------------
// AgentBuffer

AgentBuffer::AgentBuffer(int capacity, int cadence)
    : capacity_(capacity), cadence_(cadence) {
  if (capacity_ < 1) throw InvalidArgument("buffer capacity must be >= 1");
  if (cadence_ < 1) throw InvalidArgument("buffer cadence must be >= 1");
}

void AgentBuffer::Push(const PolicyParams& params, int step) {
  snapshots_.push_back({step, std::make_shared<const PolicyParams>(params)});
  while (static_cast<int>(snapshots_.size()) > capacity_) {
    snapshots_.pop_front();
  }
}

bool AgentBuffer::MaybePush(const PolicyParams& params, int step) {
  if ((step + 1) % cadence_ != 0) return false;
  Push(params, step);
  return true;
}

const Snapshot& AgentBuffer::SampleUniform(Rng& rng) const {
  if (snapshots_.empty()) throw InvalidArgument("sampling an empty buffer");
  return snapshots_[rng.UniformInt(size())];
}

OpponentDraw SampleOpponent(const AgentBuffer& buffer, PolicyHandle current,
                            double rho, Rng& rng) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw InvalidArgument("rho must lie in [0, 1]");
  }
  const bool coin = rng.Uniform() < rho;
  const double pick = rng.Uniform();
  if (!coin || buffer.empty()) return {std::move(current), "self", false};
  const int index =
      std::min(buffer.size() - 1, static_cast<int>(pick * buffer.size()));
  const Snapshot& snap = buffer.at(index);
  return {std::make_shared<TabularPolicy>(
              snap.params, "buffer@" + std::to_string(snap.step)),
          "buffer@" + std::to_string(snap.step), true};
}

}  // namespace socdil
