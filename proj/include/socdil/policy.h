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

#ifndef SOCDIL_POLICY_H_
#define SOCDIL_POLICY_H_

#include <deque>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socdil/environments.h"
#include "socdil/rng.h"

namespace socdil {

// What a policy sees at a decision: the seat, the phase and the raw episode
// so far. Tabular policies only use the encoded key; scripted opponents may
// look at the raw rounds. `*_history` holds completed rounds; for the split
// games `*_current` is the round being played.
struct DecisionPoint {
  int seat = 0;
  int round = 0;
  Phase phase = Phase::kAct;
  std::span<const IpdRound> ipd_history;
  std::span<const SplitRound> split_history;
  const SplitRound* split_current = nullptr;
  std::span<const TasRound> tas_history;
  const TasRound* tas_current = nullptr;
};

ObsKey EncodeDecision(const ObsSpace& space, const DecisionPoint& point);

class Policy {
 public:
  virtual ~Policy() = default;

  virtual const ObsSpace& space() const = 0;
  virtual std::string name() const = 0;
  // Writes the action distribution into `probs`, whose size is
  // space().ActionCount(key).
  virtual void ActionProbs(const DecisionPoint& point, ObsKey key,
                           std::span<double> probs) const = 0;
};

using PolicyHandle = std::shared_ptr<const Policy>;

// ---------------------------------------------------------------------------
// Tabular softmax parameters.

class PolicyParams {
 public:
  // All logits start at zero, i.e. the uniform policy at every key.
  explicit PolicyParams(ObsSpace space);

  const ObsSpace& space() const { return space_; }
  int KeyCount() const { return space_.KeyCount(); }

  std::span<double> Logits(ObsKey key);
  std::span<const double> Logits(ObsKey key) const;
  std::span<const double> flat() const { return logits_; }
  std::span<double> flat() { return logits_; }

  // Softmax of the logits at `key` into `out`.
  void Probs(ObsKey key, std::span<double> out) const;

  bool operator==(const PolicyParams& other) const {
    return space_ == other.space_ && logits_ == other.logits_;
  }

 private:
  void CheckKey(ObsKey key) const;

  ObsSpace space_;
  std::vector<std::size_t> offsets_;
  std::vector<double> logits_;
};

std::vector<double> ActionDistribution(const PolicyParams& params, ObsKey key);

// Partial derivatives keyed by observation; rows exist only for keys that
// were touched.
class SparseGradient {
 public:
  using Rows = std::map<ObsKey, std::vector<double>>;

  // row += scale * values. Creates a zero row of the same length if absent.
  void AddScaled(ObsKey key, std::span<const double> values, double scale);
  // row += scale * (onehot(action) - probs), the gradient of log softmax.
  void AddLogProb(ObsKey key, int action, std::span<const double> probs,
                  double scale);
  // row += scale * dH/dlogits, H the entropy of softmax = probs.
  void AddEntropy(ObsKey key, std::span<const double> probs, double scale);

  SparseGradient& operator+=(const SparseGradient& other);
  SparseGradient& operator*=(double scale);

  std::span<const double> Row(ObsKey key) const;
  const Rows& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  double Norm() const;
  bool AllFinite() const;

  // params += step_size * this.
  void ApplyTo(PolicyParams& params, double step_size) const;

 private:
  std::vector<double>& RowFor(ObsKey key, std::size_t size);

  Rows rows_;
};

// d log pi(action | key) / d logits(key, .) = onehot(action) - pi.
SparseGradient LogProbGradient(const PolicyParams& params, ObsKey key,
                               int action);

double Entropy(std::span<const double> probs);

// ---------------------------------------------------------------------------
// Policy handles.

class TabularPolicy final : public Policy {
 public:
  TabularPolicy(std::shared_ptr<const PolicyParams> params, std::string name);

  const ObsSpace& space() const override { return params_->space(); }
  std::string name() const override { return name_; }
  void ActionProbs(const DecisionPoint& point, ObsKey key,
                   std::span<double> probs) const override;

  const PolicyParams& params() const { return *params_; }
  std::shared_ptr<const PolicyParams> shared_params() const { return params_; }

 private:
  std::shared_ptr<const PolicyParams> params_;
  std::string name_;
};

PolicyHandle MakeTabularPolicy(const PolicyParams& params, std::string name);

// Uniformly random over every action set.
PolicyHandle MakeUniformPolicy(const ObsSpace& space);

enum class BuiltinName { kAlwaysCoop, kAlwaysDefect, kTitForTat, kGrim };

std::string_view BuiltinNameString(BuiltinName name);
BuiltinName ParseBuiltinName(std::string_view name);

// Hardcoded baselines. IPD: all four; Split No-Comm: ALWAYS_COOP (10 on
// categories the seat values more, 0 where it values less, 5 on ties) and
// ALWAYS_DEFECT (10 everywhere). Trust-and-Split has none. Unsupported
// combinations throw ConfigError. GRIM encodes with the grim bit.
PolicyHandle MakeBuiltinPolicy(BuiltinName name, EnvId env,
                               const ActionGrid& grid = {});

// ---------------------------------------------------------------------------
// Serialization: a header of "name value" lines, then one
// "<key>\t<logit> <logit> ..." line per key. Logits are written with 17
// significant digits so finite values read back bit-exactly.

void WritePolicy(const PolicyParams& params, std::ostream& out);
PolicyParams ReadPolicy(std::istream& in);
void SavePolicy(const PolicyParams& params, const std::string& path);
PolicyParams LoadPolicy(const std::string& path);

// ---------------------------------------------------------------------------
// Agent buffer of past self-play snapshots.

struct Snapshot {
  int step = 0;
  std::shared_ptr<const PolicyParams> params;
};

class AgentBuffer {
 public:
  explicit AgentBuffer(int capacity = 32, int cadence = 10);

  // Stores a deep copy; evicts the oldest snapshot beyond capacity.
  void Push(const PolicyParams& params, int step);
  // Pushes after every `cadence`-th optimizer step, i.e. when
  // (step + 1) % cadence == 0. Returns whether a snapshot was taken.
  bool MaybePush(const PolicyParams& params, int step);

  int size() const { return static_cast<int>(snapshots_.size()); }
  bool empty() const { return snapshots_.empty(); }
  int capacity() const { return capacity_; }
  int cadence() const { return cadence_; }
  const Snapshot& at(int i) const { return snapshots_.at(i); }

  const Snapshot& SampleUniform(Rng& rng) const;

 private:
  int capacity_;
  int cadence_;
  std::deque<Snapshot> snapshots_;
};

struct OpponentDraw {
  PolicyHandle policy;
  std::string id;  // "self" or "buffer@<step>"
  bool from_buffer = false;
};

// With probability rho a uniformly drawn buffer snapshot, else `current`.
// An empty buffer falls back to `current`. Always consumes exactly two
// uniforms (coin, then index) so later draws do not depend on the outcome.
OpponentDraw SampleOpponent(const AgentBuffer& buffer, PolicyHandle current,
                            double rho, Rng& rng);

}  // namespace socdil

#endif  // SOCDIL_POLICY_H_
