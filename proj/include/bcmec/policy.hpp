#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bcmec/env.hpp"
#include "bcmec/mlp.hpp"

namespace bcmec {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual JointAction act(const OffloadEnv& env, Rng& rng) = 0;
  virtual std::string name() const = 0;
};

enum class BaselineKind { AllLocal, AllOffloadRandomChannel, UniformRandom, GreedyUtility };

BaselineKind baseline_from_string(const std::string& s);
std::string to_string(BaselineKind kind);

// Feasible-by-construction reference policies. GreedyUtility is the myopic
// per-device argmax over {local, channels} at full power under a solo-rate
// assumption, scanning channels from (device index mod K) so identical
// devices spread out instead of piling onto sub-band 0.
class BaselinePolicy : public Policy {
 public:
  explicit BaselinePolicy(BaselineKind kind) : kind_(kind) {}
  JointAction act(const OffloadEnv& env, Rng& rng) override;
  std::string name() const override { return to_string(kind_); }

 private:
  BaselineKind kind_;
};

// Greedy execution of per-agent actors (no exploration).
class TrainedPolicy : public Policy {
 public:
  TrainedPolicy(std::vector<Mlp> actors, std::string label = "trained");
  JointAction act(const OffloadEnv& env, Rng& rng) override;
  std::string name() const override { return label_; }

 private:
  std::vector<Mlp> actors_;
  std::string label_;
};

struct EvalSummary {
  double mean_system_reward = 0;
  double mean_offload_utility = 0;      // summed over devices, averaged over steps
  double mean_offload_per_device = 0;
  double mean_mining_utility = 0;
  double violation_rate = 0;  // violations per device-step
};

// Rolls out episodes without exploration or learning. Optionally writes one
// JSONL trace record per step.
EvalSummary evaluate_policy(Policy& policy, OffloadEnv& env, int episodes, int steps,
                            std::uint64_t seed, const std::string& trace_path = "");

}  // namespace bcmec
