#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bcmec/comms.hpp"
#include "bcmec/consensus.hpp"
#include "bcmec/rng.hpp"
#include "bcmec/scenario.hpp"

namespace bcmec {

// Five-part system state: tasks, channel occupancy, transmit powers,
// remaining compute budgets and pending transaction sizes.
struct EnvState {
  std::vector<Task> task;             // per device
  std::vector<double> channel;        // N x K, row-major, entries in {0,1}
  std::vector<double> power;          // N x K, row-major
  std::vector<double> cpu_avail;      // per device, f budget minus allocation
  std::vector<double> verify_avail;   // per device, phi budget minus allocation
  std::vector<double> transaction;    // per device, pending bytes
};

struct Violation {
  int device = 0;
  std::string constraint;  // one of: channel, power, local_cpu, verify_cpu, deadline
};

struct MiningReport {
  int device = 0;
  double t_por_s = 0;
  double utility = 0;
};

struct StepOutcome {
  EnvState next_state;
  std::vector<double> per_agent_reward;
  double system_reward = 0;
  std::vector<double> offload_utility;  // per device, after the deadline rule
  std::vector<CostReport> per_agent_cost;
  std::vector<MiningReport> mining_report;
  std::vector<Violation> violations;
  JointAction executed;  // actions after feasibility coercion
};

struct EnvConfig {
  std::optional<TaskRanges> task_ranges;  // when set, tasks are redrawn each episode
  double obs_bytes_scale = 1e6;           // observation normalisation scales
  double obs_cycles_scale = 1e9;
};

// The multi-agent offloading-and-mining environment. One step covers one time
// slot: channel gains stay fixed, every device acts once, rewards are the sum
// of offloading and mining utility.
class OffloadEnv {
 public:
  OffloadEnv(Scenario scenario, EnvConfig config = {});

  EnvState reset(std::uint64_t seed);
  StepOutcome step(const JointAction& action);

  // Flattened local slice for device n:
  // [bytes, cycles, channel row, power row, cpu avail, verify avail, pending tx],
  // all budget-relative. Length = 2 + K + K + 2 + 1.
  std::vector<double> observe(int n) const;
  std::vector<double> joint_observation() const;
  int observation_dim() const { return 2 * num_channels() + 5; }

  const EnvState& state() const { return state_; }
  const Scenario& scenario() const { return scenario_; }
  const EnvConfig& config() const { return config_; }
  int num_devices() const { return scenario_.num_devices(); }
  int num_channels() const { return scenario_.radio.num_subbands; }

 private:
  OffloadAction coerce(int n, OffloadAction a, std::vector<Violation>* out) const;

  Scenario scenario_;
  EnvConfig config_;
  std::vector<double> gains_;  // cached per-device channel gains
  EnvState state_;
  std::vector<double> reputations_;  // last mining utilities, drives miner selection
  long round_ = 0;
};

// One JSONL record per step: state digest, executed actions, rewards,
// per-device cost reports, violations.
std::string step_trace_json(long step, const EnvState& state, const StepOutcome& outcome);

std::uint64_t state_digest(const EnvState& state);

}  // namespace bcmec
