#include "bcmec/policy.hpp"

#include <fstream>

#include "bcmec/agent.hpp"

namespace bcmec {

BaselineKind baseline_from_string(const std::string& s) {
  if (s == "all-local") return BaselineKind::AllLocal;
  if (s == "all-offload-random-channel") return BaselineKind::AllOffloadRandomChannel;
  if (s == "uniform-random") return BaselineKind::UniformRandom;
  if (s == "greedy-utility") return BaselineKind::GreedyUtility;
  throw ValidationError("unknown baseline: " + s);
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::AllLocal: return "all-local";
    case BaselineKind::AllOffloadRandomChannel: return "all-offload-random-channel";
    case BaselineKind::UniformRandom: return "uniform-random";
    case BaselineKind::GreedyUtility: return "greedy-utility";
  }
  return "?";
}

JointAction BaselinePolicy::act(const OffloadEnv& env, Rng& rng) {
  const Scenario& sc = env.scenario();
  const int n = env.num_devices();
  const int k = env.num_channels();
  JointAction actions(n);

  for (int i = 0; i < n; ++i) {
    const DeviceConfig& dev = sc.devices[i];
    OffloadAction a;
    a.local_cpu_hz = dev.cpu_budget_hz;
    a.verify_cpu_hz = dev.verify_budget_hz;

    switch (kind_) {
      case BaselineKind::AllLocal:
        a.mode = OffloadMode::Local;
        break;
      case BaselineKind::AllOffloadRandomChannel:
        a.mode = OffloadMode::Offload;
        a.channel = uniform_int(rng, k);
        a.tx_power_w = dev.max_tx_power_w;
        break;
      case BaselineKind::UniformRandom:
        a = decode_action(random_action_encoding(k, rng), dev, k);
        break;
      case BaselineKind::GreedyUtility: {
        OffloadAction local_ref;
        local_ref.mode = OffloadMode::Local;
        local_ref.local_cpu_hz = dev.cpu_budget_hz;
        const CostReport local =
            local_cost(env.state().task[i], local_ref, dev.energy_coeff);
        double best_u = 0;  // the local option
        int best_channel = -1;
        for (int c = 0; c < k; ++c) {
          const int ch = (i + c) % k;
          const double rate = solo_uplink_rate(dev, dev.max_tx_power_w, sc.radio);
          const CostReport chosen =
              offload_cost(env.state().task[i], rate, dev.max_tx_power_w, sc.edge_cpu_hz);
          const double u = offloading_utility(local, chosen, dev.weight_time, dev.weight_energy);
          if (u > best_u) {
            best_u = u;
            best_channel = ch;
          }
        }
        if (best_channel >= 0) {
          a.mode = OffloadMode::Offload;
          a.channel = best_channel;
          a.tx_power_w = dev.max_tx_power_w;
        } else {
          a.mode = OffloadMode::Local;
        }
        break;
      }
    }
    actions[i] = a;
  }
  return actions;
}

TrainedPolicy::TrainedPolicy(std::vector<Mlp> actors, std::string label)
    : actors_(std::move(actors)), label_(std::move(label)) {}

JointAction TrainedPolicy::act(const OffloadEnv& env, Rng& rng) {
  (void)rng;
  const int n = env.num_devices();
  const int k = env.num_channels();
  if (static_cast<int>(actors_.size()) != n)
    throw ContractError("policy has " + std::to_string(actors_.size()) + " actors for " +
                        std::to_string(n) + " devices");
  JointAction actions(n);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> obs = env.observe(i);
    if (static_cast<int>(obs.size()) != actors_[i].input_dim())
      throw ContractError("observation dim does not match actor input dim");
    const std::vector<double> enc = encode_action(actors_[i].forward(obs), k);
    actions[i] = decode_action(enc, env.scenario().devices[i], k);
  }
  return actions;
}

EvalSummary evaluate_policy(Policy& policy, OffloadEnv& env, int episodes, int steps,
                            std::uint64_t seed, const std::string& trace_path) {
  if (episodes < 1 || steps < 1) throw ContractError("episodes and steps must be positive");
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw std::runtime_error("cannot write trace file: " + trace_path);
  }

  Rng rng = make_rng(mix_seed(seed, 0x6576616c));
  EvalSummary sum;
  long violation_events = 0;
  long step_counter = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(mix_seed(seed, 0x657000 + static_cast<std::uint64_t>(ep)));
    for (int t = 0; t < steps; ++t) {
      const EnvState before = env.state();
      const JointAction actions = policy.act(env, rng);
      const StepOutcome out = env.step(actions);
      sum.mean_system_reward += out.system_reward;
      for (double u : out.offload_utility) sum.mean_offload_utility += u;
      for (const MiningReport& mr : out.mining_report) sum.mean_mining_utility += mr.utility;
      violation_events += static_cast<long>(out.violations.size());
      if (trace.is_open()) trace << step_trace_json(step_counter, before, out) << "\n";
      ++step_counter;
    }
  }
  const double total_steps = static_cast<double>(episodes) * steps;
  sum.mean_system_reward /= total_steps;
  sum.mean_offload_utility /= total_steps;
  sum.mean_offload_per_device = sum.mean_offload_utility / env.num_devices();
  sum.mean_mining_utility /= total_steps;
  sum.violation_rate = violation_events / (total_steps * env.num_devices());
  return sum;
}

}  // namespace bcmec
