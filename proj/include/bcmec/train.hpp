#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcmec/agent.hpp"
#include "bcmec/env.hpp"

namespace bcmec {

enum class TrainMode { Cooperative, Independent };

std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& s);

struct TrainConfig {
  double gamma = 0.85;
  double epsilon_start = 0.9;   // linear decay over the first half of training
  double epsilon_end = 0.05;
  double zeta = 0.8;            // target soft-update step
  double lr = 0.01;
  int batch = 128;
  int episodes = 1000;
  int steps = 100;              // time slots per episode
  std::size_t replay_capacity = 100000;
  std::vector<int> hidden = {64, 32, 32};
};

struct EpisodeMetrics {
  int episode = 0;
  double mean_system_reward = 0;
  double mean_offload_utility = 0;  // summed over devices, averaged over steps
  double mean_mining_utility = 0;
  double epsilon = 0;
  double mean_critic_loss = 0;
};

struct TrainResult {
  std::vector<AgentNets> agents;
  std::vector<EpisodeMetrics> curve;
  TrainMode mode = TrainMode::Cooperative;
};

// Runs episodes x steps of epsilon-greedy rollouts with one minibatch update
// per agent per environment step once the replay buffer can fill a batch,
// followed by target soft updates. Fully reproducible per seed. Per-agent
// updates within a step are independent, so they may execute in parallel
// without changing any result.
TrainResult train(OffloadEnv& env, const TrainConfig& cfg, TrainMode mode, std::uint64_t seed);

void write_metrics_csv(const std::vector<EpisodeMetrics>& curve, const std::string& path);

// Versioned JSON weight dump of the per-agent actors (all that execution
// needs) plus the dimensions required to rebuild them.
void save_checkpoint(const TrainResult& result, const OffloadEnv& env, const std::string& path);
std::vector<Mlp> load_checkpoint_actors(const std::string& path, std::string* mode_out = nullptr);

}  // namespace bcmec
