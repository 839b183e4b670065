#include "bcmec/train.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace bcmec {

std::string to_string(TrainMode mode) {
  return mode == TrainMode::Cooperative ? "cooperative" : "independent";
}

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "cooperative") return TrainMode::Cooperative;
  if (s == "independent") return TrainMode::Independent;
  throw ValidationError("mode must be cooperative or independent");
}

TrainResult train(OffloadEnv& env, const TrainConfig& cfg, TrainMode mode, std::uint64_t seed) {
  if (cfg.episodes < 1 || cfg.steps < 1) throw ContractError("episodes and steps must be positive");
  if (cfg.batch < 1) throw ContractError("batch must be positive");
  if (!(cfg.gamma > 0 && cfg.gamma < 1)) throw ContractError("gamma must lie in (0,1)");
  if (!(cfg.zeta > 0 && cfg.zeta <= 1)) throw ContractError("zeta must lie in (0,1]");
  if (!(cfg.epsilon_start >= 0 && cfg.epsilon_start < 1) ||
      !(cfg.epsilon_end >= 0 && cfg.epsilon_end < 1))
    throw ContractError("epsilon must lie in [0,1)");
  if (cfg.lr <= 0) throw ContractError("lr must be positive");

  const int n = env.num_devices();
  const int k = env.num_channels();
  const int obs_dim = env.observation_dim();
  const int act_dim = action_encoding_dim(k);
  const bool cooperative = mode == TrainMode::Cooperative;
  const int critic_in = cooperative ? n * (obs_dim + act_dim) : obs_dim + act_dim;

  Rng rng = make_rng(mix_seed(seed, 0x7261696e));

  TrainResult result;
  result.mode = mode;
  result.agents.reserve(n);
  for (int j = 0; j < n; ++j)
    result.agents.push_back(make_agent(obs_dim, critic_in, k, cfg.hidden, rng));

  std::vector<const Mlp*> target_actors(n);
  for (int j = 0; j < n; ++j) target_actors[j] = &result.agents[j].actor_target;

  ReplayBuffer buffer(cfg.replay_capacity);
  const long total_steps = static_cast<long>(cfg.episodes) * cfg.steps;
  const long decay_steps = std::max(1L, total_steps / 2);
  long global_step = 0;

  std::vector<std::vector<std::size_t>> batches(n);
  std::vector<double> losses(n, 0.0);

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    env.reset(mix_seed(seed, 0x657000 + static_cast<std::uint64_t>(ep)));
    std::vector<double> obs = env.joint_observation();

    double ep_reward = 0, ep_offload = 0, ep_mine = 0, ep_loss = 0;
    long updates = 0;
    double epsilon = cfg.epsilon_end;

    for (int t = 0; t < cfg.steps; ++t) {
      const double frac = std::min(1.0, static_cast<double>(global_step) / decay_steps);
      epsilon = cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;

      std::vector<double> joint_act(static_cast<std::size_t>(n) * act_dim);
      JointAction actions(n);
      for (int j = 0; j < n; ++j) {
        const std::span<const double> oj(obs.data() + static_cast<std::size_t>(j) * obs_dim,
                                         obs_dim);
        const std::vector<double> enc =
            harden_encoding(actor_act(result.agents[j], oj, epsilon, k, rng), k);
        std::copy(enc.begin(), enc.end(),
                  joint_act.begin() + static_cast<std::size_t>(j) * act_dim);
        actions[j] = decode_action(enc, env.scenario().devices[j], k);
      }

      const StepOutcome outcome = env.step(actions);
      std::vector<double> next_obs = env.joint_observation();
      buffer.push({obs, joint_act, outcome.per_agent_reward, next_obs});

      ep_reward += outcome.system_reward;
      for (int j = 0; j < n; ++j) ep_offload += outcome.offload_utility[j];
      for (const MiningReport& mr : outcome.mining_report) ep_mine += mr.utility;

      if (buffer.size() >= static_cast<std::size_t>(cfg.batch)) {
        // Minibatch indices are drawn sequentially so the update phase itself
        // can run agents in parallel yet stay bit-identical to a serial pass.
        for (int j = 0; j < n; ++j) batches[j] = buffer.sample_indices(cfg.batch, rng);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int j = 0; j < n; ++j) {
          losses[j] = critic_update(result.agents[j], j, n, obs_dim, act_dim, buffer, batches[j],
                                    target_actors, cfg.gamma, cfg.lr, cooperative, k)
                          .loss;
          actor_update(result.agents[j], j, n, obs_dim, act_dim, buffer, batches[j], cfg.lr,
                       cooperative, k);
        }
        for (int j = 0; j < n; ++j) {
          ep_loss += losses[j];
          AgentNets& a = result.agents[j];
          soft_update(a.actor.params(), a.actor_target.params(), cfg.zeta);
          soft_update(a.critic.params(), a.critic_target.params(), cfg.zeta);
        }
        ++updates;
      }

      obs = std::move(next_obs);
      ++global_step;
    }

    for (const AgentNets& a : result.agents) {
      if (!all_finite(a.actor.params()) || !all_finite(a.critic.params()))
        throw DivergenceError("non-finite parameters after episode " + std::to_string(ep));
    }

    EpisodeMetrics m;
    m.episode = ep;
    m.mean_system_reward = ep_reward / cfg.steps;
    m.mean_offload_utility = ep_offload / cfg.steps;
    m.mean_mining_utility = ep_mine / cfg.steps;
    m.epsilon = epsilon;
    m.mean_critic_loss = updates > 0 ? ep_loss / (updates * n) : 0.0;
    result.curve.push_back(m);
  }
  return result;
}

void write_metrics_csv(const std::vector<EpisodeMetrics>& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics file: " + path);
  out << "episode,mean_system_reward,mean_offload_utility,mean_mining_utility,epsilon,critic_loss\n";
  char line[256];
  for (const EpisodeMetrics& m : curve) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.episode,
                  m.mean_system_reward, m.mean_offload_utility, m.mean_mining_utility, m.epsilon,
                  m.mean_critic_loss);
    out << line;
  }
}

void save_checkpoint(const TrainResult& result, const OffloadEnv& env, const std::string& path) {
  nlohmann::json j;
  j["version"] = 1;
  j["mode"] = to_string(result.mode);
  j["num_agents"] = static_cast<int>(result.agents.size());
  j["obs_dim"] = env.observation_dim();
  j["num_channels"] = env.num_channels();
  j["actors"] = nlohmann::json::array();
  for (const AgentNets& a : result.agents)
    j["actors"].push_back({{"dims", a.actor.dims()}, {"params", a.actor.params()}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump() << "\n";
}

std::vector<Mlp> load_checkpoint_actors(const std::string& path, std::string* mode_out) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != 1)
    throw SchemaError("unsupported checkpoint version");
  if (mode_out != nullptr) *mode_out = j.value("mode", "cooperative");
  std::vector<Mlp> actors;
  for (const auto& a : j.at("actors")) {
    Mlp net(a.at("dims").get<std::vector<int>>());
    std::vector<double> params = a.at("params").get<std::vector<double>>();
    if (params.size() != net.param_count()) throw SchemaError("checkpoint params shape mismatch");
    net.params() = std::move(params);
    actors.push_back(std::move(net));
  }
  return actors;
}

}  // namespace bcmec
