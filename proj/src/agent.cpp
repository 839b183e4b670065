#include "bcmec/agent.hpp"

#include <algorithm>
#include <cmath>

namespace bcmec {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Critic input layout. Cooperative: all observations then all action
// encodings. Independent: agent n's observation then its action encoding.
std::vector<double> critic_input(int agent_index, int num_agents, int obs_dim, int act_dim,
                                 std::span<const double> obs, std::span<const double> act,
                                 bool cooperative) {
  std::vector<double> x;
  if (cooperative) {
    x.reserve(obs.size() + act.size());
    x.insert(x.end(), obs.begin(), obs.end());
    x.insert(x.end(), act.begin(), act.end());
  } else {
    x.reserve(obs_dim + act_dim);
    const std::size_t o0 = static_cast<std::size_t>(agent_index) * obs_dim;
    const std::size_t a0 = static_cast<std::size_t>(agent_index) * act_dim;
    x.insert(x.end(), obs.begin() + o0, obs.begin() + o0 + obs_dim);
    x.insert(x.end(), act.begin() + a0, act.begin() + a0 + act_dim);
  }
  (void)num_agents;
  return x;
}

}  // namespace

std::vector<double> encode_action(std::span<const double> raw, int num_channels) {
  const int modes = num_channels + 1;
  std::vector<double> enc(raw.size());
  double mx = raw[0];
  for (int i = 1; i < modes; ++i) mx = std::max(mx, raw[i]);
  double z = 0;
  for (int i = 0; i < modes; ++i) {
    enc[i] = std::exp(raw[i] - mx);
    z += enc[i];
  }
  for (int i = 0; i < modes; ++i) enc[i] /= z;
  for (int i = modes; i < modes + 3; ++i) enc[i] = sigmoid(raw[i]);
  return enc;
}

std::vector<double> encode_action_backward(std::span<const double> raw,
                                           std::span<const double> encoding,
                                           std::span<const double> upstream, int num_channels) {
  const int modes = num_channels + 1;
  std::vector<double> g(raw.size());
  double dot = 0;
  for (int i = 0; i < modes; ++i) dot += upstream[i] * encoding[i];
  for (int i = 0; i < modes; ++i) g[i] = encoding[i] * (upstream[i] - dot);
  for (int i = modes; i < modes + 3; ++i)
    g[i] = upstream[i] * encoding[i] * (1.0 - encoding[i]);
  return g;
}

std::vector<double> harden_encoding(std::span<const double> encoding, int num_channels) {
  const int modes = num_channels + 1;
  std::vector<double> hard(encoding.begin(), encoding.end());
  int best = 0;
  for (int i = 1; i < modes; ++i)
    if (encoding[i] > encoding[best]) best = i;
  for (int i = 0; i < modes; ++i) hard[i] = i == best ? 1.0 : 0.0;
  return hard;
}

OffloadAction decode_action(std::span<const double> encoding, const DeviceConfig& dev,
                            int num_channels) {
  const int modes = num_channels + 1;
  int best = 0;
  for (int i = 1; i < modes; ++i)
    if (encoding[i] > encoding[best]) best = i;
  OffloadAction a;
  if (best == 0) {
    a.mode = OffloadMode::Local;
  } else {
    a.mode = OffloadMode::Offload;
    a.channel = best - 1;
  }
  a.tx_power_w = encoding[modes] * dev.max_tx_power_w;
  a.local_cpu_hz = encoding[modes + 1] * dev.cpu_budget_hz;
  a.verify_cpu_hz = encoding[modes + 2] * dev.verify_budget_hz;
  return a;
}

std::vector<double> random_action_encoding(int num_channels, Rng& rng) {
  const int modes = num_channels + 1;
  std::vector<double> enc(modes + 3, 0.0);
  enc[uniform_int(rng, modes)] = 1.0;
  for (int i = modes; i < modes + 3; ++i) enc[i] = uniform_pos(rng);
  return enc;
}

AgentNets make_agent(int obs_dim, int critic_in_dim, int num_channels,
                     const std::vector<int>& hidden, Rng& rng) {
  std::vector<int> actor_dims{obs_dim};
  actor_dims.insert(actor_dims.end(), hidden.begin(), hidden.end());
  actor_dims.push_back(action_encoding_dim(num_channels));
  std::vector<int> critic_dims{critic_in_dim};
  critic_dims.insert(critic_dims.end(), hidden.begin(), hidden.end());
  critic_dims.push_back(1);

  AgentNets a{Mlp::glorot(actor_dims, rng), Mlp(actor_dims), Mlp::glorot(critic_dims, rng),
              Mlp(critic_dims), {}, {}};
  a.actor_target.params() = a.actor.params();
  a.critic_target.params() = a.critic.params();
  return a;
}

std::vector<double> actor_act(const AgentNets& agent, std::span<const double> obs, double epsilon,
                              int num_channels, Rng& rng) {
  if (uniform01(rng) < epsilon) return random_action_encoding(num_channels, rng);
  return encode_action(agent.actor.forward(obs), num_channels);
}

CriticUpdateResult critic_update(AgentNets& agent, int agent_index, int num_agents, int obs_dim,
                                 int act_dim, const ReplayBuffer& buffer,
                                 const std::vector<std::size_t>& batch,
                                 const std::vector<const Mlp*>& target_actors, double gamma,
                                 double lr, bool cooperative, int num_channels,
                                 std::vector<double>* grad_out) {
  if (batch.empty()) throw ContractError("critic_update needs a nonempty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  std::vector<double> grad(agent.critic.param_count(), 0.0);
  std::vector<double> next_act(static_cast<std::size_t>(num_agents) * act_dim);
  ForwardCache cache;
  double loss = 0;

  for (const std::size_t idx : batch) {
    const Experience& e = buffer[idx];

    // Successor actions: what the target policies would execute.
    if (cooperative) {
      for (int j = 0; j < num_agents; ++j) {
        const std::span<const double> oj(e.next_obs.data() + static_cast<std::size_t>(j) * obs_dim,
                                         obs_dim);
        const std::vector<double> enc = harden_encoding(
            encode_action(target_actors[j]->forward(oj), num_channels), num_channels);
        std::copy(enc.begin(), enc.end(), next_act.begin() + static_cast<std::size_t>(j) * act_dim);
      }
    } else {
      const std::span<const double> on(
          e.next_obs.data() + static_cast<std::size_t>(agent_index) * obs_dim, obs_dim);
      const std::vector<double> enc = harden_encoding(
          encode_action(target_actors[agent_index]->forward(on), num_channels), num_channels);
      std::copy(enc.begin(), enc.end(),
                next_act.begin() + static_cast<std::size_t>(agent_index) * act_dim);
    }

    const std::vector<double> xn = critic_input(agent_index, num_agents, obs_dim, act_dim,
                                                e.next_obs, next_act, cooperative);
    const double q_next = agent.critic_target.forward(xn)[0];
    const double y = e.reward[agent_index] + gamma * q_next;

    const std::vector<double> x =
        critic_input(agent_index, num_agents, obs_dim, act_dim, e.obs, e.act, cooperative);
    const double q = agent.critic.forward(x, cache)[0];
    const double err = q - y;
    loss += err * err;

    const double upstream[1] = {2.0 * err * inv_b};
    agent.critic.backward(cache, upstream, grad);
  }

  if (grad_out != nullptr) *grad_out = grad;
  adam_step(agent.critic.params(), grad, agent.critic_opt, lr);
  return {loss * inv_b};
}

ActorUpdateResult actor_update(AgentNets& agent, int agent_index, int num_agents, int obs_dim,
                               int act_dim, const ReplayBuffer& buffer,
                               const std::vector<std::size_t>& batch, double lr, bool cooperative,
                               int num_channels, std::vector<double>* grad_out) {
  if (batch.empty()) throw ContractError("actor_update needs a nonempty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  std::vector<double> grad(agent.actor.param_count(), 0.0);
  ForwardCache actor_cache, critic_cache;
  std::vector<double> act;

  for (const std::size_t idx : batch) {
    const Experience& e = buffer[idx];
    const std::span<const double> on(e.obs.data() + static_cast<std::size_t>(agent_index) * obs_dim,
                                     obs_dim);
    const std::vector<double> raw = agent.actor.forward(on, actor_cache);
    const std::vector<double> enc = encode_action(raw, num_channels);

    // Batch actions for the other agents, the live policy for this one.
    act.assign(e.act.begin(), e.act.end());
    std::copy(enc.begin(), enc.end(), act.begin() + static_cast<std::size_t>(agent_index) * act_dim);

    const std::vector<double> x =
        critic_input(agent_index, num_agents, obs_dim, act_dim, e.obs, act, cooperative);
    agent.critic.forward(x, critic_cache);

    const double upstream[1] = {1.0};
    const std::vector<double> dx = agent.critic.backward_input(critic_cache, upstream);
    const std::size_t a_off = cooperative
                                  ? static_cast<std::size_t>(num_agents) * obs_dim +
                                        static_cast<std::size_t>(agent_index) * act_dim
                                  : static_cast<std::size_t>(obs_dim);
    const std::span<const double> d_enc(dx.data() + a_off, act_dim);
    std::vector<double> d_raw = encode_action_backward(raw, enc, d_enc, num_channels);
    // Ascend on Q: minimize -Q.
    for (double& g : d_raw) g *= -inv_b;
    agent.actor.backward(actor_cache, d_raw, grad);
  }

  double norm2 = 0;
  for (double g : grad) norm2 += g * g;
  if (grad_out != nullptr) *grad_out = grad;
  adam_step(agent.actor.params(), grad, agent.actor_opt, lr);
  return {std::sqrt(norm2)};
}

}  // namespace bcmec
