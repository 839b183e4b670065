#pragma once

#include <vector>

#include "bcmec/comms.hpp"
#include "bcmec/mlp.hpp"
#include "bcmec/replay.hpp"
#include "bcmec/rng.hpp"
#include "bcmec/scenario.hpp"

namespace bcmec {

// Continuous action encoding shared by actors, critics and the replay buffer:
// a (K+1)-way soft preference over {local, channel 1..K} followed by three
// fractions in (0,1) scaling transmit power, local CPU and verification CPU
// into their budgets. The environment receives the argmax of the preference
// block; critics consume the encoding itself, which keeps the whole
// actor-critic path differentiable.
inline int action_encoding_dim(int num_channels) { return num_channels + 4; }

// Raw actor head -> encoding: softmax over the first K+1 entries, sigmoid on
// the last three.
std::vector<double> encode_action(std::span<const double> raw, int num_channels);

// One-hot of the preference argmax with the fractions kept: the encoding of
// the action actually executed. Replay and TD targets store hardened
// encodings so the critic sees the decisions that earned the rewards; the
// soft encoding exists for the actor's gradient path.
std::vector<double> harden_encoding(std::span<const double> encoding, int num_channels);

// Chain rule of encode_action: given d(value)/d(encoding), returns
// d(value)/d(raw).
std::vector<double> encode_action_backward(std::span<const double> raw,
                                           std::span<const double> encoding,
                                           std::span<const double> upstream, int num_channels);

OffloadAction decode_action(std::span<const double> encoding, const DeviceConfig& dev,
                            int num_channels);

// Feasible action drawn uniformly: one-hot mode, fractions in (0,1].
std::vector<double> random_action_encoding(int num_channels, Rng& rng);

struct AgentNets {
  Mlp actor, actor_target, critic, critic_target;
  AdamState actor_opt, critic_opt;
};

AgentNets make_agent(int obs_dim, int critic_in_dim, int num_channels,
                     const std::vector<int>& hidden, Rng& rng);

// Epsilon-greedy over the deterministic policy.
std::vector<double> actor_act(const AgentNets& agent, std::span<const double> obs, double epsilon,
                              int num_channels, Rng& rng);

struct CriticUpdateResult {
  double loss = 0;  // mean squared TD error before the optimizer step
};

// One Adam step on agent n's behavior critic toward the TD target built from
// target actors and the target critic on the successor observation.
// In cooperative mode the critic sees the joint observation and action; in
// independent mode only agent n's slices.
CriticUpdateResult critic_update(AgentNets& agent, int agent_index, int num_agents, int obs_dim,
                                 int act_dim, const ReplayBuffer& buffer,
                                 const std::vector<std::size_t>& batch,
                                 const std::vector<const Mlp*>& target_actors, double gamma,
                                 double lr, bool cooperative, int num_channels,
                                 std::vector<double>* grad_out = nullptr);

struct ActorUpdateResult {
  double grad_norm = 0;
};

// Deterministic policy gradient: backpropagates the critic value through
// agent n's action encoding into its behavior actor, then takes one Adam
// ascent step. Other agents' actions come from the sampled batch.
ActorUpdateResult actor_update(AgentNets& agent, int agent_index, int num_agents, int obs_dim,
                               int act_dim, const ReplayBuffer& buffer,
                               const std::vector<std::size_t>& batch, double lr, bool cooperative,
                               int num_channels, std::vector<double>* grad_out = nullptr);

}  // namespace bcmec
