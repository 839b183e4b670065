#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bcmec/agent.hpp"
#include "bcmec/train.hpp"

using namespace bcmec;

namespace {

constexpr double kGradTol = 1e-3;

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Replay filled with random but well-formed experiences.
ReplayBuffer make_buffer(int num_agents, int obs_dim, int num_channels, int entries, Rng& rng) {
  const int act_dim = action_encoding_dim(num_channels);
  ReplayBuffer buf(1000);
  for (int e = 0; e < entries; ++e) {
    Experience ex;
    ex.obs.resize(static_cast<std::size_t>(num_agents) * obs_dim);
    ex.next_obs.resize(ex.obs.size());
    for (double& v : ex.obs) v = uniform_in(rng, -1, 1);
    for (double& v : ex.next_obs) v = uniform_in(rng, -1, 1);
    for (int j = 0; j < num_agents; ++j) {
      const std::vector<double> enc = random_action_encoding(num_channels, rng);
      ex.act.insert(ex.act.end(), enc.begin(), enc.end());
      ex.reward.push_back(uniform_in(rng, -1, 1));
    }
    buf.push(std::move(ex));
  }
  return buf;
}

}  // namespace

TEST_CASE("action encoding: simplex head plus bounded fractions") {
  Rng rng = make_rng(1);
  const int k = 3;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> raw(action_encoding_dim(k));
    for (double& v : raw) v = uniform_in(rng, -5, 5);
    const std::vector<double> enc = encode_action(raw, k);
    double sum = 0;
    for (int i = 0; i <= k; ++i) {
      CHECK(enc[i] > 0);
      sum += enc[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = k + 1; i < k + 4; ++i) {
      CHECK(enc[i] > 0);
      CHECK(enc[i] < 1);
    }
  }
}

TEST_CASE("encode_action_backward matches finite differences") {
  Rng rng = make_rng(2);
  const int k = 2;
  const int dim = action_encoding_dim(k);
  std::vector<double> raw(dim), upstream(dim);
  for (double& v : raw) v = uniform_in(rng, -2, 2);
  for (double& v : upstream) v = uniform_in(rng, -1, 1);
  const std::vector<double> enc = encode_action(raw, k);
  const std::vector<double> grad = encode_action_backward(raw, enc, upstream, k);

  const double h = 1e-6;
  for (int i = 0; i < dim; ++i) {
    std::vector<double> rp = raw, rm = raw;
    rp[i] += h;
    rm[i] -= h;
    const std::vector<double> ep = encode_action(rp, k);
    const std::vector<double> em = encode_action(rm, k);
    double fd = 0;
    for (int j = 0; j < dim; ++j) fd += upstream[j] * (ep[j] - em[j]) / (2 * h);
    CHECK(close_rel(grad[i], fd, 1e-5));
  }
}

TEST_CASE("decode maps the argmax mode and scales fractions into budgets") {
  DeviceConfig dev;
  const int k = 2;
  std::vector<double> enc{0.2, 0.7, 0.1, 0.5, 0.25, 0.8};  // channel 1 wins
  const OffloadAction a = decode_action(enc, dev, k);
  CHECK(a.mode == OffloadMode::Offload);
  CHECK(a.channel == 0);
  CHECK(a.tx_power_w == doctest::Approx(0.5 * dev.max_tx_power_w));
  CHECK(a.local_cpu_hz == doctest::Approx(0.25 * dev.cpu_budget_hz));
  CHECK(a.verify_cpu_hz == doctest::Approx(0.8 * dev.verify_budget_hz));

  std::vector<double> local_enc{0.9, 0.05, 0.05, 0.5, 0.5, 0.5};
  CHECK(decode_action(local_enc, dev, k).mode == OffloadMode::Local);
}

TEST_CASE("epsilon = 1 draws the mode uniformly (chi-squared)") {
  Rng rng = make_rng(3);
  const int k = 3;  // 4 modes
  AgentNets agent = make_agent(5, 5 + action_encoding_dim(k), k, {8}, rng);
  std::vector<double> obs(5, 0.1);
  std::vector<int> counts(k + 1, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const std::vector<double> enc = actor_act(agent, obs, 1.0, k, rng);
    int mode = 0;
    for (int m = 1; m <= k; ++m)
      if (enc[m] > enc[mode]) mode = m;
    ++counts[mode];
    CHECK(enc[k + 1] > 0);  // fractions stay in (0, 1]
    CHECK(enc[k + 1] <= 1.0);
  }
  const double expected = draws / static_cast<double>(k + 1);
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 16.27);  // 99.9th percentile of chi-squared with 3 dof
}

TEST_CASE("epsilon = 0 is deterministic and respects the power budget") {
  Rng rng = make_rng(4);
  const int k = 2;
  AgentNets agent = make_agent(4, 4 + action_encoding_dim(k), k, {8}, rng);
  DeviceConfig dev;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> obs(4);
    for (double& v : obs) v = uniform_in(rng, -2, 2);
    const std::vector<double> a1 = actor_act(agent, obs, 0.0, k, rng);
    const std::vector<double> a2 = actor_act(agent, obs, 0.0, k, rng);
    CHECK(a1 == a2);
    const OffloadAction act = decode_action(a1, dev, k);
    CHECK(act.tx_power_w > 0);
    CHECK(act.tx_power_w <= dev.max_tx_power_w);
  }
}

TEST_CASE("critic update: gamma = 0 reduces the target to the reward") {
  Rng rng = make_rng(5);
  const int n = 2, obs_dim = 3, k = 1;
  const int act_dim = action_encoding_dim(k);
  ReplayBuffer buf = make_buffer(n, obs_dim, k, 16, rng);

  std::vector<AgentNets> agents;
  for (int j = 0; j < n; ++j) agents.push_back(make_agent(obs_dim, n * (obs_dim + act_dim), k, {6}, rng));
  std::vector<const Mlp*> targets{&agents[0].actor_target, &agents[1].actor_target};

  const std::vector<std::size_t> batch = buf.sample_indices(8, rng);
  // Expected loss: mean (Q(o, a) - r)^2 with the pre-update critic.
  double expected = 0;
  for (std::size_t idx : batch) {
    const Experience& e = buf[idx];
    std::vector<double> x = e.obs;
    x.insert(x.end(), e.act.begin(), e.act.end());
    const double q = agents[0].critic.forward(x)[0];
    expected += (q - e.reward[0]) * (q - e.reward[0]);
  }
  expected /= batch.size();

  const CriticUpdateResult res =
      critic_update(agents[0], 0, n, obs_dim, act_dim, buf, batch, targets, 0.0, 0.01, true, k);
  CHECK(res.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("critic update: hand-rolled three-sample oracle with discounting") {
  Rng rng = make_rng(6);
  const int n = 2, obs_dim = 3, k = 1;
  const int act_dim = action_encoding_dim(k);
  ReplayBuffer buf = make_buffer(n, obs_dim, k, 3, rng);
  std::vector<AgentNets> agents;
  for (int j = 0; j < n; ++j) agents.push_back(make_agent(obs_dim, n * (obs_dim + act_dim), k, {6}, rng));
  std::vector<const Mlp*> targets{&agents[0].actor_target, &agents[1].actor_target};
  const double gamma = 0.9;
  const int agent_index = 1;

  const std::vector<std::size_t> batch{0, 1, 2};
  double expected = 0;
  for (std::size_t idx : batch) {
    const Experience& e = buf[idx];
    // Successor joint action: what the target actors would execute.
    std::vector<double> next_act;
    for (int j = 0; j < n; ++j) {
      const std::span<const double> oj(e.next_obs.data() + j * obs_dim, obs_dim);
      const std::vector<double> enc =
          harden_encoding(encode_action(targets[j]->forward(oj), k), k);
      next_act.insert(next_act.end(), enc.begin(), enc.end());
    }
    std::vector<double> xn = e.next_obs;
    xn.insert(xn.end(), next_act.begin(), next_act.end());
    const double y = e.reward[agent_index] + gamma * agents[agent_index].critic_target.forward(xn)[0];
    std::vector<double> x = e.obs;
    x.insert(x.end(), e.act.begin(), e.act.end());
    const double q = agents[agent_index].critic.forward(x)[0];
    expected += (q - y) * (q - y);
  }
  expected /= 3.0;

  const CriticUpdateResult res = critic_update(agents[agent_index], agent_index, n, obs_dim,
                                               act_dim, buf, batch, targets, gamma, 0.01, true, k);
  CHECK(res.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("critic update: zero nets and zero rewards give zero loss and no drift") {
  Rng rng = make_rng(7);
  const int n = 1, obs_dim = 2, k = 1;
  const int act_dim = action_encoding_dim(k);
  ReplayBuffer buf(16);
  for (int e = 0; e < 4; ++e) {
    Experience ex;
    ex.obs.assign(obs_dim, 0.5);
    ex.next_obs.assign(obs_dim, 0.5);
    ex.act = random_action_encoding(k, rng);
    ex.reward = {0.0};
    buf.push(std::move(ex));
  }
  AgentNets agent = make_agent(obs_dim, obs_dim + act_dim, k, {4}, rng);
  // Zero the critic stack: Q == 0 == y everywhere.
  std::fill(agent.critic.params().begin(), agent.critic.params().end(), 0.0);
  std::fill(agent.critic_target.params().begin(), agent.critic_target.params().end(), 0.0);
  const std::vector<double> before = agent.critic.params();
  std::vector<const Mlp*> targets{&agent.actor_target};
  const CriticUpdateResult res = critic_update(agent, 0, n, obs_dim, act_dim, buf,
                                               {0, 1, 2, 3}, targets, 0.9, 0.01, true, k);
  CHECK(res.loss == 0.0);
  CHECK(agent.critic.params() == before);
}

TEST_CASE("critic loss gradient matches central finite differences") {
  Rng rng = make_rng(8);
  const int n = 2, obs_dim = 3, k = 1;
  const int act_dim = action_encoding_dim(k);
  ReplayBuffer buf = make_buffer(n, obs_dim, k, 8, rng);
  std::vector<AgentNets> agents;
  // {6} hidden: critic has 16*6 + 6 + 6 + 1 = 109 params, under the 200 cap.
  for (int j = 0; j < n; ++j) agents.push_back(make_agent(obs_dim, n * (obs_dim + act_dim), k, {6}, rng));
  std::vector<const Mlp*> targets{&agents[0].actor_target, &agents[1].actor_target};
  const std::vector<std::size_t> batch{0, 1, 2, 3};
  const double gamma = 0.85;

  std::vector<double> grad;
  {
    AgentNets probe = agents[0];
    critic_update(probe, 0, n, obs_dim, act_dim, buf, batch, targets, gamma, 0.0, true, k, &grad);
  }
  const double h = 1e-5;
  for (std::size_t i = 0; i < agents[0].critic.param_count(); ++i) {
    double loss_up, loss_dn;
    {
      AgentNets probe = agents[0];
      probe.critic.params()[i] += h;
      loss_up = critic_update(probe, 0, n, obs_dim, act_dim, buf, batch, targets, gamma, 0.0,
                              true, k)
                    .loss;
    }
    {
      AgentNets probe = agents[0];
      probe.critic.params()[i] -= h;
      loss_dn = critic_update(probe, 0, n, obs_dim, act_dim, buf, batch, targets, gamma, 0.0,
                              true, k)
                    .loss;
    }
    CHECK(close_rel(grad[i], (loss_up - loss_dn) / (2 * h), kGradTol));
  }
}

TEST_CASE("actor update: a critic that ignores the action produces a zero gradient") {
  Rng rng = make_rng(9);
  const int n = 1, obs_dim = 2, k = 1;
  const int act_dim = action_encoding_dim(k);
  ReplayBuffer buf = make_buffer(n, obs_dim, k, 4, rng);
  AgentNets agent = make_agent(obs_dim, obs_dim + act_dim, k, {4}, rng);
  std::fill(agent.critic.params().begin(), agent.critic.params().end(), 0.0);
  const std::vector<double> before = agent.actor.params();
  const ActorUpdateResult res =
      actor_update(agent, 0, n, obs_dim, act_dim, buf, {0, 1, 2, 3}, 0.01, true, k);
  CHECK(res.grad_norm == 0.0);
  CHECK(agent.actor.params() == before);
}

TEST_CASE("actor update climbs a tent-shaped critic to its peak") {
  Rng rng = make_rng(10);
  const int n = 1, obs_dim = 2, k = 1;
  const int act_dim = action_encoding_dim(k);  // [pref0, pref1, p, f, phi]
  const double a_star = 0.7;

  ReplayBuffer buf(8);
  for (int e = 0; e < 4; ++e) {
    Experience ex;
    ex.obs = {0.1, -0.4};
    ex.next_obs = ex.obs;
    ex.act = random_action_encoding(k, rng);
    ex.reward = {0.0};
    buf.push(std::move(ex));
  }

  AgentNets agent = make_agent(obs_dim, obs_dim + act_dim, k, {4}, rng);
  // Hand-built critic: Q = -|p_frac - a_star|, a concave tent whose peak sits
  // at the analytic optimum. Input index of p_frac is obs_dim + (k + 1).
  agent.critic = Mlp({obs_dim + act_dim, 2, 1});
  {
    std::vector<double>& w = agent.critic.params();
    const int in = obs_dim + act_dim;
    const int p_idx = obs_dim + k + 1;
    w[0 * in + p_idx] = 1.0;   // relu(p - a*)
    w[1 * in + p_idx] = -1.0;  // relu(a* - p)
    w[2 * in + 0] = -a_star;   // biases follow the weight block
    w[2 * in + 1] = a_star;
    w[2 * in + 2 + 0] = -1.0;  // output layer
    w[2 * in + 2 + 1] = -1.0;
  }

  for (int step = 0; step < 2000; ++step)
    actor_update(agent, 0, n, obs_dim, act_dim, buf, {0, 1, 2, 3}, 0.005, true, k);

  const std::vector<double> enc = encode_action(agent.actor.forward(std::vector<double>{0.1, -0.4}), k);
  CHECK(enc[k + 1] == doctest::Approx(a_star).epsilon(1e-2));
}

TEST_CASE("deterministic policy gradient matches finite differences through the whole path") {
  Rng rng = make_rng(11);
  const int n = 2, obs_dim = 3, k = 1;
  const int act_dim = action_encoding_dim(k);
  ReplayBuffer buf = make_buffer(n, obs_dim, k, 6, rng);
  std::vector<AgentNets> agents;
  for (int j = 0; j < n; ++j) agents.push_back(make_agent(obs_dim, n * (obs_dim + act_dim), k, {6}, rng));
  const std::vector<std::size_t> batch{0, 1, 2, 3};
  const int agent_index = 0;

  std::vector<double> grad;
  {
    AgentNets probe = agents[agent_index];
    actor_update(probe, agent_index, n, obs_dim, act_dim, buf, batch, 0.0, true, k, &grad);
  }

  // Objective the update ascends: mean_b Q(o_b, a_b with our slot replaced by
  // the policy output).
  auto objective = [&](const Mlp& actor) {
    double total = 0;
    for (std::size_t idx : batch) {
      const Experience& e = buf[idx];
      const std::span<const double> on(e.obs.data() + agent_index * obs_dim, obs_dim);
      const std::vector<double> enc = encode_action(actor.forward(on), k);
      std::vector<double> act = e.act;
      std::copy(enc.begin(), enc.end(), act.begin() + agent_index * act_dim);
      std::vector<double> x = e.obs;
      x.insert(x.end(), act.begin(), act.end());
      total += agents[agent_index].critic.forward(x)[0];
    }
    return total / batch.size();
  };

  const double h = 1e-5;
  for (std::size_t i = 0; i < agents[agent_index].actor.param_count(); ++i) {
    Mlp actor_up = agents[agent_index].actor;
    actor_up.params()[i] += h;
    Mlp actor_dn = agents[agent_index].actor;
    actor_dn.params()[i] -= h;
    const double fd = (objective(actor_up) - objective(actor_dn)) / (2 * h);
    // actor_update accumulates the gradient of -J.
    CHECK(close_rel(-grad[i], fd, kGradTol));
  }
}

TEST_CASE("decentralized execution: actor input is exactly the local observation") {
  Rng rng = make_rng(20);
  const int obs_dim = 11, k = 3;
  const AgentNets agent = make_agent(obs_dim, 5 * (obs_dim + action_encoding_dim(k)), k, {64, 32, 32}, rng);
  CHECK(agent.actor.input_dim() == obs_dim);
  CHECK(agent.actor.output_dim() == action_encoding_dim(k));
  CHECK(agent.actor_target.dims() == agent.actor.dims());
  CHECK(agent.critic_target.dims() == agent.critic.dims());
  CHECK(agent.actor_target.params() == agent.actor.params());
}

TEST_CASE("training config invariants are enforced") {
  Rng rng = make_rng(21);
  Scenario sc;
  sc.devices.push_back(DeviceConfig{});
  sc.devices[0].x_km = 0.1;
  sc.tasks.push_back(Task{5e8, 5e5, 3.0});
  OffloadEnv env(sc);
  TrainConfig cfg;
  cfg.episodes = 1;
  cfg.steps = 1;
  cfg.gamma = 1.5;
  CHECK_THROWS_AS(train(env, cfg, TrainMode::Cooperative, 0), ContractError);
  cfg.gamma = 0.85;
  cfg.zeta = 0.0;
  CHECK_THROWS_AS(train(env, cfg, TrainMode::Cooperative, 0), ContractError);
}

TEST_CASE("divergent training aborts with a diagnostic") {
  Rng rng = make_rng(22);
  Scenario sc;
  for (int i = 0; i < 2; ++i) {
    DeviceConfig dev;
    dev.x_km = 0.1 + 0.05 * i;
    sc.devices.push_back(dev);
    sc.tasks.push_back(Task{5e8, 5e5, 3.0});
  }
  sc.radio.num_subbands = 2;
  OffloadEnv env(sc);
  TrainConfig cfg;
  cfg.episodes = 3;
  cfg.steps = 4;
  cfg.batch = 2;
  cfg.hidden = {8};
  cfg.lr = 1e200;  // parameter products overflow to inf, then inf - inf poisons the TD error
  CHECK_THROWS_AS(train(env, cfg, TrainMode::Cooperative, 0), DivergenceError);
}

TEST_CASE("independent mode touches only the agent's own slices") {
  Rng rng = make_rng(12);
  const int n = 3, obs_dim = 3, k = 1;
  const int act_dim = action_encoding_dim(k);
  ReplayBuffer buf = make_buffer(n, obs_dim, k, 8, rng);
  AgentNets agent = make_agent(obs_dim, obs_dim + act_dim, k, {6}, rng);
  std::vector<const Mlp*> targets(n, &agent.actor_target);
  const std::vector<std::size_t> batch{0, 1, 2, 3};
  const CriticUpdateResult res =
      critic_update(agent, 1, n, obs_dim, act_dim, buf, batch, targets, 0.85, 0.01, false, k);
  CHECK(std::isfinite(res.loss));
  const ActorUpdateResult ares =
      actor_update(agent, 1, n, obs_dim, act_dim, buf, batch, 0.01, false, k);
  CHECK(std::isfinite(ares.grad_norm));
}
