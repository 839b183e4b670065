#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bcmec/env.hpp"

using namespace bcmec;

namespace {

Scenario small_scenario(int n, int k) {
  Scenario sc;
  sc.radio.num_subbands = k;
  for (int i = 0; i < n; ++i) {
    DeviceConfig dev;
    dev.x_km = 0.1 + 0.03 * i;
    sc.devices.push_back(dev);
    sc.tasks.push_back(Task{5e8, 5e5, 3.0});
  }
  validate(sc);
  return sc;
}

OffloadAction feasible_local(const DeviceConfig& dev) {
  OffloadAction a;
  a.mode = OffloadMode::Local;
  a.local_cpu_hz = dev.cpu_budget_hz;
  a.verify_cpu_hz = dev.verify_budget_hz;
  return a;
}

OffloadAction feasible_offload(const DeviceConfig& dev, int channel) {
  OffloadAction a;
  a.mode = OffloadMode::Offload;
  a.channel = channel;
  a.tx_power_w = dev.max_tx_power_w;
  a.local_cpu_hz = dev.cpu_budget_hz;
  a.verify_cpu_hz = dev.verify_budget_hz;
  return a;
}

}  // namespace

TEST_CASE("reset is deterministic and zeroes the radio matrices") {
  EnvConfig cfg;
  cfg.task_ranges = TaskRanges{};
  OffloadEnv env(small_scenario(4, 3), cfg);
  const EnvState a = env.reset(42);
  const EnvState b = env.reset(42);
  CHECK(state_digest(a) == state_digest(b));
  for (double c : a.channel) CHECK(c == 0.0);
  for (double p : a.power) CHECK(p == 0.0);
  CHECK(a.cpu_avail[0] == env.scenario().devices[0].cpu_budget_hz);

  const EnvState c = env.reset(43);
  CHECK(state_digest(a) != state_digest(c));  // tasks redrawn differently
}

TEST_CASE("a 50-device scenario yields 50-row state matrices") {
  OffloadEnv env(small_scenario(50, 3));
  const EnvState s = env.reset(0);
  CHECK(s.task.size() == 50);
  CHECK(s.channel.size() == 50u * 3);
  CHECK(s.power.size() == 50u * 3);
  CHECK(s.transaction.size() == 50);
}

TEST_CASE("all-local step earns only mining utility") {
  OffloadEnv env(small_scenario(3, 2));
  env.reset(1);
  JointAction actions;
  for (const DeviceConfig& dev : env.scenario().devices) actions.push_back(feasible_local(dev));
  const StepOutcome out = env.step(actions);

  CHECK(out.violations.empty());
  for (double u : out.offload_utility) CHECK(u == 0.0);
  double mine_sum = 0;
  for (const MiningReport& mr : out.mining_report) {
    const double t = por_latency(env.scenario().devices[mr.device], env.scenario().consensus,
                                 actions[mr.device].verify_cpu_hz);
    CHECK(mr.t_por_s == doctest::Approx(t));
    CHECK(mr.utility ==
          doctest::Approx(mining_utility(t, env.state().task[mr.device].deadline_s)));
    mine_sum += mr.utility;
  }
  CHECK(out.system_reward == doctest::Approx(mine_sum).epsilon(1e-12));
}

TEST_CASE("single offloader reward composes offloading and mining utility") {
  OffloadEnv env(small_scenario(1, 2));
  env.reset(2);
  const DeviceConfig& dev = env.scenario().devices[0];
  const Task task = env.state().task[0];
  JointAction actions{feasible_offload(dev, 1)};
  const StepOutcome out = env.step(actions);

  const double rate = solo_uplink_rate(dev, dev.max_tx_power_w, env.scenario().radio);
  const CostReport local = local_reference_cost(task, dev);
  const CostReport chosen =
      offload_cost(task, rate, dev.max_tx_power_w, env.scenario().edge_cpu_hz);
  const double j_off = offloading_utility(local, chosen, dev.weight_time, dev.weight_energy);
  const double t_mine = por_latency(dev, env.scenario().consensus, dev.verify_budget_hz);
  const double j_mine = mining_utility(t_mine, task.deadline_s);

  CHECK(out.per_agent_reward[0] == doctest::Approx(j_off + j_mine).epsilon(1e-12));
  CHECK(out.system_reward == out.per_agent_reward[0]);
}

TEST_CASE("three devices forced onto one channel feel mutual interference") {
  OffloadEnv env(small_scenario(3, 1));
  env.reset(3);
  const Scenario& sc = env.scenario();
  JointAction actions;
  for (const DeviceConfig& dev : sc.devices) actions.push_back(feasible_offload(dev, 0));
  const StepOutcome out = env.step(actions);

  double expected = 0;
  double no_interference = 0;
  for (int n = 0; n < 3; ++n) {
    const DeviceConfig& dev = sc.devices[n];
    const Task& task = env.state().task[n];
    const CostReport local = local_reference_cost(task, dev);

    double denom = sc.radio.noise_power_w;
    for (int j = 0; j < 3; ++j)
      if (j != n) denom += actions[j].tx_power_w * channel_gain(sc.devices[j], sc.radio);
    const double rate =
        sc.radio.subband_hz *
        std::log2(1.0 + actions[n].tx_power_w * channel_gain(dev, sc.radio) / denom);
    const CostReport chosen = offload_cost(task, rate, actions[n].tx_power_w, sc.edge_cpu_hz);
    double u = offloading_utility(local, chosen, dev.weight_time, dev.weight_energy);
    if (chosen.latency_s > task.deadline_s) u = -dev.weight_time;
    expected += u;

    const CostReport solo =
        offload_cost(task, solo_uplink_rate(dev, actions[n].tx_power_w, sc.radio),
                     actions[n].tx_power_w, sc.edge_cpu_hz);
    no_interference += offloading_utility(local, solo, dev.weight_time, dev.weight_energy);
  }
  double off_sum = 0;
  for (double u : out.offload_utility) off_sum += u;
  CHECK(off_sum == doctest::Approx(expected).epsilon(1e-9));
  CHECK(off_sum < no_interference);
}

TEST_CASE("observation layout and locality") {
  OffloadEnv env(small_scenario(4, 3));
  env.reset(4);
  CHECK(env.observation_dim() == 2 + 3 + 3 + 2 + 1);
  const std::vector<double> o0 = env.observe(0);
  CHECK(static_cast<int>(o0.size()) == env.observation_dim());

  // Identical configs and identical local slices give identical observations.
  Scenario sc = small_scenario(2, 3);
  sc.devices[1] = sc.devices[0];
  sc.tasks[1] = sc.tasks[0];
  OffloadEnv twin(sc);
  twin.reset(0);
  CHECK(twin.observe(0) == twin.observe(1));

  const std::vector<double> joint = env.joint_observation();
  CHECK(joint.size() == 4u * env.observation_dim());
  CHECK(std::equal(o0.begin(), o0.end(), joint.begin()));

  CHECK_THROWS_AS(env.observe(7), ContractError);
}

TEST_CASE("system reward is the exact sum of per-agent rewards") {
  OffloadEnv env(small_scenario(5, 2));
  env.reset(5);
  Rng rng = make_rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    JointAction actions;
    for (const DeviceConfig& dev : env.scenario().devices) {
      if (uniform01(rng) < 0.4)
        actions.push_back(feasible_local(dev));
      else
        actions.push_back(feasible_offload(dev, uniform_int(rng, 2)));
    }
    const StepOutcome out = env.step(actions);
    double sum = 0;
    for (double r : out.per_agent_reward) sum += r;
    CHECK(out.system_reward == sum);  // bit-exact
  }
}

TEST_CASE("reward equals independently composed offloading plus mining utility") {
  Scenario sc = small_scenario(4, 2);
  for (Task& t : sc.tasks) t.deadline_s = 50.0;  // no deadline penalties here
  OffloadEnv env(sc);
  env.reset(6);
  Rng rng = make_rng(66);
  for (int trial = 0; trial < 50; ++trial) {
    JointAction actions;
    for (const DeviceConfig& dev : sc.devices) {
      OffloadAction a;
      if (uniform01(rng) < 0.3) {
        a = feasible_local(dev);
        a.local_cpu_hz = uniform_in(rng, 0.2, 1.0) * dev.cpu_budget_hz;
      } else {
        a = feasible_offload(dev, uniform_int(rng, 2));
        a.tx_power_w = uniform_in(rng, 0.1, 1.0) * dev.max_tx_power_w;
        a.local_cpu_hz = uniform_in(rng, 0.2, 1.0) * dev.cpu_budget_hz;
      }
      a.verify_cpu_hz = uniform_in(rng, 0.1, 1.0) * dev.verify_budget_hz;
      actions.push_back(a);
    }
    const StepOutcome out = env.step(actions);
    REQUIRE(out.violations.empty());

    double expected = total_offloading_utility(actions, sc);
    for (const MiningReport& mr : out.mining_report) expected += mr.utility;
    CHECK(out.system_reward == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("every device occupies at most one channel after a step") {
  OffloadEnv env(small_scenario(6, 3));
  env.reset(7);
  JointAction actions;
  Rng rng = make_rng(8);
  for (const DeviceConfig& dev : env.scenario().devices)
    actions.push_back(feasible_offload(dev, uniform_int(rng, 3)));
  const StepOutcome out = env.step(actions);
  for (int i = 0; i < 6; ++i) {
    double row = 0;
    for (int c = 0; c < 3; ++c) row += out.next_state.channel[i * 3 + c];
    CHECK(row <= 1.0);
  }
}

TEST_CASE("infeasible actions are coerced and recorded; feasible ones are untouched") {
  OffloadEnv env(small_scenario(2, 2));
  env.reset(9);
  const DeviceConfig& dev = env.scenario().devices[0];

  JointAction bad{feasible_offload(dev, 0), feasible_local(env.scenario().devices[1])};
  bad[0].tx_power_w = dev.max_tx_power_w * 2.0;
  bad[0].channel = 5;
  bad[1].local_cpu_hz = -1.0;
  const StepOutcome out = env.step(bad);

  // Device 0: power and channel coerced. Device 1: cpu coerced to the floor,
  // which in turn blows the deadline.
  REQUIRE(out.violations.size() == 4);
  auto has = [&](int device, const char* what) {
    for (const Violation& v : out.violations)
      if (v.device == device && v.constraint == what) return true;
    return false;
  };
  CHECK(has(0, "power"));
  CHECK(has(0, "channel"));
  CHECK(has(1, "local_cpu"));
  CHECK(has(1, "deadline"));
  CHECK(out.executed[0].tx_power_w == dev.max_tx_power_w);
  CHECK(out.executed[0].channel == 1);
  CHECK(out.executed[1].local_cpu_hz > 0);

  // Stepping with feasible allocations records nothing: coercion is
  // idempotent on the box constraints.
  JointAction good = out.executed;
  good[1].local_cpu_hz = env.scenario().devices[1].cpu_budget_hz;
  const StepOutcome again = env.step(good);
  CHECK(again.violations.empty());
}

TEST_CASE("deadline violations flag the device and apply the latency penalty") {
  Scenario sc = small_scenario(1, 1);
  sc.tasks[0].deadline_s = 1e-6;  // impossible deadline
  OffloadEnv env(sc);
  env.reset(10);
  JointAction actions{feasible_local(sc.devices[0])};
  const StepOutcome out = env.step(actions);
  REQUIRE(out.violations.size() == 1);
  CHECK(out.violations[0].constraint == "deadline");
  CHECK(out.offload_utility[0] == -sc.devices[0].weight_time);
}

TEST_CASE("step trace serializes one record per step") {
  OffloadEnv env(small_scenario(2, 2));
  env.reset(11);
  JointAction actions{feasible_local(env.scenario().devices[0]),
                      feasible_offload(env.scenario().devices[1], 1)};
  const EnvState before = env.state();
  const StepOutcome out = env.step(actions);
  const std::string line = step_trace_json(0, before, out);
  CHECK(line.find("\"step\":0") != std::string::npos);
  CHECK(line.find("state_digest") != std::string::npos);
  CHECK(line.find("offload") != std::string::npos);
}
