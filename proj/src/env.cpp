#include "bcmec/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace bcmec {

namespace {
// Coercion floor for "positive" box constraints, as a fraction of the budget.
constexpr double kFeasibleFloor = 1e-9;
}  // namespace

OffloadEnv::OffloadEnv(Scenario scenario, EnvConfig config)
    : scenario_(std::move(scenario)), config_(config) {
  validate(scenario_);
  gains_.reserve(scenario_.devices.size());
  for (const DeviceConfig& d : scenario_.devices) gains_.push_back(channel_gain(d, scenario_.radio));
  reset(scenario_.seed);
}

EnvState OffloadEnv::reset(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const int n = num_devices();
  const int k = num_channels();

  state_.task = scenario_.tasks;
  if (config_.task_ranges) {
    const TaskRanges& tr = *config_.task_ranges;
    for (Task& t : state_.task) {
      t.input_bytes = uniform_in(rng, tr.bytes_min, tr.bytes_max);
      t.cycles = uniform_in(rng, tr.cycles_min, tr.cycles_max);
      t.deadline_s = uniform_in(rng, tr.deadline_min, tr.deadline_max);
    }
  }
  state_.channel.assign(static_cast<std::size_t>(n) * k, 0.0);
  state_.power.assign(static_cast<std::size_t>(n) * k, 0.0);
  state_.cpu_avail.resize(n);
  state_.verify_avail.resize(n);
  state_.transaction.resize(n);
  for (int i = 0; i < n; ++i) {
    state_.cpu_avail[i] = scenario_.devices[i].cpu_budget_hz;
    state_.verify_avail[i] = scenario_.devices[i].verify_budget_hz;
    state_.transaction[i] = scenario_.consensus.part_bytes;
  }
  reputations_.assign(n, 0.0);
  round_ = 0;
  return state_;
}

OffloadAction OffloadEnv::coerce(int n, OffloadAction a, std::vector<Violation>* out) const {
  const DeviceConfig& dev = scenario_.devices[n];
  const int k = num_channels();
  auto flag = [&](const char* what) { out->push_back({n, what}); };

  if (a.mode == OffloadMode::Offload) {
    if (a.channel < 0 || a.channel >= k) {
      flag("channel");
      a.channel = std::clamp(a.channel, 0, k - 1);
    }
    const double p_floor = dev.max_tx_power_w * kFeasibleFloor;
    if (a.tx_power_w <= 0 || a.tx_power_w > dev.max_tx_power_w) {
      flag("power");
      a.tx_power_w = std::clamp(a.tx_power_w, p_floor, dev.max_tx_power_w);
    }
  }
  const double f_floor = dev.cpu_budget_hz * kFeasibleFloor;
  if (a.local_cpu_hz <= 0 || a.local_cpu_hz > dev.cpu_budget_hz) {
    flag("local_cpu");
    a.local_cpu_hz = std::clamp(a.local_cpu_hz, f_floor, dev.cpu_budget_hz);
  }
  const double v_floor = dev.verify_budget_hz * kFeasibleFloor;
  if (a.verify_cpu_hz <= 0 || a.verify_cpu_hz > dev.verify_budget_hz) {
    flag("verify_cpu");
    a.verify_cpu_hz = std::clamp(a.verify_cpu_hz, v_floor, dev.verify_budget_hz);
  }
  return a;
}

StepOutcome OffloadEnv::step(const JointAction& action) {
  const int n = num_devices();
  const int k = num_channels();
  if (static_cast<int>(action.size()) != n)
    throw ContractError("joint action length must equal device count");

  StepOutcome out;
  out.executed.reserve(n);
  for (int i = 0; i < n; ++i) out.executed.push_back(coerce(i, action[i], &out.violations));

  // Offloading side: costs under the joint (interference-coupled) rates.
  out.per_agent_cost.resize(n);
  out.offload_utility.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const OffloadAction& a = out.executed[i];
    const DeviceConfig& dev = scenario_.devices[i];
    const Task& task = state_.task[i];

    if (a.mode == OffloadMode::Local) {
      OffloadAction local_ref = a;
      local_ref.mode = OffloadMode::Local;
      out.per_agent_cost[i] = local_cost(task, local_ref, dev.energy_coeff);
      // utility stays exactly zero
    } else {
      const CostReport local = local_reference_cost(task, dev);
      const double rate = uplink_rate(i, out.executed, scenario_);
      if (rate > 0) {
        const CostReport chosen = offload_cost(task, rate, a.tx_power_w, scenario_.edge_cpu_hz);
        out.per_agent_cost[i] = chosen;
        out.offload_utility[i] =
            offloading_utility(local, chosen, dev.weight_time, dev.weight_energy);
      } else {
        // SINR underflowed to zero: the upload never completes. The deadline
        // rule below turns this into the latency penalty.
        CostReport stalled;
        stalled.latency_s = std::numeric_limits<double>::infinity();
        out.per_agent_cost[i] = stalled;
        out.offload_utility[i] = -std::numeric_limits<double>::infinity();
      }
    }
    if (violates_deadline(out.per_agent_cost[i], task)) {
      out.violations.push_back({i, "deadline"});
      out.offload_utility[i] = -dev.weight_time;  // full latency penalty
    }
  }

  // Mining side: selected miners (all devices when num_miners == 0) earn the
  // mining utility of their verification latency under the allocated CPU.
  std::vector<double> mine(n, 0.0);
  const int m = scenario_.consensus.num_miners == 0 ? n : scenario_.consensus.num_miners;
  const std::vector<MinerState> miners = select_miners(scenario_, reputations_, m, round_);
  out.mining_report.reserve(miners.size());
  for (const MinerState& ms : miners) {
    const int i = ms.device_index;
    const double t = por_latency(scenario_.devices[i], scenario_.consensus,
                                 out.executed[i].verify_cpu_hz);
    const double u = mining_utility(t, state_.task[i].deadline_s);
    mine[i] = u;
    out.mining_report.push_back({i, t, u});
  }
  reputations_ = mine;

  out.per_agent_reward.resize(n);
  out.system_reward = 0;
  for (int i = 0; i < n; ++i) {
    out.per_agent_reward[i] = out.offload_utility[i] + mine[i];
    out.system_reward += out.per_agent_reward[i];
  }

  // Next state: occupancy and power from the executed actions, budgets minus
  // allocations; tasks and pending transactions persist within the episode.
  EnvState next = state_;
  std::fill(next.channel.begin(), next.channel.end(), 0.0);
  std::fill(next.power.begin(), next.power.end(), 0.0);
  for (int i = 0; i < n; ++i) {
    const OffloadAction& a = out.executed[i];
    if (a.mode == OffloadMode::Offload) {
      next.channel[static_cast<std::size_t>(i) * k + a.channel] = 1.0;
      next.power[static_cast<std::size_t>(i) * k + a.channel] = a.tx_power_w;
    }
    next.cpu_avail[i] = scenario_.devices[i].cpu_budget_hz - a.local_cpu_hz;
    next.verify_avail[i] = scenario_.devices[i].verify_budget_hz - a.verify_cpu_hz;
  }
  out.next_state = next;
  state_ = std::move(next);
  ++round_;
  return out;
}

std::vector<double> OffloadEnv::observe(int n) const {
  if (n < 0 || n >= num_devices()) throw ContractError("observe: device index out of range");
  const int k = num_channels();
  const DeviceConfig& dev = scenario_.devices[n];
  std::vector<double> o;
  o.reserve(observation_dim());
  o.push_back(state_.task[n].input_bytes / config_.obs_bytes_scale);
  o.push_back(state_.task[n].cycles / config_.obs_cycles_scale);
  for (int c = 0; c < k; ++c) o.push_back(state_.channel[static_cast<std::size_t>(n) * k + c]);
  for (int c = 0; c < k; ++c)
    o.push_back(state_.power[static_cast<std::size_t>(n) * k + c] / dev.max_tx_power_w);
  o.push_back(state_.cpu_avail[n] / dev.cpu_budget_hz);
  o.push_back(state_.verify_avail[n] / dev.verify_budget_hz);
  o.push_back(state_.transaction[n] / scenario_.consensus.part_bytes);
  return o;
}

std::vector<double> OffloadEnv::joint_observation() const {
  std::vector<double> o;
  o.reserve(static_cast<std::size_t>(num_devices()) * observation_dim());
  for (int i = 0; i < num_devices(); ++i) {
    const std::vector<double> oi = observe(i);
    o.insert(o.end(), oi.begin(), oi.end());
  }
  return o;
}

static nlohmann::json cost_report_to_json(const CostReport& c) {
  auto finite = [](double v) { return std::isfinite(v) ? v : -1.0; };  // inf marks a stalled upload
  return nlohmann::json{{"latency_s", finite(c.latency_s)},
                        {"energy_j", finite(c.energy_j)},
                        {"rate_bps", c.rate_bps},
                        {"uplink_time_s", finite(c.uplink_time_s)},
                        {"exec_time_s", c.exec_time_s},
                        {"uplink_energy_j", finite(c.uplink_energy_j)}};
}

std::uint64_t state_digest(const EnvState& state) {
  std::vector<double> flat;
  for (const Task& t : state.task) {
    flat.push_back(t.input_bytes);
    flat.push_back(t.cycles);
    flat.push_back(t.deadline_s);
  }
  flat.insert(flat.end(), state.channel.begin(), state.channel.end());
  flat.insert(flat.end(), state.power.begin(), state.power.end());
  flat.insert(flat.end(), state.cpu_avail.begin(), state.cpu_avail.end());
  flat.insert(flat.end(), state.verify_avail.begin(), state.verify_avail.end());
  flat.insert(flat.end(), state.transaction.begin(), state.transaction.end());
  std::vector<std::uint8_t> bytes(flat.size() * sizeof(double));
  std::memcpy(bytes.data(), flat.data(), bytes.size());
  return sim_hash(bytes);
}

std::string step_trace_json(long step, const EnvState& state, const StepOutcome& outcome) {
  nlohmann::json j;
  j["step"] = step;
  char digest[32];
  std::snprintf(digest, sizeof digest, "%016llx",
                static_cast<unsigned long long>(state_digest(state)));
  j["state_digest"] = digest;
  j["actions"] = nlohmann::json::array();
  for (const OffloadAction& a : outcome.executed) {
    j["actions"].push_back({{"mode", a.mode == OffloadMode::Local ? "local" : "offload"},
                            {"channel", a.channel},
                            {"tx_power_w", a.tx_power_w},
                            {"local_cpu_hz", a.local_cpu_hz},
                            {"verify_cpu_hz", a.verify_cpu_hz}});
  }
  j["rewards"] = outcome.per_agent_reward;
  j["system_reward"] = outcome.system_reward;
  j["costs"] = nlohmann::json::array();
  for (const CostReport& c : outcome.per_agent_cost) j["costs"].push_back(cost_report_to_json(c));
  j["violations"] = nlohmann::json::array();
  for (const Violation& v : outcome.violations)
    j["violations"].push_back({{"device", v.device}, {"constraint", v.constraint}});
  return j.dump();
}

}  // namespace bcmec
