#include "bcmec/comms.hpp"

#include <cmath>

namespace bcmec {

namespace {
constexpr double kBitsPerByte = 8.0;
}

double uplink_rate(int n, const JointAction& actions, const Scenario& sc) {
  const OffloadAction& a = actions.at(n);
  if (a.mode != OffloadMode::Offload)
    throw ContractError("uplink_rate called for a device in local mode");

  const double signal = a.tx_power_w * channel_gain(sc.devices[n], sc.radio);
  double interference = 0;
  for (int j = 0; j < sc.num_devices(); ++j) {
    if (j == n) continue;
    const OffloadAction& other = actions[j];
    if (other.mode == OffloadMode::Offload && other.channel == a.channel)
      interference += other.tx_power_w * channel_gain(sc.devices[j], sc.radio);
  }
  const double sinr = signal / (sc.radio.noise_power_w + interference);
  return sc.radio.subband_hz * std::log2(1.0 + sinr);
}

double solo_uplink_rate(const DeviceConfig& dev, double tx_power_w, const RadioConfig& radio) {
  const double sinr = tx_power_w * channel_gain(dev, radio) / radio.noise_power_w;
  return radio.subband_hz * std::log2(1.0 + sinr);
}

CostReport local_cost(const Task& task, const OffloadAction& action, double energy_coeff) {
  if (action.mode != OffloadMode::Local)
    throw ContractError("local_cost called for an offloading action");
  CostReport r;
  r.exec_time_s = task.cycles / action.local_cpu_hz;
  r.latency_s = r.exec_time_s;
  r.energy_j = energy_coeff * action.local_cpu_hz * action.local_cpu_hz * task.cycles;
  return r;
}

CostReport offload_cost(const Task& task, double rate_bps, double tx_power_w, double edge_cpu_hz) {
  if (rate_bps <= 0) throw ContractError("offload_cost requires a positive rate");
  CostReport r;
  const double bits = task.input_bytes * kBitsPerByte;
  r.rate_bps = rate_bps;
  r.uplink_time_s = bits / rate_bps;
  r.exec_time_s = task.cycles / edge_cpu_hz;
  r.latency_s = r.uplink_time_s + r.exec_time_s;
  r.uplink_energy_j = tx_power_w * r.uplink_time_s;
  r.energy_j = r.uplink_energy_j;
  return r;
}

double offloading_utility(const CostReport& local, const CostReport& chosen, double weight_time,
                          double weight_energy) {
  return weight_time * (local.latency_s - chosen.latency_s) / local.latency_s +
         weight_energy * (local.energy_j - chosen.energy_j) / local.energy_j;
}

CostReport local_reference_cost(const Task& task, const DeviceConfig& dev) {
  OffloadAction full_budget;
  full_budget.mode = OffloadMode::Local;
  full_budget.local_cpu_hz = dev.cpu_budget_hz;
  return local_cost(task, full_budget, dev.energy_coeff);
}

double total_offloading_utility(const JointAction& actions, const Scenario& sc) {
  double total = 0;
  for (int n = 0; n < sc.num_devices(); ++n) {
    const OffloadAction& a = actions[n];
    if (a.mode == OffloadMode::Local) continue;  // utility is exactly zero

    const DeviceConfig& dev = sc.devices[n];
    const Task& task = sc.tasks[n];
    const CostReport local = local_reference_cost(task, dev);
    const double rate = uplink_rate(n, actions, sc);
    const CostReport chosen = offload_cost(task, rate, a.tx_power_w, sc.edge_cpu_hz);
    total += offloading_utility(local, chosen, dev.weight_time, dev.weight_energy);
  }
  return total;
}

}  // namespace bcmec
