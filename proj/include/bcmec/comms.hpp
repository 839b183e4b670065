#pragma once

#include <vector>

#include "bcmec/scenario.hpp"

namespace bcmec {

enum class OffloadMode { Local, Offload };

// One device's joint decision for a time slot: where to run the task, which
// sub-band and transmit power when offloading, plus local and verification
// CPU allocations.
struct OffloadAction {
  OffloadMode mode = OffloadMode::Local;
  int channel = 0;            // sub-band index, used only when offloading
  double tx_power_w = 0;      // p_n, used only when offloading
  double local_cpu_hz = 0;    // f_n^l
  double verify_cpu_hz = 0;   // phi_n
};

using JointAction = std::vector<OffloadAction>;

struct CostReport {
  double latency_s = 0;
  double energy_j = 0;
  double rate_bps = 0;        // 0 when local
  double uplink_time_s = 0;   // 0 when local
  double exec_time_s = 0;     // local or edge execution time
  double uplink_energy_j = 0;
};

// Shannon rate with same-channel interference. Requires device n to be
// offloading; every other device offloading on the same sub-band contributes
// p*h to the denominator.
double uplink_rate(int n, const JointAction& actions, const Scenario& sc);

// Interference-free rate for a device alone on a sub-band.
double solo_uplink_rate(const DeviceConfig& dev, double tx_power_w, const RadioConfig& radio);

CostReport local_cost(const Task& task, const OffloadAction& action, double energy_coeff);

// Uplink plus edge execution; the downlink is not modelled.
CostReport offload_cost(const Task& task, double rate_bps, double tx_power_w, double edge_cpu_hz);

// Weighted relative saving versus local execution. Zero when chosen == local,
// negative when offloading costs more than running locally.
double offloading_utility(const CostReport& local, const CostReport& chosen, double weight_time,
                          double weight_energy);

// The counterfactual an offloading device is measured against: running the
// task locally at its full CPU budget. Local-mode devices are their own
// reference, which pins their utility at exactly zero.
CostReport local_reference_cost(const Task& task, const DeviceConfig& dev);

double total_offloading_utility(const JointAction& actions, const Scenario& sc);

inline bool violates_deadline(const CostReport& report, const Task& task) {
  return report.latency_s > task.deadline_s;
}

}  // namespace bcmec
