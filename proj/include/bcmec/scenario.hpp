#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcmec/errors.hpp"

namespace bcmec {

// One device's IoT workload.
struct Task {
  double cycles = 0;       // CPU cycles required to finish the task
  double input_bytes = 0;  // task input size
  double deadline_s = 0;   // maximum permissible latency
};

// Uplink radio parameters shared by all devices.
struct RadioConfig {
  int num_subbands = 30;
  double subband_hz = 2e6;        // per sub-band bandwidth W
  double noise_power_w = 1e-14;   // background noise variance sigma^2
  double pathloss_intercept_db = 140.7;
  double pathloss_slope_db = 36.7;
  double min_distance_km = 0.001;  // clamp for the path-loss log
};

struct DeviceConfig {
  double x_km = 0;
  double y_km = 0;
  double max_tx_power_w = 0.5;    // per-channel transmit budget
  double cpu_budget_hz = 5e8;     // local compute capacity F_n
  double verify_budget_hz = 5e8;  // mining CPU budget Phi_n
  double energy_coeff = 1e-27;    // chip energy coefficient kappa (default, overridable)
  double weight_time = 0.5;       // preference weights; must sum to 1
  double weight_energy = 0.5;
  double uplink_bps = 8e6;    // miner-to-manager uplink rate
  double downlink_bps = 8e6;  // manager-to-miner downlink rate
};

struct ConsensusConfig {
  double part_bytes = 5e3;           // transaction part size handled by one miner
  double result_bytes = 5e2;         // verified-result size for one part
  double block_bytes = 5e4;          // full block size
  double block_result_bytes = 5e3;   // verified-result size for the full block
  double broadcast_coeff = 1e-8;     // seconds per byte per network-scale unit
  double dpos_verify_budget_hz = 1e9;  // computation budget used in the DPoS latency model
  double scale_per_miner = 1.0;      // network-scale value per miner touching a message
  int tx_per_block = 10;
  int num_miners = 0;  // miners selected per round; 0 means every device mines
};

// A full system instance: one base station with an edge server at the origin,
// N devices, one task per device.
struct Scenario {
  RadioConfig radio;
  std::vector<DeviceConfig> devices;
  std::vector<Task> tasks;
  double edge_cpu_hz = 1e10;  // MEC server capacity f^e
  ConsensusConfig consensus;
  std::uint64_t seed = 0;

  int num_devices() const { return static_cast<int>(devices.size()); }
};

struct TaskRanges {
  double bytes_min = 2.5e5, bytes_max = 1e6;
  double cycles_min = 4e8, cycles_max = 1.2e9;
  double deadline_min = 2.0, deadline_max = 4.0;
};

struct GeneratorParams {
  int n_devices = 1;
  DeviceConfig device_template;
  double radius_km = 0.3;
  TaskRanges task_ranges;
  std::uint64_t seed = 0;
  RadioConfig radio;
  double edge_cpu_hz = 1e10;
  ConsensusConfig consensus;
};

// Throw ValidationError naming the first violated invariant.
void validate(const Scenario& sc);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);
std::string scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const std::string& text);

// Devices placed uniformly in a disc around the base station at the origin,
// task fields drawn uniformly from the ranges. Pure function of its inputs.
Scenario generate_scenario(const GeneratorParams& params);

// CSV trace with columns device_id,x_km,y_km,task_bytes,task_cycles,deadline_s.
// Radio, consensus and per-device budget fields come from `params`; positions
// and tasks come from the trace.
Scenario load_trace(const std::string& path, const GeneratorParams& params);

double device_distance_km(const DeviceConfig& dev, const RadioConfig& radio);

// Distance-dependent path loss: gain = 10^(-(intercept + slope*log10 d)/10).
double channel_gain(const DeviceConfig& dev, const RadioConfig& radio);

}  // namespace bcmec
