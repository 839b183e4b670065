#include "bcmec/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bcmec/rng.hpp"

namespace bcmec {

using nlohmann::json;

namespace {

void check(bool ok, const std::string& invariant) {
  if (!ok) throw ValidationError(invariant);
}

json require_field(const json& j, const std::string& ctx, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError("missing field: " + ctx + key);
  return j.at(key);
}

double require_number(const json& j, const std::string& ctx, const std::string& key) {
  const json v = require_field(j, ctx, key);
  if (!v.is_number()) throw SchemaError("field is not a number: " + ctx + key);
  return v.get<double>();
}

double number_or(const json& j, const std::string& ctx, const std::string& key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json v = j.at(key);
  if (!v.is_number()) throw SchemaError("field is not a number: " + ctx + key);
  return v.get<double>();
}

int require_int(const json& j, const std::string& ctx, const std::string& key) {
  const json v = require_field(j, ctx, key);
  if (!v.is_number_integer()) throw SchemaError("field is not an integer: " + ctx + key);
  return v.get<int>();
}

int int_or(const json& j, const std::string& ctx, const std::string& key, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json v = j.at(key);
  if (!v.is_number_integer()) throw SchemaError("field is not an integer: " + ctx + key);
  return v.get<int>();
}

json radio_to_json(const RadioConfig& r) {
  return json{{"num_subbands", r.num_subbands},
              {"subband_hz", r.subband_hz},
              {"noise_power_w", r.noise_power_w},
              {"pathloss_intercept_db", r.pathloss_intercept_db},
              {"pathloss_slope_db", r.pathloss_slope_db},
              {"min_distance_km", r.min_distance_km}};
}

RadioConfig radio_from_json(const json& j) {
  RadioConfig r;
  r.num_subbands = require_int(j, "radio.", "num_subbands");
  r.subband_hz = require_number(j, "radio.", "subband_hz");
  r.noise_power_w = require_number(j, "radio.", "noise_power_w");
  r.pathloss_intercept_db = number_or(j, "radio.", "pathloss_intercept_db", 140.7);
  r.pathloss_slope_db = number_or(j, "radio.", "pathloss_slope_db", 36.7);
  r.min_distance_km = number_or(j, "radio.", "min_distance_km", 0.001);
  return r;
}

json device_to_json(const DeviceConfig& d) {
  return json{{"x_km", d.x_km},
              {"y_km", d.y_km},
              {"max_tx_power_w", d.max_tx_power_w},
              {"cpu_budget_hz", d.cpu_budget_hz},
              {"verify_budget_hz", d.verify_budget_hz},
              {"energy_coeff", d.energy_coeff},
              {"weight_time", d.weight_time},
              {"weight_energy", d.weight_energy},
              {"uplink_bps", d.uplink_bps},
              {"downlink_bps", d.downlink_bps}};
}

DeviceConfig device_from_json(const json& j, const std::string& ctx) {
  DeviceConfig d;
  d.x_km = require_number(j, ctx, "x_km");
  d.y_km = require_number(j, ctx, "y_km");
  d.max_tx_power_w = require_number(j, ctx, "max_tx_power_w");
  d.cpu_budget_hz = require_number(j, ctx, "cpu_budget_hz");
  d.verify_budget_hz = require_number(j, ctx, "verify_budget_hz");
  d.energy_coeff = number_or(j, ctx, "energy_coeff", 1e-27);
  d.weight_time = require_number(j, ctx, "weight_time");
  d.weight_energy = require_number(j, ctx, "weight_energy");
  d.uplink_bps = require_number(j, ctx, "uplink_bps");
  d.downlink_bps = require_number(j, ctx, "downlink_bps");
  return d;
}

json task_to_json(const Task& t) {
  return json{{"cycles", t.cycles}, {"input_bytes", t.input_bytes}, {"deadline_s", t.deadline_s}};
}

Task task_from_json(const json& j, const std::string& ctx) {
  Task t;
  t.cycles = require_number(j, ctx, "cycles");
  t.input_bytes = require_number(j, ctx, "input_bytes");
  t.deadline_s = require_number(j, ctx, "deadline_s");
  return t;
}

json consensus_to_json(const ConsensusConfig& c) {
  return json{{"part_bytes", c.part_bytes},
              {"result_bytes", c.result_bytes},
              {"block_bytes", c.block_bytes},
              {"block_result_bytes", c.block_result_bytes},
              {"broadcast_coeff", c.broadcast_coeff},
              {"dpos_verify_budget_hz", c.dpos_verify_budget_hz},
              {"scale_per_miner", c.scale_per_miner},
              {"tx_per_block", c.tx_per_block},
              {"num_miners", c.num_miners}};
}

ConsensusConfig consensus_from_json(const json& j) {
  ConsensusConfig c;
  c.part_bytes = require_number(j, "consensus.", "part_bytes");
  c.result_bytes = require_number(j, "consensus.", "result_bytes");
  c.block_bytes = require_number(j, "consensus.", "block_bytes");
  c.block_result_bytes = require_number(j, "consensus.", "block_result_bytes");
  c.broadcast_coeff = require_number(j, "consensus.", "broadcast_coeff");
  c.dpos_verify_budget_hz = require_number(j, "consensus.", "dpos_verify_budget_hz");
  c.scale_per_miner = number_or(j, "consensus.", "scale_per_miner", 1.0);
  c.tx_per_block = int_or(j, "consensus.", "tx_per_block", 10);
  c.num_miners = int_or(j, "consensus.", "num_miners", 0);
  return c;
}

}  // namespace

void validate(const Scenario& sc) {
  check(!sc.devices.empty(), "devices must be nonempty");
  check(sc.tasks.size() == sc.devices.size(), "tasks length must equal devices length");
  check(sc.edge_cpu_hz > 0, "edge_cpu_hz must be positive");

  const RadioConfig& r = sc.radio;
  check(r.num_subbands >= 1, "num_subbands must be at least 1");
  check(r.subband_hz > 0, "subband_hz must be positive");
  check(r.noise_power_w > 0, "noise_power_w must be positive");
  check(r.min_distance_km > 0, "min_distance_km must be positive");

  for (const DeviceConfig& d : sc.devices) {
    check(std::abs(d.weight_time + d.weight_energy - 1.0) <= 1e-9, "weights must sum to 1");
    check(d.weight_time >= 0 && d.weight_time <= 1, "weight_time must lie in [0,1]");
    check(d.max_tx_power_w > 0, "max_tx_power_w must be positive");
    check(d.cpu_budget_hz > 0, "cpu_budget_hz must be positive");
    check(d.verify_budget_hz > 0, "verify_budget_hz must be positive");
    check(d.energy_coeff > 0, "energy_coeff must be positive");
    check(d.uplink_bps > 0, "uplink_bps must be positive");
    check(d.downlink_bps > 0, "downlink_bps must be positive");
  }
  for (const Task& t : sc.tasks) {
    check(t.cycles > 0, "task cycles must be positive");
    check(t.input_bytes > 0, "task input_bytes must be positive");
    check(t.deadline_s > 0, "task deadline_s must be positive");
  }

  const ConsensusConfig& c = sc.consensus;
  check(c.part_bytes > 0, "part_bytes must be positive");
  check(c.result_bytes > 0, "result_bytes must be positive");
  check(c.block_bytes > 0, "block_bytes must be positive");
  check(c.block_result_bytes > 0, "block_result_bytes must be positive");
  check(c.part_bytes <= c.block_bytes, "part_bytes must not exceed block_bytes");
  check(c.broadcast_coeff >= 0, "broadcast_coeff must be nonnegative");
  check(c.dpos_verify_budget_hz > 0, "dpos_verify_budget_hz must be positive");
  check(c.tx_per_block >= 1, "tx_per_block must be at least 1");
  check(c.num_miners >= 0 && c.num_miners <= sc.num_devices(), "num_miners must lie in [0, N]");
}

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["seed"] = sc.seed;
  j["edge_cpu_hz"] = sc.edge_cpu_hz;
  j["radio"] = radio_to_json(sc.radio);
  j["consensus"] = consensus_to_json(sc.consensus);
  j["devices"] = json::array();
  for (const DeviceConfig& d : sc.devices) j["devices"].push_back(device_to_json(d));
  j["tasks"] = json::array();
  for (const Task& t : sc.tasks) j["tasks"].push_back(task_to_json(t));
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("not valid JSON: ") + e.what());
  }
  Scenario sc;
  sc.seed = require_field(j, "", "seed").get<std::uint64_t>();
  sc.edge_cpu_hz = require_number(j, "", "edge_cpu_hz");
  sc.radio = radio_from_json(require_field(j, "", "radio"));
  sc.consensus = consensus_from_json(require_field(j, "", "consensus"));

  const json devices = require_field(j, "", "devices");
  if (!devices.is_array()) throw SchemaError("field is not an array: devices");
  for (std::size_t i = 0; i < devices.size(); ++i) {
    sc.devices.push_back(device_from_json(devices[i], "devices[" + std::to_string(i) + "]."));
  }
  const json tasks = require_field(j, "", "tasks");
  if (!tasks.is_array()) throw SchemaError("field is not an array: tasks");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    sc.tasks.push_back(task_from_json(tasks[i], "tasks[" + std::to_string(i) + "]."));
  }
  validate(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_json(sc);
}

Scenario generate_scenario(const GeneratorParams& params) {
  if (params.n_devices < 1) throw ValidationError("n_devices must be at least 1");
  if (params.radius_km <= 0) throw ValidationError("radius_km must be positive");
  const TaskRanges& tr = params.task_ranges;
  if (tr.bytes_min > tr.bytes_max || tr.cycles_min > tr.cycles_max || tr.deadline_min > tr.deadline_max)
    throw ValidationError("task range min must not exceed max");
  if (tr.bytes_min <= 0 || tr.cycles_min <= 0 || tr.deadline_min <= 0)
    throw ValidationError("task ranges must be positive");

  Rng rng = make_rng(params.seed);
  Scenario sc;
  sc.radio = params.radio;
  sc.edge_cpu_hz = params.edge_cpu_hz;
  sc.consensus = params.consensus;
  sc.seed = params.seed;
  sc.devices.reserve(params.n_devices);
  sc.tasks.reserve(params.n_devices);
  for (int i = 0; i < params.n_devices; ++i) {
    DeviceConfig d = params.device_template;
    // Uniform over the disc: radius via sqrt of a uniform draw.
    const double rad = params.radius_km * std::sqrt(uniform01(rng));
    const double ang = 2.0 * M_PI * uniform01(rng);
    d.x_km = rad * std::cos(ang);
    d.y_km = rad * std::sin(ang);
    sc.devices.push_back(d);

    Task t;
    t.input_bytes = uniform_in(rng, tr.bytes_min, tr.bytes_max);
    t.cycles = uniform_in(rng, tr.cycles_min, tr.cycles_max);
    t.deadline_s = uniform_in(rng, tr.deadline_min, tr.deadline_max);
    sc.tasks.push_back(t);
  }
  validate(sc);
  return sc;
}

Scenario load_trace(const std::string& path, const GeneratorParams& params) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open trace file: " + path);
  Scenario sc;
  sc.radio = params.radio;
  sc.edge_cpu_hz = params.edge_cpu_hz;
  sc.consensus = params.consensus;
  sc.seed = params.seed;

  std::string line;
  bool header_skipped = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!header_skipped) {
      header_skipped = true;
      if (line.find("device_id") != std::string::npos) continue;  // optional header row
    }
    std::stringstream row(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(row, cell, ',')) {
      try {
        cols.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw SchemaError("trace line " + std::to_string(line_no) + ": not a number: " + cell);
      }
    }
    if (cols.size() != 6)
      throw SchemaError("trace line " + std::to_string(line_no) + ": expected 6 columns, got " +
                        std::to_string(cols.size()));
    DeviceConfig d = params.device_template;
    d.x_km = cols[1];
    d.y_km = cols[2];
    sc.devices.push_back(d);
    sc.tasks.push_back(Task{cols[4], cols[3], cols[5]});
  }
  validate(sc);
  return sc;
}

double device_distance_km(const DeviceConfig& dev, const RadioConfig& radio) {
  const double d = std::hypot(dev.x_km, dev.y_km);
  return std::max(d, radio.min_distance_km);
}

double channel_gain(const DeviceConfig& dev, const RadioConfig& radio) {
  const double d_km = device_distance_km(dev, radio);
  const double loss_db = radio.pathloss_intercept_db + radio.pathloss_slope_db * std::log10(d_km);
  return std::pow(10.0, -loss_db / 10.0);
}

}  // namespace bcmec
