#include "bcmec/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bcmec/consensus.hpp"
#include "bcmec/csv.hpp"
#include "bcmec/game.hpp"

namespace bcmec {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Lenient readers: absent fields keep the default, present fields must be
// well-typed.
double num_or(const json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw SchemaError(std::string("field is not a number: ") + key);
  return j.at(key).get<double>();
}

int int_or(const json& j, const char* key, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw SchemaError(std::string("field is not an integer: ") + key);
  return j.at(key).get<int>();
}

std::string str_or(const json& j, const char* key, const std::string& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw SchemaError(std::string("field is not a string: ") + key);
  return j.at(key).get<std::string>();
}

void range_or(const json& j, const char* key, double& lo, double& hi) {
  if (!j.is_object() || !j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw SchemaError(std::string("field is not a [lo, hi] pair: ") + key);
  lo = v[0].get<double>();
  hi = v[1].get<double>();
}

RadioConfig radio_overlay(const json& j, RadioConfig base) {
  base.num_subbands = int_or(j, "num_subbands", base.num_subbands);
  base.subband_hz = num_or(j, "subband_hz", base.subband_hz);
  base.noise_power_w = num_or(j, "noise_power_w", base.noise_power_w);
  base.pathloss_intercept_db = num_or(j, "pathloss_intercept_db", base.pathloss_intercept_db);
  base.pathloss_slope_db = num_or(j, "pathloss_slope_db", base.pathloss_slope_db);
  base.min_distance_km = num_or(j, "min_distance_km", base.min_distance_km);
  return base;
}

DeviceConfig device_overlay(const json& j, DeviceConfig base) {
  base.max_tx_power_w = num_or(j, "max_tx_power_w", base.max_tx_power_w);
  base.cpu_budget_hz = num_or(j, "cpu_budget_hz", base.cpu_budget_hz);
  base.verify_budget_hz = num_or(j, "verify_budget_hz", base.verify_budget_hz);
  base.energy_coeff = num_or(j, "energy_coeff", base.energy_coeff);
  base.weight_time = num_or(j, "weight_time", base.weight_time);
  base.weight_energy = num_or(j, "weight_energy", base.weight_energy);
  base.uplink_bps = num_or(j, "uplink_bps", base.uplink_bps);
  base.downlink_bps = num_or(j, "downlink_bps", base.downlink_bps);
  return base;
}

ConsensusConfig consensus_overlay(const json& j, ConsensusConfig base) {
  base.part_bytes = num_or(j, "part_bytes", base.part_bytes);
  base.result_bytes = num_or(j, "result_bytes", base.result_bytes);
  base.block_bytes = num_or(j, "block_bytes", base.block_bytes);
  base.block_result_bytes = num_or(j, "block_result_bytes", base.block_result_bytes);
  base.broadcast_coeff = num_or(j, "broadcast_coeff", base.broadcast_coeff);
  base.dpos_verify_budget_hz = num_or(j, "dpos_verify_budget_hz", base.dpos_verify_budget_hz);
  base.scale_per_miner = num_or(j, "scale_per_miner", base.scale_per_miner);
  base.tx_per_block = int_or(j, "tx_per_block", base.tx_per_block);
  base.num_miners = int_or(j, "num_miners", base.num_miners);
  return base;
}

GeneratorParams generator_from_json(const json& j) {
  GeneratorParams p;
  p.n_devices = int_or(j, "n_devices", p.n_devices);
  p.radius_km = num_or(j, "radius_km", p.radius_km);
  p.seed = static_cast<std::uint64_t>(num_or(j, "seed", static_cast<double>(p.seed)));
  p.edge_cpu_hz = num_or(j, "edge_cpu_hz", p.edge_cpu_hz);
  if (j.contains("radio")) p.radio = radio_overlay(j.at("radio"), p.radio);
  if (j.contains("device_template"))
    p.device_template = device_overlay(j.at("device_template"), p.device_template);
  if (j.contains("consensus")) p.consensus = consensus_overlay(j.at("consensus"), p.consensus);
  if (j.contains("task_ranges")) {
    const json& tr = j.at("task_ranges");
    range_or(tr, "bytes", p.task_ranges.bytes_min, p.task_ranges.bytes_max);
    range_or(tr, "cycles", p.task_ranges.cycles_min, p.task_ranges.cycles_max);
    range_or(tr, "deadline", p.task_ranges.deadline_min, p.task_ranges.deadline_max);
  }
  return p;
}

json generator_to_json(const GeneratorParams& p) {
  return json{
      {"n_devices", p.n_devices},
      {"radius_km", p.radius_km},
      {"seed", p.seed},
      {"edge_cpu_hz", p.edge_cpu_hz},
      {"radio",
       {{"num_subbands", p.radio.num_subbands},
        {"subband_hz", p.radio.subband_hz},
        {"noise_power_w", p.radio.noise_power_w},
        {"pathloss_intercept_db", p.radio.pathloss_intercept_db},
        {"pathloss_slope_db", p.radio.pathloss_slope_db},
        {"min_distance_km", p.radio.min_distance_km}}},
      {"device_template",
       {{"max_tx_power_w", p.device_template.max_tx_power_w},
        {"cpu_budget_hz", p.device_template.cpu_budget_hz},
        {"verify_budget_hz", p.device_template.verify_budget_hz},
        {"energy_coeff", p.device_template.energy_coeff},
        {"weight_time", p.device_template.weight_time},
        {"weight_energy", p.device_template.weight_energy},
        {"uplink_bps", p.device_template.uplink_bps},
        {"downlink_bps", p.device_template.downlink_bps}}},
      {"consensus",
       {{"part_bytes", p.consensus.part_bytes},
        {"result_bytes", p.consensus.result_bytes},
        {"block_bytes", p.consensus.block_bytes},
        {"block_result_bytes", p.consensus.block_result_bytes},
        {"broadcast_coeff", p.consensus.broadcast_coeff},
        {"dpos_verify_budget_hz", p.consensus.dpos_verify_budget_hz},
        {"scale_per_miner", p.consensus.scale_per_miner},
        {"tx_per_block", p.consensus.tx_per_block},
        {"num_miners", p.consensus.num_miners}}},
      {"task_ranges",
       {{"bytes", {p.task_ranges.bytes_min, p.task_ranges.bytes_max}},
        {"cycles", {p.task_ranges.cycles_min, p.task_ranges.cycles_max}},
        {"deadline", {p.task_ranges.deadline_min, p.task_ranges.deadline_max}}}}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig c;
  c.gamma = num_or(j, "gamma", c.gamma);
  c.epsilon_start = num_or(j, "epsilon_start", c.epsilon_start);
  c.epsilon_end = num_or(j, "epsilon_end", c.epsilon_end);
  c.zeta = num_or(j, "zeta", c.zeta);
  c.lr = num_or(j, "lr", c.lr);
  c.batch = int_or(j, "batch", c.batch);
  c.episodes = int_or(j, "episodes", c.episodes);
  c.steps = int_or(j, "steps", c.steps);
  c.replay_capacity =
      static_cast<std::size_t>(num_or(j, "replay_capacity", static_cast<double>(c.replay_capacity)));
  if (j.is_object() && j.contains("hidden")) c.hidden = j.at("hidden").get<std::vector<int>>();
  return c;
}

json train_to_json(const TrainConfig& c) {
  return json{{"gamma", c.gamma},
              {"epsilon_start", c.epsilon_start},
              {"epsilon_end", c.epsilon_end},
              {"zeta", c.zeta},
              {"lr", c.lr},
              {"batch", c.batch},
              {"episodes", c.episodes},
              {"steps", c.steps},
              {"replay_capacity", c.replay_capacity},
              {"hidden", c.hidden}};
}

void validate_spec(const ExperimentSpec& spec) {
  if (spec.track != "train" && spec.track != "eval" && spec.track != "solve-game" &&
      spec.track != "consensus-bench")
    throw ValidationError("unknown track: " + spec.track);
  if (spec.repetitions < 1) throw ValidationError("repetitions must be at least 1");
  if (spec.sweep) {
    const SweepSpec& s = *spec.sweep;
    if (s.variable != "n_devices" && s.variable != "task_bytes" && s.variable != "block_bytes" &&
        s.variable != "n_miners")
      throw ValidationError("unknown sweep variable: " + s.variable);
    if (s.values.empty()) throw ValidationError("sweep values must be nonempty");
    for (std::size_t i = 1; i < s.values.size(); ++i)
      if (s.values[i] <= s.values[i - 1])
        throw ValidationError("sweep values must be strictly increasing");
    if ((s.variable == "n_devices" || s.variable == "task_bytes") && !spec.from_generator)
      throw ValidationError("sweeping " + s.variable + " requires a generator scenario source");
  }
}

std::string value_tag(double v) {
  std::string t = fmt_num(v);
  for (char& c : t)
    if (c == '.' || c == '+' || c == '-') c = '_';
  return t;
}

struct RunRecord {
  double sweep_value = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string scheme;  // consensus-bench only
  std::vector<double> metrics;
  bool excluded = false;
};

OffloadEnv make_env(const Scenario& sc, const ExperimentSpec& spec) {
  EnvConfig cfg;
  if (spec.from_generator) {
    cfg.task_ranges = spec.generator.task_ranges;
    cfg.obs_bytes_scale = spec.generator.task_ranges.bytes_max;
    cfg.obs_cycles_scale = spec.generator.task_ranges.cycles_max;
  } else {
    double bmax = 0, cmax = 0;
    for (const Task& t : sc.tasks) {
      bmax = std::max(bmax, t.input_bytes);
      cmax = std::max(cmax, t.cycles);
    }
    cfg.obs_bytes_scale = bmax;
    cfg.obs_cycles_scale = cmax;
  }
  return OffloadEnv(sc, cfg);
}

}  // namespace

ExperimentSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("spec is not valid JSON: ") + e.what());
  }
  ExperimentSpec spec;
  if (!j.contains("track")) throw SchemaError("missing field: track");
  spec.track = j.at("track").get<std::string>();
  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    if (s.contains("file")) {
      spec.scenario_file = s.at("file").get<std::string>();
      spec.from_generator = false;
    } else if (s.contains("generator")) {
      spec.generator = generator_from_json(s.at("generator"));
      spec.from_generator = true;
    } else {
      throw SchemaError("scenario must contain either file or generator");
    }
  }
  if (j.contains("sweep")) {
    SweepSpec s;
    s.variable = str_or(j.at("sweep"), "variable", "");
    if (!j.at("sweep").contains("values")) throw SchemaError("missing field: sweep.values");
    s.values = j.at("sweep").at("values").get<std::vector<double>>();
    spec.sweep = s;
  }
  spec.repetitions = int_or(j, "repetitions", 1);
  spec.seed_base = static_cast<std::uint64_t>(num_or(j, "seed_base", 0));
  spec.output_dir = str_or(j, "output_dir", "out");
  if (j.contains("train")) spec.train = train_from_json(j.at("train"));
  spec.mode = train_mode_from_string(str_or(j, "mode", "cooperative"));
  if (j.contains("eval")) {
    spec.eval.policy = str_or(j.at("eval"), "policy", spec.eval.policy);
    spec.eval.episodes = int_or(j.at("eval"), "episodes", spec.eval.episodes);
    spec.eval.steps = int_or(j.at("eval"), "steps", spec.eval.steps);
    if (j.at("eval").contains("trace")) spec.eval.trace = j.at("eval").at("trace").get<bool>();
  }
  validate_spec(spec);
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open spec file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return spec_from_json(buf.str());
}

std::string spec_to_json(const ExperimentSpec& spec) {
  json j;
  j["track"] = spec.track;
  if (spec.from_generator)
    j["scenario"] = {{"generator", generator_to_json(spec.generator)}};
  else
    j["scenario"] = {{"file", spec.scenario_file}};
  if (spec.sweep) j["sweep"] = {{"variable", spec.sweep->variable}, {"values", spec.sweep->values}};
  j["repetitions"] = spec.repetitions;
  j["seed_base"] = spec.seed_base;
  j["output_dir"] = spec.output_dir;
  j["train"] = train_to_json(spec.train);
  j["mode"] = to_string(spec.mode);
  j["eval"] = {{"policy", spec.eval.policy},
               {"episodes", spec.eval.episodes},
               {"steps", spec.eval.steps},
               {"trace", spec.eval.trace}};
  return j.dump(2) + "\n";
}

Scenario realize_scenario(const ExperimentSpec& spec, const std::string& variable, double value) {
  if (!spec.from_generator) {
    Scenario sc = load_scenario(spec.scenario_file);
    if (variable == "block_bytes") {
      sc.consensus.part_bytes = value / std::max(1, sc.num_devices());
      sc.consensus.block_result_bytes =
          sc.consensus.block_result_bytes * (value / sc.consensus.block_bytes);
      sc.consensus.result_bytes = sc.consensus.block_result_bytes / std::max(1, sc.num_devices());
      sc.consensus.block_bytes = value;
    } else if (variable == "n_miners") {
      sc.consensus.num_miners = static_cast<int>(value);
    }
    validate(sc);
    return sc;
  }
  GeneratorParams p = spec.generator;
  if (variable == "n_devices") p.n_devices = static_cast<int>(value);
  if (variable == "task_bytes") {
    p.task_ranges.bytes_min = value;
    p.task_ranges.bytes_max = value;
  }
  if (variable == "block_bytes") {
    const double ratio = value / p.consensus.block_bytes;
    p.consensus.block_bytes = value;
    p.consensus.block_result_bytes *= ratio;
    p.consensus.part_bytes = value / p.n_devices;
    p.consensus.result_bytes = p.consensus.block_result_bytes / p.n_devices;
  }
  if (variable == "n_miners") p.consensus.num_miners = static_cast<int>(value);
  return generate_scenario(p);
}

GeneratorParams generator_params_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("generator params are not valid JSON: ") + e.what());
  }
  return generator_from_json(j);
}

GeneratorParams load_generator_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open generator params file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return generator_params_from_json_text(buf.str());
}

std::unique_ptr<Policy> make_policy(const std::string& descriptor) {
  if (descriptor.rfind("checkpoint:", 0) == 0) {
    const std::string path = descriptor.substr(11);
    return std::make_unique<TrainedPolicy>(load_checkpoint_actors(path), "checkpoint");
  }
  std::string name = descriptor;
  if (name.rfind("baseline:", 0) == 0) name = name.substr(9);
  return std::make_unique<BaselinePolicy>(baseline_from_string(name));
}

namespace {

// Derived consensus config for a bench point: parts are the block split
// across the miners, and the DPoS verification budget is scaled so both
// schemes spend the same verification time per byte.
ConsensusConfig bench_consensus(const ConsensusConfig& base, const DeviceConfig& dev,
                                double block_bytes, int n_miners) {
  ConsensusConfig cc = base;
  cc.block_bytes = block_bytes;
  cc.block_result_bytes = base.block_result_bytes * (block_bytes / base.block_bytes);
  cc.part_bytes = cc.block_bytes / n_miners;
  cc.result_bytes = cc.block_result_bytes / n_miners;
  cc.dpos_verify_budget_hz = dev.cpu_budget_hz / n_miners;
  return cc;
}

std::vector<RunRecord> run_consensus_bench(const ExperimentSpec& spec,
                                           const std::vector<double>& values,
                                           const std::string& variable,
                                           std::vector<std::vector<std::string>>* consensus_rows) {
  std::vector<RunRecord> records;
  for (const double value : values) {
    const int n_miners = variable == "n_miners" ? static_cast<int>(value)
                                                : std::max(2, spec.generator.consensus.num_miners);
    const double block = variable == "block_bytes" ? value : spec.generator.consensus.block_bytes;
    if (n_miners < 2) throw ValidationError("consensus-bench needs at least 2 miners");

    GeneratorParams p = spec.generator;
    p.n_devices = n_miners;
    p.consensus = bench_consensus(p.consensus, p.device_template, block, n_miners);
    p.consensus.num_miners = 0;  // every generated device mines at this sweep point
    const Scenario sc = generate_scenario(p);

    for (int rep = 0; rep < spec.repetitions; ++rep) {
      const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(rep);
      Rng rng = make_rng(mix_seed(seed, 0x706f72));

      std::vector<double> reputations(n_miners, 0.0);
      const std::vector<MinerState> miners = select_miners(sc, reputations, n_miners, 0);
      const std::vector<std::uint8_t> block_content = make_block(sc.consensus, rng);
      const ConsensusOutcome outcome = run_por_round(block_content, miners, sc, rng);

      double por_lat = 0, dpos_lat = 0;
      for (const DeviceConfig& dev : sc.devices) {
        por_lat = std::max(por_lat, por_latency(dev, sc.consensus));
        dpos_lat = std::max(dpos_lat, dpos_latency(dev, sc.consensus, n_miners));
      }
      const double por_bw = bandwidth_cost(ConsensusScheme::PoR, sc.consensus, n_miners);
      const double dpos_bw = bandwidth_cost(ConsensusScheme::DPoS, sc.consensus, n_miners);

      RunRecord por{value, rep, seed, "por", {por_lat, por_bw, outcome.accepted ? 1.0 : 0.0}, false};
      RunRecord dpos{value, rep, seed, "dpos", {dpos_lat, dpos_bw, 1.0}, false};
      records.push_back(por);
      records.push_back(dpos);
      if (consensus_rows != nullptr) {
        for (const RunRecord* r : {&por, &dpos}) {
          consensus_rows->push_back({r->scheme, std::to_string(n_miners), fmt_num(block),
                                     fmt_num(r->metrics[0]), fmt_num(r->metrics[1]),
                                     r->metrics[2] > 0 ? "1" : "0"});
        }
      }
    }
  }
  return records;
}

}  // namespace

std::vector<std::string> run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);
  fs::create_directories(spec.output_dir);
  std::vector<std::string> outputs;

  const std::string variable = spec.sweep ? spec.sweep->variable : "";
  const std::vector<double> values = spec.sweep ? spec.sweep->values : std::vector<double>{0.0};

  std::vector<std::string> metric_names;
  std::vector<RunRecord> records;
  std::vector<std::vector<std::string>> consensus_rows;

  if (spec.track == "consensus-bench") {
    metric_names = {"latency_s", "bandwidth_bytes", "accepted"};
    records = run_consensus_bench(spec, values, variable, &consensus_rows);
    const std::string path = spec.output_dir + "/consensus.csv";
    write_csv(path, {"scheme", "n_miners", "block_bytes", "latency_s", "bandwidth_bytes", "accepted"},
              consensus_rows);
    outputs.push_back(path);
  } else {
    for (const double value : values) {
      for (int rep = 0; rep < spec.repetitions; ++rep) {
        const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(rep);
        ExperimentSpec resolved = spec;
        if (spec.from_generator)
          resolved.generator.seed = mix_seed(spec.generator.seed, seed);
        const Scenario sc = realize_scenario(resolved, variable, value);
        RunRecord rec;
        rec.sweep_value = value;
        rec.rep = rep;
        rec.seed = seed;

        const std::string tag =
            (spec.sweep ? variable + value_tag(value) + "_" : std::string("run_")) + "rep" +
            std::to_string(rep);

        if (spec.track == "train") {
          metric_names = {"reward_last50_mean", "reward_overall_mean", "offload_last50_mean",
                          "mining_last50_mean", "diverged"};
          OffloadEnv env = make_env(sc, spec);
          try {
            const TrainResult result = train(env, spec.train, spec.mode, seed);
            const int tail = std::min<int>(50, static_cast<int>(result.curve.size()));
            double last = 0, all = 0, off = 0, mine = 0;
            for (const EpisodeMetrics& m : result.curve) all += m.mean_system_reward;
            for (std::size_t i = result.curve.size() - tail; i < result.curve.size(); ++i) {
              last += result.curve[i].mean_system_reward;
              off += result.curve[i].mean_offload_utility;
              mine += result.curve[i].mean_mining_utility;
            }
            rec.metrics = {last / tail, all / result.curve.size(), off / tail, mine / tail, 0.0};
            const std::string metrics_path = spec.output_dir + "/metrics_" + tag + ".csv";
            write_metrics_csv(result.curve, metrics_path);
            outputs.push_back(metrics_path);
            const std::string ckpt_path = spec.output_dir + "/checkpoint_" + tag + ".json";
            save_checkpoint(result, env, ckpt_path);
            outputs.push_back(ckpt_path);
          } catch (const DivergenceError&) {
            rec.metrics = {0, 0, 0, 0, 1.0};
            rec.excluded = true;
          }
        } else if (spec.track == "eval") {
          metric_names = {"mean_system_reward", "mean_offload_utility", "mean_offload_per_device",
                          "mean_mining_utility", "violation_rate"};
          OffloadEnv env = make_env(sc, spec);
          std::unique_ptr<Policy> policy = make_policy(spec.eval.policy);
          std::string trace_path;
          if (spec.eval.trace) {
            trace_path = spec.output_dir + "/trace_" + tag + ".jsonl";
            outputs.push_back(trace_path);
          }
          const EvalSummary s =
              evaluate_policy(*policy, env, spec.eval.episodes, spec.eval.steps, seed, trace_path);
          rec.metrics = {s.mean_system_reward, s.mean_offload_utility, s.mean_offload_per_device,
                         s.mean_mining_utility, s.violation_rate};
        } else {  // solve-game
          metric_names = {"path_length", "psi", "verified", "utility_sum"};
          const GameInstance inst = build_game(sc);
          const NashCertificate cert = solve_nash(inst, Profile(inst.n, 0));
          double usum = 0;
          json players = json::array();
          for (int i = 0; i < inst.n; ++i) {
            const double u = game_utility(inst, i, cert.profile);
            usum += u;
            players.push_back(u);
          }
          rec.metrics = {static_cast<double>(cert.improvement_steps),
                         potential(inst, cert.profile), cert.verified ? 1.0 : 0.0, usum};
          char digest[32];
          std::snprintf(digest, sizeof digest, "%016llx",
                        static_cast<unsigned long long>(instance_digest(inst)));
          json out{{"instance_digest", digest},
                   {"profile", cert.profile},
                   {"per_player_utility", players},
                   {"psi", potential(inst, cert.profile)},
                   {"path_length", cert.improvement_steps},
                   {"verified", cert.verified}};
          const std::string path = spec.output_dir + "/game_" + tag + ".json";
          std::ofstream f(path);
          f << out.dump(2) << "\n";
          outputs.push_back(path);
        }
        records.push_back(std::move(rec));
      }
    }
  }

  // Per-run table.
  {
    std::vector<std::string> header{"sweep_variable", "sweep_value", "rep", "seed"};
    if (spec.track == "consensus-bench") header.push_back("scheme");
    header.insert(header.end(), metric_names.begin(), metric_names.end());
    std::vector<std::vector<std::string>> rows;
    for (const RunRecord& r : records) {
      std::vector<std::string> row{variable.empty() ? "none" : variable, fmt_num(r.sweep_value),
                                   std::to_string(r.rep), std::to_string(r.seed)};
      if (spec.track == "consensus-bench") row.push_back(r.scheme);
      for (double m : r.metrics) row.push_back(fmt_num(m));
      rows.push_back(std::move(row));
    }
    const std::string path = spec.output_dir + "/runs.csv";
    write_csv(path, header, rows);
    outputs.push_back(path);
  }

  // Aggregate: mean and standard deviation per sweep point (and scheme),
  // excluding diverged runs.
  {
    std::vector<std::string> header{"sweep_variable", "sweep_value"};
    if (spec.track == "consensus-bench") header.push_back("scheme");
    header.push_back("runs_included");
    for (const std::string& m : metric_names) {
      header.push_back("mean_" + m);
      header.push_back("std_" + m);
    }
    std::vector<std::vector<std::string>> rows;
    for (const double value : values) {
      std::vector<std::string> schemes =
          spec.track == "consensus-bench" ? std::vector<std::string>{"por", "dpos"}
                                          : std::vector<std::string>{""};
      for (const std::string& scheme : schemes) {
        std::vector<const RunRecord*> group;
        for (const RunRecord& r : records)
          if (r.sweep_value == value && r.scheme == scheme && !r.excluded) group.push_back(&r);
        std::vector<std::string> row{variable.empty() ? "none" : variable, fmt_num(value)};
        if (spec.track == "consensus-bench") row.push_back(scheme);
        row.push_back(std::to_string(group.size()));
        for (std::size_t m = 0; m < metric_names.size(); ++m) {
          double mean = 0, var = 0;
          if (!group.empty()) {
            for (const RunRecord* r : group) mean += r->metrics[m];
            mean /= group.size();
            for (const RunRecord* r : group) var += (r->metrics[m] - mean) * (r->metrics[m] - mean);
            var = group.size() > 1 ? var / (group.size() - 1) : 0.0;
          }
          row.push_back(fmt_num(mean));
          row.push_back(fmt_num(std::sqrt(var)));
        }
        rows.push_back(std::move(row));
      }
    }
    const std::string path = spec.output_dir + "/aggregate.csv";
    write_csv(path, header, rows);
    outputs.push_back(path);
  }

  // Manifest: the fully resolved configuration every output number came from.
  {
    json manifest;
    manifest["tool"] = "bcmec";
    manifest["format_version"] = 1;
    manifest["spec"] = json::parse(spec_to_json(spec));
    manifest["outputs"] = outputs;
    const std::string path = spec.output_dir + "/manifest.json";
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write manifest: " + path);
    f << manifest.dump(2) << "\n";
    outputs.push_back(path);
  }
  return outputs;
}

}  // namespace bcmec
