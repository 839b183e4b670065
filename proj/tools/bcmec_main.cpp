// Command-line front end: scenario generation, training, evaluation, game
// solving and consensus benchmarking, all routed through the experiment
// harness for reproducible CSV/JSON outputs.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcmec/game.hpp"
#include "bcmec/harness.hpp"

using namespace bcmec;
using nlohmann::json;

namespace {

void fail_json(const std::string& type, const std::string& message) {
  std::cerr << json{{"type", type}, {"error", message}}.dump() << "\n";
}

std::vector<double> parse_sweep(const std::string& text) {
  // "lo:hi[:step]" or a comma-separated list.
  std::vector<double> values;
  if (text.find(':') != std::string::npos) {
    double lo = 0, hi = 0, step = 1;
    const int got = std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step);
    if (got < 2 || step <= 0) throw ValidationError("bad sweep range: " + text);
    for (double v = lo; v <= hi + 1e-12; v += step) values.push_back(v);
  } else {
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bcmec: task offloading and block mining simulator"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a scenario JSON file");
  int gen_n = 5;
  double gen_radius = 0.3;
  std::uint64_t gen_seed = 0;
  int gen_subbands = -1;
  std::string gen_out = "scenario.json";
  std::string gen_params_path, gen_trace;
  gen->add_option("--n", gen_n, "number of devices");
  gen->add_option("--radius-km", gen_radius, "placement disc radius");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--subbands", gen_subbands, "number of radio sub-bands");
  gen->add_option("--params", gen_params_path, "generator params JSON file");
  gen->add_option("--trace", gen_trace, "CSV trace (device_id,x_km,y_km,task_bytes,task_cycles,deadline_s)");
  gen->add_option("--out", gen_out, "output scenario path");

  // shared experiment flags
  struct TrackArgs {
    std::string scenario_file, params_path, out = "out", mode = "cooperative";
    std::uint64_t seed = 0;
    int repetitions = 1;
  };

  auto add_common = [](CLI::App* cmd, TrackArgs& args) {
    cmd->add_option("--scenario", args.scenario_file, "scenario JSON file");
    cmd->add_option("--params", args.params_path, "generator params JSON file");
    cmd->add_option("--seed", args.seed, "base seed");
    cmd->add_option("--reps", args.repetitions, "repetitions");
    cmd->add_option("--out", args.out, "output directory");
  };

  // train
  auto* train_cmd = app.add_subcommand("train", "train MA-DDPG policies");
  TrackArgs train_args;
  add_common(train_cmd, train_args);
  train_cmd->add_option("--mode", train_args.mode, "cooperative|independent");
  int tr_episodes = -1, tr_steps = -1, tr_batch = -1;
  double tr_lr = -1;
  train_cmd->add_option("--episodes", tr_episodes, "training episodes");
  train_cmd->add_option("--steps", tr_steps, "steps per episode");
  train_cmd->add_option("--batch", tr_batch, "minibatch size");
  train_cmd->add_option("--lr", tr_lr, "learning rate");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained policy or baseline");
  TrackArgs eval_args;
  add_common(eval_cmd, eval_args);
  std::string eval_policy = "baseline:uniform-random";
  int eval_episodes = 50, eval_steps = 20;
  bool eval_trace = false;
  eval_cmd->add_option("--policy", eval_policy,
                       "baseline:<all-local|all-offload-random-channel|uniform-random|greedy-utility> "
                       "or checkpoint:<path>");
  eval_cmd->add_option("--episodes", eval_episodes, "evaluation episodes");
  eval_cmd->add_option("--steps", eval_steps, "steps per episode");
  eval_cmd->add_flag("--trace", eval_trace, "write a JSONL step trace per run");

  // solve-game
  auto* game_cmd = app.add_subcommand("solve-game", "compute a pure Nash equilibrium");
  TrackArgs game_args;
  add_common(game_cmd, game_args);
  std::string game_random;  // "N,K"
  game_cmd->add_option("--random", game_random, "solve a random instance: N,K (uses --seed)");

  // consensus-bench
  auto* cb_cmd = app.add_subcommand("consensus-bench", "PoR vs DPoS latency and bandwidth");
  TrackArgs cb_args;
  add_common(cb_cmd, cb_args);
  std::string cb_sweep_miners, cb_sweep_block;
  double cb_block = 5e4;
  int cb_miners = 10;
  cb_cmd->add_option("--sweep-miners", cb_sweep_miners, "miner sweep, lo:hi[:step] or list");
  cb_cmd->add_option("--sweep-block", cb_sweep_block, "block-size sweep in bytes, lo:hi[:step] or list");
  cb_cmd->add_option("--block-bytes", cb_block, "fixed block size");
  cb_cmd->add_option("--miners", cb_miners, "fixed miner count");

  // run
  auto* run_cmd = app.add_subcommand("run", "run an experiment spec file");
  std::string run_spec_path, run_out_override;
  bool run_has_seed = false;
  std::uint64_t run_seed = 0;
  run_cmd->add_option("--spec", run_spec_path, "experiment spec JSON")->required();
  run_cmd->add_option("--out", run_out_override, "override output directory");
  run_cmd->add_option("--seed", run_seed, "override seed_base")->each([&](const std::string&) {
    run_has_seed = true;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    fail_json("usage", e.what());
    return 1;
  }

  try {
    auto fill_source = [](ExperimentSpec& spec, const TrackArgs& args) {
      if (!args.scenario_file.empty()) {
        spec.scenario_file = args.scenario_file;
        spec.from_generator = false;
      } else if (!args.params_path.empty()) {
        spec.generator = load_generator_params(args.params_path);
        spec.from_generator = true;
      }
      spec.seed_base = args.seed;
      spec.repetitions = args.repetitions;
      spec.output_dir = args.out;
    };

    if (gen->parsed()) {
      GeneratorParams p;
      if (!gen_params_path.empty()) p = load_generator_params(gen_params_path);
      if (gen->count("--n") > 0 || gen_params_path.empty()) p.n_devices = gen_n;
      if (gen->count("--radius-km") > 0) p.radius_km = gen_radius;
      if (gen->count("--seed") > 0) p.seed = gen_seed;
      if (gen_subbands > 0) p.radio.num_subbands = gen_subbands;
      const Scenario sc = gen_trace.empty() ? generate_scenario(p) : load_trace(gen_trace, p);
      save_scenario(sc, gen_out);
      std::cout << json{{"written", gen_out}, {"devices", sc.num_devices()}}.dump() << "\n";
    } else if (train_cmd->parsed()) {
      ExperimentSpec spec;
      spec.track = "train";
      fill_source(spec, train_args);
      spec.mode = train_mode_from_string(train_args.mode);
      if (tr_episodes > 0) spec.train.episodes = tr_episodes;
      if (tr_steps > 0) spec.train.steps = tr_steps;
      if (tr_batch > 0) spec.train.batch = tr_batch;
      if (tr_lr > 0) spec.train.lr = tr_lr;
      const auto files = run_experiment(spec);
      std::cout << json{{"outputs", files}}.dump() << "\n";
    } else if (eval_cmd->parsed()) {
      ExperimentSpec spec;
      spec.track = "eval";
      fill_source(spec, eval_args);
      spec.eval.policy = eval_policy;
      spec.eval.episodes = eval_episodes;
      spec.eval.steps = eval_steps;
      spec.eval.trace = eval_trace;
      const auto files = run_experiment(spec);
      std::cout << json{{"outputs", files}}.dump() << "\n";
    } else if (game_cmd->parsed()) {
      if (!game_random.empty()) {
        int n = 0, k = 0;
        if (std::sscanf(game_random.c_str(), "%d,%d", &n, &k) != 2)
          throw ValidationError("--random expects N,K");
        const GameInstance inst = random_instance(n, k, game_args.seed);
        const NashCertificate cert = solve_nash(inst, Profile(inst.n, 0));
        json players = json::array();
        for (int i = 0; i < inst.n; ++i) players.push_back(game_utility(inst, i, cert.profile));
        char digest[32];
        std::snprintf(digest, sizeof digest, "%016llx",
                      static_cast<unsigned long long>(instance_digest(inst)));
        json out{{"instance_digest", digest},     {"profile", cert.profile},
                 {"per_player_utility", players}, {"psi", potential(inst, cert.profile)},
                 {"path_length", cert.improvement_steps}, {"verified", cert.verified}};
        std::filesystem::create_directories(game_args.out);
        std::ofstream f(game_args.out + "/game_random.json");
        f << out.dump(2) << "\n";
        std::cout << out.dump() << "\n";
      } else {
        ExperimentSpec spec;
        spec.track = "solve-game";
        fill_source(spec, game_args);
        const auto files = run_experiment(spec);
        std::cout << json{{"outputs", files}}.dump() << "\n";
      }
    } else if (cb_cmd->parsed()) {
      ExperimentSpec spec;
      spec.track = "consensus-bench";
      fill_source(spec, cb_args);
      spec.generator.consensus.block_bytes = cb_block;
      spec.generator.consensus.block_result_bytes = cb_block / 10.0;
      spec.generator.consensus.num_miners = cb_miners;
      SweepSpec sweep;
      if (!cb_sweep_miners.empty()) {
        sweep.variable = "n_miners";
        sweep.values = parse_sweep(cb_sweep_miners);
      } else if (!cb_sweep_block.empty()) {
        sweep.variable = "block_bytes";
        sweep.values = parse_sweep(cb_sweep_block);
      } else {
        sweep.variable = "n_miners";
        sweep.values = {static_cast<double>(cb_miners)};
      }
      spec.sweep = sweep;
      const auto files = run_experiment(spec);
      std::cout << json{{"outputs", files}}.dump() << "\n";
    } else if (run_cmd->parsed()) {
      ExperimentSpec spec = load_spec(run_spec_path);
      if (!run_out_override.empty()) spec.output_dir = run_out_override;
      if (run_has_seed) spec.seed_base = run_seed;
      const auto files = run_experiment(spec);
      std::cout << json{{"outputs", files}}.dump() << "\n";
    }
  } catch (const SchemaError& e) {
    fail_json("schema", e.what());
    return 1;
  } catch (const ValidationError& e) {
    fail_json("validation", e.what());
    return 1;
  } catch (const ContractError& e) {
    fail_json("contract", e.what());
    return 1;
  } catch (const DivergenceError& e) {
    fail_json("divergence", e.what());
    return 1;
  } catch (const std::exception& e) {
    fail_json("io", e.what());
    return 1;
  }
  return 0;
}
