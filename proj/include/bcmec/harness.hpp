#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bcmec/policy.hpp"
#include "bcmec/scenario.hpp"
#include "bcmec/train.hpp"

namespace bcmec {

struct SweepSpec {
  std::string variable;  // n_devices | task_bytes | block_bytes | n_miners
  std::vector<double> values;
};

struct EvalSpec {
  std::string policy = "baseline:uniform-random";  // baseline:<kind> or checkpoint:<path>
  int episodes = 50;
  int steps = 20;
  bool trace = false;  // write one JSONL trace per run
};

struct ExperimentSpec {
  std::string track;  // train | eval | solve-game | consensus-bench
  std::string scenario_file;  // empty means the generator is the source
  GeneratorParams generator;
  bool from_generator = true;
  std::optional<SweepSpec> sweep;
  int repetitions = 1;
  std::uint64_t seed_base = 0;
  std::string output_dir = "out";
  TrainConfig train;
  TrainMode mode = TrainMode::Cooperative;
  EvalSpec eval;
};

ExperimentSpec spec_from_json(const std::string& text);
ExperimentSpec load_spec(const std::string& path);
std::string spec_to_json(const ExperimentSpec& spec);

// Executes the track over sweep x repetitions with seeds seed_base + rep.
// Writes runs.csv (one row per repetition and sweep point), aggregate.csv
// (mean and standard deviation per sweep point) and manifest.json (the fully
// resolved spec). Returns the list of files written.
std::vector<std::string> run_experiment(const ExperimentSpec& spec);

// Scenario for one sweep point (or the plain source when variable is empty).
Scenario realize_scenario(const ExperimentSpec& spec, const std::string& variable, double value);

std::unique_ptr<Policy> make_policy(const std::string& descriptor);

// Generator parameters as a standalone JSON document (the same object the
// spec format embeds under scenario.generator).
GeneratorParams generator_params_from_json_text(const std::string& text);
GeneratorParams load_generator_params(const std::string& path);

}  // namespace bcmec
