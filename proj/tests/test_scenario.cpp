#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "bcmec/rng.hpp"
#include "bcmec/scenario.hpp"

using namespace bcmec;

namespace {

const char* kMinimalScenario = R"({
  "seed": 1,
  "edge_cpu_hz": 1e10,
  "radio": {"num_subbands": 3, "subband_hz": 2e6, "noise_power_w": 1e-14},
  "consensus": {"part_bytes": 5000, "result_bytes": 500, "block_bytes": 50000,
                "block_result_bytes": 5000, "broadcast_coeff": 1e-8,
                "dpos_verify_budget_hz": 1e9},
  "devices": [{"x_km": 0.1, "y_km": 0.0, "max_tx_power_w": 0.5, "cpu_budget_hz": 5e8,
               "verify_budget_hz": 5e8, "weight_time": 0.5, "weight_energy": 0.5,
               "uplink_bps": 8e6, "downlink_bps": 8e6}],
  "tasks": [{"cycles": 5e8, "input_bytes": 5e5, "deadline_s": 3.0}]
})";

}  // namespace

TEST_CASE("channel gain follows the path-loss model") {
  RadioConfig radio;
  DeviceConfig dev;
  dev.x_km = 1.0;
  dev.y_km = 0.0;
  CHECK(channel_gain(dev, radio) == doctest::Approx(std::pow(10.0, -14.07)).epsilon(1e-12));

  dev.x_km = 10.0;  // L = 140.7 + 36.7
  CHECK(channel_gain(dev, radio) == doctest::Approx(std::pow(10.0, -17.74)).epsilon(1e-12));
}

TEST_CASE("channel gain is strictly decreasing in distance") {
  RadioConfig radio;
  Rng rng = make_rng(11);
  for (int i = 0; i < 200; ++i) {
    DeviceConfig a, b;
    a.x_km = uniform_in(rng, 0.001, 5.0);
    b.x_km = a.x_km + uniform_in(rng, 0.001, 5.0);
    CHECK(channel_gain(a, radio) > channel_gain(b, radio));
  }
}

TEST_CASE("zero distance clamps to the configured minimum") {
  RadioConfig radio;
  DeviceConfig at_origin;  // d = 0
  DeviceConfig at_clamp;
  at_clamp.x_km = radio.min_distance_km;
  CHECK(channel_gain(at_origin, radio) == channel_gain(at_clamp, radio));
}

TEST_CASE("minimal one-device scenario loads") {
  const Scenario sc = scenario_from_json(kMinimalScenario);
  CHECK(sc.num_devices() == 1);
  CHECK(sc.tasks.size() == 1);
  CHECK(sc.radio.num_subbands == 3);
  CHECK(sc.devices[0].energy_coeff == 1e-27);  // default applies
}

TEST_CASE("weight invariant violation is reported by name") {
  std::string text = kMinimalScenario;
  const auto pos = text.find("\"weight_time\": 0.5");
  text.replace(pos, 18, "\"weight_time\": 0.7");
  // weights now 0.7 + 0.5
  CHECK_THROWS_WITH_AS(scenario_from_json(text), "weights must sum to 1", ValidationError);
}

TEST_CASE("missing field reports its path") {
  CHECK_THROWS_WITH_AS(scenario_from_json(R"({"seed": 1})"), "missing field: edge_cpu_hz",
                       SchemaError);
  CHECK_THROWS_AS(scenario_from_json("not json at all"), SchemaError);
}

TEST_CASE("paper-scale file round-trips: K=30, N=50") {
  GeneratorParams p;
  p.n_devices = 50;
  p.radio.num_subbands = 30;
  p.seed = 3;
  const Scenario sc = generate_scenario(p);
  const std::string path = "k30n50_scenario.json";
  save_scenario(sc, path);
  const Scenario back = load_scenario(path);
  CHECK(back.num_devices() == 50);
  CHECK(back.radio.num_subbands == 30);
  CHECK(scenario_to_json(back) == scenario_to_json(sc));  // lossless round trip
  std::remove(path.c_str());
}

TEST_CASE("generator is deterministic in the seed") {
  GeneratorParams p;
  p.n_devices = 50;
  p.seed = 7;
  CHECK(scenario_to_json(generate_scenario(p)) == scenario_to_json(generate_scenario(p)));
  p.seed = 8;
  CHECK(scenario_to_json(generate_scenario(p)) != scenario_to_json(generate_scenario(GeneratorParams{})));
}

TEST_CASE("degenerate radius places the device at the base station") {
  GeneratorParams p;
  p.n_devices = 1;
  p.radius_km = 0.001;
  p.seed = 0;
  const Scenario sc = generate_scenario(p);
  CHECK(std::hypot(sc.devices[0].x_km, sc.devices[0].y_km) <= 0.001);
}

TEST_CASE("generated tasks stay inside their ranges") {
  GeneratorParams p;
  p.n_devices = 5;
  p.task_ranges.bytes_min = 1e6;
  p.task_ranges.bytes_max = 3.5e6;
  p.seed = 21;
  const Scenario sc = generate_scenario(p);
  for (const Task& t : sc.tasks) {
    CHECK(t.input_bytes >= 1e6);
    CHECK(t.input_bytes <= 3.5e6);
  }
}

TEST_CASE("generator rejects bad inputs") {
  GeneratorParams p;
  p.radius_km = 0;
  CHECK_THROWS_AS(generate_scenario(p), ValidationError);
  p.radius_km = 1;
  p.task_ranges.bytes_min = 10;
  p.task_ranges.bytes_max = 5;
  CHECK_THROWS_AS(generate_scenario(p), ValidationError);
  p = GeneratorParams{};
  p.n_devices = 0;
  CHECK_THROWS_AS(generate_scenario(p), ValidationError);
}

TEST_CASE("csv trace replaces generator placement and tasks") {
  const std::string path = "trace_test.csv";
  {
    std::ofstream f(path);
    f << "device_id,x_km,y_km,task_bytes,task_cycles,deadline_s\n";
    f << "0,0.10,0.20,500000,4e8,2.5\n";
    f << "1,-0.05,0.00,750000,6e8,3.0\n";
  }
  GeneratorParams p;
  const Scenario sc = load_trace(path, p);
  CHECK(sc.num_devices() == 2);
  CHECK(sc.devices[0].x_km == doctest::Approx(0.10));
  CHECK(sc.devices[1].y_km == doctest::Approx(0.0));
  CHECK(sc.tasks[0].input_bytes == doctest::Approx(500000));
  CHECK(sc.tasks[1].cycles == doctest::Approx(6e8));
  CHECK(sc.tasks[1].deadline_s == doctest::Approx(3.0));
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_trace("does_not_exist.csv", p), SchemaError);
}
