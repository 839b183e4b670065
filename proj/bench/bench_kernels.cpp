// Wall-clock comparison of the serial reference kernels against their
// OpenMP variants: exact-potential verification, pure-NE enumeration and
// batched consensus rounds.

#include <chrono>
#include <cstdio>

#include "bcmec/consensus.hpp"
#include "bcmec/game.hpp"

using namespace bcmec;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_s(F&& fn, int iters) {
  const auto t0 = Clock::now();
  for (int i = 0; i < iters; ++i) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / iters;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-28s serial %9.4f ms   parallel %9.4f ms   speedup %.2fx\n", name,
              serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main() {
  // Potential verification over 4^9 = 262144 profiles.
  const GameInstance big = random_instance(9, 3, 42);
  double worst_serial = 0, worst_parallel = 0;
  const double t_vs = time_s(
      [&] { worst_serial = verify_exact_potential_serial(big).max_discrepancy; }, 3);
  const double t_vp =
      time_s([&] { worst_parallel = verify_exact_potential(big).max_discrepancy; }, 3);
  report("verify_exact_potential", t_vs, t_vp);
  if (worst_serial != worst_parallel) {
    std::printf("MISMATCH: serial %.3e vs parallel %.3e\n", worst_serial, worst_parallel);
    return 1;
  }

  std::size_t ne_serial = 0, ne_parallel = 0;
  const double t_es = time_s([&] { ne_serial = enumerate_pure_nash_serial(big).size(); }, 3);
  const double t_ep = time_s([&] { ne_parallel = enumerate_pure_nash(big).size(); }, 3);
  report("enumerate_pure_nash", t_es, t_ep);
  if (ne_serial != ne_parallel) {
    std::printf("MISMATCH: serial %zu vs parallel %zu NEs\n", ne_serial, ne_parallel);
    return 1;
  }

  // Consensus rounds: the per-part verification loop is the parallel section.
  GeneratorParams p;
  p.n_devices = 64;
  p.seed = 7;
  p.consensus.block_bytes = 5e5;
  p.consensus.tx_per_block = 10;
  const Scenario sc = generate_scenario(p);
  const std::vector<double> reputations(64, 0.0);
  const std::vector<MinerState> miners = select_miners(sc, reputations, 64, 0);
  const double t_rounds = time_s(
      [&] {
        Rng rng = make_rng(123);
        const std::vector<std::uint8_t> block = make_block(sc.consensus, rng);
        for (int i = 0; i < 50; ++i) run_por_round(block, miners, sc, rng);
      },
      3);
  std::printf("%-28s %9.4f ms per 50 rounds (parallel per-part verification)\n",
              "run_por_round x50", t_rounds * 1e3);
  return 0;
}
