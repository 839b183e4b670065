#pragma once

#include <cstdint>
#include <vector>

#include "bcmec/scenario.hpp"

namespace bcmec {

// Action a_n in {0, 1..K}: 0 runs the task locally, k offloads via sub-band k.
using Profile = std::vector<int>;

// Channel-selection game over precomputed utility tables. Offloading utilities
// are evaluated with zero cross-interference (each device rated as if alone on
// its sub-band) so that a device's J^off depends on its own action only; the
// interference-coupled utilities stay in the environment track.
struct GameInstance {
  int n = 0;  // players
  int k = 0;  // sub-bands
  std::vector<double> off;   // N x (K+1), column 0 is identically 0
  std::vector<double> mine;  // N x (K+1), column 0 = local mode, 1..K = offload modes
  // Optional additive distortion of the player utilities, used to exercise the
  // negative path of the exact-potential check. Empty means none.
  std::vector<double> perturb;

  double off_at(int player, int action) const { return off[static_cast<std::size_t>(player) * (k + 1) + action]; }
  double mine_at(int player, int action) const { return mine[static_cast<std::size_t>(player) * (k + 1) + action]; }
  std::size_t profile_count() const;
};

struct GameBuildOptions {
  double local_verify_frac = 1.0;    // phi allocation when computing locally
  double offload_verify_frac = 0.5;  // phi allocation when offloading
};

// Tables from a scenario: solo rates at full power, full local CPU, and
// mode-dependent verification allocations.
GameInstance build_game(const Scenario& sc, const GameBuildOptions& opts = {});

// Uniformly random tables; off in [-1, 1], mine in [0, e-1].
GameInstance random_instance(int n, int k, std::uint64_t seed);

std::uint64_t instance_digest(const GameInstance& inst);

// Case-defined player utility: the mining utility alone for a local player,
// otherwise the pairwise same-channel sum plus the mining utility.
double game_utility(const GameInstance& inst, int player, const Profile& profile);

// The exact potential: half the pairwise same-channel sum over offloading
// players, plus mining utilities in both modes.
double potential(const GameInstance& inst, const Profile& profile);

struct PotentialCheck {
  bool holds = false;
  double max_discrepancy = 0;
  std::uint64_t profiles_checked = 0;
  std::uint64_t deviations_checked = 0;
};

// Checks |delta Psi - delta J| over every profile and every unilateral
// deviation. Throws when (K+1)^N exceeds the budget.
PotentialCheck verify_exact_potential(const GameInstance& inst, std::size_t budget = 1000000,
                                      double tolerance = 1e-9);
// Serial reference for the parallel kernel above.
PotentialCheck verify_exact_potential_serial(const GameInstance& inst, std::size_t budget = 1000000,
                                             double tolerance = 1e-9);

struct BestResponse {
  int action = 0;
  double utility = 0;
};

// Argmax over {0..K} with the other players fixed; ties go to the smaller
// action index.
BestResponse best_response(const GameInstance& inst, int player, const Profile& profile);

struct NashCertificate {
  Profile profile;
  long improvement_steps = 0;
  bool verified = false;  // no unilateral deviation improves any player
};

// Best-response dynamics cycling players in index order, applying strictly
// improving moves until a full pass is quiet, then certifying the fixed point
// by exhaustive unilateral-deviation check.
NashCertificate solve_nash(const GameInstance& inst, Profile start, long max_iters = 1000000);

// Is `profile` a pure Nash equilibrium (within tolerance)?
bool is_pure_nash(const GameInstance& inst, const Profile& profile, double tolerance = 1e-12);

// All pure equilibria by exhaustive enumeration. Throws over budget.
std::vector<Profile> enumerate_pure_nash(const GameInstance& inst, std::size_t budget = 1000000);
std::vector<Profile> enumerate_pure_nash_serial(const GameInstance& inst,
                                                std::size_t budget = 1000000);

}  // namespace bcmec
