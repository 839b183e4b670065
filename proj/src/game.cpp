#include "bcmec/game.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bcmec/comms.hpp"
#include "bcmec/consensus.hpp"
#include "bcmec/rng.hpp"

namespace bcmec {

namespace {

std::size_t checked_profile_count(const GameInstance& inst, std::size_t budget) {
  std::size_t count = 1;
  for (int i = 0; i < inst.n; ++i) {
    if (count > budget / static_cast<std::size_t>(inst.k + 1) + 1) {
      count = budget + 1;
      break;
    }
    count *= static_cast<std::size_t>(inst.k + 1);
  }
  if (count > budget)
    throw ContractError("profile space (K+1)^N exceeds the enumeration budget of " +
                        std::to_string(budget) + "; shrink N or K, or raise the budget");
  return count;
}

Profile decode_profile(std::size_t index, int n, int k) {
  Profile p(n);
  const std::size_t base = static_cast<std::size_t>(k + 1);
  for (int i = 0; i < n; ++i) {
    p[i] = static_cast<int>(index % base);
    index /= base;
  }
  return p;
}

double perturb_at(const GameInstance& inst, int player, int action) {
  if (inst.perturb.empty()) return 0.0;
  return inst.perturb[static_cast<std::size_t>(player) * (inst.k + 1) + action];
}

}  // namespace

std::size_t GameInstance::profile_count() const {
  std::size_t count = 1;
  for (int i = 0; i < n; ++i) count *= static_cast<std::size_t>(k + 1);
  return count;
}

GameInstance build_game(const Scenario& sc, const GameBuildOptions& opts) {
  validate(sc);
  GameInstance inst;
  inst.n = sc.num_devices();
  inst.k = sc.radio.num_subbands;
  inst.off.assign(static_cast<std::size_t>(inst.n) * (inst.k + 1), 0.0);
  inst.mine.assign(static_cast<std::size_t>(inst.n) * (inst.k + 1), 0.0);

  for (int i = 0; i < inst.n; ++i) {
    const DeviceConfig& dev = sc.devices[i];
    const Task& task = sc.tasks[i];

    OffloadAction local_act;
    local_act.mode = OffloadMode::Local;
    local_act.local_cpu_hz = dev.cpu_budget_hz;
    const CostReport local = local_cost(task, local_act, dev.energy_coeff);

    // Same gain on every sub-band, so the decoupled offload utility is
    // channel-independent too; keep the per-channel table for generality.
    const double rate = solo_uplink_rate(dev, dev.max_tx_power_w, sc.radio);
    const CostReport chosen = offload_cost(task, rate, dev.max_tx_power_w, sc.edge_cpu_hz);
    const double off_u = offloading_utility(local, chosen, dev.weight_time, dev.weight_energy);

    const double t_local =
        por_latency(dev, sc.consensus, opts.local_verify_frac * dev.verify_budget_hz);
    const double t_off =
        por_latency(dev, sc.consensus, opts.offload_verify_frac * dev.verify_budget_hz);
    inst.mine[static_cast<std::size_t>(i) * (inst.k + 1)] = mining_utility(t_local, task.deadline_s);
    for (int a = 1; a <= inst.k; ++a) {
      inst.off[static_cast<std::size_t>(i) * (inst.k + 1) + a] = off_u;
      inst.mine[static_cast<std::size_t>(i) * (inst.k + 1) + a] =
          mining_utility(t_off, task.deadline_s);
    }
  }
  return inst;
}

GameInstance random_instance(int n, int k, std::uint64_t seed) {
  if (n < 1 || k < 0) throw ContractError("random_instance requires n >= 1 and k >= 0");
  Rng rng = make_rng(seed);
  GameInstance inst;
  inst.n = n;
  inst.k = k;
  inst.off.assign(static_cast<std::size_t>(n) * (k + 1), 0.0);
  inst.mine.assign(static_cast<std::size_t>(n) * (k + 1), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int a = 1; a <= k; ++a)
      inst.off[static_cast<std::size_t>(i) * (k + 1) + a] = uniform_in(rng, -1.0, 1.0);
    for (int a = 0; a <= k; ++a)
      inst.mine[static_cast<std::size_t>(i) * (k + 1) + a] =
          uniform_in(rng, 0.0, std::exp(1.0) - 1.0);
  }
  return inst;
}

std::uint64_t instance_digest(const GameInstance& inst) {
  std::vector<double> flat;
  flat.push_back(inst.n);
  flat.push_back(inst.k);
  flat.insert(flat.end(), inst.off.begin(), inst.off.end());
  flat.insert(flat.end(), inst.mine.begin(), inst.mine.end());
  flat.insert(flat.end(), inst.perturb.begin(), inst.perturb.end());
  std::vector<std::uint8_t> bytes(flat.size() * sizeof(double));
  std::memcpy(bytes.data(), flat.data(), bytes.size());
  return sim_hash(bytes);
}

double game_utility(const GameInstance& inst, int player, const Profile& profile) {
  const int a = profile[player];
  double u = inst.mine_at(player, a) + perturb_at(inst, player, a);
  if (a == 0) return u;
  for (int m = 0; m < inst.n; ++m) {
    if (m == player || profile[m] != a) continue;
    u += inst.off_at(player, a) + inst.off_at(m, profile[m]);
  }
  return u;
}

double potential(const GameInstance& inst, const Profile& profile) {
  double pairwise = 0;
  for (int i = 0; i < inst.n; ++i) {
    if (profile[i] == 0) continue;
    for (int m = 0; m < inst.n; ++m) {
      if (m == i || profile[m] != profile[i]) continue;
      pairwise += inst.off_at(i, profile[i]) + inst.off_at(m, profile[m]);
    }
  }
  double mine_terms = 0;
  for (int i = 0; i < inst.n; ++i) mine_terms += inst.mine_at(i, profile[i]);
  return 0.5 * pairwise + mine_terms;
}

namespace {

// Worst |delta Psi - delta J| over all unilateral deviations from one profile.
double max_deviation_gap(const GameInstance& inst, Profile& p) {
  const double psi0 = potential(inst, p);
  double worst = 0;
  for (int i = 0; i < inst.n; ++i) {
    const int original = p[i];
    const double u0 = game_utility(inst, i, p);
    for (int a = 0; a <= inst.k; ++a) {
      if (a == original) continue;
      p[i] = a;
      const double gap =
          std::abs((potential(inst, p) - psi0) - (game_utility(inst, i, p) - u0));
      worst = std::max(worst, gap);
    }
    p[i] = original;
  }
  return worst;
}

PotentialCheck verify_impl(const GameInstance& inst, std::size_t budget, double tolerance,
                           bool parallel) {
  const std::size_t total = checked_profile_count(inst, budget);
  double worst = 0;

  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel
    {
      Profile p(inst.n);
      double local_worst = 0;
#pragma omp for schedule(static)
      for (long long idx = 0; idx < static_cast<long long>(total); ++idx) {
        p = decode_profile(static_cast<std::size_t>(idx), inst.n, inst.k);
        local_worst = std::max(local_worst, max_deviation_gap(inst, p));
      }
#pragma omp critical
      worst = std::max(worst, local_worst);
    }
#else
    parallel = false;
#endif
  }
  if (!parallel) {
    for (std::size_t idx = 0; idx < total; ++idx) {
      Profile p = decode_profile(idx, inst.n, inst.k);
      worst = std::max(worst, max_deviation_gap(inst, p));
    }
  }

  PotentialCheck out;
  out.max_discrepancy = worst;
  out.holds = worst <= tolerance;
  out.profiles_checked = total;
  out.deviations_checked =
      static_cast<std::uint64_t>(total) * static_cast<std::uint64_t>(inst.n) *
      static_cast<std::uint64_t>(inst.k);
  return out;
}

}  // namespace

PotentialCheck verify_exact_potential(const GameInstance& inst, std::size_t budget,
                                      double tolerance) {
  return verify_impl(inst, budget, tolerance, true);
}

PotentialCheck verify_exact_potential_serial(const GameInstance& inst, std::size_t budget,
                                             double tolerance) {
  return verify_impl(inst, budget, tolerance, false);
}

BestResponse best_response(const GameInstance& inst, int player, const Profile& profile) {
  Profile p = profile;
  BestResponse best;
  best.action = 0;
  p[player] = 0;
  best.utility = game_utility(inst, player, p);
  for (int a = 1; a <= inst.k; ++a) {
    p[player] = a;
    const double u = game_utility(inst, player, p);
    if (u > best.utility) {
      best.action = a;
      best.utility = u;
    }
  }
  return best;
}

bool is_pure_nash(const GameInstance& inst, const Profile& profile, double tolerance) {
  Profile p = profile;
  for (int i = 0; i < inst.n; ++i) {
    const double u0 = game_utility(inst, i, p);
    const int original = p[i];
    for (int a = 0; a <= inst.k; ++a) {
      if (a == original) continue;
      p[i] = a;
      if (game_utility(inst, i, p) > u0 + tolerance) return false;
    }
    p[i] = original;
  }
  return true;
}

NashCertificate solve_nash(const GameInstance& inst, Profile start, long max_iters) {
  if (static_cast<int>(start.size()) != inst.n)
    throw ContractError("start profile length must equal player count");
  for (int a : start)
    if (a < 0 || a > inst.k) throw ContractError("start profile action out of range");

  constexpr double kImprovement = 1e-12;
  Profile p = std::move(start);
  long steps = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < inst.n; ++i) {
      const double current = game_utility(inst, i, p);
      const BestResponse br = best_response(inst, i, p);
      if (br.utility > current + kImprovement) {
        p[i] = br.action;
        ++steps;
        changed = true;
        if (steps > max_iters) {
          // A well-formed instance cannot cycle; report where the walk stood.
          std::string at = "[";
          for (int a : p) at += std::to_string(a) + ",";
          at.back() = ']';
          throw ContractError("best-response dynamics exceeded max_iters after " +
                              std::to_string(steps) + " improvement steps at profile " + at +
                              "; the instance does not behave like a potential game");
        }
      }
    }
  }

  NashCertificate cert;
  cert.profile = std::move(p);
  cert.improvement_steps = steps;
  cert.verified = is_pure_nash(inst, cert.profile, kImprovement);
  return cert;
}

namespace {

std::vector<Profile> enumerate_impl(const GameInstance& inst, std::size_t budget, bool parallel) {
  const std::size_t total = checked_profile_count(inst, budget);
  std::vector<Profile> found;

  if (parallel) {
#ifdef _OPENMP
    std::vector<std::vector<std::size_t>> per_thread;
#pragma omp parallel
    {
#pragma omp single
      per_thread.resize(omp_get_num_threads());
      std::vector<std::size_t>& mine = per_thread[omp_get_thread_num()];
#pragma omp for schedule(static)
      for (long long idx = 0; idx < static_cast<long long>(total); ++idx) {
        const Profile p = decode_profile(static_cast<std::size_t>(idx), inst.n, inst.k);
        if (is_pure_nash(inst, p)) mine.push_back(static_cast<std::size_t>(idx));
      }
    }
    std::vector<std::size_t> indices;
    for (const auto& chunk : per_thread) indices.insert(indices.end(), chunk.begin(), chunk.end());
    std::sort(indices.begin(), indices.end());  // deterministic order regardless of threads
    for (std::size_t idx : indices) found.push_back(decode_profile(idx, inst.n, inst.k));
    return found;
#else
    parallel = false;
#endif
  }
  for (std::size_t idx = 0; idx < total; ++idx) {
    const Profile p = decode_profile(idx, inst.n, inst.k);
    if (is_pure_nash(inst, p)) found.push_back(p);
  }
  return found;
}

}  // namespace

std::vector<Profile> enumerate_pure_nash(const GameInstance& inst, std::size_t budget) {
  return enumerate_impl(inst, budget, true);
}

std::vector<Profile> enumerate_pure_nash_serial(const GameInstance& inst, std::size_t budget) {
  return enumerate_impl(inst, budget, false);
}

}  // namespace bcmec
