#include "bcmec/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bcmec {

std::uint64_t sim_hash(std::span<const std::uint8_t> bytes) {
  // FNV-1a, 64-bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t sim_hash_words(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t w : words) {
    for (int i = 0; i < 8; ++i) {
      h ^= (w >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

double mining_utility(double t_por_s, double deadline_s) {
  const double v = std::exp(1.0 - t_por_s / deadline_s) - 1.0;
  return std::max(v, 0.0);
}

std::vector<MinerState> select_miners(const Scenario& sc, const std::vector<double>& reputations,
                                      int m, long round) {
  const int n = sc.num_devices();
  if (m < 1 || m > n) throw ContractError("select_miners requires 1 <= m <= N");
  if (static_cast<int>(reputations.size()) != n)
    throw ContractError("reputations length must equal device count");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return reputations[a] > reputations[b];  // ties keep the lower index first
  });

  std::vector<MinerState> miners(m);
  for (int i = 0; i < m; ++i) {
    miners[i].device_index = order[i];
    miners[i].reputation = reputations[order[i]];
    miners[i].public_key = sim_hash_words({sc.seed, static_cast<std::uint64_t>(order[i])});
  }
  miners[round % m].is_manager = true;
  return miners;
}

double por_latency(const DeviceConfig& dev, const ConsensusConfig& cc, double verify_alloc_hz) {
  const double bits_down = cc.part_bytes * 8.0;
  const double bits_up = cc.result_bytes * 8.0;
  const double two_miner_scale = cc.scale_per_miner * 2.0;
  return bits_down / dev.downlink_bps + verify_alloc_hz / dev.cpu_budget_hz +
         cc.broadcast_coeff * cc.part_bytes * two_miner_scale + bits_up / dev.uplink_bps;
}

double por_latency(const DeviceConfig& dev, const ConsensusConfig& cc) {
  return por_latency(dev, cc, dev.verify_budget_hz);
}

double dpos_latency(const DeviceConfig& dev, const ConsensusConfig& cc, int n_miners,
                    double verify_alloc_hz) {
  if (n_miners < 1) throw ContractError("dpos_latency requires at least one miner");
  const double bits_down = cc.block_bytes * 8.0;
  const double bits_up = cc.block_result_bytes * 8.0;
  const double network_scale = cc.scale_per_miner * static_cast<double>(n_miners);
  return bits_down / dev.downlink_bps + verify_alloc_hz / cc.dpos_verify_budget_hz +
         cc.broadcast_coeff * cc.block_bytes * network_scale + bits_up / dev.uplink_bps;
}

double dpos_latency(const DeviceConfig& dev, const ConsensusConfig& cc, int n_miners) {
  return dpos_latency(dev, cc, n_miners, dev.verify_budget_hz);
}

std::vector<std::uint8_t> make_block(const ConsensusConfig& cc, Rng& rng) {
  const std::size_t tx_bytes =
      std::max<std::size_t>(1, static_cast<std::size_t>(cc.block_bytes) / cc.tx_per_block);
  std::vector<std::uint8_t> block;
  block.reserve(tx_bytes * cc.tx_per_block);
  for (int t = 0; t < cc.tx_per_block; ++t)
    for (std::size_t i = 0; i < tx_bytes; ++i) block.push_back(static_cast<std::uint8_t>(rng()));
  return block;
}

static std::uint64_t sign_part(std::uint64_t content_hash, std::uint64_t public_key,
                               std::uint64_t timestamp) {
  return sim_hash_words({content_hash, public_key, timestamp});
}

std::vector<BlockPart> partition_block(std::span<const std::uint8_t> block,
                                       const std::vector<MinerState>& miners, Rng& rng) {
  const int n = static_cast<int>(miners.size());
  if (n < 2) throw ContractError("a verification round needs at least 2 miners");

  std::vector<int> numbers(n);
  std::iota(numbers.begin(), numbers.end(), 1);
  shuffle(numbers, rng);
  const std::uint64_t timestamp = rng();

  // Equal split; the first (size % n) parts carry one extra byte.
  const std::size_t base = block.size() / n;
  const std::size_t extra = block.size() % n;
  std::vector<BlockPart> parts(n);
  std::size_t offset = 0;
  for (int i = 0; i < n; ++i) {
    const std::size_t len = base + (static_cast<std::size_t>(i) < extra ? 1 : 0);
    BlockPart& p = parts[i];
    p.index = i + 1;
    p.content.assign(block.begin() + offset, block.begin() + offset + len);
    p.content_hash = sim_hash(p.content);
    p.assigned_number = numbers[i];
    p.timestamp = timestamp;
    p.signature = sign_part(p.content_hash, miners[i].public_key, timestamp);
    offset += len;
  }
  return parts;
}

ConsensusOutcome verify_parts(const std::vector<BlockPart>& parts,
                              const std::vector<MinerState>& miners, const Scenario& sc, Rng& rng) {
  const int n = static_cast<int>(miners.size());
  if (n < 2) throw ContractError("a verification round needs at least 2 miners");
  if (parts.size() != miners.size()) throw ContractError("one part per miner expected");

  // Each miner picks a random peer s != n before verification starts. Honest
  // peers all verify the same way, so the peer index only fixes who does the
  // work; the verdicts depend on the parts alone and the loop can run in
  // parallel with an outcome identical to the sequential pass.
  [[maybe_unused]] std::vector<int> peer(n);
  for (int i = 0; i < n; ++i) {
    const int s = uniform_int(rng, n - 1);
    peer[i] = s >= i ? s + 1 : s;
  }

  ConsensusOutcome out;
  out.per_part_verified.assign(n, false);
  std::vector<std::uint8_t> verified(n, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    const BlockPart& p = parts[i];
    // The peer recomputes the content hash and the signature from scratch.
    const std::uint64_t recomputed_hash = sim_hash(p.content);
    const std::uint64_t recomputed_sig =
        sign_part(recomputed_hash, miners[i].public_key, p.timestamp);
    verified[i] = (recomputed_hash == p.content_hash && recomputed_sig == p.signature) ? 1 : 0;
  }

  long long sum = 0;
  int positives = 0;
  for (int i = 0; i < n; ++i) {
    out.per_part_verified[i] = verified[i] != 0;
    if (verified[i]) {
      sum += parts[i].assigned_number;
      ++positives;
    }
  }
  out.sum_check = sum;
  out.expected_rnd = static_cast<long long>(n) * (n + 1) / 2;
  const int quorum = static_cast<int>(std::ceil(0.51 * n));
  out.accepted = (sum == out.expected_rnd) && (positives >= quorum);

  double latency = 0;
  for (const MinerState& m : miners) {
    const DeviceConfig& dev = sc.devices.at(m.device_index);
    latency = std::max(latency, por_latency(dev, sc.consensus));
  }
  out.latency_s = latency;
  out.bandwidth_bytes = bandwidth_cost(ConsensusScheme::PoR, sc.consensus, n);
  return out;
}

ConsensusOutcome run_por_round(std::span<const std::uint8_t> block,
                               const std::vector<MinerState>& miners, const Scenario& sc, Rng& rng,
                               Chain* chain) {
  const std::vector<BlockPart> parts = partition_block(block, miners, rng);
  ConsensusOutcome out = verify_parts(parts, miners, sc, rng);
  if (out.accepted && chain != nullptr) chain->block_hashes.push_back(sim_hash(block));
  return out;
}

double bandwidth_cost(ConsensusScheme scheme, const ConsensusConfig& cc, int n_miners) {
  if (n_miners < 2) throw ContractError("bandwidth_cost requires at least 2 miners");
  const double n = static_cast<double>(n_miners);
  if (scheme == ConsensusScheme::PoR)
    return n * (2.0 * cc.part_bytes + cc.result_bytes);
  return n * (cc.block_bytes + (n - 1.0) * cc.block_bytes + cc.block_result_bytes);
}

}  // namespace bcmec
