#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bcmec/rng.hpp"
#include "bcmec/scenario.hpp"

namespace bcmec {

// Simulated digest used for part hashes and signatures. Tamper-evidence is
// what the round needs, not real cryptography.
std::uint64_t sim_hash(std::span<const std::uint8_t> bytes);
std::uint64_t sim_hash_words(std::initializer_list<std::uint64_t> words);

// Reward for finishing block verification before the task deadline:
// max(e^(1 - t/deadline) - 1, 0).
double mining_utility(double t_por_s, double deadline_s);

struct MinerState {
  int device_index = 0;
  double reputation = 0;
  bool is_manager = false;
  std::uint64_t public_key = 0;
};

// The m highest-reputation devices, ties broken toward the lower device
// index. The manager rotates round-robin over the selected miners.
std::vector<MinerState> select_miners(const Scenario& sc, const std::vector<double>& reputations,
                                      int m, long round);

// PoR round latency for one miner: part download, local verification,
// two-miner broadcast, result upload.
double por_latency(const DeviceConfig& dev, const ConsensusConfig& cc, double verify_alloc_hz);
double por_latency(const DeviceConfig& dev, const ConsensusConfig& cc);

// DPoS latency over the full block with a network-wide broadcast term.
double dpos_latency(const DeviceConfig& dev, const ConsensusConfig& cc, int n_miners,
                    double verify_alloc_hz);
double dpos_latency(const DeviceConfig& dev, const ConsensusConfig& cc, int n_miners);

struct BlockPart {
  int index = 0;                      // 1..N
  std::vector<std::uint8_t> content;  // this miner's transaction slice
  std::uint64_t content_hash = 0;
  int assigned_number = 0;            // the parts' numbers form a permutation of 1..N
  std::uint64_t signature = 0;        // over (content hash, public key, timestamp)
  std::uint64_t timestamp = 0;
};

struct ConsensusOutcome {
  bool accepted = false;
  long long sum_check = 0;
  long long expected_rnd = 0;
  std::vector<bool> per_part_verified;
  double latency_s = 0;         // slowest miner in the round
  double bandwidth_bytes = 0;
};

struct Chain {
  std::vector<std::uint64_t> block_hashes;
  std::size_t length() const { return block_hashes.size(); }
};

// tx_per_block synthetic transactions summing to roughly block_bytes.
std::vector<std::uint8_t> make_block(const ConsensusConfig& cc, Rng& rng);

// Lines 4-9 of the verification round: split into equal parts, assign the
// random numbers and sign each part with its miner's key.
std::vector<BlockPart> partition_block(std::span<const std::uint8_t> block,
                                       const std::vector<MinerState>& miners, Rng& rng);

// Peer verification and the Sum == Rnd check over prebuilt parts. Exposed
// separately so tests can tamper with parts between the two phases.
ConsensusOutcome verify_parts(const std::vector<BlockPart>& parts,
                              const std::vector<MinerState>& miners, const Scenario& sc, Rng& rng);

// Full round: partition, verify, and on acceptance append to the chain.
ConsensusOutcome run_por_round(std::span<const std::uint8_t> block,
                               const std::vector<MinerState>& miners, const Scenario& sc, Rng& rng,
                               Chain* chain = nullptr);

enum class ConsensusScheme { PoR, DPoS };

// Total bytes exchanged in one round.
// PoR: every miner downloads its part, exchanges it with one peer and uploads
// the verified result. DPoS: every miner downloads the block, re-broadcasts it
// to the other miners and uploads the full verified result.
double bandwidth_cost(ConsensusScheme scheme, const ConsensusConfig& cc, int n_miners);

}  // namespace bcmec
