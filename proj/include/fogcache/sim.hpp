#pragma once

// Symbol-level Monte Carlo model of the two-group coded caching scheme.
//
// Coded files are virtual: coded file i is the index space
// {0, ..., ceil(F_symbols / r) - 1} and an F-AP can reconstruct file i once
// it holds F_symbols distinct indices of it. Delivery is modeled as symbol
// accounting, no payload bytes are produced.
//
// F-AP indices are 0-based; file indices are 1-based popularity ranks.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "fogcache/analytic.hpp"
#include "fogcache/model.hpp"

namespace fogcache {

// Largest |K1| the delivery scheduler accepts; it enumerates all subsets.
inline constexpr int kMaxSimulatedFaps = 20;

// splitmix64 finalizer applied to a ^ splitmix64(b). Used to derive every
// RNG substream from a master seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

std::int64_t coded_length(std::int64_t F_symbols, double r);
std::int64_t cache_quota(int M, std::int64_t F_symbols, int N0);

// Cached coded-symbol indices per (F-AP, cached-group file). A pair may be
// left unmaterialized when only part of the placement is needed; its
// contents are nevertheless fixed by the seed.
class CacheContents {
 public:
  CacheContents(int K, int N0, std::int64_t coded_length, std::int64_t quota);

  int K() const { return K_; }
  int N0() const { return N0_; }
  std::int64_t coded_length() const { return coded_length_; }
  std::int64_t quota() const { return quota_; }

  bool has(int fap, int file) const;
  // Indices in draw order (not sorted). Throws if the pair is absent.
  std::span<const std::uint32_t> symbols(int fap, int file) const;
  void set(int fap, int file, std::vector<std::uint32_t> symbols);

 private:
  std::size_t slot(int fap, int file) const;

  int K_;
  int N0_;
  std::int64_t coded_length_;
  std::int64_t quota_;
  std::vector<std::vector<std::uint32_t>> sets_;
  std::vector<char> present_;
};

// Every F-AP caches a uniformly random floor(M F / N0)-subset of each
// cached-group coded file. Deterministic given seed.
CacheContents place(const SystemConfig& config, const PlacementParams& params,
                    std::uint64_t seed);

// Materializes only the listed (fap, file) pairs. Each pair's contents equal
// those produced by the full placement with the same seed.
CacheContents place_pairs(const SystemConfig& config, const PlacementParams& params,
                          std::uint64_t seed, std::span<const std::pair<int, int>> pairs);

// K independent requests, 1-based file indices.
std::vector<int> draw_demands(const PopularityDist& dist, int K, std::uint64_t seed);

struct GroupSplit {
  std::vector<int> cached;    // K1: F-APs requesting a file <= N0
  std::vector<int> uncached;  // K2
};

GroupSplit partition_groups(std::span<const int> demand, int N0);

// Coded symbols of one file grouped by which of `members` cache them: bit
// `pos` of a class mask stands for members[pos]. Class `mask` occupies
// order[offset[mask] .. offset[mask + 1]).
struct SymbolClasses {
  std::vector<std::uint32_t> order;
  std::vector<std::uint32_t> offset;

  std::uint32_t size(std::uint32_t mask) const { return offset[mask + 1] - offset[mask]; }
  std::span<const std::uint32_t> symbols(std::uint32_t mask) const {
    return std::span<const std::uint32_t>(order).subspan(offset[mask], size(mask));
  }
};

SymbolClasses classify_symbols(const CacheContents& cache, int file, std::span<const int> members);

struct MulticastMessage {
  std::uint64_t targets = 0;  // bit b set when F-AP b is in the target set
  std::int64_t payload_symbols = 0;

  std::vector<int> members() const;
};

struct TrialResult {
  std::vector<int> demand;
  int k1 = 0;
  std::int64_t multicast_symbols = 0;
  std::int64_t unicast_symbols = 0;
  std::int64_t patch_symbols = 0;
  std::vector<bool> decode_ok;
  double rate_file_units = 0.0;

  std::int64_t total_symbols() const { return multicast_symbols + unicast_symbols + patch_symbols; }
  bool all_decoded() const;
};

// How multicast payloads are cut.
//  exact_class:   each target's piece comes only from the class cached by
//                 exactly the other targets; payload is the scheduled
//                 expected class length, cut to the largest actual class.
//  any_decodable: each target asks for its scheduled share plus its running
//                 deficit and may also draw unsent symbols cached by every
//                 other target; payload is the largest piece taken.
enum class PieceSource { exact_class, any_decodable };

struct Delivery {
  std::vector<MulticastMessage> messages;
  TrialResult trial;
};

// Runs the delivery schedule for one demand vector against `cache`, which
// must hold every (F-AP in K1, file requested by K1) pair.
Delivery deliver(const CacheContents& cache, std::span<const int> demand,
                 const SystemConfig& config, const PlacementParams& params,
                 PieceSource source = PieceSource::any_decodable);

struct MonteCarloSummary {
  int trials = 0;
  double mean_rate = 0.0;
  double std_rate = 0.0;       // sample standard deviation
  double patch_fraction = 0.0; // patch symbols / all transmitted symbols
  int decode_success = 0;      // trials where every F-AP decoded
  std::vector<TrialResult> results;
};

// Independent trials, each with its own placement and demand substreams
// derived from (master_seed, trial index). `threads` = 0 picks the hardware
// concurrency; the result does not depend on it.
MonteCarloSummary monte_carlo(const SystemConfig& config, const PopularityDist& dist,
                              const PlacementParams& params, int trials,
                              std::uint64_t master_seed, int threads = 0,
                              PieceSource source = PieceSource::any_decodable);

// trial_id,k1,multicast_symbols,unicast_symbols,patch_symbols,rate_file_units,decode_ok
void write_trials_csv(std::ostream& out, std::span<const TrialResult> results);

}  // namespace fogcache
