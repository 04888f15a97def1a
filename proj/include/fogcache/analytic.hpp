#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fogcache/model.hpp"

namespace fogcache {

// Raised when a brute-force computation would exceed its size cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Truncation point of the multicast schedule for k cached-group requests:
// every subfile class cached by more than s_k other F-APs is sent in full,
// the class cached by exactly s_k others is sent at fraction eta_k.
struct DeliveryQuota {
  int s_k = 0;
  double eta_k = 1.0;
};

// Per-k decomposition of the average fronthaul rate, in file units.
struct RateBreakdown {
  std::vector<double> pmf;  // Pr{k1 = k}
  std::vector<double> r1;   // cached-group rate given k1 = k
  std::vector<double> r2;   // uncached-group rate given k1 = k
  double average = 0.0;
};

// Probability that one F-AP caches a given coded symbol: M r / N0.
double bit_cache_prob(const PlacementParams& params, int M);

// mu_m(x) = (1/r) p^(x-1) (1-p)^(m-x+1): the size, in file units, of the
// coded symbols of one file cached by exactly a particular (x-1)-subset of
// m F-APs.
double subfile_fraction(int m, int x, const PlacementParams& params, int M);

// Finds the class cutoff at which each requesting F-AP has received
// 1 - M/N0 file units. Scans s = k-1 downward.
DeliveryQuota solve_quota(int k, int M, int N0, double r);

// Left side of the quota equation evaluated at `quota`, minus 1 - M/N0.
double quota_residual(int k, int M, int N0, double r, const DeliveryQuota& quota);

double cached_group_rate(int k, int M, int N0, double r);
double uncached_group_rate(int K, int k);

RateBreakdown average_rate(const SystemConfig& config, const PopularityDist& dist,
                           const PlacementParams& params);

// Brute force over all N^K demand vectors. Refuses (CapacityError) when
// N^K exceeds `cap`.
double enumerate_average_rate(const SystemConfig& config, const PopularityDist& dist,
                              const PlacementParams& params,
                              std::uint64_t cap = 1'000'000);

// Baselines.
double lfu_rate(const SystemConfig& config, const PopularityDist& dist);
double decentralized_rate(const SystemConfig& config, const PopularityDist& dist);

struct RlfuResult {
  double rate = 0.0;
  int N0_best = 0;
};

// Two-group random placement without coding: the proposed scheme at r = 1,
// minimized over N0 in [M, N] (or [N0_min, N0_max] when given).
RlfuResult rlfu_rate(const SystemConfig& config, const PopularityDist& dist);
RlfuResult rlfu_rate(const SystemConfig& config, const PopularityDist& dist, int N0_min,
                     int N0_max);

}  // namespace fogcache
