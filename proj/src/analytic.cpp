#include "fogcache/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fogcache {

namespace {

// Boundary tolerance for the single-class branch; ties go to that branch.
constexpr double kBranchTol = 1e-12;

void check_rate(double r) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("code rate r must lie in (0, 1]");
}

// mu_m(x) with p already computed.
double class_mass(int m, int x, double p, double r) {
  return std::pow(p, x - 1) * std::pow(1.0 - p, m - x + 1) / r;
}

}  // namespace

double bit_cache_prob(const PlacementParams& params, int M) {
  if (params.N0 < 1) throw std::invalid_argument("bit_cache_prob: N0 must be >= 1");
  if (M < 0) throw std::invalid_argument("bit_cache_prob: M must be >= 0");
  check_rate(params.r);
  const double p = M * params.r / params.N0;
  if (p > 1.0) throw std::invalid_argument("bit_cache_prob: M r / N0 exceeds 1 (over-caching)");
  return p;
}

double subfile_fraction(int m, int x, const PlacementParams& params, int M) {
  if (x < 1 || x > m) throw std::invalid_argument("subfile_fraction: x must satisfy 1 <= x <= m");
  return class_mass(m, x, bit_cache_prob(params, M), params.r);
}

DeliveryQuota solve_quota(int k, int M, int N0, double r) {
  if (k < 1) throw std::invalid_argument("solve_quota: k must be >= 1");
  if (M < 0 || M >= N0) throw std::invalid_argument("solve_quota: requires 0 <= M < N0");
  check_rate(r);
  const double p = M * r / N0;
  const double target = 1.0 - static_cast<double>(M) / N0;

  double acc = 0.0;
  for (int s = k - 1; s >= 0; --s) {
    const double term = binom(k - 1, s) * class_mass(k, s + 1, p, r);
    if (term <= 0.0) continue;
    if (acc + term >= target) return {s, std::min(1.0, (target - acc) / term)};
    // At r = 1 the classes sum to the target exactly in real arithmetic.
    if (s == 0 && acc + term >= target * (1.0 - 1e-12)) return {0, 1.0};
    acc += term;
  }
  throw std::logic_error("solve_quota: target unreachable for k=" + std::to_string(k) +
                         " M=" + std::to_string(M) + " N0=" + std::to_string(N0) +
                         " r=" + std::to_string(r));
}

double quota_residual(int k, int M, int N0, double r, const DeliveryQuota& quota) {
  const double p = M * r / N0;
  double lhs = 0.0;
  for (int s = k - 1; s > quota.s_k; --s) lhs += binom(k - 1, s) * class_mass(k, s + 1, p, r);
  lhs += quota.eta_k * binom(k - 1, quota.s_k) * class_mass(k, quota.s_k + 1, p, r);
  return lhs - (1.0 - static_cast<double>(M) / N0);
}

double cached_group_rate(int k, int M, int N0, double r) {
  if (k < 0) throw std::invalid_argument("cached_group_rate: k must be >= 0");
  if (N0 < 1) throw std::invalid_argument("cached_group_rate: N0 must be >= 1");
  check_rate(r);
  if (k == 0 || M >= N0) return 0.0;

  const double p = M * r / N0;
  const double target = 1.0 - static_cast<double>(M) / N0;
  if (class_mass(k, k, p, r) >= target - kBranchTol) return target;

  const DeliveryQuota quota = solve_quota(k, M, N0, r);
  double rate = 0.0;
  for (int s = k - 1; s > quota.s_k; --s) rate += binom(k, s + 1) * class_mass(k, s + 1, p, r);
  rate += quota.eta_k * binom(k, quota.s_k + 1) * class_mass(k, quota.s_k + 1, p, r);
  return rate;
}

double uncached_group_rate(int K, int k) {
  if (k < 0 || k > K) throw std::invalid_argument("uncached_group_rate: k out of range");
  return static_cast<double>(K - k);
}

RateBreakdown average_rate(const SystemConfig& config, const PopularityDist& dist,
                           const PlacementParams& params) {
  config.validate();
  if (dist.size() != config.N)
    throw std::invalid_argument("average_rate: popularity size differs from N");
  params.validate(config.N);

  const double p0 = cached_mass(dist, params.N0);
  RateBreakdown out;
  out.pmf = group_size_pmf_table(config.K, p0);
  out.r1.resize(config.K + 1);
  out.r2.resize(config.K + 1);
  for (int k = 0; k <= config.K; ++k) {
    out.r1[k] = cached_group_rate(k, config.M, params.N0, params.r);
    out.r2[k] = uncached_group_rate(config.K, k);
  }
  if (params.N0 <= config.M) {
    // Cached-group requests are served from cache; only the K(1 - p0)
    // expected uncached requests cost anything.
    out.average = config.K * (1.0 - p0);
    return out;
  }
  double avg = 0.0;
  for (int k = 0; k <= config.K; ++k) avg += out.pmf[k] * (out.r1[k] + out.r2[k]);
  out.average = avg;
  return out;
}

double enumerate_average_rate(const SystemConfig& config, const PopularityDist& dist,
                              const PlacementParams& params, std::uint64_t cap) {
  config.validate();
  if (dist.size() != config.N)
    throw std::invalid_argument("enumerate_average_rate: popularity size differs from N");
  params.validate(config.N);

  std::uint64_t vectors = 1;
  for (int i = 0; i < config.K; ++i) {
    if (vectors > cap / static_cast<std::uint64_t>(config.N))
      throw CapacityError("enumerate_average_rate: N^K exceeds the enumeration cap of " +
                          std::to_string(cap));
    vectors *= static_cast<std::uint64_t>(config.N);
  }

  std::vector<double> r1(config.K + 1);
  for (int k = 0; k <= config.K; ++k)
    r1[k] = cached_group_rate(k, config.M, params.N0, params.r);

  // Odometer over demand vectors, files 1..N per F-AP.
  std::vector<int> demand(config.K, 1);
  double total = 0.0;
  for (std::uint64_t v = 0; v < vectors; ++v) {
    double weight = 1.0;
    int k1 = 0;
    for (int d : demand) {
      weight *= dist[d];
      if (d <= params.N0) ++k1;
    }
    total += weight * (r1[k1] + uncached_group_rate(config.K, k1));
    for (int pos = 0; pos < config.K; ++pos) {
      if (++demand[pos] <= config.N) break;
      demand[pos] = 1;
    }
  }
  return total;
}

double lfu_rate(const SystemConfig& config, const PopularityDist& dist) {
  config.validate();
  return config.K * (1.0 - cached_mass(dist, config.M));
}

double decentralized_rate(const SystemConfig& config, const PopularityDist& dist) {
  return average_rate(config, dist, PlacementParams{config.N, 1.0}).average;
}

RlfuResult rlfu_rate(const SystemConfig& config, const PopularityDist& dist) {
  return rlfu_rate(config, dist, config.M, config.N);
}

RlfuResult rlfu_rate(const SystemConfig& config, const PopularityDist& dist, int N0_min,
                     int N0_max) {
  config.validate();
  if (N0_min < 1 || N0_max > config.N || N0_min > N0_max)
    throw std::invalid_argument("rlfu_rate: invalid N0 range");
  RlfuResult best{std::numeric_limits<double>::infinity(), N0_min};
  for (int N0 = N0_min; N0 <= N0_max; ++N0) {
    const double rate = average_rate(config, dist, PlacementParams{N0, 1.0}).average;
    if (rate < best.rate) best = {rate, N0};
  }
  return best;
}

}  // namespace fogcache
