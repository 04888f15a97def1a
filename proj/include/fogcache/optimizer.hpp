#pragma once

#include <span>
#include <vector>

#include "fogcache/model.hpp"

namespace fogcache {

struct GridPoint {
  int N0 = 0;
  double r = 0.0;
  double rate = 0.0;
};

struct OptimizationResult {
  int N0_star = 0;
  double r_star = 0.0;
  double rate_star = 0.0;
  std::vector<GridPoint> grid;  // every evaluated point, N0-major
};

// Inclusive N0 search range; {0, 0} means the pruned default [M, N].
struct N0Range {
  int lo = 0;
  int hi = 0;
};

// Exhaustive search over N0 in [M, N] and r in {1/L, ..., 1}. Ties go to the
// larger r, then the smaller N0.
OptimizationResult optimize(const SystemConfig& config, const PopularityDist& dist);

// Same search over an explicit rate grid and N0 range.
OptimizationResult optimize(const SystemConfig& config, const PopularityDist& dist,
                            std::span<const double> r_grid, N0Range range = {});

// {1/L, 2/L, ..., 1}.
std::vector<double> rate_grid(int L);

struct RateCurvePoint {
  double r = 0.0;
  int best_N0 = 0;
  double rate = 0.0;
};

// For every r in r_grid, the best rate over N0 in [M, N] (ties to smaller N0).
std::vector<RateCurvePoint> sweep_rate_curve(const SystemConfig& config,
                                             const PopularityDist& dist,
                                             std::span<const double> r_grid);

}  // namespace fogcache
