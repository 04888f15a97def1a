#include "fogcache/optimizer.hpp"

#include <limits>
#include <stdexcept>

#include "fogcache/analytic.hpp"

namespace fogcache {

namespace {

void check_grid(std::span<const double> r_grid) {
  if (r_grid.empty()) throw std::invalid_argument("rate grid is empty");
  for (double r : r_grid)
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("rate grid values must lie in (0, 1]");
}

N0Range resolve(const SystemConfig& config, N0Range range) {
  if (range.lo == 0 && range.hi == 0) return {config.M, config.N};
  if (range.lo < 1 || range.hi > config.N || range.lo > range.hi)
    throw std::invalid_argument("invalid N0 range");
  return range;
}

}  // namespace

std::vector<double> rate_grid(int L) {
  if (L < 1) throw std::invalid_argument("L must be >= 1");
  std::vector<double> grid(L);
  for (int l = 1; l <= L; ++l) grid[l - 1] = static_cast<double>(l) / L;
  return grid;
}

OptimizationResult optimize(const SystemConfig& config, const PopularityDist& dist) {
  config.validate();
  const auto grid = rate_grid(config.L);
  return optimize(config, dist, grid);
}

OptimizationResult optimize(const SystemConfig& config, const PopularityDist& dist,
                            std::span<const double> r_grid, N0Range range) {
  config.validate();
  check_grid(r_grid);
  range = resolve(config, range);

  OptimizationResult result;
  result.rate_star = std::numeric_limits<double>::infinity();
  result.grid.reserve(static_cast<std::size_t>(range.hi - range.lo + 1) * r_grid.size());
  for (int N0 = range.lo; N0 <= range.hi; ++N0) {
    for (double r : r_grid) {
      if (config.M * r / N0 > 1.0) continue;
      const double rate = average_rate(config, dist, PlacementParams{N0, r}).average;
      result.grid.push_back({N0, r, rate});
      const bool better = rate < result.rate_star ||
                          (rate == result.rate_star &&
                           (r > result.r_star || (r == result.r_star && N0 < result.N0_star)));
      if (better) {
        result.N0_star = N0;
        result.r_star = r;
        result.rate_star = rate;
      }
    }
  }
  if (result.grid.empty()) throw std::invalid_argument("optimize: no feasible grid point");
  return result;
}

std::vector<RateCurvePoint> sweep_rate_curve(const SystemConfig& config,
                                             const PopularityDist& dist,
                                             std::span<const double> r_grid) {
  config.validate();
  check_grid(r_grid);
  std::vector<RateCurvePoint> curve;
  curve.reserve(r_grid.size());
  for (double r : r_grid) {
    RateCurvePoint best{r, 0, std::numeric_limits<double>::infinity()};
    for (int N0 = config.M; N0 <= config.N; ++N0) {
      const double rate = average_rate(config, dist, PlacementParams{N0, r}).average;
      if (rate < best.rate) {
        best.best_N0 = N0;
        best.rate = rate;
      }
    }
    curve.push_back(best);
  }
  return curve;
}

}  // namespace fogcache
