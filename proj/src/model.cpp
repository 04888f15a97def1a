#include "fogcache/model.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace fogcache {

void SystemConfig::validate() const {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (M < 1 || M > N) throw std::invalid_argument("M must satisfy 1 <= M <= N");
  if (F_symbols < 1) throw std::invalid_argument("F_symbols must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("alpha must be a finite nonnegative number");
  if (L < 1) throw std::invalid_argument("L must be >= 1");
}

void PlacementParams::validate(int N) const {
  if (N0 < 1 || N0 > N)
    throw std::invalid_argument("N0 must satisfy 1 <= N0 <= N");
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("r must lie in (0, 1]");
}

PopularityDist::PopularityDist(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("popularity vector is empty");
  double total = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0)
      throw std::invalid_argument("popularity entries must be finite and nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument("popularity entries must sum to 1");
  for (double& p : probs_) p /= total;
  std::sort(probs_.begin(), probs_.end(), std::greater<>());
}

PopularityDist zipf_popularity(int N, double alpha) {
  if (N < 1) throw std::invalid_argument("zipf_popularity: N must be >= 1");
  if (!(alpha >= 0.0)) throw std::invalid_argument("zipf_popularity: alpha must be >= 0");
  std::vector<double> weights(N);
  double total = 0.0;
  for (int j = 1; j <= N; ++j) {
    weights[j - 1] = std::pow(static_cast<double>(j), -alpha);
    total += weights[j - 1];
  }
  for (double& w : weights) w /= total;
  return PopularityDist(std::move(weights));
}

PopularityDist parse_popularity(std::istream& in) {
  std::vector<double> probs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double value;
    if (!(fields >> value)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::invalid_argument("popularity file: bad number on line " +
                                  std::to_string(lineno));
    }
    std::string rest;
    if (fields >> rest)
      throw std::invalid_argument("popularity file: trailing text on line " +
                                  std::to_string(lineno));
    probs.push_back(value);
  }
  return PopularityDist(std::move(probs));
}

PopularityDist load_popularity(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open popularity file " + path);
  return parse_popularity(in);
}

double cached_mass(const PopularityDist& dist, int N0) {
  if (N0 < 1 || N0 > dist.size())
    throw std::invalid_argument("cached_mass: N0 out of range");
  if (N0 == dist.size()) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= N0; ++j) sum += dist[j];
  return std::min(sum, 1.0);
}

double binom(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  if (n <= 67) {
    // Each partial product is C(n-k+i, i), so the division is exact.
    unsigned __int128 acc = 1;
    for (int i = 1; i <= k; ++i) acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    return static_cast<double>(acc);
  }
  double acc = 1.0;
  for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
  return acc < 1e15 ? std::round(acc) : acc;
}

std::vector<double> group_size_pmf_table(int K, double p0) {
  if (K < 0) throw std::invalid_argument("group_size_pmf: K must be >= 0");
  if (!(p0 >= 0.0 && p0 <= 1.0))
    throw std::invalid_argument("group_size_pmf: p0 must lie in [0, 1]");
  std::vector<double> pmf(K + 1, 0.0);
  if (p0 == 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p0 == 1.0) {
    pmf[K] = 1.0;
    return pmf;
  }
  const double seed = std::pow(1.0 - p0, K);
  if (seed >= DBL_MIN) {
    const double odds = p0 / (1.0 - p0);
    pmf[0] = seed;
    for (int k = 0; k < K; ++k)
      pmf[k + 1] = pmf[k] * (static_cast<double>(K - k) / (k + 1)) * odds;
    return pmf;
  }
  const double log_p = std::log(p0), log_q = std::log1p(-p0);
  for (int k = 0; k <= K; ++k) {
    const double log_c = std::lgamma(K + 1.0) - std::lgamma(k + 1.0) - std::lgamma(K - k + 1.0);
    pmf[k] = std::exp(log_c + k * log_p + (K - k) * log_q);
  }
  return pmf;
}

double group_size_pmf(int K, double p0, int k) {
  if (k < 0 || k > K) throw std::invalid_argument("group_size_pmf: k out of range");
  return group_size_pmf_table(K, p0)[k];
}

}  // namespace fogcache
