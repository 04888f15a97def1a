#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fogcache {

// Global system parameters. Rates computed by the analytic module are in
// file units, so F_symbols only matters to the simulator.
struct SystemConfig {
  int K = 15;                       // number of F-APs
  int N = 100;                      // number of files
  int M = 12;                       // per-F-AP cache capacity, in files
  std::int64_t F_symbols = 100000;  // file size in abstract symbols
  double alpha = 0.8;               // Zipf exponent
  int L = 100;                      // code-rate grid resolution

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

// File request probabilities, most popular first.
class PopularityDist {
 public:
  // Validates (nonnegative, finite, sums to 1 within 1e-6), renormalizes
  // and sorts nonincreasing.
  explicit PopularityDist(std::vector<double> probs);

  std::span<const double> probs() const { return probs_; }
  int size() const { return static_cast<int>(probs_.size()); }

  // 1-based file index, matching popularity rank.
  double operator[](int file) const { return probs_[file - 1]; }

 private:
  std::vector<double> probs_;
};

// The placement strategy: files 1..N0 form the cached group, every file is
// expanded by an MDS code of rate r.
struct PlacementParams {
  int N0 = 1;
  double r = 1.0;

  // Throws std::invalid_argument unless 1 <= N0 <= N and 0 < r <= 1.
  void validate(int N) const;
};

// p_j proportional to j^-alpha.
PopularityDist zipf_popularity(int N, double alpha);

// One probability per line, '#' starts a comment, blank lines ignored.
PopularityDist parse_popularity(std::istream& in);
PopularityDist load_popularity(const std::string& path);

// Probability that a single request falls in the cached group {1..N0}.
double cached_mass(const PopularityDist& dist, int N0);

// Binomial pmf of the number of F-APs requesting cached-group files.
double group_size_pmf(int K, double p0, int k);
std::vector<double> group_size_pmf_table(int K, double p0);

// Binomial coefficient as a double; 0 when k is outside [0, n].
double binom(int n, int k);

}  // namespace fogcache
