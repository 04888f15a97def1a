#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fogcache/model.hpp"
#include "fogcache/sim.hpp"

namespace fogcache::cli {

enum class Command { analyze, optimize, simulate, sweep };
enum class SweepAxis { r, alpha, K, M };
enum class Scheme { proposed, lfu, decentralized, rlfu };

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitCapped = 2;

struct ExperimentSpec {
  Command command = Command::analyze;
  SystemConfig config;
  std::optional<std::string> popularity_file;  // overrides the Zipf law
  std::optional<int> N0;
  std::optional<double> r;
  SweepAxis axis = SweepAxis::r;
  std::vector<double> grid;  // empty: the axis default
  std::vector<Scheme> schemes{Scheme::proposed, Scheme::lfu, Scheme::decentralized,
                              Scheme::rlfu};
  int trials = 2000;
  std::uint64_t seed = 1;
  int threads = 0;
  PieceSource pieces = PieceSource::any_decodable;
  std::string out;  // empty: per-command default file name

  // Throws std::invalid_argument.
  void validate() const;
};

std::string to_string(SweepAxis axis);
std::string to_string(Scheme scheme);
SweepAxis parse_axis(const std::string& text);
Scheme parse_scheme(const std::string& text);

// Grid used when --grid is omitted.
std::vector<double> default_grid(SweepAxis axis);

// Executes the experiment; human-readable output goes to `log`, CSV files
// to spec.out. Returns a process exit code.
int run(const ExperimentSpec& spec, std::ostream& log, std::ostream& err);

// Parses argv (flags, optional --config file) and runs. Returns an exit code.
int main_entry(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace fogcache::cli
