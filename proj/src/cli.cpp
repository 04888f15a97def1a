#include "fogcache/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fogcache/analytic.hpp"
#include "fogcache/optimizer.hpp"
#include "fogcache/sim.hpp"

namespace fogcache::cli {

namespace {

std::string fmt(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

PopularityDist popularity_for(const ExperimentSpec& spec, const SystemConfig& config) {
  if (spec.popularity_file) {
    auto dist = load_popularity(*spec.popularity_file);
    if (dist.size() != config.N)
      throw std::invalid_argument("popularity file has " + std::to_string(dist.size()) +
                                  " entries but N = " + std::to_string(config.N));
    return dist;
  }
  return zipf_popularity(config.N, config.alpha);
}

std::string output_path(const ExperimentSpec& spec, const char* fallback) {
  return spec.out.empty() ? std::string(fallback) : spec.out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file " + path);
  return out;
}

int run_analyze(const ExperimentSpec& spec, std::ostream& log) {
  const auto& config = spec.config;
  const auto dist = popularity_for(spec, config);
  if (!spec.N0 || !spec.r) throw std::invalid_argument("analyze requires --N0 and --r");
  const PlacementParams params{*spec.N0, *spec.r};
  const auto breakdown = average_rate(config, dist, params);

  log << "N0=" << params.N0 << " r=" << fmt(params.r)
      << " p0=" << fmt(cached_mass(dist, params.N0)) << "\n";
  log << "k,pmf,r1,r2\n";
  for (int k = 0; k <= config.K; ++k)
    log << k << "," << fmt(breakdown.pmf[k]) << "," << fmt(breakdown.r1[k]) << ","
        << fmt(breakdown.r2[k]) << "\n";
  log << "average_rate=" << fmt(breakdown.average) << "\n";
  if (!spec.out.empty()) {
    auto out = open_output(spec.out);
    out << "k,pmf,r1,r2\n";
    for (int k = 0; k <= config.K; ++k)
      out << k << "," << fmt(breakdown.pmf[k]) << "," << fmt(breakdown.r1[k]) << ","
          << fmt(breakdown.r2[k]) << "\n";
  }
  return kExitOk;
}

int run_optimize(const ExperimentSpec& spec, std::ostream& log) {
  const auto& config = spec.config;
  const auto dist = popularity_for(spec, config);
  const auto result = optimize(config, dist);
  const auto path = output_path(spec, "optimize_grid.csv");
  auto out = open_output(path);
  out << "N0,r,rate\n";
  for (const auto& point : result.grid)
    out << point.N0 << "," << fmt(point.r) << "," << fmt(point.rate) << "\n";

  log << "N0_star=" << result.N0_star << " r_star=" << fmt(result.r_star)
      << " rate_star=" << fmt(result.rate_star) << "\n";
  log << "grid_points=" << result.grid.size() << " written to " << path << "\n";
  return kExitOk;
}

int run_simulate(const ExperimentSpec& spec, std::ostream& log) {
  const auto& config = spec.config;
  const auto dist = popularity_for(spec, config);
  PlacementParams params;
  if (spec.N0 && spec.r) {
    params = {*spec.N0, *spec.r};
  } else if (!spec.N0 && !spec.r) {
    const auto best = optimize(config, dist);
    params = {best.N0_star, best.r_star};
    log << "using optimized parameters N0=" << params.N0 << " r=" << fmt(params.r) << "\n";
  } else {
    throw std::invalid_argument("simulate needs both --N0 and --r, or neither");
  }
  if (config.K > kMaxSimulatedFaps)
    throw CapacityError("simulate: K above the simulator limit of " +
                        std::to_string(kMaxSimulatedFaps));

  const double analytic = average_rate(config, dist, params).average;
  const auto summary = monte_carlo(config, dist, params, spec.trials, spec.seed, spec.threads, spec.pieces);
  const double rel_error = analytic > 0.0 ? std::abs(summary.mean_rate - analytic) / analytic
                                          : std::abs(summary.mean_rate);

  const std::filesystem::path path = output_path(spec, "simulate_trials.csv");
  {
    auto out = open_output(path.string());
    write_trials_csv(out, summary.results);
  }
  auto summary_path = path;
  summary_path.replace_filename(path.stem().string() + "_summary" + path.extension().string());
  {
    auto out = open_output(summary_path.string());
    out << "N0,r,trials,seed,F_symbols,analytic_rate,simulated_mean,simulated_std,rel_error,"
           "patch_fraction,decode_success\n";
    out << params.N0 << "," << fmt(params.r) << "," << summary.trials << "," << spec.seed << ","
        << config.F_symbols << "," << fmt(analytic) << "," << fmt(summary.mean_rate) << ","
        << fmt(summary.std_rate) << "," << fmt(rel_error) << "," << fmt(summary.patch_fraction)
        << "," << summary.decode_success << "\n";
  }

  log << "analytic_rate=" << fmt(analytic) << " simulated_mean=" << fmt(summary.mean_rate)
      << " simulated_std=" << fmt(summary.std_rate) << " rel_error=" << fmt(rel_error) << "\n";
  log << "patch_fraction=" << fmt(summary.patch_fraction) << " decode_success="
      << summary.decode_success << "/" << summary.trials << "\n";
  log << "trials written to " << path.string() << ", summary to " << summary_path.string() << "\n";
  return kExitOk;
}

struct SweepRow {
  double rate;
  int N0;
  double r;
};

SweepRow evaluate_scheme(Scheme scheme, const SystemConfig& config, const PopularityDist& dist,
                         std::optional<double> fixed_r) {
  switch (scheme) {
    case Scheme::proposed: {
      if (fixed_r) {
        const double rates[] = {*fixed_r};
        const auto point = sweep_rate_curve(config, dist, rates).front();
        return {point.rate, point.best_N0, point.r};
      }
      const auto best = optimize(config, dist);
      return {best.rate_star, best.N0_star, best.r_star};
    }
    case Scheme::lfu:
      return {lfu_rate(config, dist), config.M, 1.0};
    case Scheme::decentralized:
      return {decentralized_rate(config, dist), config.N, 1.0};
    case Scheme::rlfu: {
      const auto best = rlfu_rate(config, dist);
      return {best.rate, best.N0_best, 1.0};
    }
  }
  throw std::logic_error("unknown scheme");
}

int run_sweep(const ExperimentSpec& spec, std::ostream& log) {
  const auto grid = spec.grid.empty() ? default_grid(spec.axis) : spec.grid;
  const auto path = output_path(spec, "sweep.csv");
  std::ostringstream csv;
  csv << "axis_name,axis_value,scheme,rate,N0_used,r_used\n";
  for (double value : grid) {
    SystemConfig config = spec.config;
    std::optional<double> fixed_r;
    switch (spec.axis) {
      case SweepAxis::r: fixed_r = value; break;
      case SweepAxis::alpha: config.alpha = value; break;
      case SweepAxis::K: config.K = static_cast<int>(value); break;
      case SweepAxis::M: config.M = static_cast<int>(value); break;
    }
    config.validate();
    const auto dist = popularity_for(spec, config);
    for (Scheme scheme : spec.schemes) {
      const auto row = evaluate_scheme(scheme, config, dist, fixed_r);
      csv << to_string(spec.axis) << "," << fmt(value) << "," << to_string(scheme) << ","
          << fmt(row.rate) << "," << row.N0 << "," << fmt(row.r) << "\n";
    }
  }
  auto out = open_output(path);
  out << csv.str();
  log << "# proposed scheme: " << (spec.axis == SweepAxis::r ? "N0 re-optimized per r value"
                                                             : "(N0, r) re-optimized per point")
      << "; rlfu: N0 re-optimized per point; rates are analytic\n";
  log << csv.str();
  log << "written to " << path << "\n";
  return kExitOk;
}


std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) items.push_back(item);
  return items;
}

}  // namespace

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::r: return "r";
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::K: return "K";
    case SweepAxis::M: return "M";
  }
  return "?";
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::proposed: return "proposed";
    case Scheme::lfu: return "lfu";
    case Scheme::decentralized: return "decentralized";
    case Scheme::rlfu: return "rlfu";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& text) {
  if (text == "r") return SweepAxis::r;
  if (text == "alpha") return SweepAxis::alpha;
  if (text == "K") return SweepAxis::K;
  if (text == "M") return SweepAxis::M;
  throw std::invalid_argument("unknown sweep axis '" + text + "' (expected r, alpha, K or M)");
}

Scheme parse_scheme(const std::string& text) {
  if (text == "proposed") return Scheme::proposed;
  if (text == "lfu") return Scheme::lfu;
  if (text == "decentralized") return Scheme::decentralized;
  if (text == "rlfu") return Scheme::rlfu;
  throw std::invalid_argument("unknown scheme '" + text +
                              "' (expected proposed, lfu, decentralized or rlfu)");
}

std::vector<double> default_grid(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::r: return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    case SweepAxis::alpha: return {0.5, 0.8, 1.1, 1.4, 1.7, 2.0};
    case SweepAxis::K: return {5, 10, 15, 20, 25};
    case SweepAxis::M: return {4, 8, 12, 16, 20};
  }
  return {};
}

void ExperimentSpec::validate() const {
  config.validate();
  if (schemes.empty()) throw std::invalid_argument("scheme list is empty");
  if (command == Command::simulate && trials < 1)
    throw std::invalid_argument("trials must be >= 1");
  if (N0) PlacementParams{*N0, r.value_or(1.0)}.validate(config.N);
  if (r && !(*r > 0.0 && *r <= 1.0)) throw std::invalid_argument("r must lie in (0, 1]");
  if (command == Command::sweep) {
    for (double v : grid) {
      switch (axis) {
        case SweepAxis::r:
          if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("r grid values must lie in (0, 1]");
          break;
        case SweepAxis::alpha:
          if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("alpha grid values must be >= 0");
          break;
        case SweepAxis::K:
          if (!is_integer(v) || v < 1) throw std::invalid_argument("K grid values must be positive integers");
          break;
        case SweepAxis::M:
          if (!is_integer(v) || v < 1 || v > config.N)
            throw std::invalid_argument("M grid values must be integers in [1, N]");
          break;
      }
    }
  }
}

int run(const ExperimentSpec& spec, std::ostream& log, std::ostream& err) {
  try {
    spec.validate();
    switch (spec.command) {
      case Command::analyze: return run_analyze(spec, log);
      case Command::optimize: return run_optimize(spec, log);
      case Command::simulate: return run_simulate(spec, log);
      case Command::sweep: return run_sweep(spec, log);
    }
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitCapped;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

int main_entry(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Average fronthaul rate of MDS-coded two-group coded caching"};
  app.set_config("--config", "", "key = value configuration file (flags override it)");
  app.require_subcommand(1);

  ExperimentSpec spec;
  std::optional<int> N0;
  std::optional<double> r;
  std::string popularity, axis = "r", grid, schemes = "proposed,lfu,decentralized,rlfu";

  app.add_option("--K", spec.config.K, "number of F-APs")->capture_default_str();
  app.add_option("--N", spec.config.N, "number of files")->capture_default_str();
  app.add_option("--M", spec.config.M, "cache capacity per F-AP, in files")->capture_default_str();
  app.add_option("--alpha", spec.config.alpha, "Zipf exponent")->capture_default_str();
  app.add_option("--L", spec.config.L, "code-rate grid resolution")->capture_default_str();
  app.add_option("--F-symbols", spec.config.F_symbols, "file size in symbols (simulation)")
      ->capture_default_str();
  app.add_option("--popularity", popularity, "popularity file, one probability per line");
  app.add_option("--N0", N0, "file split point");
  app.add_option("--r", r, "MDS code rate");
  app.add_option("--trials", spec.trials, "Monte Carlo trials")->capture_default_str();
  app.add_option("--seed", spec.seed, "master RNG seed")->capture_default_str();
  app.add_option("--threads", spec.threads, "simulation worker threads (0 = all cores)");
  const std::map<std::string, PieceSource> piece_names{{"exact-class", PieceSource::exact_class},
                                                        {"any-decodable", PieceSource::any_decodable}};
  app.add_option("--pieces", spec.pieces, "simulated payload rule: any-decodable or exact-class")
      ->transform(CLI::CheckedTransformer(piece_names));
  app.add_option("--axis", axis, "sweep axis: r, alpha, K or M")->capture_default_str();
  app.add_option("--grid", grid, "comma-separated sweep values");
  app.add_option("--schemes", schemes, "comma-separated: proposed,lfu,decentralized,rlfu")
      ->capture_default_str();
  app.add_option("--out", spec.out, "output CSV path");

  struct Sub {
    const char* name;
    const char* help;
    Command command;
  };
  const Sub subs[] = {
      {"analyze", "rate breakdown for given --N0 and --r", Command::analyze},
      {"optimize", "grid search over (N0, r); writes the grid CSV", Command::optimize},
      {"simulate", "Monte Carlo simulation versus the closed form", Command::simulate},
      {"sweep", "baseline comparison along one axis", Command::sweep},
  };
  for (const auto& sub : subs) {
    auto* cmd = app.add_subcommand(sub.name, sub.help)->fallthrough();
    cmd->callback([&spec, command = sub.command] { spec.command = command; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    log << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    spec.N0 = N0;
    spec.r = r;
    if (!popularity.empty()) spec.popularity_file = popularity;
    spec.axis = parse_axis(axis);
    for (const auto& item : split_list(grid)) {
      std::size_t used = 0;
      spec.grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("bad grid value '" + item + "'");
    }
    spec.schemes.clear();
    for (const auto& item : split_list(schemes)) spec.schemes.push_back(parse_scheme(item));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return run(spec, log, err);
}

}  // namespace fogcache::cli
