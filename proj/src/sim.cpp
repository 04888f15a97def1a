#include "fogcache/sim.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace fogcache {

namespace {

constexpr std::uint64_t kDemandStream = 0x6465'6d61'6e64ULL;
constexpr std::uint64_t kPlacementStream = 0x706c'6163'6500ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t pair_seed(std::uint64_t seed, int fap, int file) {
  return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(fap)), static_cast<std::uint64_t>(file));
}

// Floyd's algorithm: a uniform `count`-subset of [0, n). `marks` must be
// all-zero of size n on entry and is restored on exit.
std::vector<std::uint32_t> sample_subset(std::uint64_t seed, std::int64_t n, std::int64_t count,
                                         std::vector<std::uint8_t>& marks) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> picked;
  picked.reserve(static_cast<std::size_t>(count));
  for (std::int64_t j = n - count; j < n; ++j) {
    std::uniform_int_distribution<std::int64_t> pick(0, j);
    auto t = static_cast<std::uint32_t>(pick(rng));
    if (marks[t]) t = static_cast<std::uint32_t>(j);
    marks[t] = 1;
    picked.push_back(t);
  }
  for (auto idx : picked) marks[idx] = 0;
  return picked;
}

void check_placement(const SystemConfig& config, const PlacementParams& params) {
  config.validate();
  params.validate(config.N);
  if (params.N0 < config.M)
    throw std::invalid_argument("placement requires N0 >= M");
  if (cache_quota(config.M, config.F_symbols, params.N0) < 1)
    throw std::invalid_argument("cache quota is 0 symbols; increase F_symbols");
  if (coded_length(config.F_symbols, params.r) > std::int64_t{UINT32_MAX})
    throw std::invalid_argument("coded file too long for 32-bit symbol indices");
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

SymbolClasses classify_symbols(const CacheContents& cache, int file, std::span<const int> members) {
  if (members.size() > static_cast<std::size_t>(kMaxSimulatedFaps))
    throw CapacityError("classify_symbols: too many members");
  const auto n = static_cast<std::size_t>(cache.coded_length());
  const std::size_t classes = std::size_t{1} << members.size();
  std::vector<std::uint32_t> signature(n, 0);
  for (std::size_t pos = 0; pos < members.size(); ++pos)
    for (auto idx : cache.symbols(members[pos], file)) signature[idx] |= 1u << pos;

  SymbolClasses index;
  index.offset.assign(classes + 1, 0);
  for (auto sig : signature) ++index.offset[sig + 1];
  for (std::size_t c = 0; c < classes; ++c) index.offset[c + 1] += index.offset[c];
  std::vector<std::uint32_t> cursor(index.offset.begin(), index.offset.end() - 1);
  index.order.resize(n);
  for (std::size_t idx = 0; idx < n; ++idx)
    index.order[cursor[signature[idx]]++] = static_cast<std::uint32_t>(idx);
  return index;
}

std::int64_t coded_length(std::int64_t F_symbols, double r) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("code rate r must lie in (0, 1]");
  // The epsilon keeps exact quotients such as 100 / 0.5 from rounding up.
  return static_cast<std::int64_t>(std::ceil(static_cast<double>(F_symbols) / r - 1e-9));
}

std::int64_t cache_quota(int M, std::int64_t F_symbols, int N0) {
  if (N0 < 1) throw std::invalid_argument("N0 must be >= 1");
  return static_cast<std::int64_t>(M) * F_symbols / N0;
}

CacheContents::CacheContents(int K, int N0, std::int64_t coded_length, std::int64_t quota)
    : K_(K), N0_(N0), coded_length_(coded_length), quota_(quota) {
  if (K < 1 || N0 < 1 || quota < 0 || quota > coded_length)
    throw std::invalid_argument("CacheContents: inconsistent dimensions");
  sets_.resize(static_cast<std::size_t>(K) * N0);
  present_.assign(sets_.size(), 0);
}

std::size_t CacheContents::slot(int fap, int file) const {
  if (fap < 0 || fap >= K_ || file < 1 || file > N0_)
    throw std::invalid_argument("CacheContents: (fap, file) out of range");
  return static_cast<std::size_t>(fap) * N0_ + (file - 1);
}

bool CacheContents::has(int fap, int file) const {
  if (file > N0_ && fap >= 0 && fap < K_) return true;  // uncached group: empty by definition
  return present_[slot(fap, file)] != 0;
}

std::span<const std::uint32_t> CacheContents::symbols(int fap, int file) const {
  if (file > N0_ && fap >= 0 && fap < K_) return {};
  const auto s = slot(fap, file);
  if (!present_[s]) throw std::invalid_argument("CacheContents: pair not materialized");
  return sets_[s];
}

void CacheContents::set(int fap, int file, std::vector<std::uint32_t> symbols) {
  if (static_cast<std::int64_t>(symbols.size()) != quota_)
    throw std::invalid_argument("CacheContents: set size differs from quota");
  for (auto idx : symbols)
    if (idx >= coded_length_) throw std::invalid_argument("CacheContents: index out of range");
  const auto s = slot(fap, file);
  sets_[s] = std::move(symbols);
  present_[s] = 1;
}

CacheContents place(const SystemConfig& config, const PlacementParams& params,
                    std::uint64_t seed) {
  check_placement(config, params);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(config.K) * params.N0);
  for (int fap = 0; fap < config.K; ++fap)
    for (int file = 1; file <= params.N0; ++file) pairs.emplace_back(fap, file);
  return place_pairs(config, params, seed, pairs);
}

CacheContents place_pairs(const SystemConfig& config, const PlacementParams& params,
                          std::uint64_t seed, std::span<const std::pair<int, int>> pairs) {
  check_placement(config, params);
  const auto length = coded_length(config.F_symbols, params.r);
  const auto quota = cache_quota(config.M, config.F_symbols, params.N0);
  CacheContents cache(config.K, params.N0, length, quota);
  std::vector<std::uint8_t> marks(static_cast<std::size_t>(length), 0);
  for (auto [fap, file] : pairs) {
    if (file > params.N0 || cache.has(fap, file)) continue;
    cache.set(fap, file, sample_subset(pair_seed(seed, fap, file), length, quota, marks));
  }
  return cache;
}

std::vector<int> draw_demands(const PopularityDist& dist, int K, std::uint64_t seed) {
  if (K < 0) throw std::invalid_argument("draw_demands: K must be >= 0");
  std::mt19937_64 rng(seed);
  const auto probs = dist.probs();
  std::discrete_distribution<int> pick(probs.begin(), probs.end());
  std::vector<int> demand(K);
  for (auto& d : demand) d = pick(rng) + 1;
  return demand;
}

GroupSplit partition_groups(std::span<const int> demand, int N0) {
  GroupSplit split;
  for (int fap = 0; fap < static_cast<int>(demand.size()); ++fap)
    (demand[fap] <= N0 ? split.cached : split.uncached).push_back(fap);
  return split;
}

std::vector<int> MulticastMessage::members() const {
  std::vector<int> out;
  for (std::uint64_t bits = targets; bits != 0; bits &= bits - 1) out.push_back(std::countr_zero(bits));
  return out;
}

bool TrialResult::all_decoded() const {
  return std::all_of(decode_ok.begin(), decode_ok.end(), [](bool ok) { return ok; });
}

Delivery deliver(const CacheContents& cache, std::span<const int> demand,
                 const SystemConfig& config, const PlacementParams& params,
                 PieceSource source) {
  config.validate();
  params.validate(config.N);
  if (cache.K() != config.K || cache.N0() != params.N0 ||
      cache.coded_length() != coded_length(config.F_symbols, params.r) ||
      cache.quota() != cache_quota(config.M, config.F_symbols, params.N0))
    throw std::invalid_argument("deliver: cache does not match the placement parameters");
  if (static_cast<int>(demand.size()) != config.K)
    throw std::invalid_argument("deliver: demand length differs from K");
  for (int d : demand)
    if (d < 1 || d > config.N) throw std::invalid_argument("deliver: demand out of range");

  const GroupSplit split = partition_groups(demand, params.N0);
  const auto& members = split.cached;
  const int k = static_cast<int>(members.size());
  if (k > kMaxSimulatedFaps)
    throw CapacityError("deliver: more than " + std::to_string(kMaxSimulatedFaps) +
                        " F-APs in the cached group");
  for (int fap : members)
    for (int other : members)
      if (!cache.has(other, demand[fap]))
        throw std::invalid_argument("deliver: cache lacks a pair needed for the demand");

  const std::int64_t F = config.F_symbols;
  const auto n = static_cast<std::size_t>(cache.coded_length());

  Delivery out;
  TrialResult& trial = out.trial;
  trial.demand.assign(demand.begin(), demand.end());
  trial.k1 = k;
  trial.decode_ok.assign(config.K, false);

  std::map<int, SymbolClasses> classes;
  for (int fap : members)
    if (!classes.contains(demand[fap])) classes.emplace(demand[fap], classify_symbols(cache, demand[fap], members));

  // held[pos][idx]: member `pos` of K1 holds coded symbol idx of its file.
  std::vector<std::vector<std::uint8_t>> held(k, std::vector<std::uint8_t>(n, 0));
  std::vector<std::int64_t> received(k, 0);
  // taken[pos][mask]: symbols of class `mask` already sent to member pos,
  // always a prefix of the class. spare[pos] lists classes with some left.
  const bool fill = source == PieceSource::any_decodable;
  std::vector<std::vector<std::uint32_t>> taken(fill ? k : 0, std::vector<std::uint32_t>(std::size_t{1} << k, 0));
  std::vector<std::vector<std::uint32_t>> spare(fill ? k : 0);
  for (int pos = 0; pos < k; ++pos)
    for (auto idx : cache.symbols(members[pos], demand[members[pos]])) held[pos][idx] = 1;
  auto class_of = [&](int pos) -> const SymbolClasses& { return classes.at(demand[members[pos]]); };

  // Running schedule targets for the need-aware payload.
  std::vector<double> scheduled(k, 0.0);
  std::vector<std::int64_t> sent_at_level(k, 0);
  int level = -1;

  // One message to the positions in `set`. Every target asks for its share
  // of the level plus its running deficit spread over the messages it has
  // left at this level, and takes what it can up to the largest ask: first
  // its exact class, then unsent symbols cached by every other target (any
  // such symbol decodes from the same XOR). Returns the payload length.
  auto send_filled = [&](std::uint32_t set, double ratio, std::int64_t per_member) {
    const int j = std::popcount(set);
    if (j != level) {
      level = j;
      std::fill(sent_at_level.begin(), sent_at_level.end(), 0);
    }
    double ask = 0.0;
    for (std::uint32_t bits = set; bits != 0; bits &= bits - 1) {
      const int pos = std::countr_zero(bits);
      const double left = static_cast<double>(per_member - sent_at_level[pos]);
      ask = std::max(ask, ratio + (scheduled[pos] - static_cast<double>(received[pos])) / left);
    }
    // Rounding error is fed back through the deficit, so nearest is unbiased.
    const auto cap = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(ask + 0.5)));
    std::int64_t payload = 0;
    for (std::uint32_t bits = set; bits != 0; bits &= bits - 1) {
      const int pos = std::countr_zero(bits);
      const auto& index = class_of(pos);
      const std::uint32_t subfile = set & ~(1u << pos);
      auto grab = [&](std::uint32_t mask, std::int64_t want) {
        const auto n_take = std::min<std::int64_t>(want, index.size(mask) - taken[pos][mask]);
        const auto from = index.offset[mask] + taken[pos][mask];
        for (std::int64_t t = 0; t < n_take; ++t) held[pos][index.order[from + t]] = 1;
        taken[pos][mask] += static_cast<std::uint32_t>(n_take);
        return n_take;
      };
      std::int64_t got = grab(subfile, cap);
      auto& list = spare[pos];
      for (std::size_t i = 0; i < list.size() && got < cap;) {
        const std::uint32_t mask = list[i];
        if ((mask & subfile) != subfile) {
          ++i;
          continue;
        }
        got += grab(mask, cap - got);
        if (taken[pos][mask] == index.size(mask)) {
          list[i] = list.back();
          list.pop_back();
        } else {
          ++i;
        }
      }
      if (taken[pos][subfile] < index.size(subfile)) list.push_back(subfile);
      received[pos] += got;
      scheduled[pos] += ratio;
      ++sent_at_level[pos];
      payload = std::max(payload, got);
    }
    return payload;
  };

  const double threshold = static_cast<double>(F) * (1.0 - static_cast<double>(config.M) / params.N0);
  if (k > 0 && threshold > 0.0) {
    const double p = config.M * params.r / params.N0;
    const double coded_F = static_cast<double>(F) / params.r;
    double sum = 0.0;
    for (int j = k; j >= 1; --j) {
      // Expected size of one class cached by exactly j-1 of the k members.
      const double length = coded_F * std::pow(p, j - 1) * std::pow(1.0 - p, k - j + 1);
      const double per_member = binom(k - 1, j - 1);
      const double increment = length * per_member;
      const double ratio = sum + increment < threshold ? length : (threshold - sum) / per_member;
      const auto quota = static_cast<std::int64_t>(std::ceil(ratio - 1e-9));

      // Gosper's hack: all j-subsets of the k member positions.
      const std::uint32_t limit = 1u << k;
      for (std::uint32_t set = (1u << j) - 1; set < limit;) {
        MulticastMessage message;
        if (fill) {
          message.payload_symbols = send_filled(set, ratio, static_cast<std::int64_t>(per_member));
        } else {
          std::int64_t largest = 0;
          for (std::uint32_t bits = set; bits != 0; bits &= bits - 1) {
            const int pos = std::countr_zero(bits);
            largest = std::max<std::int64_t>(largest, class_of(pos).size(set & ~(1u << pos)));
          }
          const std::int64_t payload = std::min(quota, largest);
          for (std::uint32_t bits = set; bits != 0; bits &= bits - 1) {
            const int pos = std::countr_zero(bits);
            const auto& index = class_of(pos);
            const std::uint32_t subfile = set & ~(1u << pos);
            const auto take = std::min<std::int64_t>(payload, index.size(subfile));
            const auto begin = index.offset[subfile];
            for (std::int64_t t = 0; t < take; ++t) held[pos][index.order[begin + t]] = 1;
            received[pos] += take;
          }
          message.payload_symbols = payload;
        }
        for (std::uint32_t bits = set; bits != 0; bits &= bits - 1)
          message.targets |= std::uint64_t{1} << members[std::countr_zero(bits)];
        trial.multicast_symbols += message.payload_symbols;
        out.messages.push_back(message);

        const std::uint32_t low = set & -set;
        const std::uint32_t ripple = set + low;
        set = (((ripple ^ set) >> 2) / low) | ripple;
      }
      if (sum + increment >= threshold) break;
      sum += increment;
    }
  }

  for (int pos = 0; pos < k; ++pos) {
    const auto distinct = static_cast<std::int64_t>(std::count(held[pos].begin(), held[pos].end(), 1));
    if (distinct != cache.quota() + received[pos])
      throw std::logic_error("deliver: multicast delivered a symbol the F-AP already held");
    const std::int64_t shortfall = std::max<std::int64_t>(0, F - distinct);
    trial.patch_symbols += shortfall;
    trial.decode_ok[members[pos]] = distinct + shortfall >= F;
  }
  for (int fap : split.uncached) {
    trial.unicast_symbols += F;
    trial.decode_ok[fap] = true;
  }
  trial.rate_file_units = static_cast<double>(trial.total_symbols()) / static_cast<double>(F);
  return out;
}

namespace {

TrialResult run_trial(const SystemConfig& config, const PopularityDist& dist,
                      const PlacementParams& params, std::uint64_t master_seed, int trial_id,
                      PieceSource source) {
  const std::uint64_t trial_seed = mix_seed(master_seed, static_cast<std::uint64_t>(trial_id));
  const auto demand = draw_demands(dist, config.K, mix_seed(trial_seed, kDemandStream));
  const auto split = partition_groups(demand, params.N0);
  std::vector<std::pair<int, int>> pairs;
  for (int requester : split.cached)
    for (int fap : split.cached) pairs.emplace_back(fap, demand[requester]);
  const auto cache = place_pairs(config, params, mix_seed(trial_seed, kPlacementStream), pairs);
  return deliver(cache, demand, config, params, source).trial;
}

}  // namespace

MonteCarloSummary monte_carlo(const SystemConfig& config, const PopularityDist& dist,
                              const PlacementParams& params, int trials,
                              std::uint64_t master_seed, int threads, PieceSource source) {
  check_placement(config, params);
  if (trials < 1) throw std::invalid_argument("monte_carlo: trials must be >= 1");
  if (dist.size() != config.N) throw std::invalid_argument("monte_carlo: popularity size differs from N");
  if (config.K > kMaxSimulatedFaps)
    throw CapacityError("monte_carlo: K above the simulator limit of " +
                        std::to_string(kMaxSimulatedFaps));

  MonteCarloSummary summary;
  summary.trials = trials;
  summary.results.resize(trials);

  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, trials);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (int t = next++; t < trials && !failed; t = next++) {
      try {
        summary.results[t] = run_trial(config, dist, params, master_seed, t, source);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  double sum = 0.0;
  std::int64_t patch = 0, total = 0;
  for (const auto& r : summary.results) {
    sum += r.rate_file_units;
    patch += r.patch_symbols;
    total += r.total_symbols();
    if (r.all_decoded()) ++summary.decode_success;
  }
  summary.mean_rate = sum / trials;
  double sq = 0.0;
  for (const auto& r : summary.results) sq += (r.rate_file_units - summary.mean_rate) * (r.rate_file_units - summary.mean_rate);
  summary.std_rate = trials > 1 ? std::sqrt(sq / (trials - 1)) : 0.0;
  summary.patch_fraction = total > 0 ? static_cast<double>(patch) / static_cast<double>(total) : 0.0;
  return summary;
}

void write_trials_csv(std::ostream& out, std::span<const TrialResult> results) {
  out << "trial_id,k1,multicast_symbols,unicast_symbols,patch_symbols,rate_file_units,decode_ok\n";
  char line[256];
  for (std::size_t t = 0; t < results.size(); ++t) {
    const auto& r = results[t];
    std::snprintf(line, sizeof line, "%zu,%d,%" PRId64 ",%" PRId64 ",%" PRId64 ",%.12g,%d\n", t, r.k1,
                  r.multicast_symbols, r.unicast_symbols, r.patch_symbols, r.rate_file_units,
                  r.all_decoded() ? 1 : 0);
    out << line;
  }
}

}  // namespace fogcache
