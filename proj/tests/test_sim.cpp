#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "fogcache/sim.hpp"

using namespace fogcache;

namespace {

std::vector<std::uint32_t> sorted(std::span<const std::uint32_t> s) {
  std::vector<std::uint32_t> v(s.begin(), s.end());
  std::sort(v.begin(), v.end());
  return v;
}

PopularityDist point_mass(int N) {
  std::vector<double> p(N, 0.0);
  p[0] = 1.0;
  return PopularityDist(p);
}

}  // namespace

TEST_CASE("symbol arithmetic") {
  CHECK(coded_length(100, 0.5) == 200);
  CHECK(coded_length(100000, 0.7) == 142858);
  CHECK(coded_length(7, 1.0) == 7);
  CHECK(cache_quota(12, 100000, 100) == 12000);
  CHECK(cache_quota(1, 4, 3) == 1);
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}

TEST_CASE("placement") {
  SUBCASE("N0 = M, r = 1 caches whole files") {
    SystemConfig config{3, 10, 4, 50, 0.8, 10};
    const auto cache = place(config, {4, 1.0}, 5);
    std::vector<std::uint32_t> all(50);
    std::iota(all.begin(), all.end(), 0u);
    for (int fap = 0; fap < 3; ++fap)
      for (int file = 1; file <= 4; ++file) CHECK(sorted(cache.symbols(fap, file)) == all);
    CHECK(cache.symbols(0, 5).empty());
  }
  SUBCASE("quota arithmetic") {
    SystemConfig config{2, 4, 1, 4, 0.8, 10};
    const auto cache = place(config, {2, 1.0}, 11);
    for (int fap = 0; fap < 2; ++fap) {
      for (int file = 1; file <= 2; ++file) {
        const auto set = sorted(cache.symbols(fap, file));
        CHECK(set.size() == 2);
        CHECK(std::adjacent_find(set.begin(), set.end()) == set.end());
        CHECK(set.back() < 4);
      }
      CHECK(cache.symbols(fap, 3).empty());
    }
  }
  SUBCASE("sets are distinct, in range, and reproducible") {
    SystemConfig config{4, 30, 6, 1000, 0.8, 10};
    const PlacementParams params{20, 0.6};
    const auto a = place(config, params, 77);
    const auto b = place(config, params, 77);
    const auto c = place(config, params, 78);
    bool any_diff = false;
    for (int fap = 0; fap < 4; ++fap) {
      for (int file = 1; file <= 20; ++file) {
        const auto set = sorted(a.symbols(fap, file));
        CHECK(set.size() == 300);
        CHECK(std::adjacent_find(set.begin(), set.end()) == set.end());
        CHECK(set.back() < 1667);
        CHECK(set == sorted(b.symbols(fap, file)));
        any_diff |= set != sorted(c.symbols(fap, file));
      }
    }
    CHECK(any_diff);
  }
  SUBCASE("partial placement matches the full placement") {
    SystemConfig config{5, 30, 6, 2000, 0.8, 10};
    const PlacementParams params{25, 0.5};
    const auto full = place(config, params, 3);
    const std::vector<std::pair<int, int>> pairs{{0, 1}, {4, 25}, {2, 7}};
    const auto partial = place_pairs(config, params, 3, pairs);
    for (auto [fap, file] : pairs) {
      CHECK(partial.has(fap, file));
      CHECK(std::ranges::equal(partial.symbols(fap, file), full.symbols(fap, file)));
    }
    CHECK_FALSE(partial.has(1, 1));
    CHECK_THROWS_AS(partial.symbols(1, 1), std::invalid_argument);
  }
  SUBCASE("per-symbol cache probability concentrates at M r / N0") {
    SystemConfig config{15, 100, 12, 10000, 0.8, 10};
    const PlacementParams params{100, 0.7};
    const auto cache = place(config, params, 2024);
    const auto n = cache.coded_length();
    std::vector<int> hits(n, 0);
    for (int fap = 0; fap < 15; ++fap)
      for (int file = 1; file <= 100; ++file)
        for (auto idx : cache.symbols(fap, file)) ++hits[idx];
    const double pairs = 15.0 * 100.0;
    const double p = 12 * 0.7 / 100;
    const double sigma = std::sqrt(p * (1 - p) / pairs);
    int outliers = 0;
    for (auto h : hits) outliers += std::abs(h / pairs - p) > 3 * sigma;
    // 3-sigma exceedances should be rare (about 0.3% for a normal law).
    CHECK(outliers < n / 100);
    const double mean =
        std::accumulate(hits.begin(), hits.end(), 0.0) / (pairs * static_cast<double>(n));
    CHECK(std::abs(mean - p) < 3 * sigma / std::sqrt(static_cast<double>(n)) + 1e-4);
  }
  SUBCASE("invalid placements") {
    SystemConfig config{2, 10, 4, 2, 0.8, 10};
    CHECK_THROWS_AS(place(config, {10, 1.0}, 1), std::invalid_argument);  // quota 0
    SystemConfig ok{2, 10, 4, 100, 0.8, 10};
    CHECK_THROWS_AS(place(ok, {3, 1.0}, 1), std::invalid_argument);  // N0 < M
  }
}

TEST_CASE("demand draws") {
  CHECK(draw_demands(point_mass(5), 8, 1) == std::vector<int>(8, 1));
  CHECK(draw_demands(zipf_popularity(10, 0.8), 6, 9) == draw_demands(zipf_popularity(10, 0.8), 6, 9));

  const int draws = 10000;
  const auto two = draw_demands(zipf_popularity(2, 0.0), draws, 4);
  const double ones = static_cast<double>(std::count(two.begin(), two.end(), 1)) / draws;
  CHECK(std::abs(ones - 0.5) <= 3 * std::sqrt(0.25 / draws));

  const auto dist = zipf_popularity(100, 0.8);
  const auto many = draw_demands(dist, draws, 5);
  const double top = static_cast<double>(std::count(many.begin(), many.end(), 1)) / draws;
  CHECK(std::abs(top - dist[1]) <= 3 * std::sqrt(dist[1] * (1 - dist[1]) / draws));
  for (int d : many) CHECK((d >= 1 && d <= 100));
}

TEST_CASE("group partition") {
  const std::vector<int> demand{3, 50, 7};
  const auto split = partition_groups(demand, 10);
  CHECK(split.cached == std::vector<int>{0, 2});
  CHECK(split.uncached == std::vector<int>{1});
  CHECK(partition_groups(demand, 100).uncached.empty());
  CHECK(partition_groups(demand, 1).cached.empty());
}

TEST_CASE("symbol classes partition the coded file") {
  SystemConfig config{6, 20, 4, 3000, 0.8, 10};
  const PlacementParams params{10, 0.6};
  const auto cache = place(config, params, 12);
  const std::vector<int> members{0, 2, 3, 5};
  const auto classes = classify_symbols(cache, 4, members);
  std::vector<int> seen(cache.coded_length(), 0);
  for (std::uint32_t mask = 0; mask < 16; ++mask) {
    for (auto idx : classes.symbols(mask)) {
      ++seen[idx];
      for (std::size_t pos = 0; pos < members.size(); ++pos) {
        const auto set = cache.symbols(members[pos], 4);
        const bool cached = std::find(set.begin(), set.end(), idx) != set.end();
        CHECK(cached == ((mask >> pos) & 1u));
      }
    }
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST_CASE("delivery") {
  SUBCASE("all requests in the uncached group") {
    SystemConfig config{4, 20, 2, 100, 0.8, 10};
    const PlacementParams params{5, 0.5};
    const auto cache = place(config, params, 1);
    const std::vector<int> demand{6, 20, 11, 9};
    const auto out = deliver(cache, demand, config, params);
    CHECK(out.messages.empty());
    CHECK(out.trial.multicast_symbols == 0);
    CHECK(out.trial.unicast_symbols == 4 * 100);
    CHECK(out.trial.patch_symbols == 0);
    CHECK(out.trial.rate_file_units == 4.0);
    CHECK(out.trial.all_decoded());
  }
  SUBCASE("N0 = M, r = 1 decodes from cache") {
    SystemConfig config{4, 20, 5, 100, 0.8, 10};
    const PlacementParams params{5, 1.0};
    const auto cache = place(config, params, 1);
    const std::vector<int> demand{1, 3, 3, 17};
    const auto out = deliver(cache, demand, config, params);
    CHECK(out.trial.multicast_symbols == 0);
    CHECK(out.trial.patch_symbols == 0);
    CHECK(out.trial.unicast_symbols == 100);
    CHECK(out.trial.k1 == 3);
    CHECK(out.trial.all_decoded());
  }
  SUBCASE("conservation and decodability") {
    SystemConfig config{8, 30, 6, 4000, 0.8, 10};
    const auto dist = zipf_popularity(30, 0.8);
    for (auto source : {PieceSource::exact_class, PieceSource::any_decodable}) {
    for (double r : {0.4, 0.7, 1.0}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const PlacementParams params{24, r};
        const auto cache = place(config, params, seed);
        const auto demand = draw_demands(dist, config.K, seed + 100);
        const auto out = deliver(cache, demand, config, params, source);
        std::int64_t payload = 0;
        for (const auto& m : out.messages) {
          CHECK(m.payload_symbols >= 0);
          CHECK(!m.members().empty());
          payload += m.payload_symbols;
        }
        const auto& t = out.trial;
        CHECK(payload == t.multicast_symbols);
        CHECK(t.rate_file_units * config.F_symbols == doctest::Approx(static_cast<double>(t.total_symbols())));
        CHECK(t.rate_file_units >= config.K - t.k1);
        CHECK(t.patch_symbols >= 0);
        CHECK(t.all_decoded());
        for (const auto& m : out.messages)
          for (int fap : m.members()) CHECK(demand[fap] <= params.N0);
      }
    }
    }
  }
  SUBCASE("inconsistent inputs") {
    SystemConfig config{4, 20, 2, 100, 0.8, 10};
    const auto cache = place(config, {5, 0.5}, 1);
    const std::vector<int> demand{1, 2, 3, 4};
    CHECK_THROWS_AS(deliver(cache, demand, config, {6, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(deliver(cache, demand, config, {5, 0.6}), std::invalid_argument);
    const std::vector<int> short_demand{1, 2};
    CHECK_THROWS_AS(deliver(cache, short_demand, config, {5, 0.5}), std::invalid_argument);
    const std::vector<int> bad_file{1, 2, 3, 21};
    CHECK_THROWS_AS(deliver(cache, bad_file, config, {5, 0.5}), std::invalid_argument);
    const std::vector<std::pair<int, int>> pairs{{0, 1}};
    const auto partial = place_pairs(config, {5, 0.5}, 1, pairs);
    CHECK_THROWS_AS(deliver(partial, demand, config, {5, 0.5}), std::invalid_argument);
  }
}

TEST_CASE("monte carlo") {
  SUBCASE("single trial equals its result") {
    SystemConfig config{5, 10, 2, 200, 0.8, 10};
    const auto summary = monte_carlo(config, point_mass(10), {4, 0.5}, 1, 42);
    REQUIRE(summary.results.size() == 1);
    CHECK(summary.mean_rate == summary.results[0].rate_file_units);
    CHECK(summary.std_rate == 0.0);
    CHECK(summary.decode_success == 1);
    CHECK(summary.results[0].demand == std::vector<int>(5, 1));
  }
  SUBCASE("deterministic and independent of thread count") {
    SystemConfig config{6, 20, 4, 2000, 0.8, 10};
    const auto dist = zipf_popularity(20, 0.8);
    const auto a = monte_carlo(config, dist, {15, 0.6}, 30, 9, 1);
    const auto b = monte_carlo(config, dist, {15, 0.6}, 30, 9, 3);
    CHECK(a.mean_rate == b.mean_rate);
    CHECK(a.std_rate == b.std_rate);
    CHECK(a.patch_fraction == b.patch_fraction);
    for (int t = 0; t < 30; ++t) CHECK(a.results[t].total_symbols() == b.results[t].total_symbols());
    const auto c = monte_carlo(config, dist, {15, 0.6}, 30, 10, 1);
    CHECK(c.mean_rate != a.mean_rate);
  }
  SUBCASE("tracks the closed form on a small instance") {
    SystemConfig config{8, 40, 6, 20000, 0.8, 10};
    const auto dist = zipf_popularity(40, 0.8);
    const PlacementParams params{30, 0.7};
    const auto summary = monte_carlo(config, dist, params, 400, 5);
    const double analytic = average_rate(config, dist, params).average;
    CHECK(summary.decode_success == 400);
    // Standard error of the mean is about 0.1 here; allow 5%.
    CHECK(std::abs(summary.mean_rate - analytic) / analytic < 0.05);
  }
  SUBCASE("refusals") {
    SystemConfig config{25, 40, 6, 2000, 0.8, 10};
    CHECK_THROWS_AS(monte_carlo(config, zipf_popularity(40, 0.8), {30, 0.7}, 5, 1), CapacityError);
    SystemConfig ok{5, 40, 6, 2000, 0.8, 10};
    CHECK_THROWS_AS(monte_carlo(ok, zipf_popularity(40, 0.8), {30, 0.7}, 0, 1), std::invalid_argument);
  }
}

TEST_CASE("finite-file overhead shrinks as files grow") {
  SystemConfig config;
  const auto dist = zipf_popularity(config.N, config.alpha);
  const PlacementParams params{100, 0.76};
  const double analytic = average_rate(config, dist, params).average;
  double previous_patch = 1.0, previous_gap = 1e9;
  for (std::int64_t F : {1000, 10000, 100000}) {
    config.F_symbols = F;
    const auto summary = monte_carlo(config, dist, params, 20, 17);
    CHECK(summary.decode_success == 20);
    CHECK(summary.patch_fraction <= previous_patch);
    CHECK(summary.mean_rate - analytic < previous_gap);
    previous_patch = summary.patch_fraction;
    previous_gap = summary.mean_rate - analytic;
  }
  CHECK(previous_patch < 0.02);
}

TEST_CASE("deficit-aware payloads beat exact-class payloads") {
  SystemConfig config;
  config.F_symbols = 20000;
  const auto dist = zipf_popularity(config.N, config.alpha);
  const PlacementParams params{100, 0.76};
  const auto exact = monte_carlo(config, dist, params, 20, 3, 0, PieceSource::exact_class);
  const auto filled = monte_carlo(config, dist, params, 20, 3, 0, PieceSource::any_decodable);
  CHECK(exact.decode_success == 20);
  CHECK(filled.decode_success == 20);
  CHECK(filled.mean_rate < exact.mean_rate);
  CHECK(filled.patch_fraction < exact.patch_fraction);
  // Same seed, same demands.
  for (int t = 0; t < 20; ++t) CHECK(filled.results[t].demand == exact.results[t].demand);
}

TEST_CASE("trial CSV") {
  TrialResult r;
  r.k1 = 2;
  r.multicast_symbols = 10;
  r.unicast_symbols = 100;
  r.patch_symbols = 1;
  r.decode_ok = {true, true, true};
  r.rate_file_units = 1.11;
  std::ostringstream out;
  write_trials_csv(out, std::vector<TrialResult>{r});
  CHECK(out.str() ==
        "trial_id,k1,multicast_symbols,unicast_symbols,patch_symbols,rate_file_units,decode_ok\n"
        "0,2,10,100,1,1.11,1\n");
}
