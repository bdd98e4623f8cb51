#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tasep/harris.hpp"

using namespace tasep;

TEST_CASE("stream derivation is deterministic and lazy") {
  StreamId id{StreamKind::Bulk, 1};
  auto a = derive_stream_rng(42, id);
  auto b = derive_stream_rng(42, id);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

  // distinct ids give distinct sequences
  auto c = derive_stream_rng(42, {StreamKind::Bulk, 1});
  auto d = derive_stream_rng(42, {StreamKind::Bulk, 2});
  int agree = 0;
  for (int i = 0; i < 100; ++i)
    if (c.next() == d.next()) ++agree;
  CHECK(agree == 0);

  // a stream's randomness does not depend on which other streams exist:
  // instantiate in two different orders and compare
  std::vector<std::uint64_t> first, second;
  {
    auto x = derive_stream_rng(7, {StreamKind::Bulk, 3});
    for (int i = 0; i < 50; ++i) first.push_back(x.next());
  }
  {
    auto y = derive_stream_rng(7, {StreamKind::Bulk, 9});
    auto z = derive_stream_rng(7, {StreamKind::ClassEntry, 2});
    (void)y.next();
    (void)z.next();
    auto x = derive_stream_rng(7, {StreamKind::Bulk, 3});
    for (int i = 0; i < 50; ++i) second.push_back(x.next());
  }
  CHECK(first == second);
}

TEST_CASE("exponential sampling inverts the uniform") {
  CHECK(exponential_from_uniform(std::exp(-1.0), 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(exponential_from_uniform(std::exp(-3.0), 2.0) == doctest::Approx(1.5).epsilon(1e-14));

  Xoshiro256pp rng(5);
  CHECK_THROWS_AS(sample_exponential(rng, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_exponential(rng, -2.0), std::invalid_argument);

  // law of large numbers at rate 2
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_exponential(rng, 2.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("clock merge delivers the minimum and keeps per-stream times increasing") {
  ClockSet cs(99);
  int a = cs.add_stream({StreamKind::Bulk, 1}, 1.0);
  cs.activate(a, 0.0);
  auto ev = cs.next(1e18);
  REQUIRE(ev.has_value());
  CHECK(ev->id.index == 1);

  ClockSet cs2(99);
  int s1 = cs2.add_stream({StreamKind::Bulk, 1}, 1.0);
  int s2 = cs2.add_stream({StreamKind::Bulk, 2}, 1.0);
  cs2.activate(s1, 0.0);
  cs2.activate(s2, 0.0);
  double last = 0.0;
  double last_per[3] = {0.0, 0.0, 0.0};
  for (int i = 0; i < 5000; ++i) {
    auto e = cs2.next(1e18);
    REQUIRE(e.has_value());
    CHECK(e->time >= last);
    CHECK(e->time > last_per[e->id.index]);
    last = e->time;
    last_per[e->id.index] = e->time;
  }
}

TEST_CASE("rate-0 streams are rejected; empty merge signals no event") {
  ClockSet cs(1);
  CHECK_THROWS_AS(cs.add_stream({StreamKind::Bulk, 1}, 0.0), std::invalid_argument);
  CHECK_FALSE(cs.next(100.0).has_value());
}

TEST_CASE("Poisson count statistics at desk scale") {
  // mean count of a rate-1 stream over [0,10], 10^4 replicas
  const int reps = 10000;
  const double T = 10.0;
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    ClockSet cs(static_cast<std::uint64_t>(r) * 7919 + 13);
    int s = cs.add_stream({StreamKind::Bulk, 4}, 1.0);
    cs.activate(s, 0.0);
    int count = 0;
    while (cs.next(T)) ++count;
    total += count;
  }
  double mean = total / reps;
  // 3 standard errors of the mean: 3 * sqrt(10 / 10^4)
  CHECK(std::abs(mean - T) <= 3.0 * std::sqrt(T / reps));
}

TEST_CASE("superposition of independent streams is Poisson with summed rate") {
  // chi-square on exponential inter-arrival quantile bins at rate a+b
  const double a = 0.7, b = 1.3;
  ClockSet cs(2024);
  int s1 = cs.add_stream({StreamKind::Bulk, 1}, a);
  int s2 = cs.add_stream({StreamKind::Bulk, 2}, b);
  cs.activate(s1, 0.0);
  cs.activate(s2, 0.0);
  const int n = 20000;
  const int bins = 10;
  std::vector<int> counts(bins, 0);
  double prev = 0.0;
  for (int i = 0; i < n; ++i) {
    auto e = cs.next(1e18);
    REQUIRE(e.has_value());
    double gap = e->time - prev;
    prev = e->time;
    double u = 1.0 - std::exp(-(a + b) * gap);  // uniform under H0
    int bin = std::min(bins - 1, static_cast<int>(u * bins));
    counts[bin]++;
  }
  double expect = static_cast<double>(n) / bins;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 27.88);  // chi2_{9} critical value at p = 0.001
}

TEST_CASE("event sequence of fixed streams is invariant under adding streams") {
  auto collect = [](bool extra) {
    ClockSet cs(31415);
    std::vector<int> keep;
    for (std::uint64_t x = 1; x <= 5; ++x) {
      int s = cs.add_stream({StreamKind::Bulk, x}, 1.0);
      cs.activate(s, 0.0);
      keep.push_back(s);
    }
    if (extra) {
      for (std::uint64_t x = 6; x <= 12; ++x) {
        int s = cs.add_stream({StreamKind::Bulk, x}, 1.0);
        cs.activate(s, 0.0);
      }
    }
    std::vector<std::pair<double, std::uint64_t>> events;
    while (events.size() < 300) {
      auto e = cs.next(1e18);
      REQUIRE(e.has_value());
      if (e->id.index <= 5) events.push_back({e->time, e->id.index});
    }
    return events;
  };
  CHECK(collect(false) == collect(true));
}

TEST_CASE("deactivation freezes a stream; reactivation draws fresh") {
  ClockSet cs(8);
  int s1 = cs.add_stream({StreamKind::Bulk, 1}, 1.0);
  int s2 = cs.add_stream({StreamKind::Bulk, 2}, 1.0);
  cs.activate(s1, 0.0);
  cs.activate(s2, 0.0);
  cs.deactivate(s1);
  for (int i = 0; i < 200; ++i) {
    auto e = cs.next(1e18);
    REQUIRE(e.has_value());
    CHECK(e->id.index == 2);
  }
  cs.activate(s1, 50.0);
  bool seen1 = false;
  for (int i = 0; i < 200 && !seen1; ++i) {
    auto e = cs.next(1e18);
    REQUIRE(e.has_value());
    if (e->id.index == 1) {
      seen1 = true;
      CHECK(e->time > 50.0);
    }
  }
  CHECK(seen1);
}
