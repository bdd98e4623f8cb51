#include <doctest.h>

#include <stdexcept>

#include "tasep/core.hpp"
#include "tasep/harris.hpp"

using namespace tasep;

namespace {

Configuration config_from(std::initializer_list<int> labels) {
  std::vector<Label> v;
  for (int x : labels) v.push_back(x < 0 ? kHole : static_cast<Label>(x));
  return Configuration::from_labels(v);
}

Configuration occ_from(std::string_view bits) {
  std::vector<Label> v;
  for (char c : bits) v.push_back(c == '1' ? Label{1} : kHole);
  return Configuration::from_labels(v);
}

}  // namespace

TEST_CASE("concrete mechanism encodes the two boundary transitions") {
  auto m = concrete_mechanism(0.3, 0.0);
  REQUIRE(m.range == 2);
  REQUIRE(m.transitions.size() == 2);
  CHECK(m.transitions[0].from == parse_pattern("00"));
  CHECK(m.transitions[0].to == parse_pattern("10"));
  CHECK(m.transitions[0].rate == doctest::Approx(0.3));
  CHECK(m.transitions[1].from == parse_pattern("01"));
  CHECK(m.transitions[1].to == parse_pattern("11"));
  CHECK(m.transitions[1].rate == doctest::Approx(0.3));

  auto m2 = concrete_mechanism(0.25, 0.05);
  CHECK(m2.transitions[0].rate == doctest::Approx(0.25));
  CHECK(m2.transitions[1].rate == doctest::Approx(0.30));

  auto m0 = concrete_mechanism(0.0, 0.0);
  CHECK(m0.transitions[0].rate == 0.0);
  CHECK(m0.transitions[1].rate == 0.0);

  CHECK_THROWS_AS(concrete_mechanism(0.3, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(concrete_mechanism(-0.1, 0.0), std::invalid_argument);
}

TEST_CASE("pattern helpers read site 1 first") {
  CHECK(parse_pattern("01") == 2u);
  CHECK(parse_pattern("10") == 1u);
  CHECK(format_pattern(2u, 2) == "01");
  Configuration c = config_from({-1, 1, 1});
  CHECK(pattern_of(c, 2) == parse_pattern("01"));
}

TEST_CASE("bulk jump moves, swaps by priority, blocks otherwise") {
  Configuration c1 = config_from({1, -1, -1});
  CHECK(apply_bulk_jump(c1, 1));
  CHECK(c1.label(1) == kHole);
  CHECK(c1.label(2) == 1);
  CHECK(c1.rightmost_occupied() == 2);

  Configuration c2 = config_from({2, 1, -1});
  CHECK_FALSE(apply_bulk_jump(c2, 1));
  CHECK(c2.label(1) == 2);
  CHECK(c2.label(2) == 1);

  Configuration c3 = config_from({1, 2, -1});
  CHECK(apply_bulk_jump(c3, 1));
  CHECK(c3.label(1) == 2);
  CHECK(c3.label(2) == 1);

  CHECK_THROWS_AS(apply_bulk_jump(c3, 3), std::out_of_range);
  CHECK_THROWS_AS(apply_bulk_jump(c3, 0), std::out_of_range);
}

TEST_CASE("bulk jump is idempotent on blocked pairs and conserves labels") {
  Xoshiro256pp rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Label> v(8, kHole);
    int counts[4] = {0, 0, 0, 0};
    for (auto& x : v) {
      std::uint64_t r = rng.next() % 5;
      if (r < 3) {
        x = static_cast<Label>(r + 1);
        counts[r + 1]++;
      }
    }
    Configuration c = Configuration::from_labels(v);
    std::size_t x = 1 + rng.next() % 7;
    bool first = apply_bulk_jump(c, x);
    Configuration after_first = c;
    bool second = apply_bulk_jump(c, x);
    if (!second) CHECK(c == after_first);  // second application's guard failed
    (void)first;
    int counts_after[4] = {0, 0, 0, 0};
    for (std::size_t s = 1; s <= 8; ++s) {
      Label l = c.label(s);
      if (is_particle(l)) counts_after[l]++;
    }
    for (int k = 1; k <= 3; ++k) CHECK(counts[k] == counts_after[k]);
  }
}

TEST_CASE("boundary transitions need an exact pattern match") {
  auto mech = concrete_mechanism(0.3, 0.05);

  Configuration a = occ_from("010");
  CHECK(apply_boundary_transition(a, mech, 1));  // 01 -> 11
  CHECK(a.occupied(1));
  CHECK(a.occupied(2));

  Configuration b = occ_from("110");
  CHECK_FALSE(apply_boundary_transition(b, mech, 1));  // near miss: no-op
  CHECK(b.occupied(1));

  Configuration c = occ_from("000");
  CHECK(apply_boundary_transition(c, mech, 0));  // 00 -> 10
  CHECK(c.occupied(1));
  CHECK_FALSE(c.occupied(2));

  CHECK_THROWS_AS(apply_boundary_transition(c, mech, 5), std::out_of_range);
}

TEST_CASE("mechanism validation rejects malformed tables") {
  BoundaryMechanism m;
  m.range = 2;
  m.transitions = {{0u, 0u, 0.1}};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);  // from == to
  m.transitions = {{0u, 1u, -0.5}};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);  // negative rate
  m.transitions = {{0u, 1u, 0.1}, {0u, 1u, 0.2}};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);  // duplicate pair
  m.transitions = {{4u, 1u, 0.1}};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);  // pattern wider than range
  m.transitions = {{0u, 1u, 0.1}, {1u, 0u, 0.2}};
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("model params enforce the standing hypothesis") {
  ModelParams p;
  p.lambda = 0.25;
  p.epsilon = 0.05;
  CHECK_NOTHROW(p.validate());
  p.epsilon = 0.25;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.epsilon = 0.0;
  p.lambda = 0.5;  // pure TASEP boundary point is allowed
  CHECK_NOTHROW(p.validate());
  p.lambda = 0.6;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.lambda = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("leq compares occupancies sitewise") {
  CHECK(leq(occ_from(""), occ_from("1011")));
  CHECK(leq(occ_from("1010"), occ_from("1110")));
  CHECK_FALSE(leq(occ_from("0100"), occ_from("1010")));
  // window lengths may differ; absent sites read empty
  CHECK(leq(occ_from("10"), occ_from("1010")));
  CHECK_FALSE(leq(occ_from("1010"), occ_from("10")));
}

TEST_CASE("leq is a partial order on random triples") {
  Xoshiro256pp rng(123);
  auto random_occ = [&]() {
    std::vector<Label> v(10, kHole);
    for (auto& x : v)
      if (rng.next() & 1) x = 1;
    return Configuration::from_labels(v);
  };
  for (int trial = 0; trial < 300; ++trial) {
    Configuration a = random_occ(), b = random_occ(), c = random_occ();
    CHECK(leq(a, a));
    if (leq(a, b) && leq(b, a)) {
      for (std::size_t s = 1; s <= 10; ++s) CHECK(a.occupied(s) == b.occupied(s));
    }
    if (leq(a, b) && leq(b, c)) CHECK(leq(a, c));
  }
}

TEST_CASE("configuration tracks rightmost occupied site") {
  Configuration c(6);
  CHECK(c.rightmost_occupied() == 0);
  c.set_label(3, 1);
  c.set_label(5, 2);
  CHECK(c.rightmost_occupied() == 5);
  c.set_label(5, kHole);
  CHECK(c.rightmost_occupied() == 3);
  c.set_label(3, kHole);
  CHECK(c.rightmost_occupied() == 0);
  CHECK(c.particle_count() == 0);
}
