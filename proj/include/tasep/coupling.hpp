#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tasep/core.hpp"
#include "tasep/engine.hpp"
#include "tasep/harris.hpp"

namespace tasep {

// One member of a basic-coupling ensemble, occupancy level. Entry happens at
// site 1 from two shared Poisson sources carrying uniform marks:
//   base  (rate = max base_rate over members): accepted iff mark < base_rate / max
//   bonus (rate = max bonus_rate over members): accepted iff mark < bonus_rate / max
//     and the bonus guard passes.
// Nested acceptance makes the lower-rate entry stream a measurable thinning
// of the higher-rate one, so sitewise ordering is preserved pathwise.
//
// The concrete model is (base = lambda, bonus = epsilon, guard Site2Occupied);
// a plain TASEP(lambda) is (base = lambda, bonus = 0); the dominating
// TASEP(lambda + epsilon) of the sandwich is (base = lambda, bonus = epsilon,
// guard Always).
struct CoupledMemberSpec {
  std::string label;
  double base_rate = 0.0;
  double bonus_rate = 0.0;
  enum class BonusGuard { Site2Occupied, Always } bonus_guard = BonusGuard::Site2Occupied;
  Configuration initial;
};

struct CoupledMemberState {
  CoupledMemberSpec spec;
  Configuration config;
  std::uint64_t entries = 0;
};

struct OrderViolation {
  double time = 0.0;
  std::size_t site = 0;
  std::size_t lower_member = 0;  // members[lower] > members[lower+1] at site
};

// Evolves all members under one shared Harris system (bulk clocks plus the
// marked entry sources above).
class CoupledEngine {
 public:
  CoupledEngine(std::vector<CoupledMemberSpec> members, std::uint64_t seed,
                bool check_order = false);

  void run_until(double t);
  double now() const { return now_; }
  const std::vector<CoupledMemberState>& members() const { return members_; }
  std::uint64_t order_violations() const { return violations_; }
  const std::optional<OrderViolation>& first_violation() const { return first_violation_; }

 private:
  void occupy_site(std::size_t member, std::size_t x, double t);
  void vacate_site(std::size_t member, std::size_t x);
  void check_order_at(std::size_t site, double t);

  std::vector<CoupledMemberState> members_;
  ClockSet clocks_;
  double now_ = 0.0;
  double base_max_ = 0.0, bonus_max_ = 0.0;
  bool check_order_ = false;
  std::uint64_t violations_ = 0;
  std::optional<OrderViolation> first_violation_;

  std::vector<int> bulk_slot_;
  std::vector<std::uint16_t> occ_count_;  // members occupying each site
};

std::vector<CoupledMemberState> coupled_evolve(std::vector<CoupledMemberSpec> members,
                                               double horizon, std::uint64_t seed);

struct AttractivityReport {
  int seeds = 0;
  std::uint64_t violations = 0;
  std::optional<OrderViolation> first;
  std::uint64_t first_seed = 0;
};

// Runs the ensemble over `seeds` independent replicas and counts sitewise
// ordering violations between consecutive members (expected zero whenever the
// members are ordered at time 0 and their entry mechanisms are nested).
AttractivityReport check_attractivity(const std::vector<CoupledMemberSpec>& members,
                                      double horizon, int seeds, std::uint64_t base_seed);

}  // namespace tasep
