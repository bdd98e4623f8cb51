#include "tasep/coupling.hpp"

#include <algorithm>
#include <stdexcept>

#include "tasep/estimators.hpp"

namespace tasep {

namespace {
// Entry sources share the ClassEntry ids of the multi-species layout:
// class 1 = base (rate lambda-like), class 2 = bonus (rate epsilon-like).
constexpr std::uint64_t kBaseStream = 1;
constexpr std::uint64_t kBonusStream = 2;
}  // namespace

CoupledEngine::CoupledEngine(std::vector<CoupledMemberSpec> members, std::uint64_t seed,
                             bool check_order)
    : clocks_(seed), check_order_(check_order) {
  if (members.empty()) throw std::invalid_argument("ensemble needs at least one member");
  for (auto& m : members) {
    if (!(m.base_rate >= 0.0) || !(m.bonus_rate >= 0.0))
      throw std::invalid_argument("member rates must be >= 0");
    base_max_ = std::max(base_max_, m.base_rate);
    bonus_max_ = std::max(bonus_max_, m.bonus_rate);
    CoupledMemberState st;
    st.spec = m;
    st.config = m.initial.window_len() > 0 ? m.initial : Configuration(64);
    members_.push_back(std::move(st));
  }
  std::size_t max_win = 0;
  for (const auto& m : members_) max_win = std::max(max_win, m.config.window_len());
  for (auto& m : members_) m.config.grow(max_win);
  occ_count_.assign(max_win, 0);
  bulk_slot_.assign(max_win, -1);

  if (base_max_ > 0.0) {
    int slot = clocks_.add_stream({StreamKind::ClassEntry, kBaseStream}, base_max_, true);
    clocks_.activate(slot, 0.0);
  }
  if (bonus_max_ > 0.0) {
    int slot = clocks_.add_stream({StreamKind::ClassEntry, kBonusStream}, bonus_max_, true);
    clocks_.activate(slot, 0.0);
  }
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const auto& cfg = members_[i].config;
    for (std::size_t x = 1; x <= cfg.rightmost_occupied(); ++x) {
      if (cfg.occupied(x)) occupy_site(i, x, 0.0);
    }
  }
}

void CoupledEngine::occupy_site(std::size_t /*member*/, std::size_t x, double t) {
  // keep one site of headroom so jump targets are always inside the window
  if (x + 1 > occ_count_.size()) {
    std::size_t new_len = x + 1024;
    occ_count_.resize(new_len, 0);
    bulk_slot_.resize(new_len, -1);
    for (auto& m : members_) m.config.grow(new_len);
  }
  if (occ_count_[x - 1]++ == 0) {
    int& slot = bulk_slot_[x - 1];
    if (slot < 0) slot = clocks_.add_stream({StreamKind::Bulk, x}, 1.0);
    clocks_.activate(slot, t);
  }
}

void CoupledEngine::vacate_site(std::size_t /*member*/, std::size_t x) {
  if (--occ_count_[x - 1] == 0) {
    int slot = bulk_slot_[x - 1];
    if (slot >= 0) clocks_.deactivate(slot);
  }
}

void CoupledEngine::check_order_at(std::size_t site, double t) {
  for (std::size_t i = 0; i + 1 < members_.size(); ++i) {
    if (members_[i].config.occupied(site) && !members_[i + 1].config.occupied(site)) {
      ++violations_;
      if (!first_violation_) first_violation_ = OrderViolation{t, site, i};
    }
  }
}

void CoupledEngine::run_until(double t) {
  while (auto ev = clocks_.next(t)) {
    const double now = ev->time;
    now_ = now;
    if (ev->id.kind == StreamKind::Bulk) {
      std::size_t x = ev->id.index;
      for (std::size_t i = 0; i < members_.size(); ++i) {
        auto& cfg = members_[i].config;
        if (x + 1 > cfg.window_len()) cfg.grow(x + 1024);
        Label pre_b = cfg.label_or_hole(x + 1);
        if (apply_bulk_jump(cfg, x) && !is_particle(pre_b)) {
          vacate_site(i, x);
          occupy_site(i, x + 1, now);
        }
      }
      if (check_order_) {
        check_order_at(x, now);
        check_order_at(x + 1, now);
      }
    } else if (ev->id.kind == StreamKind::ClassEntry) {
      bool is_base = ev->id.index == kBaseStream;
      double max_rate = is_base ? base_max_ : bonus_max_;
      for (std::size_t i = 0; i < members_.size(); ++i) {
        auto& m = members_[i];
        double rate = is_base ? m.spec.base_rate : m.spec.bonus_rate;
        if (!(ev->mark * max_rate < rate)) continue;  // thinning mark rejected
        if (!is_base && m.spec.bonus_guard == CoupledMemberSpec::BonusGuard::Site2Occupied &&
            !m.config.occupied(2))
          continue;
        if (m.config.occupied(1)) continue;  // exclusion at the entry site
        m.config.set_label(1, Label{1});
        ++m.entries;
        occupy_site(i, 1, now);
      }
      if (check_order_) check_order_at(1, now);
    }
  }
  now_ = t;
}

std::vector<CoupledMemberState> coupled_evolve(std::vector<CoupledMemberSpec> members,
                                               double horizon, std::uint64_t seed) {
  CoupledEngine eng(std::move(members), seed);
  eng.run_until(horizon);
  return eng.members();
}

AttractivityReport check_attractivity(const std::vector<CoupledMemberSpec>& members,
                                      double horizon, int seeds, std::uint64_t base_seed) {
  AttractivityReport rep;
  rep.seeds = seeds;
  for (int s = 0; s < seeds; ++s) {
    std::uint64_t seed = replica_seed(base_seed, static_cast<std::uint64_t>(s));
    CoupledEngine eng(members, seed, /*check_order=*/true);
    eng.run_until(horizon);
    rep.violations += eng.order_violations();
    if (!rep.first && eng.first_violation()) {
      rep.first = eng.first_violation();
      rep.first_seed = seed;
    }
  }
  return rep;
}

}  // namespace tasep
