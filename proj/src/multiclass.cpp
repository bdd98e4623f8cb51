#include "tasep/multiclass.hpp"

#include <stdexcept>
#include <vector>

#include "tasep/harris.hpp"

namespace tasep {

bool class_entry_allowed(const Configuration& config, int j, int num_classes) {
  if (num_classes < 2) throw std::invalid_argument("class entries need num_classes >= 2");
  if (j < 1 || j > num_classes) throw std::invalid_argument("class index outside 1..K");
  Label at1 = config.label_or_hole(1);
  Label at2 = config.label_or_hole(2);
  if (j == 1) return at1 >= 2;  // holes compare above every class
  if (j < num_classes) return at1 >= j + 1 && at2 == j - 1;
  return at1 == kHole && (at2 == num_classes - 1 || at2 == num_classes);
}

ClassEntryResult apply_class_entry(Configuration& config, int j, int num_classes) {
  ClassEntryResult r;
  if (!class_entry_allowed(config, j, num_classes)) return r;
  r.applied = true;
  r.replaced = config.label_or_hole(1);
  config.set_label(1, static_cast<Label>(j));
  return r;
}

Configuration project(const Configuration& config, int j) {
  if (j < 1) throw std::invalid_argument("projection class cutoff must be >= 1");
  Configuration out(config.window_len());
  for (std::size_t x = 1; x <= config.window_len(); ++x) {
    Label v = config.label_or_hole(x);
    if (is_particle(v) && v <= j) out.set_label(x, Label{1});
  }
  return out;
}

namespace {

// Shared lazy bulk-clock bank: clocks exist while their site is occupied in
// the reference configuration.
struct BulkBank {
  ClockSet& clocks;
  std::vector<int> slots;

  explicit BulkBank(ClockSet& cs) : clocks(cs) {}
  void occupy(std::size_t x, double now) {
    if (x > slots.size()) slots.resize(x + 256, -1);
    int& slot = slots[x - 1];
    if (slot < 0) slot = clocks.add_stream({StreamKind::Bulk, x}, 1.0);
    clocks.activate(slot, now);
  }
  void vacate(std::size_t x) {
    if (x <= slots.size() && slots[x - 1] >= 0) clocks.deactivate(slots[x - 1]);
  }
};

bool occupancy_matches(const Configuration& mc, const Configuration& occ, int num_classes,
                       std::size_t site) {
  Label v = mc.label_or_hole(site);
  bool mc_occ = is_particle(v) && v <= num_classes;
  return mc_occ == occ.occupied(site);
}

bool full_match(const Configuration& mc, const Configuration& occ, int num_classes) {
  std::size_t n = std::max(mc.window_len(), occ.window_len());
  for (std::size_t x = 1; x <= n; ++x) {
    if (!occupancy_matches(mc, occ, num_classes, x)) return false;
  }
  return true;
}

}  // namespace

bool check_projection_identity(double lambda, double epsilon, int num_classes,
                               double horizon, std::uint64_t seed) {
  if (!(lambda >= 0.0) || !(epsilon >= 0.0) || !(lambda + epsilon < 0.5))
    throw std::invalid_argument("need lambda,epsilon >= 0 and lambda+epsilon < 1/2");
  if (num_classes < 2) throw std::invalid_argument("need num_classes >= 2");

  ClockSet clocks(seed);
  BulkBank bulk(clocks);
  std::vector<int> class_slot(static_cast<std::size_t>(num_classes) + 1, -1);
  for (int j = 1; j <= num_classes; ++j) {
    double rate = (j == 1) ? lambda : epsilon;
    if (rate > 0.0) {
      class_slot[static_cast<std::size_t>(j)] =
          clocks.add_stream({StreamKind::ClassEntry, static_cast<std::uint64_t>(j)}, rate);
      clocks.activate(class_slot[static_cast<std::size_t>(j)], 0.0);
    }
  }

  Configuration mc(64);
  Configuration occ(64);
  std::uint64_t steps = 0;
  while (auto ev = clocks.next(horizon)) {
    double t = ev->time;
    if (ev->id.kind == StreamKind::ClassEntry) {
      int j = static_cast<int>(ev->id.index);
      auto res = apply_class_entry(mc, j, num_classes);
      if (res.applied) {
        if (!occ.occupied(1)) occ.set_label(1, Label{1});
        if (res.replaced == kHole) bulk.occupy(1, t);
        if (!occupancy_matches(mc, occ, num_classes, 1)) return false;
      }
    } else if (ev->id.kind == StreamKind::Bulk) {
      std::size_t x = ev->id.index;
      if (x + 1 >= mc.window_len()) {
        mc.grow(x + 256);
        occ.grow(x + 256);
      }
      Label pre_b = mc.label_or_hole(x + 1);
      bool moved_mc = apply_bulk_jump(mc, x);
      apply_bulk_jump(occ, x);
      if (moved_mc && !is_particle(pre_b)) {
        bulk.vacate(x);
        bulk.occupy(x + 1, t);
      }
      if (!occupancy_matches(mc, occ, num_classes, x) ||
          !occupancy_matches(mc, occ, num_classes, x + 1))
        return false;
    }
    if ((++steps & 0xFFFu) == 0 && !full_match(mc, occ, num_classes)) return false;
  }
  return full_match(mc, occ, num_classes);
}

bool projection_identity_decoupled(double lambda, double epsilon, int num_classes,
                                   double horizon, std::uint64_t seed) {
  // Multiclass side.
  ClockSet clocks(seed);
  BulkBank bulk(clocks);
  for (int j = 1; j <= num_classes; ++j) {
    double rate = (j == 1) ? lambda : epsilon;
    if (rate > 0.0) {
      int slot = clocks.add_stream({StreamKind::ClassEntry, static_cast<std::uint64_t>(j)}, rate);
      clocks.activate(slot, 0.0);
    }
  }
  Configuration mc(64);
  while (auto ev = clocks.next(horizon)) {
    if (ev->id.kind == StreamKind::ClassEntry) {
      auto res = apply_class_entry(mc, static_cast<int>(ev->id.index), num_classes);
      if (res.applied && res.replaced == kHole) bulk.occupy(1, ev->time);
    } else if (ev->id.kind == StreamKind::Bulk) {
      std::size_t x = ev->id.index;
      if (x + 1 >= mc.window_len()) mc.grow(x + 256);
      Label pre_b = mc.label_or_hole(x + 1);
      if (apply_bulk_jump(mc, x) && !is_particle(pre_b)) {
        bulk.vacate(x);
        bulk.occupy(x + 1, ev->time);
      }
    }
  }

  // Occupancy side on independent clocks.
  ClockSet clocks2(seed ^ 0x5DEECE66DULL);
  BulkBank bulk2(clocks2);
  std::vector<int> tslot;
  BoundaryMechanism mech = concrete_mechanism(lambda, epsilon);
  for (std::size_t i = 0; i < mech.transitions.size(); ++i) {
    if (mech.transitions[i].rate > 0.0) {
      int slot = clocks2.add_stream({StreamKind::BoundaryTransition, i}, mech.transitions[i].rate);
      clocks2.activate(slot, 0.0);
    }
  }
  Configuration occ(64);
  while (auto ev = clocks2.next(horizon)) {
    if (ev->id.kind == StreamKind::BoundaryTransition) {
      if (apply_boundary_transition(occ, mech, ev->id.index)) bulk2.occupy(1, ev->time);
    } else if (ev->id.kind == StreamKind::Bulk) {
      std::size_t x = ev->id.index;
      if (x + 1 >= occ.window_len()) occ.grow(x + 256);
      Label pre_b = occ.label_or_hole(x + 1);
      if (apply_bulk_jump(occ, x) && !is_particle(pre_b)) {
        bulk2.vacate(x);
        bulk2.occupy(x + 1, ev->time);
      }
    }
  }
  return full_match(mc, occ, num_classes);
}

}  // namespace tasep
