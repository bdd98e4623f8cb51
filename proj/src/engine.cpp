#include "tasep/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace tasep {

void RunSpec::validate() const {
  params.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  bool multiclass = params.num_classes >= 2;
  if (!multiclass) mechanism.validate();
  int range = multiclass ? 2 : mechanism.range;

  if (window.kind == WindowPolicy::Kind::Fixed) {
    if (window.fixed_len < static_cast<std::size_t>(std::max(range, 2)))
      throw std::invalid_argument("fixed window shorter than the boundary range");
    if (initial.prefix.size() > window.fixed_len)
      throw std::invalid_argument("initial prefix longer than the window");
    if (window.cone) {
      if (window.cone->anchor_site < 1 || !(window.cone->speed > 0.0))
        throw std::invalid_argument("cone needs anchor >= 1 and speed > 0");
      if (window.cone->anchor_site + window.cone->margin > window.fixed_len)
        throw std::invalid_argument("cone anchor+margin beyond the window");
      if (params.right_boundary.kind == RightBoundary::Kind::OpenExit)
        throw std::invalid_argument("cone applies to half-line truncations only");
    }
  } else {
    if (initial.density != 0.0)
      throw std::invalid_argument("Bernoulli initial conditions force fixed-L mode");
    if (params.right_boundary.kind == RightBoundary::Kind::OpenExit)
      throw std::invalid_argument("open exit requires a fixed window");
    if (window.cone) throw std::invalid_argument("cone requires a fixed window");
  }
  if (!(initial.density >= 0.0 && initial.density <= 1.0))
    throw std::invalid_argument("initial density must be in [0,1]");
  for (Label v : initial.prefix) {
    if (v != kHole && (v < 1 || v > params.num_classes))
      throw std::invalid_argument("initial prefix label outside 1..K");
  }
  if (track_site_lo > track_site_hi)
    throw std::invalid_argument("tracked site range inverted");
}

Engine::Engine(RunSpec spec) : spec_(std::move(spec)), clocks_(spec_.seed) {
  spec_.validate();
  num_classes_ = spec_.params.num_classes;
  multiclass_ = num_classes_ >= 2;
  pattern_range_ = multiclass_ ? 2 : spec_.mechanism.range;
  open_exit_ = spec_.params.right_boundary.kind == RightBoundary::Kind::OpenExit;
  fixed_len_ = spec_.window.kind == WindowPolicy::Kind::Fixed ? spec_.window.fixed_len : 0;

  std::size_t start_len;
  if (fixed_len_ > 0) {
    start_len = fixed_len_;
  } else {
    start_len = std::max<std::size_t>(
        {spec_.initial.prefix.size() + 1, static_cast<std::size_t>(pattern_range_), 2});
  }
  config_ = Configuration(start_len);
  bulk_slot_.assign(config_.window_len(), -1);

  st_.entries_by_class.assign(static_cast<std::size_t>(num_classes_) + 1, 0);
  std::size_t npat = std::size_t{1} << pattern_range_;
  pattern_time_.assign(npat, {});
  site2_class_time_.assign(static_cast<std::size_t>(num_classes_) + 1, {});
  if (spec_.track_site_lo > 0) {
    std::size_t n = spec_.track_site_hi - spec_.track_site_lo + 1;
    site_time_.assign(n, {});
    site_occupied_since_.assign(n, -1.0);
  }

  // Entry streams.
  if (multiclass_) {
    class_slot_.assign(static_cast<std::size_t>(num_classes_) + 1, -1);
    for (int j = 1; j <= num_classes_; ++j) {
      double rate = (j == 1) ? spec_.params.lambda : spec_.params.epsilon;
      if (rate > 0.0) {
        class_slot_[static_cast<std::size_t>(j)] =
            clocks_.add_stream({StreamKind::ClassEntry, static_cast<std::uint64_t>(j)}, rate);
        clocks_.activate(class_slot_[static_cast<std::size_t>(j)], 0.0);
      }
    }
  } else {
    boundary_slot_.assign(spec_.mechanism.transitions.size(), -1);
    st_.boundary_rings_by_pattern.assign(spec_.mechanism.transitions.size(),
                                         std::vector<std::uint64_t>(npat, 0));
    for (std::size_t i = 0; i < spec_.mechanism.transitions.size(); ++i) {
      double rate = spec_.mechanism.transitions[i].rate;
      if (rate > 0.0) {
        boundary_slot_[i] = clocks_.add_stream(
            {StreamKind::BoundaryTransition, static_cast<std::uint64_t>(i)}, rate);
        clocks_.activate(boundary_slot_[i], 0.0);
      }
    }
  }
  if (open_exit_) {
    double rate = 1.0 - spec_.params.right_boundary.reservoir_density;
    if (rate > 0.0) exit_slot_ = clocks_.add_stream({StreamKind::ReservoirExit, 0}, rate);
  }

  // Initial condition: explicit prefix, then Bernoulli sites drawn from
  // per-site init streams (independent of every clock stream and of the
  // window length, so truncation comparisons share initial data).
  for (std::size_t i = 0; i < spec_.initial.prefix.size(); ++i) {
    Label v = spec_.initial.prefix[i];
    if (is_particle(v)) {
      config_.set_label(i + 1, v);
      if (v >= 2) tagged_.push_back({i + 1, v, 0.0});
    }
  }
  if (spec_.initial.density > 0.0) {
    for (std::size_t s = spec_.initial.prefix.size() + 1; s <= fixed_len_; ++s) {
      Xoshiro256pp rng = derive_stream_rng(spec_.seed, {StreamKind::InitialDraw, s});
      if (rng.uniform01() < spec_.initial.density) config_.set_label(s, Label{1});
    }
  }
  st_.initial_particles = config_.particle_count();

  for (std::size_t x = 1; x <= config_.rightmost_occupied(); ++x) {
    if (config_.occupied(x)) on_occupy(x, 0.0);
  }
  if (spec_.track_site_lo > 0) {
    for (std::size_t s = spec_.track_site_lo; s <= spec_.track_site_hi; ++s) {
      if (config_.occupied(s)) site_occupied_since_[s - spec_.track_site_lo] = 0.0;
    }
  }
}

double Engine::cone_edge(double t) const {
  const Cone& c = *spec_.window.cone;
  return static_cast<double>(c.anchor_site + c.margin) + c.speed * (spec_.horizon - t);
}

bool Engine::bulk_allowed_site(std::size_t x) const {
  if (fixed_len_ == 0) return true;
  return x + 1 <= fixed_len_;  // site L has no right neighbour inside the window
}

void Engine::ensure_window(std::size_t site) {
  if (site <= config_.window_len()) return;
  if (fixed_len_ > 0) return;
  std::size_t new_len = site + std::max<std::size_t>(spec_.window.lazy_slack, 1);
  config_.grow(new_len);
  bulk_slot_.resize(new_len, -1);
}

void Engine::ensure_bulk_stream(std::size_t x, double now) {
  int& slot = bulk_slot_[x - 1];
  if (slot < 0) slot = clocks_.add_stream({StreamKind::Bulk, x}, 1.0);
  clocks_.activate(slot, now);
}

void Engine::on_occupy(std::size_t x, double now) {
  ensure_window(x + 1);
  if (bulk_allowed_site(x)) {
    if (spec_.window.cone && static_cast<double>(x) > cone_edge(now)) {
      // outside the shrinking front: frozen
    } else {
      ensure_bulk_stream(x, now);
    }
  } else if (fixed_len_ > 0 && x == fixed_len_) {
    if (exit_slot_ >= 0) clocks_.activate(exit_slot_, now);
    if (!open_exit_ && spec_.window.error_on_wall_contact)
      throw std::runtime_error("window overflow: particle reached the fixed right edge");
  }
}

void Engine::on_vacate(std::size_t x) {
  if (x <= bulk_slot_.size()) {
    int slot = bulk_slot_[x - 1];
    if (slot >= 0) clocks_.deactivate(slot);
  }
  if (fixed_len_ > 0 && x == fixed_len_ && exit_slot_ >= 0) clocks_.deactivate(exit_slot_);
}

void Engine::flush_tracked_site(std::size_t x, double t) {
  std::size_t i = x - spec_.track_site_lo;
  double& since = site_occupied_since_[i];
  if (config_.occupied(x)) {
    site_time_[i].add(t - since);
    since = -1.0;
  } else {
    since = t;
  }
}

void Engine::set_site(std::size_t site, Label v, double now) {
  Label old = config_.label_or_hole(site);
  if (old == v) return;
  bool was = is_particle(old);
  bool is = is_particle(v);
  if (was != is && spec_.track_site_lo > 0 && site >= spec_.track_site_lo &&
      site <= spec_.track_site_hi) {
    flush_tracked_site(site, now);
  }
  config_.set_label(site, v);
  if (was && !is) {
    on_vacate(site);
  } else if (!was && is) {
    on_occupy(site, now);
  }
}

void Engine::flush_boundary_integrals(double t) {
  double dt = t - last_flush_;
  if (dt > 0.0) {
    pattern_time_[pattern_of(config_, pattern_range_)].add(dt);
    Label c2 = config_.label_or_hole(2);
    if (is_particle(c2)) {
      site2_class_time_[c2].add(dt);
      if (c2 == 1 && config_.label_or_hole(1) != 1) t_tilde_.add(dt);
    }
  }
  last_flush_ = t;
}

void Engine::record_applied(StreamKind kind, std::uint64_t index, double time,
                            std::size_t primary_site) {
  ++st_.applied_events;
  if (spec_.digest_site_cap == 0 || primary_site <= spec_.digest_site_cap) {
    digest_.feed_byte(static_cast<std::uint8_t>(kind));
    digest_.feed_u64(index);
    digest_.feed_u64(std::bit_cast<std::uint64_t>(time));
  }
}

bool Engine::handle(const ClockEvent& ev, Applied* out) {
  const double t = ev.time;
  now_ = t;
  switch (ev.id.kind) {
    case StreamKind::Bulk: {
      std::size_t x = ev.id.index;
      if (spec_.window.cone && static_cast<double>(x) > cone_edge(t)) {
        clocks_.kill(ev.slot);  // front passed this site; stays frozen
        return false;
      }
      Label a = config_.label_or_hole(x);
      if (!is_particle(a)) return false;
      Label b = config_.label_or_hole(x + 1);
      if (!(b > a)) return false;  // blocked
      if (x <= static_cast<std::size_t>(std::max(pattern_range_, 2)))
        flush_boundary_integrals(t);
      set_site(x, b, t);
      set_site(x + 1, a, t);
      if (multiclass_ && !tagged_.empty()) {
        for (auto& tg : tagged_) {
          if (tg.site == x && a >= 2)
            tg.site = x + 1;
          else if (tg.site == x + 1 && is_particle(b) && b >= 2)
            tg.site = x;
        }
      }
      record_applied(StreamKind::Bulk, x, t, x);
      if (out) *out = {t, StreamKind::Bulk, x, x, x + 1, kHole};
      return true;
    }
    case StreamKind::BoundaryTransition: {
      std::size_t i = ev.id.index;
      PatternBits p = pattern_of(config_, pattern_range_);
      st_.boundary_rings_by_pattern[i][p]++;
      const auto& tr = spec_.mechanism.transitions[i];
      if (p != tr.from) return false;
      flush_boundary_integrals(t);
      for (int bit = 0; bit < pattern_range_; ++bit) {
        bool want = (tr.to >> bit) & 1u;
        bool have = (tr.from >> bit) & 1u;
        if (want == have) continue;
        set_site(static_cast<std::size_t>(bit) + 1, want ? Label{1} : kHole, t);
        if (want) {
          ++st_.entries_total;
          ++st_.entries_by_class[1];
        } else {
          ++st_.boundary_removals;
        }
      }
      record_applied(StreamKind::BoundaryTransition, i, t, 1);
      if (out) *out = {t, StreamKind::BoundaryTransition, i, 1, 0, kHole};
      return true;
    }
    case StreamKind::ClassEntry: {
      int j = static_cast<int>(ev.id.index);
      if (!class_entry_allowed(config_, j, num_classes_)) return false;
      flush_boundary_integrals(t);
      Label replaced = config_.label_or_hole(1);
      set_site(1, static_cast<Label>(j), t);
      ++st_.entries_total;
      ++st_.entries_by_class[static_cast<std::size_t>(j)];
      if (is_particle(replaced)) {
        ++st_.boundary_removals;
        if (replaced >= 2) {
          for (std::size_t k = 0; k < tagged_.size(); ++k) {
            if (tagged_[k].site == 1) {
              st_.deaths.push_back({static_cast<int>(replaced), tagged_[k].birth, t, 1});
              tagged_.erase(tagged_.begin() + static_cast<std::ptrdiff_t>(k));
              break;
            }
          }
        }
      }
      if (j >= 2) tagged_.push_back({1, static_cast<Label>(j), t});
      record_applied(StreamKind::ClassEntry, static_cast<std::uint64_t>(j), t, 1);
      if (out) *out = {t, StreamKind::ClassEntry, static_cast<std::uint64_t>(j), 1, 0, replaced};
      return true;
    }
    case StreamKind::ReservoirExit: {
      std::size_t L = fixed_len_;
      Label v = config_.label_or_hole(L);
      if (!is_particle(v)) return false;
      if (L <= static_cast<std::size_t>(std::max(pattern_range_, 2)))
        flush_boundary_integrals(t);
      set_site(L, kHole, t);
      ++st_.exits_right;
      if (v >= 2) {
        for (std::size_t k = 0; k < tagged_.size(); ++k) {
          if (tagged_[k].site == L) {
            tagged_.erase(tagged_.begin() + static_cast<std::ptrdiff_t>(k));
            break;
          }
        }
      }
      record_applied(StreamKind::ReservoirExit, L, t, L);
      if (out) *out = {t, StreamKind::ReservoirExit, L, L, 0, v};
      return true;
    }
    default:
      return false;
  }
}

void Engine::run_until(double t) {
  double limit = std::min(t, spec_.horizon);
  while (auto ev = clocks_.next(limit)) handle(*ev, nullptr);
  if (limit > now_) now_ = limit;
}

std::optional<Engine::Applied> Engine::step_applied(double limit) {
  limit = std::min(limit, spec_.horizon);
  for (;;) {
    auto ev = clocks_.next(limit);
    if (!ev) {
      if (limit > now_) now_ = limit;
      return std::nullopt;
    }
    Applied a;
    if (handle(*ev, &a)) return a;
  }
}

TrajectoryStats Engine::stats() {
  flush_boundary_integrals(now_);
  if (spec_.track_site_lo > 0) {
    for (std::size_t s = spec_.track_site_lo; s <= spec_.track_site_hi; ++s) {
      std::size_t i = s - spec_.track_site_lo;
      if (config_.occupied(s) && site_occupied_since_[i] >= 0.0) {
        site_time_[i].add(now_ - site_occupied_since_[i]);
        site_occupied_since_[i] = now_;
      }
    }
  }
  TrajectoryStats out = st_;
  out.horizon = now_;
  out.event_log_digest = digest_.value();
  out.final_particles = config_.particle_count();
  out.pattern_occupation.resize(pattern_time_.size());
  for (std::size_t i = 0; i < pattern_time_.size(); ++i)
    out.pattern_occupation[i] = pattern_time_[i].value();
  out.occupation_time_site2_by_class.assign(site2_class_time_.size(), 0.0);
  for (std::size_t i = 1; i < site2_class_time_.size(); ++i)
    out.occupation_time_site2_by_class[i] = site2_class_time_[i].value();
  out.time_site2_class1_site1_not1 = t_tilde_.value();
  out.site_occupation_time.resize(site_time_.size());
  for (std::size_t i = 0; i < site_time_.size(); ++i)
    out.site_occupation_time[i] = site_time_[i].value();
  return out;
}

std::pair<Configuration, TrajectoryStats> evolve(const RunSpec& spec) {
  Engine e(spec);
  e.run_until(spec.horizon);
  return {e.config(), e.stats()};
}

Configuration warm_start(const ModelParams& params, double burn_in, std::uint64_t seed) {
  if (burn_in < 0.0) throw std::invalid_argument("burn_in must be >= 0");
  if (burn_in == 0.0) return Configuration(2);
  RunSpec spec;
  spec.params = params;
  if (params.num_classes == 1) spec.mechanism = concrete_mechanism(params.lambda, params.epsilon);
  spec.horizon = burn_in;
  spec.seed = seed;
  auto [config, stats] = evolve(spec);
  (void)stats;
  return config;
}

bool validate_truncation(const RunSpec& spec, std::size_t observable_window, double factor) {
  if (spec.window.kind != WindowPolicy::Kind::Fixed)
    throw std::invalid_argument("validate_truncation requires a fixed window");
  if (!(factor >= 2.0)) throw std::invalid_argument("factor must be >= 2");
  RunSpec a = spec;
  a.digest_site_cap = observable_window;
  RunSpec b = a;
  b.window.fixed_len = static_cast<std::size_t>(std::llround(
      static_cast<double>(spec.window.fixed_len) * factor));
  if (b.window.cone) {
    b.window.cone->margin = static_cast<std::size_t>(std::llround(
        static_cast<double>(spec.window.cone->margin) * factor));
    b.window.cone->speed = spec.window.cone->speed * factor;
  }
  auto ra = evolve(a);
  auto rb = evolve(b);
  return ra.second.event_log_digest == rb.second.event_log_digest;
}

}  // namespace tasep
