#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "tasep/core.hpp"
#include "tasep/harris.hpp"
#include "tasep/multiclass.hpp"
#include "tasep/util.hpp"

namespace tasep {

// Deactivation front for large fixed windows: bulk clocks at site x stop
// (and stay frozen) once x > anchor + margin + speed * (horizon - t).
// Anything their missing evolution could influence needs to cross toward the
// anchor faster than `speed`; validate_truncation certifies the choice.
struct Cone {
  std::size_t anchor_site = 0;
  std::size_t margin = 100;
  double speed = 4.0;
};

struct WindowPolicy {
  enum class Kind { Lazy, Fixed } kind = Kind::Lazy;
  std::size_t fixed_len = 0;
  std::size_t lazy_slack = 1024;
  std::optional<Cone> cone;            // Fixed only
  bool error_on_wall_contact = false;  // Fixed half-line truncation canary

  static WindowPolicy lazy(std::size_t slack = 1024) {
    WindowPolicy w;
    w.kind = Kind::Lazy;
    w.lazy_slack = slack;
    return w;
  }
  static WindowPolicy fixed(std::size_t len) {
    WindowPolicy w;
    w.kind = Kind::Fixed;
    w.fixed_len = len;
    return w;
  }
};

// Initial condition: explicit labels on sites 1..prefix.size(), then
// independent Bernoulli(density) class-1 occupancy on the rest of the window.
struct Initial {
  std::vector<Label> prefix;
  double density = 0.0;

  static Initial empty() { return {}; }
  static Initial bernoulli(double density) { return {{}, density}; }
};

struct RunSpec {
  ModelParams params;
  // Used when params.num_classes == 1; multiclass runs derive their entry
  // streams from (lambda, epsilon, num_classes) instead.
  BoundaryMechanism mechanism;
  Initial initial;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  WindowPolicy window;

  // Optional per-site occupation-time tracking (inclusive site range; 0 = off).
  std::size_t track_site_lo = 0, track_site_hi = 0;
  // Restrict the event-log digest to applied events with primary site <= cap
  // (0 = hash everything). Used by truncation certification.
  std::size_t digest_site_cap = 0;

  void validate() const;  // throws std::invalid_argument
};

struct TrajectoryStats {
  double horizon = 0.0;
  std::uint64_t entries_total = 0;
  std::vector<std::uint64_t> entries_by_class;  // index 1..K
  std::uint64_t boundary_removals = 0;
  std::uint64_t exits_right = 0;
  std::uint64_t applied_events = 0;
  std::uint64_t event_log_digest = 0;

  // Time integrals over [0, horizon].
  std::vector<double> occupation_time_site2_by_class;  // index 1..K
  double time_site2_class1_site1_not1 = 0.0;           // \tilde T
  std::vector<double> pattern_occupation;              // index = PatternBits, size 2^R

  // Clock rings of each boundary-transition stream by pre-event pattern
  // (counted whether or not the transition applied). Occupancy mode only.
  std::vector<std::vector<std::uint64_t>> boundary_rings_by_pattern;

  std::vector<double> site_occupation_time;  // tracked range, index 0 = track_site_lo
  std::vector<DeathRecord> deaths;

  std::uint64_t initial_particles = 0;
  std::uint64_t final_particles = 0;
};

// Chronological event sweep over one replica.
class Engine {
 public:
  explicit Engine(RunSpec spec);

  double now() const { return now_; }
  const RunSpec& spec() const { return spec_; }
  const Configuration& config() const { return config_; }

  struct Applied {
    double time = 0.0;
    StreamKind kind = StreamKind::Bulk;
    std::uint64_t index = 0;           // site / transition index / class
    std::size_t site_a = 0, site_b = 0;  // affected sites (site_b = 0 if none)
    Label replaced = kHole;            // multiclass entry overwrite
  };

  // Advances to min(t, horizon), applying every event on the way.
  void run_until(double t);
  // Delivers the next state-changing event with time <= limit, or advances to
  // limit and returns nullopt.
  std::optional<Applied> step_applied(double limit);

  // Stats synced to now().
  TrajectoryStats stats();

 private:
  bool handle(const ClockEvent& ev, Applied* out);
  void ensure_window(std::size_t site);
  void ensure_bulk_stream(std::size_t x, double now);
  void on_occupy(std::size_t x, double now);
  void on_vacate(std::size_t x);
  bool bulk_allowed_site(std::size_t x) const;
  double cone_edge(double t) const;
  void flush_boundary_integrals(double t);
  void flush_tracked_site(std::size_t x, double t);
  void record_applied(StreamKind kind, std::uint64_t index, double time, std::size_t primary_site);
  void set_site(std::size_t site, Label v, double now);

  RunSpec spec_;
  Configuration config_;
  ClockSet clocks_;
  double now_ = 0.0;

  int num_classes_ = 1;
  int pattern_range_ = 2;
  bool multiclass_ = false;
  bool open_exit_ = false;
  std::size_t fixed_len_ = 0;

  std::vector<int> bulk_slot_;       // site-1 -> slot, -1 if not materialized
  std::vector<int> boundary_slot_;   // transition index -> slot, -1 if rate 0
  std::vector<int> class_slot_;      // class j -> slot, -1 if rate 0
  int exit_slot_ = -1;

  // Boundary-region integral bookkeeping.
  double last_flush_ = 0.0;
  std::vector<KahanSum> pattern_time_;
  std::vector<KahanSum> site2_class_time_;
  KahanSum t_tilde_;

  // Tracked-site occupation bookkeeping.
  std::vector<KahanSum> site_time_;
  std::vector<double> site_occupied_since_;

  // Live particles of class >= 2, for death records.
  struct Tagged {
    std::size_t site;
    Label class_id;
    double birth;
  };
  std::vector<Tagged> tagged_;

  TrajectoryStats st_;
  Fnv1a64 digest_;
};

std::pair<Configuration, TrajectoryStats> evolve(const RunSpec& spec);

// Evolves from empty for burn_in; an approximate sample of the long-time
// limit law from the empty configuration.
Configuration warm_start(const ModelParams& params, double burn_in, std::uint64_t seed);

// Certifies a fixed-window truncation: runs spec at its window and at
// factor * window (cone margin and speed scaled alike) with the same seed and
// compares the applied-event logs restricted to sites 1..observable_window.
bool validate_truncation(const RunSpec& spec, std::size_t observable_window, double factor);

}  // namespace tasep
