#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tasep/core.hpp"
#include "tasep/engine.hpp"

namespace tasep {

// Per-replica seed assignment, shared by every estimator and the CLI.
inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index) {
  return master ^ (index * 0x9E3779B97F4A7C15ULL);
}

struct BatchSpec {
  double burn_in = 0.0;
  double horizon = 0.0;
  int batches = 0;
};

struct EstimateWithCI {
  double point = 0.0;
  double std_error = 0.0;
  int replicas = 0;
  BatchSpec batch;
};

// Long-run particle-entry rate from the empty configuration: per replica,
// (N_{burn+h} - N_burn) / h; mean and replica-level standard error.
EstimateWithCI estimate_current(const ModelParams& params, double burn_in, double horizon,
                                int replicas, std::uint64_t seed, unsigned threads = 0);

// Within-run batch-means variant of the same estimator; diagnostic only
// (autocorrelation makes its CI optimistic).
EstimateWithCI batch_means_current(const ModelParams& params, double burn_in, double horizon,
                                   int batches, std::uint64_t seed);

struct EventRateEstimate {
  EstimateWithCI counted;           // rings of the (xi,xi') clock while the state showed xi0
  EstimateWithCI occupation_based;  // rate x time fraction spent in xi0
};

// Stationary rate of boundary-clock rings falling while the boundary pattern
// equals observed_pattern, on the finite lattice with a right reservoir.
// Requires transitions[ti].to != observed_pattern.
EventRateEstimate estimate_event_rate(const BoundaryMechanism& mech, std::size_t transition_index,
                                      PatternBits observed_pattern, std::size_t lattice_len,
                                      double reservoir_density, double burn_in, double horizon,
                                      int replicas, std::uint64_t seed, unsigned threads = 0);

struct SurvivalRecord {
  enum class Outcome { Survived, Died, Censored } outcome = Outcome::Censored;
  double entry_time = 0.0;
  std::optional<double> death_time;
  std::size_t max_position = 1;
  double t_reach_far = 0.0;  // meaningful when outcome == Survived
  std::vector<std::pair<double, std::size_t>> path;
};

struct SurvivalOptions {
  double x_far = 200.0;
  double t_max = 0.0;        // 0: max(5e3, 20 x_far / (1 - 2 lambda)), capped at 1e5
  std::size_t window_len = 0;  // 0: x_far + 4 t_max + 100, with a speed-4 cone
  double path_cadence = 0.0;   // 0: no path samples
};

struct SurvivalEstimate {
  EstimateWithCI p;            // survivors / (survivors + deaths)
  EstimateWithCI speed;        // survivor drift between x_mid and x_far
  EstimateWithCI speed_total;  // survivor drift from the start
  double censored_fraction = 0.0;
  std::uint64_t survived = 0, died = 0, censored = 0;
  bool unreliable = false;  // censored fraction above 5%
  double t_max = 0.0;
  std::size_t window_len = 0;
  std::vector<SurvivalRecord> records;  // kept only on request
};

// The tagged-second-class experiment: site 1 holds the tagged particle,
// site 2 a first-class particle, sites 3.. are Bernoulli(lambda) first class;
// first-class entries at rate lambda destroy the tagged particle when it sits
// at site 1. Survival is reaching x_far; no further second-class entries.
SurvivalEstimate estimate_survival(double lambda, const SurvivalOptions& opt, int replicas,
                                   std::uint64_t seed, unsigned threads = 0,
                                   bool keep_records = false);

struct FirstOrderPoint {
  double epsilon = 0.0;
  EstimateWithCI diff_slope;     // (N_t(eps) - N_t(0)) / (eps t), coupled
  EstimateWithCI model_current;  // N_t(eps) / t for reference
};

struct FirstOrderEstimate {
  EstimateWithCI slope;  // WLS intercept of diff_slope at eps -> 0
  std::vector<FirstOrderPoint> points;
};

// First-order coefficient of the current in epsilon. Each replica runs the
// model coupled with a TASEP(lambda) control on shared clocks, so the
// difference of entry counts is nonnegative pathwise and low-variance.
FirstOrderEstimate estimate_first_order(double lambda, const std::vector<double>& eps_grid,
                                        double burn_in, double horizon, int replicas,
                                        std::uint64_t seed, unsigned threads = 0);

struct RhoFromCurrent {
  double density = 0.0;
  bool at_boundary = false;  // current at the maximal value 1/4
};

// Root of rho (1 - rho) = j in [0, 1/2]. Throws std::out_of_range for j > 1/4.
RhoFromCurrent rho_from_current(double current);

// Time-averaged occupancy per site over [burn_in, burn_in + horizon], from
// the empty configuration.
std::vector<EstimateWithCI> density_profile(const ModelParams& params, double burn_in,
                                            double horizon, std::size_t site_lo,
                                            std::size_t site_hi, int replicas,
                                            std::uint64_t seed, unsigned threads = 0);

}  // namespace tasep
