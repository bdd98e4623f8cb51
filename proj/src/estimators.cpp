#include "tasep/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tasep/coupling.hpp"
#include "tasep/util.hpp"

namespace tasep {

namespace {

RunSpec half_line_spec(const ModelParams& params, double horizon, std::uint64_t seed) {
  RunSpec spec;
  spec.params = params;
  if (params.num_classes == 1)
    spec.mechanism = concrete_mechanism(params.lambda, params.epsilon);
  spec.horizon = horizon;
  spec.seed = seed;
  return spec;
}

EstimateWithCI summarize(const std::vector<double>& xs, double burn_in, double horizon) {
  MeanSe ms = mean_se(xs);
  EstimateWithCI e;
  e.point = ms.mean;
  e.std_error = ms.se;
  e.replicas = static_cast<int>(ms.n);
  e.batch = {burn_in, horizon, static_cast<int>(ms.n)};
  return e;
}

}  // namespace

EstimateWithCI estimate_current(const ModelParams& params, double burn_in, double horizon,
                                int replicas, std::uint64_t seed, unsigned threads) {
  params.validate();
  if (!(horizon > 0.0) || burn_in < 0.0) throw std::invalid_argument("bad burn_in/horizon");
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  std::vector<double> values(static_cast<std::size_t>(replicas));
  parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
    Engine eng(half_line_spec(params, burn_in + horizon, replica_seed(seed, i)));
    eng.run_until(burn_in);
    std::uint64_t n0 = eng.stats().entries_total;
    eng.run_until(burn_in + horizon);
    std::uint64_t n1 = eng.stats().entries_total;
    values[i] = static_cast<double>(n1 - n0) / horizon;
  });
  return summarize(values, burn_in, horizon);
}

EstimateWithCI batch_means_current(const ModelParams& params, double burn_in, double horizon,
                                   int batches, std::uint64_t seed) {
  if (batches < 2) throw std::invalid_argument("need at least 2 batches");
  Engine eng(half_line_spec(params, burn_in + horizon, seed));
  eng.run_until(burn_in);
  std::uint64_t prev = eng.stats().entries_total;
  double dt = horizon / batches;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(batches));
  for (int b = 1; b <= batches; ++b) {
    eng.run_until(burn_in + dt * b);
    std::uint64_t n = eng.stats().entries_total;
    values.push_back(static_cast<double>(n - prev) / dt);
    prev = n;
  }
  EstimateWithCI e = summarize(values, burn_in, horizon);
  e.batch.batches = batches;
  return e;
}

EventRateEstimate estimate_event_rate(const BoundaryMechanism& mech, std::size_t transition_index,
                                      PatternBits observed_pattern, std::size_t lattice_len,
                                      double reservoir_density, double burn_in, double horizon,
                                      int replicas, std::uint64_t seed, unsigned threads) {
  mech.validate();
  if (transition_index >= mech.transitions.size())
    throw std::out_of_range("transition index outside the mechanism");
  if (observed_pattern >= (PatternBits{1} << mech.range))
    throw std::invalid_argument("observed pattern wider than the mechanism range");
  if (mech.transitions[transition_index].to == observed_pattern)
    throw std::invalid_argument("observed pattern must differ from the transition target");
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");

  double rate = mech.transitions[transition_index].rate;
  std::vector<double> counted(static_cast<std::size_t>(replicas));
  std::vector<double> occ_based(static_cast<std::size_t>(replicas));
  parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
    RunSpec spec;
    spec.params.num_classes = 1;
    spec.params.right_boundary = {RightBoundary::Kind::OpenExit, reservoir_density};
    spec.mechanism = mech;
    spec.horizon = burn_in + horizon;
    spec.seed = replica_seed(seed, i);
    spec.window = WindowPolicy::fixed(lattice_len);
    Engine eng(spec);
    eng.run_until(burn_in);
    TrajectoryStats s0 = eng.stats();
    eng.run_until(burn_in + horizon);
    TrajectoryStats s1 = eng.stats();
    std::uint64_t rings = s1.boundary_rings_by_pattern[transition_index][observed_pattern] -
                          s0.boundary_rings_by_pattern[transition_index][observed_pattern];
    double occ_time = s1.pattern_occupation[observed_pattern] -
                      s0.pattern_occupation[observed_pattern];
    counted[i] = static_cast<double>(rings) / horizon;
    occ_based[i] = rate * occ_time / horizon;
  });
  return {summarize(counted, burn_in, horizon), summarize(occ_based, burn_in, horizon)};
}

namespace {

struct SurvivalRunResult {
  SurvivalRecord record;
  double speed_two_point = 0.0;
  double speed_total = 0.0;
};

SurvivalRunResult run_survival_replica(double lambda, const SurvivalOptions& opt, double t_max,
                                       std::size_t window_len, std::uint64_t seed,
                                       bool keep_path) {
  RunSpec spec;
  spec.params.lambda = lambda;
  spec.params.epsilon = 0.0;
  spec.params.num_classes = 2;
  spec.initial.prefix = {Label{2}, Label{1}};
  spec.initial.density = lambda;
  spec.horizon = t_max;
  spec.seed = seed;
  spec.window = WindowPolicy::fixed(window_len);
  spec.window.cone = Cone{static_cast<std::size_t>(opt.x_far), 100, 4.0};
  Engine eng(spec);

  const std::size_t x_far = static_cast<std::size_t>(opt.x_far);
  const std::size_t x_mid = std::max<std::size_t>(2, std::min<std::size_t>(20, x_far / 2));
  std::size_t pos = 1;
  SurvivalRunResult out;
  SurvivalRecord& rec = out.record;
  double t_mid = -1.0;
  double next_sample = opt.path_cadence;
  if (keep_path) rec.path.push_back({0.0, pos});

  while (auto ev = eng.step_applied(t_max)) {
    if (keep_path && opt.path_cadence > 0.0) {
      while (next_sample < ev->time) {
        rec.path.push_back({next_sample, pos});
        next_sample += opt.path_cadence;
      }
    }
    if (ev->kind == StreamKind::ClassEntry) {
      if (ev->replaced == 2) {
        rec.outcome = SurvivalRecord::Outcome::Died;
        rec.death_time = ev->time;
        break;
      }
      continue;
    }
    if (ev->kind != StreamKind::Bulk) continue;
    std::size_t x = ev->site_a;
    if (x == pos && eng.config().label_or_hole(x + 1) == 2) {
      pos = x + 1;
    } else if (x + 1 == pos && eng.config().label_or_hole(x) == 2) {
      pos = x;
    } else {
      continue;
    }
    if (pos > rec.max_position) {
      rec.max_position = pos;
      if (pos == x_mid && t_mid < 0.0) t_mid = ev->time;
      if (pos >= x_far) {
        rec.outcome = SurvivalRecord::Outcome::Survived;
        rec.t_reach_far = ev->time;
        break;
      }
    }
  }
  if (rec.outcome == SurvivalRecord::Outcome::Survived) {
    out.speed_total = static_cast<double>(x_far - 1) / rec.t_reach_far;
    if (t_mid >= 0.0 && rec.t_reach_far > t_mid)
      out.speed_two_point = static_cast<double>(x_far - x_mid) / (rec.t_reach_far - t_mid);
    else
      out.speed_two_point = out.speed_total;
  }
  return out;
}

}  // namespace

SurvivalEstimate estimate_survival(double lambda, const SurvivalOptions& opt, int replicas,
                                   std::uint64_t seed, unsigned threads, bool keep_records) {
  if (!(lambda >= 0.0 && lambda <= 0.5))
    throw std::invalid_argument("survival estimator needs lambda in [0, 1/2]");
  if (!(opt.x_far >= 10.0)) throw std::invalid_argument("x_far must be >= 10");
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");

  double t_max = opt.t_max;
  if (t_max <= 0.0) {
    double drift = 1.0 - 2.0 * lambda;
    t_max = 5e3;
    if (drift > 1e-6) t_max = std::max(t_max, 20.0 * opt.x_far / drift);
    t_max = std::min(t_max, 1e5);
  }
  std::size_t window_len = opt.window_len;
  if (window_len == 0)
    window_len = static_cast<std::size_t>(opt.x_far + 4.0 * t_max + 100.0);

  std::vector<SurvivalRunResult> results(static_cast<std::size_t>(replicas));
  parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
    results[i] = run_survival_replica(lambda, opt, t_max, window_len, replica_seed(seed, i),
                                      keep_records);
  });

  SurvivalEstimate est;
  est.t_max = t_max;
  est.window_len = window_len;
  std::vector<double> speeds, speeds_total;
  for (auto& r : results) {
    switch (r.record.outcome) {
      case SurvivalRecord::Outcome::Survived:
        ++est.survived;
        speeds.push_back(r.speed_two_point);
        speeds_total.push_back(r.speed_total);
        break;
      case SurvivalRecord::Outcome::Died:
        ++est.died;
        break;
      case SurvivalRecord::Outcome::Censored:
        ++est.censored;
        break;
    }
    if (keep_records) est.records.push_back(std::move(r.record));
  }
  std::uint64_t decided = est.survived + est.died;
  est.p.replicas = static_cast<int>(decided);
  est.p.batch = {0.0, t_max, replicas};
  if (decided > 0) {
    double p = static_cast<double>(est.survived) / static_cast<double>(decided);
    est.p.point = p;
    est.p.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(decided));
  }
  est.censored_fraction = static_cast<double>(est.censored) / static_cast<double>(replicas);
  est.unreliable = est.censored_fraction > 0.05 || decided == 0;
  est.speed = summarize(speeds, 0.0, t_max);
  est.speed_total = summarize(speeds_total, 0.0, t_max);
  return est;
}

FirstOrderEstimate estimate_first_order(double lambda, const std::vector<double>& eps_grid,
                                        double burn_in, double horizon, int replicas,
                                        std::uint64_t seed, unsigned threads) {
  if (eps_grid.size() < 3) throw std::invalid_argument("eps_grid needs at least 3 points");
  for (double e : eps_grid) {
    if (!(e > 0.0) || !(lambda + e < 0.5))
      throw std::invalid_argument("eps_grid points must lie in (0, 1/2 - lambda)");
  }
  if (replicas < 2) throw std::invalid_argument("replicas must be >= 2");
  if (!(horizon > 0.0) || burn_in < 0.0) throw std::invalid_argument("bad burn_in/horizon");

  FirstOrderEstimate out;
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    double eps = eps_grid[k];
    std::uint64_t grid_seed = mix64(seed ^ (0xC2B2AE3D27D4EB4FULL + k));
    std::vector<double> slopes(static_cast<std::size_t>(replicas));
    std::vector<double> currents(static_cast<std::size_t>(replicas));
    parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
      std::vector<CoupledMemberSpec> members(2);
      members[0].label = "tasep";
      members[0].base_rate = lambda;
      members[1].label = "model";
      members[1].base_rate = lambda;
      members[1].bonus_rate = eps;
      members[1].bonus_guard = CoupledMemberSpec::BonusGuard::Site2Occupied;
      CoupledEngine eng(std::move(members), replica_seed(grid_seed, i));
      eng.run_until(burn_in);
      std::uint64_t c0 = eng.members()[0].entries;
      std::uint64_t m0 = eng.members()[1].entries;
      eng.run_until(burn_in + horizon);
      std::uint64_t c1 = eng.members()[0].entries;
      std::uint64_t m1 = eng.members()[1].entries;
      double diff = static_cast<double>(m1 - m0) - static_cast<double>(c1 - c0);
      slopes[i] = diff / (eps * horizon);
      currents[i] = static_cast<double>(m1 - m0) / horizon;
    });
    FirstOrderPoint pt;
    pt.epsilon = eps;
    pt.diff_slope = summarize(slopes, burn_in, horizon);
    pt.model_current = summarize(currents, burn_in, horizon);
    out.points.push_back(pt);
  }

  // Weighted least squares of diff_slope against epsilon; the intercept is
  // the eps -> 0 limit.
  double sw = 0, swx = 0, swxx = 0, swy = 0, swxy = 0;
  for (const auto& pt : out.points) {
    double se = pt.diff_slope.std_error;
    double w = se > 0.0 ? 1.0 / (se * se) : 1.0;
    double x = pt.epsilon;
    double y = pt.diff_slope.point;
    sw += w;
    swx += w * x;
    swxx += w * x * x;
    swy += w * y;
    swxy += w * x * y;
  }
  double det = sw * swxx - swx * swx;
  if (!(det > 0.0)) throw std::runtime_error("degenerate eps grid in first-order fit");
  out.slope.point = (swxx * swy - swx * swxy) / det;
  out.slope.std_error = std::sqrt(swxx / det);
  out.slope.replicas = replicas * static_cast<int>(eps_grid.size());
  out.slope.batch = {burn_in, horizon, static_cast<int>(eps_grid.size())};
  return out;
}

RhoFromCurrent rho_from_current(double current) {
  if (!(current >= -1e-12) || current > 0.25 + 1e-12)
    throw std::out_of_range("current must lie in [0, 1/4]");
  double j = std::clamp(current, 0.0, 0.25);
  double disc = std::max(0.0, 1.0 - 4.0 * j);
  RhoFromCurrent r;
  r.density = (1.0 - std::sqrt(disc)) / 2.0;
  r.at_boundary = std::abs(j - 0.25) <= 1e-12;
  return r;
}

std::vector<EstimateWithCI> density_profile(const ModelParams& params, double burn_in,
                                            double horizon, std::size_t site_lo,
                                            std::size_t site_hi, int replicas,
                                            std::uint64_t seed, unsigned threads) {
  params.validate();
  if (site_lo < 1 || site_lo > site_hi) throw std::invalid_argument("bad site range");
  if (!(horizon > 0.0) || burn_in < 0.0) throw std::invalid_argument("bad burn_in/horizon");
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");

  std::size_t nsites = site_hi - site_lo + 1;
  std::vector<std::vector<double>> per_site(nsites,
                                            std::vector<double>(static_cast<std::size_t>(replicas)));
  parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
    RunSpec spec = half_line_spec(params, burn_in + horizon, replica_seed(seed, i));
    spec.track_site_lo = site_lo;
    spec.track_site_hi = site_hi;
    Engine eng(spec);
    eng.run_until(burn_in);
    std::vector<double> t0 = eng.stats().site_occupation_time;
    eng.run_until(burn_in + horizon);
    std::vector<double> t1 = eng.stats().site_occupation_time;
    for (std::size_t s = 0; s < nsites; ++s) per_site[s][i] = (t1[s] - t0[s]) / horizon;
  });
  std::vector<EstimateWithCI> out;
  out.reserve(nsites);
  for (std::size_t s = 0; s < nsites; ++s) out.push_back(summarize(per_site[s], burn_in, horizon));
  return out;
}

}  // namespace tasep
