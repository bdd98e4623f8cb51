#include "tasep/core.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>

namespace tasep {

Configuration Configuration::from_labels(const std::vector<Label>& labels) {
  Configuration c(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (is_particle(labels[i])) c.set_label(i + 1, labels[i]);
  }
  return c;
}

Label Configuration::label(std::size_t site) const {
  if (site < 1 || site > labels_.size()) throw std::out_of_range("site outside window");
  return labels_[site - 1];
}

void Configuration::set_label(std::size_t site, Label v) {
  if (site < 1 || site > labels_.size()) throw std::out_of_range("site outside window");
  Label& cur = labels_[site - 1];
  if (cur == v) return;
  bool was = is_particle(cur);
  bool now = is_particle(v);
  cur = v;
  if (was && !now) {
    --count_;
    if (site == rightmost_) {
      std::size_t r = site - 1;
      while (r >= 1 && !is_particle(labels_[r - 1])) --r;
      rightmost_ = r;
    }
  } else if (!was && now) {
    ++count_;
    rightmost_ = std::max(rightmost_, site);
  }
}

void Configuration::grow(std::size_t new_len) {
  if (new_len > labels_.size()) labels_.resize(new_len, kHole);
}

PatternBits pattern_of(const Configuration& config, int range) {
  PatternBits bits = 0;
  for (int i = 0; i < range; ++i) {
    if (config.occupied(static_cast<std::size_t>(i) + 1)) bits |= (PatternBits{1} << i);
  }
  return bits;
}

PatternBits parse_pattern(std::string_view s) {
  PatternBits bits = 0;
  if (s.empty() || s.size() > 31) throw std::invalid_argument("pattern length out of range");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      bits |= (PatternBits{1} << i);
    } else if (s[i] != '0') {
      throw std::invalid_argument("pattern must be 0/1 characters");
    }
  }
  return bits;
}

std::string format_pattern(PatternBits bits, int range) {
  std::string s(static_cast<std::size_t>(range), '0');
  for (int i = 0; i < range; ++i) {
    if (bits & (PatternBits{1} << i)) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

void BoundaryMechanism::validate() const {
  if (range < 1 || range > 10) throw std::invalid_argument("mechanism range must be in [1,10]");
  const PatternBits limit = PatternBits{1} << range;
  std::set<std::pair<PatternBits, PatternBits>> seen;
  for (const auto& t : transitions) {
    if (t.from >= limit || t.to >= limit)
      throw std::invalid_argument("transition pattern has more bits than range");
    if (t.from == t.to) throw std::invalid_argument("transition must change the pattern");
    if (!(t.rate >= 0.0)) throw std::invalid_argument("transition rate must be >= 0");
    if (!seen.insert({t.from, t.to}).second)
      throw std::invalid_argument("duplicate (from,to) transition pair");
  }
}

BoundaryMechanism concrete_mechanism(double lambda, double epsilon) {
  if (!(lambda >= 0.0) || !(epsilon >= 0.0) || !(lambda + epsilon < 0.5))
    throw std::invalid_argument("concrete mechanism requires lambda,epsilon >= 0 and lambda+epsilon < 1/2");
  BoundaryMechanism mech;
  mech.range = 2;
  mech.transitions.push_back({parse_pattern("00"), parse_pattern("10"), lambda});
  mech.transitions.push_back({parse_pattern("01"), parse_pattern("11"), lambda + epsilon});
  mech.validate();
  return mech;
}

void ModelParams::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  // lambda + epsilon < 1/2 is the standing hypothesis of the model with a
  // site-2 bonus; a plain TASEP (epsilon = 0) is also meaningful at the
  // boundary point lambda = 1/2, which the survival estimator needs.
  if (epsilon > 0.0) {
    if (!(lambda + epsilon < 0.5))
      throw std::invalid_argument("lambda + epsilon must be < 1/2");
  } else if (!(lambda <= 0.5)) {
    throw std::invalid_argument("lambda must be <= 1/2 when epsilon = 0");
  }
  if (num_classes < 1 || num_classes > kMaxClasses)
    throw std::invalid_argument("num_classes out of range");
  if (right_boundary.kind == RightBoundary::Kind::OpenExit) {
    double rho = right_boundary.reservoir_density;
    if (!(rho >= 0.0 && rho <= 1.0))
      throw std::invalid_argument("reservoir density must be in [0,1]");
  }
}

bool apply_bulk_jump(Configuration& config, std::size_t x) {
  if (x < 1 || x + 1 > config.window_len()) throw std::out_of_range("bulk site outside window");
  Label a = config.label(x);
  if (!is_particle(a)) return false;
  Label b = config.label(x + 1);
  if (!(b > a)) return false;  // blocked: equal or higher priority ahead
  config.set_label(x, b);
  config.set_label(x + 1, a);
  return true;
}

bool apply_boundary_transition(Configuration& config, const BoundaryMechanism& mech,
                               std::size_t ti) {
  if (ti >= mech.transitions.size()) throw std::out_of_range("transition index");
  const auto& t = mech.transitions[ti];
  if (pattern_of(config, mech.range) != t.from) return false;
  for (int i = 0; i < mech.range; ++i) {
    bool want = (t.to >> i) & 1u;
    bool have = (t.from >> i) & 1u;
    if (want == have) continue;
    config.set_label(static_cast<std::size_t>(i) + 1, want ? Label{1} : kHole);
  }
  return true;
}

bool leq(const Configuration& a, const Configuration& b) {
  std::size_t n = std::max(a.window_len(), b.window_len());
  for (std::size_t x = 1; x <= n; ++x) {
    if (a.occupied(x) && !b.occupied(x)) return false;
  }
  return true;
}

}  // namespace tasep
