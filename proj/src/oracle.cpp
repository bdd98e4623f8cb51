#include "tasep/oracle.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tasep {

void FiniteModelSpec::validate() const {
  if (sites < 1 || sites > 12)
    throw std::invalid_argument("finite model needs 1 <= sites <= 12");
  mechanism.validate();
  if (static_cast<std::size_t>(mechanism.range) > sites)
    throw std::invalid_argument("mechanism range exceeds the lattice");
  if (!(reservoir_density >= 0.0 && reservoir_density <= 1.0))
    throw std::invalid_argument("reservoir density must be in [0,1]");
}

Eigen::MatrixXd build_generator(const FiniteModelSpec& spec) {
  spec.validate();
  const std::size_t L = spec.sites;
  const Eigen::Index n = Eigen::Index{1} << L;
  const std::uint32_t rmask = (std::uint32_t{1} << spec.mechanism.range) - 1;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  const double exit_rate = 1.0 - spec.reservoir_density;

  for (Eigen::Index s = 0; s < n; ++s) {
    auto u = static_cast<std::uint32_t>(s);
    for (std::size_t x = 1; x + 1 <= L; ++x) {
      std::uint32_t here = std::uint32_t{1} << (x - 1);
      std::uint32_t right = std::uint32_t{1} << x;
      if ((u & here) && !(u & right)) Q(s, static_cast<Eigen::Index>(u ^ here ^ right)) += 1.0;
    }
    for (const auto& tr : spec.mechanism.transitions) {
      if ((u & rmask) == tr.from && tr.rate > 0.0)
        Q(s, static_cast<Eigen::Index>((u & ~rmask) | tr.to)) += tr.rate;
    }
    std::uint32_t last = std::uint32_t{1} << (L - 1);
    if ((u & last) && exit_rate > 0.0) Q(s, static_cast<Eigen::Index>(u ^ last)) += exit_rate;
  }
  for (Eigen::Index s = 0; s < n; ++s) {
    double row = 0.0;
    for (Eigen::Index t = 0; t < n; ++t)
      if (t != s) row += Q(s, t);
    Q(s, s) = -row;
  }
  return Q;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& Q) {
  const Eigen::Index n = Q.rows();
  if (n < 1 || Q.cols() != n) throw std::invalid_argument("generator must be square");

  // Reachable class of the empty state (index 0).
  std::vector<Eigen::Index> order{0};
  std::vector<bool> reach(static_cast<std::size_t>(n), false);
  reach[0] = true;
  for (std::size_t head = 0; head < order.size(); ++head) {
    Eigen::Index s = order[head];
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!reach[static_cast<std::size_t>(t)] && t != s && Q(s, t) > 0.0) {
        reach[static_cast<std::size_t>(t)] = true;
        order.push_back(t);
      }
    }
  }
  // Irreducibility on that class: every member must reach state 0 back.
  std::vector<bool> back(static_cast<std::size_t>(n), false);
  back[0] = true;
  std::vector<Eigen::Index> stack{0};
  while (!stack.empty()) {
    Eigen::Index t = stack.back();
    stack.pop_back();
    for (Eigen::Index s : order) {
      if (!back[static_cast<std::size_t>(s)] && s != t && Q(s, t) > 0.0) {
        back[static_cast<std::size_t>(s)] = true;
        stack.push_back(s);
      }
    }
  }
  for (Eigen::Index s : order) {
    if (!back[static_cast<std::size_t>(s)])
      throw std::runtime_error(
          "stationary distribution is not unique: state " + std::to_string(s) +
          " is reachable from empty but cannot return (reachable class size " +
          std::to_string(order.size()) + ")");
  }

  const auto m = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) A(i, j) = Q(order[static_cast<std::size_t>(j)],
                                                     order[static_cast<std::size_t>(i)]);
  // Replace one balance equation by normalization.
  for (Eigen::Index j = 0; j < m; ++j) A(m - 1, j) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;
  Eigen::VectorXd x = A.partialPivLu().solve(b);

  Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) pi(order[static_cast<std::size_t>(i)]) = x(i);
  double residual = (pi.transpose() * Q).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10))
    throw std::runtime_error("stationary solve residual " + std::to_string(residual));
  for (Eigen::Index s = 0; s < n; ++s) {
    if (pi(s) < 0.0) {
      if (pi(s) < -1e-12) throw std::runtime_error("negative stationary probability");
      pi(s) = 0.0;
    }
  }
  pi /= pi.sum();
  return pi;
}

double exact_event_rate(const Eigen::VectorXd& pi, const FiniteModelSpec& spec,
                        std::size_t transition_index, PatternBits observed) {
  if (transition_index >= spec.mechanism.transitions.size())
    throw std::out_of_range("transition index outside the mechanism");
  const std::uint32_t rmask = (std::uint32_t{1} << spec.mechanism.range) - 1;
  double block = 0.0;
  for (Eigen::Index s = 0; s < pi.size(); ++s) {
    if ((static_cast<std::uint32_t>(s) & rmask) == observed) block += pi(s);
  }
  return spec.mechanism.transitions[transition_index].rate * block;
}

double exact_entry_current(const Eigen::VectorXd& pi, const FiniteModelSpec& spec) {
  const std::uint32_t rmask = (std::uint32_t{1} << spec.mechanism.range) - 1;
  double entry = 0.0;
  for (const auto& tr : spec.mechanism.transitions) {
    if (tr.rate <= 0.0) continue;
    int delta = std::popcount(tr.to) - std::popcount(tr.from);
    if (delta == 0) continue;
    double block = 0.0;
    for (Eigen::Index s = 0; s < pi.size(); ++s) {
      if ((static_cast<std::uint32_t>(s) & rmask) == tr.from) block += pi(s);
    }
    entry += tr.rate * delta * block;
  }
  double exit = 0.0;
  const std::uint32_t last = std::uint32_t{1} << (spec.sites - 1);
  for (Eigen::Index s = 0; s < pi.size(); ++s) {
    if (static_cast<std::uint32_t>(s) & last) exit += pi(s);
  }
  exit *= 1.0 - spec.reservoir_density;
  if (std::abs(entry - exit) > 1e-10)
    throw std::runtime_error("stationary flux balance violated: entry " +
                             std::to_string(entry) + " vs exit " + std::to_string(exit));
  return entry;
}

}  // namespace tasep
