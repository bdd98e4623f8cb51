#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "tasep/core.hpp"

namespace tasep {

// Finite lattice {1..sites} with bulk rate 1, a finite-range boundary
// mechanism at the left and a right reservoir: an occupied site L empties at
// rate 1 - reservoir_density. State index s encodes occupancy, bit x-1 for
// site x; 2^sites states.
struct FiniteModelSpec {
  std::size_t sites = 0;
  BoundaryMechanism mechanism;
  double reservoir_density = 0.0;

  void validate() const;  // sites in [1,12], range <= sites
};

// Generator matrix Q: Q(s,s') = rate of s -> s', diagonal = -row sum.
Eigen::MatrixXd build_generator(const FiniteModelSpec& spec);

// Solves pi Q = 0, sum pi = 1 on the class reachable from the empty state
// (dense partial-pivot LU, one balance row replaced by normalization).
// Throws std::runtime_error when that class is not irreducible.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& Q);

// d_{xi,xi'} * pi{ states whose boundary pattern equals observed }.
double exact_event_rate(const Eigen::VectorXd& pi, const FiniteModelSpec& spec,
                        std::size_t transition_index, PatternBits observed);

// Net stationary boundary creation rate; asserted equal to the exit flux
// (1 - rho) pi{site L occupied} to 1e-10.
double exact_entry_current(const Eigen::VectorXd& pi, const FiniteModelSpec& spec);

}  // namespace tasep
