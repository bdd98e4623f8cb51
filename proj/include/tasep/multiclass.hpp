#pragma once

#include <cstdint>
#include <vector>

#include "tasep/core.hpp"

namespace tasep {

struct ClassEntryResult {
  bool applied = false;
  Label replaced = kHole;  // label overwritten at site 1, kHole if it was empty
};

// Class-j entry at site 1 for the K-class system:
//   j = 1      : allowed when site 1 holds anything of class >= 2 (or a hole);
//                an existing lower-priority particle is destroyed.
//   1 < j < K  : allowed when site 1 holds class >= j+1 and site 2 holds
//                class j-1.
//   j = K      : allowed when site 1 is empty and site 2 holds class K-1 or K.
bool class_entry_allowed(const Configuration& config, int j, int num_classes);
ClassEntryResult apply_class_entry(Configuration& config, int j, int num_classes);

// Occupancy of classes 1..j as a K=1 configuration.
Configuration project(const Configuration& config, int j);

struct DeathRecord {
  int class_id = 0;
  double birth_time = 0.0;
  double death_time = 0.0;
  std::size_t last_position = 0;
};

// Drives the K-class system and an occupancy configuration from one merged
// clock sweep: occupancy entry fires exactly when a class-entry guard passes,
// bulk clocks are shared. Returns true iff the projection onto all classes
// equals the occupancy state at every event time.
bool check_projection_identity(double lambda, double epsilon, int num_classes,
                               double horizon, std::uint64_t seed);

// Negative control for the harness above: the occupancy side runs on its own
// independently seeded clocks, so agreement at the end is overwhelmingly
// unlikely. Returns true iff the final states happen to coincide.
bool projection_identity_decoupled(double lambda, double epsilon, int num_classes,
                                   double horizon, std::uint64_t seed);

}  // namespace tasep
