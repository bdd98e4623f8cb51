#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tasep {

// Class labels: 1..K are particle classes (smaller = higher priority),
// kHole marks an empty site and compares above every numeric class.
using Label = std::uint8_t;
inline constexpr Label kHole = 0xFF;
inline constexpr int kMaxClasses = 200;

inline bool is_particle(Label v) { return v != kHole; }

// Lattice state over a window of sites 1..window_len. Sites are 1-based
// everywhere in the public interface.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::size_t window_len) : labels_(window_len, kHole) {}
  static Configuration from_labels(const std::vector<Label>& labels);

  std::size_t window_len() const { return labels_.size(); }
  Label label(std::size_t site) const;
  // Sites beyond the window read as holes.
  Label label_or_hole(std::size_t site) const {
    return (site >= 1 && site <= labels_.size()) ? labels_[site - 1] : kHole;
  }
  bool occupied(std::size_t site) const { return is_particle(label_or_hole(site)); }

  void set_label(std::size_t site, Label v);
  void grow(std::size_t new_len);

  // Largest occupied site, 0 when empty.
  std::size_t rightmost_occupied() const { return rightmost_; }
  std::size_t particle_count() const { return count_; }

  bool operator==(const Configuration& other) const { return labels_ == other.labels_; }

 private:
  std::vector<Label> labels_;
  std::size_t rightmost_ = 0;
  std::size_t count_ = 0;
};

// Occupancy pattern over sites 1..range, bit i-1 set when site i is occupied.
using PatternBits = std::uint32_t;

PatternBits pattern_of(const Configuration& config, int range);
// "01" means site 1 empty, site 2 occupied.
PatternBits parse_pattern(std::string_view s);
std::string format_pattern(PatternBits bits, int range);

struct BoundaryTransition {
  PatternBits from = 0;
  PatternBits to = 0;
  double rate = 0.0;
};

// Finite-range boundary rate table: when the occupancy of sites 1..range
// equals `from`, replace it by `to` at the given rate.
struct BoundaryMechanism {
  int range = 0;
  std::vector<BoundaryTransition> transitions;

  void validate() const;  // throws std::invalid_argument
};

// The R=2 mechanism of the concrete model: entry at site 1 with rate
// lambda, plus an extra epsilon when site 2 is occupied.
BoundaryMechanism concrete_mechanism(double lambda, double epsilon);

struct RightBoundary {
  enum class Kind { HalfLine, OpenExit } kind = Kind::HalfLine;
  double reservoir_density = 0.0;  // OpenExit: site L empties at rate 1 - density
};

struct ModelParams {
  double lambda = 0.0;
  double epsilon = 0.0;
  int num_classes = 1;
  RightBoundary right_boundary;

  void validate() const;  // throws std::invalid_argument
};

// Bulk move at (x, x+1): the particle at x advances when the site to its
// right holds a strictly lower-priority label (holes are lowest). Returns
// true when the state changed. Throws std::out_of_range unless
// 1 <= x < window_len.
bool apply_bulk_jump(Configuration& config, std::size_t x);

// Applies transitions[ti] if the current occupancy of sites 1..range matches
// exactly; near-misses change nothing. Occupancy-level semantics: created
// particles get class 1. Returns true when the state changed.
bool apply_boundary_transition(Configuration& config, const BoundaryMechanism& mech,
                               std::size_t ti);

// Sitewise occupancy comparison on the union window.
bool leq(const Configuration& a, const Configuration& b);

}  // namespace tasep
