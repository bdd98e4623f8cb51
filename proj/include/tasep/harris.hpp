#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

namespace tasep {

// Identified Poisson clock streams. InitialDraw is not a clock: it only
// names the per-site randomness used for Bernoulli initial conditions.
enum class StreamKind : std::uint8_t {
  Bulk = 1,
  BoundaryTransition = 2,
  ClassEntry = 3,
  ReservoirExit = 4,
  InitialDraw = 5,
};

struct StreamId {
  StreamKind kind = StreamKind::Bulk;
  std::uint64_t index = 0;

  friend auto operator<=>(const StreamId&, const StreamId&) = default;
};

std::uint64_t mix64(std::uint64_t z);

// splitmix64; used to seed substreams and as a cheap standalone generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// xoshiro256++ (Blackman & Vigna). 32 bytes of state, cheap enough to give
// every site its own generator.
class Xoshiro256pp {
 public:
  Xoshiro256pp() : Xoshiro256pp(0) {}
  explicit Xoshiro256pp(std::uint64_t seed);
  std::uint64_t next();
  // Strictly inside (0,1).
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  friend bool operator==(const Xoshiro256pp& a, const Xoshiro256pp& b) {
    return a.s_[0] == b.s_[0] && a.s_[1] == b.s_[1] && a.s_[2] == b.s_[2] && a.s_[3] == b.s_[3];
  }

 private:
  std::uint64_t s_[4];
};

// Deterministic, collision-resistant map (master seed, stream id) -> substream.
// Instantiating one stream never consumes randomness of another.
Xoshiro256pp derive_stream_rng(std::uint64_t master_seed, StreamId id);

double exponential_from_uniform(double u, double rate);
// Draws -ln(U)/rate, advancing the stream. Throws std::invalid_argument for
// rate <= 0 (a rate-0 stream produces no events; callers must not sample it).
double sample_exponential(Xoshiro256pp& rng, double rate);

struct ClockEvent {
  double time = 0.0;
  StreamId id;
  int slot = -1;
  double mark = 0.0;  // only meaningful for streams added with with_mark
};

// Chronological merge of lazily generated Poisson streams. Each stream keeps
// one pending arrival, regenerated when it is delivered. Streams can be
// deactivated and reactivated; by memorylessness a fresh exponential at
// reactivation time is exact. Exact time ties across streams are broken by
// StreamId order (a floating-point safeguard; probability 0 in law).
class ClockSet {
 public:
  explicit ClockSet(std::uint64_t master_seed) : master_(master_seed) {}

  // rate must be > 0; rate-0 streams are excluded from the merge by callers.
  int add_stream(StreamId id, double rate, bool with_mark = false);
  void activate(int slot, double now);
  void deactivate(int slot);
  void kill(int slot);  // permanently retire (window truncation front)
  bool active(int slot) const { return streams_[static_cast<std::size_t>(slot)].active; }

  // Delivers the earliest pending event with time <= limit and schedules that
  // stream's next arrival. Returns nullopt when nothing is pending by limit.
  std::optional<ClockEvent> next(double limit);

  std::uint64_t delivered() const { return delivered_; }

 private:
  struct Stream {
    StreamId id;
    double rate = 0.0;
    Xoshiro256pp rng;
    std::uint64_t gen = 0;
    double pending_mark = 0.0;
    bool active = false;
    bool dead = false;
    bool with_mark = false;
  };
  struct Entry {
    double time;
    StreamKind kind;
    std::uint64_t index;
    int slot;
    std::uint64_t gen;
  };

  void schedule(int slot, double now);
  static bool later(const Entry& a, const Entry& b);

  std::uint64_t master_;
  std::vector<Stream> streams_;
  std::vector<Entry> heap_;
  std::uint64_t delivered_ = 0;
};

}  // namespace tasep
