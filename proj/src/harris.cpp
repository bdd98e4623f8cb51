#include "tasep/harris.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tasep {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {
inline std::uint64_t rotl64(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  SplitMix64 sm(seed);
  s_[0] = sm.next();
  s_[1] = sm.next();
  s_[2] = sm.next();
  s_[3] = sm.next();
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is invalid
}

std::uint64_t Xoshiro256pp::next() {
  const std::uint64_t result = rotl64(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl64(s_[3], 45);
  return result;
}

Xoshiro256pp derive_stream_rng(std::uint64_t master_seed, StreamId id) {
  std::uint64_t h = master_seed ^ 0x9E3779B97F4A7C15ULL;
  h = mix64(h ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(id.kind)));
  h = mix64(h ^ (0x8CB92BA72F3D8DD7ULL * (id.index + 1)));
  return Xoshiro256pp(h);
}

double exponential_from_uniform(double u, double rate) {
  return -std::log(u) / rate;
}

double sample_exponential(Xoshiro256pp& rng, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be > 0");
  return exponential_from_uniform(rng.uniform01(), rate);
}

int ClockSet::add_stream(StreamId id, double rate, bool with_mark) {
  if (!(rate > 0.0)) throw std::invalid_argument("clock stream rate must be > 0");
  Stream s;
  s.id = id;
  s.rate = rate;
  s.rng = derive_stream_rng(master_, id);
  s.with_mark = with_mark;
  streams_.push_back(s);
  return static_cast<int>(streams_.size()) - 1;
}

// Min-heap ordering: time, then StreamId (deterministic tie-break).
bool ClockSet::later(const Entry& a, const Entry& b) {
  if (a.time != b.time) return a.time > b.time;
  if (a.kind != b.kind) return a.kind > b.kind;
  return a.index > b.index;
}

void ClockSet::schedule(int slot, double now) {
  Stream& s = streams_[static_cast<std::size_t>(slot)];
  double wait = sample_exponential(s.rng, s.rate);
  if (s.with_mark) s.pending_mark = s.rng.uniform01();
  heap_.push_back({now + wait, s.id.kind, s.id.index, slot, s.gen});
  std::push_heap(heap_.begin(), heap_.end(), later);
}

void ClockSet::activate(int slot, double now) {
  Stream& s = streams_[static_cast<std::size_t>(slot)];
  if (s.active || s.dead) return;
  s.active = true;
  ++s.gen;
  schedule(slot, now);
}

void ClockSet::deactivate(int slot) {
  Stream& s = streams_[static_cast<std::size_t>(slot)];
  if (!s.active) return;
  s.active = false;
  ++s.gen;  // invalidates the pending heap entry
}

void ClockSet::kill(int slot) {
  deactivate(slot);
  streams_[static_cast<std::size_t>(slot)].dead = true;
}

std::optional<ClockEvent> ClockSet::next(double limit) {
  for (;;) {
    while (!heap_.empty()) {
      const Entry& top = heap_.front();
      const Stream& s = streams_[static_cast<std::size_t>(top.slot)];
      if (top.gen == s.gen && s.active) break;
      std::pop_heap(heap_.begin(), heap_.end(), later);  // stale
      heap_.pop_back();
    }
    if (heap_.empty()) return std::nullopt;
    Entry top = heap_.front();
    if (top.time > limit) return std::nullopt;
    std::pop_heap(heap_.begin(), heap_.end(), later);
    heap_.pop_back();
    Stream& s = streams_[static_cast<std::size_t>(top.slot)];
    ClockEvent ev{top.time, s.id, top.slot, s.pending_mark};
    schedule(top.slot, top.time);  // one pending arrival at all times while active
    ++delivered_;
    return ev;
  }
}

}  // namespace tasep
