#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "tegnas/error.hpp"

namespace tegnas::numkit {

/// SplitMix64 finalizer; used only to derive child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded, splittable generator. `split(k)` gives an independent stream keyed
/// by (seed, k) without touching this generator's state, so parallel tasks can
/// each own one and results do not depend on scheduling.
class Rng {
 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  Rng split(std::uint64_t stream) const { return Rng(mix64(seed_ ^ mix64(stream + 0x632be59bd9b4e019ULL))); }

  std::uint64_t next_u64() { return engine_(); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    if (n == 0) throw Error(Errc::ShapeMismatch, "Rng::index on empty range");
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  Engine& engine() noexcept { return engine_; }

  /// Textual engine state, for checkpoints.
  std::string state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }
  static Rng restore(std::uint64_t seed, const std::string& state) {
    Rng r(seed);
    std::istringstream is(state);
    is >> r.engine_;
    if (!is) throw Error(Errc::ParseError, "corrupt rng state");
    return r;
  }

  friend bool operator==(const Rng& a, const Rng& b) { return a.seed_ == b.seed_ && a.engine_ == b.engine_; }

 private:
  std::uint64_t seed_;
  Engine engine_;
};

}  // namespace tegnas::numkit
