#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tegnas/numkit/rng.hpp"

namespace tegnas::numkit {

/// Fills `out` with N(0, 2/fan_in) draws.
inline void kaiming_fill(Rng& rng, std::size_t fan_in, std::span<double> out) {
  if (fan_in == 0) throw Error(Errc::ZeroFanIn, "fan_in must be at least 1");
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (auto& v : out) v = stddev * rng.normal();
}

/// Kaiming-normal tensor with the given shape, returned flat (row-major).
inline std::vector<double> kaiming_normal(Rng& rng, std::size_t fan_in, std::span<const std::size_t> shape) {
  std::size_t count = 1;
  for (auto s : shape) count *= s;
  std::vector<double> out(count);
  kaiming_fill(rng, fan_in, out);
  return out;
}

}  // namespace tegnas::numkit
