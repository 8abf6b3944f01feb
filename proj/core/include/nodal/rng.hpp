#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace nodal {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).  The output
// for a given (key, counter) is a pure function, so a draw can be addressed
// directly by (master seed, sample index, pair index) without any shared
// generator state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

// Stream address for one field realization.
struct StreamId {
  std::uint64_t seed = 0;
  std::uint64_t sample = 0;
};

// Two independent standard normals for draw `index` of `stream`.
std::pair<double, double> normal_pair(StreamId stream, std::uint64_t index);

// Uniform variate in (0, 1) addressed like normal_pair; `lane` picks one of
// four 32-bit words combined pairwise into 53-bit mantissas.
double uniform01(StreamId stream, std::uint64_t index, int lane = 0);

}  // namespace nodal
