#pragma once

#include <cstdint>
#include <random>

#include "ppwave/model.hpp"

namespace ppwave {

/// Seeded source for all randomized sweeps. Streams are derived from (seed, stream)
/// so parallel workers draw reproducibly regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  Vec uniform_vec(int size, double bound) {
    Vec v(size);
    for (int k = 0; k < size; ++k) v(k) = uniform(-bound, bound);
    return v;
  }

  Point point(int fiber_dim, double t_bound, double s_bound, double v_bound) {
    Point p;
    p.t = uniform(-t_bound, t_bound);
    p.s = uniform(-s_bound, s_bound);
    p.v = uniform_vec(fiber_dim, v_bound);
    return p;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ppwave
