#pragma once

/// Deterministic, implementation-independent random field generators
/// (splitmix64 core; no std distributions so streams are bit-portable).

#include <cstdint>

#include "hydrostab/grid.hpp"

namespace hydrostab {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

  private:
    std::uint64_t state_;
};

/// Random clamped streamfunction: uniform(-1,1) on free interior nodes,
/// then `smooth_passes` Jacobi sweeps (clamp preserved).
ScalarField random_clamped_psi(const Grid& g, Rng& rng, int smooth_passes = 2);

/// Random cell scalar, smoothed the same way.
ScalarField random_smooth_cell(const Grid& g, Rng& rng, int smooth_passes = 2);

/// Band-limited random clamped streamfunction: random coefficients on sine
/// modes up to `max_mode` per direction, under a sin^2 clamp envelope.
ScalarField random_lowmode_psi(const Grid& g, Rng& rng, int max_mode = 3);

/// Band-limited random cell scalar on cosine modes up to `max_mode`.
ScalarField random_lowmode_cell(const Grid& g, Rng& rng, int max_mode = 3);

}  // namespace hydrostab
