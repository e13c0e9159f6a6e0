#pragma once

// Deterministic sampling helpers. The CLI promises byte-identical output
// for a fixed seed, so the draw path avoids distribution classes whose
// output is implementation-defined.

#include <cstdint>
#include <random>

#include "tetrakin/geometry.hpp"
#include "tetrakin/mechanism.hpp"

namespace tetrakin {

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline double normal01(Rng& rng) {
  // Marsaglia polar method
  for (;;) {
    const double x = 2.0 * uniform01(rng) - 1.0;
    const double y = 2.0 * uniform01(rng) - 1.0;
    const double r2 = x * x + y * y;
    if (r2 > 0.0 && r2 < 1.0) {
      return x * std::sqrt(-2.0 * std::log(r2) / r2);
    }
  }
}

inline Vec3 random_unit_vec(Rng& rng) {
  for (;;) {
    const Vec3 v(normal01(rng), normal01(rng), normal01(rng));
    const double n = v.norm();
    if (n > 1e-6) return v / n;
  }
}

/// Random rotation with the angle kept away from 0 and 2*pi so that the
/// axis-angle chart stays well-defined.
inline Mat3 random_rotation(Rng& rng, double angle_margin = 0.05) {
  const Vec3 u = random_unit_vec(rng);
  const double phi = uniform(rng, angle_margin, kTwoPi - angle_margin);
  return rotation_about(u, phi);
}

inline BoxDims random_box(Rng& rng, double lo = 0.5, double hi = 2.0) {
  return BoxDims(uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi));
}

/// Splits one master seed into independent per-item seeds, so sweeps can be
/// evaluated in any order (or in parallel) with identical results.
inline uint64_t mix_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace tetrakin
