#pragma once

// Small seeded generators for property tests. Each property draws its cases
// from a fixed seed so failures replay exactly.

#include <cstdint>
#include <random>
#include <vector>

#include "reclab/core.hpp"

namespace gen {

using reclab::Rng;

inline Rng rng(std::uint64_t seed) { return reclab::RngSeed{seed, {"property"}}.stream(); }

inline double real(Rng& r, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(r); }

inline std::size_t size(Rng& r, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(r);
}

inline std::vector<double> reals(Rng& r, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = real(r, lo, hi);
  return v;
}

/// Ratings on a coarse grid so ties occur.
inline std::vector<double> coarse(Rng& r, std::size_t n, int levels = 5) {
  std::vector<double> v(n);
  for (auto& x : v) x = 1.0 + static_cast<double>(size(r, 0, static_cast<std::size_t>(levels - 1)));
  return v;
}

/// Random observation set with roughly `density` of pairs rated.
inline reclab::ObservationSet observations(Rng& r, std::size_t users, std::size_t items, double density,
                                           bool integer_ratings = true) {
  reclab::ObservationSet obs(users, items);
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t i = 0; i < items; ++i) {
      if (real(r, 0, 1) < density) {
        const double rating = integer_ratings ? 1.0 + static_cast<double>(size(r, 0, 4)) : real(r, 1, 5);
        obs.insert({u, i, rating, 0});
      }
    }
  }
  return obs;
}

}  // namespace gen
