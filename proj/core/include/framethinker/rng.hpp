#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace framethinker {

// mt19937_64 output is fixed by the standard; the distribution helpers below
// replace <random> distributions, whose output is implementation-defined.
using Rng = std::mt19937_64;

/// Derive an independent sub-stream seed from a global seed, a stream name and indices.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::initializer_list<std::uint64_t> indices = {});

inline Rng make_rng(std::uint64_t seed, std::string_view stream,
                    std::initializer_list<std::uint64_t> indices = {}) {
  return Rng(derive_seed(seed, stream, indices));
}

/// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Uniform real in [0, 1) with 53 bits of precision.
double uniform_unit(Rng& rng);

/// Uniform real in [lo, hi).
inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

}  // namespace framethinker
