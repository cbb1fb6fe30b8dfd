#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

// Deterministic random streams and low-discrepancy direction sampling.
//
// Every sampler in the certifiers draws from a stream keyed by
// (seed, sample index), so results do not depend on how a sample set is
// partitioned or ordered.

namespace prescurv::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Engine for sample `stream_id` of the run keyed by `seed`.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ull * (stream_id + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

/// Van der Corput radical inverse in the given base.
inline double halton(std::uint64_t index, unsigned base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

namespace detail {
inline double box_muller(double u1, double u2, bool second) {
  constexpr double kTiny = 1e-12;
  const double r = std::sqrt(-2.0 * std::log(u1 < kTiny ? kTiny : u1));
  const double a = 2.0 * M_PI * u2;
  return second ? r * std::sin(a) : r * std::cos(a);
}
}  // namespace detail

/// k-th vector of a low-discrepancy sequence on the Euclidean unit sphere
/// S^{dim-1}.  Halton points are pushed through Box-Muller so the sequence
/// stays equidistributed after normalization.
inline Eigen::VectorXd halton_unit_vector(std::uint64_t k, int dim) {
  static constexpr unsigned bases[8] = {2, 3, 5, 7, 11, 13, 17, 19};
  Eigen::VectorXd v(dim);
  const std::uint64_t idx = k + 1;  // skip the all-zero point
  for (int i = 0; i < dim; i += 2) {
    const double u1 = halton(idx, bases[i % 8]);
    const double u2 = halton(idx, bases[(i + 1) % 8]);
    v[i] = detail::box_muller(u1, u2, false);
    if (i + 1 < dim) v[i + 1] = detail::box_muller(u1, u2, true);
  }
  double norm = v.norm();
  if (norm < 1e-12) {
    v.setZero();
    v[0] = 1.0;
    norm = 1.0;
  }
  return v / norm;
}

}  // namespace prescurv::rng
