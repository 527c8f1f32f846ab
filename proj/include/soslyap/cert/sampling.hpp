#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "soslyap/error.hpp"

namespace soslyap {

inline double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

/// Halton points in [0,1)^dim, indices start..start+count-1.
inline std::vector<std::vector<double>> halton_points(std::size_t dim, std::size_t count, std::uint64_t start = 1) {
  static constexpr std::array<unsigned, 16> primes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (dim == 0 || dim > primes.size()) throw DimensionError("Halton sampling supports 1 to 16 dimensions");
  std::vector<std::vector<double>> out(count, std::vector<double>(dim));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t d = 0; d < dim; ++d) out[i][d] = radical_inverse(start + i, primes[d]);
  return out;
}

/// Halton points of [-1,1]^n pushed radially onto the unit sphere.
inline std::vector<std::vector<double>> sphere_samples(std::size_t n, std::size_t count = 500) {
  std::vector<std::vector<double>> out;
  std::uint64_t next = 1;
  while (out.size() < count) {
    auto batch = halton_points(n, count, next);
    next += count;
    for (auto& p : batch) {
      double r = 0.0;
      for (auto& x : p) {
        x = 2.0 * x - 1.0;
        r += x * x;
      }
      r = std::sqrt(r);
      if (r < 1e-3) continue;
      for (auto& x : p) x /= r;
      out.push_back(std::move(p));
      if (out.size() == count) break;
    }
  }
  return out;
}

/// Halton points of the box [-half_width, half_width]^n, origin excluded.
inline std::vector<std::vector<double>> box_samples(std::size_t n, std::size_t count = 500, double half_width = 3.0) {
  std::vector<std::vector<double>> out;
  std::uint64_t next = 1;
  while (out.size() < count) {
    auto batch = halton_points(n, count, next);
    next += count;
    for (auto& p : batch) {
      double r = 0.0;
      for (auto& x : p) {
        x = half_width * (2.0 * x - 1.0);
        r += x * x;
      }
      if (r < 1e-12) continue;
      out.push_back(std::move(p));
      if (out.size() == count) break;
    }
  }
  return out;
}

/// The fixed verification set: 500 sphere points followed by 500 box points.
inline std::vector<std::vector<double>> verification_samples(std::size_t n) {
  auto out = sphere_samples(n, 500);
  auto box = box_samples(n, 500);
  out.insert(out.end(), box.begin(), box.end());
  return out;
}

}  // namespace soslyap
