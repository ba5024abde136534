#ifndef AIRTAPER_INTERP_HPP
#define AIRTAPER_INTERP_HPP

#include <cmath>
#include <stdexcept>

#include "airtaper/grid.hpp"

namespace airtaper {

enum class Interp { linear, cubic };

namespace detail {

// Keys cubic-convolution kernel, a = -0.5. Reproduces polynomials up to
// degree 1 and hits voxel values exactly at integer offsets.
inline void cubic_weights(double f, double w[4]) {
  const double a = -0.5;
  double f2 = f * f, f3 = f2 * f;
  w[0] = a * (f3 - 2 * f2 + f);
  w[1] = (a + 2) * f3 - (a + 3) * f2 + 1;
  w[2] = -(a + 2) * f3 + (2 * a + 3) * f2 - a * f;
  w[3] = a * (f2 - f3);
}

}  // namespace detail

/// Interpolated sample at physical point p (mm). Queries outside the valid
/// support (one voxel short of the border for cubic) are an error rather
/// than clamped; clamping would silently corrupt measurements near the
/// volume border.
template <typename T>
double sample_interpolated(const Grid3<T>& g, const Vec3& p, Interp scheme) {
  Vec3 u = g.mm_to_voxel(p);
  if (scheme == Interp::linear) {
    const double eps = 1e-12;
    if (u.x < -eps || u.y < -eps || u.z < -eps || u.x > g.dims.x - 1 + eps ||
        u.y > g.dims.y - 1 + eps || u.z > g.dims.z - 1 + eps)
      throw std::domain_error("sample outside volume bounds");
    int i0 = std::min(static_cast<int>(std::floor(u.x)), g.dims.x - 2);
    int j0 = std::min(static_cast<int>(std::floor(u.y)), g.dims.y - 2);
    int k0 = std::min(static_cast<int>(std::floor(u.z)), g.dims.z - 2);
    i0 = std::max(i0, 0);
    j0 = std::max(j0, 0);
    k0 = std::max(k0, 0);
    double fx = u.x - i0, fy = u.y - j0, fz = u.z - k0;
    double acc = 0;
    for (int dk = 0; dk < 2; ++dk)
      for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di) {
          double w = (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) * (dk ? fz : 1 - fz);
          acc += w * static_cast<double>(g(i0 + di, j0 + dj, k0 + dk));
        }
    return acc;
  }

  // cubic convolution needs the full 4x4x4 neighbourhood
  const double eps = 1e-12;
  if (u.x < 1 - eps || u.y < 1 - eps || u.z < 1 - eps ||
      u.x > g.dims.x - 2 + eps || u.y > g.dims.y - 2 + eps ||
      u.z > g.dims.z - 2 + eps)
    throw std::domain_error("sample outside cubic interpolation support");
  int i1 = std::min(static_cast<int>(std::floor(u.x)), g.dims.x - 3);
  int j1 = std::min(static_cast<int>(std::floor(u.y)), g.dims.y - 3);
  int k1 = std::min(static_cast<int>(std::floor(u.z)), g.dims.z - 3);
  i1 = std::max(i1, 1);
  j1 = std::max(j1, 1);
  k1 = std::max(k1, 1);
  double wx[4], wy[4], wz[4];
  detail::cubic_weights(u.x - i1, wx);
  detail::cubic_weights(u.y - j1, wy);
  detail::cubic_weights(u.z - k1, wz);
  double acc = 0;
  for (int dk = 0; dk < 4; ++dk) {
    double az = wz[dk];
    if (az == 0) continue;
    for (int dj = 0; dj < 4; ++dj) {
      double ayz = az * wy[dj];
      const T* row = &g.data[g.index(i1 - 1, j1 - 1 + dj, k1 - 1 + dk)];
      acc += ayz * (wx[0] * row[0] + wx[1] * row[1] + wx[2] * row[2] +
                    wx[3] * row[3]);
    }
  }
  return acc;
}

}  // namespace airtaper

#endif
