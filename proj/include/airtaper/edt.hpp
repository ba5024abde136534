#ifndef AIRTAPER_EDT_HPP
#define AIRTAPER_EDT_HPP

#include <limits>

#include "airtaper/grid.hpp"

namespace airtaper {

namespace detail {

// Felzenszwalb-Huttenlocher 1D squared distance transform (lower envelope
// of parabolas). f/d may alias distinct buffers of length n.
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d,
                   std::vector<int>& v, std::vector<double>& z, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

/// Exact euclidean distance (voxel units) to the nearest background pixel
/// for one axial slice. Everything outside the slice counts as background,
/// which keeps the transform finite on all-foreground slices.
inline DistanceImage edt_2d(const BinaryMask& m, int slice_index) {
  if (slice_index < 0 || slice_index >= m.dims.z)
    throw std::out_of_range("slice index out of range");
  const int w = m.dims.x, h = m.dims.y;
  // finite "no seed" sentinel; infinities would feed inf-inf = NaN into the
  // envelope arithmetic
  const double unseeded = 1e20;

  std::vector<double> g(static_cast<size_t>(w) * h);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      g[size_t(j) * w + i] = m(i, j, slice_index) ? unseeded : 0.0;

  int nmax = std::max(w, h);
  std::vector<double> f(nmax), d(nmax), z(nmax + 1);
  std::vector<int> v(nmax);

  // columns, then rows
  for (int i = 0; i < w; ++i) {
    for (int j = 0; j < h; ++j) f[j] = g[size_t(j) * w + i];
    detail::edt_1d(f, d, v, z, h);
    for (int j = 0; j < h; ++j) g[size_t(j) * w + i] = d[j];
  }
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) f[i] = g[size_t(j) * w + i];
    detail::edt_1d(f, d, v, z, w);
    for (int i = 0; i < w; ++i) g[size_t(j) * w + i] = d[i];
  }

  DistanceImage out(w, h);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      if (!m(i, j, slice_index)) continue;  // zero exactly on background
      double border = std::min(std::min(i + 1, w - i), std::min(j + 1, h - j));
      out(i, j) = std::min(std::sqrt(g[size_t(j) * w + i]), border);
    }
  return out;
}

}  // namespace airtaper

#endif
