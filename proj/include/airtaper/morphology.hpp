#ifndef AIRTAPER_MORPHOLOGY_HPP
#define AIRTAPER_MORPHOLOGY_HPP

#include <vector>

#include "airtaper/grid.hpp"

namespace airtaper {

namespace detail {

// Integer offsets with euclidean norm <= r, voxel units (no anisotropy
// correction). r = 0 degenerates to the identity element.
inline std::vector<Index3> sphere_offsets(double r) {
  std::vector<Index3> offs;
  int ir = static_cast<int>(std::floor(r));
  double r2 = r * r;
  for (int dz = -ir; dz <= ir; ++dz)
    for (int dy = -ir; dy <= ir; ++dy)
      for (int dx = -ir; dx <= ir; ++dx)
        if (dx * dx + dy * dy + dz * dz <= r2) offs.push_back({dx, dy, dz});
  return offs;
}

}  // namespace detail

/// Keep a voxel iff every mask voxel within euclidean voxel distance r is
/// set. Positions outside the grid are not mask voxels and impose no
/// constraint, so masks touching the volume border are not eaten from it.
inline BinaryMask erode_sphere(const BinaryMask& m, double r) {
  if (r < 0) throw std::invalid_argument("erosion radius must be >= 0");
  auto offs = detail::sphere_offsets(r);
  BinaryMask out(m.dims, m.spacing, m.origin);
  for (int k = 0; k < m.dims.z; ++k)
    for (int j = 0; j < m.dims.y; ++j)
      for (int i = 0; i < m.dims.x; ++i) {
        if (!m(i, j, k)) continue;
        bool keep = true;
        for (const auto& o : offs) {
          int x = i + o.x, y = j + o.y, z = k + o.z;
          if (m.contains(x, y, z) && !m(x, y, z)) {
            keep = false;
            break;
          }
        }
        out(i, j, k) = keep;
      }
  return out;
}

inline BinaryMask dilate_sphere(const BinaryMask& m, double r) {
  if (r < 0) throw std::invalid_argument("dilation radius must be >= 0");
  auto offs = detail::sphere_offsets(r);
  BinaryMask out(m.dims, m.spacing, m.origin);
  for (int k = 0; k < m.dims.z; ++k)
    for (int j = 0; j < m.dims.y; ++j)
      for (int i = 0; i < m.dims.x; ++i) {
        if (!m(i, j, k)) continue;
        for (const auto& o : offs) {
          int x = i + o.x, y = j + o.y, z = k + o.z;
          if (m.contains(x, y, z)) out(x, y, z) = 1;
        }
      }
  return out;
}

/// Dilation followed by erosion with the same spherical element.
inline BinaryMask close_sphere(const BinaryMask& m, double r) {
  return erode_sphere(dilate_sphere(m, r), r);
}

}  // namespace airtaper

#endif
