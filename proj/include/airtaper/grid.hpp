#ifndef AIRTAPER_GRID_HPP
#define AIRTAPER_GRID_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "airtaper/core.hpp"

namespace airtaper {

/// Regular 3D grid with anisotropic spacing. Voxel (i,j,k) is centred at
/// origin + (i*sx, j*sy, k*sz) mm; data is x-fastest. Treated as immutable
/// once filled, so instances can be shared freely across threads.
template <typename T>
struct Grid3 {
  Index3 dims;
  Vec3 spacing{1, 1, 1};
  Vec3 origin{0, 0, 0};
  std::vector<T> data;

  Grid3() = default;
  Grid3(Index3 d, Vec3 sp, Vec3 org = {0, 0, 0})
      : dims(d), spacing(sp), origin(org),
        data(static_cast<size_t>(d.x) * d.y * d.z) {
    if (d.x <= 0 || d.y <= 0 || d.z <= 0)
      throw std::invalid_argument("grid dims must be positive");
    if (sp.x <= 0 || sp.y <= 0 || sp.z <= 0)
      throw std::invalid_argument("grid spacing must be positive");
  }

  size_t size() const { return data.size(); }
  size_t index(int i, int j, int k) const {
    return static_cast<size_t>(i) +
           static_cast<size_t>(dims.x) * (static_cast<size_t>(j) +
                                          static_cast<size_t>(dims.y) * k);
  }
  T operator()(int i, int j, int k) const { return data[index(i, j, k)]; }
  T& operator()(int i, int j, int k) { return data[index(i, j, k)]; }

  bool contains(int i, int j, int k) const {
    return i >= 0 && i < dims.x && j >= 0 && j < dims.y && k >= 0 && k < dims.z;
  }
  bool contains(const Index3& v) const { return contains(v.x, v.y, v.z); }

  Vec3 voxel_center_mm(int i, int j, int k) const {
    return {origin.x + i * spacing.x, origin.y + j * spacing.y,
            origin.z + k * spacing.z};
  }
  Vec3 voxel_center_mm(const Index3& v) const {
    return voxel_center_mm(v.x, v.y, v.z);
  }
  /// Continuous voxel coordinate of a physical point (no bounds check).
  Vec3 mm_to_voxel(const Vec3& p) const {
    return {(p.x - origin.x) / spacing.x, (p.y - origin.y) / spacing.y,
            (p.z - origin.z) / spacing.z};
  }
  Index3 nearest_voxel(const Vec3& p) const {
    Vec3 u = mm_to_voxel(p);
    return {static_cast<int>(std::lround(u.x)), static_cast<int>(std::lround(u.y)),
            static_cast<int>(std::lround(u.z))};
  }
};

/// CT intensities in Hounsfield units (int16 semantics).
using CTVolume = Grid3<int16_t>;
/// Airway segmentation aligned to its companion CTVolume; nonzero = inside.
using BinaryMask = Grid3<uint8_t>;

/// Euclidean distances on one axial slice, voxel units.
struct DistanceImage {
  int width = 0, height = 0;
  std::vector<double> data;

  DistanceImage() = default;
  DistanceImage(int w, int h) : width(w), height(h), data(size_t(w) * h, 0.0) {}
  double operator()(int i, int j) const { return data[size_t(j) * width + i]; }
  double& operator()(int i, int j) { return data[size_t(j) * width + i]; }
};

inline void require_same_geometry(const CTVolume& v, const BinaryMask& m) {
  if (!(v.dims == m.dims) || (v.spacing - m.spacing).norm() > 1e-9)
    throw std::invalid_argument("volume/mask geometry mismatch");
}

inline size_t count_set(const BinaryMask& m) {
  size_t n = 0;
  for (uint8_t v : m.data) n += (v != 0);
  return n;
}

}  // namespace airtaper

#endif
