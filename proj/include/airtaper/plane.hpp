#ifndef AIRTAPER_PLANE_HPP
#define AIRTAPER_PLANE_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "airtaper/interp.hpp"

namespace airtaper {

/// Orthonormal basis of the plane perpendicular to a unit tangent q:
/// v1 = (a x q)/|a x q|, v2 = v1 x q, with a the canonical axis along which
/// q has its smallest component magnitude (ties broken x < y < z), so a and
/// q are never close to collinear.
inline std::pair<Vec3, Vec3> plane_basis(const Vec3& q) {
  double ax = std::abs(q.x), ay = std::abs(q.y), az = std::abs(q.z);
  Vec3 a{1, 0, 0};
  if (ay < ax && ay <= az)
    a = {0, 1, 0};
  else if (az < ax && az < ay)
    a = {0, 0, 1};
  Vec3 v1 = a.cross(q).normalized();
  Vec3 v2 = v1.cross(q);
  return {v1, v2};
}

/// Resampled cross-sectional image on a 0.3 mm isotropic grid centred on
/// the spline point, axes along the plane basis.
struct PlaneImage {
  static constexpr double kPixelMm = 0.3;

  int n = 0;  // pixels per side, odd so the centre lands on a pixel
  Vec3 origin, v1, v2;
  std::vector<double> data;

  double operator()(int a, int b) const { return data[size_t(b) * n + a]; }
  double& operator()(int a, int b) { return data[size_t(b) * n + a]; }

  int centre() const { return (n - 1) / 2; }
  double half_extent() const { return centre() * kPixelMm; }

  /// physical position of plane coordinates (alpha1, alpha2) in mm
  Vec3 position(double alpha1, double alpha2) const {
    return origin + v1 * alpha1 + v2 * alpha2;
  }

  /// bilinear sample at plane coordinates in mm relative to the centre
  double sample(double alpha1, double alpha2) const {
    double x = alpha1 / kPixelMm + centre();
    double y = alpha2 / kPixelMm + centre();
    if (x < 0 || y < 0 || x > n - 1 || y > n - 1)
      throw std::out_of_range("sample outside plane");
    int i0 = std::min(static_cast<int>(x), n - 2);
    int j0 = std::min(static_cast<int>(y), n - 2);
    double fx = x - i0, fy = y - j0;
    return (1 - fx) * (1 - fy) * (*this)(i0, j0) +
           fx * (1 - fy) * (*this)(i0 + 1, j0) +
           (1 - fx) * fy * (*this)(i0, j0 + 1) + fx * fy * (*this)(i0 + 1, j0 + 1);
  }
};

/// Sample the volume over the plane spanned by (v1, v2) around origin using
/// cubic interpolation. Mask grids yield fractional values; clamp01 keeps
/// them within [0, 1] where the kernel overshoots.
template <typename T>
PlaneImage sample_plane(const Grid3<T>& vol, const Vec3& origin, const Vec3& v1,
                        const Vec3& v2, double half_extent_mm,
                        bool clamp01 = false) {
  PlaneImage img;
  int half_pixels =
      static_cast<int>(std::ceil(half_extent_mm / PlaneImage::kPixelMm - 1e-9));
  img.n = 2 * half_pixels + 1;
  img.origin = origin;
  img.v1 = v1;
  img.v2 = v2;
  img.data.resize(size_t(img.n) * img.n);
  int c = img.centre();
  for (int b = 0; b < img.n; ++b)
    for (int a = 0; a < img.n; ++a) {
      Vec3 p = origin + v1 * ((a - c) * PlaneImage::kPixelMm) +
               v2 * ((b - c) * PlaneImage::kPixelMm);
      double s = sample_interpolated(vol, p, Interp::cubic);
      if (clamp01) s = std::clamp(s, 0.0, 1.0);
      img(a, b) = s;
    }
  return img;
}

}  // namespace airtaper

#endif
