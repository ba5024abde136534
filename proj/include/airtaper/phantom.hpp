#ifndef AIRTAPER_PHANTOM_HPP
#define AIRTAPER_PHANTOM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "airtaper/core.hpp"
#include "airtaper/grid.hpp"

// Synthetic CT tubes with analytic ground truth. The lumen radius follows
// r(s) = r0 * exp(T * s / 2) so the cross-sectional area decays as
// A(s) = pi * r0^2 * exp(T * s); the taper rate recovered by the pipeline is
// directly comparable to the T used to build the phantom.

namespace airtaper {

enum class PhantomShape { straight, helix, ysplit };

struct PhantomSpec {
  std::string id = "phantom";
  PhantomShape shape = PhantomShape::straight;

  double r0_mm = 4.0;
  double taper_per_mm = 0.0;  // <= 0 for tapering tubes
  double length_mm = 60.0;

  // helix
  double helix_radius_mm = 20.0;
  double helix_pitch_mm = 30.0;
  // ysplit
  double branch_angle_deg = 60.0;   // full angle between the two children
  double split_position_mm = 25.0;  // arclength of the junction

  double lumen_hu = -1000.0;
  double wall_hu = 0.0;
  double parenchyma_hu = -900.0;
  double wall_thickness_mm = 1.5;
  // PSF full width at half maximum ~0.71 mm, on the scale of clinical
  // in-plane voxel sizes; wider kernels depress the wall ridge and bias the
  // half-maximum edge measurably inward
  double psf_sigma_mm = 0.3;

  Index3 dims{64, 64, 80};
  Vec3 spacing{0.7, 0.7, 1.0};
  Vec3 origin{0, 0, 0};
};

struct PhantomTruth {
  PhantomShape shape = PhantomShape::straight;
  double r0_mm = 0, taper_per_mm = 0, length_mm = 0;
  double wall_thickness_mm = 0, psf_sigma_mm = 0;

  /// one polyline per airway (carina-to-distal sense); ysplit has two that
  /// share the parent run
  struct Path {
    std::vector<Vec3> points_mm;
    std::vector<double> arclength_mm;  // cumulative, same length as points
  };
  std::vector<Path> paths;

  Index3 trachea_start_voxel;
  std::vector<Index3> distal_voxels;
  /// arclength ranges around junctions where two lumens share cross sections
  std::vector<std::array<double, 2>> bifurcation_intervals_mm;

  double radius_at(double s) const {
    return r0_mm * std::exp(taper_per_mm * s / 2.0);
  }
  double area_at(double s) const {
    double r = radius_at(s);
    return kPi * r * r;
  }

  /// arclength of the nearest centreline point; used to map measurement
  /// stations back into the truth frame
  double arclength_at_point(const Vec3& p) const {
    double best_d = std::numeric_limits<double>::max(), best_s = 0;
    for (const auto& path : paths)
      for (size_t i = 0; i < path.points_mm.size(); ++i) {
        double d = (p - path.points_mm[i]).norm();
        if (d < best_d) {
          best_d = d;
          best_s = path.arclength_mm[i];
        }
      }
    return best_s;
  }
};

struct Phantom {
  CTVolume volume;
  BinaryMask mask;
  PhantomTruth truth;
};

/// pi * r(s)^2 for 0 <= s <= length
inline double analytic_area(const PhantomTruth& truth, double s) {
  if (s < 0 || s > truth.length_mm)
    throw std::out_of_range("arclength outside phantom range");
  return truth.area_at(s);
}

namespace detail {

// Nearest point on the centreline: axis distance plus the arclength there.
struct AxisHit {
  double dist;
  double arclength;
};

struct Segment {
  Vec3 a, b;
  double s0;  // arclength at a
  AxisHit nearest(const Vec3& p) const {
    Vec3 ab = b - a;
    double len2 = ab.dot(ab);
    double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    Vec3 q = a + ab * t;
    return {(p - q).norm(), s0 + std::sqrt(len2) * t};
  }
};

class PhantomGeometry {
 public:
  explicit PhantomGeometry(const PhantomSpec& spec) : spec_(spec) {
    double cx = spec.origin.x + (spec.dims.x - 1) * spec.spacing.x / 2.0;
    double cy = spec.origin.y + (spec.dims.y - 1) * spec.spacing.y / 2.0;
    // 5-voxel margin plus room for the rounded end cap and wall
    double z0 = spec.origin.z + 5.0 * spec.spacing.z + spec.r0_mm +
                spec.wall_thickness_mm;
    switch (spec.shape) {
      case PhantomShape::straight:
        segments_.push_back({{cx, cy, z0}, {cx, cy, z0 + spec.length_mm}, 0.0});
        break;
      case PhantomShape::ysplit: {
        double half = 0.5 * spec.branch_angle_deg * kPi / 180.0;
        double sj = spec.split_position_mm;
        Vec3 junction{cx, cy, z0 + sj};
        double child_len = spec.length_mm - sj;
        if (child_len <= 0)
          throw std::invalid_argument("split position beyond tube length");
        Vec3 dplus{std::sin(half), 0, std::cos(half)};
        Vec3 dminus{-std::sin(half), 0, std::cos(half)};
        segments_.push_back({{cx, cy, z0}, junction, 0.0});
        segments_.push_back({junction, junction + dplus * child_len, sj});
        segments_.push_back({junction, junction + dminus * child_len, sj});
        break;
      }
      case PhantomShape::helix:
        helix_center_ = {cx, cy, 0};
        helix_z0_ = z0;
        break;
    }
  }

  AxisHit nearest(const Vec3& p) const {
    if (spec_.shape != PhantomShape::helix) {
      AxisHit best{std::numeric_limits<double>::max(), 0};
      for (const auto& seg : segments_) {
        AxisHit h = seg.nearest(p);
        if (h.dist < best.dist) best = h;
      }
      return best;
    }
    return helix_nearest(p);
  }

  Vec3 point_at(double s) const {
    if (spec_.shape == PhantomShape::helix) return helix_point(s / helix_rate());
    // walk the (parent, +child) chain; straight tube is the degenerate case
    const Segment* seg = &segments_[0];
    if (segments_.size() > 1 && s > spec_.split_position_mm) seg = &segments_[1];
    Vec3 d = (seg->b - seg->a).normalized();
    return seg->a + d * (s - seg->s0);
  }

  /// dense truth polylines, one per distal point
  std::vector<PhantomTruth::Path> truth_paths(double step_mm) const {
    std::vector<PhantomTruth::Path> out;
    auto sample_chain = [&](const std::vector<const Segment*>& chain) {
      PhantomTruth::Path path;
      for (const Segment* seg : chain) {
        double len = (seg->b - seg->a).norm();
        Vec3 d = (seg->b - seg->a) / len;
        int n = std::max(1, static_cast<int>(std::ceil(len / step_mm)));
        int start = path.points_mm.empty() ? 0 : 1;
        for (int i = start; i <= n; ++i) {
          double t = len * i / n;
          path.points_mm.push_back(seg->a + d * t);
          path.arclength_mm.push_back(seg->s0 + t);
        }
      }
      return path;
    };
    switch (spec_.shape) {
      case PhantomShape::straight:
        out.push_back(sample_chain({&segments_[0]}));
        break;
      case PhantomShape::ysplit:
        out.push_back(sample_chain({&segments_[0], &segments_[1]}));
        out.push_back(sample_chain({&segments_[0], &segments_[2]}));
        break;
      case PhantomShape::helix: {
        PhantomTruth::Path path;
        int n = static_cast<int>(std::ceil(spec_.length_mm / step_mm));
        for (int i = 0; i <= n; ++i) {
          double s = spec_.length_mm * i / n;
          path.points_mm.push_back(point_at(s));
          path.arclength_mm.push_back(s);
        }
        out.push_back(path);
      }
    }
    return out;
  }

 private:
  double helix_rate() const {  // arclength per radian
    double c = spec_.helix_pitch_mm / (2 * kPi);
    return std::sqrt(spec_.helix_radius_mm * spec_.helix_radius_mm + c * c);
  }
  Vec3 helix_point(double phi) const {
    double R = spec_.helix_radius_mm, c = spec_.helix_pitch_mm / (2 * kPi);
    return {helix_center_.x + R * std::cos(phi), helix_center_.y + R * std::sin(phi),
            helix_z0_ + c * phi};
  }
  AxisHit helix_nearest(const Vec3& p) const {
    double R = spec_.helix_radius_mm, c = spec_.helix_pitch_mm / (2 * kPi);
    double phi_max = spec_.length_mm / helix_rate();
    // the tube is thin relative to the pitch, so the z-based estimate lands
    // in the right winding and Newton converges locally
    double phi = std::clamp((p.z - helix_z0_) / c, 0.0, phi_max);
    for (int it = 0; it < 24; ++it) {
      double cs = std::cos(phi), sn = std::sin(phi);
      double dx = p.x - (helix_center_.x + R * cs);
      double dy = p.y - (helix_center_.y + R * sn);
      double dz = p.z - (helix_z0_ + c * phi);
      // g = d/dphi of 0.5*|p-C|^2
      double g = -(dx * (-R * sn) + dy * (R * cs) + dz * c);
      double gp = R * R + c * c - (dx * (-R * cs) + dy * (-R * sn));
      double step = g / gp;
      phi -= step;
      phi = std::clamp(phi, 0.0, phi_max);
      if (std::abs(step) < 1e-12) break;
    }
    double d = (p - helix_point(phi)).norm();
    return {d, phi * helix_rate()};
  }

  PhantomSpec spec_;
  std::vector<Segment> segments_;
  Vec3 helix_center_;
  double helix_z0_ = 0;
};

inline std::vector<double> gaussian_kernel(double sigma_voxels) {
  int radius = std::max(1, static_cast<int>(std::ceil(3.5 * sigma_voxels)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    double w = std::exp(-0.5 * i * i / (sigma_voxels * sigma_voxels));
    k[i + radius] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

// separable blur with clamp-to-edge borders; axis: 0=x 1=y 2=z
inline void blur_axis(std::vector<double>& f, Index3 dims, int axis,
                      const std::vector<double>& kernel) {
  int radius = (static_cast<int>(kernel.size()) - 1) / 2;
  int n = axis == 0 ? dims.x : axis == 1 ? dims.y : dims.z;
  if (n == 1) return;
  size_t stride = axis == 0 ? 1
                 : axis == 1 ? static_cast<size_t>(dims.x)
                             : static_cast<size_t>(dims.x) * dims.y;
  size_t lines = f.size() / n;
  parallel_for(lines, [&](size_t line) {
    // decompose the line id into the two fixed coordinates
    size_t base;
    if (axis == 0) {
      size_t j = line % dims.y, k = line / dims.y;
      base = (k * dims.y + j) * dims.x;
    } else if (axis == 1) {
      size_t i = line % dims.x, k = line / dims.x;
      base = k * static_cast<size_t>(dims.x) * dims.y + i;
    } else {
      base = line;
    }
    std::vector<double> tmp(n);
    for (int q = 0; q < n; ++q) {
      double acc = 0;
      for (int t = -radius; t <= radius; ++t) {
        int src = std::clamp(q + t, 0, n - 1);
        acc += kernel[t + radius] * f[base + src * stride];
      }
      tmp[q] = acc;
    }
    for (int q = 0; q < n; ++q) f[base + q * stride] = tmp[q];
  });
}

}  // namespace detail

inline Phantom make_phantom(const PhantomSpec& spec) {
  if (spec.length_mm <= 0) throw std::invalid_argument("length must be positive");
  if (spec.r0_mm <= 0) throw std::invalid_argument("radius must be positive");
  double in_plane = std::max(spec.spacing.x, spec.spacing.y);
  double r_min = spec.r0_mm * std::exp(spec.taper_per_mm * spec.length_mm / 2.0);
  r_min = std::min(r_min, spec.r0_mm);
  if (r_min < 1.5 * in_plane)
    throw std::invalid_argument("tube radius under-resolved (< 1.5 in-plane voxels)");

  detail::PhantomGeometry geom(spec);

  PhantomTruth truth;
  truth.shape = spec.shape;
  truth.r0_mm = spec.r0_mm;
  truth.taper_per_mm = spec.taper_per_mm;
  truth.length_mm = spec.length_mm;
  truth.wall_thickness_mm = spec.wall_thickness_mm;
  truth.psf_sigma_mm = spec.psf_sigma_mm;
  truth.paths = geom.truth_paths(0.05);

  CTVolume volume(spec.dims, spec.spacing, spec.origin);
  BinaryMask mask(spec.dims, spec.spacing, spec.origin);

  // tube (lumen + wall) must stay inside the grid
  Vec3 lo = spec.origin;
  Vec3 hi = spec.origin + Vec3{(spec.dims.x - 1) * spec.spacing.x,
                               (spec.dims.y - 1) * spec.spacing.y,
                               (spec.dims.z - 1) * spec.spacing.z};
  for (const auto& path : truth.paths)
    for (size_t i = 0; i < path.points_mm.size(); ++i) {
      double reach = truth.radius_at(path.arclength_mm[i]) + spec.wall_thickness_mm;
      const Vec3& p = path.points_mm[i];
      if (p.x - reach < lo.x || p.x + reach > hi.x || p.y - reach < lo.y ||
          p.y + reach > hi.y || p.z - reach < lo.z || p.z + reach > hi.z)
        throw std::invalid_argument("tube exits grid");
    }

  const double half_diag = 0.5 * spec.spacing.norm();
  std::vector<double> field(volume.size());

  parallel_for(static_cast<size_t>(spec.dims.z), [&](size_t kz) {
    int k = static_cast<int>(kz);
    for (int j = 0; j < spec.dims.y; ++j)
      for (int i = 0; i < spec.dims.x; ++i) {
        Vec3 p = volume.voxel_center_mm(i, j, k);
        auto hit = geom.nearest(p);
        double r = truth.radius_at(hit.arclength);
        double sdf_lumen = hit.dist - r;
        double sdf_outer = hit.dist - (r + spec.wall_thickness_mm);
        mask(i, j, k) = sdf_lumen < 0 ? 1 : 0;

        double hu;
        if (std::abs(sdf_lumen) >= half_diag && std::abs(sdf_outer) >= half_diag) {
          hu = sdf_lumen < 0   ? spec.lumen_hu
               : sdf_outer < 0 ? spec.wall_hu
                               : spec.parenchyma_hu;
        } else {
          // boundary voxel: supersample the analytic coverage fractions
          const int N = 4;
          int n_lumen = 0, n_wall = 0, n_par = 0;
          for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
              for (int c = 0; c < N; ++c) {
                Vec3 q{p.x + ((a + 0.5) / N - 0.5) * spec.spacing.x,
                       p.y + ((b + 0.5) / N - 0.5) * spec.spacing.y,
                       p.z + ((c + 0.5) / N - 0.5) * spec.spacing.z};
                auto sh = geom.nearest(q);
                double rr = truth.radius_at(sh.arclength);
                if (sh.dist < rr)
                  ++n_lumen;
                else if (sh.dist < rr + spec.wall_thickness_mm)
                  ++n_wall;
                else
                  ++n_par;
              }
          double inv = 1.0 / (N * N * N);
          hu = inv * (n_lumen * spec.lumen_hu + n_wall * spec.wall_hu +
                      n_par * spec.parenchyma_hu);
        }
        field[volume.index(i, j, k)] = hu;
      }
  });

  if (spec.psf_sigma_mm > 0) {
    detail::blur_axis(field, spec.dims, 0,
                      detail::gaussian_kernel(spec.psf_sigma_mm / spec.spacing.x));
    detail::blur_axis(field, spec.dims, 1,
                      detail::gaussian_kernel(spec.psf_sigma_mm / spec.spacing.y));
    detail::blur_axis(field, spec.dims, 2,
                      detail::gaussian_kernel(spec.psf_sigma_mm / spec.spacing.z));
  }
  for (size_t i = 0; i < field.size(); ++i)
    volume.data[i] = static_cast<int16_t>(
        std::clamp<long>(std::lround(field[i]), -32768, 32767));

  // anchors: voxels just inside both ends of each airway
  auto snap_inside = [&](const Vec3& p) {
    Index3 v = mask.nearest_voxel(p);
    if (mask.contains(v) && mask(v.x, v.y, v.z)) return v;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          Index3 w{v.x + dx, v.y + dy, v.z + dz};
          if (mask.contains(w) && mask(w.x, w.y, w.z)) return w;
        }
    throw std::runtime_error("anchor fell outside the phantom lumen");
  };
  truth.trachea_start_voxel = snap_inside(geom.point_at(0.5));
  for (const auto& path : truth.paths)
    truth.distal_voxels.push_back(snap_inside(
        path.points_mm.back() -
        (path.points_mm.back() - path.points_mm[path.points_mm.size() - 2])
                .normalized() *
            0.5));

  if (spec.shape == PhantomShape::ysplit) {
    double sj = spec.split_position_mm;
    double theta = spec.branch_angle_deg * kPi / 180.0;
    double rj = truth.radius_at(sj) + spec.wall_thickness_mm;
    double margin = 2.0 * spec.psf_sigma_mm;
    double lo_s = std::max(0.0, sj - rj - margin);
    double hi_s = std::min(spec.length_mm,
                           sj + rj * (1 + std::cos(theta)) / std::sin(theta) + margin);
    truth.bifurcation_intervals_mm.push_back({lo_s, hi_s});
  }

  return Phantom{std::move(volume), std::move(mask), std::move(truth)};
}

}  // namespace airtaper

#endif
