#ifndef AIRTAPER_LUMEN_HPP
#define AIRTAPER_LUMEN_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "airtaper/plane.hpp"
#include "airtaper/spline.hpp"

namespace airtaper {

/// Paired 1D profiles along one radial ray: r_b from the mask plane
/// (fractional, in [0,1]) and r_c from the CT plane (HU). Samples sit a
/// fifth of a plane pixel apart.
struct RayPair {
  static constexpr double kStepMm = PlaneImage::kPixelMm / 5.0;

  double angle_rad = 0;
  std::vector<double> r_b;
  std::vector<double> r_c;
};

struct FwhmEdge {
  bool ok = false;
  double l_mm = 0;       // distance from the plane centre to the lumen edge
  double contrast = 0;   // I_max - I_min, HU
};

struct Ellipse {
  Vec3 centre{0, 0, 0};  // plane coordinates, z unused
  double a_mm = 0;       // semi-major
  double b_mm = 0;       // semi-minor
  double angle_rad = 0;
  double area_mm2() const { return kPi * a_mm * b_mm; }
};

/// Cast n radial rays from the plane centre, sampling both planes by linear
/// interpolation out to the plane border. The centre must lie inside the
/// lumen (mask value >= 0.5).
inline std::vector<RayPair> cast_rays(const PlaneImage& ct_plane,
                                      const PlaneImage& mask_plane,
                                      int n_rays = 50) {
  if (ct_plane.n != mask_plane.n)
    throw std::invalid_argument("plane size mismatch");
  if (mask_plane.sample(0, 0) < 0.5)
    throw std::domain_error("plane centre outside the lumen");
  std::vector<RayPair> rays(n_rays);
  double h = ct_plane.half_extent();
  for (int k = 0; k < n_rays; ++k) {
    double ang = 2 * kPi * k / n_rays;
    double ca = std::cos(ang), sa = std::sin(ang);
    // ray length: centre to the square plane border along this direction
    double p = h / std::max(std::abs(ca), std::abs(sa));
    int count = static_cast<int>(std::floor(p / RayPair::kStepMm)) + 1;
    RayPair& ray = rays[k];
    ray.angle_rad = ang;
    ray.r_b.resize(count);
    ray.r_c.resize(count);
    for (int i = 0; i < count; ++i) {
      double d = i * RayPair::kStepMm;
      ray.r_b[i] = mask_plane.sample(d * ca, d * sa);
      ray.r_c[i] = ct_plane.sample(d * ca, d * sa);
    }
  }
  return rays;
}

/// Edge-cued, segmentation-limited half-maximum edge: cue s where the mask
/// profile drops below one half, take the nearest strict local maximum of
/// the CT profile beyond s (searching outward keeps interpolation ripple in
/// the flat lumen from hijacking the wall peak), floor it with the minimum
/// intensity between the centre and that peak, and localize the half-rise
/// crossing with sub-sample linear interpolation. Rays whose mask never
/// opens or that carry no wall peak are rejected.
inline FwhmEdge fwhm_boundary(const RayPair& ray) {
  const auto& rb = ray.r_b;
  const auto& rc = ray.r_c;
  const int n = static_cast<int>(rc.size());
  FwhmEdge out;

  int s = -1;
  for (int i = 0; i < n; ++i)
    if (rb[i] < 0.5) {
      s = i;
      break;
    }
  if (s < 0) return out;  // ray leaves the plane inside the lumen

  int x_max = -1;
  for (int i = std::max(s, 1); i + 1 < n; ++i)
    if (rc[i] > rc[i - 1] && rc[i] > rc[i + 1]) {
      x_max = i;
      break;
    }
  if (x_max < 0) return out;  // wall peak not captured
  double i_max = rc[x_max];

  int x_min = 0;
  double i_min = rc[0];
  for (int i = 1; i <= x_max; ++i)
    if (rc[i] < i_min) {
      i_min = rc[i];
      x_min = i;
    }

  double level = 0.5 * (i_max + i_min);
  // walk down from the peak to the bracketing pair adjacent to it
  int i = x_max;
  while (i > x_min && rc[i - 1] > level) --i;
  double l_idx;
  if (i == x_min || rc[i] == rc[i - 1])
    l_idx = i;
  else
    l_idx = (i - 1) + (level - rc[i - 1]) / (rc[i] - rc[i - 1]);

  out.ok = true;
  out.l_mm = l_idx * RayPair::kStepMm;
  out.contrast = i_max - i_min;
  return out;
}

/// Direct least-squares conic fit with the ellipse constraint
/// 4ac - b^2 = 1 (stable block decomposition), returned as geometric
/// parameters. Needs at least six non-collinear points.
inline Ellipse fit_ellipse(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 6)
    throw std::invalid_argument("ellipse fit needs at least 6 points");

  double mx = 0, my = 0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= double(pts.size());
  my /= double(pts.size());

  const size_t n = pts.size();
  Eigen::MatrixXd d1(n, 3), d2(n, 3);
  for (size_t i = 0; i < n; ++i) {
    double x = pts[i].first - mx, y = pts[i].second - my;
    d1(i, 0) = x * x;
    d1(i, 1) = x * y;
    d1(i, 2) = y * y;
    d2(i, 0) = x;
    d2(i, 1) = y;
    d2(i, 2) = 1.0;
  }
  Eigen::Matrix3d s1 = d1.transpose() * d1;
  Eigen::Matrix3d s2 = d1.transpose() * d2;
  Eigen::Matrix3d s3 = d2.transpose() * d2;
  if (std::abs(s3.determinant()) < 1e-12)
    throw std::invalid_argument("degenerate point set for ellipse fit");
  Eigen::Matrix3d t = -s3.inverse() * s2.transpose();
  Eigen::Matrix3d m = s1 + s2 * t;
  Eigen::Matrix3d m2;
  m2.row(0) = m.row(2) / 2.0;
  m2.row(1) = -m.row(1);
  m2.row(2) = m.row(0) / 2.0;

  Eigen::EigenSolver<Eigen::Matrix3d> eig(m2);
  Eigen::Vector3d a1;
  bool found = false;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(eig.eigenvalues()[i].imag()) > 1e-9) continue;
    Eigen::Vector3d v = eig.eigenvectors().col(i).real();
    double cond = 4 * v(0) * v(2) - v(1) * v(1);
    if (cond > 0) {
      a1 = v / std::sqrt(cond);  // impose 4ac - b^2 = 1
      found = true;
      break;
    }
  }
  if (!found) throw std::invalid_argument("points do not determine an ellipse");
  Eigen::Vector3d a2 = t * a1;

  // conic in centred coordinates, then shift back
  double a = a1(0), b = a1(1), c = a1(2);
  double d = a2(0), e = a2(1), f = a2(2);
  double dd = d - 2 * a * mx - b * my;
  double ee = e - b * mx - 2 * c * my;
  double ff = f + a * mx * mx + b * mx * my + c * my * my - d * mx - e * my;
  d = dd;
  e = ee;
  f = ff;

  double denom = 4 * a * c - b * b;  // > 0 by the constraint
  double cx = (b * e - 2 * c * d) / denom;
  double cy = (b * d - 2 * a * e) / denom;
  double f0 = a * cx * cx + b * cx * cy + c * cy * cy + d * cx + e * cy + f;

  // eigenvalues of the quadratic part [[a, b/2], [b/2, c]]
  double tr = a + c;
  double det_q = a * c - b * b / 4.0;
  double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det_q));
  double l1 = tr / 2.0 - disc, l2 = tr / 2.0 + disc;  // l1 <= l2
  double major2 = -f0 / l1, minor2 = -f0 / l2;
  if (!(major2 > 0) || !(minor2 > 0))
    throw std::invalid_argument("conic is not a real ellipse");

  Ellipse el;
  el.centre = {cx, cy, 0};
  el.a_mm = std::sqrt(major2);
  el.b_mm = std::sqrt(minor2);
  // major axis = eigenvector of the smaller eigenvalue of the quadratic part
  double vx, vy;
  if (std::abs(b) > 1e-14) {
    vx = l1 - c;
    vy = b / 2.0;
  } else {
    vx = a <= c ? 1.0 : 0.0;
    vy = a <= c ? 0.0 : 1.0;
  }
  el.angle_rad = std::atan2(vy, vx);
  if (el.angle_rad < 0) el.angle_rad += kPi;
  return el;
}

/// Sequence of (arclength, cross-sectional area) stations along one airway.
struct LumenProfile {
  struct Station {
    double t = 0;             // spline parameter
    double arclength_mm = 0;  // from the carina
    double area_mm2 = 0;
    int n_rays = 0;           // surviving rays behind the ellipse fit
    bool missing = true;
    bool low_contrast = false;
  };
  std::string airway_id;
  std::vector<Station> stations;

  size_t valid_count() const {
    size_t n = 0;
    for (const auto& s : stations) n += !s.missing;
    return n;
  }
};

struct MeasureOptions {
  double station_step = 0.25;       // spline parameter units (~mm here)
  int n_rays = 50;
  int min_rays = 25;                // stations with fewer survivors are skipped
  double base_half_extent_mm = 12.0;
  double low_contrast_hu = 50.0;
  double max_probe_mm = 30.0;
};

namespace detail {

// estimate the local lumen radius by probing the mask along in-plane
// directions; sizes the sampling plane for airways wider than the default
template <typename TM>
double probe_lumen_radius(const Grid3<TM>& mask, const Vec3& origin,
                          const Vec3& v1, const Vec3& v2, double max_mm) {
  double worst = 0;
  for (int k = 0; k < 8; ++k) {
    double ang = 2 * kPi * k / 8;
    Vec3 dir = v1 * std::cos(ang) + v2 * std::sin(ang);
    double d = 0;
    while (d < max_mm) {
      d += 0.5;
      double v;
      try {
        v = sample_interpolated(mask, origin + dir * d, Interp::linear);
      } catch (const std::domain_error&) {
        break;
      }
      if (v < 0.5) break;
    }
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace detail

/// Walk the spline at fixed parameter steps and measure the lumen area on
/// each orthogonal plane: FWHM boundary points from 50 rays, then a direct
/// least-squares ellipse. Stations that cannot be measured (plane outside
/// the volume, centre outside the mask, too few surviving rays, degenerate
/// fit) are recorded as missing and the profile continues.
inline LumenProfile measure_profile(const CTVolume& ct, const BinaryMask& mask,
                                    const AirwaySpline& sp,
                                    const MeasureOptions& opt = {},
                                    const std::string& airway_id = "airway") {
  require_same_geometry(ct, mask);
  LumenProfile profile;
  profile.airway_id = airway_id;

  int n_stations =
      static_cast<int>(std::floor(sp.parameter_end() / opt.station_step)) + 1;
  profile.stations.resize(n_stations);

  parallel_for(static_cast<size_t>(n_stations), [&](size_t si) {
    auto& st = profile.stations[si];
    st.t = si * opt.station_step;
    try {
      st.arclength_mm = arc_length(sp, st.t);
      Vec3 origin = sp.eval(st.t);
      Vec3 q = tangent(sp, st.t);
      auto [v1, v2] = plane_basis(q);

      double rho =
          detail::probe_lumen_radius(mask, origin, v1, v2, opt.max_probe_mm);
      double half_extent = std::max(opt.base_half_extent_mm, 1.5 * rho);

      PlaneImage ct_plane = sample_plane(ct, origin, v1, v2, half_extent);
      PlaneImage mask_plane =
          sample_plane(mask, origin, v1, v2, half_extent, true);

      auto rays = cast_rays(ct_plane, mask_plane, opt.n_rays);
      std::vector<std::pair<double, double>> edge_pts;
      double contrast_sum = 0;
      for (const auto& ray : rays) {
        FwhmEdge e = fwhm_boundary(ray);
        if (!e.ok) continue;
        edge_pts.push_back({e.l_mm * std::cos(ray.angle_rad),
                            e.l_mm * std::sin(ray.angle_rad)});
        contrast_sum += e.contrast;
      }
      if (static_cast<int>(edge_pts.size()) < opt.min_rays) return;

      Ellipse el = fit_ellipse(edge_pts);
      st.area_mm2 = el.area_mm2();
      st.n_rays = static_cast<int>(edge_pts.size());
      st.low_contrast =
          contrast_sum / double(edge_pts.size()) < opt.low_contrast_hu;
      st.missing = false;
    } catch (const std::exception&) {
      st.missing = true;  // station skipped, profile continues
    }
  });
  return profile;
}

}  // namespace airtaper

#endif
