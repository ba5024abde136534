#ifndef AIRTAPER_SPLINE_HPP
#define AIRTAPER_SPLINE_HPP

#include <algorithm>
#include <vector>

#include "airtaper/core.hpp"
#include "airtaper/grid.hpp"
#include "airtaper/skeleton.hpp"

namespace airtaper {

/// Voxel path to millimetres plus five-point smoothing: each point becomes
/// the mean of a window of up to five path neighbours, shrinking
/// symmetrically near the ends so the endpoints pass through unchanged.
inline std::vector<Vec3> smooth_path(const AirwayPath& p, const Vec3& spacing,
                                     const Vec3& origin = {0, 0, 0}) {
  if (p.voxels.size() < 2)
    throw std::invalid_argument("path needs at least two voxels");
  std::vector<Vec3> mm(p.voxels.size());
  for (size_t i = 0; i < p.voxels.size(); ++i)
    mm[i] = {origin.x + p.voxels[i].x * spacing.x,
             origin.y + p.voxels[i].y * spacing.y,
             origin.z + p.voxels[i].z * spacing.z};
  std::vector<Vec3> out(mm.size());
  const int n = static_cast<int>(mm.size());
  for (int i = 0; i < n; ++i) {
    int half = std::min({2, i, n - 1 - i});
    Vec3 acc{0, 0, 0};
    for (int t = -half; t <= half; ++t) acc += mm[i + t];
    out[i] = acc / double(2 * half + 1);
  }
  return out;
}

/// Interpolating natural cubic spline through 3D points with knots at the
/// cumulative chord length. Coefficients are stored per segment in the
/// local parameter u = t - k_i.
class AirwaySpline {
 public:
  AirwaySpline(std::vector<double> knots, std::vector<std::array<Vec3, 4>> coef)
      : knots_(std::move(knots)), coef_(std::move(coef)) {}

  const std::vector<double>& knots() const { return knots_; }
  double parameter_end() const { return knots_.back(); }
  size_t segments() const { return coef_.size(); }

  Vec3 eval(double t) const {
    auto [i, u] = locate(t);
    const auto& c = coef_[i];
    return c[0] + c[1] * u + c[2] * (u * u) + c[3] * (u * u * u);
  }
  Vec3 derivative(double t) const {
    auto [i, u] = locate(t);
    const auto& c = coef_[i];
    return c[1] + c[2] * (2 * u) + c[3] * (3 * u * u);
  }
  Vec3 second_derivative(double t) const {
    auto [i, u] = locate(t);
    const auto& c = coef_[i];
    return c[2] * 2.0 + c[3] * (6 * u);
  }

  /// evaluate segment i at global parameter t without snapping to the
  /// segment that owns t; used by continuity checks
  Vec3 eval_segment(size_t i, double t, int order) const {
    double u = t - knots_[i];
    const auto& c = coef_[i];
    switch (order) {
      case 0:
        return c[0] + c[1] * u + c[2] * (u * u) + c[3] * (u * u * u);
      case 1:
        return c[1] + c[2] * (2 * u) + c[3] * (3 * u * u);
      default:
        return c[2] * 2.0 + c[3] * (6 * u);
    }
  }

  const std::vector<double>& knot_arclengths() const { return cum_arclength_; }
  void set_knot_arclengths(std::vector<double> cum) {
    cum_arclength_ = std::move(cum);
  }

 private:
  std::pair<size_t, double> locate(double t) const {
    const double eps = 1e-9;
    if (t < -eps || t > knots_.back() + eps)
      throw std::out_of_range("spline parameter out of range");
    t = std::clamp(t, 0.0, knots_.back());
    size_t i =
        std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin();
    i = i == 0 ? 0 : i - 1;
    i = std::min(i, coef_.size() - 1);
    return {i, t - knots_[i]};
  }

  std::vector<double> knots_;
  std::vector<std::array<Vec3, 4>> coef_;
  std::vector<double> cum_arclength_;
};

namespace detail {

// 10-point Gauss-Legendre on [-1, 1]
inline constexpr double kGlNodes[10] = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244,
    -0.4333953941292472, -0.1488743389816312, 0.1488743389816312,
    0.4333953941292472,  0.6794095682990244,  0.8650633666889845,
    0.9739065285171717};
inline constexpr double kGlWeights[10] = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820,
    0.2692667193099963, 0.2955242247147529, 0.2955242247147529,
    0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
    0.0666713443086881};

inline double gl10_speed(const AirwaySpline& sp, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0;
  for (int i = 0; i < 10; ++i)
    acc += kGlWeights[i] * sp.derivative(mid + half * kGlNodes[i]).norm();
  return acc * half;
}

inline double adaptive_arclength(const AirwaySpline& sp, double a, double b,
                                 double whole, double tol, int depth) {
  double mid = 0.5 * (a + b);
  double left = gl10_speed(sp, a, mid), right = gl10_speed(sp, mid, b);
  if (depth > 24 || std::abs(left + right - whole) < tol)
    return left + right;
  return adaptive_arclength(sp, a, mid, left, tol / 2, depth + 1) +
         adaptive_arclength(sp, mid, b, right, tol / 2, depth + 1);
}

inline double segment_arclength(const AirwaySpline& sp, double a, double b) {
  if (b <= a) return 0;
  return adaptive_arclength(sp, a, b, gl10_speed(sp, a, b), 1e-10, 0);
}

}  // namespace detail

inline AirwaySpline fit_spline(const std::vector<Vec3>& points) {
  const size_t n = points.size();
  if (n < 2) throw std::invalid_argument("spline needs at least two points");

  std::vector<double> knots(n);
  knots[0] = 0;
  for (size_t i = 1; i < n; ++i) {
    double chord = (points[i] - points[i - 1]).norm();
    if (chord <= 0)
      throw std::invalid_argument("duplicate consecutive points (zero chord)");
    knots[i] = knots[i - 1] + chord;
  }

  // natural boundary conditions: second derivatives vanish at both ends
  std::vector<Vec3> m(n, Vec3{0, 0, 0});
  if (n > 2) {
    size_t inner = n - 2;
    std::vector<double> diag(inner), upper(inner), lower(inner);
    std::vector<Vec3> rhs(inner);
    for (size_t i = 0; i < inner; ++i) {
      double h0 = knots[i + 1] - knots[i];
      double h1 = knots[i + 2] - knots[i + 1];
      lower[i] = h0 / 6.0;
      diag[i] = (h0 + h1) / 3.0;
      upper[i] = h1 / 6.0;
      rhs[i] = (points[i + 2] - points[i + 1]) / h1 -
               (points[i + 1] - points[i]) / h0;
    }
    for (size_t i = 1; i < inner; ++i) {  // Thomas forward sweep
      double w = lower[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] = rhs[i] - rhs[i - 1] * w;
    }
    m[inner] = rhs[inner - 1] / diag[inner - 1];
    for (size_t i = inner - 1; i-- > 0;)
      m[i + 1] = (rhs[i] - m[i + 2] * upper[i]) / diag[i];
  }

  std::vector<std::array<Vec3, 4>> coef(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    double h = knots[i + 1] - knots[i];
    coef[i][0] = points[i];
    coef[i][1] = (points[i + 1] - points[i]) / h -
                 (m[i] * 2.0 + m[i + 1]) * (h / 6.0);
    coef[i][2] = m[i] / 2.0;
    coef[i][3] = (m[i + 1] - m[i]) / (6.0 * h);
  }

  AirwaySpline sp(std::move(knots), std::move(coef));
  std::vector<double> cum(n, 0.0);
  for (size_t i = 0; i + 1 < n; ++i)
    cum[i + 1] =
        cum[i] + detail::segment_arclength(sp, sp.knots()[i], sp.knots()[i + 1]);
  sp.set_knot_arclengths(std::move(cum));
  return sp;
}

/// Arc length from the curve start to parameter t by per-segment
/// Gauss-Legendre quadrature (cached at the knots).
inline double arc_length(const AirwaySpline& sp, double t) {
  const double eps = 1e-9;
  if (t < -eps || t > sp.parameter_end() + eps)
    throw std::out_of_range("arc length parameter out of range");
  t = std::clamp(t, 0.0, sp.parameter_end());
  const auto& knots = sp.knots();
  size_t i = std::upper_bound(knots.begin(), knots.end(), t) - knots.begin();
  i = i == 0 ? 0 : i - 1;
  i = std::min(i, sp.segments() - 1);
  return sp.knot_arclengths()[i] + detail::segment_arclength(sp, knots[i], t);
}

/// Unit tangent at parameter t.
inline Vec3 tangent(const AirwaySpline& sp, double t) {
  Vec3 d = sp.derivative(t);
  double norm = d.norm();
  if (norm <= 1e-9) throw std::domain_error("degenerate spline derivative");
  return d / norm;
}

}  // namespace airtaper

#endif
