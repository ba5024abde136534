#ifndef AIRTAPER_TAPER_HPP
#define AIRTAPER_TAPER_HPP

#include <cmath>
#include <string>
#include <vector>

#include "airtaper/lumen.hpp"

namespace airtaper {

/// Exponential-decay fit of one lumen profile: log(area) regressed on
/// arclength. T is the gradient (mm^-1, negative for narrowing airways).
struct TaperResult {
  std::string airway_id;
  double taper_per_mm = 0;   // T
  double log_intercept = 0;  // log A
  double s_err = 0;          // standard error of estimate, log-area units
  size_t n_stations = 0;
  std::vector<double> fitted_log_area;  // regression estimates Y_i
};

/// Ordinary least squares of log(y_i) on x_i over the non-missing stations.
/// The standard error of estimate uses the population denominator N (not
/// N - 2); natural logarithms throughout.
inline TaperResult taper_rate(const LumenProfile& p) {
  std::vector<double> x, y;
  for (const auto& st : p.stations) {
    if (st.missing) continue;
    if (!(st.area_mm2 > 0))
      throw std::invalid_argument("non-positive area in profile");
    x.push_back(st.arclength_mm);
    y.push_back(std::log(st.area_mm2));
  }
  const size_t n = x.size();
  if (n < 3) throw std::invalid_argument("need at least 3 stations for a taper fit");

  double mean_x = 0, mean_y = 0;
  for (size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= double(n);
  mean_y /= double(n);
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mean_x) * (x[i] - mean_x);
    sxy += (x[i] - mean_x) * (y[i] - mean_y);
  }
  if (sxx <= 0) throw std::invalid_argument("degenerate arclengths");

  TaperResult r;
  r.airway_id = p.airway_id;
  r.taper_per_mm = sxy / sxx;
  r.log_intercept = mean_y - r.taper_per_mm * mean_x;
  r.n_stations = n;
  r.fitted_log_area.resize(n);
  double ss = 0;
  for (size_t i = 0; i < n; ++i) {
    double fit = r.log_intercept + r.taper_per_mm * x[i];
    r.fitted_log_area[i] = fit;
    ss += (fit - y[i]) * (fit - y[i]);
  }
  r.s_err = std::sqrt(ss / double(n));
  return r;
}

/// Mark stations whose arclength falls inside any of the given ranges as
/// missing (used to drop bifurcation regions). Ranges outside the profile
/// are ignored rather than fatal.
inline LumenProfile exclude_intervals(
    const LumenProfile& p,
    const std::vector<std::array<double, 2>>& intervals_mm) {
  LumenProfile out = p;
  for (auto& st : out.stations) {
    if (st.missing) continue;
    for (const auto& iv : intervals_mm)
      if (st.arclength_mm >= iv[0] && st.arclength_mm <= iv[1]) {
        st.missing = true;
        break;
      }
  }
  return out;
}

}  // namespace airtaper

#endif
