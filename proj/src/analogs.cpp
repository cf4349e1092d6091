#include "s2spec/analogs.hpp"

#include <cmath>
#include <string>

#include "s2spec/errors.hpp"
#include "s2spec/specfun.hpp"

namespace s2spec {

namespace {

// Octant-reduced lattice sum over 0 < |n| <= cutoff plus the origin term.
// Orbits under the square-lattice symmetry group: axes and diagonals carry
// multiplicity 4, interior points 8.
double lattice_sum(double x, double cutoff) {
  const double c2 = cutoff * cutoff;
  const double guard = 1e-12 * std::max(1.0, std::fabs(x));
  const int nmax = static_cast<int>(std::floor(cutoff));
  if (std::fabs(x) < guard)
    throw pole_error("torus_s2: x at lattice energy 0", x);
  double s = -1.0 / x;
  for (int i = 1; i <= nmax; ++i) {
    const double ii = static_cast<double>(i) * i;
    if (ii <= c2) {
      if (std::fabs(ii - x) < guard)
        throw pole_error("torus_s2: x at lattice energy", x);
      s += 4.0 / (ii - x);
    }
    if (2.0 * ii <= c2) {
      if (std::fabs(2.0 * ii - x) < guard)
        throw pole_error("torus_s2: x at lattice energy", x);
      s += 4.0 / (2.0 * ii - x);
    }
    for (int j = 1; j < i; ++j) {
      const double n2 = ii + static_cast<double>(j) * j;
      if (n2 > c2) break;
      if (std::fabs(n2 - x) < guard)
        throw pole_error("torus_s2: x at lattice energy", x);
      s += 8.0 / (n2 - x);
    }
  }
  return s / (M_PI * M_PI) - (2.0 / M_PI) * std::log(cutoff);
}

} // namespace

double ho_condition(double x) {
  return -0.5 * digamma(0.5 * (1.0 - x));
}

double torus_s2(double x, const TorusSumSpec& spec) {
  if (spec.cutoff < 1.0)
    throw std::invalid_argument("torus_s2: cutoff must be >= 1");
  if (!spec.extrapolate) return lattice_sum(x, spec.cutoff);
  const double l0 = spec.cutoff;
  const double y0 = lattice_sum(x, l0);
  const double y1 = lattice_sum(x, 2.0 * l0);
  const double y2 = lattice_sum(x, 4.0 * l0);
  // Neville in 1/cutoff over {l0, 2 l0, 4 l0}.
  const double h0 = 1.0 / l0, h1 = 0.5 / l0, h2 = 0.25 / l0;
  const double y01 = y1 + (y1 - y0) * h1 / (h0 - h1);
  const double y12 = y2 + (y2 - y1) * h2 / (h1 - h2);
  return y12 + (y12 - y01) * h2 / (h0 - h2);
}

double torus_s2_naive(double x, double cutoff) {
  const double c2 = cutoff * cutoff;
  const double guard = 1e-12 * std::max(1.0, std::fabs(x));
  const int nmax = static_cast<int>(std::floor(cutoff));
  double s = 0.0;
  for (int i = -nmax; i <= nmax; ++i)
    for (int j = -nmax; j <= nmax; ++j) {
      const double n2 = static_cast<double>(i) * i + static_cast<double>(j) * j;
      if (n2 > c2) continue;
      if (std::fabs(n2 - x) < guard)
        throw pole_error("torus_s2_naive: x at lattice energy", x);
      s += 1.0 / (n2 - x);
    }
  return s / (M_PI * M_PI) - (2.0 / M_PI) * std::log(cutoff);
}

std::vector<double> torus_poles(int count) {
  std::vector<double> out;
  for (int k = 0; static_cast<int>(out.size()) < count; ++k) {
    bool two_squares = false;
    for (int i = 0; i * i <= k && !two_squares; ++i) {
      const int r = k - i * i;
      const int j = static_cast<int>(std::lround(std::sqrt(static_cast<double>(r))));
      if (j * j == r) two_squares = true;
    }
    if (two_squares) out.push_back(static_cast<double>(k));
  }
  return out;
}

std::function<double(double)> cm_shift_curve(std::function<double(double)> condition,
                                             double x_cm) {
  return [condition = std::move(condition), x_cm](double x) {
    return condition(x - x_cm);
  };
}

} // namespace s2spec
