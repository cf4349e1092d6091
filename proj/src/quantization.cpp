#include "s2spec/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "s2spec/angular.hpp"
#include "s2spec/errors.hpp"
#include "s2spec/specfun.hpp"

namespace s2spec {

namespace {

constexpr double kPoleGuard = 1e-12;

// Z2 has a removable point at x = 3/2 where the numerator bracket vanishes
// against the 1/(12-8x) prefactor.  Inside |x-3/2| < 1e-3 the direct
// evaluation loses ~1e-16/|12-8x| to cancellation, so a local Taylor
// expansion is used instead: Z2(3/2 + d) = -(1/8) sum_k kZ2Patch[k] d^k.
constexpr double kZ2PatchRadius = 1e-3;
constexpr double kZ2Patch[] = {
    -2.086482724995647838831,
    -2.837324344665096705777,
    -0.8206311477680300709911,
    -0.2871094093828012796043,
    -0.1071667927552516288976,
    -0.04126484002110265895436,
    -0.0161582554745581355988,
    -0.006386734655075874555397,
    -0.002537738639655747618641,
    -0.00101133285714685425572};

double z0_closed(double x) {
  const double arg = 2.0 * x + 1.0;
  if (arg >= 0.0) {
    const double s = std::sqrt(arg);
    return -0.5 * (digamma(0.5 * (1.0 - s)) + digamma(0.5 * (1.0 + s)));
  }
  return -0.5 * digamma_pair(0.5, 0.5 * std::sqrt(-arg));
}

double z1_closed(double x) {
  if (x >= 0.0) {
    const double s = std::sqrt(0.5 * x);
    return -0.5 * (digamma(1.0 - s) + digamma(1.0 + s));
  }
  return -0.5 * digamma_pair(1.0, std::sqrt(-0.5 * x));
}

double z2_closed(double x) {
  const double d = x - 1.5;
  if (std::fabs(d) < kZ2PatchRadius) {
    double acc = 0.0;
    for (int k = static_cast<int>(std::size(kZ2Patch)) - 1; k >= 0; --k)
      acc = acc * d + kZ2Patch[k];
    return -acc / 8.0;
  }
  double s1; // psi((3-t)/2) + psi((3+t)/2), t = sqrt(2x-3)
  if (2.0 * x - 3.0 >= 0.0) {
    const double t = std::sqrt(2.0 * x - 3.0);
    s1 = digamma(0.5 * (3.0 - t)) + digamma(0.5 * (3.0 + t));
  } else {
    s1 = digamma_pair(1.5, 0.5 * std::sqrt(3.0 - 2.0 * x));
  }
  // x * [psi((1-u)/2) + psi((1+u)/2)] rewritten through the digamma
  // recurrence as x*[psi((3-u)/2) + psi((1+u)/2)] + u + 1, which stays
  // regular at x = 0 where the naive form is 0 * infinity.
  double x_s2;
  if (1.0 + 2.0 * x >= 0.0) {
    const double u = std::sqrt(1.0 + 2.0 * x);
    x_s2 = x * (digamma(0.5 * (3.0 - u)) + digamma(0.5 * (1.0 + u))) + u + 1.0;
  } else {
    x_s2 = x * digamma_pair(0.5, 0.5 * std::sqrt(-1.0 - 2.0 * x));
  }
  return (3.0 * (x - 2.0) * s1 + x_s2) / (12.0 - 8.0 * x);
}

// Shared pair enumeration: calls f(l1, l2) for all ordered pairs allowed by
// the triangle rule and the parity of the 3j symbol, with l1, l2 <= lmax.
template <class F>
void for_each_pair(int L, int lmax, F&& f) {
  for (int l1 = 0; l1 <= lmax; ++l1) {
    const int lo = std::max(0, l1 - L);
    const int hi = std::min(lmax, l1 + L);
    for (int l2 = lo; l2 <= hi; ++l2) {
      if (l1 + l2 < L) continue;
      if ((l1 + l2 + L) % 2 != 0) continue;
      f(l1, l2);
    }
  }
}

// Neville extrapolation to h = 0 of (h_i, y_i) pairs.
double neville_to_zero(const std::vector<double>& h, std::vector<double> y) {
  const int n = static_cast<int>(y.size());
  for (int k = 1; k < n; ++k)
    for (int i = 0; i < n - k; ++i)
      y[i] = y[i + 1] + (y[i + 1] - y[i]) * h[i + k] / (h[i] - h[i + k]);
  return y[0];
}

const std::vector<int>& default_ladder() {
  static const std::vector<int> ladder = {256, 512, 1024, 2048, 4096};
  return ladder;
}

double band_function(int L, double x) {
  return (L <= 2) ? z_closed(L, x) : z_general(L, x);
}

// Bisection on a bracket [lo, hi] with f(lo) < 0 < f(hi), refined by a final
// secant polish.  Width tolerance is absolute.
double bisect_increasing(const std::function<double(double)>& f, double lo,
                         double hi, double f_lo, double f_hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm < 0.0) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
      f_hi = fm;
    }
  }
  if (f_hi != f_lo) {
    const double xs = hi - f_hi * (hi - lo) / (f_hi - f_lo);
    if (xs > lo && xs < hi) return xs;
  }
  return 0.5 * (lo + hi);
}

} // namespace

double epsilon_l(int l, double mass_mev, double radius_fm) {
  if (l < 0) throw std::invalid_argument("epsilon_l: negative l");
  if (mass_mev <= 0.0 || radius_fm <= 0.0)
    throw std::invalid_argument("epsilon_l: mass and radius must be positive");
  return static_cast<double>(l) * (l + 1) * kHbarC * kHbarC /
         (2.0 * mass_mev * radius_fm * radius_fm);
}

double c0_coefficient(double a_fm, double lambda_inv_fm, double mass_mev) {
  if (mass_mev <= 0.0) throw std::invalid_argument("c0_coefficient: mass <= 0");
  const double al = a_fm * lambda_inv_fm;
  if (al <= 0.0)
    throw std::invalid_argument("c0_coefficient: a*Lambda must be positive");
  if (std::fabs(al - 1.0) < 1e-12)
    throw pole_error("c0_coefficient: coupling diverges at a*Lambda = 1", al);
  return -2.0 * M_PI * kHbarC * kHbarC / (mass_mev * std::log(al));
}

double atilde_to_a_over_r(double atilde) {
  if (atilde == 0.0)
    throw std::domain_error("atilde_to_a_over_r: atilde = 0");
  return std::exp(-M_PI / (2.0 * atilde));
}

double a_over_r_to_atilde(double a_over_r) {
  if (a_over_r <= 0.0)
    throw std::domain_error("a_over_r_to_atilde: a/R must be positive");
  if (a_over_r == 1.0)
    throw std::domain_error("a_over_r_to_atilde: a/R = 1 (|atilde| -> inf)");
  return -M_PI / (2.0 * std::log(a_over_r));
}

double z_closed(int L, double x) {
  try {
    switch (L) {
      case 0: return z0_closed(x);
      case 1: return z1_closed(x);
      case 2: return z2_closed(x);
      default:
        throw std::invalid_argument("z_closed: no closed form for L = " +
                                    std::to_string(L));
    }
  } catch (const pole_error&) {
    throw pole_error("z_closed: x = " + std::to_string(x) +
                         " is a non-interacting energy of band " +
                         std::to_string(L),
                     x);
  }
}

double z_sum(int L, double x, int lambda_max) {
  if (L < 0) throw std::invalid_argument("z_sum: negative L");
  if (lambda_max < L + 1)
    throw std::invalid_argument("z_sum: lambda_max must be at least L+1");
  double acc = 0.0;
  const double guard = kPoleGuard * std::max(1.0, std::fabs(x));
  for_each_pair(L, lambda_max, [&](int l1, int l2) {
    const double w = threej_zero_m(l1, l2, L);
    if (w == 0.0) return;
    const double denom = static_cast<double>(l1) * (l1 + 1) +
                         static_cast<double>(l2) * (l2 + 1) - x;
    if (std::fabs(denom) < guard)
      throw pole_error("z_sum: x at non-interacting energy", x);
    acc += (2.0 * l1 + 1.0) * (2.0 * l2 + 1.0) * w * w / denom;
  });
  const double lam = static_cast<double>(lambda_max);
  return acc - 0.5 * std::log(lam * (lam + 1.0));
}

double z_general(int L, double x) { return z_general(L, x, default_ladder()); }

double z_general(int L, double x, const std::vector<int>& ladder,
                 double tolerance) {
  if (ladder.size() < 3)
    throw std::invalid_argument("z_general: ladder needs at least 3 rungs");
  std::vector<double> h(ladder.size()), y(ladder.size());
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    h[i] = 1.0 / ladder[i];
    y[i] = z_sum(L, x, ladder[i]);
  }
  const double full = neville_to_zero(h, y);
  const double finer = neville_to_zero(
      std::vector<double>(h.begin() + 1, h.end()),
      std::vector<double>(y.begin() + 1, y.end()));
  if (std::fabs(full - finer) > 10.0 * tolerance * std::max(1.0, std::fabs(full)))
    throw convergence_error("z_general: extrapolants disagree by " +
                            std::to_string(std::fabs(full - finer)) +
                            " at L=" + std::to_string(L) +
                            ", x=" + std::to_string(x));
  return full;
}

std::vector<double> poles(int L, int count) {
  if (count < 1) throw std::invalid_argument("poles: count < 1");
  int bound = count + L + 8;
  for (;;) {
    std::set<double> vals;
    for_each_pair(L, bound, [&](int l1, int l2) {
      vals.insert(static_cast<double>(l1) * (l1 + 1) +
                  static_cast<double>(l2) * (l2 + 1));
    });
    std::vector<double> out(vals.begin(), vals.end());
    // Any pair outside the enumeration box has value > bound(bound+1), so the
    // result is complete once the requested prefix sits below that.
    if (static_cast<int>(out.size()) >= count &&
        out[count - 1] < static_cast<double>(bound) * (bound + 1)) {
      out.resize(count);
      return out;
    }
    bound *= 2;
  }
}

std::vector<double> band_zeros(int L, int count) {
  std::vector<double> out;
  out.reserve(count);
  for (int n = 0; n < count; ++n)
    out.push_back(solve_band({L, 0.0, n, 1e-12}));
  return out;
}

BandCurve band_curve(int L, int count) {
  return {L, poles(L, count), band_zeros(L, count)};
}

double solve_band(const RootRequest& req) {
  if (req.branch < 0) throw std::invalid_argument("solve_band: negative branch");
  if (req.tolerance <= 0.0)
    throw std::invalid_argument("solve_band: tolerance must be positive");
  if (!std::isfinite(req.log_a_over_r))
    throw std::invalid_argument("solve_band: log(a/R) not finite");
  const int L = req.L;
  const double target = req.log_a_over_r;
  const auto f = [&](double x) { return band_function(L, x) - target; };

  const std::vector<double> ps = poles(L, req.branch + 1);

  if (req.branch == 0) {
    const double p0 = ps[0];
    const double scale = std::max(1.0, std::fabs(p0));
    // Upper end: just below the first pole, tightened until the curve is
    // above the target there (it diverges to +inf at the pole).
    double eps = 1e-9 * scale;
    double hi = p0 - eps;
    double f_hi = f(hi);
    while (f_hi <= 0.0) {
      eps *= 0.1;
      if (eps < 1e-15 * scale)
        throw bracket_error("solve_band: no sign change below first pole at L=" +
                            std::to_string(L) + ", log(a/R)=" +
                            std::to_string(target));
      hi = p0 - eps;
      f_hi = f(hi);
    }
    // Lower end: the dimer estimate with margin, expanded geometrically.
    const double dim = -2.0 * std::exp(-2.0 * target);
    double lo = std::min(1.5 * dim, p0 - 10.0);
    double f_lo = f(lo);
    int expansions = 0;
    while (f_lo >= 0.0) {
      lo = p0 + 2.0 * (lo - p0);
      f_lo = f(lo);
      if (++expansions > 60)
        throw bracket_error("solve_band: branch-0 lower bracket expansion failed");
    }
    return bisect_increasing(f, lo, hi, f_lo, f_hi, req.tolerance);
  }

  const double p_lo = ps[req.branch - 1];
  const double p_hi = ps[req.branch];
  const double gap = p_hi - p_lo;
  double eps_lo = 1e-9 * gap;
  double lo = p_lo + eps_lo;
  double f_lo = f(lo);
  while (f_lo >= 0.0) {
    eps_lo *= 0.1;
    if (eps_lo < 1e-16 * gap)
      throw bracket_error("solve_band: no bracket above pole " +
                          std::to_string(p_lo) + " for L=" + std::to_string(L) +
                          ", log(a/R)=" + std::to_string(target));
    lo = p_lo + eps_lo;
    f_lo = f(lo);
  }
  double eps_hi = 1e-9 * gap;
  double hi = p_hi - eps_hi;
  double f_hi = f(hi);
  while (f_hi <= 0.0) {
    eps_hi *= 0.1;
    if (eps_hi < 1e-16 * gap)
      throw bracket_error("solve_band: no bracket below pole " +
                          std::to_string(p_hi) + " for L=" + std::to_string(L) +
                          ", log(a/R)=" + std::to_string(target));
    hi = p_hi - eps_hi;
    f_hi = f(hi);
  }
  return bisect_increasing(f, lo, hi, f_lo, f_hi, req.tolerance);
}

double asymptote_noninteracting(int L, int n, double log_a_over_r) {
  if (n < 0) throw std::invalid_argument("asymptote_noninteracting: n < 0");
  if (log_a_over_r == 0.0)
    throw std::domain_error("asymptote_noninteracting: log(a/R) = 0");
  switch (L) {
    case 0:
      return 2.0 * n * (n + 1) - (2.0 * n + 1.0) / log_a_over_r;
    case 1:
      return 2.0 * (n + 1.0) * (n + 1.0) - 2.0 * (n + 1.0) / log_a_over_r;
    default:
      throw std::invalid_argument("asymptote_noninteracting: L must be 0 or 1");
  }
}

double dimer_x(double a_fm, double radius_fm) {
  if (a_fm <= 0.0 || radius_fm <= 0.0)
    throw std::invalid_argument("dimer_x: a and R must be positive");
  const double r = radius_fm / a_fm;
  return -2.0 * r * r;
}

double expansion_near_zero(int L, double x0, double log_a_over_r) {
  double slope;
  if (L == 0) {
    const double arg = 2.0 * x0 + 1.0;
    if (arg >= 0.0) {
      const double s = std::sqrt(arg);
      slope = 4.0 * s /
              (trigamma(0.5 * (1.0 - s)) - trigamma(0.5 * (1.0 + s)));
    } else {
      // sqrt(2x0+1) = i t: the trigamma difference becomes -2i Im psi', so
      // the slope is -2t / Im psi'((1+it)/2).
      const double t = std::sqrt(-arg);
      const double im = trigamma(std::complex<double>(0.5, 0.5 * t)).imag();
      slope = -2.0 * t / im;
    }
  } else if (L == 1) {
    if (x0 >= 0.0) {
      const double s = std::sqrt(0.5 * x0);
      slope = 4.0 * std::sqrt(2.0 * x0) /
              (trigamma(1.0 - s) - trigamma(1.0 + s));
    } else {
      const double t = std::sqrt(-0.5 * x0);
      const double im = trigamma(std::complex<double>(1.0, t)).imag();
      slope = -2.0 * std::sqrt(-2.0 * x0) / im;
    }
  } else {
    throw std::invalid_argument("expansion_near_zero: L must be 0 or 1");
  }
  return x0 + slope * log_a_over_r;
}

std::vector<std::vector<double>> diagonalize_oracle(
    int L, std::optional<double> a_over_r,
    const std::vector<int>& lambda_ladder) {
  if (a_over_r && *a_over_r <= 0.0)
    throw std::invalid_argument("diagonalize_oracle: a/R must be positive");
  std::vector<std::vector<double>> out;
  out.reserve(lambda_ladder.size());
  for (const int lam : lambda_ladder) {
    if (lam < L + 1)
      throw std::invalid_argument("diagonalize_oracle: cutoff below L+1");
    const double lam_tilde = std::sqrt(static_cast<double>(lam) * (lam + 1));
    const MatrixElementTable table = build_me_table(L, lam_tilde);
    const std::size_t n = table.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    double coupling = 0.0;
    if (a_over_r) {
      const double log_al = std::log(*a_over_r * lam_tilde);
      if (std::fabs(log_al) < 1e-12)
        throw pole_error("diagonalize_oracle: coupling pole at a*Lambda = 1",
                         *a_over_r * lam_tilde);
      coupling = -4.0 * M_PI / log_al;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto [l1, l2] = table.indices[i];
      h(i, i) = static_cast<double>(l1) * (l1 + 1) +
                static_cast<double>(l2) * (l2 + 1);
      if (coupling != 0.0)
        for (std::size_t j = 0; j < n; ++j) h(i, j) += coupling * table(i, j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
      throw convergence_error("diagonalize_oracle: eigensolver failed at lambda " +
                              std::to_string(lam));
    const auto& ev = solver.eigenvalues();
    out.emplace_back(ev.data(), ev.data() + ev.size());
  }
  return out;
}

} // namespace s2spec
