#include "s2spec/angular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include "s2spec/errors.hpp"

namespace s2spec {

namespace {

constexpr int kFactTableSize = 3 * kMaxAngularMomentum + 2;

const std::vector<double>& factorial_table() {
  static std::vector<double> table;
  static std::once_flag flag;
  std::call_once(flag, [] {
    table.resize(kFactTableSize + 1);
    double sum = 0.0, comp = 0.0; // Kahan-compensated running log
    table[0] = 0.0;
    for (int n = 1; n <= kFactTableSize; ++n) {
      const double term = std::log(static_cast<double>(n)) - comp;
      const double next = sum + term;
      comp = (next - sum) - term;
      sum = next;
      table[n] = sum;
    }
  });
  return table;
}

bool triangle_ok(int l1, int l2, int l3) {
  return l3 >= std::abs(l1 - l2) && l3 <= l1 + l2;
}

void check_l_bound(int l) {
  if (l > kMaxAngularMomentum)
    throw table_overflow_error("angular momentum " + std::to_string(l) +
                               " exceeds factorial table bound " +
                               std::to_string(kMaxAngularMomentum));
}

// Largest l with l(l+1) <= c^2.  c^2 is snapped to the nearest integer when
// within a few ulps so that cutoffs meant to hit l(l+1) exactly (for example
// sqrt(lambda(lambda+1))) keep the boundary state.
int lmax_under_cutoff(double cutoff) {
  double c2 = cutoff * cutoff;
  const double snap = std::nearbyint(c2);
  if (std::fabs(c2 - snap) <= 64.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(1.0, std::fabs(c2)))
    c2 = snap;
  int l = static_cast<int>(std::floor(0.5 * (std::sqrt(1.0 + 4.0 * c2) - 1.0)));
  while (static_cast<double>(l + 1) * (l + 2) <= c2) ++l;
  while (l >= 0 && static_cast<double>(l) * (l + 1) > c2) --l;
  return l;
}

} // namespace

double log_factorial(int n) {
  if (n < 0) throw std::invalid_argument("log_factorial: negative argument");
  if (n > kFactTableSize)
    throw table_overflow_error("log_factorial: argument " + std::to_string(n) +
                               " beyond table");
  return factorial_table()[n];
}

double threej_zero_m(int l1, int l2, int l3) {
  if (l1 < 0 || l2 < 0 || l3 < 0) return 0.0;
  check_l_bound(std::max({l1, l2, l3}));
  const int J = l1 + l2 + l3;
  if (J % 2 != 0 || !triangle_ok(l1, l2, l3)) return 0.0;
  const int g = J / 2;
  const double lnv = 0.5 * (log_factorial(J - 2 * l1) + log_factorial(J - 2 * l2) +
                            log_factorial(J - 2 * l3) - log_factorial(J + 1)) +
                     log_factorial(g) - log_factorial(g - l1) -
                     log_factorial(g - l2) - log_factorial(g - l3);
  const double v = std::exp(lnv);
  return (g % 2 == 0) ? v : -v;
}

double clebsch_gordan(int l1, int m1, int l2, int m2, int L, int M) {
  if (m1 + m2 != M) return 0.0;
  if (!triangle_ok(l1, l2, L)) return 0.0;
  if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(M) > L) return 0.0;
  check_l_bound(std::max({l1, l2, L}));

  const double ln_pre =
      0.5 * (std::log(2.0 * L + 1.0) +
             log_factorial(L + l1 - l2) + log_factorial(L - l1 + l2) +
             log_factorial(l1 + l2 - L) - log_factorial(l1 + l2 + L + 1) +
             log_factorial(L + M) + log_factorial(L - M) +
             log_factorial(l1 + m1) + log_factorial(l1 - m1) +
             log_factorial(l2 + m2) + log_factorial(l2 - m2));

  double sum = 0.0;
  for (int k = 0; k <= l1 + l2 - L; ++k) {
    const int t1 = l1 + l2 - L - k;
    const int t2 = l1 - m1 - k;
    const int t3 = l2 + m2 - k;
    const int t4 = L - l2 + m1 + k;
    const int t5 = L - l1 - m2 + k;
    if (t1 < 0 || t2 < 0 || t3 < 0 || t4 < 0 || t5 < 0) continue;
    const double term = std::exp(ln_pre - log_factorial(k) - log_factorial(t1) -
                                 log_factorial(t2) - log_factorial(t3) -
                                 log_factorial(t4) - log_factorial(t5));
    sum += (k % 2 == 0) ? term : -term;
  }
  return sum;
}

double threej(int l1, int m1, int l2, int m2, int l3, int m3) {
  if (m1 + m2 + m3 != 0) return 0.0;
  const double cg = clebsch_gordan(l1, m1, l2, m2, l3, -m3);
  const int phase = l1 - l2 - m3;
  const double v = cg / std::sqrt(2.0 * l3 + 1.0);
  return (((phase % 2) + 2) % 2 == 0) ? v : -v;
}

double y4_analytic(int l1, int m1, int l2, int m2,
                   int p1, int q1, int p2, int q2) {
  if (m1 + m2 != q1 + q2) return 0.0;
  const int M = q1 + q2;
  const int Lmin = std::max(std::abs(l1 - l2), std::abs(p1 - p2));
  const int Lmax = std::min(l1 + l2, p1 + p2);
  if (Lmin > Lmax) return 0.0;
  const double pref = std::sqrt((2.0 * l1 + 1.0) * (2.0 * l2 + 1.0) *
                                (2.0 * p1 + 1.0) * (2.0 * p2 + 1.0)) /
                      (4.0 * M_PI);
  double sum = 0.0;
  for (int L = Lmin; L <= Lmax; ++L) {
    const double w0a = threej_zero_m(l1, l2, L);
    if (w0a == 0.0) continue;
    const double w0b = threej_zero_m(L, p1, p2);
    if (w0b == 0.0) continue;
    sum += (2.0 * L + 1.0) * threej(l1, -m1, l2, -m2, L, M) *
           threej(L, -M, p1, q1, p2, q2) * w0a * w0b;
  }
  return pref * sum;
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

// Normalized associated Legendre Ptilde_l^m(x) with Condon-Shortley phase:
// Y_lm = Ptilde_l^m(cos theta) e^{i m phi},  m >= 0.
double assoc_legendre_norm(int l, int m, double x) {
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double pmm = std::sqrt(1.0 / (4.0 * M_PI));
  for (int k = 1; k <= m; ++k)
    pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
  if (l == m) return pmm;
  double pm1 = std::sqrt(2.0 * m + 3.0) * x * pmm;
  if (l == m + 1) return pm1;
  double p = 0.0;
  for (int k = m + 2; k <= l; ++k) {
    const double a = std::sqrt((4.0 * k * k - 1.0) /
                               (static_cast<double>(k) * k - static_cast<double>(m) * m));
    const double b = std::sqrt(((k - 1.0) * (k - 1.0) - static_cast<double>(m) * m) /
                               (4.0 * (k - 1.0) * (k - 1.0) - 1.0));
    p = a * (x * pm1 - b * pmm);
    pmm = pm1;
    pm1 = p;
  }
  return p;
}

std::complex<double> sph_harm(int l, int m, double cos_theta, double phi) {
  const int am = std::abs(m);
  const double pl = assoc_legendre_norm(l, am, cos_theta);
  const std::complex<double> e(std::cos(am * phi), std::sin(am * phi));
  if (m >= 0) return pl * e;
  const std::complex<double> v = pl * std::conj(e);
  return (am % 2 == 0) ? v : -v;
}

} // namespace

std::complex<double> y4_quadrature_complex(int l1, int m1, int l2, int m2,
                                           int p1, int q1, int p2, int q2,
                                           int order) {
  const int needed = 2 * (l1 + l2 + p1 + p2) + 2;
  if (order < needed)
    throw std::invalid_argument("y4_quadrature: order " + std::to_string(order) +
                                " below required " + std::to_string(needed));
  std::vector<double> nodes, weights;
  gauss_legendre(order, nodes, weights);
  const int nphi = order;
  const double wphi = 2.0 * M_PI / nphi;
  std::complex<double> acc = 0.0;
  for (int i = 0; i < order; ++i) {
    const double ct = nodes[i];
    std::complex<double> ring = 0.0;
    for (int j = 0; j < nphi; ++j) {
      const double phi = wphi * j;
      ring += std::conj(sph_harm(l1, m1, ct, phi)) *
              std::conj(sph_harm(l2, m2, ct, phi)) *
              sph_harm(p1, q1, ct, phi) * sph_harm(p2, q2, ct, phi);
    }
    acc += weights[i] * wphi * ring;
  }
  return acc;
}

double y4_quadrature(int l1, int m1, int l2, int m2,
                     int p1, int q1, int p2, int q2, int order) {
  return y4_quadrature_complex(l1, m1, l2, m2, p1, q1, p2, q2, order).real();
}

double contact_me(int l1, int l2, int l1p, int l2p, int L) {
  const double w1 = threej_zero_m(l1, l2, L);
  if (w1 == 0.0) return 0.0;
  const double w2 = threej_zero_m(l1p, l2p, L);
  if (w2 == 0.0) return 0.0;
  return std::sqrt((2.0 * l1 + 1.0) * (2.0 * l2 + 1.0) * (2.0 * l1p + 1.0) *
                   (2.0 * l2p + 1.0)) *
         w1 * w2 / (4.0 * M_PI);
}

MatrixElementTable build_me_table(int L, double cutoff) {
  if (cutoff <= 0.0) throw std::invalid_argument("build_me_table: cutoff <= 0");
  MatrixElementTable table;
  table.L = L;
  table.cutoff = cutoff;
  const int lmax = lmax_under_cutoff(cutoff);
  for (int l1 = 0; l1 <= lmax; ++l1)
    for (int l2 = std::max(0, l1 - L); l2 <= std::min(lmax, l1 + L); ++l2) {
      if (l1 + l2 < L) continue;
      if ((l1 + l2 + L) % 2 != 0) continue;
      table.indices.emplace_back(l1, l2);
    }
  if (table.indices.empty())
    throw empty_basis_error("build_me_table: no (l1,l2) pair admissible for L=" +
                            std::to_string(L) + " at cutoff " +
                            std::to_string(cutoff));
  const std::size_t n = table.indices.size();
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = table.indices[i];
    u[i] = std::sqrt((2.0 * a + 1.0) * (2.0 * b + 1.0)) * threej_zero_m(a, b, L);
  }
  table.values.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      table.values[i * n + j] = u[i] * u[j] / (4.0 * M_PI);
  return table;
}

} // namespace s2spec
