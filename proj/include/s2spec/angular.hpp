#ifndef S2SPEC_ANGULAR_HPP
#define S2SPEC_ANGULAR_HPP

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace s2spec {

/// Largest angular momentum accepted by the log-factorial backed routines.
inline constexpr int kMaxAngularMomentum = 4200;

/// log(n!) from a precomputed table; throws table_overflow_error beyond
/// 3*kMaxAngularMomentum + 1.
double log_factorial(int n);

/// Wigner 3j symbol (l1 l2 l3; 0 0 0) from the closed even-J factorial
/// formula.  Returns 0 for odd l1+l2+l3 or a violated triangle rule.
double threej_zero_m(int l1, int l2, int l3);

/// General Wigner 3j symbol (l1 l2 l3; m1 m2 m3) for integer arguments.
double threej(int l1, int m1, int l2, int m2, int l3, int m3);

/// Clebsch-Gordan coefficient <l1 m1; l2 m2 | L M> in the Condon-Shortley
/// convention, via the Racah sum.  Selection-rule violations return 0.
double clebsch_gordan(int l1, int m1, int l2, int m2, int L, int M);

/// Integral of Y*_{l1 m1} Y*_{l2 m2} Y_{p1 q1} Y_{p2 q2} over the sphere,
/// evaluated through its finite 3j sum.  Zero unless m1+m2 = q1+q2.
double y4_analytic(int l1, int m1, int l2, int m2,
                   int p1, int q1, int p2, int q2);

/// Same integral by Gauss-Legendre (cos theta) x trapezoid (phi) quadrature.
/// Exact for order >= 2*(l1+l2+p1+p2) + 2; smaller orders throw.
double y4_quadrature(int l1, int m1, int l2, int m2,
                     int p1, int q1, int p2, int q2, int order);

/// Quadrature before discarding the (zero) imaginary part; used to check
/// hermiticity of the assembled integrand.
std::complex<double> y4_quadrature_complex(int l1, int m1, int l2, int m2,
                                           int p1, int q1, int p2, int q2,
                                           int order);

/// Contact matrix element <(l1 l2) L M| delta |(l1' l2') L M> in units of
/// 1/(4 pi): sqrt((2l1+1)(2l2+1)(2l1'+1)(2l2'+1))/(4 pi) * 3j * 3j'.
/// Independent of M; vanishes with either 3j.
double contact_me(int l1, int l2, int l1p, int l2p, int L);

/// Coupled two-particle basis label |(l1 l2) L M>.
struct CoupledIndex {
  int l1 = 0;
  int l2 = 0;
  int L = 0;
  int M = 0;
};

/// Dense symmetric block of contact matrix elements over all (l1, l2) pairs
/// that satisfy the triangle rule with L, have nonvanishing 3j, and pass the
/// cutoff l(l+1) <= cutoff^2.  Separable, hence rank 1.
class MatrixElementTable {
public:
  int L = 0;
  double cutoff = 0.0; // Lambda * R, dimensionless
  std::vector<std::pair<int, int>> indices;
  std::vector<double> values; // row-major, size() x size()

  std::size_t size() const { return indices.size(); }
  double operator()(std::size_t i, std::size_t j) const {
    return values[i * indices.size() + j];
  }
};

/// Enumerates the admissible basis for band L under the given cutoff and
/// fills the separable matrix.  Throws empty_basis_error if nothing passes.
MatrixElementTable build_me_table(int L, double cutoff);

} // namespace s2spec

#endif
