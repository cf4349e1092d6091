#ifndef S2SPEC_QUANTIZATION_HPP
#define S2SPEC_QUANTIZATION_HPP

#include <optional>
#include <vector>

namespace s2spec {

/// hbar*c in MeV*fm; fixes the dimensionless energy x = 2 m E R^2 / (hbar c)^2
/// for masses in MeV and radii in fm.
inline constexpr double kHbarC = 197.3269804;

/// Rigid-rotor single-particle energy l(l+1)/(2 m R^2) in MeV.
double epsilon_l(int l, double mass_mev, double radius_fm);

/// Running contact coupling C0(Lambda) = -2 pi (hbar c)^2 / (m log(a Lambda)),
/// in MeV*fm^2.  Throws pole_error within 1e-12 of a*Lambda = 1.
double c0_coefficient(double a_fm, double lambda_inv_fm, double mass_mev);

/// a/R = exp(-pi / (2 atilde)); inverse of a_over_r_to_atilde.
double atilde_to_a_over_r(double atilde);

/// atilde = -pi / (2 log(a/R)); throws for r <= 0 or r = 1.
double a_over_r_to_atilde(double a_over_r);

/// Closed-form quantization function Z_L(x) for L in {0, 1, 2}.  Always real;
/// conjugate-pair digamma evaluation below the square-root branch points.
/// Throws pole_error at the band's non-interacting energies.
double z_closed(int L, double x);

/// Truncated quantization sum at maximum angular momentum lambda:
/// sum over admissible (l1, l2) with l_i <= lambda of
/// (2l1+1)(2l2+1) 3j^2 / (l1(l1+1)+l2(l2+1)-x), minus log sqrt(lambda(lambda+1)).
double z_sum(int L, double x, int lambda_max);

/// Infinite-cutoff limit of z_sum by polynomial extrapolation in 1/lambda over
/// a geometric ladder.  Throws convergence_error when the two finest
/// extrapolants disagree by more than 10x the tolerance.
double z_general(int L, double x);
double z_general(int L, double x, const std::vector<int>& ladder,
                 double tolerance = 1e-9);

/// First `count` non-interacting energies l1(l1+1)+l2(l2+1) of band L
/// (distinct, ascending, over triangle- and parity-allowed pairs).
std::vector<double> poles(int L, int count);

/// First `count` zeros of Z_L, ascending: one below the first pole, then one
/// per inter-pole interval, each located by bisection to 1e-12 absolute.
std::vector<double> band_zeros(int L, int count);

/// One rotational band: its pole and zero structure.
struct BandCurve {
  int L = 0;
  std::vector<double> poles;
  std::vector<double> zeros;
};

BandCurve band_curve(int L, int count);

/// Root request: solve Z_L(x) = log(a/R) on branch `branch` (0 = below the
/// first pole, n >= 1 = between poles n-1 and n).
struct RootRequest {
  int L = 0;
  double log_a_over_r = 0.0;
  int branch = 0;
  double tolerance = 1e-12;
};

/// Solves the band quantization condition on the requested branch.  For
/// L <= 2 the closed form is used, otherwise the extrapolated sum.  Throws
/// bracket_error with diagnostics if no sign change can be established.
double solve_band(const RootRequest& req);

/// Leading large-|log(a/R)| expansion of the n-th solution:
/// L=0: 2n(n+1) - (2n+1)/log(a/R);  L=1: 2(n+1)^2 - 2(n+1)/log(a/R).
double asymptote_noninteracting(int L, int n, double log_a_over_r);

/// Deep-dimer estimate x = -2 R^2 / a^2 for a << R.
double dimer_x(double a_fm, double radius_fm);

/// Linearization of the band curve about one of its zeros x0:
/// x = x0 + slope(x0) * log(a/R), slope from trigamma (conjugate-pair form
/// below the branch point).  L in {0, 1}.
double expansion_near_zero(int L, double x0, double log_a_over_r);

/// Truncated-Hamiltonian oracle: for each cutoff lambda in the ladder, builds
/// H = diag(l1(l1+1)+l2(l2+1)) - (4 pi / log((a/R) sqrt(lambda(lambda+1)))) * Y
/// over the admissible basis and returns its eigenvalues (ascending, x units).
/// a_over_r = nullopt selects the free Hamiltonian (explicit zero coupling).
std::vector<std::vector<double>> diagonalize_oracle(
    int L, std::optional<double> a_over_r, const std::vector<int>& lambda_ladder);

} // namespace s2spec

#endif
