#ifndef S2SPEC_ANALOGS_HPP
#define S2SPEC_ANALOGS_HPP

#include <functional>
#include <vector>

namespace s2spec {

/// S-wave quantization condition of the two-dimensional harmonic oscillator:
/// log(a/b) = -(1/2) psi((1 - x)/2), x = E/omega.  Poles at odd positive x.
double ho_condition(double x);

/// Cutoff prescription for the torus lattice sum.
struct TorusSumSpec {
  double cutoff = 800.0; // |n| <= cutoff, circular norm
  bool extrapolate = false;
};

/// (1/pi^2) S_2(x): lattice sum over n in Z^2 with |n| <= cutoff of
/// 1/(n^2 - x), divided by pi^2, minus (2/pi) log(cutoff).  With
/// extrapolate=true the value is Richardson-extrapolated over the ladder
/// {cutoff, 2 cutoff, 4 cutoff}.  Poles at integers that are sums of two
/// squares.
double torus_s2(double x, const TorusSumSpec& spec);

/// Reference full sum over all of Z^2 (no symmetry reduction); test oracle
/// for the octant-reduced production path.
double torus_s2_naive(double x, double cutoff);

/// First `count` integers expressible as a sum of two squares (0, 1, 2, 4,
/// 5, 8, ...): the pole set of the torus condition.
std::vector<double> torus_poles(int count);

/// Shifts a quantization curve by a center-of-mass offset:
/// returns x -> condition(x - x_cm).
std::function<double(double)> cm_shift_curve(std::function<double(double)> condition,
                                             double x_cm);

} // namespace s2spec

#endif
