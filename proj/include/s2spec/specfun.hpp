#ifndef S2SPEC_SPECFUN_HPP
#define S2SPEC_SPECFUN_HPP

#include <complex>

namespace s2spec {

/// Digamma function psi(z) = d/dz log Gamma(z).
/// Throws pole_error when z is within 1e-14 of a nonpositive integer.
double digamma(double z);

/// Digamma for complex argument.  Real arguments delegate to the real path;
/// satisfies psi(conj z) = conj(psi(z)).
std::complex<double> digamma(std::complex<double> z);

/// psi(a+ib) + psi(a-ib) computed as 2 Re psi(a+ib): exactly real, no
/// cancellation between the conjugate evaluations.
double digamma_pair(double a, double b);

/// Trigamma function psi'(z).
double trigamma(double z);

/// Trigamma for complex argument.
std::complex<double> trigamma(std::complex<double> z);

} // namespace s2spec

#endif
