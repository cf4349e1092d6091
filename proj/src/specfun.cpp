#include "s2spec/specfun.hpp"

#include <cmath>
#include <string>

#include "s2spec/errors.hpp"

namespace s2spec {

namespace {

// B_2 .. B_14; the asymptotic series is applied only for Re(z) >= 8 where the
// first omitted term (B_16/(16 z^16)) is below 2e-15.
constexpr double kBernoulli[] = {
    1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0};
constexpr int kNumBernoulli = 7;
constexpr double kShiftThreshold = 8.0;
constexpr double kPoleTolerance = 1e-14;

void check_real_pole(double z, const char* name) {
  if (z > 0.5) return;
  const double n = std::nearbyint(z);
  if (n <= 0.0 && std::fabs(z - n) < kPoleTolerance)
    throw pole_error(std::string(name) + ": argument at nonpositive integer " +
                         std::to_string(static_cast<long long>(n)),
                     z);
}

// cot(pi z) reduced with the period pi: cot(pi z) = cot(pi (z - round(z))).
double cot_pi(double z) {
  const double r = z - std::nearbyint(z);
  return std::cos(M_PI * r) / std::sin(M_PI * r);
}

std::complex<double> cot_pi(std::complex<double> z) {
  if (std::fabs(z.imag()) > 6.0)
    return std::complex<double>(0.0, z.imag() > 0 ? -1.0 : 1.0);
  const std::complex<double> w(z.real() - std::nearbyint(z.real()), z.imag());
  return std::cos(M_PI * w) / std::sin(M_PI * w);
}

} // namespace

double digamma(double z) {
  check_real_pole(z, "digamma");
  if (z < 0.0) return digamma(1.0 - z) - M_PI * cot_pi(z);
  double acc = 0.0;
  while (z < kShiftThreshold) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  const double inv2 = 1.0 / (z * z);
  double s = std::log(z) - 0.5 / z;
  double p = inv2;
  for (int k = 0; k < kNumBernoulli; ++k) {
    s -= kBernoulli[k] * p / (2.0 * (k + 1));
    p *= inv2;
  }
  return acc + s;
}

std::complex<double> digamma(std::complex<double> z) {
  if (z.imag() == 0.0) return {digamma(z.real()), 0.0};
  if (z.real() < 0.0)
    return digamma(1.0 - z) - M_PI * cot_pi(z);
  std::complex<double> acc = 0.0;
  while (z.real() < kShiftThreshold) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  const std::complex<double> inv2 = 1.0 / (z * z);
  std::complex<double> s = std::log(z) - 0.5 / z;
  std::complex<double> p = inv2;
  for (int k = 0; k < kNumBernoulli; ++k) {
    s -= kBernoulli[k] * p / (2.0 * (k + 1));
    p *= inv2;
  }
  return acc + s;
}

double digamma_pair(double a, double b) {
  if (b == 0.0) return 2.0 * digamma(a);
  return 2.0 * digamma(std::complex<double>(a, b)).real();
}

double trigamma(double z) {
  check_real_pole(z, "trigamma");
  if (z < 0.0) {
    const double r = z - std::nearbyint(z);
    const double s = std::sin(M_PI * r);
    return M_PI * M_PI / (s * s) - trigamma(1.0 - z);
  }
  double acc = 0.0;
  while (z < kShiftThreshold) {
    acc += 1.0 / (z * z);
    z += 1.0;
  }
  const double inv = 1.0 / z;
  const double inv2 = inv * inv;
  double s = inv + 0.5 * inv2;
  double p = inv * inv2;
  for (int k = 0; k < kNumBernoulli; ++k) {
    s += kBernoulli[k] * p;
    p *= inv2;
  }
  return acc + s;
}

std::complex<double> trigamma(std::complex<double> z) {
  if (z.imag() == 0.0) return {trigamma(z.real()), 0.0};
  if (z.real() < 0.0) {
    if (std::fabs(z.imag()) > 20.0) return -trigamma(1.0 - z);
    const std::complex<double> w(z.real() - std::nearbyint(z.real()), z.imag());
    const std::complex<double> s = std::sin(M_PI * w);
    return M_PI * M_PI / (s * s) - trigamma(1.0 - z);
  }
  std::complex<double> acc = 0.0;
  while (z.real() < kShiftThreshold) {
    acc += 1.0 / (z * z);
    z += 1.0;
  }
  const std::complex<double> inv = 1.0 / z;
  const std::complex<double> inv2 = inv * inv;
  std::complex<double> s = inv + 0.5 * inv2;
  std::complex<double> p = inv * inv2;
  for (int k = 0; k < kNumBernoulli; ++k) {
    s += kBernoulli[k] * p;
    p *= inv2;
  }
  return acc + s;
}

} // namespace s2spec
