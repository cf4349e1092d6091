#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdint>

#include "s2spec/errors.hpp"
#include "s2spec/specfun.hpp"

using s2spec::digamma;
using s2spec::digamma_pair;
using s2spec::trigamma;

namespace {

constexpr double kEulerGamma = 0.5772156649015329;

// Reference digamma built independently of the production path: a long
// recurrence shift (about 200 terms) followed by the three leading terms of
// the large-argument expansion.  Accurate to ~1e-14 for moderate |z|.
std::complex<double> digamma_oracle(std::complex<double> z) {
  std::complex<double> acc = 0.0;
  while (z.real() < 200.0) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  const std::complex<double> inv2 = 1.0 / (z * z);
  return acc + std::log(z) - 0.5 / z -
         inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
}

std::uint64_t rng_state = 0x2545f4914f6cdd1dull;
double uniform01() {
  rng_state ^= rng_state << 13;
  rng_state ^= rng_state >> 7;
  rng_state ^= rng_state << 17;
  return (rng_state >> 11) * 0x1.0p-53;
}

} // namespace

TEST_CASE("digamma at classic points") {
  CHECK(digamma(1.0) == doctest::Approx(-kEulerGamma).epsilon(1e-14));
  CHECK(digamma(0.5) ==
        doctest::Approx(-kEulerGamma - 2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(digamma(3.7) == doctest::Approx(digamma(2.7) + 1.0 / 2.7).epsilon(1e-14));
  // reflection region, frozen from a 30-digit evaluation
  CHECK(digamma(-6.3) == doctest::Approx(4.20032100414018447).epsilon(1e-13));
}

TEST_CASE("digamma recurrence over random arguments") {
  for (int i = 0; i < 1000; ++i) {
    const double z = 0.1 + 49.9 * uniform01();
    CHECK(std::fabs(digamma(z + 1.0) - digamma(z) - 1.0 / z) < 1e-13);
  }
}

TEST_CASE("digamma reflection formula") {
  for (int i = 0; i < 200; ++i) {
    double z = -20.0 * uniform01();
    if (std::fabs(z - std::nearbyint(z)) < 1e-3) z -= 0.01;
    const double r = z - std::nearbyint(z);
    const double cot = std::cos(M_PI * r) / std::sin(M_PI * r);
    CHECK(std::fabs(digamma(1.0 - z) - digamma(z) - M_PI * cot) < 1e-11);
  }
}

TEST_CASE("digamma asymptotic bound for large z") {
  for (double z = 21.0; z < 5000.0; z *= 1.7) {
    CHECK(std::fabs(digamma(z) - (std::log(z) - 0.5 / z)) < 0.1 / (z * z));
  }
}

TEST_CASE("digamma and trigamma poles") {
  CHECK_THROWS_AS(digamma(0.0), s2spec::pole_error);
  CHECK_THROWS_AS(digamma(-3.0), s2spec::pole_error);
  CHECK_THROWS_AS(digamma(-1.0 + 5e-15), s2spec::pole_error);
  CHECK_THROWS_AS(trigamma(0.0), s2spec::pole_error);
  CHECK_THROWS_AS(trigamma(-7.0), s2spec::pole_error);
  CHECK_NOTHROW(digamma(-0.5));
  CHECK_NOTHROW(digamma(1e-13));
}

TEST_CASE("complex digamma") {
  const std::complex<double> one(1.0, 0.0);
  CHECK(digamma(one).real() == doctest::Approx(-kEulerGamma).epsilon(1e-14));
  CHECK(digamma(one).imag() == 0.0);

  // Schwarz reflection
  const std::complex<double> z(0.5, 1.0);
  const auto p = digamma(z);
  const auto pc = digamma(std::conj(z));
  CHECK(pc.real() == doctest::Approx(p.real()).epsilon(1e-15));
  CHECK(pc.imag() == doctest::Approx(-p.imag()).epsilon(1e-15));

  // against the independent long-shift oracle
  for (const auto zz : {std::complex<double>(0.5, 2.0),
                        std::complex<double>(0.5, 1.0),
                        std::complex<double>(1.0, 0.7),
                        std::complex<double>(3.2, 11.0),
                        std::complex<double>(-2.5, 1.5)}) {
    const auto got = digamma(zz);
    const auto want = digamma_oracle(zz);
    CHECK(std::abs(got - want) < 1e-12);
  }
  // frozen 30-digit reference
  const auto v = digamma(std::complex<double>(0.5, 2.0));
  CHECK(v.real() == doctest::Approx(0.682186699349424268).epsilon(1e-13));
  CHECK(v.imag() == doctest::Approx(1.57078537102397632).epsilon(1e-13));
}

TEST_CASE("conjugate pair sum is exactly real") {
  for (int i = 0; i < 100; ++i) {
    const double a = -5.0 + 10.0 * uniform01();
    const double b = 0.1 + 10.0 * uniform01();
    if (a <= 0.0 && std::fabs(a - std::nearbyint(a)) < 1e-3) continue;
    const double s = digamma_pair(a, b);
    const auto direct = digamma(std::complex<double>(a, b)) +
                        digamma(std::complex<double>(a, -b));
    CHECK(direct.imag() == 0.0); // conjugate evaluations cancel exactly
    CHECK(s == doctest::Approx(direct.real()).epsilon(1e-15));
  }
}

TEST_CASE("trigamma values and recurrence") {
  CHECK(trigamma(1.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-14));
  CHECK(trigamma(0.5) == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-14));
  CHECK(trigamma(2.5) ==
        doctest::Approx(trigamma(1.5) - 1.0 / (1.5 * 1.5)).epsilon(1e-14));
  CHECK(trigamma(-4.2) == doctest::Approx(28.3548757445977067).epsilon(1e-13));
  for (int i = 0; i < 500; ++i) {
    const double z = 0.1 + 49.9 * uniform01();
    CHECK(std::fabs(trigamma(z + 1.0) - trigamma(z) + 1.0 / (z * z)) < 1e-12);
  }
}

TEST_CASE("complex trigamma") {
  const auto v = trigamma(std::complex<double>(0.5, 1.0));
  CHECK(v.real() == doctest::Approx(0.0367245519410145446).epsilon(1e-12));
  CHECK(v.imag() == doctest::Approx(-1.11706865782960013).epsilon(1e-12));
  const auto w = trigamma(std::complex<double>(1.0, 0.883786));
  CHECK(w.imag() < 0.0);
}
