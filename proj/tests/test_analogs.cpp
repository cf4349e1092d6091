#include <doctest.h>

#include <cmath>
#include <vector>

#include "s2spec/analogs.hpp"
#include "s2spec/errors.hpp"
#include "s2spec/quantization.hpp"

using namespace s2spec;

namespace {

constexpr double kEulerGamma = 0.5772156649015329;

// bisection for a strictly bracketed root
template <class F>
double bisect(const F& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("harmonic oscillator condition") {
  CHECK(ho_condition(0.0) ==
        doctest::Approx(0.5 * (kEulerGamma + 2.0 * std::log(2.0))).epsilon(1e-13));
  CHECK(ho_condition(0.0) == doctest::Approx(0.98175501301071174).epsilon(1e-13));

  // poles at odd positive x
  CHECK_THROWS_AS(ho_condition(1.0), pole_error);
  CHECK_THROWS_AS(ho_condition(3.0), pole_error);
  CHECK_THROWS_AS(ho_condition(5.0), pole_error);

  // bound-state zero at 1 - 2 * (positive digamma root)
  const double x0 = bisect([](double x) { return ho_condition(x); }, -4.0, -0.5);
  CHECK(x0 == doctest::Approx(-1.92326428993672468).epsilon(1e-10));

  // approaches the non-interacting energies from both sides
  CHECK(ho_condition(1.0 - 1e-6) > 1e3);
  CHECK(ho_condition(1.0 + 1e-6) < -1e3);
}

TEST_CASE("torus pole set") {
  const auto ps = torus_poles(6);
  CHECK(ps == std::vector<double>{0, 1, 2, 4, 5, 8});
  for (const double p : {0.0, 1.0, 2.0, 4.0, 5.0})
    CHECK_THROWS_AS(torus_s2(p, {100.0, false}), pole_error);
  // 3 is not a sum of two squares
  CHECK(std::isfinite(torus_s2(3.0, {100.0, false})));
}

TEST_CASE("octant reduction equals the naive full sum") {
  for (const double x : {-1.0, -0.37, 2.5, 3.3, 6.6})
    for (const double lam : {20.0, 57.0, 100.0})
      CHECK(torus_s2(x, {lam, false}) ==
            doctest::Approx(torus_s2_naive(x, lam)).epsilon(1e-13));
}

TEST_CASE("torus extrapolation is ladder stable") {
  // cutoff fluctuations are number-theoretic, so the stability achievable by
  // Richardson on circular cutoffs is ~1e-5, not arbitrary precision
  const double a = torus_s2(-1.0, {200.0, true});
  const double b = torus_s2(-1.0, {300.0, true});
  CHECK(std::fabs(a - b) < 1e-4);
  CHECK(a == doctest::Approx(0.00248).epsilon(0.05));
}

TEST_CASE("torus bound-state zero below x = 0") {
  const auto f = [](double x) { return torus_s2(x, {1500.0, false}); };
  CHECK(f(-4.0) < 0.0);
  CHECK(f(-0.01) > 0.0);
  const double x0 = bisect(f, -4.0, -0.01);
  CHECK(x0 < 0.0);
  CHECK(x0 == doctest::Approx(-1.0076).epsilon(2e-3));
}

TEST_CASE("center-of-mass shift") {
  // identity shift
  const auto same = cm_shift_curve([](double x) { return ho_condition(x); }, 0.0);
  for (int i = 0; i < 50; ++i) {
    const double x = -3.0 + 0.11 * i;
    CHECK(same(x) == ho_condition(x));
  }

  // shifted harmonic oscillator poles move to 3, 5, 7
  const auto ho2 = cm_shift_curve([](double x) { return ho_condition(x); }, 2.0);
  for (const double p : {3.0, 5.0, 7.0})
    CHECK_THROWS_AS(ho2(p), pole_error);
  CHECK(std::isfinite(ho2(1.0)));

  // a shifted torus zero moves by exactly the shift
  const auto torus = [](double x) { return torus_s2(x, {800.0, false}); };
  const double z0 = bisect(torus, -4.0, -0.01);
  const auto shifted = cm_shift_curve(torus, 1.0);
  const double z1 = bisect(shifted, -3.0, 0.99);
  CHECK(z1 == doctest::Approx(z0 + 1.0).epsilon(1e-10));
}

TEST_CASE("sphere bands are not related by any constant shift") {
  // fixed grid inside the first interior branch of band 1
  std::vector<double> grid;
  for (int i = 0; i < 25; ++i) grid.push_back(2.3 + i * (7.7 - 2.3) / 24.0);
  const auto z0_poles = poles(0, 8);
  double min_max_dist = 1e300;
  for (double c = -6.0; c <= 6.0; c += 0.05) {
    bool usable = true;
    double max_dist = 0.0;
    for (const double x : grid) {
      bool near_pole = false;
      for (const double p : z0_poles)
        if (std::fabs(x - c - p) < 0.05) near_pole = true;
      if (near_pole) { // the shifted curve diverges inside the grid
        usable = false;
        break;
      }
      max_dist = std::max(max_dist, std::fabs(z_closed(1, x) - z_closed(0, x - c)));
    }
    if (usable) min_max_dist = std::min(min_max_dist, max_dist);
  }
  CHECK(min_max_dist > 0.1);
}
