#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "s2spec/errors.hpp"
#include "s2spec/halo.hpp"
#include "s2spec/quantization.hpp"

using namespace s2spec;

namespace {

std::string data_path(const char* name) {
  return std::string(S2SPEC_DATA_DIR) + "/" + name;
}

HaloSystem make_he6() { return load_system(data_path("he6.json")); }

bool same_bits(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

} // namespace

TEST_CASE("x/energy conversions") {
  const double x = x_from_energy(-0.972, 939.565, 6.258);
  CHECK(x == doctest::Approx(-1.8371).epsilon(1e-4));
  CHECK(x_from_energy(0.0, 939.565, 6.258) == 0.0);
  for (const double e : {-3.1, -0.4, 0.7, 12.0}) {
    const double back = energy_from_x(x_from_energy(e, 938.918, 4.4), 938.918, 4.4);
    CHECK(back == doctest::Approx(e).epsilon(1e-14));
  }
}

TEST_CASE("system files load and validate") {
  const HaloSystem he6 = make_he6();
  CHECK(he6.name == "6He");
  CHECK(he6.core_two_j == 0);
  CHECK(he6.core_parity == 1);
  CHECK(he6.mass_mev == doctest::Approx(939.565));
  REQUIRE(he6.channels.size() == 1);
  CHECK_FALSE(he6.channels[0].atilde_fixed.has_value());
  REQUIRE(he6.levels.size() == 2);

  const HaloSystem li11 = load_system(data_path("li11.json"));
  CHECK(li11.core_two_j == 3);
  CHECK(li11.core_parity == -1);
  REQUIRE(li11.channels.size() == 1);
  CHECK(li11.channels[0].atilde_fixed->first == doctest::Approx(-5.58));

  CHECK_THROWS_AS(load_system("/nonexistent/system.json"), schema_error);
}

TEST_CASE("malformed system files are rejected") {
  const auto write_tmp = [](const char* text) {
    const std::string path = "/tmp/s2spec_bad_system.json";
    std::ofstream out(path);
    out << text;
    out.close();
    return path;
  };
  CHECK_THROWS_AS(load_system(write_tmp("{not json")), schema_error);
  CHECK_THROWS_AS(load_system(write_tmp("{\"format_version\": 1}")), schema_error);
  // S+T even violates antisymmetry of the s-wave pair
  CHECK_THROWS_AS(load_system(write_tmp(R"({
    "format_version": 1, "name": "x", "core": {"two_j": 0, "parity": 1},
    "mass_mev": 939.0,
    "channels": [{"S": 0, "T": 0, "atilde": "fitted"}],
    "levels": []})")), selection_rule_error);
  CHECK_THROWS_AS(load_system(write_tmp(R"({
    "format_version": 1, "name": "x", "core": {"two_j": 0, "parity": 1},
    "mass_mev": 939.0,
    "channels": [{"S": 0, "T": 1, "atilde": "fitted"}],
    "levels": [{"channel": 3, "L": 0, "energy_mev": -1.0, "sigma_mev": 0.1}]})")),
                  schema_error);
}

TEST_CASE("allowed bands and multiplets") {
  const HaloSystem he6 = make_he6();
  const auto bands = allowed_bands(he6, 0, 2);
  REQUIRE(bands.size() == 3);
  CHECK(bands[0].L == 0);
  CHECK(bands[0].parity == 1);
  CHECK(bands[0].j_nn == std::vector<int>{0});
  CHECK(bands[0].two_j == std::vector<int>{0});
  CHECK(bands[1].parity == -1);
  CHECK(bands[1].j_nn == std::vector<int>{1});
  CHECK(bands[1].two_j == std::vector<int>{2});
  CHECK(bands[2].parity == 1);
  CHECK(bands[2].two_j == std::vector<int>{4});

  // 11Li: 3/2- core couples L=2 into the {1/2, 3/2, 5/2, 7/2} multiplet
  const HaloSystem li11 = load_system(data_path("li11.json"));
  const auto b11 = allowed_bands(li11, 0, 2);
  CHECK(b11[2].parity == -1); // (-1)^2 * core parity
  CHECK(b11[2].two_j == std::vector<int>{1, 3, 5, 7});
  CHECK(b11[1].parity == 1);  // (-1)^1 * (-1)

  // 6Li spin-triplet channel, L=2: J_NN in {1, 2, 3}
  const HaloSystem li6 = load_system(data_path("li6.json"));
  const auto b6 = allowed_bands(li6, 0, 2);
  CHECK(b6[2].j_nn == std::vector<int>{1, 2, 3});
  CHECK(b6[2].two_j == std::vector<int>{2, 4, 6});

  HaloSystem bad = he6;
  bad.channels[0].t = 0; // S+T even
  CHECK_THROWS_AS(allowed_bands(bad, 0, 2), selection_rule_error);
}

TEST_CASE("two-level fit reproduces the helium-6 parameters") {
  const auto fit = fit_two_levels(939.565, {-0.972, 0}, {0.824, 2});
  CHECK(fit.r == doctest::Approx(6.258124).epsilon(2e-6));
  CHECK(fit.a == doctest::Approx(8.292840).epsilon(2e-6));
  CHECK(fit.atilde == doctest::Approx(-5.579855).epsilon(2e-6));
  CHECK(fit.log_a_over_r == doctest::Approx(0.2815120).epsilon(1e-5));

  // residuals of both band conditions
  const double x1 = x_from_energy(-0.972, 939.565, fit.r);
  const double x2 = x_from_energy(0.824, 939.565, fit.r);
  CHECK(std::fabs(z_closed(0, x1) - fit.log_a_over_r) < 1e-10);
  CHECK(std::fabs(z_closed(2, x2) - fit.log_a_over_r) < 1e-10);

  // consistency relation between the stored parameters
  CHECK(fit.atilde ==
        doctest::Approx(-M_PI / (2.0 * std::log(fit.a / fit.r))).epsilon(1e-12));

  // fixed point: refit on the reproduced energies returns the same geometry
  const auto refit = fit_two_levels(
      939.565,
      {energy_from_x(solve_band({0, fit.log_a_over_r, 0, 1e-13}), 939.565, fit.r), 0},
      {energy_from_x(solve_band({2, fit.log_a_over_r, 0, 1e-13}), 939.565, fit.r), 2});
  CHECK(refit.r == doctest::Approx(fit.r).epsilon(1e-10));
  CHECK(refit.a == doctest::Approx(fit.a).epsilon(1e-10));
}

TEST_CASE("two-level fit error paths") {
  // both levels forced off branch 0 before the scan window opens
  CHECK_THROWS_AS(fit_two_levels(939.565, {500.0, 0}, {800.0, 2}), fit_error);
  CHECK_THROWS_AS(fit_two_levels(939.565, {-0.5, 0}, {-0.5, 0}),
                  std::invalid_argument);
}

TEST_CASE("one-level fit reproduces the lithium-11 radius") {
  const auto fit = fit_one_level(939.565, {-0.369, 0}, -5.58);
  CHECK(fit.r == doctest::Approx(10.157015).epsilon(2e-6));
  CHECK(fit.a == doctest::Approx(13.459286).epsilon(2e-6));
  CHECK(std::fabs(fit.r - 10.154) < 0.01);

  // feeding the predicted second level into a two-level fit recovers atilde
  const double e2 = energy_from_x(solve_band({2, fit.log_a_over_r, 0, 1e-13}),
                                  939.565, fit.r);
  const auto refit = fit_two_levels(939.565, {-0.369, 0}, {e2, 2});
  CHECK(refit.atilde == doctest::Approx(-5.58).epsilon(1e-8));
}

TEST_CASE("lithium-6 fit determines the spin-triplet scattering length") {
  const auto fit = fit_two_levels(938.918, {-3.6989, 0}, {-1.5129, 2});
  CHECK(fit.atilde == doctest::Approx(3.7602).epsilon(2e-4));
  CHECK(fit.r == doctest::Approx(5.4464).epsilon(2e-4));
}

TEST_CASE("monte carlo propagation") {
  FitTask he6;
  he6.mass_mev = 939.565;
  he6.level1 = {-0.972, 0.006, 0};
  he6.level2 = LevelInput{0.824, 0.006, 2};

  SUBCASE("zero input widths give zero output widths") {
    FitTask exact = he6;
    exact.level1.sigma_mev = 0.0;
    exact.level2->sigma_mev = 0.0;
    const auto res = mc_propagate(exact, 64, 7);
    CHECK(res.a_sigma == 0.0);
    CHECK(res.r_sigma == 0.0);
    CHECK(res.atilde_sigma == 0.0);
    CHECK(res.failure_fraction == 0.0);
    CHECK(res.atilde == doctest::Approx(-5.579855).epsilon(1e-6));
  }

  SUBCASE("same seed gives bit-identical results") {
    const auto r1 = mc_propagate(he6, 500, 42);
    const auto r2 = mc_propagate(he6, 500, 42);
    CHECK(same_bits(r1.a, r2.a));
    CHECK(same_bits(r1.r, r2.r));
    CHECK(same_bits(r1.atilde, r2.atilde));
    CHECK(same_bits(r1.a_sigma, r2.a_sigma));
    CHECK(same_bits(r1.atilde_sigma, r2.atilde_sigma));
    const auto r3 = mc_propagate(he6, 500, 43);
    CHECK_FALSE(same_bits(r1.atilde, r3.atilde));
  }

  SUBCASE("sample statistics near the quoted uncertainties") {
    const auto res = mc_propagate(he6, 2000, 11);
    CHECK(res.atilde == doctest::Approx(-5.58).epsilon(0.01));
    CHECK(res.atilde_sigma > 0.05);
    CHECK(res.atilde_sigma < 0.07);
    CHECK(res.r_sigma > 0.010);
    CHECK(res.r_sigma < 0.020);
  }

  SUBCASE("doubling samples moves the mean by less than 3 sigma/sqrt(n)") {
    FitTask li11;
    li11.mass_mev = 939.565;
    li11.level1 = {-0.369, 0.001, 0};
    li11.atilde_prior = {{-5.58, 0.06}};
    int ok = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
      const auto a = mc_propagate(li11, 400, 1000 + t);
      const auto b = mc_propagate(li11, 800, 5000 + t);
      if (std::fabs(a.r - b.r) < 3.0 * a.r_sigma / std::sqrt(400.0)) ++ok;
    }
    CHECK(ok >= 19);
  }

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(mc_propagate(he6, 1, 1), std::invalid_argument);
    FitTask bad = he6;
    bad.atilde_prior = {{-5.58, 0.06}};
    CHECK_THROWS_AS(mc_propagate(bad, 10, 1), std::invalid_argument);
  }
}

TEST_CASE("system fit wires channels together") {
  const HaloSystem li6 = load_system(data_path("li6.json"));
  const auto fit = fit_system(li6, 400, 3);
  REQUIRE(fit.channels.size() == 2);
  // spin-triplet channel is fitted, spin-singlet inherits the geometry
  CHECK(fit.channels[0].central.atilde == doctest::Approx(3.7602).epsilon(2e-4));
  CHECK(fit.channels[1].central.atilde == doctest::Approx(-5.58));
  CHECK(fit.channels[1].central.r == fit.channels[0].central.r);
  CHECK(fit.channels[1].central.a ==
        doctest::Approx(fit.channels[0].central.r *
                        std::exp(-M_PI / (2.0 * -5.58))).epsilon(1e-12));
  CHECK(fit.channels[0].mc.atilde_sigma > 0.0);
  CHECK(fit.channels[1].mc.atilde_sigma > 0.0);
}

TEST_CASE("predicted spectrum") {
  const HaloSystem he6 = make_he6();
  const auto fit = fit_system(he6, 600, 5);
  const auto levels = predict_spectrum(he6, fit, 2, 3);
  REQUIRE(levels.size() == 9);

  // sorted by energy, parity bookkeeping, selection rule
  for (std::size_t i = 1; i < levels.size(); ++i)
    CHECK(levels[i - 1].energy_mev <= levels[i].energy_mev);
  for (const auto& lv : levels) {
    const int expect = (lv.L % 2 == 0 ? 1 : -1) * he6.core_parity;
    CHECK(lv.parity == expect);
    const auto& ch = he6.channels[lv.channel];
    CHECK((ch.s + ch.t) % 2 == 1);
  }

  // fitted inputs are reproduced
  CHECK(levels[0].L == 0);
  CHECK(levels[0].energy_mev == doctest::Approx(-0.972).epsilon(2e-3));
  bool saw_2plus = false;
  for (const auto& lv : levels)
    if (lv.L == 2 && lv.branch == 0) {
      saw_2plus = true;
      CHECK(lv.energy_mev == doctest::Approx(0.824).epsilon(2e-3));
    }
  CHECK(saw_2plus);

  // the lowest L=1 state lies below threshold
  bool saw_1minus = false;
  for (const auto& lv : levels)
    if (lv.L == 1 && lv.branch == 0) {
      saw_1minus = true;
      CHECK(lv.energy_mev < 0.0);
      CHECK(lv.energy_mev == doctest::Approx(-0.3277).epsilon(0.02));
    }
  CHECK(saw_1minus);

  // second breathing state of the L=0 band
  for (const auto& lv : levels)
    if (lv.L == 0 && lv.branch == 1) {
      CHECK(lv.energy_mev == doctest::Approx(0.9629).epsilon(3e-3));
      CHECK(lv.sigma_mev == doctest::Approx(0.005).epsilon(0.5));
    }
}

TEST_CASE("scaling covariance of the fit") {
  // energies scaled by c and mass by 1/c leave x(E, R) and hence the whole
  // fit geometry unchanged
  const double c = 3.7;
  const auto base = fit_two_levels(939.565, {-0.972, 0}, {0.824, 2});
  const auto scaled = fit_two_levels(939.565 / c, {-0.972 * c, 0}, {0.824 * c, 2});
  CHECK(scaled.r == doctest::Approx(base.r).epsilon(1e-10));
  CHECK(scaled.atilde == doctest::Approx(base.atilde).epsilon(1e-10));
}
