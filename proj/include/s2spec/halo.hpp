#ifndef S2SPEC_HALO_HPP
#define S2SPEC_HALO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace s2spec {

/// x = 2 m E R^2 / (hbar c)^2 and its inverse.
double x_from_energy(double energy_mev, double mass_mev, double radius_fm);
double energy_from_x(double x, double mass_mev, double radius_fm);

/// One s-wave spin/isospin channel of the halo pair.  atilde_fixed holds
/// (value, sigma) when the scattering length is an input rather than fitted.
struct Channel {
  int s = 0;
  int t = 0;
  std::optional<std::pair<double, double>> atilde_fixed;
};

/// A measured level used as fit input, on branch 0 of its band.
struct MeasuredLevel {
  double energy_mev = 0.0;
  double sigma_mev = 0.0;
  int channel = 0;
  int band = 0;
  std::string label;
};

/// Core quantum numbers, constituent mass and channel content of one
/// two-nucleon halo system.
struct HaloSystem {
  std::string name;
  std::string version;
  int core_two_j = 0;
  int core_parity = 1;
  double mass_mev = 0.0;
  std::vector<Channel> channels;
  std::vector<MeasuredLevel> levels;
};

/// Reads a halo-system description file (JSON, schema in the README).
/// Throws schema_error on malformed input and selection_rule_error when a
/// channel has S+T even.
HaloSystem load_system(const std::string& path);

/// Quantum-number content of one rotational band of a channel.
struct BandQuantum {
  int L = 0;
  int parity = 1;
  std::vector<int> j_nn;  // J of the nucleon pair, |L-S| .. L+S
  std::vector<int> two_j; // 2J of the core-coupled multiplet, sorted unique
};

/// Bands L = 0..l_max of one channel.  Channels with S+T even cannot feel the
/// s-wave contact interaction and are rejected.
std::vector<BandQuantum> allowed_bands(const HaloSystem& system, int channel,
                                       int l_max);

/// Central (noise-free) fit output for one channel.
struct ChannelFit {
  double r = 0.0;      // fm
  double a = 0.0;      // fm
  double atilde = 0.0;
  double log_a_over_r = 0.0;
};

struct LevelSpec {
  double energy_mev = 0.0;
  int band = 0;
};

/// Two-level fit: solves Z_{L1}(x(E1, R)) = Z_{L2}(x(E2, R)) for R on an
/// R in [0.5, 50] fm log grid (200 points), both levels on branch 0, then
/// reads off log(a/R).  Throws fit_error on pole collision or no bracket.
ChannelFit fit_two_levels(double mass_mev, const LevelSpec& level1,
                          const LevelSpec& level2);

/// One-level fit with atilde known: solves Z_L(x(E0, R)) = -pi/(2 atilde).
ChannelFit fit_one_level(double mass_mev, const LevelSpec& level0,
                         double atilde);

struct LevelInput {
  double energy_mev = 0.0;
  double sigma_mev = 0.0;
  int band = 0;
};

/// One Monte-Carlo fit task: either two measured levels, or one level plus a
/// Gaussian prior on atilde (sampled independently).
struct FitTask {
  double mass_mev = 0.0;
  LevelInput level1;
  std::optional<LevelInput> level2;
  std::optional<std::pair<double, double>> atilde_prior;
};

/// Fitted parameters with Monte-Carlo means and standard deviations.
struct FitResult {
  double a = 0.0;
  double r = 0.0;
  double atilde = 0.0;
  double a_sigma = 0.0;
  double r_sigma = 0.0;
  double atilde_sigma = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
  double failure_fraction = 0.0;
};

/// Gaussian resampling of all uncertain inputs with one independent stream
/// per sample index: deterministic for a fixed seed regardless of execution
/// order.  Failed samples are dropped and counted; more than 1% failures is
/// an error.
FitResult mc_propagate(const FitTask& task, long samples, std::uint64_t seed);

/// Per-channel fit of a whole system: the channel carrying measured levels
/// fixes the geometry (R); fixed-atilde channels without levels inherit R.
struct ChannelResult {
  ChannelFit central;
  FitResult mc;
};

struct SystemFit {
  std::string system_name;
  std::string system_version;
  long samples = 0;
  std::uint64_t seed = 0;
  double failure_fraction = 0.0;
  std::vector<ChannelResult> channels; // parallel to HaloSystem::channels
};

SystemFit fit_system(const HaloSystem& system, long samples, std::uint64_t seed);

/// One predicted (or reproduced) level.
struct EnergyLevel {
  int channel = 0;
  int L = 0;
  int branch = 0;
  double x = 0.0;
  double energy_mev = 0.0;
  double sigma_mev = 0.0;
  int parity = 1;
  std::vector<int> two_j_values;
  std::string label;
};

/// Full spectrum for every channel and band L <= l_max, branches
/// 0..levels_per_band-1, sorted by energy.  Uncertainties are tallied by
/// re-running the per-sample fits of `fit` (same seed, same draw order) and
/// solving every level per sample; samples whose solve fails are dropped for
/// that level only.
std::vector<EnergyLevel> predict_spectrum(const HaloSystem& system,
                                          const SystemFit& fit, int l_max,
                                          int levels_per_band);

} // namespace s2spec

#endif
