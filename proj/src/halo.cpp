#include "s2spec/halo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "s2spec/errors.hpp"
#include "s2spec/quantization.hpp"

namespace s2spec {

namespace {

constexpr double kRScanLo = 0.5;  // fm
constexpr double kRScanHi = 50.0; // fm
constexpr int kRScanPoints = 200;
constexpr double kMaxFailureFraction = 0.01;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// One Gaussian stream per (seed, sample index): parallel and serial MC runs
// draw identical numbers.
class GaussianStream {
public:
  GaussianStream(std::uint64_t seed, std::uint64_t index)
      : state_(splitmix64(splitmix64(seed) ^ (index + 0x9e3779b97f4a7c15ull))) {}

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    spare_ = rad * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return rad * std::cos(2.0 * M_PI * u2);
  }

private:
  double uniform() {
    state_ = splitmix64(state_);
    return (static_cast<double>(state_ >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

double first_pole(int L) { return poles(L, 1).front(); }

// Upper end of the R scan keeping every positive-energy level on branch 0.
double admissible_r_max(double mass,
                        const std::vector<LevelSpec>& levels) {
  double r_hi = kRScanHi;
  for (const auto& lv : levels) {
    if (lv.energy_mev <= 0.0) continue;
    const double p0 = first_pole(lv.band);
    const double r_pole = std::sqrt(p0 * kHbarC * kHbarC /
                                    (2.0 * mass * lv.energy_mev));
    r_hi = std::min(r_hi, r_pole * (1.0 - 1e-9));
    if (r_hi <= kRScanLo)
      throw fit_error("fit: level E=" + std::to_string(lv.energy_mev) +
                      " MeV (L=" + std::to_string(lv.band) +
                      ") collides with its band pole already at R=" +
                      std::to_string(r_pole) + " fm");
  }
  return r_hi;
}

// Scans g on a log grid over [kRScanLo, r_hi], bisects the first sign change.
template <class G>
double solve_r(const G& g, double r_hi, const char* what) {
  const double log_lo = std::log(kRScanLo);
  const double log_hi = std::log(r_hi);
  double prev_r = kRScanLo;
  double prev_g = g(prev_r);
  double lo = 0.0, hi = 0.0, g_lo = 0.0, g_hi = 0.0;
  bool found = false;
  for (int i = 1; i <= kRScanPoints; ++i) {
    const double r = std::exp(log_lo + (log_hi - log_lo) * i / kRScanPoints);
    const double cur = g(r);
    if ((prev_g < 0.0) != (cur < 0.0)) {
      lo = prev_r;
      hi = r;
      g_lo = prev_g;
      g_hi = cur;
      found = true;
      break;
    }
    prev_r = r;
    prev_g = cur;
  }
  if (!found)
    throw fit_error(std::string(what) + ": no sign change in R scan [" +
                    std::to_string(kRScanLo) + ", " + std::to_string(r_hi) +
                    "] fm");
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((g_lo < 0.0) == (gm < 0.0)) {
      lo = mid;
      g_lo = gm;
    } else {
      hi = mid;
      g_hi = gm;
    }
  }
  if (g_hi != g_lo) {
    const double rs = hi - g_hi * (hi - lo) / (g_hi - g_lo);
    if (rs > lo && rs < hi) return rs;
  }
  return 0.5 * (lo + hi);
}

double branch0_value(int band, double x) {
  // Fit levels live on branch 0; by construction x stays below the first
  // pole, so the closed form can be evaluated directly.
  return z_closed(band, x);
}

// Per-sample parameters of every channel (R is shared geometry).
struct SystemSample {
  double r = 0.0;
  std::vector<double> atilde;
  std::vector<double> a;
  std::vector<double> log_a_over_r;
};

// Which channel defines the geometry and how.
struct FitPlan {
  int geometry_channel = -1;
  bool two_level = false;
  LevelInput level1, level2;                       // two-level inputs
  std::optional<std::pair<double, double>> prior;  // one-level atilde prior
};

FitPlan make_plan(const HaloSystem& system) {
  FitPlan plan;
  std::vector<std::vector<const MeasuredLevel*>> per_channel(system.channels.size());
  for (const auto& lv : system.levels) {
    if (lv.channel < 0 || lv.channel >= static_cast<int>(system.channels.size()))
      throw schema_error("fit: level references channel " +
                         std::to_string(lv.channel) + " out of range");
    per_channel[lv.channel].push_back(&lv);
  }
  for (std::size_t c = 0; c < system.channels.size(); ++c) {
    if (per_channel[c].empty()) {
      if (!system.channels[c].atilde_fixed)
        throw schema_error("fit: channel " + std::to_string(c) +
                           " has neither levels nor a fixed atilde");
      continue;
    }
    if (plan.geometry_channel >= 0)
      throw schema_error("fit: more than one channel carries measured levels");
    plan.geometry_channel = static_cast<int>(c);
    const auto& lvs = per_channel[c];
    if (system.channels[c].atilde_fixed) {
      if (lvs.size() != 1)
        throw schema_error("fit: fixed-atilde channel must carry exactly one level");
      plan.two_level = false;
      plan.level1 = {lvs[0]->energy_mev, lvs[0]->sigma_mev, lvs[0]->band};
      plan.prior = system.channels[c].atilde_fixed;
    } else {
      if (lvs.size() != 2)
        throw schema_error("fit: fitted channel must carry exactly two levels");
      plan.two_level = true;
      plan.level1 = {lvs[0]->energy_mev, lvs[0]->sigma_mev, lvs[0]->band};
      plan.level2 = {lvs[1]->energy_mev, lvs[1]->sigma_mev, lvs[1]->band};
    }
  }
  if (plan.geometry_channel < 0)
    throw schema_error("fit: no channel carries measured levels");
  return plan;
}

// Runs the full system fit for one (possibly noise-free) draw.  Draw order:
// level energies of the geometry channel, its atilde prior if any, then the
// fixed atilde of every other channel in channel order.
SystemSample run_system_sample(const HaloSystem& system, const FitPlan& plan,
                               GaussianStream* stream) {
  const auto draw = [&](double mean, double sigma) {
    return stream ? mean + sigma * stream->normal() : mean;
  };
  SystemSample out;
  out.atilde.resize(system.channels.size());
  out.a.resize(system.channels.size());
  out.log_a_over_r.resize(system.channels.size());

  ChannelFit fit;
  const double e1 = draw(plan.level1.energy_mev, plan.level1.sigma_mev);
  if (plan.two_level) {
    const double e2 = draw(plan.level2.energy_mev, plan.level2.sigma_mev);
    fit = fit_two_levels(system.mass_mev, {e1, plan.level1.band},
                         {e2, plan.level2.band});
  } else {
    const double at = draw(plan.prior->first, plan.prior->second);
    fit = fit_one_level(system.mass_mev, {e1, plan.level1.band}, at);
  }
  out.r = fit.r;
  for (std::size_t c = 0; c < system.channels.size(); ++c) {
    if (static_cast<int>(c) == plan.geometry_channel) {
      out.atilde[c] = fit.atilde;
      out.a[c] = fit.a;
      out.log_a_over_r[c] = fit.log_a_over_r;
    } else {
      const auto& fx = *system.channels[c].atilde_fixed;
      const double at = draw(fx.first, fx.second);
      const double ell = -M_PI / (2.0 * at);
      out.atilde[c] = at;
      out.a[c] = fit.r * std::exp(ell);
      out.log_a_over_r[c] = ell;
    }
  }
  return out;
}

// Welford accumulator: exact zero spread for identical samples.
struct Tally {
  double mu = 0.0;
  double m2 = 0.0;
  long n = 0;
  void add(double v) {
    ++n;
    const double delta = v - mu;
    mu += delta / n;
    m2 += delta * (v - mu);
  }
  double mean() const { return n > 0 ? mu : 0.0; }
  double sigma() const { return n > 0 ? std::sqrt(m2 / n) : 0.0; }
};

int parse_parity(const nlohmann::json& j) {
  const int p = j.get<int>();
  if (p != 1 && p != -1) throw schema_error("parity must be +1 or -1");
  return p;
}

} // namespace

double x_from_energy(double energy_mev, double mass_mev, double radius_fm) {
  if (mass_mev <= 0.0 || radius_fm <= 0.0)
    throw std::invalid_argument("x_from_energy: mass and radius must be positive");
  return 2.0 * mass_mev * energy_mev * radius_fm * radius_fm / (kHbarC * kHbarC);
}

double energy_from_x(double x, double mass_mev, double radius_fm) {
  if (mass_mev <= 0.0 || radius_fm <= 0.0)
    throw std::invalid_argument("energy_from_x: mass and radius must be positive");
  return x * kHbarC * kHbarC / (2.0 * mass_mev * radius_fm * radius_fm);
}

HaloSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw schema_error("cannot open system file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw schema_error("invalid JSON in " + path + ": " + e.what());
  }
  try {
    HaloSystem sys;
    if (j.at("format_version").get<int>() != 1)
      throw schema_error("unsupported format_version");
    sys.name = j.at("name").get<std::string>();
    sys.version = j.value("version", std::string("1"));
    sys.core_two_j = j.at("core").at("two_j").get<int>();
    if (sys.core_two_j < 0) throw schema_error("core.two_j must be >= 0");
    sys.core_parity = parse_parity(j.at("core").at("parity"));
    sys.mass_mev = j.at("mass_mev").get<double>();
    if (sys.mass_mev <= 0.0) throw schema_error("mass_mev must be positive");
    for (const auto& jc : j.at("channels")) {
      Channel ch;
      ch.s = jc.at("S").get<int>();
      ch.t = jc.at("T").get<int>();
      if (ch.s < 0 || ch.s > 1 || ch.t < 0 || ch.t > 1)
        throw schema_error("channel S and T must be 0 or 1");
      if ((ch.s + ch.t) % 2 == 0)
        throw selection_rule_error(
            "channel S=" + std::to_string(ch.s) + ", T=" + std::to_string(ch.t) +
            ": S+T must be odd for an antisymmetric s-wave pair");
      const auto& ja = jc.at("atilde");
      if (ja.is_string()) {
        if (ja.get<std::string>() != "fitted")
          throw schema_error("channel atilde must be \"fitted\" or {value, sigma}");
      } else {
        const double sigma = ja.at("sigma").get<double>();
        if (sigma < 0.0) throw schema_error("atilde sigma must be >= 0");
        ch.atilde_fixed = {ja.at("value").get<double>(), sigma};
      }
      sys.channels.push_back(ch);
    }
    if (sys.channels.empty()) throw schema_error("no channels");
    for (const auto& jl : j.at("levels")) {
      MeasuredLevel lv;
      lv.energy_mev = jl.at("energy_mev").get<double>();
      lv.sigma_mev = jl.at("sigma_mev").get<double>();
      if (lv.sigma_mev < 0.0) throw schema_error("level sigma_mev must be >= 0");
      lv.channel = jl.at("channel").get<int>();
      if (lv.channel < 0 || lv.channel >= static_cast<int>(sys.channels.size()))
        throw schema_error("level channel index out of range");
      lv.band = jl.at("L").get<int>();
      if (lv.band < 0) throw schema_error("level L must be >= 0");
      lv.label = jl.value("label", std::string());
      sys.levels.push_back(lv);
    }
    return sys;
  } catch (const nlohmann::json::exception& e) {
    throw schema_error("system file " + path + " does not match schema: " +
                       e.what());
  }
}

std::vector<BandQuantum> allowed_bands(const HaloSystem& system, int channel,
                                       int l_max) {
  if (channel < 0 || channel >= static_cast<int>(system.channels.size()))
    throw std::invalid_argument("allowed_bands: channel index out of range");
  const Channel& ch = system.channels[channel];
  if ((ch.s + ch.t) % 2 == 0)
    throw selection_rule_error("allowed_bands: channel S=" + std::to_string(ch.s) +
                               ", T=" + std::to_string(ch.t) +
                               " has S+T even and decouples from the contact "
                               "interaction");
  std::vector<BandQuantum> out;
  for (int L = 0; L <= l_max; ++L) {
    BandQuantum b;
    b.L = L;
    b.parity = ((L % 2 == 0) ? 1 : -1) * system.core_parity;
    std::set<int> two_j;
    for (int j = std::abs(L - ch.s); j <= L + ch.s; ++j) {
      b.j_nn.push_back(j);
      for (int tj = std::abs(2 * j - system.core_two_j);
           tj <= 2 * j + system.core_two_j; tj += 2)
        two_j.insert(tj);
    }
    b.two_j.assign(two_j.begin(), two_j.end());
    out.push_back(std::move(b));
  }
  return out;
}

ChannelFit fit_two_levels(double mass_mev, const LevelSpec& level1,
                          const LevelSpec& level2) {
  if (mass_mev <= 0.0) throw std::invalid_argument("fit_two_levels: mass <= 0");
  if (level1.band == level2.band && level1.energy_mev == level2.energy_mev)
    throw std::invalid_argument("fit_two_levels: degenerate level pair");
  const double r_hi = admissible_r_max(mass_mev, {level1, level2});
  const auto g = [&](double r) {
    return branch0_value(level1.band, x_from_energy(level1.energy_mev, mass_mev, r)) -
           branch0_value(level2.band, x_from_energy(level2.energy_mev, mass_mev, r));
  };
  const double r = solve_r(g, r_hi, "fit_two_levels");
  ChannelFit fit;
  fit.r = r;
  fit.log_a_over_r =
      branch0_value(level1.band, x_from_energy(level1.energy_mev, mass_mev, r));
  fit.a = r * std::exp(fit.log_a_over_r);
  fit.atilde = -M_PI / (2.0 * fit.log_a_over_r);
  return fit;
}

ChannelFit fit_one_level(double mass_mev, const LevelSpec& level0,
                         double atilde) {
  if (mass_mev <= 0.0) throw std::invalid_argument("fit_one_level: mass <= 0");
  if (atilde == 0.0 || !std::isfinite(atilde))
    throw std::invalid_argument("fit_one_level: atilde must be finite and nonzero");
  const double ell = -M_PI / (2.0 * atilde);
  const double r_hi = admissible_r_max(mass_mev, {level0});
  const auto g = [&](double r) {
    return branch0_value(level0.band, x_from_energy(level0.energy_mev, mass_mev, r)) -
           ell;
  };
  ChannelFit fit;
  fit.r = solve_r(g, r_hi, "fit_one_level");
  fit.log_a_over_r = ell;
  fit.a = fit.r * std::exp(ell);
  fit.atilde = atilde;
  return fit;
}

FitResult mc_propagate(const FitTask& task, long samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("mc_propagate: samples < 2");
  if (task.level2 && task.atilde_prior)
    throw std::invalid_argument("mc_propagate: task cannot have both a second "
                                "level and an atilde prior");
  if (!task.level2 && !task.atilde_prior)
    throw std::invalid_argument("mc_propagate: task needs a second level or an "
                                "atilde prior");
  Tally ta, tr, tat;
  long failures = 0;
  for (long i = 0; i < samples; ++i) {
    GaussianStream stream(seed, static_cast<std::uint64_t>(i));
    const double e1 = task.level1.energy_mev + task.level1.sigma_mev * stream.normal();
    try {
      ChannelFit fit;
      if (task.level2) {
        const double e2 =
            task.level2->energy_mev + task.level2->sigma_mev * stream.normal();
        fit = fit_two_levels(task.mass_mev, {e1, task.level1.band},
                             {e2, task.level2->band});
      } else {
        const double at =
            task.atilde_prior->first + task.atilde_prior->second * stream.normal();
        fit = fit_one_level(task.mass_mev, {e1, task.level1.band}, at);
      }
      ta.add(fit.a);
      tr.add(fit.r);
      tat.add(fit.atilde);
    } catch (const fit_error&) {
      ++failures;
    } catch (const pole_error&) {
      ++failures;
    }
  }
  const double failure_fraction = static_cast<double>(failures) / samples;
  if (failure_fraction > kMaxFailureFraction)
    throw fit_error("mc_propagate: " + std::to_string(failures) + " of " +
                    std::to_string(samples) + " samples failed");
  FitResult res;
  res.a = ta.mean();
  res.r = tr.mean();
  res.atilde = tat.mean();
  res.a_sigma = ta.sigma();
  res.r_sigma = tr.sigma();
  res.atilde_sigma = tat.sigma();
  res.samples = samples;
  res.seed = seed;
  res.failure_fraction = failure_fraction;
  return res;
}

SystemFit fit_system(const HaloSystem& system, long samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("fit_system: samples < 2");
  const FitPlan plan = make_plan(system);

  SystemFit out;
  out.system_name = system.name;
  out.system_version = system.version;
  out.samples = samples;
  out.seed = seed;

  const std::size_t nch = system.channels.size();
  const SystemSample central = run_system_sample(system, plan, nullptr);
  std::vector<Tally> ta(nch), tr(nch), tat(nch);
  long failures = 0;
  for (long i = 0; i < samples; ++i) {
    GaussianStream stream(seed, static_cast<std::uint64_t>(i));
    try {
      const SystemSample s = run_system_sample(system, plan, &stream);
      for (std::size_t c = 0; c < nch; ++c) {
        ta[c].add(s.a[c]);
        tr[c].add(s.r);
        tat[c].add(s.atilde[c]);
      }
    } catch (const fit_error&) {
      ++failures;
    } catch (const pole_error&) {
      ++failures;
    }
  }
  out.failure_fraction = static_cast<double>(failures) / samples;
  if (out.failure_fraction > kMaxFailureFraction)
    throw fit_error("fit_system: " + std::to_string(failures) + " of " +
                    std::to_string(samples) + " samples failed");
  out.channels.resize(nch);
  for (std::size_t c = 0; c < nch; ++c) {
    ChannelResult& cr = out.channels[c];
    cr.central.r = central.r;
    cr.central.a = central.a[c];
    cr.central.atilde = central.atilde[c];
    cr.central.log_a_over_r = central.log_a_over_r[c];
    cr.mc.a = ta[c].mean();
    cr.mc.r = tr[c].mean();
    cr.mc.atilde = tat[c].mean();
    cr.mc.a_sigma = ta[c].sigma();
    cr.mc.r_sigma = tr[c].sigma();
    cr.mc.atilde_sigma = tat[c].sigma();
    cr.mc.samples = samples;
    cr.mc.seed = seed;
    cr.mc.failure_fraction = out.failure_fraction;
  }
  return out;
}

std::vector<EnergyLevel> predict_spectrum(const HaloSystem& system,
                                          const SystemFit& fit, int l_max,
                                          int levels_per_band) {
  if (levels_per_band < 1)
    throw std::invalid_argument("predict_spectrum: levels_per_band < 1");
  if (fit.channels.size() != system.channels.size())
    throw std::invalid_argument("predict_spectrum: fit does not match system");
  const FitPlan plan = make_plan(system);

  struct Slot {
    int channel, L, branch;
    BandQuantum quanta;
    Tally x, e;
  };
  std::vector<Slot> slots;
  for (std::size_t c = 0; c < system.channels.size(); ++c) {
    const auto bands = allowed_bands(system, static_cast<int>(c), l_max);
    for (const auto& b : bands)
      for (int n = 0; n < levels_per_band; ++n)
        slots.push_back({static_cast<int>(c), b.L, n, b, {}, {}});
  }

  for (long i = 0; i < fit.samples; ++i) {
    GaussianStream stream(fit.seed, static_cast<std::uint64_t>(i));
    SystemSample s;
    try {
      s = run_system_sample(system, plan, &stream);
    } catch (const fit_error&) {
      continue;
    } catch (const pole_error&) {
      continue;
    }
    for (auto& slot : slots) {
      try {
        const double x =
            solve_band({slot.L, s.log_a_over_r[slot.channel], slot.branch, 1e-12});
        slot.x.add(x);
        slot.e.add(energy_from_x(x, system.mass_mev, s.r));
      } catch (const bracket_error&) {
      } catch (const pole_error&) {
      }
    }
  }

  std::vector<EnergyLevel> out;
  out.reserve(slots.size());
  for (const auto& slot : slots) {
    if (slot.e.n == 0) continue;
    EnergyLevel lv;
    lv.channel = slot.channel;
    lv.L = slot.L;
    lv.branch = slot.branch;
    lv.x = slot.x.mean();
    lv.energy_mev = slot.e.mean();
    lv.sigma_mev = slot.e.sigma();
    lv.parity = slot.quanta.parity;
    lv.two_j_values = slot.quanta.two_j;
    const Channel& ch = system.channels[slot.channel];
    lv.label = "S=" + std::to_string(ch.s) + ",T=" + std::to_string(ch.t) +
               " L=" + std::to_string(slot.L) + (slot.quanta.parity > 0 ? "+" : "-") +
               " n=" + std::to_string(slot.branch);
    out.push_back(std::move(lv));
  }
  std::sort(out.begin(), out.end(), [](const EnergyLevel& a, const EnergyLevel& b) {
    return a.energy_mev < b.energy_mev;
  });
  return out;
}

} // namespace s2spec
