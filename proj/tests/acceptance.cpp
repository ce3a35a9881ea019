// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pmdent/config.hpp"
#include "pmdent/pmdent.hpp"

using namespace pmdent;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[192];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const double kBellS = 2.0 * std::numbers::sqrt2;

Outcome zero_delay_identity() {
  Outcome o;
  std::vector<LinkConfig> configs;
  for (const auto& p : fig2_presets()) configs.push_back(p.link);
  for (const char* name : {"fig2a-130", "fig2a-70", "fig2b", "fig3"})
    configs.push_back(cli::parse_config(std::string("preset = ") + name + "\n").link());
  for (const auto& c : configs) {
    const Complex r = compute_R(c, Dgd{0.0});
    const TwoQubitState rho = build_density_matrix(r);
    const double conc = concurrence(rho);
    const double s = max_chsh(rho);
    o.require(std::abs(r - 1.0) < 1e-9, fmt("R(0) = %.12f", std::abs(r)));
    o.require(std::abs(conc - 1.0) < 1e-9, fmt("C = %.12f", conc));
    o.require(std::abs(s - kBellS) < 1e-9, fmt("S = %.12f", s));
  }
  if (o.pass) o.detail = std::to_string(configs.size()) + " preset configs";
  return o;
}

Outcome gaussian_oracle() {
  Outcome o;
  const LinkConfig c = symmetric_link(1, 100.0, 50.0);
  const auto g = oracle::gaussian_link(100.0, 100.0, 50.0);
  double worst = 0.0;
  for (double tau : {1.0, 2.0, 5.0, 10.0, 20.0}) {
    const double expect = oracle::gaussian_R(g, tau);
    worst = std::max(worst, std::abs(std::abs(compute_R(c, Dgd{tau})) - expect) / expect);
  }
  o.require(worst < 1e-6, fmt("max relative error %.3e", worst));
  const double tau_dec = find_tau_dec(c);
  const double expect = oracle::gaussian_tau_dec(g, 0.1);
  o.require(std::abs(tau_dec - expect) < 1e-3,
            fmt("tau_dec %.6f vs %.6f ps", tau_dec, expect));
  if (o.pass)
    o.detail = fmt("max rel err %.2e, tau_dec %.6f ps (closed form %.6f)", worst, tau_dec, expect);
  return o;
}

Outcome cross_method() {
  Outcome o;
  double worst = 0.0;
  int count = 0;
  for (int n = 1; n <= 4; ++n)
    for (double ratio : {0.25, 0.5, 1.0}) {
      const LinkConfig c = symmetric_link(n, 130.0, ratio * 130.0);
      for (double tau : {0.0, 5.0, 10.0}) {
        worst = std::max(worst, std::abs(time_domain_R(c, Dgd{tau}) - compute_R(c, Dgd{tau})));
        ++count;
      }
    }
  o.require(count == 36, "matrix size " + std::to_string(count));
  o.require(worst < 1e-4, fmt("max |difference| %.3e", worst));
  if (o.pass) o.detail = fmt("36 configs, max |difference| %.2e", worst);
  return o;
}

Outcome chsh_relation() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Complex> rs{0.0, 1.0, Complex(0.0, 1.0), -1.0, 1e-6};
  while (rs.size() < 50) rs.push_back(std::polar(u(rng), 2.0 * std::numbers::pi * u(rng)));
  double worst = 0.0;
  for (Complex r : rs) {
    const double s = max_chsh(build_density_matrix(r));
    worst = std::max(worst, std::abs(s - 2.0 * std::sqrt(1.0 + std::norm(r))));
    if (std::abs(r) > 0.0) o.require(s > 2.0, fmt("S = %.15f at |r| = %.3e", s, std::abs(r)));
  }
  o.require(worst < 1e-9, fmt("max deviation %.3e", worst));
  if (o.pass) o.detail = fmt("50 values, max deviation %.2e", worst);
  return o;
}

Outcome sweep_shapes() {
  Outcome o;
  const auto ratios = default_ratios();
  std::vector<double> low;
  for (double r : ratios)
    if (r >= 0.1 - 1e-12) low.push_back(r);
  const auto gauss = pump_sweep(1, low);
  bool decreasing = true;
  for (std::size_t i = 1; i < gauss.size(); ++i)
    decreasing = decreasing && gauss[i].tau_dec_normalized < gauss[i - 1].tau_dec_normalized;
  o.require(decreasing, "n=1 not strictly decreasing");

  std::string found = "n=1 decreasing";
  for (int n : {2, 3, 4}) {
    const auto s = pump_sweep(n, ratios);
    const SweepOptimum opt = locate_optimum(n, n, s);
    found += fmt(", n=%.0f argmax %.3f", n, opt.ratio);
    o.require(opt.interior, "n=" + std::to_string(n) + " has no interior maximum");
    o.require(opt.ratio >= 0.35 && opt.ratio <= 0.55,
              fmt("n=%.0f argmax %.4f outside [0.35, 0.55]", n, opt.ratio));
  }
  const auto mixed = mixed_shape_sweep(3, ratios);
  const SweepOptimum opt = locate_optimum(3, 1, mixed);
  found += fmt(", mixed n=3 argmax %.3f", opt.ratio);
  o.require(opt.interior, "mixed n=3 has no interior maximum");
  if (o.pass) o.detail = found;
  return o;
}

Outcome fig2a_ordering() {
  Outcome o;
  const auto taus = tau_grid(30.0, 0.1);
  const auto wide = concurrence_curve(symmetric_link(3, 130.0, 120.0), taus);
  const auto narrow = concurrence_curve(symmetric_link(3, 70.0, 75.0), taus);
  double max_jump = 0.0;
  int violations = 0;
  double first = -1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double excess = wide[i].concurrence - narrow[i].concurrence;
    if (excess > 1e-12) {
      ++violations;
      if (first < 0.0) first = taus[i];
      worst = std::max(worst, excess);
    }
    if (i > 0)
      max_jump = std::max({max_jump, std::abs(wide[i].concurrence - wide[i - 1].concurrence),
                           std::abs(narrow[i].concurrence - narrow[i - 1].concurrence)});
  }
  o.require(violations == 0,
            std::to_string(violations) + " of " + std::to_string(taus.size()) +
                fmt(" grid points have C(70/75) < C(130/120), first at %.1f ps, largest gap %.4f",
                    first, worst));
  o.require(wide.back().concurrence < 0.1, fmt("130 GHz curve ends at %.4f", wide.back().concurrence));
  o.require(narrow.back().concurrence < 0.1,
            fmt("70 GHz curve ends at %.4f", narrow.back().concurrence));
  // Gradual: no step of the 0.1 ps grid changes C by more than 0.05.
  o.require(max_jump < 0.05, fmt("largest step change %.4f", max_jump));
  if (o.pass)
    o.detail = fmt("C(30 ps) = %.4f / %.4f, largest 0.1 ps step %.4f", wide.back().concurrence,
                   narrow.back().concurrence, max_jump);
  return o;
}

Outcome tomography_round_trip() {
  Outcome o;
  const TomographyPlan plan = default_plan();
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const TwoQubitState s(oracle::random_state(rng, 1 + i % 4));
    worst = std::max(worst, trace_distance(reconstruct_from_rates(plan, expected_counts(s, plan)), s));
  }
  o.require(worst < 1e-6, fmt("exact round trip trace distance %.3e", worst));

  std::string summary = fmt("exact max trace distance %.1e", worst);
  for (const auto& preset : fig2_presets()) {
    const CoherenceKernel kernel(preset.link);
    for (double tau : {0.0, 5.0, 10.0}) {
      std::vector<double> f;
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        TomographyPlan p = plan;
        p.pairs_per_setting = 1e6;
        p.efficiency = 0.2;
        p.seed = seed;
        f.push_back(run_experiment(kernel, Dgd{tau}, p).fidelity_to_theory);
      }
      double mean = 0.0;
      for (double x : f) mean += x / static_cast<double>(f.size());
      std::sort(f.begin(), f.end());
      const double median = 0.5 * (f[49] + f[50]);
      const std::string tag = preset.name + fmt(" tau=%.0f", tau);
      o.require(mean > 0.95, tag + fmt(" mean fidelity %.4f", mean));
      o.require(median >= 0.94 && median <= 0.99,
                tag + fmt(" median fidelity %.4f outside [0.94, 0.99]", median));
      summary += "; " + tag + fmt(" mean %.4f median %.4f", mean, median);
    }
  }
  if (o.pass) o.detail = summary;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "pmdent_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string exe = PMDENT_SIMULATE_EXE;
  const std::vector<std::string> runs{"tomo --tau 5 --seed 12345", "curve --preset fig2a-70",
                                      "sweep --preset fig3", "rho --tau 7 --format csv"};
  int index = 0;
  for (const auto& args : runs) {
    const fs::path a = dir / ("a" + std::to_string(index) + ".csv");
    const fs::path b = dir / ("b" + std::to_string(index) + ".csv");
    ++index;
    const int ra = std::system((exe + " " + args + " --out " + a.string()).c_str());
    const int rb = std::system((exe + " " + args + " --out " + b.string()).c_str());
    o.require(ra == 0 && rb == 0, "'" + args + "' exited nonzero");
    const std::string ta = slurp(a);
    o.require(!ta.empty() && ta == slurp(b), "'" + args + "' outputs differ");
  }
  fs::remove_all(dir);
  if (o.pass) o.detail = std::to_string(runs.size()) + " scenarios byte-identical";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    double budget_s;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"AC1", "zero-DGD identity", 1.0, zero_delay_identity},
      {"AC2", "Gaussian oracle", 5.0, gaussian_oracle},
      {"AC3", "cross-method equivalence", 120.0, cross_method},
      {"AC4", "S-C relation", 1.0, chsh_relation},
      {"AC5", "pump sweep shapes", 300.0, sweep_shapes},
      {"AC6", "channel bandwidth ordering", 30.0, fig2a_ordering},
      {"AC7", "tomography round trip", 120.0, tomography_round_trip},
      {"AC8", "CLI determinism", 0.0, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && seconds >= c.budget_s)
      o.require(false, fmt("runtime %.2f s over budget %.0f s", seconds, c.budget_s));
    if (!o.pass) ++failures;
    std::printf("%s %s %s (%.2f s): %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, seconds,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
