#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <map>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pmdent/errors.hpp"
#include "pmdent/pmdcore.hpp"
#include "pmdent/qinfo.hpp"

namespace pmdent {

struct CurvePoint {
  double tau = 0.0;
  double concurrence = 0.0;
  double s_max = 0.0;
};

struct SweepPoint {
  double ratio = 0.0;
  /// tau_dec * B_ch in ps * THz.
  double tau_dec_normalized = 0.0;
};

/// Concurrence level that defines tau_dec.
struct DecThreshold {
  double level = 0.1;

  void validate() const {
    if (!(level > 0.0 && level <= 1.0))
      throw InvalidArgument("threshold level must lie in (0, 1]");
  }
};

/// Evaluates fn(i) for i in [0, n) on up to hardware_concurrency threads.
/// Results keep index order; the first exception (lowest index) is rethrown.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  auto work = [&](std::size_t first) {
    for (std::size_t i = first; i < n; i += workers) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline CurvePoint curve_point(double tau, Complex r) {
  const TwoQubitState rho = build_density_matrix(r);
  return {tau, concurrence(rho), max_chsh(rho)};
}

inline std::vector<CurvePoint> concurrence_curve(const CoherenceKernel& kernel,
                                                 std::span<const double> taus_ps) {
  if (taus_ps.empty()) throw InvalidArgument("concurrence_curve: empty tau grid");
  std::vector<CurvePoint> out;
  out.reserve(taus_ps.size());
  for (double tau : taus_ps) out.push_back(curve_point(tau, kernel(Dgd{tau})));
  return out;
}

inline std::vector<CurvePoint> concurrence_curve(const LinkConfig& config,
                                                 std::span<const double> taus_ps) {
  return concurrence_curve(CoherenceKernel(config), taus_ps);
}

/// Scan parameters of find_tau_dec, in units of 1 / B_ch.
struct TauDecSearch {
  double step = 0.05;
  double horizon = 100.0;
};

/// Smallest tau >= 0 at which |R(tau)| falls to the threshold level.
///
/// A forward scan with step 0.05 / B_ch brackets the first crossing, then
/// bisection narrows it below 1e-6 ps. B_ch is the wider channel filter; the
/// scan gives up at 100 / B_ch of the narrower one.
inline double find_tau_dec(const CoherenceKernel& kernel, DecThreshold threshold = {},
                           TauDecSearch search = {}) {
  threshold.validate();
  if (!(search.step > 0.0 && search.horizon > 0.0))
    throw InvalidArgument("tau_dec search step and horizon must be positive");
  const LinkConfig& c = kernel.config();
  const double widest = std::max(c.filter_a.fwhm, c.filter_b.fwhm) * kGhzPs;
  const double narrowest = std::min(c.filter_a.fwhm, c.filter_b.fwhm) * kGhzPs;
  const double step = search.step / widest;
  const double horizon = search.horizon / narrowest;
  auto excess = [&](double tau) { return std::abs(kernel(Dgd{tau})) - threshold.level; };

  if (excess(0.0) <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t k = 1;; ++k) {
    hi = std::min(step * static_cast<double>(k), horizon);
    if (excess(hi) <= 0.0) break;
    if (hi >= horizon) {
      std::ostringstream msg;
      msg << "|R| stays above " << threshold.level << " up to tau_max = " << horizon << " ps";
      throw NoCrossing(msg.str());
    }
    lo = hi;
  }
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double find_tau_dec(const LinkConfig& config, DecThreshold threshold = {},
                           TauDecSearch search = {}) {
  return find_tau_dec(CoherenceKernel(config), threshold, search);
}

/// Options shared by the pump-bandwidth sweeps.
struct SweepOptions {
  /// Channel bandwidth used internally; the normalized output does not depend on it.
  double channel_ghz = 100.0;
  DecThreshold threshold{};
  QuadratureSpec quadrature{};
  PumpBandwidth pump_convention = PumpBandwidth::power;
};

/// tau_dec * B_ch for B_A = B_B = B_ch and B_p = ratio * B_ch.
inline double normalized_tau_dec(int channel_order, int pump_order, double ratio,
                                 const SweepOptions& options = {}) {
  if (!(ratio > 0.0)) throw InvalidArgument("bandwidth ratio must be positive");
  LinkConfig c = symmetric_link(channel_order, options.channel_ghz, ratio * options.channel_ghz,
                                pump_order, options.pump_convention);
  c.quadrature = options.quadrature;
  return find_tau_dec(c, options.threshold) * options.channel_ghz * kGhzPs;
}

inline std::vector<SweepPoint> bandwidth_sweep(int channel_order, int pump_order,
                                               std::span<const double> ratios,
                                               const SweepOptions& options = {}) {
  if (channel_order < 1 || pump_order < 1) throw InvalidArgument("orders must be >= 1");
  return parallel_map<SweepPoint>(ratios.size(), [&](std::size_t i) {
    return SweepPoint{ratios[i],
                      normalized_tau_dec(channel_order, pump_order, ratios[i], options)};
  });
}

/// Channel filters and pump share the super-Gaussian order.
inline std::vector<SweepPoint> pump_sweep(int order, std::span<const double> ratios,
                                          const SweepOptions& options = {}) {
  return bandwidth_sweep(order, order, ratios, options);
}

/// Super-Gaussian channel filters with a Gaussian pump.
inline std::vector<SweepPoint> mixed_shape_sweep(int channel_order, std::span<const double> ratios,
                                                 const SweepOptions& options = {}) {
  return bandwidth_sweep(channel_order, 1, ratios, options);
}

/// ratio grid start, start + step, ..., up to stop inclusive.
inline std::vector<double> ratio_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw InvalidArgument("invalid ratio grid");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) out.push_back(start + step * static_cast<double>(i));
  return out;
}

inline std::vector<double> default_ratios() { return ratio_grid(0.05, 2.0, 0.05); }

struct SweepOptimum {
  /// False when the coarse maximum sits on the first or last grid point.
  bool interior = false;
  double ratio = 0.0;
  double tau_dec_normalized = 0.0;
};

/// Coarse-grid argmax of a sweep, refined by golden-section search on the
/// neighbouring grid cells until the bracket is narrower than `resolution`.
inline SweepOptimum locate_optimum(int channel_order, int pump_order,
                                   std::span<const SweepPoint> sweep,
                                   const SweepOptions& options = {}, double resolution = 0.01) {
  if (sweep.empty()) throw InvalidArgument("locate_optimum: empty sweep");
  std::size_t best = 0;
  for (std::size_t i = 1; i < sweep.size(); ++i)
    if (sweep[i].tau_dec_normalized > sweep[best].tau_dec_normalized) best = i;
  if (best == 0 || best + 1 == sweep.size())
    return {false, sweep[best].ratio, sweep[best].tau_dec_normalized};

  auto f = [&](double ratio) { return normalized_tau_dec(channel_order, pump_order, ratio, options); };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = sweep[best - 1].ratio;
  double b = sweep[best + 1].ratio;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > resolution) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  const double ratio = 0.5 * (a + b);
  return {true, ratio, f(ratio)};
}

/// Named link configuration reproducing one of the measured data sets.
struct Preset {
  std::string name;
  LinkConfig link;
};

/// The two measured configurations: third-order filters of 130 GHz with a
/// 120 GHz pump, and 70 GHz filters with a 75 GHz pump.
inline std::vector<Preset> fig2_presets() {
  return {{"fig2a-130", symmetric_link(3, 130.0, 120.0)},
          {"fig2a-70", symmetric_link(3, 70.0, 75.0)}};
}

/// tau grid 0, step, ..., stop (inclusive).
inline std::vector<double> tau_grid(double stop, double step) {
  if (!(step > 0.0) || stop < 0.0) throw InvalidArgument("invalid tau grid");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor(stop / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) out.push_back(step * static_cast<double>(i));
  return out;
}

struct FigureDatasets {
  /// Concurrence/S versus DGD for each preset, tau in [0, 30] ps.
  std::map<std::string, std::vector<CurvePoint>> dgd_curves;
  /// (C, S) locus, pooled over the presets in preset order.
  std::vector<CurvePoint> s_versus_c;
  /// Normalized tau_dec versus B_p / B_ch, keyed by super-Gaussian order.
  std::map<int, std::vector<SweepPoint>> bandwidth_curves;
};

inline FigureDatasets figure_datasets(double tau_step_ps = 0.5,
                                      std::span<const double> ratios = {},
                                      const SweepOptions& options = {}) {
  FigureDatasets out;
  const std::vector<double> taus = tau_grid(30.0, tau_step_ps);
  for (const auto& preset : fig2_presets()) {
    auto curve = concurrence_curve(preset.link, taus);
    out.s_versus_c.insert(out.s_versus_c.end(), curve.begin(), curve.end());
    out.dgd_curves.emplace(preset.name, std::move(curve));
  }
  const std::vector<double> grid =
      ratios.empty() ? default_ratios() : std::vector<double>(ratios.begin(), ratios.end());
  for (int n = 1; n <= 4; ++n) out.bandwidth_curves.emplace(n, pump_sweep(n, grid, options));
  return out;
}

}  // namespace pmdent
