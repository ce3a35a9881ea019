#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pmdent/errors.hpp"
#include "pmdent/quadrature.hpp"
#include "pmdent/spectra.hpp"
#include "pmdent/state.hpp"

namespace pmdent {

/// GHz * ps -> cycles.
inline constexpr double kGhzPs = 1e-3;

struct QuadratureSpec {
  int nodes_per_axis = 513;
  double truncation_eps = 1e-12;
  /// +1 selects exp(+i 2 pi f tau) in the coherence integral.
  int kernel_sign = +1;

  void validate() const {
    if (nodes_per_axis < 65)
      throw InvalidArgument("quadrature: nodes_per_axis must be >= 65, got " +
                            std::to_string(nodes_per_axis));
    if (!(truncation_eps > 0.0 && truncation_eps < 1e-3))
      throw InvalidArgument("quadrature: truncation_eps must lie in (0, 1e-3)");
    if (kernel_sign != 1 && kernel_sign != -1)
      throw InvalidArgument("quadrature: kernel_sign must be +1 or -1");
  }

  bool operator==(const QuadratureSpec&) const = default;
};

/// Physical scenario: Alice's and Bob's channel filters and the pump spectrum.
/// Bob's arm carries the differential group delay.
struct LinkConfig {
  SpectralShape filter_a;
  SpectralShape filter_b;
  SpectralShape pump;
  QuadratureSpec quadrature;

  void validate() const {
    filter_a.validate("filter_a");
    filter_b.validate("filter_b");
    pump.validate("pump");
    quadrature.validate();
  }

  bool symmetric() const {
    return filter_a.center == 0.0 && filter_b.center == 0.0 && pump.center == 0.0;
  }

  bool operator==(const LinkConfig&) const = default;
};

/// Identical order-n filters of width `channel` GHz and an order-`pump_order`
/// pump of bandwidth `pump` GHz, all centered.
inline LinkConfig symmetric_link(int order, double channel, double pump, int pump_order = -1,
                                 PumpBandwidth convention = PumpBandwidth::power) {
  const int p_order = pump_order < 0 ? order : pump_order;
  LinkConfig c;
  c.filter_a = {order, channel, 0.0};
  c.filter_b = {order, channel, 0.0};
  c.pump = {p_order, pump_power_fwhm(pump, p_order, convention), 0.0};
  return c;
}

/// Differential group delay in picoseconds.
struct Dgd {
  double ps = 0.0;
};

namespace detail {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(hi > lo); }
};

inline Interval support(const SpectralShape& s, double eps) {
  const double w = support_halfwidth(s, eps);
  return {s.center - w, s.center + w};
}

/// Pump factor pump_weight((fa + fb)/2) exceeds eps only where the pump
/// power exceeds sqrt(eps).
inline Interval pump_support(const LinkConfig& c) {
  return support(c.pump, std::sqrt(c.quadrature.truncation_eps));
}

/// Range of f_b where both Bob's filter and the pump factor are non-negligible.
inline Interval inner_window(const LinkConfig& c, double f_a) {
  const Interval b = support(c.filter_b, c.quadrature.truncation_eps);
  const Interval p = pump_support(c);
  return {std::max(b.lo, 2.0 * p.lo - f_a), std::min(b.hi, 2.0 * p.hi - f_a)};
}

/// Range of f_a over which the coherence integrand is non-negligible.
inline Interval outer_window(const LinkConfig& c) {
  const Interval a = support(c.filter_a, c.quadrature.truncation_eps);
  const Interval b = support(c.filter_b, c.quadrature.truncation_eps);
  const Interval p = pump_support(c);
  // inner_window is non-empty iff f_a lies in [2 p.lo - b.hi, 2 p.hi - b.lo].
  const Interval out{std::max(a.lo, 2.0 * p.lo - b.hi), std::min(a.hi, 2.0 * p.hi - b.lo)};
  if (out.empty())
    throw DegenerateSupport(
        "truncated supports of filter_a, filter_b and pump do not overlap; the spectra are "
        "physically disjoint");
  return out;
}

inline double marginal_kernel_unchecked(const LinkConfig& c, double f_a) {
  const Interval w = inner_window(c, f_a);
  if (w.empty()) return 0.0;
  return quad::integrate(
      [&](double f_b) {
        return power_transmittivity(c.filter_b, f_b) * pump_weight(c.pump, 0.5 * (f_a + f_b));
      },
      w.lo, w.hi, static_cast<std::size_t>(c.quadrature.nodes_per_axis));
}

}  // namespace detail

/// G(f_a) = integral over f_b of |H_B(f_b)|^2 |E_p((f_a + f_b)/2)|^4.
inline double marginal_kernel(const LinkConfig& config, double f_a) {
  config.validate();
  (void)detail::outer_window(config);
  return detail::marginal_kernel_unchecked(config, f_a);
}

/// Precomputed spectral weight |H_A(f)|^2 G(f) for repeated evaluation of
/// R(tau). Safe to share across threads; composite rules for large |tau|
/// are built once per panel count and reused.
class CoherenceKernel {
public:
  /// Oscillation periods of exp(i 2 pi f tau) allotted to one quadrature panel.
  static constexpr double kCyclesPerPanel = 32.0;

  explicit CoherenceKernel(const LinkConfig& config)
      : config_(config), window_(detail::Interval{}), cache_(std::make_shared<Cache>()) {
    config_.validate();
    window_ = detail::outer_window(config_);
    single_ = rule(1);
    double norm = 0.0;
    for (double w : single_->weights) norm += w;
    if (!(norm > 0.0))
      throw DegenerateSupport("coherence integrand vanishes on the overlap of the supports");
  }

  const LinkConfig& config() const noexcept { return config_; }
  double lower() const noexcept { return window_.lo; }
  double upper() const noexcept { return window_.hi; }

  /// Largest |tau| (ps) served by the single-panel rule.
  double single_panel_reach() const {
    return kCyclesPerPanel / ((window_.hi - window_.lo) * kGhzPs);
  }

  Complex operator()(Dgd tau) const {
    const double cycles = (window_.hi - window_.lo) * kGhzPs * std::abs(tau.ps);
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(cycles / kCyclesPerPanel)));
    return evaluate(panels == 1 ? *single_ : *rule(panels), tau.ps);
  }

  /// Spectral weight |H_A(f)|^2 G(f) at an arbitrary detuning (unnormalized).
  double weight(double f_a) const {
    return power_transmittivity(config_.filter_a, f_a) *
           detail::marginal_kernel_unchecked(config_, f_a);
  }

private:
  struct Cache {
    std::mutex mutex;
    std::map<std::size_t, std::shared_ptr<const quad::Rule>> rules;
  };

  std::shared_ptr<const quad::Rule> rule(std::size_t panels) const {
    {
      std::lock_guard lock(cache_->mutex);
      const auto it = cache_->rules.find(panels);
      if (it != cache_->rules.end()) return it->second;
    }
    auto r = std::make_shared<quad::Rule>();
    quad::composite_points(window_.lo, window_.hi,
                           static_cast<std::size_t>(config_.quadrature.nodes_per_axis), panels,
                           r->nodes, r->weights);
    for (std::size_t i = 0; i < r->nodes.size(); ++i) r->weights[i] *= weight(r->nodes[i]);
    std::lock_guard lock(cache_->mutex);
    return cache_->rules.emplace(panels, std::move(r)).first->second;
  }

  Complex evaluate(const quad::Rule& r, double tau_ps) const {
    const double k = 2.0 * std::numbers::pi * config_.quadrature.kernel_sign * kGhzPs * tau_ps;
    double re = 0.0;
    double im = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const double phase = k * r.nodes[i];
      re += r.weights[i] * std::cos(phase);
      im += r.weights[i] * std::sin(phase);
      norm += r.weights[i];
    }
    return {re / norm, im / norm};
  }

  LinkConfig config_;
  detail::Interval window_;
  std::shared_ptr<Cache> cache_;
  std::shared_ptr<const quad::Rule> single_;
};

/// Normalized two-photon coherence R(tau), with R(0) = 1.
inline Complex compute_R(const LinkConfig& config, Dgd tau) {
  return CoherenceKernel(config)(tau);
}

/// R on a uniform tau grid via a chirp-z transform of the spectral weight
/// sampled on a uniform frequency grid.
inline std::vector<Complex> compute_R_batch(const CoherenceKernel& kernel,
                                            std::span<const double> taus_ps) {
  if (taus_ps.empty()) return {};
  if (taus_ps.size() == 1) return {kernel(Dgd{taus_ps[0]})};

  const std::size_t m = taus_ps.size();
  const double t0 = taus_ps.front();
  const double step = (taus_ps.back() - t0) / static_cast<double>(m - 1);
  if (!(step > 0.0) && !(step < 0.0))
    throw NonUniformGrid("tau grid must have distinct, uniformly spaced points");
  for (std::size_t k = 0; k < m; ++k) {
    const double expected = t0 + step * static_cast<double>(k);
    if (std::abs(taus_ps[k] - expected) > 1e-9 * std::max(1.0, std::abs(step) * m))
      throw NonUniformGrid("tau grid is not uniformly spaced at index " + std::to_string(k));
  }

  const LinkConfig& c = kernel.config();
  double tau_max = 0.0;
  for (double t : taus_ps) tau_max = std::max(tau_max, std::abs(t));
  // Trapezoidal sampling aliases R(tau) onto tau + j/h; the period 1/h is made
  // to exceed the grid extent plus the decay length of R.
  const double min_fwhm_thz = std::min(c.filter_a.fwhm, c.filter_b.fwhm) * kGhzPs;
  const double period_ps = 2.0 * tau_max + 500.0 / min_fwhm_thz;
  const double lo = kernel.lower();
  const double hi = kernel.upper();
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) * kGhzPs * period_ps)) + 1;
  const double h = (hi - lo) / static_cast<double>(n - 1);

  const double sign = c.quadrature.kernel_sign;
  std::vector<Complex> a(n);
  double norm = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double f = lo + h * static_cast<double>(j);
    const double w = (j == 0 || j == n - 1 ? 0.5 : 1.0) * kernel.weight(f);
    norm += w;
    a[j] = w * std::polar(1.0, 2.0 * std::numbers::pi * sign * kGhzPs * h *
                                   static_cast<double>(j) * t0);
  }
  const double theta = sign * kGhzPs * h * step;
  std::vector<Complex> out = quad::chirp_z(a, m, theta);
  for (std::size_t k = 0; k < m; ++k) {
    const double tau = t0 + step * static_cast<double>(k);
    out[k] *= std::polar(1.0 / norm, 2.0 * std::numbers::pi * sign * kGhzPs * lo * tau);
  }
  return out;
}

inline std::vector<Complex> compute_R_batch(const LinkConfig& config,
                                            std::span<const double> taus_ps) {
  return compute_R_batch(CoherenceKernel(config), taus_ps);
}

/// Sampling of the time-domain overlap: points at k * step_ps for
/// |k * step_ps| <= half_span_ps.
struct TimeGrid {
  double step_ps = 0.0;
  double half_span_ps = 0.0;

  /// A grid fine and wide enough for ~1e-6 agreement with the spectral route.
  static TimeGrid automatic(const LinkConfig& c, Dgd tau) {
    constexpr double eps = 1e-14;
    const double wa = support_halfwidth(c.filter_a, eps) + std::abs(c.filter_a.center);
    const double wb = support_halfwidth(c.filter_b, eps) + std::abs(c.filter_b.center);
    // The pump self-convolution lives on the sum frequency, twice the pump detuning.
    const double ws = 2.0 * (support_halfwidth(c.pump, eps) + std::abs(c.pump.center));
    const double band = std::max({wa + wb + ws, 2.0 * wa, 2.0 * wb, 2.0 * ws});
    const double widest = std::max({c.filter_a.fwhm, c.filter_b.fwhm, 2.0 * c.pump.fwhm}) * kGhzPs;
    const double narrowest =
        std::min({c.filter_a.fwhm, c.filter_b.fwhm, 2.0 * c.pump.fwhm}) * kGhzPs;
    const double step = std::min(1.0 / (1.05 * band * kGhzPs), 1.0 / (6.0 * widest));
    return {step, 20.0 / narrowest + std::abs(tau.ps)};
  }
};

namespace detail {

/// Inverse transform of an amplitude spectrum a(f) = sqrt(power(f)):
/// x(t) = integral a(f) exp(-i s 2 pi f t) df on the sample points t_k = k * dt.
template <class Amplitude>
std::vector<Complex> inverse_transform(Amplitude&& amplitude, Interval band, int sign, double dt,
                                       long first, long last) {
  const double t_max = std::max(std::abs(first * dt), std::abs(last * dt));
  const double cycles = (band.hi - band.lo) * kGhzPs * t_max;
  const auto panels = static_cast<std::size_t>(std::ceil(cycles / 16.0)) + 2;
  std::vector<double> f;
  std::vector<double> w;
  quad::composite_points(band.lo, band.hi, 64, panels, f, w);
  for (std::size_t i = 0; i < f.size(); ++i) w[i] *= amplitude(f[i]);

  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(last - first + 1));
  for (long k = first; k <= last; ++k) {
    const double t = static_cast<double>(k) * dt;
    Complex sum{};
    for (std::size_t i = 0; i < f.size(); ++i)
      sum += w[i] * std::polar(1.0, -sign * 2.0 * std::numbers::pi * kGhzPs * f[i] * t);
    out.push_back(sum);
  }
  return out;
}

template <class Scalar>
Scalar as_scalar(const Complex& z) {
  if constexpr (std::is_same_v<Scalar, double>)
    return z.real();
  else
    return z;
}

template <class Scalar>
Complex time_domain_overlap(const LinkConfig& c, long shift, double dt, long half) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int sign = c.quadrature.kernel_sign;
  const double eps = 1e-16;
  const long n = 2 * half + 1;

  // Filter impulse responses h(t) at lags -2*half .. 2*half.
  auto filter_response = [&](const SpectralShape& s) {
    return inverse_transform([&](double f) { return std::sqrt(power_transmittivity(s, f)); },
                             support(s, eps), sign, dt, -2 * half, 2 * half);
  };
  const std::vector<Complex> h_a = filter_response(c.filter_a);
  const std::vector<Complex> h_b = filter_response(c.filter_b);

  // Pump envelope on the sum-frequency axis, E(Omega) = sqrt(P(Omega / 2)).
  const Interval pump_band = support(c.pump, eps);
  const std::vector<Complex> e_p = inverse_transform(
      [&](double omega) { return std::sqrt(power_transmittivity(c.pump, 0.5 * omega)); },
      {2.0 * pump_band.lo, 2.0 * pump_band.hi}, sign, dt, -2 * half, 2 * half);

  // A(t) = integral E(t - t') E(t') dt' on the grid.
  Vector pump_conv(n);
  for (long i = 0; i < n; ++i) {
    Complex sum{};
    for (long p = 0; p < n; ++p) sum += e_p[static_cast<std::size_t>(i - p + 2 * half)] * e_p[static_cast<std::size_t>(p - half + 2 * half)];
    pump_conv(i) = as_scalar<Scalar>(sum * dt);
  }

  // m[t, j] = conj(h(t_t - t_j)).
  auto response_matrix = [&](const std::vector<Complex>& h) {
    Matrix m(n, n);
    for (long t = 0; t < n; ++t)
      for (long j = 0; j < n; ++j)
        m(t, j) = as_scalar<Scalar>(std::conj(h[static_cast<std::size_t>(t - j + 2 * half)]));
    return m;
  };
  const Matrix m_a = response_matrix(h_a);
  const Matrix m_b = response_matrix(h_b);

  // g(t_A, t_B) = integral conj(h_A(t - t_A)) conj(h_B(t - t_B)) A(t) dt.
  const Matrix g = (m_a.transpose() * pump_conv.asDiagonal() * m_b) * dt;

  // Overlap of g(t_A - tau/2, t_B) with g(t_A + tau/2, t_B), tau/2 = shift * dt.
  Complex num{};
  for (long a = 0; a < n; ++a) {
    const long lo = a - shift;
    const long hi = a + shift;
    if (lo < 0 || hi >= n) continue;
    for (long b = 0; b < n; ++b) num += Complex(g(lo, b)) * std::conj(Complex(g(hi, b)));
  }
  const double norm = g.cwiseAbs2().sum();
  return num / norm;
}

}  // namespace detail

/// R(tau) from the biphoton time amplitude: the normalized overlap of the
/// two time-shifted PSP components of the output state. Serves as an
/// independent check of the spectral route.
inline Complex time_domain_R(const LinkConfig& config, Dgd tau, TimeGrid grid) {
  config.validate();
  const double widest =
      std::max({config.filter_a.fwhm, config.filter_b.fwhm, 2.0 * config.pump.fwhm}) * kGhzPs;
  const double narrowest =
      std::min({config.filter_a.fwhm, config.filter_b.fwhm, 2.0 * config.pump.fwhm}) * kGhzPs;
  if (!(grid.step_ps > 0.0) || grid.step_ps > 1.0 / (6.0 * widest)) {
    std::ostringstream msg;
    msg << "time step " << grid.step_ps << " ps violates the sampling bound 1/(6 * "
        << widest << " THz) = " << 1.0 / (6.0 * widest) << " ps";
    throw GridTooCoarse(msg.str());
  }
  if (2.0 * grid.half_span_ps < 6.0 / narrowest) {
    std::ostringstream msg;
    msg << "time span " << 2.0 * grid.half_span_ps << " ps is shorter than 6 / " << narrowest
        << " THz";
    throw GridTooCoarse(msg.str());
  }

  // Refine the step so that tau/2 falls on the grid.
  const double half_tau = 0.5 * std::abs(tau.ps);
  long shift = 0;
  double dt = grid.step_ps;
  if (half_tau > 0.0) {
    shift = static_cast<long>(std::ceil(half_tau / grid.step_ps));
    dt = half_tau / static_cast<double>(shift);
  }
  const long half = static_cast<long>(std::ceil(grid.half_span_ps / dt));

  Complex r = config.symmetric() ? detail::time_domain_overlap<double>(config, shift, dt, half)
                                 : detail::time_domain_overlap<Complex>(config, shift, dt, half);
  return tau.ps < 0.0 ? std::conj(r) : r;
}

inline Complex time_domain_R(const LinkConfig& config, Dgd tau) {
  return time_domain_R(config, tau, TimeGrid::automatic(config, tau));
}

/// Output polarization state for coherence r: 1/2 on the |hh>, |vv> diagonal
/// and r/2, conj(r)/2 on the corresponding off-diagonal corners.
inline TwoQubitState build_density_matrix(Complex r) {
  const double mag = std::abs(r);
  if (!(mag <= 1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "|r| = " << mag << " exceeds 1";
    throw CoherenceOutOfRange(msg.str());
  }
  if (mag > 1.0) r /= mag;
  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = rho(3, 3) = 0.5;
  rho(0, 3) = 0.5 * r;
  rho(3, 0) = 0.5 * std::conj(r);
  return TwoQubitState(rho);
}

}  // namespace pmdent
