#pragma once

#include <gsl/gsl_integration.h>
#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "pmdent/errors.hpp"

namespace pmdent::quad {

/// Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Returns the n-point rule. Tables are built once per n and shared.
inline const Rule& gauss_legendre(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<Rule>> cache;

  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    auto rule = std::make_unique<Rule>();
    rule->nodes.resize(n);
    rule->weights.resize(n);
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n);
    if (table == nullptr) throw InvalidArgument("gauss_legendre: cannot build table");
    for (std::size_t i = 0; i < n; ++i)
      gsl_integration_glfixed_point(-1.0, 1.0, i, &rule->nodes[i], &rule->weights[i], table);
    gsl_integration_glfixed_table_free(table);
    slot = std::move(rule);
  }
  return *slot;
}

/// Integrates f over [a, b] with the n-point rule.
template <class F>
auto integrate(F&& f, double a, double b, std::size_t n) {
  const Rule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  using Result = decltype(f(mid));
  Result sum{};
  for (std::size_t i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

/// Maps the rule onto [a, b] split into `panels` equal sub-intervals.
inline void composite_points(double a, double b, std::size_t n, std::size_t panels,
                             std::vector<double>& x, std::vector<double>& w) {
  const Rule& rule = gauss_legendre(n);
  x.clear();
  w.clear();
  x.reserve(n * panels);
  w.reserve(n * panels);
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    const double half = 0.5 * width;
    const double mid = lo + half;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(mid + half * rule.nodes[i]);
      w.push_back(half * rule.weights[i]);
    }
  }
}

namespace detail {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// In-place unnormalized DFT of `data`; sign -1 forward, +1 backward.
inline void fft(std::vector<std::complex<double>>& data, int sign) {
  static std::mutex planner;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    // FFTW's planner is not thread safe; execution is.
    std::lock_guard lock(planner);
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf,
                            sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(planner);
  fftw_destroy_plan(plan);
}

}  // namespace detail

/// Chirp-z transform: out[k] = sum_j in[j] * exp(i * 2pi * theta * j * k),
/// k = 0..m-1, evaluated with Bluestein's algorithm in O((n+m) log(n+m)).
inline std::vector<std::complex<double>> chirp_z(std::span<const std::complex<double>> in,
                                                 std::size_t m, double theta) {
  using C = std::complex<double>;
  const std::size_t n = in.size();
  const std::size_t len = detail::next_pow2(n + m - 1);

  // chirp(q) = exp(i*pi*theta*q^2), phase reduced mod 2pi before the trig calls.
  auto chirp = [theta](std::size_t q) {
    const double qq = static_cast<double>(q) * static_cast<double>(q);
    const double phase = std::numbers::pi * std::fmod(theta * qq, 2.0);
    return C(std::cos(phase), std::sin(phase));
  };

  std::vector<C> a(len, C{});
  for (std::size_t j = 0; j < n; ++j) a[j] = in[j] * chirp(j);

  // Lags k - j run from -(n-1) to m-1.
  std::vector<C> b(len, C{});
  for (std::size_t q = 0; q < m; ++q) b[q] = std::conj(chirp(q));
  for (std::size_t q = 1; q < n; ++q) b[len - q] = std::conj(chirp(q));

  detail::fft(a, -1);
  detail::fft(b, -1);
  for (std::size_t i = 0; i < len; ++i) a[i] *= b[i];
  detail::fft(a, +1);

  std::vector<C> out(m);
  const double scale = 1.0 / static_cast<double>(len);
  for (std::size_t k = 0; k < m; ++k) out[k] = a[k] * scale * chirp(k);
  return out;
}

}  // namespace pmdent::quad
