#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "pmdent/errors.hpp"

namespace pmdent {

/// Super-Gaussian power spectrum exp(-ln2 * (2(f-center)/fwhm)^(2n)).
///
/// All frequencies are detunings in GHz from the nominal channel (or pump)
/// carrier. `fwhm` is the full width at half maximum of the power spectrum,
/// so the value is exactly 1 at the center and exactly 1/2 at center +- fwhm/2.
/// Order 1 is a Gaussian; large orders approach a rectangular passband.
struct SpectralShape {
  int order = 3;
  double fwhm = 100.0;
  double center = 0.0;

  void validate(const std::string& name = "shape") const {
    if (order < 1)
      throw InvalidArgument(name + ": super-Gaussian order must be >= 1, got " +
                            std::to_string(order));
    if (!(fwhm > 0.0) || !std::isfinite(fwhm))
      throw InvalidArgument(name + ": fwhm must be > 0, got " + std::to_string(fwhm));
    if (!std::isfinite(center))
      throw InvalidArgument(name + ": center must be finite");
  }

  bool operator==(const SpectralShape&) const = default;
};

inline double power_transmittivity(const SpectralShape& shape, double f) {
  const double x = 2.0 * (f - shape.center) / shape.fwhm;
  const double x2 = x * x;
  double p = x2;
  for (int i = 1; i < shape.order; ++i) p *= x2;
  return std::exp(-std::numbers::ln2 * p);
}

/// Weight |E_p|^4 of the pump when |E_p|^2 is the given super-Gaussian.
inline double pump_weight(const SpectralShape& shape, double f) {
  const double p = power_transmittivity(shape, f);
  return p * p;
}

/// Half width W beyond which power_transmittivity drops to `eps` or below.
inline double support_halfwidth(const SpectralShape& shape, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw InvalidArgument("support_halfwidth: eps must lie in (0, 1)");
  return 0.5 * shape.fwhm *
         std::pow(std::log(1.0 / eps) / std::numbers::ln2, 1.0 / (2.0 * shape.order));
}

/// How a quoted pump bandwidth maps onto the pump power spectrum.
enum class PumpBandwidth {
  /// FWHM of |E_p|^2 (3 dB bandwidth of the pump power). Default.
  power,
  /// FWHM of the field amplitude |E_p|.
  field,
};

/// Power-spectrum FWHM of an order-n pump quoted with `bandwidth` GHz.
/// For a super-Gaussian the amplitude FWHM exceeds the power FWHM by 2^(1/2n).
inline double pump_power_fwhm(double bandwidth, int order, PumpBandwidth convention) {
  if (convention == PumpBandwidth::power) return bandwidth;
  return bandwidth * std::pow(2.0, -1.0 / (2.0 * order));
}

}  // namespace pmdent
