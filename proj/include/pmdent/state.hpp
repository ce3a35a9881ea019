#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <string_view>

#include "pmdent/errors.hpp"

namespace pmdent {

using Complex = std::complex<double>;
using Matrix4c = Eigen::Matrix<Complex, 4, 4>;
using Matrix2c = Eigen::Matrix<Complex, 2, 2>;
using Vector4c = Eigen::Matrix<Complex, 4, 1>;
using Vector2c = Eigen::Matrix<Complex, 2, 1>;

/// Basis ordering of every two-qubit matrix in the library.
inline constexpr std::array<std::string_view, 4> kBasisLabels{"hh", "hv", "vh", "vv"};

struct StateTolerance {
  static constexpr double hermitian = 1e-12;
  static constexpr double trace = 1e-12;
  static constexpr double eigenvalue = -1e-10;
};

/// Two-qubit polarization density matrix.
///
/// Construction validates: Hermitian to 1e-12, unit trace to 1e-12 and
/// smallest eigenvalue >= -1e-10. Instances are therefore always physical.
class TwoQubitState {
public:
  explicit TwoQubitState(const Matrix4c& rho) : rho_(rho) {
    const double asym = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (asym > StateTolerance::hermitian) {
      std::ostringstream msg;
      msg << "max |rho - rho^dagger| = " << asym << " exceeds " << StateTolerance::hermitian;
      throw InvalidState("not-hermitian", msg.str());
    }
    const Complex tr = rho.trace();
    if (std::abs(tr - 1.0) > StateTolerance::trace) {
      std::ostringstream msg;
      msg << "trace = " << tr.real() << (tr.imag() < 0 ? "-" : "+") << std::abs(tr.imag())
          << "i differs from 1 by more than " << StateTolerance::trace;
      throw InvalidState("bad-trace", msg.str());
    }
    // Symmetrize so downstream Hermitian solvers see exact symmetry.
    rho_ = 0.5 * (rho + rho.adjoint());
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix4c>(rho_, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .minCoeff();
    if (lmin < StateTolerance::eigenvalue) {
      std::ostringstream msg;
      msg << "minimum eigenvalue " << lmin << " below " << StateTolerance::eigenvalue;
      throw InvalidState("not-psd", msg.str());
    }
  }

  const Matrix4c& rho() const noexcept { return rho_; }
  Complex operator()(int row, int col) const { return rho_(row, col); }

private:
  Matrix4c rho_;
};

namespace states {

inline Vector4c bell_phi_plus_ket() {
  Vector4c v = Vector4c::Zero();
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return v;
}

inline TwoQubitState pure(const Vector4c& ket) {
  const Vector4c k = ket.normalized();
  return TwoQubitState(k * k.adjoint());
}

inline TwoQubitState phi_plus() { return pure(bell_phi_plus_ket()); }

inline TwoQubitState phi_minus() {
  Vector4c v = Vector4c::Zero();
  v(0) = 1.0 / std::sqrt(2.0);
  v(3) = -1.0 / std::sqrt(2.0);
  return pure(v);
}

inline TwoQubitState maximally_mixed() { return TwoQubitState(Matrix4c::Identity() / 4.0); }

/// p * |Phi+><Phi+| + (1 - p) * I/4.
inline TwoQubitState werner(double p) {
  return TwoQubitState(p * phi_plus().rho() + (1.0 - p) * Matrix4c::Identity() / 4.0);
}

}  // namespace states

}  // namespace pmdent
