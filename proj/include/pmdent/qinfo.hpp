#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "pmdent/state.hpp"

namespace pmdent {

namespace pauli {

inline Matrix2c identity() { return Matrix2c::Identity(); }

inline Matrix2c x() {
  Matrix2c m;
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix2c y() {
  Matrix2c m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline Matrix2c z() {
  Matrix2c m;
  m << 1, 0, 0, -1;
  return m;
}

/// {I, X, Y, Z}.
inline std::array<Matrix2c, 4> all() { return {identity(), x(), y(), z()}; }

}  // namespace pauli

/// Kronecker product in (Alice, Bob) ordering: index 2*a + b.
inline Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

inline Vector4c kron(const Vector2c& a, const Vector2c& b) {
  Vector4c out;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) out(2 * i + k) = a(i) * b(k);
  return out;
}

/// Entanglement and nonlocality summary of a state.
struct MetricReport {
  double concurrence = 0.0;
  double s_max = 0.0;
  double purity = 0.0;
};

/// Checks a raw matrix and returns it as a typed state; throws InvalidState
/// naming the violated bound.
inline TwoQubitState validate(const Matrix4c& rho) { return TwoQubitState(rho); }

namespace detail {

/// Eigenvalues of a PSD matrix with roundoff-level entries (relative to the
/// largest) set to zero, so that square roots do not amplify the noise.
inline Eigen::Vector4d psd_eigenvalues(const Eigen::Vector4d& ev) {
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * ev.cwiseAbs().maxCoeff();
  return (ev.array() > floor).select(ev, 0.0);
}

/// Hermitian square root of a PSD matrix.
inline Matrix4c hermitian_sqrt(const Matrix4c& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(m);
  const Eigen::Vector4d ev = psd_eigenvalues(es.eigenvalues()).cwiseSqrt();
  return es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

/// Eigenvalues of the Hermitian part of m, roundoff-floored.
inline Eigen::Vector4d hermitian_eigenvalues(const Matrix4c& m) {
  return psd_eigenvalues(
      Eigen::SelfAdjointEigenSolver<Matrix4c>(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly)
          .eigenvalues());
}

}  // namespace detail

/// Wootters concurrence.
///
/// The square roots of the eigenvalues of rho * rho~ with
/// rho~ = (Y x Y) conj(rho) (Y x Y) are obtained from the Hermitian form
/// sqrt(rho) rho~ sqrt(rho), which has the same spectrum.
inline double concurrence(const TwoQubitState& state) {
  const Matrix4c yy = kron(pauli::y(), pauli::y());
  const Matrix4c flipped = yy * state.rho().conjugate() * yy;
  const Matrix4c root = detail::hermitian_sqrt(state.rho());
  const Matrix4c m = root * flipped * root;
  const Eigen::Vector4d ev = detail::hermitian_eigenvalues(m);
  std::array<double, 4> lambda{};
  for (int i = 0; i < 4; ++i) lambda[i] = std::sqrt(ev(i));
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  return std::clamp(lambda[0] - lambda[1] - lambda[2] - lambda[3], 0.0, 1.0);
}

/// Correlation matrix T_ij = Tr(rho sigma_i x sigma_j), i, j over {X, Y, Z}.
inline Eigen::Matrix3d correlation_matrix(const TwoQubitState& state) {
  const auto p = pauli::all();
  Eigen::Matrix3d t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = (state.rho() * kron(p[i + 1], p[j + 1])).trace().real();
  return t;
}

/// Maximal CHSH value over all analyzer settings (Horodecki closed form).
inline double max_chsh(const TwoQubitState& state) {
  const Eigen::Matrix3d t = correlation_matrix(state);
  Eigen::Vector3d m =
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(t.transpose() * t, Eigen::EigenvaluesOnly)
          .eigenvalues();  // ascending
  return 2.0 * std::sqrt(std::max(m(1) + m(2), 0.0));
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
inline double fidelity(const TwoQubitState& a, const TwoQubitState& b) {
  const Matrix4c root = detail::hermitian_sqrt(a.rho());
  const Matrix4c m = root * b.rho() * root;
  const double tr = detail::hermitian_eigenvalues(m).cwiseSqrt().sum();
  return std::clamp(tr * tr, 0.0, 1.0);
}

inline double purity(const TwoQubitState& state) {
  return (state.rho() * state.rho()).trace().real();
}

/// Half the trace norm of a - b.
inline double trace_distance(const TwoQubitState& a, const TwoQubitState& b) {
  const Matrix4c d = a.rho() - b.rho();
  return 0.5 * Eigen::SelfAdjointEigenSolver<Matrix4c>(d, Eigen::EigenvaluesOnly)
                   .eigenvalues()
                   .cwiseAbs()
                   .sum();
}

inline MetricReport metrics(const TwoQubitState& state) {
  return {concurrence(state), max_chsh(state), purity(state)};
}

/// Euclidean projection of v onto the probability simplex.
inline Eigen::Vector4d project_simplex(const Eigen::Vector4d& v) {
  std::array<double, 4> u{v(0), v(1), v(2), v(3)};
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (int j = 0; j < 4; ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / (j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

/// Nearest (Frobenius) physical state to a Hermitian matrix. The input is
/// symmetrized first; eigenvalues are projected onto the simplex.
inline TwoQubitState project_physical(const Matrix4c& rho) {
  const Matrix4c h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(h);
  const Eigen::Vector4d lambda = project_simplex(es.eigenvalues());
  Matrix4c out = es.eigenvectors() * lambda.cast<Complex>().asDiagonal() *
                 es.eigenvectors().adjoint();
  // Remove the residual trace error of the rebuild.
  out /= out.trace().real();
  return TwoQubitState(out);
}

}  // namespace pmdent
