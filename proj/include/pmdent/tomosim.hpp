#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pmdent/errors.hpp"
#include "pmdent/pmdcore.hpp"
#include "pmdent/qinfo.hpp"
#include "pmdent/state.hpp"

namespace pmdent {

/// Projective polarization analyzer pair: Alice projects on ket_a, Bob on ket_b.
struct AnalyzerSetting {
  Vector2c ket_a;
  Vector2c ket_b;
  std::string label_a;
  std::string label_b;

  Vector4c joint_ket() const { return kron(ket_a, ket_b); }
  Matrix4c projector() const {
    const Vector4c k = joint_ket();
    return k * k.adjoint();
  }
};

namespace analyzer {

inline Vector2c h() { return {1.0, 0.0}; }
inline Vector2c v() { return {0.0, 1.0}; }
inline Vector2c d() { return Vector2c(1.0, 1.0) / std::sqrt(2.0); }
inline Vector2c r() { return Vector2c(1.0, Complex(0.0, 1.0)) / std::sqrt(2.0); }

}  // namespace analyzer

struct TomographyPlan {
  static constexpr std::size_t kSettings = 16;

  std::vector<AnalyzerSetting> settings;
  /// Expected generated pairs per analyzer setting.
  double pairs_per_setting = 1e6;
  /// Single-detector efficiency; coincidences scale with its square.
  double efficiency = 0.20;
  std::uint64_t seed = 0;

  void validate() const {
    if (settings.size() != kSettings)
      throw InvalidArgument("tomography plan needs 16 settings, got " +
                            std::to_string(settings.size()));
    for (const auto& s : settings) {
      if (std::abs(s.ket_a.norm() - 1.0) > 1e-12 || std::abs(s.ket_b.norm() - 1.0) > 1e-12)
        throw InvalidArgument("analyzer kets must be normalized to 1e-12");
    }
    if (!(pairs_per_setting > 0.0) || !std::isfinite(pairs_per_setting))
      throw InvalidArgument("pairs_per_setting must be positive");
    if (!(efficiency > 0.0 && efficiency <= 1.0))
      throw InvalidArgument("efficiency must lie in (0, 1]");
  }

  /// design(s, k) = Tr(P_s Sigma_k) / 4 with Sigma_{4i+j} = sigma_i x sigma_j,
  /// so that probabilities p = design * c for rho = sum_k c_k Sigma_k / 4.
  Eigen::Matrix<double, 16, 16> design() const {
    const auto p = pauli::all();
    Eigen::Matrix<double, 16, 16> b;
    for (std::size_t s = 0; s < settings.size(); ++s) {
      const Matrix4c proj = settings[s].projector();
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          b(static_cast<Eigen::Index>(s), 4 * i + j) =
              0.25 * (proj * kron(p[i], p[j])).trace().real();
    }
    return b;
  }

  /// Gram matrix Tr(P_s P_t) of the 16 projectors.
  Eigen::Matrix<double, 16, 16> gram() const {
    Eigen::Matrix<double, 16, 16> g;
    for (std::size_t s = 0; s < settings.size(); ++s)
      for (std::size_t t = 0; t < settings.size(); ++t)
        g(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) =
            (settings[s].projector() * settings[t].projector()).trace().real();
    return g;
  }

  /// 2-norm condition number of the design matrix (infinite when singular).
  double condition_number() const {
    Eigen::JacobiSVD<Eigen::Matrix<double, 16, 16>> svd(design());
    const auto& sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    return smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
  }
};

/// The {h, v, d, r} x {h, v, d, r} analyzer set, Alice-major order.
inline TomographyPlan default_plan() {
  const std::array<std::pair<const char*, Vector2c>, 4> kets{{{"h", analyzer::h()},
                                                               {"v", analyzer::v()},
                                                               {"d", analyzer::d()},
                                                               {"r", analyzer::r()}}};
  TomographyPlan plan;
  for (const auto& [la, ka] : kets)
    for (const auto& [lb, kb] : kets) plan.settings.push_back({ka, kb, la, lb});
  return plan;
}

inline double coincidence_probability(const TwoQubitState& state, const AnalyzerSetting& setting) {
  const Vector4c k = setting.joint_ket();
  return std::clamp((k.adjoint() * state.rho() * k)(0, 0).real(), 0.0, 1.0);
}

struct CountRecord {
  std::vector<std::uint64_t> counts;
  TomographyPlan plan;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream for one setting: a function of (seed, index) only.
inline std::mt19937_64 setting_stream(std::uint64_t seed, std::size_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index) + 1)));
}

}  // namespace detail

/// Expected coincidence counts N * eta^2 * p for every setting.
inline std::vector<double> expected_counts(const TwoQubitState& state, const TomographyPlan& plan) {
  plan.validate();
  const double rate = plan.pairs_per_setting * plan.efficiency * plan.efficiency;
  std::vector<double> out;
  out.reserve(plan.settings.size());
  for (const auto& s : plan.settings) out.push_back(rate * coincidence_probability(state, s));
  return out;
}

/// Poisson coincidence counts. Each setting draws from its own seeded stream,
/// so the record does not depend on evaluation order.
inline CountRecord simulate_counts(const TwoQubitState& state, const TomographyPlan& plan) {
  const std::vector<double> mean = expected_counts(state, plan);
  CountRecord record{std::vector<std::uint64_t>(mean.size(), 0), plan};
  for (std::size_t s = 0; s < mean.size(); ++s) {
    if (!(mean[s] > 0.0)) continue;
    auto rng = detail::setting_stream(plan.seed, s);
    std::poisson_distribution<std::uint64_t> draw(mean[s]);
    record.counts[s] = draw(rng);
  }
  return record;
}

/// Linear-inversion estimate from per-setting rates (counts or expected
/// counts; any common scale). The overall scale is removed with the inverted
/// identity component, which for the default plan is the summed
/// (h/v) x (h/v) block. The estimate is symmetrized and projected onto the
/// physical set.
inline TwoQubitState reconstruct_from_rates(const TomographyPlan& plan,
                                            std::span<const double> rates) {
  plan.validate();
  if (rates.size() != plan.settings.size())
    throw InvalidArgument("expected one rate per setting");
  const Eigen::Matrix<double, 16, 16> b = plan.design();
  Eigen::FullPivLU<Eigen::Matrix<double, 16, 16>> lu(b);
  if (!lu.isInvertible() || plan.condition_number() > 1e12) {
    std::ostringstream msg;
    msg << "analyzer settings are not informationally complete (condition number "
        << plan.condition_number() << ")";
    throw SingularDesign(msg.str());
  }
  Eigen::Matrix<double, 16, 1> y;
  for (std::size_t s = 0; s < rates.size(); ++s) y(static_cast<Eigen::Index>(s)) = rates[s];
  const Eigen::Matrix<double, 16, 1> c = lu.solve(y);
  if (!(c(0) > 0.0)) throw InvalidArgument("no coincidences to normalize the estimate");

  const auto p = pauli::all();
  Matrix4c rho = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rho += (0.25 * c(4 * i + j) / c(0)) * kron(p[i], p[j]);
  return project_physical(rho);
}

inline TwoQubitState reconstruct(const CountRecord& record) {
  std::vector<double> rates(record.counts.begin(), record.counts.end());
  return reconstruct_from_rates(record.plan, rates);
}

enum class CountModel { poisson, expected };

struct ExperimentResult {
  Complex coherence;
  TwoQubitState theory;
  TwoQubitState measured;
  MetricReport metrics;
  double fidelity_to_theory = 0.0;
  std::vector<double> counts;
};

/// Coherence -> output state -> simulated tomography -> reconstruction -> metrics.
inline ExperimentResult run_experiment(const CoherenceKernel& kernel, Dgd tau,
                                       const TomographyPlan& plan,
                                       CountModel model = CountModel::poisson) {
  const Complex r = kernel(tau);
  const TwoQubitState theory = build_density_matrix(r);
  std::vector<double> counts;
  if (model == CountModel::expected) {
    counts = expected_counts(theory, plan);
  } else {
    const CountRecord rec = simulate_counts(theory, plan);
    counts.assign(rec.counts.begin(), rec.counts.end());
  }
  const TwoQubitState measured = reconstruct_from_rates(plan, counts);
  return {r, theory, measured, metrics(measured), fidelity(measured, theory), std::move(counts)};
}

inline ExperimentResult run_experiment(const LinkConfig& config, Dgd tau,
                                       const TomographyPlan& plan,
                                       CountModel model = CountModel::poisson) {
  return run_experiment(CoherenceKernel(config), tau, plan, model);
}

}  // namespace pmdent
