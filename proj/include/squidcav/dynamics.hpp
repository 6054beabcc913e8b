#pragma once

// Propagation under the effective model (exact factored exponential) and the
// full model (midpoint-exponential stepping with step halving).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "squidcav/hamiltonians.hpp"
#include "squidcav/tensor_core.hpp"

namespace squidcav {

// ---------------------------------------------------------------------------
// Effective model
// ---------------------------------------------------------------------------

/// exp(-i H0 t) exp(-i He t) on the SQUID pair.
inline ComplexMatrix effective_propagator(double t, double omega, const SystemParams& params) {
  return matexp_hermitian(h0(omega), t) * matexp_hermitian(h_effective(params), t);
}

namespace detail {

inline void require_pair_dims(const Dims& dims, const char* who) {
  if (dims.size() < 2 || dims[0] != kSquidLevels || dims[1] != kSquidLevels ||
      dims.size() > 3) {
    throw DimensionError(std::string(who) + ": expected SQUID1 (x) SQUID2 [(x) cavity] state");
  }
}

/// Lift a SQUID-pair operator onto whatever trailing cavity factor `dims` has.
inline ComplexMatrix lift_pair(const ComplexMatrix& op, const Dims& dims) {
  if (dims.size() == 2) return op;
  return kron(op, ComplexMatrix::Identity(dims[2], dims[2]));
}

}  // namespace detail

inline PureState evolve_effective(const PureState& state, double t, double omega,
                                  const SystemParams& params) {
  detail::require_pair_dims(state.dims(), "evolve_effective");
  return state.apply(detail::lift_pair(effective_propagator(t, omega, params), state.dims()));
}

/// Density-matrix form; a cavity factor, if present, is carried as identity.
inline DensityMatrix evolve_effective(const DensityMatrix& rho, double t, double omega,
                                      const SystemParams& params) {
  detail::require_pair_dims(rho.dims(), "evolve_effective");
  return rho.conjugate(detail::lift_pair(effective_propagator(t, omega, params), rho.dims()));
}

// ---------------------------------------------------------------------------
// Full model
// ---------------------------------------------------------------------------

struct IntegratorConfig {
  double dt_initial = 1e-2;
  double tolerance = 1e-8;
  int max_halvings = 24;

  void validate() const {
    if (!(dt_initial > 0.0)) throw ValidationError("dt_initial", "must be > 0");
    if (!(tolerance > 0.0)) throw ValidationError("tolerance", "must be > 0");
    if (max_halvings < 1) throw ValidationError("max_halvings", "must be >= 1");
  }

  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

struct IntegratorDiagnostics {
  std::int64_t steps = 0;
  double final_dt = 0.0;
  int halvings = 0;
  double last_change = 0.0;      // endpoint change between the last two refinements
  double unitarity_error = 0.0;  // ||U^dag U - I||_F of the accepted propagator
};

class IntegratorError : public std::runtime_error {
 public:
  IntegratorError(const std::string& what, IntegratorDiagnostics diagnostics)
      : std::runtime_error(what), diagnostics_(diagnostics) {}
  const IntegratorDiagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  IntegratorDiagnostics diagnostics_;
};

/// n-th power of a unitary matrix through its Schur form. For a normal matrix
/// the triangular factor is diagonal up to roundoff; its entries are projected
/// onto the unit circle, so the result stays unitary for any n.
inline ComplexMatrix unitary_power(const ComplexMatrix& u, std::int64_t n) {
  if (n == 0) return ComplexMatrix::Identity(u.rows(), u.cols());
  Eigen::ComplexSchur<ComplexMatrix> schur(u);
  if (schur.info() != Eigen::Success) throw StructureError("unitary_power: Schur decomposition failed");
  const ComplexMatrix& q = schur.matrixU();
  const auto diag = schur.matrixT().diagonal();
  ComplexVector phases(diag.size());
  for (Index i = 0; i < diag.size(); ++i) {
    phases(i) = std::exp(kI * (static_cast<double>(n) * std::arg(diag(i))));
  }
  return q * phases.asDiagonal() * q.adjoint();
}

/// Composes S midpoint-exponential steps exp(-i H(t_j + dt/2) dt) of the full
/// model over [t_start, t_start + duration].
///
/// H(t) = R(t) H(0) R(t)^dag with R(t) = exp(-i s delta t N), N the photon
/// number, so every step is R(t_mid) E R(t_mid)^dag with E = exp(-i H(0) dt).
/// Adjacent R factors fuse into R(-dt), and the product of S steps is
///   R(t_{S-1}) (E R(-dt))^{S-1} E R(t_0)^dag,
/// with the power taken in the Schur basis of the step map. `stepwise` builds the same product one
/// exponential at a time.
class FullPropagator {
 public:
  explicit FullPropagator(const FullModel& model)
      : model_(model),
        layout_(HilbertLayout::composite(model.n_max)),
        generator_(h_full(model, 0.0)),
        photons_(layout_.dimension()) {
    for (Index i = 0; i < layout_.dimension(); ++i) {
      photons_(i) = static_cast<double>(layout_.decode(i).n);
    }
  }

  const FullModel& model() const noexcept { return model_; }
  const HilbertLayout& layout() const noexcept { return layout_; }

  ComplexMatrix propagator(double t_start, double duration, std::int64_t steps) const {
    check_steps(duration, steps);
    const double dt = duration / static_cast<double>(steps);
    const ComplexMatrix e = generator_(dt);
    const ComplexMatrix k = e * rotation(-dt).asDiagonal();
    const double first_mid = t_start + 0.5 * dt;
    const double last_mid = t_start + (static_cast<double>(steps) - 0.5) * dt;
    ComplexMatrix u = unitary_power(k, steps - 1) * e;
    return rotation(last_mid).asDiagonal() * u * rotation(first_mid).conjugate().asDiagonal();
  }

  /// Reference path: one explicit exp(-i H(t_mid) dt) per step.
  ComplexMatrix stepwise(double t_start, double duration, std::int64_t steps) const {
    check_steps(duration, steps);
    const double dt = duration / static_cast<double>(steps);
    ComplexMatrix u = ComplexMatrix::Identity(layout_.dimension(), layout_.dimension());
    for (std::int64_t j = 0; j < steps; ++j) {
      const double t_mid = t_start + (static_cast<double>(j) + 0.5) * dt;
      u = (matexp_hermitian(h_full(model_, t_mid), dt) * u).eval();
    }
    return u;
  }

 private:
  static void check_steps(double duration, std::int64_t steps) {
    if (!(duration > 0.0)) throw ValidationError("duration", "must be > 0");
    if (steps < 1) throw ValidationError("steps", "must be >= 1");
  }

  ComplexVector rotation(double t) const {
    ComplexVector r(photons_.size());
    const double rate = model_.phase_sign() * model_.delta;
    for (Index i = 0; i < photons_.size(); ++i) r(i) = std::exp(-kI * rate * t * photons_(i));
    return r;
  }

  FullModel model_;
  HilbertLayout layout_;
  HermitianExponential generator_;
  RealVector photons_;
};

/// 1 - |<a|b>|^2
inline double state_change(const PureState& a, const PureState& b) {
  return std::max(0.0, 1.0 - std::norm(a.inner(b)));
}

/// 1 - tr(ab) / sqrt(tr a^2 tr b^2); the pure-state case reduces to infidelity.
inline double state_change(const DensityMatrix& a, const DensityMatrix& b) {
  const double overlap = (a.matrix() * b.matrix()).trace().real();
  return std::max(0.0, 1.0 - overlap / std::sqrt(a.purity() * b.purity()));
}

inline PureState propagate(const ComplexMatrix& u, const PureState& psi) { return psi.apply(u); }
inline DensityMatrix propagate(const ComplexMatrix& u, const DensityMatrix& rho) {
  return rho.conjugate(u);
}

template <class State>
struct Evolved {
  State state;
  IntegratorDiagnostics diagnostics;
};

/// Halve dt until the endpoint changes by less than cfg.tolerance between two
/// successive refinements; the finer result is returned.
template <class State>
Evolved<State> evolve_full(const State& state, double t_start, double duration,
                           const FullModel& model, const IntegratorConfig& cfg) {
  cfg.validate();
  model.validate();
  if (!(duration > 0.0)) throw ValidationError("duration", "must be > 0");
  const Dims expected = HilbertLayout::composite(model.n_max).dims();
  if (state.dims() != expected) {
    throw DimensionError("evolve_full: state does not live on the composite layout");
  }

  const FullPropagator prop(model);
  IntegratorDiagnostics diag;
  diag.steps = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(duration / cfg.dt_initial)));
  State previous = propagate(prop.propagator(t_start, duration, diag.steps), state);

  for (int h = 1; h <= cfg.max_halvings; ++h) {
    diag.steps *= 2;
    const ComplexMatrix u = prop.propagator(t_start, duration, diag.steps);
    State next = propagate(u, state);
    diag.halvings = h;
    diag.final_dt = duration / static_cast<double>(diag.steps);
    diag.last_change = state_change(previous, next);
    if (diag.last_change < cfg.tolerance) {
      diag.unitarity_error = unitarity_error(u);
      return {std::move(next), diag};
    }
    previous = std::move(next);
  }
  throw IntegratorError("evolve_full: no convergence after " + std::to_string(cfg.max_halvings) +
                            " halvings (last change " + std::to_string(diag.last_change) + ")",
                        diag);
}

/// Convenience form taking the protocol parameters and the drive switch.
template <class State>
Evolved<State> evolve_full(const State& state, double t_start, double duration,
                           const SystemParams& params, bool drive_on,
                           const IntegratorConfig& cfg) {
  params.validate();
  return evolve_full(state, t_start, duration,
                     FullModel::from(params, drive_on ? params.omega() : 0.0), cfg);
}

// ---------------------------------------------------------------------------
// Thermal cavity field
// ---------------------------------------------------------------------------

inline constexpr double kMaxThermalLeakage = 1e-6;

struct ThermalSpec {
  double nbar = 0.0;
  Index n_max = 8;
  double max_leakage = kMaxThermalLeakage;
};

/// Bose-Einstein weight nbar^n / (1 + nbar)^(n + 1).
inline double thermal_weight(double nbar, Index n) {
  if (nbar == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(n) * std::log(nbar) -
                  static_cast<double>(n + 1) * std::log1p(nbar));
}

/// Weight beyond the cutoff: sum_{n >= n_max} p_n = (nbar / (1 + nbar))^n_max.
inline double thermal_leakage(double nbar, Index n_max) {
  if (nbar == 0.0) return 0.0;
  return std::exp(static_cast<double>(n_max) * (std::log(nbar) - std::log1p(nbar)));
}

/// Smallest cutoff (>= floor) whose leakage is within the bound.
inline Index minimal_thermal_cutoff(double nbar, double max_leakage = kMaxThermalLeakage,
                                    Index floor = 2) {
  Index n = std::max<Index>(floor, 2);
  while (thermal_leakage(nbar, n) > max_leakage) ++n;
  return n;
}

inline DensityMatrix thermal_state(const ThermalSpec& spec) {
  if (!(spec.nbar >= 0.0) || !std::isfinite(spec.nbar)) {
    throw ValidationError("nbar", "must be >= 0");
  }
  if (spec.n_max < 2) throw ValidationError("n_max", "must be >= 2");
  const double leakage = thermal_leakage(spec.nbar, spec.n_max);
  if (leakage > spec.max_leakage) {
    throw LeakageError("thermal_state: leakage " + std::to_string(leakage) +
                           " beyond cutoff n_max=" + std::to_string(spec.n_max) +
                           " exceeds " + std::to_string(spec.max_leakage),
                       leakage);
  }
  RealVector p(spec.n_max);
  for (Index n = 0; n < spec.n_max; ++n) p(n) = thermal_weight(spec.nbar, n);
  p /= p.sum();
  ComplexMatrix rho = ComplexMatrix::Zero(spec.n_max, spec.n_max);
  rho.diagonal() = p.cast<Complex>();
  return DensityMatrix({spec.n_max}, std::move(rho));
}

}  // namespace squidcav
