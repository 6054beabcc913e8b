#pragma once

// Generators for the two-SQUID / single-mode cavity system.
//
// Units: g sets the frequency scale (g = 1 in every default), times are in 1/g.
// The full model lives on SQUID1 (x) SQUID2 (x) cavity; the effective model and
// the classical drives live on the 9-dimensional SQUID pair.

#include <cmath>
#include <cstdint>
#include <string>

#include "squidcav/tensor_core.hpp"

namespace squidcav {

/// Sign of the cavity phase factors in the full interaction-picture coupling.
///
/// `consistent`: g[e^{-i delta t} a^dag S- + e^{+i delta t} a S+], delta = w20 - w.
/// This is the convention whose dispersive limit is +lambda[...] with
/// lambda = g^2 / (2 delta) > 0.
/// `printed`: the opposite exponent sign; with delta > 0 its dispersive limit
/// is the negated effective Hamiltonian.
enum class PhaseConvention { consistent, printed };

/// Drive-to-detuning ratio used when k, k' are derived from delta.
inline constexpr double kDefaultDriveRatio = 10.0;

/// Smallest k with 2 Omega / delta >= ratio, Omega = 2 k lambda = k g^2 / delta.
inline std::int64_t regime_k(double g, double delta, double ratio = kDefaultDriveRatio) {
  const double x = ratio * delta * delta / (2.0 * g * g);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(x * (1.0 - 1e-12))));
}

/// Smallest k' with 2 Omega' / delta >= ratio, Omega' = 8 k' lambda = 4 k' g^2 / delta.
inline std::int64_t regime_k_prime(double g, double delta, double ratio = kDefaultDriveRatio) {
  const double x = ratio * delta * delta / (8.0 * g * g);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(x * (1.0 - 1e-12))));
}

/// Physical parameters of one protocol configuration.
///
/// The drive amplitudes are not free: the window timings lambda t1 = pi/2 and
/// lambda t2 = pi/4 together with Omega t1 = k pi and Omega' t2 = 2 k' pi pin
/// Omega = 2 k lambda and Omega' = 8 k' lambda.
struct SystemParams {
  double g = 1.0;
  double delta = 15.0;
  std::int64_t k = regime_k(1.0, 15.0);
  std::int64_t k_prime = regime_k_prime(1.0, 15.0);
  double nbar = 0.0;
  Index n_max = 8;

  /// Defaults for a given detuning with both windows at `ratio`.
  static SystemParams for_detuning(double delta, double g = 1.0,
                                   double ratio = kDefaultDriveRatio) {
    SystemParams p;
    p.g = g;
    p.delta = delta;
    p.k = regime_k(g, delta, ratio);
    p.k_prime = regime_k_prime(g, delta, ratio);
    return p;
  }

  double lambda() const { return g * g / (2.0 * delta); }
  double omega() const { return 2.0 * static_cast<double>(k) * lambda(); }
  double omega_prime() const { return 8.0 * static_cast<double>(k_prime) * lambda(); }
  double t1() const { return kPi / (2.0 * lambda()); }
  double t2() const { return kPi / (4.0 * lambda()); }

  void validate() const {
    if (!(g > 0.0) || !std::isfinite(g)) throw ValidationError("g", "must be > 0");
    if (!(delta > 0.0) || !std::isfinite(delta)) {
      throw ValidationError("delta", "must be > 0");
    }
    if (k < 1) throw ValidationError("k", "must be a positive integer");
    if (k_prime < 1) throw ValidationError("k_prime", "must be a positive integer");
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw ValidationError("nbar", "must be >= 0");
    if (n_max < 2) throw ValidationError("n_max", "must be >= 2");
  }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Generator of the full model for one drive setting. Unlike SystemParams this
/// admits g = 0 and an arbitrary drive amplitude.
struct FullModel {
  double g = 1.0;
  double delta = 15.0;
  double drive_rabi = 0.0;
  Index n_max = 8;
  PhaseConvention convention = PhaseConvention::consistent;

  static FullModel from(const SystemParams& params, double drive_rabi,
                        PhaseConvention convention = PhaseConvention::consistent) {
    return {params.g, params.delta, drive_rabi, params.n_max, convention};
  }

  /// +1 when a^dag S- carries e^{-i delta t}.
  double phase_sign() const { return convention == PhaseConvention::consistent ? 1.0 : -1.0; }

  void validate() const {
    if (!(g >= 0.0) || !std::isfinite(g)) throw ValidationError("g", "must be >= 0");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("delta", "must be > 0");
    if (!std::isfinite(drive_rabi)) throw ValidationError("drive_rabi", "must be finite");
    if (n_max < 2) throw ValidationError("n_max", "must be >= 2");
  }
};

/// Full interaction-picture Hamiltonian H_I(t) on the composite space.
inline ComplexMatrix h_full(const FullModel& model, double t) {
  model.validate();
  const auto layout = HilbertLayout::composite(model.n_max);
  const ComplexMatrix a = embed(annihilation(model.n_max), Slot::cavity, layout);
  const ComplexMatrix ad = a.adjoint();
  const Complex phase = std::exp(-kI * model.phase_sign() * model.delta * t);

  ComplexMatrix h = ComplexMatrix::Zero(layout.dimension(), layout.dimension());
  for (Slot s : {Slot::squid1, Slot::squid2}) {
    const ComplexMatrix sp = embed(squid_raise(), s, layout);
    const ComplexMatrix sm = embed(squid_lower(), s, layout);
    h += model.g * (phase * ad * sm + std::conj(phase) * a * sp);
    h += model.drive_rabi * (sp + sm);
  }
  return h;
}

inline ComplexMatrix h_full(const SystemParams& params, double t, bool drive_on,
                            PhaseConvention convention = PhaseConvention::consistent) {
  params.validate();
  return h_full(FullModel::from(params, drive_on ? params.omega() : 0.0, convention), t);
}

/// Effective SQUID-pair Hamiltonian
/// lambda [ 1/2 sum_i (|0><0| + |2><2|)_i + (S1+ S2+ + S1+ S2- + h.c.) ].
inline ComplexMatrix h_effective(const SystemParams& params) {
  params.validate();
  const ComplexMatrix id = ComplexMatrix::Identity(kSquidLevels, kSquidLevels);
  const ComplexMatrix p = squid_projector(0) + squid_projector(2);
  const ComplexMatrix sp = squid_raise();
  const ComplexMatrix sm = squid_lower();

  ComplexMatrix exchange = kron(sp, sp) + kron(sp, sm);
  exchange += exchange.adjoint().eval();
  return params.lambda() * (0.5 * (kron(p, id) + kron(id, p)) + exchange);
}

enum class Transition { zero_one, zero_two };

/// Resonant classical drive on one SQUID: Omega (e^{i phi}|u><0| + h.c.),
/// u = 1 or 2. `target` is 1 or 2.
inline ComplexMatrix h_drive_single(double omega, int target, Transition transition,
                                    double phase = 0.0) {
  if (target != 1 && target != 2) {
    throw ValidationError("target", "SQUID index must be 1 or 2");
  }
  const Index upper = transition == Transition::zero_one ? 1 : 2;
  ComplexMatrix local = std::exp(kI * phase) * squid_ketbra(upper, 0);
  local += local.adjoint().eval();
  local *= omega;
  const ComplexMatrix id = ComplexMatrix::Identity(kSquidLevels, kSquidLevels);
  return target == 1 ? kron(local, id) : kron(id, local);
}

/// H0 = Omega sum_i (S_i+ + S_i-), both SQUIDs on 0<->2.
inline ComplexMatrix h0(double omega) {
  const ComplexMatrix x = squid_raise() + squid_lower();
  const ComplexMatrix id = ComplexMatrix::Identity(kSquidLevels, kSquidLevels);
  return omega * (kron(x, id) + kron(id, x));
}

struct RegimeThresholds {
  double drive = 10.0;
  double detuning = 10.0;
};

/// Dimensionless checks of 2 Omega >> delta and delta >> g/2.
struct RegimeReport {
  double ratio_drive = 0.0;          // 2 Omega / delta (first window)
  double ratio_drive_window2 = 0.0;  // 2 Omega' / delta (second window)
  double ratio_detuning = 0.0;       // 2 delta / g
  RegimeThresholds thresholds{};
  bool regime_ok = false;
};

inline RegimeReport check_regime(const SystemParams& params, RegimeThresholds thresholds = {}) {
  RegimeReport r;
  r.thresholds = thresholds;
  r.ratio_drive = 2.0 * params.omega() / params.delta;
  r.ratio_drive_window2 = 2.0 * params.omega_prime() / params.delta;
  r.ratio_detuning = 2.0 * params.delta / params.g;
  r.regime_ok = r.ratio_drive >= thresholds.drive && r.ratio_drive_window2 >= thresholds.drive &&
                r.ratio_detuning >= thresholds.detuning;
  return r;
}

}  // namespace squidcav
