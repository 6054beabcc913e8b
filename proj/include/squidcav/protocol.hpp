#pragma once

// The five-step pulse sequence that entangles the two SQUIDs:
//   1. classical 0<->1 pulse on SQUID 1 (state preparation)
//   2. first cavity window, t1 = pi / (2 lambda), drive Omega = 2 k lambda
//   3. 0<->1 pi pulse on SQUID 2 (moves |0>_2 population to |1>_2)
//   4. second cavity window, t2 = pi / (4 lambda), drive Omega' = 8 k' lambda
//   5. diagonal phase correction on SQUID 2
// and its execution under the effective or the full model.

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "squidcav/dynamics.hpp"
#include "squidcav/hamiltonians.hpp"
#include "squidcav/metrics.hpp"
#include "squidcav/tensor_core.hpp"

namespace squidcav {

enum class Model { effective, full };

/// physical_pulse: the 0<->1 rotation that puts 2/3 of the population on |0>
/// and 1/3 on |1>, sqrt(2/3)|0> - i sqrt(1/3)|1>.
/// as_published: sqrt(1/3)|1> - i sqrt(2/3)|0>, injected literally.
enum class PreparationMode { physical_pulse, as_published };

/// How the step-3 pulse phase is chosen. `calibrated` cancels the branch phases
/// picked up in the first window (closed form at the certified timings);
/// `exact_mapping` sends |0>_2 to |1>_2 with coefficient exactly 1.
enum class RetargetPhase { calibrated, exact_mapping };

inline const char* to_string(Model m) { return m == Model::effective ? "effective" : "full"; }
inline const char* to_string(PreparationMode m) {
  return m == PreparationMode::physical_pulse ? "physical-pulse" : "as-published";
}

// ---------------------------------------------------------------------------
// Pulse steps
// ---------------------------------------------------------------------------

struct ClassicalDrive {
  int target = 1;
  Transition transition = Transition::zero_one;
  double rabi = 1.0;
  double duration = 0.0;
  double phase = 0.0;  // drive phase: rabi (e^{i phase}|u><0| + h.c.)

  ComplexMatrix unitary() const {
    return matexp_hermitian(h_drive_single(rabi, target, transition, phase), duration);
  }
};

struct CavityWindow {
  double duration = 0.0;
  double drive_rabi = 0.0;
  bool drive_on = true;

  double effective_drive() const { return drive_on ? drive_rabi : 0.0; }
};

struct PhaseCorrection {
  int target = 2;
  std::array<double, 3> phases{};

  ComplexMatrix unitary() const {
    const ComplexMatrix d = squid_level_phase(phases);
    const ComplexMatrix id = ComplexMatrix::Identity(kSquidLevels, kSquidLevels);
    return target == 1 ? kron(d, id) : kron(id, d);
  }
};

using PulseStep = std::variant<ClassicalDrive, CavityWindow, PhaseCorrection>;

struct LabeledStep {
  std::string label;
  PulseStep step;
};

/// Derived timing quantities of a sequence. For the canonical sequence these
/// are pi/2, k, pi/4 and k' up to rounding of the doubles involved.
struct TimingCertificate {
  std::int64_t k = 0;
  std::int64_t k_prime = 0;
  double lambda_t1 = 0.0;
  double omega_t1_over_pi = 0.0;
  double lambda_t2 = 0.0;
  double omega_prime_t2_over_2pi = 0.0;

  bool holds(double tol = 1e-12) const {
    auto near = [tol](double x, double y) { return std::abs(x - y) <= tol * std::max(1.0, std::abs(y)); };
    return near(lambda_t1, kPi / 2.0) && near(omega_t1_over_pi, static_cast<double>(k)) &&
           near(lambda_t2, kPi / 4.0) &&
           near(omega_prime_t2_over_2pi, static_cast<double>(k_prime));
  }
};

struct PulseSequence {
  std::vector<LabeledStep> steps;
  TimingCertificate certificate;
};

inline void validate_step(const PulseStep& step) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PhaseCorrection>) {
          for (double p : s.phases) {
            if (!(p > -kPi && p <= kPi)) throw ValidationError("phases", "must lie in (-pi, pi]");
          }
        } else {
          if (!(s.duration > 0.0)) throw ValidationError("duration", "must be > 0");
        }
      },
      step);
}

// ---------------------------------------------------------------------------
// Closed-form pieces of the sequence
// ---------------------------------------------------------------------------

/// Preparation rotation angle; cos^2 = 2/3 leaves 1/3 of the population on |1>.
inline double preparation_angle() { return std::acos(std::sqrt(2.0 / 3.0)); }

/// Drive phase of the preparation pulse. A phase of pi turns -i sin into
/// +i sin, which is the as-published state up to a global factor i.
inline double preparation_phase(PreparationMode mode) {
  return mode == PreparationMode::physical_pulse ? 0.0 : kPi;
}

/// Initial SQUID-pair state after the preparation step.
inline PureState prepare_initial(PreparationMode mode) {
  const auto layout = HilbertLayout::squid_pair();
  ComplexVector v = ComplexVector::Zero(layout.dimension());
  const double big = std::sqrt(2.0 / 3.0);
  const double small = std::sqrt(1.0 / 3.0);
  if (mode == PreparationMode::physical_pulse) {
    v(layout.index(0, 0)) = big;
    v(layout.index(1, 0)) = -kI * small;
  } else {
    v(layout.index(0, 0)) = -kI * big;
    v(layout.index(1, 0)) = small;
  }
  return PureState(layout, std::move(v));
}

/// sqrt(1/3) (|00> + |11> + |22>)
inline PureState target_state() {
  const auto layout = HilbertLayout::squid_pair();
  ComplexVector v = ComplexVector::Zero(layout.dimension());
  for (Index s = 0; s < kSquidLevels; ++s) v(layout.index(s, s)) = 1.0 / std::sqrt(3.0);
  return PureState(layout, std::move(v));
}

/// Effective-model action of the first window at lambda t1 = pi/2, Omega t1 = k pi:
///   |1,0> -> ten |1,0>,  |0,0> -> zero_zero |2,2>.
/// The |1,0> factor comes from the lambda/2 level shift of SQUID 2 and its
/// completed Rabi cycles; it is a relative phase against the |2,2> branch.
struct FirstWindowFactors {
  Complex ten;
  Complex zero_zero;
};

inline FirstWindowFactors first_window_factors(std::int64_t k) {
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return {sign * std::exp(-kI * (kPi / 4.0)), Complex(-1.0, 0.0)};
}

/// A 0<->1 pi pulse of drive phase phi maps |0> -> -i e^{i phi}|1>.
inline double retarget_phase_for(Complex mapping) { return std::arg(mapping) + kPi / 2.0; }

/// Pulse phase sending |0>_2 to |1>_2 with coefficient exactly 1.
inline double exact_mapping_phase() { return retarget_phase_for(1.0); }

/// Pulse phase that makes the post-pulse state sqrt(1/3)|1,1> + i sqrt(2/3)|2,2>
/// up to a global phase, given the preparation mode and k.
inline double calibrated_retarget_phase(std::int64_t k, PreparationMode mode) {
  const FirstWindowFactors f = first_window_factors(k);
  // |1,0>/|0,0> amplitude ratio entering the first window.
  const Complex ratio = mode == PreparationMode::physical_pulse ? -kI / std::sqrt(2.0)
                                                                : kI / std::sqrt(2.0);
  // Want (ratio * ten * c) / zero_zero == sqrt(1/3) / (i sqrt(2/3)).
  const Complex wanted = 1.0 / (kI * std::sqrt(2.0));
  const Complex c = wanted * f.zero_zero / (ratio * f.ten);
  return retarget_phase_for(c / std::abs(c));
}

/// Level phases (pi/4, 0, -pi/4) on SQUID 2.
inline PhaseCorrection canonical_phase_correction() {
  return PhaseCorrection{2, {kPi / 4.0, 0.0, -kPi / 4.0}};
}

inline ClassicalDrive retarget_pulse(double rabi, double phase) {
  return ClassicalDrive{2, Transition::zero_one, rabi, kPi / (2.0 * rabi), phase};
}

struct SequenceOptions {
  PreparationMode mode = PreparationMode::physical_pulse;
  bool drive_on_window2 = true;
  RetargetPhase retarget = RetargetPhase::calibrated;
};

inline PulseSequence canonical_sequence(const SystemParams& params,
                                        const SequenceOptions& options = {}) {
  params.validate();
  const double lambda = params.lambda();
  const double omega = params.omega();
  const double omega_prime = params.omega_prime();
  const double t1 = params.t1();
  const double t2 = params.t2();

  PulseSequence seq;
  seq.steps.push_back({"preparation",
                       ClassicalDrive{1, Transition::zero_one, omega, preparation_angle() / omega,
                                      preparation_phase(options.mode)}});
  seq.steps.push_back({"first_cavity_window", CavityWindow{t1, omega, true}});
  const double phase = options.retarget == RetargetPhase::calibrated
                           ? calibrated_retarget_phase(params.k, options.mode)
                           : exact_mapping_phase();
  seq.steps.push_back({"retarget_pulse", retarget_pulse(omega, phase)});
  seq.steps.push_back(
      {"second_cavity_window", CavityWindow{t2, omega_prime, options.drive_on_window2}});
  seq.steps.push_back({"phase_correction", canonical_phase_correction()});
  for (const auto& s : seq.steps) validate_step(s.step);

  seq.certificate = {params.k,         params.k_prime, lambda * t1, omega * t1 / kPi,
                     lambda * t2,      omega_prime * t2 / (2.0 * kPi)};
  return seq;
}

/// Step 3 on its own. The default phase gives |0>_2 -> |1>_2 exactly.
inline PureState step3_retarget(const PureState& state, double phase = exact_mapping_phase()) {
  detail::require_pair_dims(state.dims(), "step3_retarget");
  return state.apply(detail::lift_pair(retarget_pulse(1.0, phase).unitary(), state.dims()));
}

inline DensityMatrix step3_retarget(const DensityMatrix& rho,
                                    double phase = exact_mapping_phase()) {
  detail::require_pair_dims(rho.dims(), "step3_retarget");
  return rho.conjugate(detail::lift_pair(retarget_pulse(1.0, phase).unitary(), rho.dims()));
}

inline PureState phase_correction(const PureState& state) {
  detail::require_pair_dims(state.dims(), "phase_correction");
  return state.apply(detail::lift_pair(canonical_phase_correction().unitary(), state.dims()));
}

inline DensityMatrix phase_correction(const DensityMatrix& rho) {
  detail::require_pair_dims(rho.dims(), "phase_correction");
  return rho.conjugate(detail::lift_pair(canonical_phase_correction().unitary(), rho.dims()));
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct ProtocolOptions {
  SequenceOptions sequence{};
  PhaseConvention convention = PhaseConvention::consistent;
  /// Full model: windows see absolute time (phases continuous across steps).
  /// When false every window starts its clock at zero.
  bool continuous_clock = true;
  bool phase_optimized = false;
  RegimeThresholds thresholds{};
};

struct Snapshot {
  std::string label;
  double time = 0.0;  // clock after the step
  DensityMatrix pair_state;
};

struct WindowDiagnostics {
  std::string label;
  IntegratorDiagnostics integrator;
};

struct ProtocolResult {
  Model model = Model::effective;
  PreparationMode mode = PreparationMode::physical_pulse;
  SystemParams params{};
  Index n_max_used = 0;
  TimingCertificate certificate{};
  std::vector<Snapshot> snapshots;
  std::vector<WindowDiagnostics> windows;
  double norm_deviation = 0.0;  // max over steps of |norm - 1| (pure) or |tr - 1|
  double fidelity_to_target = 0.0;
  std::optional<double> phase_optimized_fidelity;
  std::optional<double> entropy;  // absent when the pair state is mixed
  double negativity = 0.0;
  double purity = 0.0;
  RegimeReport regime{};
  bool regime_warning = false;

  const DensityMatrix& final_state() const { return snapshots.back().pair_state; }
};

namespace detail {

inline double norm_deviation(const PureState& psi) { return std::abs(psi.norm() - 1.0); }
inline double norm_deviation(const DensityMatrix& rho) { return std::abs(rho.trace() - 1.0); }

template <class State>
State apply_pair_unitary(const ComplexMatrix& u, const State& s) {
  return propagate(lift_pair(u, s.dims()), s);
}

/// Runs the sequence on `state`, recording a SQUID-pair snapshot after every step.
template <class State>
void execute(const PulseSequence& seq, State state, const SystemParams& params, Model model,
             const IntegratorConfig& cfg, const ProtocolOptions& options, ProtocolResult& out) {
  double clock = 0.0;
  for (const auto& [label, step] : seq.steps) {
    if (const auto* drive = std::get_if<ClassicalDrive>(&step)) {
      state = apply_pair_unitary(drive->unitary(), state);
      clock += drive->duration;
    } else if (const auto* window = std::get_if<CavityWindow>(&step)) {
      if (model == Model::effective) {
        state = apply_pair_unitary(
            effective_propagator(window->duration, window->effective_drive(), params), state);
      } else {
        const FullModel fm{params.g, params.delta, window->effective_drive(),
                           static_cast<Index>(state.dims()[2]), options.convention};
        const double start = options.continuous_clock ? clock : 0.0;
        auto evolved = evolve_full(state, start, window->duration, fm, cfg);
        out.windows.push_back({label, evolved.diagnostics});
        state = std::move(evolved.state);
      }
      clock += window->duration;
    } else {
      state = apply_pair_unitary(std::get<PhaseCorrection>(step).unitary(), state);
    }
    out.norm_deviation = std::max(out.norm_deviation, norm_deviation(state));
    out.snapshots.push_back({label, clock, squid_pair_state(state)});
  }
}

}  // namespace detail

/// Executes the canonical sequence and evaluates the final SQUID-pair state.
///
/// The effective model at nbar = 0 runs on the bare SQUID pair. With a thermal
/// cavity the composite density matrix is propagated; its cutoff is raised to
/// the smallest value meeting the thermal leakage bound if needed. The full
/// model always carries the cavity.
inline ProtocolResult run_protocol(const SystemParams& params, Model model,
                                   const IntegratorConfig& cfg = {},
                                   const ProtocolOptions& options = {}) {
  params.validate();
  cfg.validate();
  const PulseSequence seq = canonical_sequence(params, options.sequence);

  ProtocolResult out;
  out.model = model;
  out.mode = options.sequence.mode;
  out.params = params;
  out.certificate = seq.certificate;
  out.regime = check_regime(params, options.thresholds);
  out.regime_warning = !out.regime.regime_ok;

  const PureState ground_pair = PureState::basis(HilbertLayout::squid_pair(), 0, 0);
  if (params.nbar == 0.0) {
    if (model == Model::effective) {
      out.n_max_used = params.n_max;
      detail::execute(seq, ground_pair, params, model, cfg, options, out);
    } else {
      out.n_max_used = params.n_max;
      const auto layout = HilbertLayout::composite(params.n_max);
      detail::execute(seq, PureState::basis(layout, 0, 0, 0), params, model, cfg, options, out);
    }
  } else {
    out.n_max_used = std::max(params.n_max, minimal_thermal_cutoff(params.nbar));
    const DensityMatrix cavity = thermal_state({params.nbar, out.n_max_used});
    detail::execute(seq, tensor(DensityMatrix::from_pure(ground_pair), cavity), params, model, cfg,
                    options, out);
  }

  const DensityMatrix& final_pair = out.final_state();
  const PureState target = target_state();
  out.fidelity_to_target = fidelity(final_pair, target);
  out.purity = final_pair.purity();
  out.negativity = negativity(final_pair);
  if (out.purity >= 1.0 - kPurityTol) out.entropy = entanglement_entropy(final_pair);
  if (options.phase_optimized) out.phase_optimized_fidelity = phase_optimized_fidelity(final_pair, target);
  return out;
}

}  // namespace squidcav
