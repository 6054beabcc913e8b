#pragma once

// Model comparison, parameter sweeps and the printed-state verification battery.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "squidcav/dynamics.hpp"
#include "squidcav/hamiltonians.hpp"
#include "squidcav/metrics.hpp"
#include "squidcav/protocol.hpp"

namespace squidcav {

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

struct CheckEntry {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

inline CheckEntry make_check(std::string name, double measured, double tolerance,
                             std::string note = {}) {
  return {std::move(name), measured, tolerance, measured <= tolerance, std::move(note)};
}

/// max_i |a_i - e^{i phi} b_i| with phi = arg <b|a>, i.e. a global phase removed.
inline double amplitude_error(const PureState& a, const PureState& b) {
  const Complex overlap = b.inner(a);
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
  return (a.amplitudes() - phase * b.amplitudes()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// States as printed for each stage of the sequence
// ---------------------------------------------------------------------------

namespace printed {

inline PureState pair_state(std::initializer_list<std::pair<std::pair<Index, Index>, Complex>> terms) {
  const auto layout = HilbertLayout::squid_pair();
  ComplexVector v = ComplexVector::Zero(layout.dimension());
  for (const auto& [label, amp] : terms) v(layout.index(label.first, label.second)) += amp;
  return PureState(layout, std::move(v));
}

inline const double kThird = std::sqrt(1.0 / 3.0);
inline const double kTwoThirds = std::sqrt(2.0 / 3.0);

/// sqrt(1/3)|1>|0> - i sqrt(2/3)|0>|0>
inline PureState initial_superposition() {
  return pair_state({{{1, 0}, kThird}, {{0, 0}, -kI * kTwoThirds}});
}

/// sqrt(1/3)|1,0> + i sqrt(2/3)|2,2>
inline PureState after_first_window() {
  return pair_state({{{1, 0}, kThird}, {{2, 2}, kI * kTwoThirds}});
}

/// sqrt(1/3)|1,1> + i sqrt(2/3)|2,2>
inline PureState after_retarget() {
  return pair_state({{{1, 1}, kThird}, {{2, 2}, kI * kTwoThirds}});
}

/// sqrt(1/3)(|1,1> + i e^{-i pi/4}|2,2> + e^{-i pi/4}|0,0>)
inline PureState after_second_window() {
  const Complex q = std::exp(-kI * (kPi / 4.0));
  return pair_state({{{1, 1}, kThird}, {{2, 2}, kI * q * kThird}, {{0, 0}, q * kThird}});
}

/// sqrt(1/3)(|0,0> + |1,1> + |2,2>)
inline PureState final_target() { return target_state(); }

}  // namespace printed

inline constexpr double kPrintedStateTol = 1e-9;

/// Runs the effective-model sequence from the as-published initial state on the
/// bare SQUID pair and compares every stage with its printed form.
///
/// The printed first-window state treats |1,0> as untouched. The propagator
/// multiplies it by (-1)^k e^{-i lambda t1 / 2}, a relative phase against the
/// |2,2> branch, so the literal comparison fails; a second entry compares
/// against the printed form with that branch factor applied. The calibrated
/// retarget pulse absorbs the factor, so every later stage matches literally.
inline std::vector<CheckEntry> verify_printed_states(const SystemParams& params = {}) {
  params.validate();
  const PreparationMode mode = PreparationMode::as_published;
  const PulseSequence seq = canonical_sequence(params, {mode, true, RetargetPhase::calibrated});
  const auto& prep = std::get<ClassicalDrive>(seq.steps[0].step);
  const auto& w1 = std::get<CavityWindow>(seq.steps[1].step);
  const auto& pulse = std::get<ClassicalDrive>(seq.steps[2].step);
  const auto& w2 = std::get<CavityWindow>(seq.steps[3].step);
  const auto& corr = std::get<PhaseCorrection>(seq.steps[4].step);

  std::vector<CheckEntry> report;
  const auto pair = HilbertLayout::squid_pair();

  const PureState driven = PureState::basis(pair, 0, 0).apply(prep.unitary());
  report.push_back(make_check("initial_superposition",
                              amplitude_error(driven, printed::initial_superposition()),
                              kPrintedStateTol, "preparation pulse from |0,0>"));

  PureState psi = prepare_initial(mode);
  psi = psi.apply(effective_propagator(w1.duration, w1.effective_drive(), params));
  report.push_back(make_check("after_first_window",
                              amplitude_error(psi, printed::after_first_window()),
                              kPrintedStateTol, "printed form, global phase excluded"));

  {
    ComplexVector corrected = printed::after_first_window().amplitudes();
    corrected(pair.index(1, 0)) *= first_window_factors(params.k).ten;
    report.push_back(make_check("after_first_window_branch_phase",
                                amplitude_error(psi, PureState(pair, corrected)), kPrintedStateTol,
                                "printed form with |1,0> factor (-1)^k e^{-i lambda t1/2}"));
  }

  psi = psi.apply(pulse.unitary());
  report.push_back(make_check("after_retarget", amplitude_error(psi, printed::after_retarget()),
                              kPrintedStateTol));

  psi = psi.apply(effective_propagator(w2.duration, w2.effective_drive(), params));
  report.push_back(make_check("after_second_window",
                              amplitude_error(psi, printed::after_second_window()),
                              kPrintedStateTol));
  {
    const Complex rel = psi[pair.index(2, 2)] / psi[pair.index(1, 1)];
    report.push_back(make_check("second_window_relative_phase",
                                std::abs(std::arg(rel) - kPi / 4.0), kPrintedStateTol,
                                "arg(<2,2|psi>/<1,1|psi>) = pi/4"));
  }

  psi = psi.apply(corr.unitary());
  report.push_back(make_check("final_target", amplitude_error(psi, printed::final_target()),
                              kPrintedStateTol));
  {
    double spread = 0.0;
    const Complex ref = psi[pair.index(0, 0)];
    for (Index s = 0; s < kSquidLevels; ++s) {
      spread = std::max(spread, std::abs(std::arg(psi[pair.index(s, s)] / ref)));
      spread = std::max(spread, std::abs(std::abs(psi[pair.index(s, s)]) - printed::kThird));
    }
    report.push_back(make_check("final_target_equal_amplitudes", spread, kPrintedStateTol,
                                "|amplitude| = 1/sqrt(3), zero relative phase"));
  }
  return report;
}

/// ||[H0(omega), He(lambda)]||_F over `samples` random (omega, lambda) pairs.
inline double max_commutator_h0_he(int samples = 100, unsigned seed = 20240917u) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> omega_dist(0.01, 500.0);
  std::uniform_real_distribution<double> delta_dist(0.5, 50.0);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    SystemParams p;
    p.delta = delta_dist(rng);
    worst = std::max(worst, commutator_norm(h0(omega_dist(rng)), h_effective(p)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Model comparison
// ---------------------------------------------------------------------------

struct ModelComparison {
  double fidelity_effective = 0.0;
  double fidelity_full = 0.0;
  double trace_distance = 0.0;
  RegimeReport regime{};
};

inline ModelComparison compare_models(const SystemParams& params, const IntegratorConfig& cfg = {},
                                      const ProtocolOptions& options = {}) {
  const ProtocolResult eff = run_protocol(params, Model::effective, cfg, options);
  const ProtocolResult full = run_protocol(params, Model::full, cfg, options);
  return {eff.fidelity_to_target, full.fidelity_to_target,
          trace_distance(eff.final_state(), full.final_state()), full.regime};
}

struct OrderStudy {
  double error_coarse = 0.0;  // ||psi(dt) - psi(dt/2)||
  double error_fine = 0.0;    // ||psi(dt/2) - psi(dt/4)||
  double ratio = 0.0;
};

/// Endpoint self-convergence of the fixed-step integrator from `initial`. A
/// second-order scheme gives ratio ~ 4.
inline OrderStudy integrator_order(const FullModel& model, const PureState& initial,
                                   double t_start, double duration, std::int64_t steps) {
  const FullPropagator prop(model);
  auto endpoint = [&](std::int64_t s) {
    return (prop.propagator(t_start, duration, s) * initial.amplitudes()).eval();
  };
  const ComplexVector a = endpoint(steps);
  const ComplexVector b = endpoint(2 * steps);
  const ComplexVector c = endpoint(4 * steps);
  OrderStudy out;
  out.error_coarse = (a - b).norm();
  out.error_fine = (b - c).norm();
  out.ratio = out.error_coarse / out.error_fine;
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Values per swept key; an empty list leaves the base value in place.
struct SweepGrid {
  std::vector<double> delta;
  std::vector<std::int64_t> k;
  std::vector<double> nbar;
  std::vector<Index> n_max;

  std::size_t size() const {
    auto n = [](std::size_t s) { return std::max<std::size_t>(s, 1); };
    return n(delta.size()) * n(k.size()) * n(nbar.size()) * n(n_max.size());
  }
  bool empty() const { return delta.empty() && k.empty() && nbar.empty() && n_max.empty(); }
};

struct SweepSpec {
  SystemParams base{};
  Model model = Model::effective;
  IntegratorConfig integrator{};
  ProtocolOptions options{};
  /// When set, k and k' (unless k is swept) are re-derived from each point's
  /// delta at this drive ratio.
  std::optional<double> auto_drive_ratio;
  unsigned max_threads = 0;  // 0: hardware concurrency
};

struct SweepRecord {
  std::vector<std::pair<std::string, double>> swept;
  SystemParams params{};
  double fidelity_to_target = std::nan("");
  std::optional<double> phase_optimized_fidelity;
  std::optional<double> entropy;
  double negativity = std::nan("");
  RegimeReport regime{};
  double final_dt = 0.0;  // finest accepted dt over the full-model windows
  int halvings = 0;       // most halvings over the full-model windows
  Index n_max_used = 0;
  std::optional<std::string> error;
};

inline std::vector<std::pair<std::vector<std::pair<std::string, double>>, SystemParams>>
expand_grid(const SweepGrid& grid, const SweepSpec& spec) {
  std::vector<std::pair<std::vector<std::pair<std::string, double>>, SystemParams>> points;
  const std::vector<std::optional<double>> deltas = [&] {
    std::vector<std::optional<double>> v(grid.delta.begin(), grid.delta.end());
    if (v.empty()) v.push_back(std::nullopt);
    return v;
  }();
  auto opt_list = [](const auto& values) {
    using T = typename std::decay_t<decltype(values)>::value_type;
    std::vector<std::optional<T>> v(values.begin(), values.end());
    if (v.empty()) v.push_back(std::nullopt);
    return v;
  };
  for (const auto& d : deltas)
    for (const auto& k : opt_list(grid.k))
      for (const auto& nb : opt_list(grid.nbar))
        for (const auto& nm : opt_list(grid.n_max)) {
          SystemParams p = spec.base;
          std::vector<std::pair<std::string, double>> swept;
          if (d) {
            p.delta = *d;
            swept.emplace_back("delta", *d);
          }
          if (spec.auto_drive_ratio) {
            p.k = regime_k(p.g, p.delta, *spec.auto_drive_ratio);
            p.k_prime = regime_k_prime(p.g, p.delta, *spec.auto_drive_ratio);
          }
          if (k) {
            p.k = *k;
            swept.emplace_back("k", static_cast<double>(*k));
          }
          if (nb) {
            p.nbar = *nb;
            swept.emplace_back("nbar", *nb);
          }
          if (nm) {
            p.n_max = *nm;
            swept.emplace_back("n_max", static_cast<double>(*nm));
          }
          points.emplace_back(std::move(swept), p);
        }
  return points;
}

inline SweepRecord run_sweep_point(std::vector<std::pair<std::string, double>> swept,
                                   const SystemParams& p, const SweepSpec& spec) {
  SweepRecord rec;
  rec.swept = std::move(swept);
  rec.params = p;
  try {
    rec.regime = check_regime(p, spec.options.thresholds);
    const ProtocolResult r = run_protocol(p, spec.model, spec.integrator, spec.options);
    rec.fidelity_to_target = r.fidelity_to_target;
    rec.phase_optimized_fidelity = r.phase_optimized_fidelity;
    rec.entropy = r.entropy;
    rec.negativity = r.negativity;
    rec.n_max_used = r.n_max_used;
    for (const auto& w : r.windows) {
      rec.final_dt = rec.final_dt == 0.0 ? w.integrator.final_dt
                                         : std::min(rec.final_dt, w.integrator.final_dt);
      rec.halvings = std::max(rec.halvings, w.integrator.halvings);
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

/// One record per grid point in grid order (delta, k, nbar, n_max; last fastest).
/// Points run concurrently; a failing point yields a record with `error` set.
inline std::vector<SweepRecord> sweep(const SweepGrid& grid, const SweepSpec& spec) {
  if (grid.empty()) throw ValidationError("grid", "sweep grid must vary at least one key");
  const auto points = expand_grid(grid, spec);
  std::vector<SweepRecord> records(points.size());

  unsigned threads = spec.max_threads ? spec.max_threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(points.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      records[i] = run_sweep_point(points[i].first, points[i].second, spec);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

}  // namespace squidcav
