#pragma once

// State metrics: fidelity, reduced states, entropy, negativity, trace distance.

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "squidcav/tensor_core.hpp"

namespace squidcav {

/// <psi| rho |psi>, clamped to [0, 1].
inline double fidelity(const DensityMatrix& rho, const PureState& psi) {
  if (rho.dimension() != psi.dimension()) throw DimensionError("fidelity: dimension mismatch");
  const double f = psi.amplitudes().dot(rho.matrix() * psi.amplitudes()).real();
  return std::clamp(f, 0.0, 1.0);
}

inline double fidelity(const PureState& phi, const PureState& psi) {
  return std::clamp(std::norm(phi.inner(psi)), 0.0, 1.0);
}

/// Reduced density matrix over the factors listed in `keep` (any order; the
/// result keeps the original factor ordering).
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, const Dims& dims,
                                   const std::vector<Index>& keep) {
  const std::set<Index> kept(keep.begin(), keep.end());
  if (kept.empty() || kept.size() != keep.size()) {
    throw DimensionError("partial_trace: keep must be a nonempty set of distinct factors");
  }
  for (Index f : kept) {
    if (f < 0 || f >= static_cast<Index>(dims.size())) {
      throw DimensionError("partial_trace: factor index out of range");
    }
  }
  const Index d = total_dim(dims);
  if (rho.rows() != d || rho.cols() != d) throw DimensionError("partial_trace: shape mismatch");

  // Split every composite index into (kept, traced) sub-indices.
  std::vector<Index> kept_idx(d), traced_idx(d);
  Index kept_dim = 1;
  for (Index f : kept) kept_dim *= dims[f];
  for (Index i = 0; i < d; ++i) {
    Index rem = i, k = 0, r = 0, kstride = 1, rstride = 1;
    for (Index f = static_cast<Index>(dims.size()) - 1; f >= 0; --f) {
      const Index digit = rem % dims[f];
      rem /= dims[f];
      if (kept.count(f)) {
        k += digit * kstride;
        kstride *= dims[f];
      } else {
        r += digit * rstride;
        rstride *= dims[f];
      }
    }
    kept_idx[i] = k;
    traced_idx[i] = r;
  }

  ComplexMatrix out = ComplexMatrix::Zero(kept_dim, kept_dim);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      if (traced_idx[i] == traced_idx[j]) out(kept_idx[i], kept_idx[j]) += rho(i, j);
    }
  }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<Index>& keep) {
  ComplexMatrix reduced = partial_trace(rho.matrix(), rho.dims(), keep);
  std::vector<Index> sorted(keep);
  std::sort(sorted.begin(), sorted.end());
  Dims kept_dims;
  for (Index f : sorted) kept_dims.push_back(rho.dims()[f]);
  reduced = 0.5 * (reduced + reduced.adjoint()).eval();
  return DensityMatrix(std::move(kept_dims), std::move(reduced));
}

/// SQUID-pair reduced state (cavity traced out when present).
inline DensityMatrix squid_pair_state(const DensityMatrix& rho) {
  if (rho.dims().size() == 2) return rho;
  return partial_trace(rho, {0, 1});
}

inline DensityMatrix squid_pair_state(const PureState& psi) {
  return squid_pair_state(DensityMatrix::from_pure(psi));
}

/// -sum p log2 p over the spectrum.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  double s = 0.0;
  for (double p : rho.eigenvalues()) {
    if (p > 1e-15) s -= p * std::log2(p);
  }
  return s;
}

inline constexpr double kPurityTol = 1e-6;

/// Entropy of entanglement (ebits) of a pure SQUID-pair state.
inline double entanglement_entropy(const DensityMatrix& rho_pair) {
  if (rho_pair.dims() != Dims{kSquidLevels, kSquidLevels}) {
    throw DimensionError("entanglement_entropy: expected a SQUID-pair state");
  }
  const double purity = rho_pair.purity();
  if (purity < 1.0 - kPurityTol) {
    throw MixedStateError("entanglement_entropy: state is mixed (purity " +
                              std::to_string(purity) + ")",
                          purity);
  }
  return von_neumann_entropy(partial_trace(rho_pair, {0}));
}

/// Partial transpose on the second factor of a bipartite operator.
inline ComplexMatrix partial_transpose(const ComplexMatrix& rho, Index dim_a, Index dim_b) {
  if (rho.rows() != dim_a * dim_b || rho.cols() != dim_a * dim_b) {
    throw DimensionError("partial_transpose: shape mismatch");
  }
  ComplexMatrix out(rho.rows(), rho.cols());
  for (Index i1 = 0; i1 < dim_a; ++i1)
    for (Index i2 = 0; i2 < dim_b; ++i2)
      for (Index j1 = 0; j1 < dim_a; ++j1)
        for (Index j2 = 0; j2 < dim_b; ++j2)
          out(i1 * dim_b + i2, j1 * dim_b + j2) = rho(i1 * dim_b + j2, j1 * dim_b + i2);
  return out;
}

/// Sum of |negative eigenvalues| of the partial transpose.
inline double negativity(const DensityMatrix& rho) {
  if (rho.dims().size() != 2) throw DimensionError("negativity: expected a bipartite state");
  const ComplexMatrix pt = partial_transpose(rho.matrix(), rho.dims()[0], rho.dims()[1]);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(pt, Eigen::EigenvaluesOnly);
  double n = 0.0;
  for (double ev : solver.eigenvalues()) {
    if (ev < 0.0) n -= ev;
  }
  return n;
}

/// (1/2) ||a - b||_1
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dimension() != b.dimension()) throw DimensionError("trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix() - b.matrix(),
                                                      Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

/// Best fidelity to `psi` over local diagonal phase gates on both SQUIDs,
/// max over D = diag(e^{i a}) (x) diag(e^{i b}) of <psi| D rho D^dag |psi>.
///
/// Coordinate ascent: with all other phases fixed the objective is
/// c + 2 Re(A e^{i theta}), maximized at theta = -arg A. Several starting
/// points guard against local maxima.
inline double phase_optimized_fidelity(const DensityMatrix& rho, const PureState& psi) {
  if (rho.dims() != Dims{kSquidLevels, kSquidLevels} || psi.dims() != rho.dims()) {
    throw DimensionError("phase_optimized_fidelity: expected SQUID-pair states");
  }
  constexpr Index d = kSquidLevels * kSquidLevels;
  // W_ab = conj(psi_a) rho_ab psi_b
  ComplexMatrix w(d, d);
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) w(a, b) = std::conj(psi[a]) * rho.matrix()(a, b) * psi[b];

  // Phase coordinates: 0,1,2 act on SQUID1 levels, 3,4,5 on SQUID2 levels.
  auto owner = [](Index a, int coord) {
    return coord < 3 ? a / kSquidLevels == coord : a % kSquidLevels == coord - 3;
  };
  auto objective = [&](const std::array<double, 6>& ph) {
    Complex f = 0.0;
    for (Index a = 0; a < d; ++a)
      for (Index b = 0; b < d; ++b) {
        const double pa = ph[a / kSquidLevels] + ph[3 + a % kSquidLevels];
        const double pb = ph[b / kSquidLevels] + ph[3 + b % kSquidLevels];
        f += w(a, b) * std::exp(kI * (pa - pb));
      }
    return f.real();
  };

  double best = 0.0;
  const std::array<double, 4> starts = {0.0, 0.5 * kPi, kPi, 1.5 * kPi};
  for (double s1 : starts) {
    for (double s2 : starts) {
      std::array<double, 6> ph = {0.0, s1, s2, 0.0, s2, s1};
      double value = objective(ph);
      for (int sweep = 0; sweep < 500; ++sweep) {
        for (int c : {1, 2, 4, 5}) {
          Complex acc = 0.0;
          for (Index a = 0; a < d; ++a) {
            if (!owner(a, c)) continue;
            for (Index b = 0; b < d; ++b) {
              if (owner(b, c)) continue;
              const double pa = ph[a / kSquidLevels] + ph[3 + a % kSquidLevels] - ph[c];
              const double pb = ph[b / kSquidLevels] + ph[3 + b % kSquidLevels];
              acc += w(a, b) * std::exp(kI * (pa - pb));
            }
          }
          if (std::abs(acc) > 0.0) ph[c] = -std::arg(acc);
        }
        const double next = objective(ph);
        const bool done = next - value < 1e-15;
        value = std::max(value, next);
        if (done) break;
      }
      best = std::max(best, value);
    }
  }
  return std::clamp(best, 0.0, 1.0);
}

}  // namespace squidcav
