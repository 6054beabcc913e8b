#pragma once

// Dense complex linear algebra for the two-qutrit + single-mode space.
//
// Everything is value-typed on top of Eigen's dynamic complex matrices. The
// composite space is always ordered SQUID1 (x) SQUID2 (x) cavity, with the
// cavity index running fastest.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "squidcav/errors.hpp"

namespace squidcav {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<Index>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-9;
inline constexpr double kNormTol = 1e-9;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;

inline constexpr Index kSquidLevels = 3;

enum class Slot { squid1 = 0, squid2 = 1, cavity = 2 };

// ---------------------------------------------------------------------------
// Layout and basis bookkeeping
// ---------------------------------------------------------------------------

struct BasisLabel {
  Index s1 = 0;
  Index s2 = 0;
  Index n = 0;
  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

/// SQUID1 (x) SQUID2 (x) cavity, or the SQUID pair alone when the Fock
/// cutoff is zero. Composite index = ((s1 * 3) + s2) * n_max + n.
class HilbertLayout {
 public:
  static HilbertLayout composite(Index fock_cutoff) {
    if (fock_cutoff < 2) {
      throw DimensionError("fock cutoff must be >= 2, got " + std::to_string(fock_cutoff));
    }
    return HilbertLayout(fock_cutoff);
  }
  static HilbertLayout squid_pair() { return HilbertLayout(0); }

  bool has_cavity() const noexcept { return fock_cutoff_ > 0; }
  Index fock_cutoff() const noexcept { return fock_cutoff_; }
  Index cavity_dim() const noexcept { return has_cavity() ? fock_cutoff_ : 1; }
  Index dimension() const noexcept { return kSquidLevels * kSquidLevels * cavity_dim(); }

  Dims dims() const {
    if (has_cavity()) return {kSquidLevels, kSquidLevels, fock_cutoff_};
    return {kSquidLevels, kSquidLevels};
  }

  Index factor_dim(Slot slot) const {
    if (slot == Slot::cavity) {
      if (!has_cavity()) throw DimensionError("layout has no cavity factor");
      return fock_cutoff_;
    }
    return kSquidLevels;
  }

  Index index(Index s1, Index s2, Index n = 0) const {
    if (s1 < 0 || s1 >= kSquidLevels || s2 < 0 || s2 >= kSquidLevels || n < 0 ||
        n >= cavity_dim()) {
      throw DimensionError("basis label out of range");
    }
    return (s1 * kSquidLevels + s2) * cavity_dim() + n;
  }

  BasisLabel decode(Index idx) const {
    if (idx < 0 || idx >= dimension()) throw DimensionError("composite index out of range");
    const Index n = idx % cavity_dim();
    const Index pair = idx / cavity_dim();
    return {pair / kSquidLevels, pair % kSquidLevels, n};
  }

  friend bool operator==(const HilbertLayout&, const HilbertLayout&) = default;

 private:
  explicit HilbertLayout(Index fock_cutoff) : fock_cutoff_(fock_cutoff) {}
  Index fock_cutoff_;
};

inline Index total_dim(std::span<const Index> dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

// ---------------------------------------------------------------------------
// Structural checks
// ---------------------------------------------------------------------------

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// max |A - A^dagger| over entries.
inline double hermiticity_error(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(m - m.adjoint());
}

/// Absolute tolerance scaled by the entry magnitude so that generators with
/// large drive amplitudes are judged on relative roundoff.
inline bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
  return hermiticity_error(m) <= tol * std::max(1.0, max_abs(m));
}

inline double unitarity_error(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).norm();
}

inline bool is_unitary(const ComplexMatrix& u, double tol = kUnitaryTol) {
  return unitarity_error(u) <= tol;
}

// ---------------------------------------------------------------------------
// Operator construction
// ---------------------------------------------------------------------------

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline ComplexMatrix kron(std::initializer_list<ComplexMatrix> factors) {
  if (factors.size() == 0) return ComplexMatrix::Identity(1, 1);
  auto it = factors.begin();
  ComplexMatrix out = *it++;
  for (; it != factors.end(); ++it) out = kron(out, *it);
  return out;
}

/// Lift a single-factor operator into the layout, identity elsewhere.
inline ComplexMatrix embed(const ComplexMatrix& op, Slot slot, const HilbertLayout& layout) {
  const Index d = layout.factor_dim(slot);
  if (op.rows() != d || op.cols() != d) {
    throw DimensionError("embed: operator is " + std::to_string(op.rows()) + "x" +
                         std::to_string(op.cols()) + ", slot expects " + std::to_string(d));
  }
  const Dims dims = layout.dims();
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (std::size_t f = 0; f < dims.size(); ++f) {
    out = kron(out, static_cast<int>(f) == static_cast<int>(slot)
                        ? op
                        : ComplexMatrix(ComplexMatrix::Identity(dims[f], dims[f])));
  }
  return out;
}

/// Lift a SQUID-pair (9x9) operator onto the composite space: op (x) I_cavity.
inline ComplexMatrix embed_pair(const ComplexMatrix& op, const HilbertLayout& layout) {
  const Index pair = kSquidLevels * kSquidLevels;
  if (op.rows() != pair || op.cols() != pair) {
    throw DimensionError("embed_pair: expected a 9x9 operator");
  }
  if (!layout.has_cavity()) return op;
  return kron(op, ComplexMatrix::Identity(layout.fock_cutoff(), layout.fock_cutoff()));
}

/// Truncated bosonic annihilation operator: a|n> = sqrt(n)|n-1>.
inline ComplexMatrix annihilation(Index n_max) {
  if (n_max < 2) throw DimensionError("annihilation: n_max must be >= 2");
  ComplexMatrix a = ComplexMatrix::Zero(n_max, n_max);
  for (Index n = 1; n < n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline ComplexMatrix creation(Index n_max) { return annihilation(n_max).adjoint(); }

inline ComplexMatrix number_operator(Index n_max) {
  if (n_max < 2) throw DimensionError("number_operator: n_max must be >= 2");
  ComplexMatrix n = ComplexMatrix::Zero(n_max, n_max);
  for (Index k = 0; k < n_max; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

/// |u><v| on one qutrit.
inline ComplexMatrix squid_ketbra(Index u, Index v) {
  if (u < 0 || u >= kSquidLevels || v < 0 || v >= kSquidLevels) {
    throw DimensionError("squid level out of range");
  }
  ComplexMatrix m = ComplexMatrix::Zero(kSquidLevels, kSquidLevels);
  m(u, v) = 1.0;
  return m;
}

/// S+ = |2><0|
inline ComplexMatrix squid_raise() { return squid_ketbra(2, 0); }
/// S- = |0><2|
inline ComplexMatrix squid_lower() { return squid_ketbra(0, 2); }
inline ComplexMatrix squid_projector(Index level) { return squid_ketbra(level, level); }

/// diag(e^{i phi0}, e^{i phi1}, e^{i phi2})
inline ComplexMatrix squid_level_phase(const std::array<double, 3>& phases) {
  ComplexMatrix m = ComplexMatrix::Zero(kSquidLevels, kSquidLevels);
  for (Index k = 0; k < kSquidLevels; ++k) m(k, k) = std::exp(kI * phases[k]);
  return m;
}

// ---------------------------------------------------------------------------
// Hermitian exponential
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian generator, reusable for any time t.
class HermitianExponential {
 public:
  explicit HermitianExponential(const ComplexMatrix& h) {
    if (h.rows() != h.cols()) throw DimensionError("matexp_hermitian: matrix is not square");
    if (!is_hermitian(h)) {
      throw StructureError("matexp_hermitian: generator is not Hermitian (error " +
                           std::to_string(hermiticity_error(h)) + ")");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    if (solver.info() != Eigen::Success) {
      throw StructureError("matexp_hermitian: eigendecomposition failed");
    }
    energies_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
  }

  /// exp(-i h t)
  ComplexMatrix operator()(double t) const {
    ComplexVector phases(energies_.size());
    for (Index k = 0; k < energies_.size(); ++k) phases(k) = std::exp(-kI * energies_(k) * t);
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
  }

  const RealVector& energies() const noexcept { return energies_; }
  const ComplexMatrix& eigenvectors() const noexcept { return vectors_; }

 private:
  RealVector energies_;
  ComplexMatrix vectors_;
};

inline ComplexMatrix matexp_hermitian(const ComplexMatrix& h, double t) {
  return HermitianExponential(h)(t);
}

/// Frobenius norm of [a, b].
inline double commutator_norm(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw DimensionError("commutator_norm: operands must be square with equal dimensions");
  }
  return (a * b - b * a).norm();
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Normalized ket over a tensor-product space.
class PureState {
 public:
  PureState(Dims dims, ComplexVector amplitudes)
      : dims_(std::move(dims)), amplitudes_(std::move(amplitudes)) {
    if (total_dim(dims_) != amplitudes_.size()) {
      throw DimensionError("PureState: amplitude count does not match factor dimensions");
    }
    if (std::abs(amplitudes_.norm() - 1.0) > kNormTol) {
      throw StructureError("PureState: state is not normalized (norm " +
                           std::to_string(amplitudes_.norm()) + ")");
    }
  }
  PureState(const HilbertLayout& layout, ComplexVector amplitudes)
      : PureState(layout.dims(), std::move(amplitudes)) {}

  static PureState basis(const Dims& dims, Index index) {
    ComplexVector v = ComplexVector::Zero(total_dim(dims));
    v(index) = 1.0;
    return PureState(dims, std::move(v));
  }
  static PureState basis(const HilbertLayout& layout, Index s1, Index s2, Index n = 0) {
    return basis(layout.dims(), layout.index(s1, s2, n));
  }

  /// Normalizes the vector first; rejects the zero vector.
  static PureState normalized(Dims dims, ComplexVector v) {
    const double norm = v.norm();
    if (norm == 0.0) throw StructureError("PureState: cannot normalize the zero vector");
    return PureState(std::move(dims), v / norm);
  }

  const Dims& dims() const noexcept { return dims_; }
  Index dimension() const noexcept { return amplitudes_.size(); }
  const ComplexVector& amplitudes() const noexcept { return amplitudes_; }
  Complex operator[](Index i) const { return amplitudes_(i); }
  double norm() const { return amplitudes_.norm(); }

  PureState apply(const ComplexMatrix& u) const {
    if (u.cols() != dimension() || u.rows() != dimension()) {
      throw DimensionError("PureState::apply: operator dimension mismatch");
    }
    return PureState(dims_, u * amplitudes_);
  }

  Complex inner(const PureState& other) const {
    if (other.dimension() != dimension()) throw DimensionError("inner: dimension mismatch");
    return amplitudes_.dot(other.amplitudes_);
  }

 private:
  Dims dims_;
  ComplexVector amplitudes_;
};

/// Kronecker product of kets.
inline PureState tensor(const PureState& a, const PureState& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return PureState(std::move(dims), kron(a.amplitudes(), b.amplitudes()));
}

/// Hermitian, unit-trace, positive semidefinite operator over a tensor space.
class DensityMatrix {
 public:
  DensityMatrix(Dims dims, ComplexMatrix matrix)
      : dims_(std::move(dims)), matrix_(std::move(matrix)) {
    const Index d = total_dim(dims_);
    if (matrix_.rows() != d || matrix_.cols() != d) {
      throw DimensionError("DensityMatrix: matrix shape does not match factor dimensions");
    }
    if (!is_hermitian(matrix_)) {
      throw StructureError("DensityMatrix: not Hermitian (error " +
                           std::to_string(hermiticity_error(matrix_)) + ")");
    }
    const double tr = matrix_.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol) {
      throw StructureError("DensityMatrix: trace is " + std::to_string(tr));
    }
  }

  static DensityMatrix from_pure(const PureState& psi) {
    return DensityMatrix(psi.dims(), psi.amplitudes() * psi.amplitudes().adjoint());
  }

  const Dims& dims() const noexcept { return dims_; }
  Index dimension() const noexcept { return matrix_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }

  double trace() const { return matrix_.trace().real(); }
  double purity() const { return (matrix_ * matrix_).trace().real(); }

  RealVector eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
  }

  /// Full invariant check including positivity (eigenvalue pass).
  bool is_valid() const {
    return is_hermitian(matrix_) && std::abs(trace() - 1.0) <= kTraceTol &&
           eigenvalues().minCoeff() >= -kPositivityTol;
  }

  /// rho -> U rho U^dagger. The product is re-symmetrized to stay Hermitian.
  DensityMatrix conjugate(const ComplexMatrix& u) const {
    if (u.rows() != dimension() || u.cols() != dimension()) {
      throw DimensionError("DensityMatrix::conjugate: operator dimension mismatch");
    }
    ComplexMatrix out = u * matrix_ * u.adjoint();
    out = 0.5 * (out + out.adjoint()).eval();
    return DensityMatrix(dims_, std::move(out));
  }

 private:
  Dims dims_;
  ComplexMatrix matrix_;
};

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return DensityMatrix(std::move(dims), kron(a.matrix(), b.matrix()));
}

}  // namespace squidcav
