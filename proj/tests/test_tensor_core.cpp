#include <catch_amalgamated.hpp>

#include <random>

#include "squidcav/metrics.hpp"
#include "squidcav/tensor_core.hpp"

using namespace squidcav;
using Catch::Matchers::WithinAbs;

namespace {

ComplexMatrix random_hermitian(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = Complex(n(rng), n(rng));
  return 0.5 * (m + m.adjoint());
}

ComplexVector random_vector(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexVector v(d);
  for (Index i = 0; i < d; ++i) v(i) = Complex(n(rng), n(rng));
  return v.normalized();
}

}  // namespace

TEST_CASE("layout indexes and decodes consistently") {
  const auto layout = HilbertLayout::composite(5);
  CHECK(layout.dimension() == 45);
  CHECK(layout.dims() == Dims{3, 3, 5});
  for (Index i = 0; i < layout.dimension(); ++i) {
    const auto b = layout.decode(i);
    CHECK(layout.index(b.s1, b.s2, b.n) == i);
  }
  CHECK(layout.index(1, 2, 3) == (1 * 3 + 2) * 5 + 3);
  CHECK_THROWS_AS(HilbertLayout::composite(1), DimensionError);
  CHECK(HilbertLayout::squid_pair().dimension() == 9);
}

TEST_CASE("ladder operators") {
  const Index n = 6;
  const ComplexMatrix a = annihilation(n);
  const ComplexMatrix comm = a * creation(n) - creation(n) * a;
  for (Index k = 0; k < n - 1; ++k) CHECK_THAT(comm(k, k).real(), WithinAbs(1.0, 1e-14));
  CHECK_THAT(comm(n - 1, n - 1).real(), WithinAbs(-(n - 1.0), 1e-14));
  CHECK(max_abs(creation(n) * a - number_operator(n)) < 1e-14);
  CHECK(squid_raise()(2, 0) == Complex(1.0));
  CHECK(max_abs(squid_lower() - squid_raise().adjoint()) == 0.0);
  CHECK_THROWS_AS(annihilation(1), DimensionError);
}

TEST_CASE("embed matches an explicit Kronecker product") {
  const auto layout = HilbertLayout::composite(4);
  const ComplexMatrix i3 = ComplexMatrix::Identity(3, 3);
  const ComplexMatrix i4 = ComplexMatrix::Identity(4, 4);
  CHECK(max_abs(embed(squid_raise(), Slot::squid1, layout) - kron({squid_raise(), i3, i4})) == 0.0);
  CHECK(max_abs(embed(squid_raise(), Slot::squid2, layout) - kron({i3, squid_raise(), i4})) == 0.0);
  CHECK(max_abs(embed(annihilation(4), Slot::cavity, layout) - kron({i3, i3, annihilation(4)})) ==
        0.0);
  CHECK_THROWS_AS(embed(annihilation(5), Slot::cavity, layout), DimensionError);
}

TEST_CASE("hermitian exponential is unitary and solves the linear ODE") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix h = random_hermitian(9, rng);
    const HermitianExponential ex(h);
    const ComplexMatrix u = ex(0.37);
    CHECK(unitarity_error(u) < 1e-12);
    // group property and derivative at t = 0.37 by central difference
    CHECK(max_abs(ex(0.2) * ex(0.17) - u) < 1e-12);
    const double eps = 1e-5;
    const ComplexMatrix du = (ex(0.37 + eps) - ex(0.37 - eps)) / (2 * eps);
    CHECK(max_abs(du + kI * h * u) < 1e-8);
  }
}

TEST_CASE("exponential of a Pauli-like generator has the closed form") {
  ComplexMatrix x = squid_raise() + squid_lower();
  const double t = 0.81;
  const ComplexMatrix u = matexp_hermitian(x, t);
  CHECK_THAT(std::abs(u(0, 0) - std::cos(t)), WithinAbs(0.0, 1e-14));
  CHECK_THAT(std::abs(u(2, 0) + kI * std::sin(t)), WithinAbs(0.0, 1e-14));
  CHECK_THAT(std::abs(u(1, 1) - 1.0), WithinAbs(0.0, 1e-14));
}

TEST_CASE("pure states validate their norm") {
  ComplexVector v = ComplexVector::Zero(9);
  v(0) = 1.0;
  CHECK_NOTHROW(PureState(Dims{3, 3}, v));
  v(1) = 0.1;
  CHECK_THROWS_AS(PureState(Dims{3, 3}, v), StructureError);
  CHECK_THROWS_AS(PureState(Dims{3, 2}, ComplexVector::Zero(9)), DimensionError);
  const auto n = PureState::normalized(Dims{3, 3}, v);
  CHECK_THAT(n.norm(), WithinAbs(1.0, 1e-15));
}

TEST_CASE("density matrices validate structure") {
  const auto pair = HilbertLayout::squid_pair();
  const auto psi = PureState::basis(pair, 1, 2);
  const auto rho = DensityMatrix::from_pure(psi);
  CHECK(rho.is_valid());
  CHECK_THAT(rho.purity(), WithinAbs(1.0, 1e-15));

  ComplexMatrix bad = rho.matrix();
  bad(0, 1) = 0.2;
  CHECK_THROWS_AS(DensityMatrix(Dims{3, 3}, bad), StructureError);
  CHECK_THROWS_AS(DensityMatrix(Dims{3, 3}, 2.0 * rho.matrix()), StructureError);
}

TEST_CASE("tensor products and partial traces invert each other") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const PureState a(Dims{3}, random_vector(3, rng));
    const PureState b(Dims{3}, random_vector(3, rng));
    const PureState c(Dims{4}, random_vector(4, rng));
    const auto rho = DensityMatrix::from_pure(tensor(tensor(a, b), c));
    CHECK(rho.dims() == Dims{3, 3, 4});
    CHECK(max_abs(partial_trace(rho, {0}).matrix() - DensityMatrix::from_pure(a).matrix()) < 1e-13);
    CHECK(max_abs(partial_trace(rho, {2}).matrix() - DensityMatrix::from_pure(c).matrix()) < 1e-13);
    CHECK(max_abs(partial_trace(rho, {0, 1}).matrix() -
                  DensityMatrix::from_pure(tensor(a, b)).matrix()) < 1e-13);
  }
  CHECK_THROWS_AS(partial_trace(ComplexMatrix::Identity(9, 9) / 9.0, Dims{3, 3}, {0, 0}),
                  DimensionError);
}

TEST_CASE("conjugation preserves validity under random unitaries") {
  std::mt19937_64 rng(3);
  const ComplexMatrix u = matexp_hermitian(random_hermitian(9, rng), 1.3);
  ComplexMatrix mix = ComplexMatrix::Zero(9, 9);
  for (int i = 0; i < 4; ++i) {
    const ComplexVector v = random_vector(9, rng);
    mix += 0.25 * v * v.adjoint();
  }
  const DensityMatrix rho(Dims{3, 3}, mix);
  const DensityMatrix out = rho.conjugate(u);
  CHECK(out.is_valid());
  CHECK_THAT(out.purity(), WithinAbs(rho.purity(), 1e-13));
}
