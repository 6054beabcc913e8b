#include <catch_amalgamated.hpp>

#include <random>

#include "squidcav/hamiltonians.hpp"

using namespace squidcav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("drive multipliers meet the requested ratio") {
  for (double delta : {5.0, 10.0, 15.0, 20.0}) {
    for (double ratio : {10.0, 20.0}) {
      const auto p = SystemParams::for_detuning(delta, 1.0, ratio);
      CHECK(2.0 * p.omega() / delta >= ratio * (1 - 1e-12));
      CHECK(2.0 * p.omega_prime() / delta >= ratio * (1 - 1e-12));
      // minimality: one less would miss the ratio
      if (p.k > 1) CHECK(2.0 * 2.0 * (p.k - 1) * p.lambda() / delta < ratio);
    }
  }
  CHECK(regime_k(1.0, 15.0) == 1125);
  CHECK(regime_k_prime(1.0, 15.0) == 282);
}

TEST_CASE("window timings follow from lambda and the multipliers") {
  SystemParams p;
  p.delta = 12.0;
  p.k = 7;
  p.k_prime = 3;
  CHECK_THAT(p.lambda() * p.t1(), WithinRel(kPi / 2, 1e-14));
  CHECK_THAT(p.lambda() * p.t2(), WithinRel(kPi / 4, 1e-14));
  CHECK_THAT(p.omega() * p.t1(), WithinRel(7 * kPi, 1e-14));
  CHECK_THAT(p.omega_prime() * p.t2(), WithinRel(2 * 3 * kPi, 1e-14));
}

TEST_CASE("parameter validation names the failing key") {
  auto key_of = [](SystemParams p) {
    try {
      p.validate();
    } catch (const ValidationError& e) {
      return e.key();
    }
    return std::string();
  };
  SystemParams p;
  CHECK(key_of(p).empty());
  p.nbar = -1;
  CHECK(key_of(p) == "nbar");
  p = {};
  p.k = 0;
  CHECK(key_of(p) == "k");
  p = {};
  p.k_prime = -2;
  CHECK(key_of(p) == "k_prime");
  p = {};
  p.n_max = 1;
  CHECK(key_of(p) == "n_max");
  p = {};
  p.delta = 0;
  CHECK(key_of(p) == "delta");
  p = {};
  p.g = std::nan("");
  CHECK(key_of(p) == "g");
}

TEST_CASE("full Hamiltonian is Hermitian and rotates with the cavity frame") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0.0, 50.0);
  const FullModel m{1.0, 7.0, 3.0, 6, PhaseConvention::consistent};
  const auto layout = HilbertLayout::composite(6);
  const ComplexMatrix n = embed(number_operator(6), Slot::cavity, layout);
  const ComplexMatrix h0 = h_full(m, 0.0);
  for (int i = 0; i < 25; ++i) {
    const double s = t(rng);
    const ComplexMatrix h = h_full(m, s);
    CHECK(is_hermitian(h));
    const ComplexMatrix r = matexp_hermitian(m.delta * n, s);
    CHECK(max_abs(h - r * h0 * r.adjoint()) < 1e-12);
  }
}

TEST_CASE("phase conventions differ by the sign of the cavity phase") {
  FullModel a{1.0, 4.0, 0.0, 4, PhaseConvention::consistent};
  FullModel b = a;
  b.convention = PhaseConvention::printed;
  const double t = 0.3;
  CHECK(max_abs(h_full(a, t) - h_full(b, -t)) < 1e-14);
  CHECK(max_abs(h_full(a, t) - h_full(b, t)) > 1e-3);
}

TEST_CASE("drive term couples only 0 and 2 on each SQUID") {
  const FullModel m{0.0, 5.0, 2.0, 3, PhaseConvention::consistent};
  const auto layout = HilbertLayout::composite(3);
  const ComplexMatrix h = h_full(m, 1.0);
  const Index from = layout.index(0, 1, 2);
  CHECK_THAT(std::abs(h(layout.index(2, 1, 2), from)), WithinAbs(2.0, 1e-15));
  CHECK_THAT(h.col(layout.index(1, 1, 0)).cwiseAbs().sum(), WithinAbs(0.0, 1e-15));
}

TEST_CASE("effective Hamiltonian matches its projector and X1X2 form") {
  SystemParams p;
  p.delta = 9.0;
  const ComplexMatrix id = ComplexMatrix::Identity(3, 3);
  const ComplexMatrix proj = squid_projector(0) + squid_projector(2);
  const ComplexMatrix x = squid_raise() + squid_lower();
  const ComplexMatrix expected = p.lambda() * (0.5 * (kron(proj, id) + kron(id, proj)) + kron(x, x));
  CHECK(max_abs(h_effective(p) - expected) < 1e-15);

  // |1,1> decouples; |1,0> sees lambda / 2
  const auto pair = HilbertLayout::squid_pair();
  const ComplexMatrix he = h_effective(p);
  CHECK(he.col(pair.index(1, 1)).cwiseAbs().sum() == 0.0);
  CHECK_THAT(he(pair.index(1, 0), pair.index(1, 0)).real(), WithinAbs(p.lambda() / 2, 1e-15));
}

TEST_CASE("single-SQUID drive produces Rabi rotations") {
  const double omega = 1.7, t = 0.4, phi = 0.9;
  const ComplexMatrix u = matexp_hermitian(h_drive_single(omega, 2, Transition::zero_one, phi), t);
  const auto pair = HilbertLayout::squid_pair();
  const Index g = pair.index(0, 0), e = pair.index(0, 1);
  CHECK_THAT(std::abs(u(g, g) - std::cos(omega * t)), WithinAbs(0.0, 1e-14));
  CHECK_THAT(std::abs(u(e, g) + kI * std::exp(kI * phi) * std::sin(omega * t)), WithinAbs(0.0, 1e-14));
  CHECK_THROWS_AS(h_drive_single(1.0, 3, Transition::zero_two), ValidationError);

  const ComplexMatrix u2 = matexp_hermitian(h_drive_single(omega, 1, Transition::zero_two), t);
  CHECK_THAT(std::abs(u2(pair.index(2, 0), g) + kI * std::sin(omega * t)), WithinAbs(0.0, 1e-14));
}

TEST_CASE("regime check reports both ratios against thresholds") {
  SystemParams p;
  p.delta = 15.0;
  p.k = 1125;
  const auto r = check_regime(p);
  CHECK_THAT(r.ratio_drive, WithinRel(10.0, 1e-12));
  CHECK_THAT(r.ratio_detuning, WithinRel(30.0, 1e-12));
  CHECK(r.regime_ok);

  p.k = 100;
  CHECK_FALSE(check_regime(p).regime_ok);
  p.k = 1125;
  p.k_prime = 1;
  CHECK_FALSE(check_regime(p).regime_ok);
  CHECK(check_regime(p, {0.01, 10.0}).regime_ok);
}
