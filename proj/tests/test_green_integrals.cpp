#include <doctest.h>

#include <cmath>
#include <random>

#include "qwalk/green_integrals.hpp"
#include "qwalk/torus_quadrature.hpp"
#include "reference_values.hpp"

using namespace qwalk;

TEST_CASE("watson c: divergence and values") {
  CHECK(watson_c(1).infinite());
  CHECK(watson_c(2).infinite());
  CHECK(std::isinf(watson_c(1).value));

  const auto c3 = watson_c(3);
  CHECK(!c3.infinite());
  CHECK(c3.quad.status == QuadStatus::Converged);
  CHECK(c3.value == doctest::Approx(refs::c3).epsilon(1e-9));

  // past the tensor-grid range the Laplace evaluator carries the value
  const auto c10 = watson_c(10);
  CHECK(c10.value == doctest::Approx(refs::c10).epsilon(1e-11));
  CHECK_THROWS_AS(watson_c(0), std::invalid_argument);
}

TEST_CASE("watson c1: direct quadrature, not negation") {
  CHECK(watson_c1(2).infinite());
  CHECK(watson_c1(2).value < 0.0);
  const auto c13 = watson_c1(3);
  const auto c3 = watson_c(3);
  CHECK(c13.value < 0.0);
  CHECK(std::abs(c3.value + c13.value) <=
        c3.quad.abs_error_estimate + c13.quad.abs_error_estimate + 1e-14);
}

TEST_CASE("three-term asymptotic series") {
  CHECK(watson_asym3(10) == doctest::Approx(0.10575).epsilon(1e-15));
  CHECK(std::abs(watson_c(10).value - watson_asym3(10)) < 5e-4);
}

TEST_CASE("c(d,phi) classifier and reduced evaluation") {
  TwoParticleParams eq{1.0, 1.0, 0.0, 3};
  TwoParticleParams uneq{1.0, 2.0, 0.0, 3};

  // phi = 0 reduces to the Watson constant
  const auto at0 = c_d_phi(QuasiMomentum::zero(3), uneq);
  CHECK(at0.value == doctest::Approx(refs::c3).epsilon(1e-9));

  // s <= 2 divergence
  Eigen::VectorXd v(3);
  v << M_PI, M_PI, 0.0;
  CHECK(c_d_phi(QuasiMomentum(v), eq).infinite());
  CHECK(c_d_phi(QuasiMomentum::pi_vector(3), eq).infinite());
  TwoParticleParams d2{1.0, 2.0, 0.0, 2};
  CHECK(c_d_phi(QuasiMomentum::zero(2), d2).infinite());

  // r = 1/3 on every axis: c(3,phi) = 3 c(3), the upper sandwich bound
  const auto cpi = c_d_phi(QuasiMomentum::pi_vector(3), uneq);
  CHECK(!cpi.infinite());
  CHECK(cpi.value == doctest::Approx(3.0 * refs::c3).epsilon(1e-7));
  CHECK(cpi.value >= refs::c3);
}

TEST_CASE("c(d,phi) sandwich bounds at mixed weights") {
  TwoParticleParams p{1.0, 2.0, 0.0, 3};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 4; ++t) {
    Eigen::VectorXd v(3);
    for (int k = 0; k < 3; ++k) v[k] = -M_PI + 2.0 * M_PI * U(rng);
    const QuasiMomentum phi(v);
    const auto c = c_d_phi(phi, p);
    double rmin = 1.0;
    for (int k = 0; k < 3; ++k) rmin = std::min(rmin, r_of(phi[k], p));
    const double slack = c.quad.abs_error_estimate + 1e-7;
    CHECK(c.value >= refs::c3 - slack);
    CHECK(c.value <= refs::c3 / rmin + slack);
  }
}

TEST_CASE("cross-check against an independently weighted Laplace value") {
  // weights (0.4, 0.7, 1.0) at the band edge, mpmath reference
  Eigen::VectorXd w(3);
  w << 0.4, 0.7, 1.0;
  const auto r = weighted_edge_green(w, 0.0);
  CHECK(r.value == doctest::Approx(refs::c_w_447_10).epsilon(1e-7));
}

TEST_CASE("p(nu) closed forms and endpoints") {
  OneParticleParams d1{1.0, 0.0, 1};
  // a = nu/(2 lambda) - 1 = 2: contour value 1/sqrt(3)
  CHECK(p_of_nu(6.0, d1) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-10));

  OneParticleParams d3{1.0, 0.0, 3};
  CHECK(p_of_nu(12.0, d3) == doctest::Approx(refs::c3).epsilon(1e-8));
  CHECK(p_of_nu(0.0, d3) == doctest::Approx(-refs::c3).epsilon(1e-8));
  CHECK(p_of_nu(14.0, d3) == doctest::Approx(refs::p14_d3).epsilon(1e-8));

  CHECK_THROWS_AS(p_of_nu(6.0, d3), std::domain_error);   // inside the band
  CHECK_THROWS_AS(p_of_nu(0.0, d1), std::domain_error);   // endpoint needs d >= 3
  CHECK_THROWS_AS(p_of_nu(4.0, d1), std::domain_error);   // upper endpoint, d = 1
}

TEST_CASE("q(nu,phi) special values") {
  TwoParticleParams eq{1.0, 1.0, 2.0, 1};
  // s = 0: constant integrand, q = 1/(nu/(2L) - d)
  CHECK(q_of_nu(6.0, QuasiMomentum::pi_vector(1), eq) == doctest::Approx(2.0).epsilon(1e-14));

  // band-edge endpoint equals c(d,phi)
  TwoParticleParams uneq{1.0, 2.0, 0.0, 3};
  const QuasiMomentum pi3 = QuasiMomentum::pi_vector(3);
  const auto band = band_edges(pi3, uneq);
  const auto c = c_d_phi(pi3, uneq);
  const double qtop = q_of_nu(band.beta2, pi3, uneq);
  const double qbot = q_of_nu(band.beta1, pi3, uneq);
  CHECK(std::abs(qtop - c.value) <= 2.0 * (c.quad.abs_error_estimate + 1e-7));
  CHECK(std::abs(qbot + c.value) <= 2.0 * (c.quad.abs_error_estimate + 1e-7));

  // phi = 0 reduction to p with lambda = l1 + l2
  OneParticleParams one{3.0, 0.0, 2};
  TwoParticleParams two{1.0, 2.0, 0.0, 2};
  const double nu = 30.0;
  CHECK(q_of_nu(nu, QuasiMomentum::zero(2), two) == doctest::Approx(p_of_nu(nu, one)).epsilon(1e-13));

  CHECK_THROWS_AS(q_of_nu(6.0, QuasiMomentum::zero(1), eq), std::domain_error);
}

TEST_CASE("q is strictly decreasing and decays at infinity") {
  TwoParticleParams p{1.0, 2.0, 0.0, 2};
  Eigen::VectorXd v(2);
  v << 0.7, -2.1;
  const QuasiMomentum phi(v);
  const auto band = band_edges(phi, p);
  const double L = p.lambda_sum();

  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    const double nu = band.beta2 + 0.05 * L * std::pow(1.45, i);
    const double q = q_of_nu(nu, phi, p);
    CHECK(q > 0.0);
    CHECK(q < prev);
    prev = q;
  }
  prev = -std::numeric_limits<double>::infinity();
  for (int i = 19; i >= 0; --i) {
    const double nu = band.beta1 - 0.05 * L * std::pow(1.45, i);
    const double q = q_of_nu(nu, phi, p);
    CHECK(q < 0.0);
    CHECK(q > prev);
    prev = q;
  }
  // decay along nu = beta2 + 10^k L
  double mag = 1.0;
  for (int k = 1; k <= 4; ++k) {
    const double q = q_of_nu(band.beta2 + std::pow(10.0, k) * L, phi, p);
    CHECK(std::abs(q) < mag);
    mag = std::abs(q);
  }
}

TEST_CASE("q is invariant under the eta phase shift") {
  // computing with the raw cos(psi - eta) integrand must match the shifted
  // canonical form used internally
  TwoParticleParams p{1.0, 2.0, 0.0, 2};
  Eigen::VectorXd v(2);
  v << 1.1, -0.4;
  const QuasiMomentum phi(v);
  const auto band = band_edges(phi, p);
  const double nu = band.beta2 + 1.7;
  const double W = nu / (2.0 * p.lambda_sum()) - p.d;
  const double e0 = eta_of(phi[0], p), e1 = eta_of(phi[1], p);
  const double r0 = r_of(phi[0], p), r1 = r_of(phi[1], p);
  const auto f = [&](const double* psi) {
    return 1.0 / (r0 * std::cos(psi[0] - e0) + r1 * std::cos(psi[1] - e1) + W);
  };
  const auto shifted = integrate_periodic(f, QuadratureSpec::defaults(2));
  CHECK(shifted.status == QuadStatus::Converged);
  CHECK(shifted.value / std::pow(2.0 * M_PI, 2) ==
        doctest::Approx(q_of_nu(nu, phi, p)).epsilon(1e-9));
}

TEST_CASE("edge square integrability threshold") {
  CHECK(!edge_square_integrable(0));
  CHECK(!edge_square_integrable(4));
  CHECK(edge_square_integrable(5));
  CHECK(edge_square_integrable(9));
  CHECK_THROWS_AS(edge_square_integrable(-1), std::invalid_argument);
}

TEST_CASE("b probe verdicts match the closed-form classification") {
  const Eigen::VectorXd v3 = Eigen::VectorXd::Ones(3);
  QuadratureSpec s3 = QuadratureSpec::defaults(3);
  CHECK(b_probe(v3, 3.0, &s3).status == QuadStatus::Divergent);
  CHECK(b_probe(v3, 0.0, &s3).status == QuadStatus::Divergent);
  CHECK(b_probe(v3, -3.0, &s3).status == QuadStatus::Divergent);  // b(-D) same class as b(D)

  QuadratureSpec s4 = QuadratureSpec::defaults(4);
  s4.initial_points_per_axis = 8;
  CHECK(b_probe(Eigen::VectorXd::Ones(4), 4.0, &s4).status == QuadStatus::Divergent);

  QuadratureSpec s5 = QuadratureSpec::defaults(5);
  s5.initial_points_per_axis = 4;
  s5.rel_tol = 2e-3;
  s5.max_points_per_pass = INT64_C(2000000000);
  const auto b5 = b_probe(Eigen::VectorXd::Ones(5), 5.0, &s5);
  CHECK(b5.status == QuadStatus::Converged);
  CHECK(b5.value / std::pow(2.0 * M_PI, 5) ==
        doctest::Approx(refs::b5_edge_norm).epsilon(5e-3));

  // |y| > D: nonsingular, computed normally
  const auto off = b_probe(v3, 4.5, &s3);
  CHECK(off.status == QuadStatus::Converged);
  CHECK(off.value > 0.0);

  Eigen::VectorXd bad(2);
  bad << 1.0, 0.0;
  CHECK_THROWS_AS(b_probe(bad, 0.5, nullptr), std::invalid_argument);
}
