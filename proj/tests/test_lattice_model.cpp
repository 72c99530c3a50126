#include <doctest.h>

#include <cmath>
#include <random>

#include "qwalk/lattice_model.hpp"

using namespace qwalk;

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((OneParticleParams{0.0, 1.0, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((OneParticleParams{-1.0, 1.0, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((OneParticleParams{1.0, 1.0, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TwoParticleParams{1.0, 0.0, 1.0, 1}.validate()), std::invalid_argument);
  CHECK_NOTHROW((TwoParticleParams{1.0, 2.0, -3.0, 2}.validate()));
}

TEST_CASE("quasimomentum canonicalization") {
  CHECK(QuasiMomentum::canonical_angle(M_PI) == M_PI);
  CHECK(QuasiMomentum::canonical_angle(-M_PI) == M_PI);
  CHECK(QuasiMomentum::canonical_angle(0.0) == 0.0);
  CHECK(QuasiMomentum::canonical_angle(2.0 * M_PI) == 0.0);

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const double y = QuasiMomentum::canonical_angle(U(rng));
    CHECK(y > -M_PI);
    CHECK(y <= M_PI);
  }
  CHECK_THROWS_AS(QuasiMomentum::canonical_angle(std::nan("")), std::invalid_argument);
}

TEST_CASE("gamma examples") {
  CHECK(gamma_sum(QuasiMomentum::zero(3)) == 3.0);
  CHECK(gamma_sum(QuasiMomentum::pi_vector(3)) == -3.0);
  Eigen::VectorXd half(2);
  half << M_PI / 2.0, M_PI / 2.0;
  CHECK(std::abs(gamma_sum(QuasiMomentum(half))) < 1e-15);
}

TEST_CASE("r examples and properties") {
  TwoParticleParams eq{1.3, 1.3, 0.0, 1};
  TwoParticleParams uneq{1.0, 2.0, 0.0, 1};
  CHECK(r_of(0.0, eq) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r_of(M_PI, eq) == 0.0);  // exact zero criterion
  CHECK(r_of(M_PI, uneq) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    TwoParticleParams p{0.5 + 2.0 * U(rng), 0.5 + 2.0 * U(rng), 0.0, 1};
    const double a = -M_PI + 2.0 * M_PI * U(rng);
    CHECK(r_of(a, p) == doctest::Approx(r_of(-a, p)).epsilon(1e-14));
    CHECK(r_of(a, p) == doctest::Approx(r_of(a + 2.0 * M_PI, p)).epsilon(1e-12));
    const double lo = std::abs(p.lambda1 - p.lambda2) / p.lambda_sum();
    CHECK(r_of(a, p) >= lo - 1e-14);
    CHECK(r_of(a, p) <= 1.0 + 1e-14);
  }
  // monotone decreasing on [0, pi]
  double prev = r_of(0.0, uneq);
  for (int i = 1; i <= 64; ++i) {
    const double cur = r_of(M_PI * i / 64.0, uneq);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("eta examples and the decomposition identity") {
  TwoParticleParams eq{1.0, 1.0, 0.0, 1};
  TwoParticleParams uneq{1.0, 2.0, 0.0, 1};
  CHECK(eta_of(0.0, eq) == 0.0);
  CHECK(eta_of(M_PI / 2.0, eq) == doctest::Approx(M_PI / 4.0).epsilon(1e-15));
  CHECK(eta_of(M_PI, uneq) == 0.0);
  CHECK_THROWS_AS(eta_of(M_PI, eq), std::domain_error);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    TwoParticleParams p{0.3 + 2.0 * U(rng), 0.3 + 2.0 * U(rng), 0.0, 1};
    const double a = -M_PI + 2.0 * M_PI * U(rng);
    if (r_of(a, p) == 0.0) continue;
    const double eta = eta_of(a, p);
    const double rp = p.lambda_sum() * r_of(a, p);
    const double psi = -M_PI + 2.0 * M_PI * U(rng);
    const double lhs = p.lambda1 * std::cos(psi - a) + p.lambda2 * std::cos(psi);
    CHECK(lhs == doctest::Approx(rp * std::cos(psi - eta)).epsilon(1e-12));
  }
}

TEST_CASE("support set uses the exact zero criterion") {
  TwoParticleParams eq{1.0, 1.0, 0.0, 3};
  Eigen::VectorXd v(3);
  v << M_PI, 0.0, M_PI;
  const auto s1 = support_set(QuasiMomentum(v), eq);
  CHECK(s1.s == 1);
  CHECK(s1.indices == std::vector<int>{1});

  TwoParticleParams uneq{1.0, 2.0, 0.0, 4};
  const auto s2 = support_set(QuasiMomentum::pi_vector(4), uneq);
  CHECK(s2.s == 4);
  CHECK(s2.indices == std::vector<int>{0, 1, 2, 3});

  TwoParticleParams eq2{1.0, 1.0, 0.0, 2};
  const auto s3 = support_set(QuasiMomentum::pi_vector(2), eq2);
  CHECK(s3.s == 0);
  CHECK(s3.indices.empty());
}

TEST_CASE("band edge examples") {
  TwoParticleParams p{1.0, 1.0, 0.0, 2};
  const auto b0 = band_edges(QuasiMomentum::zero(2), p);
  CHECK(b0.beta1 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(b0.beta2 == doctest::Approx(4.0 * p.lambda_sum() * 2).epsilon(1e-14));

  const auto bpi = band_edges(QuasiMomentum::pi_vector(2), p);
  CHECK(bpi.beta1 == doctest::Approx(8.0));
  CHECK(bpi.beta2 == doctest::Approx(8.0));

  TwoParticleParams u{1.0, 2.0, 0.0, 1};
  const auto b1 = band_edges(QuasiMomentum::pi_vector(1), u);
  CHECK(b1.beta1 == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(b1.beta2 == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("band edge invariants over random momenta") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const int d = 1 + static_cast<int>(U(rng) * 4);
    TwoParticleParams p{0.4 + 2.0 * U(rng), 0.4 + 2.0 * U(rng), 0.0, d};
    Eigen::VectorXd v(d);
    for (int k = 0; k < d; ++k) v[k] = -M_PI + 2.0 * M_PI * U(rng);
    const QuasiMomentum phi(v);
    const auto b = band_edges(phi, p);
    CHECK(b.beta1 >= -1e-12);
    CHECK(b.beta1 <= b.beta2 + 1e-12);
    CHECK(b.beta2 <= 4.0 * p.lambda_sum() * d + 1e-12);
    const auto s = support_set(phi, p);
    if (s.s == 0) CHECK(b.beta1 == doctest::Approx(b.beta2));
    if (b.beta1 == b.beta2) CHECK(s.s == 0);
  }
}
