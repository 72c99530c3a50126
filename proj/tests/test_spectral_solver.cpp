#include <doctest.h>

#include <cmath>
#include <random>

#include "qwalk/errors.hpp"
#include "qwalk/spectral_solver.hpp"
#include "reference_values.hpp"

using namespace qwalk;

namespace {
double closed_form_nu_1d(double lambda, double mu) {
  const double s = std::sqrt(1.0 + (mu / (2.0 * lambda)) * (mu / (2.0 * lambda)));
  return 2.0 * lambda * (mu > 0 ? 1.0 + s : 1.0 - s);
}
}  // namespace

TEST_CASE("solve_dispersion on an analytic monotone handle") {
  // q(nu) = 1/(nu - 4) above the band edge at 4
  const DispersionFunction q = [](double nu, bool) { return 1.0 / (nu - 4.0); };
  DispersionSolveOptions so;
  so.rel_tol = 1e-13;
  so.scale = 4.0;
  CHECK(solve_dispersion(q, 4.0, BandSide::Above, 0.5, so) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK_THROWS_AS(solve_dispersion(q, 4.0, BandSide::Above, 0.0, so), NoSolutionError);
  CHECK_THROWS_AS(solve_dispersion(q, 4.0, BandSide::Above, -1.0, so), std::invalid_argument);

  so.edge_value = 0.25;
  CHECK_THROWS_AS(solve_dispersion(q, 4.0, BandSide::Above, 0.5, so), NoSolutionError);
  CHECK(solve_dispersion(q, 4.0, BandSide::Above, 0.25, so) == 4.0);  // root at the edge
}

TEST_CASE("one-particle classification: d = 1 closed forms") {
  for (const double mu : {0.5, -0.5, 2.0, -2.0, 10.0, -10.0}) {
    OneParticleParams p{1.0, mu, 1};
    const auto rep = classify_one_particle(p);
    CHECK(rep.essential_lo == 0.0);
    CHECK(rep.essential_hi == 4.0);
    REQUIRE(rep.point.kind == VerdictKind::Exists);
    CHECK(rep.point.nu == doctest::Approx(closed_form_nu_1d(1.0, mu)).epsilon(1e-11));
    if (mu > 0) CHECK(rep.point.nu > rep.essential_hi);
    if (mu < 0) CHECK(rep.point.nu < rep.essential_lo);
  }
}

TEST_CASE("one-particle classification: mu = 0 and d = 2 tiny mu") {
  OneParticleParams free{1.0, 0.0, 3};
  CHECK(classify_one_particle(free).point.kind == VerdictKind::Absent);

  OneParticleParams weak{1.0, 1e-6, 2};
  const auto rep = classify_one_particle(weak);
  REQUIRE(rep.point.kind == VerdictKind::Exists);
  CHECK(rep.point.nu > 8.0);  // strictly above the band
}

TEST_CASE("one-particle classification: critical branches at d = 3 and d = 5") {
  const double c3 = watson_c(3).value;
  OneParticleParams crit3{1.0, 2.0 / c3, 3};
  const auto rep3 = classify_one_particle(crit3);
  CHECK(rep3.point.kind == VerdictKind::Absent);
  CHECK(rep3.point.near_threshold);

  OneParticleParams sub3{1.0, 1.15 * 2.0 / c3, 3};  // |2l/mu| < c(3)
  const auto repsub = classify_one_particle(sub3);
  REQUIRE(repsub.point.kind == VerdictKind::Exists);
  CHECK(repsub.point.nu > 12.0);

  const double c5 = watson_c(5).value;
  OneParticleParams crit5{1.0, 2.0 / c5, 5};
  const auto rep5 = classify_one_particle(crit5);
  CHECK(rep5.point.kind == VerdictKind::ThresholdUpper);
  CHECK(rep5.point.nu == 20.0);
  OneParticleParams crit5m{1.0, -2.0 / c5, 5};
  const auto rep5m = classify_one_particle(crit5m);
  CHECK(rep5m.point.kind == VerdictKind::ThresholdLower);
  CHECK(rep5m.point.nu == 0.0);
  OneParticleParams sup5{1.0, 0.9 * 2.0 / c5, 5};
  CHECK(classify_one_particle(sup5).point.kind == VerdictKind::Absent);

  CHECK_THROWS_AS(classify_one_particle(OneParticleParams{-1.0, 1.0, 1}), std::invalid_argument);
}

TEST_CASE("fiber classification: degenerate band and closed forms") {
  TwoParticleParams eq{1.0, 1.0, 3.0, 1};
  const auto rep = classify_fiber(QuasiMomentum::pi_vector(1), eq);
  CHECK(rep.essential_lo == doctest::Approx(4.0));
  CHECK(rep.essential_hi == doctest::Approx(4.0));
  REQUIRE(rep.point.kind == VerdictKind::Exists);
  CHECK(rep.point.nu == doctest::Approx(7.0).epsilon(1e-12));  // 2(l1+l2)d + mu

  TwoParticleParams equ2{1.0, 1.0, 2.0, 1};
  CHECK(classify_fiber(QuasiMomentum::pi_vector(1), equ2).point.nu ==
        doctest::Approx(6.0).epsilon(1e-12));

  CHECK(classify_fiber(QuasiMomentum::zero(1), TwoParticleParams{1.0, 1.0, 0.0, 1}).point.kind ==
        VerdictKind::Absent);
}

TEST_CASE("fiber classification: d = 3 supercritical is absent") {
  QuadratureSpec coarse = QuadratureSpec::defaults(3);
  coarse.rel_tol = 1e-5;
  ClassifyOptions opts;
  opts.quad = &coarse;
  const double c3 = watson_c(3).value;
  // |2(l1+l2)/mu| >= c(3,0) = c(3)
  TwoParticleParams p{1.0, 2.0, 0.95 * 6.0 / c3, 3};
  const auto rep = classify_fiber(QuasiMomentum::zero(3), p, opts);
  CHECK(rep.point.kind == VerdictKind::Absent);

  TwoParticleParams pc{1.0, 2.0, 6.0 / c3, 3};
  const auto repc = classify_fiber(QuasiMomentum::zero(3), pc, opts);
  CHECK(repc.point.kind == VerdictKind::Absent);
  CHECK(repc.point.near_threshold);
}

TEST_CASE("fiber equals one-particle at phi = 0") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const int d = 1 + static_cast<int>(U(rng) * 2.0);
    TwoParticleParams p{0.5 + 2.0 * U(rng), 0.5 + 2.0 * U(rng),
                        (U(rng) < 0.5 ? -1.0 : 1.0) * (0.4 + 5.0 * U(rng)), d};
    OneParticleParams q{p.lambda_sum(), p.mu, d};
    const auto a = classify_fiber(QuasiMomentum::zero(d), p);
    const auto b = classify_one_particle(q);
    CHECK(a.point.kind == b.point.kind);
    CHECK(a.essential_hi == doctest::Approx(b.essential_hi).epsilon(1e-14));
    if (a.point.has_eigenvalue())
      CHECK(std::abs(a.point.nu - b.point.nu) <= 1e-9 * std::max(1.0, std::abs(b.point.nu)));
  }
}

TEST_CASE("verdict-root consistency and uniqueness") {
  TwoParticleParams p{1.0, 2.0, 2.5, 2};
  Eigen::VectorXd v(2);
  v << 0.9, -1.7;
  const QuasiMomentum phi(v);
  const auto rep = classify_fiber(phi, p);
  REQUIRE(rep.point.kind == VerdictKind::Exists);
  const double target = 2.0 * p.lambda_sum() / p.mu;
  CHECK(std::abs(q_of_nu(rep.point.nu, phi, p) - target) <= 1e-8 * std::abs(target));
  CHECK(rep.point.nu > rep.essential_hi);

  // monotonicity implies the root does not depend on the solve tolerance path
  ClassifyOptions loose;
  loose.solver_rel_tol = 1e-10;
  const auto rep2 = classify_fiber(phi, p, loose);
  CHECK(std::abs(rep2.point.nu - rep.point.nu) <= 10.0 * 1e-10 * std::max(1.0, std::abs(rep.point.nu)));
}

TEST_CASE("subspace existence strictness") {
  CHECK(subspace_exists(TwoParticleParams{1.0, 1.0, 0.7, 1}) == SubspaceVerdict::ExistsUnique);
  CHECK(subspace_exists(TwoParticleParams{1.0, 1.0, -0.7, 2}) == SubspaceVerdict::ExistsUnique);
  CHECK(subspace_exists(TwoParticleParams{1.0, 1.0, 0.0, 1}) == SubspaceVerdict::None);

  const double c3 = watson_c(3).value;
  CHECK(subspace_exists(TwoParticleParams{1.0, 1.0, 4.0 / c3, 3}) == SubspaceVerdict::None);
  CHECK(subspace_exists(TwoParticleParams{1.0, 1.0, 1.1 * 4.0 / c3, 3}) ==
        SubspaceVerdict::ExistsUnique);

  const double c5 = watson_c(5).value;
  CHECK(subspace_exists(TwoParticleParams{1.0, 1.0, 4.0 / c5, 5}) ==
        SubspaceVerdict::ExistsUnique);
  CHECK(subspace_exists(TwoParticleParams{1.0, 1.0, 0.9 * 4.0 / c5, 5}) == SubspaceVerdict::None);
}

TEST_CASE("dispersion surface endpoints and vacuous cases") {
  TwoParticleParams p{1.0, 1.0, 2.0, 1};
  const auto surf = dispersion_surface({2}, p);
  REQUIRE(surf.grid.size() == 2);
  // grid is {-pi -> pi, 0}
  CHECK(surf.grid[0][0] == M_PI);
  CHECK(surf.grid[1][0] == 0.0);
  CHECK(surf.verdicts[0].nu == doctest::Approx(6.0).epsilon(1e-10));
  CHECK(surf.verdicts[1].nu == doctest::Approx(4.0 * (1.0 + std::sqrt(1.25))).epsilon(1e-8));
  CHECK(surf.max_adjacent_jump > 0.0);

  CHECK(dispersion_surface({0}, p).grid.empty());
  CHECK_THROWS_AS(dispersion_surface({4}, TwoParticleParams{1.0, 1.0, 0.0, 1}),
                  std::invalid_argument);

  // d = 2, unequal hoppings, small mu: exists at every grid point
  TwoParticleParams small{1.0, 1.6, 0.3, 2};
  const auto s2 = dispersion_surface({3, 3}, small);
  for (const auto& vd : s2.verdicts) CHECK(vd.kind == VerdictKind::Exists);
}
