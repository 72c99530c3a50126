#include "qwalk/spectral_solver.hpp"

#include <cmath>
#include <sstream>

#include "qwalk/errors.hpp"

namespace qwalk {

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Exists: return "Exists";
    case VerdictKind::ThresholdUpper: return "ThresholdUpper";
    case VerdictKind::ThresholdLower: return "ThresholdLower";
    case VerdictKind::Absent: return "Absent";
  }
  return "Absent";
}

const char* to_string(SubspaceVerdict v) {
  return v == SubspaceVerdict::ExistsUnique ? "ExistsUnique" : "None";
}

double solve_dispersion(const DispersionFunction& q_fn, double bracket_edge, BandSide side,
                        double target, const DispersionSolveOptions& opts) {
  if (target == 0.0)
    throw NoSolutionError("solve_dispersion: q takes all values except zero");
  if ((side == BandSide::Above) != (target > 0.0))
    throw std::invalid_argument("solve_dispersion: target sign inconsistent with band side");
  if (std::abs(target) > opts.edge_value)
    throw NoSolutionError("solve_dispersion: |target| exceeds the band-edge value of q");
  if (std::abs(target) == opts.edge_value) return bracket_edge;

  const double dir = side == BandSide::Above ? 1.0 : -1.0;
  const double step0 = std::max(opts.rel_tol, 1e-12) * std::max(opts.scale, 1e-300);

  // Expansion: |q| decreases monotonically away from the edge, from the
  // edge value (possibly infinite) toward 0, so q - target changes sign at
  // exactly one point.
  double lo = bracket_edge;           // edge side: q beyond target in magnitude
  double hi = 0.0;
  bool bracketed = false;
  double step = step0;
  for (int k = 0; k < opts.max_expansions; ++k, step *= 2.0) {
    const double x = bracket_edge + dir * step;
    const double qx = q_fn(x, /*coarse=*/true);
    if (dir * (qx - target) < 0.0) {
      hi = x;
      bracketed = true;
      break;
    }
    lo = x;
  }
  if (!bracketed)
    throw NoSolutionError("solve_dispersion: bracket expansion exhausted without a sign change");

  // Safeguarded secant/bisection. F = q - target is positive at lo and
  // negative at hi for the Above side, mirrored Below.
  double f_lo = lo == bracket_edge ? std::numeric_limits<double>::infinity() * dir
                                   : q_fn(lo, false) - target;
  double f_hi = q_fn(hi, false) - target;
  if (dir * f_hi >= 0.0) {
    // The accurate evaluation disagrees with the coarse probe at hi; widen.
    for (int k = 0; k < opts.max_expansions && dir * f_hi >= 0.0; ++k) {
      lo = hi;
      f_lo = f_hi;
      hi = bracket_edge + dir * (std::abs(hi - bracket_edge) * 2.0);
      f_hi = q_fn(hi, false) - target;
    }
    if (dir * f_hi >= 0.0)
      throw NoSolutionError("solve_dispersion: failed to bracket at full accuracy");
  }

  double best_x = hi, best_f = std::abs(f_hi);
  double stale_width = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    const double width = std::abs(hi - lo);
    // force a bisection step whenever two rounds of secant failed to halve
    // the bracket
    const bool stalled = it >= 2 && it % 2 == 0 && width > 0.5 * stale_width;
    if (it % 2 == 0) stale_width = width;
    double x;
    if (!stalled && std::isfinite(f_lo) && f_lo != f_hi) {
      x = hi - f_hi * (hi - lo) / (f_hi - f_lo);  // secant
      const double a = std::min(lo, hi), b = std::max(lo, hi);
      if (!(x > a && x < b)) x = 0.5 * (lo + hi);
    } else {
      x = 0.5 * (lo + hi);
    }
    const double fx = q_fn(x, false) - target;
    if (std::abs(fx) < best_f) {
      best_f = std::abs(fx);
      best_x = x;
    }
    if (std::abs(fx) <= opts.rel_tol * std::abs(target)) return x;
    if (dir * fx > 0.0) {
      lo = x;
      f_lo = fx;
    } else {
      hi = x;
      f_hi = fx;
    }
    if (std::abs(hi - lo) <= opts.rel_tol * std::max(1.0, std::abs(x)))
      return 0.5 * (lo + hi);
  }
  return best_x;
}

namespace {

double auto_solver_tol(int d, const ClassifyOptions& opts) {
  if (opts.solver_rel_tol > 0.0) return opts.solver_rel_tol;
  return d <= 2 ? 1e-12 : 1e-9;
}

// Near-critical equality band, relative to the computed constant.
constexpr double kThresholdBand = 1e-9;

QuadratureSpec coarse_variant(const QuadratureSpec& full) {
  QuadratureSpec c = full;
  c.rel_tol = std::min(0.45, std::max(1e-4, full.rel_tol * 100.0));
  c.max_doublings = std::max(3, full.max_doublings - 3);
  c.max_points_per_pass = std::min(c.max_points_per_pass, INT64_C(4000000));
  return c;
}

}  // namespace

SpectrumReport classify_one_particle(const OneParticleParams& p, const ClassifyOptions& opts) {
  p.validate();
  SpectrumReport rep;
  rep.essential_lo = 0.0;
  rep.essential_hi = 4.0 * p.lambda * p.d;
  if (p.mu == 0.0) {
    rep.point.kind = VerdictKind::Absent;
    rep.point.regime = "mu=0: empty point spectrum";
    return rep;
  }

  const double target = 2.0 * p.lambda / p.mu;
  const QuadratureSpec full = opts.quad ? *opts.quad : QuadratureSpec::defaults(p.d);
  const QuadratureSpec coarse = coarse_variant(full);

  const auto solve = [&](double edge_value, const char* regime) {
    DispersionSolveOptions so;
    so.rel_tol = auto_solver_tol(p.d, opts);
    so.scale = rep.essential_hi;
    so.edge_value = edge_value;
    const DispersionFunction q_fn = [&](double nu, bool is_coarse) {
      return p_of_nu(nu, p, is_coarse ? &coarse : &full);
    };
    PointSpectrumVerdict v;
    v.kind = VerdictKind::Exists;
    v.regime = regime;
    v.nu = p.mu > 0.0
               ? solve_dispersion(q_fn, rep.essential_hi, BandSide::Above, target, so)
               : solve_dispersion(q_fn, rep.essential_lo, BandSide::Below, target, so);
    return v;
  };

  if (p.d <= 2) {
    rep.point = solve(std::numeric_limits<double>::infinity(), "d<=2: one eigenvalue for any mu");
    return rep;
  }

  const double c = watson_c(p.d, opts.quad).value;
  const double t = std::abs(target);
  const bool near = std::abs(t - c) <= kThresholdBand * c;

  if (!near && t < c) {
    rep.point = solve(c, p.d <= 4 ? "d=3,4: |2l/mu| < c(d)" : "d>=5: |2l/mu| < c(d)");
  } else if (near) {
    rep.point.near_threshold = true;
    if (p.d <= 4) {
      rep.point.kind = VerdictKind::Absent;
      rep.point.regime = "d=3,4: |2l/mu| >= c(d), empty point spectrum";
    } else if (p.mu > 0.0) {
      rep.point.kind = VerdictKind::ThresholdUpper;
      rep.point.nu = rep.essential_hi;
      rep.point.regime = "d>=5: 2l/mu = c(d), eigenvalue at the upper band edge";
    } else {
      rep.point.kind = VerdictKind::ThresholdLower;
      rep.point.nu = 0.0;
      rep.point.regime = "d>=5: 2l/mu = -c(d), eigenvalue at the lower band edge";
    }
  } else {
    rep.point.kind = VerdictKind::Absent;
    rep.point.regime = p.d <= 4 ? "d=3,4: |2l/mu| >= c(d), empty point spectrum"
                                : "d>=5: |2l/mu| > c(d), empty point spectrum";
  }
  return rep;
}

SpectrumReport classify_fiber(const QuasiMomentum& phi, const TwoParticleParams& p,
                              const ClassifyOptions& opts) {
  p.validate();
  if (phi.dims() != p.d) throw std::invalid_argument("classify_fiber: phi dimension mismatch");
  SpectrumReport rep;
  const BandEdges band = band_edges(phi, p);
  rep.essential_lo = band.beta1;
  rep.essential_hi = band.beta2;
  if (p.mu == 0.0) {
    rep.point.kind = VerdictKind::Absent;
    rep.point.regime = "mu=0: empty point spectrum";
    return rep;
  }

  const double target = 2.0 * p.lambda_sum() / p.mu;
  const QuadratureSpec full = opts.quad ? *opts.quad : QuadratureSpec::defaults(p.d);
  const QuadratureSpec coarse = coarse_variant(full);

  const auto solve = [&](double edge_value, const char* regime) {
    DispersionSolveOptions so;
    so.rel_tol = auto_solver_tol(p.d, opts);
    so.scale = std::max(band.width(), 2.0 * p.lambda_sum());
    so.edge_value = edge_value;
    const DispersionFunction q_fn = [&](double nu, bool is_coarse) {
      return q_of_nu(nu, phi, p, is_coarse ? &coarse : &full);
    };
    PointSpectrumVerdict v;
    v.kind = VerdictKind::Exists;
    v.regime = regime;
    v.nu = p.mu > 0.0 ? solve_dispersion(q_fn, band.beta2, BandSide::Above, target, so)
                      : solve_dispersion(q_fn, band.beta1, BandSide::Below, target, so);
    return v;
  };

  const bool lambdas_equal = p.lambda1 == p.lambda2;
  const int s = support_set(phi, p).s;

  if (p.d <= 2) {
    rep.point = solve(std::numeric_limits<double>::infinity(), "d<=2: one eigenvalue for any mu");
    return rep;
  }
  if (lambdas_equal && s <= 2) {
    rep.point = solve(std::numeric_limits<double>::infinity(),
                      "l1=l2, s(phi)<=2: c(d,phi) infinite, one eigenvalue for any mu");
    return rep;
  }

  const double c = c_d_phi(phi, p, opts.quad).value;  // finite here: s >= 3
  const double t = std::abs(target);
  const bool near = std::abs(t - c) <= kThresholdBand * c;
  const bool threshold_branch = !lambdas_equal || s >= 5;  // d >= 5 only

  if (!near && t < c) {
    rep.point = solve(c, p.d <= 4 ? "d=3,4: |2(l1+l2)/mu| < c(d,phi)"
                                  : "d>=5: |2(l1+l2)/mu| < c(d,phi)");
  } else if (near && p.d >= 5 && threshold_branch) {
    rep.point.near_threshold = true;
    if (p.mu > 0.0) {
      rep.point.kind = VerdictKind::ThresholdUpper;
      rep.point.nu = band.beta2;
      rep.point.regime = "d>=5, l1!=l2 or s>=5: 2(l1+l2)/mu = c(d,phi), nu = beta2";
    } else {
      rep.point.kind = VerdictKind::ThresholdLower;
      rep.point.nu = band.beta1;
      rep.point.regime = "d>=5, l1!=l2 or s>=5: -2(l1+l2)/mu = c(d,phi), nu = beta1";
    }
  } else {
    rep.point.kind = VerdictKind::Absent;
    rep.point.near_threshold = near;
    if (p.d <= 4) {
      rep.point.regime = "d=3,4: |2(l1+l2)/mu| >= c(d,phi), empty point spectrum";
    } else if (!threshold_branch) {
      rep.point.regime = "d>=5, l1=l2, s=3,4: |2(l1+l2)/mu| >= c(d,phi), empty point spectrum";
    } else {
      rep.point.regime = "d>=5: |2(l1+l2)/mu| > c(d,phi), empty point spectrum";
    }
  }
  return rep;
}

SubspaceVerdict subspace_exists(const TwoParticleParams& p) {
  p.validate();
  if (p.mu == 0.0) return SubspaceVerdict::None;
  if (p.d <= 2) return SubspaceVerdict::ExistsUnique;
  const double c = watson_c(p.d).value;
  const double t = std::abs(2.0 * p.lambda_sum() / p.mu);
  const bool near = std::abs(t - c) <= kThresholdBand * c;
  if (p.d <= 4) return (!near && t < c) ? SubspaceVerdict::ExistsUnique : SubspaceVerdict::None;
  return (near || t <= c) ? SubspaceVerdict::ExistsUnique : SubspaceVerdict::None;
}

DispersionSurface dispersion_surface(const std::vector<int>& points_per_axis,
                                     const TwoParticleParams& p, const ClassifyOptions& opts) {
  p.validate();
  if (p.mu == 0.0)
    throw std::invalid_argument("dispersion_surface: mu must be nonzero (empty point spectrum)");
  if (static_cast<int>(points_per_axis.size()) != p.d)
    throw std::invalid_argument("dispersion_surface: need one point count per axis");

  DispersionSurface surf;
  surf.params = p;
  std::int64_t total = 1;
  for (int n : points_per_axis) {
    if (n < 0) throw std::invalid_argument("dispersion_surface: negative point count");
    total *= n;
  }
  if (total == 0) return surf;

  std::vector<int> idx(points_per_axis.size(), 0);
  for (std::int64_t flat = 0; flat < total; ++flat) {
    Eigen::VectorXd ang(p.d);
    std::int64_t rem = flat;
    for (int k = p.d - 1; k >= 0; --k) {
      idx[static_cast<size_t>(k)] = static_cast<int>(rem % points_per_axis[static_cast<size_t>(k)]);
      rem /= points_per_axis[static_cast<size_t>(k)];
    }
    for (int k = 0; k < p.d; ++k)
      ang[k] = -M_PI + 2.0 * M_PI * idx[static_cast<size_t>(k)] / points_per_axis[static_cast<size_t>(k)];
    QuasiMomentum phi(ang);
    surf.grid.push_back(phi);
    surf.verdicts.push_back(classify_fiber(phi, p, opts).point);
  }

  // Continuity modulus: largest nu jump between axis-adjacent grid points
  // where the eigenvalue exists on both sides.
  double jump = 0.0;
  std::vector<std::int64_t> strides(points_per_axis.size(), 1);
  for (int k = p.d - 2; k >= 0; --k)
    strides[static_cast<size_t>(k)] =
        strides[static_cast<size_t>(k + 1)] * points_per_axis[static_cast<size_t>(k + 1)];
  for (std::int64_t flat = 0; flat < total; ++flat) {
    std::int64_t rem = flat;
    for (int k = 0; k < p.d; ++k) {
      const std::int64_t stride = strides[static_cast<size_t>(k)];
      const int nk = points_per_axis[static_cast<size_t>(k)];
      const int i = static_cast<int>((flat / stride) % nk);
      const std::int64_t nb = flat + (i + 1 == nk ? -static_cast<std::int64_t>(i) * stride : stride);
      if (nb == flat) continue;
      const auto& a = surf.verdicts[static_cast<size_t>(flat)];
      const auto& b = surf.verdicts[static_cast<size_t>(nb)];
      if (a.has_eigenvalue() && b.has_eigenvalue())
        jump = std::max(jump, std::abs(a.nu - b.nu));
    }
    (void)rem;
  }
  surf.max_adjacent_jump = jump;
  return surf;
}

}  // namespace qwalk
