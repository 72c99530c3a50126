#include "qwalk/green_integrals.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qwalk {

namespace {

constexpr int kTorusCrossCheckMaxDim = 6;

QuadratureSpec spec_or_default(const QuadratureSpec* spec, int dims) {
  QuadratureSpec s = spec ? *spec : QuadratureSpec::defaults(dims);
  s.dims = dims;
  return s;
}

double infty() { return std::numeric_limits<double>::infinity(); }

}  // namespace

QuadratureResult weighted_edge_green(const Eigen::VectorXd& active_weights, double gap,
                                     const QuadratureSpec* spec) {
  const int s = static_cast<int>(active_weights.size());
  if (gap < 0.0) throw std::domain_error("weighted_edge_green: gap must be >= 0");
  for (int k = 0; k < s; ++k)
    if (!(active_weights[k] > 0.0))
      throw std::domain_error("weighted_edge_green: weights must be > 0");

  if (s == 0) {
    // Constant integrand 1/gap.
    QuadratureResult r;
    if (gap == 0.0) throw std::domain_error("weighted_edge_green: empty support with zero gap");
    r.value = 1.0 / gap;
    r.abs_error_estimate = 0.0;
    r.status = QuadStatus::Converged;
    r.evaluations = 0;
    return r;
  }

  QuadratureSpec qs = spec_or_default(spec, s);
  RefinementModel model = RefinementModel::automatic();
  if (gap == 0.0) {
    if (s <= 2)
      throw std::domain_error("weighted_edge_green: edge integral divergent for s <= 2");
    model = RefinementModel::edge_singular(s, 1);
  } else if (gap < 1e-3 * active_weights.sum() && qs.rel_tol <= 1e-6) {
    // Sharply peaked but finite: allow deeper refinement, still within the
    // per-pass point budget. Loose-tolerance (probe) specs keep their
    // shallow ladder.
    qs.max_doublings = std::max(qs.max_doublings, s <= 2 ? 14 : 10);
  }
  const double scale = detail::pow_2pi(s);
  QuadratureResult r = integrate_cosine_sum(
      -active_weights, active_weights.sum() + gap, [](double u) { return 1.0 / u; }, qs, model,
      /*detect_divergence=*/false);
  r.value /= scale;
  r.abs_error_estimate /= scale;
  return r;
}

GreenValue watson_c(int d, const QuadratureSpec* spec) {
  if (d < 1) throw std::invalid_argument("watson_c: d must be >= 1");
  GreenValue g;
  if (d <= 2) {
    g.value = infty();
    g.closed_form_divergent = true;
    return g;
  }
  const QuadratureResult bessel =
      integrate_bessel_path(Eigen::VectorXd::Ones(d), static_cast<double>(d));
  if (d <= kTorusCrossCheckMaxDim) {
    g.quad = weighted_edge_green(Eigen::VectorXd::Ones(d), 0.0, spec);
    g.value = g.quad.value;
    const double slack = g.quad.abs_error_estimate + bessel.abs_error_estimate + 1e-12;
    if (std::abs(g.quad.value - bessel.value) > slack) {
      std::ostringstream os;
      os << "watson_c(" << d << "): evaluator cross-check failed: torus " << g.quad.value
         << " vs Laplace " << bessel.value << " (slack " << slack << ")";
      throw std::runtime_error(os.str());
    }
  } else {
    g.quad = bessel;
    g.value = bessel.value;
  }
  return g;
}

GreenValue watson_c1(int d, const QuadratureSpec* spec) {
  if (d < 1) throw std::invalid_argument("watson_c1: d must be >= 1");
  GreenValue g;
  if (d <= 2) {
    g.value = -infty();
    g.closed_form_divergent = true;
    return g;
  }
  if (d <= kTorusCrossCheckMaxDim) {
    // Direct quadrature of 1/(gamma - d), not the negation of watson_c.
    QuadratureSpec qs = spec_or_default(spec, d);
    const RefinementModel model = RefinementModel::edge_singular(d, 1);
    QuadratureResult r = integrate_cosine_sum(
        Eigen::VectorXd::Ones(d), -static_cast<double>(d), [](double u) { return 1.0 / u; }, qs,
        model, /*detect_divergence=*/false);
    const double scale = detail::pow_2pi(d);
    r.value /= scale;
    r.abs_error_estimate /= scale;
    g.quad = r;
    g.value = r.value;
  } else {
    QuadratureResult bessel =
        integrate_bessel_path(Eigen::VectorXd::Ones(d), static_cast<double>(d));
    bessel.value = -bessel.value;
    g.quad = bessel;
    g.value = bessel.value;
  }
  return g;
}

double watson_asym3(int d) {
  if (d < 1) throw std::invalid_argument("watson_asym3: d must be >= 1");
  const double x = static_cast<double>(d);
  return 1.0 / x + 1.0 / (2.0 * x * x) + 3.0 / (4.0 * x * x * x);
}

GreenValue c_d_phi(const QuasiMomentum& phi, const TwoParticleParams& p,
                   const QuadratureSpec* spec) {
  p.validate();
  if (phi.dims() != p.d) throw std::invalid_argument("c_d_phi: phi dimension mismatch");
  const SupportSet I = support_set(phi, p);
  GreenValue g;
  if (p.d <= 2 || I.s <= 2) {
    g.value = infty();
    g.closed_form_divergent = true;
    return g;
  }
  Eigen::VectorXd w(I.s);
  for (int k = 0; k < I.s; ++k) w[k] = r_of(phi[I.indices[static_cast<size_t>(k)]], p);
  g.quad = weighted_edge_green(w, 0.0, spec);
  g.value = g.quad.value;
  return g;
}

namespace {

// Shared evaluation of p and q: outside-band resolvent mean with weights w
// and reduced shift W = nu/(2 Lambda) - d. Positive above the band,
// negative below; endpoints are the +-c edge values.
double signed_green(const Eigen::VectorXd& weights, double reduced_shift, double band_radius,
                    int support, const QuadratureSpec* spec, const char* who) {
  const double W = reduced_shift;
  if (W > -band_radius && W < band_radius) {
    std::ostringstream os;
    os << who << ": nu lies strictly inside the essential band";
    throw std::domain_error(os.str());
  }
  Eigen::VectorXd active(support);
  int j = 0;
  for (int k = 0; k < weights.size(); ++k)
    if (weights[k] > 0.0) active[j++] = weights[k];
  const double gap = std::abs(W) - band_radius;
  if (gap == 0.0 && support <= 2) {
    std::ostringstream os;
    os << who << ": band-edge value is infinite for fewer than 3 active axes";
    throw std::domain_error(os.str());
  }
  const QuadratureResult r = weighted_edge_green(active, std::max(0.0, gap), spec);
  return W > 0.0 ? r.value : -r.value;
}

}  // namespace

double p_of_nu(double nu, const OneParticleParams& p, const QuadratureSpec* spec) {
  p.validate();
  // gamma - d + nu/(2 lambda) = sum_k(cos - 1) + W with W = nu/(2 lambda) - d... the
  // shared form uses sum w (1 - cos) with overall sign carried by W.
  const double W = nu / (2.0 * p.lambda) - p.d;
  return signed_green(Eigen::VectorXd::Ones(p.d), W, static_cast<double>(p.d), p.d, spec,
                      "p_of_nu");
}

double q_of_nu(double nu, const QuasiMomentum& phi, const TwoParticleParams& p,
               const QuadratureSpec* spec) {
  p.validate();
  if (phi.dims() != p.d) throw std::invalid_argument("q_of_nu: phi dimension mismatch");
  const Eigen::VectorXd w = hopping_weights(phi, p);
  const double W = nu / (2.0 * p.lambda_sum()) - p.d;
  const SupportSet I = support_set(phi, p);
  if (I.s == 0) {
    // Constant integrand: q = 1/W.
    if (W == 0.0) throw std::domain_error("q_of_nu: nu at the degenerate band point");
    return 1.0 / W;
  }
  return signed_green(w, W, w.sum(), I.s, spec, "q_of_nu");
}

bool edge_square_integrable(int m) {
  if (m < 0) throw std::invalid_argument("edge_square_integrable: m must be >= 0");
  return m >= 5;
}

QuadratureResult b_probe(const Eigen::VectorXd& weights, double y, const QuadratureSpec* spec) {
  const int m = static_cast<int>(weights.size());
  if (m < 1) throw std::invalid_argument("b_probe: at least one weight required");
  for (int k = 0; k < m; ++k)
    if (!(weights[k] > 0.0)) throw std::invalid_argument("b_probe: weights must be > 0");
  const double D = weights.sum();
  QuadratureSpec qs = spec_or_default(spec, m);

  const auto sq_reciprocal = [](double u) { return 1.0 / (u * u); };
  if (std::abs(y) > D) {
    // Nonsingular; not meaningful as a divergence test. Computed normally.
    return integrate_cosine_sum(weights, -y, sq_reciprocal, qs, RefinementModel::automatic(),
                                /*detect_divergence=*/false);
  }
  RefinementModel model = RefinementModel::automatic();
  if (std::abs(y) == D && edge_square_integrable(m) && m - 4 >= 1)
    model = RefinementModel::edge_singular(m, 2);
  return integrate_cosine_sum(weights, -y, sq_reciprocal, qs, model,
                              /*detect_divergence=*/true);
}

}  // namespace qwalk
