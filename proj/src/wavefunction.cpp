#include "qwalk/wavefunction.hpp"

#include <cmath>
#include <sstream>

#include "qwalk/errors.hpp"

namespace qwalk {

LatticeVector::LatticeVector(int dims, int radius) : dims_(dims), radius_(radius) {
  if (dims < 1) throw std::invalid_argument("LatticeVector: dims must be >= 1");
  if (radius < 0) throw std::invalid_argument("LatticeVector: radius must be >= 0");
  std::int64_t n = 1;
  for (int k = 0; k < dims; ++k) n *= side();
  values_ = Eigen::ArrayXd::Zero(n);
}

std::int64_t LatticeVector::offset(const std::vector<int>& x) const {
  if (static_cast<int>(x.size()) != dims_)
    throw std::invalid_argument("LatticeVector: index dimension mismatch");
  std::int64_t flat = 0;
  for (int k = 0; k < dims_; ++k) {
    const int c = x[static_cast<size_t>(k)];
    if (c < -radius_ || c > radius_)
      throw std::out_of_range("LatticeVector: index outside the box");
    flat = flat * side() + (c + radius_);
  }
  return flat;
}

void LatticeVector::refresh_norm() { norm_sq_ = values_.square().sum(); }

namespace {

// Means over the midpoint psi-grid of prod_a cos(x^a psi_a) / (gap + sum_a
// w_a (1 - cos psi_a)) for all x in [0..R]^s, as one pass. Recursive
// contraction, last axis innermost.
class KernelPass {
 public:
  KernelPass(const Eigen::VectorXd& w, double gap, int R, int n)
      : w_(w), gap_(gap), R_(R), n_(n), s_(static_cast<int>(w.size())) {
    const std::vector<double> t = detail::midpoint_angles(n);
    cosx_.assign(static_cast<size_t>(R + 1), std::vector<double>(static_cast<size_t>(n)));
    one_minus_cos_.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      one_minus_cos_[static_cast<size_t>(i)] = 1.0 - std::cos(t[static_cast<size_t>(i)]);
      for (int k = 0; k <= R; ++k)
        cosx_[static_cast<size_t>(k)][static_cast<size_t>(i)] =
            std::cos(k * t[static_cast<size_t>(i)]);
    }
  }

  Eigen::ArrayXd run() {
    Eigen::ArrayXd out = descend(gap_, 0);
    double norm = 1.0;
    for (int k = 0; k < s_; ++k) norm *= static_cast<double>(n_);
    return out / norm;
  }

 private:
  Eigen::ArrayXd descend(double base, int depth) {
    const int tail = s_ - depth;
    std::int64_t out_size = 1;
    for (int k = 0; k < tail; ++k) out_size *= (R_ + 1);
    if (depth == s_ - 1) {
      Eigen::ArrayXd row = Eigen::ArrayXd::Zero(R_ + 1);
      const double w = w_[depth];
      for (int i = 0; i < n_; ++i) {
        const double den = base + w * one_minus_cos_[static_cast<size_t>(i)];
        const double inv = 1.0 / den;
        if (!std::isfinite(inv)) {
          std::ostringstream os;
          os << "kernel pass: non-finite denominator " << den << " on axis " << depth;
          throw EvaluationError(os.str());
        }
        for (int k = 0; k <= R_; ++k)
          row[k] += cosx_[static_cast<size_t>(k)][static_cast<size_t>(i)] * inv;
      }
      return row;
    }
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(out_size);
    const std::int64_t sub_size = out_size / (R_ + 1);
    const double w = w_[depth];
    for (int i = 0; i < n_; ++i) {
      const Eigen::ArrayXd sub = descend(base + w * one_minus_cos_[static_cast<size_t>(i)], depth + 1);
      for (int k = 0; k <= R_; ++k)
        acc.segment(k * sub_size, sub_size) += cosx_[static_cast<size_t>(k)][static_cast<size_t>(i)] * sub;
    }
    return acc;
  }

  const Eigen::VectorXd& w_;
  double gap_;
  int R_, n_, s_;
  std::vector<std::vector<double>> cosx_;
  std::vector<double> one_minus_cos_;
};

struct BatchResult {
  Eigen::ArrayXd values;  // [0..R]^s means
  QuadStatus status = QuadStatus::Converged;
  double max_err = 0.0;
};

// Doubled-grid evaluation of the kernel pass with per-component tracking.
BatchResult kernel_batch(const Eigen::VectorXd& w, double gap, int R, const QuadratureSpec& spec) {
  const int s = static_cast<int>(w.size());
  BatchResult out;
  if (s == 0) {
    out.values = Eigen::ArrayXd::Constant(1, 1.0 / gap);
    return out;
  }
  QuadratureSpec qs = spec;
  qs.dims = s;
  qs.validate();
  RefinementModel model = RefinementModel::automatic();
  if (gap == 0.0) model = RefinementModel::edge_singular(s, 1);

  std::int64_t ncomp = 1;
  for (int k = 0; k < s; ++k) ncomp *= (R + 1);
  std::vector<RefinementTracker> trackers(
      static_cast<size_t>(ncomp), RefinementTracker(qs, model, /*detect_divergence=*/false));

  int n = qs.initial_points_per_axis;
  Eigen::ArrayXd latest;
  for (int pass = 0; pass <= qs.max_doublings; ++pass, n *= 2) {
    const std::int64_t cost = detail::pow_i64(n, s);
    if (cost < 0 || cost > qs.max_points_per_pass) break;
    latest = KernelPass(w, gap, R, n).run();
    bool all_done = true;
    for (std::int64_t c = 0; c < ncomp; ++c) {
      trackers[static_cast<size_t>(c)].push(latest[c], n);
      all_done = all_done && trackers[static_cast<size_t>(c)].decided();
    }
    if (all_done) break;
  }
  out.values = Eigen::ArrayXd::Zero(ncomp);
  for (std::int64_t c = 0; c < ncomp; ++c) {
    const auto& t = trackers[static_cast<size_t>(c)];
    out.values[c] = t.value();
    out.max_err = std::max(out.max_err, t.error_estimate());
    if (t.status() != QuadStatus::Converged) out.status = QuadStatus::Inconclusive;
  }
  return out;
}

// Assembles the full [-R, R]^dims box from the active-axes means: even
// continuation in every coordinate, zero whenever an inactive axis
// component is nonzero, alternating sign on active components above the
// band.
void scatter_box(const BatchResult& batch, const std::vector<int>& active, int dims, int R,
                 double prefactor, bool alternate, LatticeVector& out) {
  const int s = static_cast<int>(active.size());
  std::vector<char> is_active(static_cast<size_t>(dims), 0);
  for (int a : active) is_active[static_cast<size_t>(a)] = 1;
  const std::int64_t total = out.size();
  const std::int64_t side = out.side();
  std::vector<int> x(static_cast<size_t>(dims));
  for (std::int64_t flat = 0; flat < total; ++flat) {
    std::int64_t rem = flat;
    for (int k = dims - 1; k >= 0; --k) {
      x[static_cast<size_t>(k)] = static_cast<int>(rem % side) - R;
      rem /= side;
    }
    bool zero = false;
    std::int64_t aflat = 0;
    int parity = 0;
    for (int k = 0, a = 0; k < dims; ++k) {
      if (!is_active[static_cast<size_t>(k)]) {
        if (x[static_cast<size_t>(k)] != 0) { zero = true; break; }
      } else {
        const int ax = std::abs(x[static_cast<size_t>(k)]);
        aflat = aflat * (R + 1) + ax;
        parity += ax;
        ++a;
      }
    }
    double v = 0.0;
    if (!zero) {
      const double core = s == 0 ? batch.values[0] : batch.values[aflat];
      v = prefactor * core * (alternate && (parity & 1) ? -1.0 : 1.0);
    }
    out.raw()[flat] = v;
  }
  out.refresh_norm();
}

}  // namespace

KernelSample kernel_K(const QuasiMomentum& phi, double nu, const TwoParticleParams& p, int radius,
                      const WavefunctionOptions& opts) {
  p.validate();
  if (phi.dims() != p.d) throw std::invalid_argument("kernel_K: phi dimension mismatch");
  if (radius < 0) throw std::invalid_argument("kernel_K: radius must be >= 0");

  const BandEdges band = band_edges(phi, p);
  if (nu > band.beta1 && nu < band.beta2)
    throw std::domain_error("kernel_K: nu lies strictly inside the essential band");
  const SupportSet I = support_set(phi, p);
  const double W = nu / (2.0 * p.lambda_sum()) - p.d;
  Eigen::VectorXd w(I.s);
  for (int a = 0; a < I.s; ++a) w[a] = r_of(phi[I.indices[static_cast<size_t>(a)]], p);
  double gap = std::max(0.0, std::abs(W) - w.sum());
  if (nu == band.beta1 || nu == band.beta2 || gap == 0.0) {
    if (!edge_square_integrable(I.s))
      throw NotSquareIntegrableError(
          "kernel_K: band-edge kernel with fewer than 5 active axes is not square integrable");
    gap = 0.0;
  }

  const bool above = W > 0.0;
  KernelSample sample{phi, nu, LatticeVector(p.d, radius), QuadStatus::Converged, 0.0};
  const QuadratureSpec spec = opts.quad ? *opts.quad : QuadratureSpec::defaults(std::max(1, I.s));
  const BatchResult batch = kernel_batch(w, gap, radius, spec);
  const double pref = p.mu / (2.0 * p.lambda_sum());
  scatter_box(batch, I.indices, p.d, radius, above ? pref : -pref, /*alternate=*/above,
              sample.values);
  sample.status = batch.status;
  sample.max_abs_error = batch.max_err * std::abs(pref);
  return sample;
}

LatticeVector one_particle_eigenfunction(const OneParticleParams& p, double nu, int radius,
                                         const WavefunctionOptions& opts) {
  p.validate();
  if (radius < 0) throw std::invalid_argument("one_particle_eigenfunction: radius must be >= 0");
  const double hi = 4.0 * p.lambda * p.d;
  if (nu > 0.0 && nu < hi)
    throw std::domain_error("one_particle_eigenfunction: nu lies strictly inside the band");
  if ((nu == 0.0 || nu == hi) && !edge_square_integrable(p.d))
    throw NotSquareIntegrableError(
        "one_particle_eigenfunction: band-edge eigenfunction requires d >= 5");

  // A nu away from any dispersion root means an Absent verdict upstream.
  {
    QuadratureSpec coarse = QuadratureSpec::defaults(p.d);
    coarse.rel_tol = std::min(0.45, coarse.rel_tol * 100.0);
    const double residual = p.mu / (2.0 * p.lambda) * p_of_nu(nu, p, &coarse) - 1.0;
    if (!(std::abs(residual) <= 1e-3))
      throw NoSolutionError(
          "one_particle_eigenfunction: nu does not solve the dispersion equation (no "
          "eigenfunction)");
  }

  const double W = nu / (2.0 * p.lambda) - p.d;
  const bool above = W > 0.0;
  const double gap = std::max(0.0, std::abs(W) - p.d);
  const QuadratureSpec spec = opts.quad ? *opts.quad : QuadratureSpec::defaults(p.d);
  const BatchResult batch = kernel_batch(Eigen::VectorXd::Ones(p.d), gap, radius, spec);
  LatticeVector f(p.d, radius);
  std::vector<int> all(static_cast<size_t>(p.d));
  for (int k = 0; k < p.d; ++k) all[static_cast<size_t>(k)] = k;
  const double pref = p.mu / (2.0 * p.lambda);
  scatter_box(batch, all, p.d, radius, above ? pref : -pref, above, f);
  const std::vector<int> origin(static_cast<size_t>(p.d), 0);
  const double f0 = f.at(origin);
  if (f0 == 0.0)
    throw EvaluationError("one_particle_eigenfunction: vanishing value at the origin");
  f.raw() /= f0;
  f.refresh_norm();
  return f;
}

std::pair<double, LatticeVector> fiber_eigenvector(const QuasiMomentum& phi,
                                                   const TwoParticleParams& p, int radius,
                                                   const WavefunctionOptions& opts) {
  const SpectrumReport rep = classify_fiber(phi, p);
  if (!rep.point.has_eigenvalue())
    throw NoSolutionError("fiber_eigenvector: point spectrum is empty (" + rep.point.regime + ")");
  KernelSample sample = kernel_K(phi, rep.point.nu, p, radius, opts);
  const std::vector<int> origin(static_cast<size_t>(p.d), 0);
  const double k0 = sample.values.at(origin);
  if (k0 == 0.0) throw EvaluationError("fiber_eigenvector: vanishing kernel at the origin");
  sample.values.raw() /= k0;
  sample.values.refresh_norm();
  return {rep.point.nu, std::move(sample.values)};
}

std::int64_t SubspaceGenerator::offset(const std::vector<int>& x1,
                                       const std::vector<int>& x) const {
  if (static_cast<int>(x1.size()) != dims || static_cast<int>(x.size()) != dims)
    throw std::invalid_argument("SubspaceGenerator: index dimension mismatch");
  std::int64_t f1 = 0, f2 = 0;
  for (int k = 0; k < dims; ++k) {
    if (std::abs(x1[static_cast<size_t>(k)]) > radius_x1 ||
        std::abs(x[static_cast<size_t>(k)]) > radius_x)
      throw std::out_of_range("SubspaceGenerator: index outside the box");
    f1 = f1 * (2 * radius_x1 + 1) + (x1[static_cast<size_t>(k)] + radius_x1);
    f2 = f2 * (2 * radius_x + 1) + (x[static_cast<size_t>(k)] + radius_x);
  }
  std::int64_t inner = 1;
  for (int k = 0; k < dims; ++k) inner *= (2 * radius_x + 1);
  return f1 * inner + f2;
}

SubspaceGenerator subspace_generator_g0(const TwoParticleParams& p, int radius_x1, int radius_x,
                                        const WavefunctionOptions& opts) {
  p.validate();
  if (radius_x1 < 0 || radius_x < 0)
    throw std::invalid_argument("subspace_generator_g0: radii must be >= 0");
  if (subspace_exists(p) != SubspaceVerdict::ExistsUnique)
    throw NoSolutionError("subspace_generator_g0: no one-particle subspace for these parameters");
  if (p.d > 2)
    throw ResourceError(
        "subspace_generator_g0: the 2d-dimensional quadrature is supported for d <= 2");

  const int d = p.d;
  const double target = 2.0 * p.lambda_sum() / p.mu;
  const QuadratureSpec inner_spec = opts.quad ? *opts.quad : QuadratureSpec::defaults(d);
  QuadratureSpec outer_spec = inner_spec;
  QuadratureSpec probe_spec = inner_spec;
  probe_spec.rel_tol = std::min(0.45, std::max(1e-4, inner_spec.rel_tol * 100.0));
  probe_spec.max_doublings = std::max(3, inner_spec.max_doublings - 3);
  probe_spec.max_points_per_pass = std::min(probe_spec.max_points_per_pass, INT64_C(4000000));

  std::int64_t n1 = 1, n2 = 1;
  for (int k = 0; k < d; ++k) {
    n1 *= (radius_x1 + 1);
    n2 *= (radius_x + 1);
  }
  const std::int64_t ncomp = n1 * n2;
  std::vector<RefinementTracker> trackers(
      static_cast<size_t>(ncomp),
      RefinementTracker(outer_spec, RefinementModel::automatic(), false));

  DispersionSolveOptions so;
  so.rel_tol = d <= 2 ? 1e-12 : 1e-9;

  int n = outer_spec.initial_points_per_axis;
  for (int pass = 0; pass <= outer_spec.max_doublings; ++pass, n *= 2) {
    const std::int64_t nodes = detail::pow_i64(n, d);
    if (nodes < 0 || nodes > 1 << 22) break;
    const std::vector<double> t = detail::midpoint_angles(n);
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(ncomp);

    std::vector<int> idx(static_cast<size_t>(d), 0);
    for (std::int64_t node = 0; node < nodes; ++node) {
      std::int64_t rem = node;
      Eigen::VectorXd ang(d);
      for (int k = d - 1; k >= 0; --k) {
        ang[k] = t[static_cast<size_t>(rem % n)];
        rem /= n;
      }
      const QuasiMomentum phi(ang);
      const BandEdges band = band_edges(phi, p);
      so.scale = std::max(band.width(), 2.0 * p.lambda_sum());
      so.edge_value = std::numeric_limits<double>::infinity();
      const DispersionFunction q_fn = [&](double nu, bool is_coarse) {
        return q_of_nu(nu, phi, p, is_coarse ? &probe_spec : &inner_spec);
      };
      const double nu = p.mu > 0.0
                            ? solve_dispersion(q_fn, band.beta2, BandSide::Above, target, so)
                            : solve_dispersion(q_fn, band.beta1, BandSide::Below, target, so);
      // One kernel evaluation per node, shared by every (x1, x) component.
      const KernelSample ks = kernel_K(phi, nu, p, radius_x, {&inner_spec});

      // cos(x1 . phi) coefficients over the positive orthant of the x1 box.
      std::vector<double> coeff(static_cast<size_t>(n1), 1.0);
      for (std::int64_t c1 = 0; c1 < n1; ++c1) {
        std::int64_t r1 = c1;
        double v = 1.0;
        for (int k = d - 1; k >= 0; --k) {
          const int xk = static_cast<int>(r1 % (radius_x1 + 1));
          r1 /= (radius_x1 + 1);
          v *= std::cos(xk * ang[k]);
        }
        coeff[static_cast<size_t>(c1)] = v;
      }
      std::vector<int> x(static_cast<size_t>(d), 0);
      for (std::int64_t c2 = 0; c2 < n2; ++c2) {
        std::int64_t r2 = c2;
        for (int k = d - 1; k >= 0; --k) {
          x[static_cast<size_t>(k)] = static_cast<int>(r2 % (radius_x + 1));
          r2 /= (radius_x + 1);
        }
        const double kv = ks.values.at(x);
        for (std::int64_t c1 = 0; c1 < n1; ++c1)
          acc[c1 * n2 + c2] += coeff[static_cast<size_t>(c1)] * kv;
      }
    }
    acc *= std::pow(2.0 * M_PI, 0.5 * d) / static_cast<double>(nodes);
    bool all_done = true;
    for (std::int64_t c = 0; c < ncomp; ++c) {
      trackers[static_cast<size_t>(c)].push(acc[c], n);
      all_done = all_done && trackers[static_cast<size_t>(c)].decided();
    }
    if (all_done) break;
  }

  SubspaceGenerator out;
  out.dims = d;
  out.radius_x1 = radius_x1;
  out.radius_x = radius_x;
  std::int64_t full1 = 1, full2 = 1;
  for (int k = 0; k < d; ++k) {
    full1 *= (2 * radius_x1 + 1);
    full2 *= (2 * radius_x + 1);
  }
  out.values = Eigen::ArrayXd::Zero(full1 * full2);
  out.status = QuadStatus::Converged;
  for (std::int64_t c = 0; c < ncomp; ++c) {
    const auto& t = trackers[static_cast<size_t>(c)];
    out.max_abs_error = std::max(out.max_abs_error, t.error_estimate());
    if (t.status() != QuadStatus::Converged) out.status = QuadStatus::Inconclusive;
  }
  // Mirror the positive-orthant values over the full boxes (even in every
  // coordinate of both arguments).
  std::vector<int> x1(static_cast<size_t>(d)), x(static_cast<size_t>(d));
  for (std::int64_t f1 = 0; f1 < full1; ++f1) {
    std::int64_t r1 = f1;
    std::int64_t c1 = 0;
    for (int k = d - 1; k >= 0; --k) {
      x1[static_cast<size_t>(k)] = static_cast<int>(r1 % (2 * radius_x1 + 1)) - radius_x1;
      r1 /= (2 * radius_x1 + 1);
    }
    for (int k = 0; k < d; ++k) c1 = c1 * (radius_x1 + 1) + std::abs(x1[static_cast<size_t>(k)]);
    for (std::int64_t f2 = 0; f2 < full2; ++f2) {
      std::int64_t r2 = f2;
      std::int64_t c2 = 0;
      for (int k = d - 1; k >= 0; --k) {
        x[static_cast<size_t>(k)] = static_cast<int>(r2 % (2 * radius_x + 1)) - radius_x;
        r2 /= (2 * radius_x + 1);
      }
      for (int k = 0; k < d; ++k) c2 = c2 * (radius_x + 1) + std::abs(x[static_cast<size_t>(k)]);
      out.values[f1 * full2 + f2] = trackers[static_cast<size_t>(c1 * n2 + c2)].value();
    }
  }
  return out;
}

double fit_exponential_decay(const LatticeVector& v, double floor, double* C) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::int64_t m = 0;
  const std::int64_t total = v.size();
  const std::int64_t side = v.side();
  for (std::int64_t flat = 0; flat < total; ++flat) {
    std::int64_t rem = flat;
    int l1 = 0;
    for (int k = 0; k < v.dims(); ++k) {
      l1 += std::abs(static_cast<int>(rem % side) - v.radius());
      rem /= side;
    }
    const double a = std::abs(v.raw()[flat]);
    if (a < floor) continue;
    const double x = static_cast<double>(l1), y = std::log(a);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++m;
  }
  if (m < 2) throw std::domain_error("fit_exponential_decay: not enough usable entries");
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw std::domain_error("fit_exponential_decay: degenerate fit");
  const double slope = (m * sxy - sx * sy) / denom;
  if (C) *C = std::exp((sy - slope * sx) / m);
  return std::exp(slope);
}

}  // namespace qwalk
