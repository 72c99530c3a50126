#include "qwalk/lattice_oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

constexpr std::int64_t kOperatorDimBudget = INT64_C(1) << 22;
constexpr std::int64_t kDenseDimBudget = 4096;

// Mixed-radix box walker: n sites per axis, d axes, row-major.
struct BoxIndex {
  int d;
  int n;
  std::int64_t dim;
  BoxIndex(int d, int n) : d(d), n(n) {
    dim = 1;
    for (int k = 0; k < d; ++k) dim *= n;
  }
};

std::int64_t checked_dim(int d, int n, const char* who) {
  std::int64_t dim = 1;
  for (int k = 0; k < d; ++k) {
    dim *= n;
    if (dim > kOperatorDimBudget) {
      std::ostringstream os;
      os << who << ": operator dimension " << "n^" << d << " exceeds the budget of "
         << kOperatorDimBudget << " sites (n = " << n << ")";
      throw ResourceError(os.str());
    }
  }
  return dim;
}

}  // namespace

SparseOperator build_one_particle(const OneParticleParams& p, int L, Boundary bc) {
  p.validate();
  if (L < 1) throw std::invalid_argument("build_one_particle: L must be >= 1");
  const int n = 2 * L + 1;
  const std::int64_t dim = checked_dim(p.d, n, "build_one_particle");
  const int d = p.d;
  const double lambda = p.lambda, mu = p.mu;
  const std::int64_t origin = [&] {
    std::int64_t f = 0;
    for (int k = 0; k < d; ++k) f = f * n + L;
    return f;
  }();

  auto apply = [d, n, dim, lambda, mu, bc, origin](const Eigen::VectorXcd& in,
                                                   Eigen::VectorXcd& out) {
    out.resize(dim);
    const double diag = 2.0 * lambda * d;
    std::int64_t stride = 1;
    out = diag * in;
    out[origin] += mu * in[origin];
    for (int k = d - 1; k >= 0; --k, stride *= n) {
      for (std::int64_t i = 0; i < dim; ++i) {
        const int c = static_cast<int>((i / stride) % n);
        if (c + 1 < n) {
          out[i] -= lambda * in[i + stride];
          out[i + stride] -= lambda * in[i];
        } else if (bc == Boundary::Periodic && n > 2) {
          const std::int64_t j = i - static_cast<std::int64_t>(n - 1) * stride;
          out[i] -= lambda * in[j];
          out[j] -= lambda * in[i];
        }
      }
    }
  };
  return SparseOperator(dim, true, std::move(apply));
}

namespace {

SparseOperator fiber_operator(const QuasiMomentum& phi, const TwoParticleParams& p, int n,
                              std::int64_t origin, Boundary bc, const char* who) {
  p.validate();
  if (phi.dims() != p.d) throw std::invalid_argument(std::string(who) + ": phi dimension mismatch");
  const std::int64_t dim = checked_dim(p.d, n, who);
  const int d = p.d;
  const double mu = p.mu;
  const double diag = 2.0 * d * p.lambda_sum();
  // hop toward x - e_k carries (l1 e^{-i phi_k} + l2); toward x + e_k the
  // conjugate, so the operator is Hermitian.
  std::vector<std::complex<double>> hop_minus(static_cast<size_t>(d));
  for (int k = 0; k < d; ++k)
    hop_minus[static_cast<size_t>(k)] =
        -(p.lambda1 * std::exp(std::complex<double>(0.0, -phi[k])) + p.lambda2);

  auto apply = [d, n, dim, mu, diag, bc, origin, hop_minus](const Eigen::VectorXcd& in,
                                                            Eigen::VectorXcd& out) {
    out.resize(dim);
    out = diag * in;
    out[origin] += mu * in[origin];
    std::int64_t stride = 1;
    for (int k = d - 1; k >= 0; --k, stride *= n) {
      const std::complex<double> hm = hop_minus[static_cast<size_t>(k)];
      const std::complex<double> hp = std::conj(hm);
      for (std::int64_t i = 0; i < dim; ++i) {
        const int c = static_cast<int>((i / stride) % n);
        // u(x + e_k) contribution to row x at i, and u(x) to row x + e_k:
        if (c + 1 < n) {
          out[i] += hp * in[i + stride];
          out[i + stride] += hm * in[i];
        } else if (bc == Boundary::Periodic && n > 2) {
          const std::int64_t j = i - static_cast<std::int64_t>(n - 1) * stride;
          out[i] += hp * in[j];
          out[j] += hm * in[i];
        }
      }
    }
  };
  return SparseOperator(dim, true, std::move(apply));
}

}  // namespace

SparseOperator build_fiber(const QuasiMomentum& phi, const TwoParticleParams& p, int L,
                           Boundary bc) {
  if (L < 1) throw std::invalid_argument("build_fiber: L must be >= 1");
  const int n = 2 * L + 1;
  std::int64_t origin = 0;
  for (int k = 0; k < p.d; ++k) origin = origin * n + L;
  return fiber_operator(phi, p, n, origin, bc, "build_fiber");
}

SparseOperator build_fiber_torus(const QuasiMomentum& phi, const TwoParticleParams& p,
                                 int sites_per_axis) {
  if (sites_per_axis < 3)
    throw std::invalid_argument("build_fiber_torus: need at least 3 sites per axis");
  return fiber_operator(phi, p, sites_per_axis, /*origin=*/0, Boundary::Periodic,
                        "build_fiber_torus");
}

SparseOperator build_two_particle_torus(const TwoParticleParams& p, int sites_per_axis) {
  p.validate();
  if (sites_per_axis < 3)
    throw std::invalid_argument("build_two_particle_torus: need at least 3 sites per axis");
  const int n = sites_per_axis;
  const int d = p.d;
  const std::int64_t dim = checked_dim(2 * d, n, "build_two_particle_torus");
  const double mu = p.mu;
  const double diag = 2.0 * d * p.lambda_sum();
  const double l1 = p.lambda1, l2 = p.lambda2;

  // Sites indexed (x1, x2), x1 outer. Coincidence set: equal mixed-radix
  // digits of both halves.
  std::int64_t half = 1;
  for (int k = 0; k < d; ++k) half *= n;

  auto apply = [d, n, dim, half, mu, diag, l1, l2](const Eigen::VectorXcd& in,
                                                   Eigen::VectorXcd& out) {
    out.resize(dim);
    out = diag * in;
    for (std::int64_t i = 0; i < dim; ++i) {
      if (i / half == i % half) out[i] += mu * in[i];
    }
    std::int64_t stride = 1;
    for (int k = 2 * d - 1; k >= 0; --k, stride *= n) {
      const double hop = k >= d ? l2 : l1;  // low digits: x2 axes
      for (std::int64_t i = 0; i < dim; ++i) {
        const int c = static_cast<int>((i / stride) % n);
        const std::int64_t j = c + 1 < n ? i + stride : i - static_cast<std::int64_t>(n - 1) * stride;
        if (n == 2 && c + 1 == n) continue;
        out[i] -= hop * in[j];
        out[j] -= hop * in[i];
      }
    }
  };
  return SparseOperator(dim, true, std::move(apply));
}

EigResult extremal_eigen(const SparseOperator& op, Extremal which, double tol, int max_iterations,
                         std::uint64_t seed) {
  if (!op.hermitian())
    throw std::invalid_argument("extremal_eigen: operator must be Hermitian");
  if (!(tol > 0.0)) throw std::invalid_argument("extremal_eigen: tol must be > 0");
  const std::int64_t dim = op.dim();
  const int kmax = static_cast<int>(std::min<std::int64_t>(dim, max_iterations));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXcd v(dim);
  for (std::int64_t i = 0; i < dim; ++i) v[i] = std::complex<double>(normal(rng), normal(rng));
  v /= v.norm();

  std::vector<Eigen::VectorXcd> basis;
  basis.push_back(v);
  std::vector<double> alpha, beta;
  Eigen::VectorXcd w(dim);

  double best_residual = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kmax; ++k) {
    op.apply(basis.back(), w);
    const double a = std::real(basis.back().dot(w));
    alpha.push_back(a);
    w -= a * basis.back();
    if (k > 0) w -= beta.back() * basis[static_cast<size_t>(k - 1)];
    // full reorthogonalization, twice
    for (int sweep = 0; sweep < 2; ++sweep)
      for (const auto& b : basis) w -= b.dot(w) * b;
    const double bnorm = w.norm();

    // Ritz step on the tridiagonal section.
    const int m = k + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[static_cast<size_t>(i)];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const int pick = which == Extremal::Largest ? m - 1 : 0;
    const double theta = es.eigenvalues()(pick);
    const double bound = bnorm * std::abs(es.eigenvectors()(m - 1, pick));
    best_residual = std::min(best_residual, bound);

    if (bound <= 0.5 * tol || bnorm < 1e-14 * std::max(1.0, std::abs(theta)) || m == dim) {
      Eigen::VectorXcd ritz = Eigen::VectorXcd::Zero(dim);
      for (int i = 0; i < m; ++i) ritz += es.eigenvectors()(i, pick) * basis[static_cast<size_t>(i)];
      ritz /= ritz.norm();
      Eigen::VectorXcd r(dim);
      op.apply(ritz, r);
      const double residual = (r - theta * ritz).norm();
      if (residual <= tol || bnorm < 1e-14 * std::max(1.0, std::abs(theta)) || m == dim) {
        EigResult out;
        out.value = theta;
        out.vector = std::move(ritz);
        out.residual = residual;
        out.iterations = m;
        return out;
      }
      best_residual = std::min(best_residual, residual);
    }

    if (bnorm < 1e-300) {
      // Krylov space exhausted without meeting the tolerance.
      break;
    }
    beta.push_back(bnorm);
    basis.push_back(w / bnorm);
  }
  std::ostringstream os;
  os << "extremal_eigen: did not reach residual " << tol << " in " << kmax
     << " iterations (best " << best_residual << ")";
  throw EigenIterationError(os.str(), best_residual);
}

Eigen::VectorXd dense_spectrum(const SparseOperator& op) {
  const std::int64_t dim = op.dim();
  if (dim > kDenseDimBudget) {
    std::ostringstream os;
    os << "dense_spectrum: dimension " << dim << " exceeds the dense budget of "
       << kDenseDimBudget;
    throw ResourceError(os.str());
  }
  Eigen::MatrixXcd A(dim, dim);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim), col(dim);
  for (std::int64_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    A.col(j) = col;
    e[j] = 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense_spectrum: eigensolver failed");
  return es.eigenvalues();
}

}  // namespace qwalk
