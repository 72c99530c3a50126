#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <functional>

#include "qwalk/lattice_model.hpp"

namespace qwalk {

enum class Boundary { Open, Periodic };
enum class Extremal { Largest, Smallest };

// Matrix-free Hermitian lattice operator: dimension plus an apply callback.
class SparseOperator {
 public:
  using Apply = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

  SparseOperator(std::int64_t dim, bool hermitian, Apply apply)
      : dim_(dim), hermitian_(hermitian), apply_(std::move(apply)) {}

  std::int64_t dim() const { return dim_; }
  bool hermitian() const { return hermitian_; }
  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const { apply_(in, out); }
  Eigen::VectorXcd operator*(const Eigen::VectorXcd& v) const {
    Eigen::VectorXcd out(dim_);
    apply_(v, out);
    return out;
  }

 private:
  std::int64_t dim_;
  bool hermitian_;
  Apply apply_;
};

// One-particle walk Hamiltonian truncated to the box [-L, L]^d:
// diagonal 2 lambda d + mu delta_{x,0}, off-diagonal -lambda on nearest
// neighbors, open or periodic closure.
SparseOperator build_one_particle(const OneParticleParams& p, int L, Boundary bc);

// Fiber operator on [-L, L]^d: hoppings -(l1 e^{-i phi_k} + l2) toward
// x - e_k and the conjugate toward x + e_k, diagonal 2 d (l1 + l2) +
// mu delta_{x,0}.
SparseOperator build_fiber(const QuasiMomentum& phi, const TwoParticleParams& p, int L,
                           Boundary bc);

// Fiber operator on the discrete torus Z_n^d (sites 0..n-1 per axis), the
// exact layer of the finite direct-integral decomposition.
SparseOperator build_fiber_torus(const QuasiMomentum& phi, const TwoParticleParams& p,
                                 int sites_per_axis);

// Full two-particle Hamiltonian on (Z_n^d)^2 with on-site interaction on
// the coincidence set. Throws ResourceError past the memory budget.
SparseOperator build_two_particle_torus(const TwoParticleParams& p, int sites_per_axis);

struct EigResult {
  double value = 0.0;
  Eigen::VectorXcd vector;
  double residual = 0.0;  // ||A v - value v|| / ||v||, recomputed post hoc
  int iterations = 0;
};

// Extremal eigenpair by Lanczos iteration with full reorthogonalization.
// Deterministic for a fixed seed. Throws EigenIterationError on
// non-convergence, carrying the best residual reached.
EigResult extremal_eigen(const SparseOperator& op, Extremal which, double tol,
                         int max_iterations = 600, std::uint64_t seed = 0x5eed2024u);

// Full sorted spectrum through a dense solve; guarded to dim <= 4096.
Eigen::VectorXd dense_spectrum(const SparseOperator& op);

}  // namespace qwalk
