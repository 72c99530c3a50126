#pragma once

#include <utility>

#include "qwalk/green_integrals.hpp"
#include "qwalk/lattice_model.hpp"
#include "qwalk/spectral_solver.hpp"

namespace qwalk {

// Finitely truncated real-valued function on the box [-R, R]^d, stored in
// row-major order (last axis fastest). The paper's kernels are real by the
// odd-integrand cancellation, so the imaginary part is never materialized.
class LatticeVector {
 public:
  LatticeVector(int dims, int radius);

  int dims() const { return dims_; }
  int radius() const { return radius_; }
  std::int64_t size() const { return values_.size(); }
  std::int64_t side() const { return 2 * radius_ + 1; }

  // component index in [-R, R]^d -> flat offset
  std::int64_t offset(const std::vector<int>& x) const;
  double& at(const std::vector<int>& x) { return values_[offset(x)]; }
  double at(const std::vector<int>& x) const { return values_[offset(x)]; }

  Eigen::ArrayXd& raw() { return values_; }
  const Eigen::ArrayXd& raw() const { return values_; }

  double norm_sq() const { return norm_sq_; }
  void refresh_norm();  // recompute the cached sum of squares

 private:
  int dims_;
  int radius_;
  Eigen::ArrayXd values_;
  double norm_sq_ = 0.0;
};

struct KernelSample {
  QuasiMomentum phi;
  double nu = 0.0;
  LatticeVector values;
  QuadStatus status = QuadStatus::Inconclusive;
  double max_abs_error = 0.0;  // worst per-component quadrature estimate
};

struct WavefunctionOptions {
  const QuadratureSpec* quad = nullptr;
};

// Fiber kernel K(phi, x) on the box [-R, R]^d:
//   K(phi,x) = (mu / 2(l1+l2)) (2pi)^{-d} Int prod_k cos(x^k psi_k) dpsi
//              / (sum_k r(phi_k) cos psi_k - d + nu/(2(l1+l2))).
// Requires nu outside the open band, or at a band edge with at least 5
// active axes (otherwise the kernel is not square integrable). When the
// dispersion equation holds at nu, K(phi, 0) = 1.
KernelSample kernel_K(const QuasiMomentum& phi, double nu, const TwoParticleParams& p, int radius,
                      const WavefunctionOptions& = {});

// Position-space bound-state eigenfunction of the one-particle problem,
// normalized to f(0) = 1. nu must solve the dispersion equation (checked to
// coarse accuracy); at a band edge d >= 5 is required.
LatticeVector one_particle_eigenfunction(const OneParticleParams& p, double nu, int radius,
                                         const WavefunctionOptions& = {});

// Classifies the fiber, solves for nu and returns the eigenvector
// F0 = K(phi,.) normalized to F0(phi, 0) = 1.
std::pair<double, LatticeVector> fiber_eigenvector(const QuasiMomentum& phi,
                                                   const TwoParticleParams& p, int radius,
                                                   const WavefunctionOptions& = {});

// One-particle-subspace generator
//   g0(x1, x) = (2pi)^{-3d/2} Int_{T^2d} (mu/2(l1+l2))
//               prod cos(x1^k phi_k) prod cos(x^k psi_k)
//               / (sum r(phi_k) cos psi_k - d + nu(phi)/(2(l1+l2))) dphi dpsi,
// with nu(phi) resolved pointwise on the phi grid and reused across all
// (x1, x) components. Values on [-R1, R1]^d x [-R, R]^d, row-major with the
// x1 box outermost.
struct SubspaceGenerator {
  int dims = 1;
  int radius_x1 = 0;
  int radius_x = 0;
  Eigen::ArrayXd values;
  QuadStatus status = QuadStatus::Inconclusive;
  double max_abs_error = 0.0;

  std::int64_t offset(const std::vector<int>& x1, const std::vector<int>& x) const;
  double at(const std::vector<int>& x1, const std::vector<int>& x) const {
    return values[offset(x1, x)];
  }
};

SubspaceGenerator subspace_generator_g0(const TwoParticleParams& p, int radius_x1, int radius_x,
                                        const WavefunctionOptions& = {});

// Least-squares fit of |v(x)| ~ C t^{|x|_1} over the computed box, ignoring
// entries below `floor`. Returns t (and C through the pointer); t < 1 for
// off-band kernels.
double fit_exponential_decay(const LatticeVector& v, double floor = 1e-14, double* C = nullptr);

}  // namespace qwalk
