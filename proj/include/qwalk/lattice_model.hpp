#pragma once

#include <Eigen/Core>

#include <vector>

namespace qwalk {

// One particle hopping at rate lambda > 0 on Z^d with an on-site potential
// of strength mu at the origin.
struct OneParticleParams {
  double lambda = 1.0;
  double mu = 0.0;
  int d = 1;

  void validate() const;  // throws std::invalid_argument
};

// Two distinguishable particles with hoppings lambda1, lambda2 > 0 and a
// delta interaction of strength mu on the coincidence set.
struct TwoParticleParams {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double mu = 0.0;
  int d = 1;

  double lambda_sum() const { return lambda1 + lambda2; }
  void validate() const;
};

// A point of the d-torus (-pi, pi]^d identifying a fiber of the direct
// integral. Canonicalization reduces each component mod 2pi into the
// half-open range; inputs congruent to pi land exactly on +pi, which keeps
// the algebraic zero test for r() exact.
class QuasiMomentum {
 public:
  explicit QuasiMomentum(Eigen::VectorXd phi);
  static QuasiMomentum zero(int d);
  static QuasiMomentum pi_vector(int d);

  int dims() const { return static_cast<int>(phi_.size()); }
  const Eigen::VectorXd& angles() const { return phi_; }
  double operator[](int k) const { return phi_[k]; }

  static double canonical_angle(double x);

 private:
  Eigen::VectorXd phi_;
};

// gamma(phi) = cos phi_1 + ... + cos phi_d, with range [-d, d].
double gamma_sum(const QuasiMomentum& phi);

// Effective per-axis hopping ratio
//   r(alpha) = sqrt(lambda1^2 + lambda2^2 + 2 lambda1 lambda2 cos alpha) / (lambda1 + lambda2),
// in [|l1-l2|/(l1+l2), 1]; zero iff lambda1 == lambda2 and alpha == pi.
double r_of(double alpha, const TwoParticleParams& p);

// Phase eta with (lambda1 cos a + lambda2) = r' cos eta, lambda1 sin a = r' sin eta,
// r' = (lambda1+lambda2) r(a). Fixed by the two-argument arctangent.
// Throws std::domain_error when r' == 0 (phase undefined; that axis is
// absent from the support set).
double eta_of(double alpha, const TwoParticleParams& p);

// Axes with nonvanishing effective hopping. 0-based indices, ascending.
// r(phi_l) = 0 is tested by the exact criterion lambda1 == lambda2 and
// phi_l == pi, never by a floating threshold.
struct SupportSet {
  int s = 0;
  std::vector<int> indices;
};
SupportSet support_set(const QuasiMomentum& phi, const TwoParticleParams& p);

// Essential-spectrum edges of the fiber operator:
//   beta1 = 2(l1+l2)(d - sum_k r(phi_k)),  beta2 = 2(l1+l2)(d + sum_k r(phi_k)).
struct BandEdges {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double width() const { return beta2 - beta1; }
};
BandEdges band_edges(const QuasiMomentum& phi, const TwoParticleParams& p);

// Per-axis weights r(phi_k) as a vector, for the shared p/q integral code.
Eigen::VectorXd hopping_weights(const QuasiMomentum& phi, const TwoParticleParams& p);

}  // namespace qwalk
