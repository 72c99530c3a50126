#include "qwalk/lattice_model.hpp"

#include <cmath>
#include <stdexcept>

namespace qwalk {

void OneParticleParams::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("OneParticleParams: lambda must be > 0");
  if (d < 1) throw std::invalid_argument("OneParticleParams: d must be >= 1");
  if (!std::isfinite(mu)) throw std::invalid_argument("OneParticleParams: mu must be finite");
}

void TwoParticleParams::validate() const {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw std::invalid_argument("TwoParticleParams: lambda1 and lambda2 must be > 0");
  if (d < 1) throw std::invalid_argument("TwoParticleParams: d must be >= 1");
  if (!std::isfinite(mu)) throw std::invalid_argument("TwoParticleParams: mu must be finite");
}

double QuasiMomentum::canonical_angle(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("QuasiMomentum: component must be finite");
  double y = std::remainder(x, 2.0 * M_PI);  // [-pi, pi]
  if (y <= -M_PI) y = M_PI;                  // fold -pi onto +pi: range (-pi, pi]
  return y;
}

QuasiMomentum::QuasiMomentum(Eigen::VectorXd phi) : phi_(std::move(phi)) {
  if (phi_.size() == 0) throw std::invalid_argument("QuasiMomentum: dimension must be >= 1");
  for (int k = 0; k < phi_.size(); ++k) phi_[k] = canonical_angle(phi_[k]);
}

QuasiMomentum QuasiMomentum::zero(int d) { return QuasiMomentum(Eigen::VectorXd::Zero(d)); }

QuasiMomentum QuasiMomentum::pi_vector(int d) {
  return QuasiMomentum(Eigen::VectorXd::Constant(d, M_PI));
}

double gamma_sum(const QuasiMomentum& phi) { return phi.angles().array().cos().sum(); }

double r_of(double alpha, const TwoParticleParams& p) {
  p.validate();
  if (p.lambda1 == p.lambda2 && QuasiMomentum::canonical_angle(alpha) == M_PI) return 0.0;
  const double s =
      p.lambda1 * p.lambda1 + p.lambda2 * p.lambda2 + 2.0 * p.lambda1 * p.lambda2 * std::cos(alpha);
  return std::sqrt(std::max(0.0, s)) / p.lambda_sum();
}

double eta_of(double alpha, const TwoParticleParams& p) {
  p.validate();
  if (r_of(alpha, p) == 0.0)
    throw std::domain_error("eta_of: phase undefined where r(alpha) vanishes");
  return std::atan2(p.lambda1 * std::sin(alpha), p.lambda1 * std::cos(alpha) + p.lambda2);
}

SupportSet support_set(const QuasiMomentum& phi, const TwoParticleParams& p) {
  p.validate();
  SupportSet out;
  const bool equal = p.lambda1 == p.lambda2;
  for (int k = 0; k < phi.dims(); ++k) {
    if (!(equal && phi[k] == M_PI)) out.indices.push_back(k);
  }
  out.s = static_cast<int>(out.indices.size());
  return out;
}

Eigen::VectorXd hopping_weights(const QuasiMomentum& phi, const TwoParticleParams& p) {
  Eigen::VectorXd w(phi.dims());
  for (int k = 0; k < phi.dims(); ++k) w[k] = r_of(phi[k], p);
  return w;
}

BandEdges band_edges(const QuasiMomentum& phi, const TwoParticleParams& p) {
  const double rsum = hopping_weights(phi, p).sum();
  const double scale = 2.0 * p.lambda_sum();
  return {scale * (phi.dims() - rsum), scale * (phi.dims() + rsum)};
}

}  // namespace qwalk
