#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qwalk/errors.hpp"

namespace qwalk {

enum class QuadStatus { Converged, Divergent, Inconclusive };

const char* to_string(QuadStatus s);

// Controls the successive-doubling midpoint rule on T^d.
struct QuadratureSpec {
  int dims = 1;
  int initial_points_per_axis = 16;  // power of 2, >= 4
  int max_doublings = 8;             // >= 3
  double rel_tol = 1e-9;             // in (0, 1)
  double divergence_growth_factor = 1.5;  // > 1
  // Largest number of grid points allowed in a single refinement pass.
  // Doubling stops (without error) once the next pass would exceed it.
  std::int64_t max_points_per_pass = INT64_C(8000000000);

  void validate() const;  // throws std::invalid_argument

  // Tolerances matched to the downstream root-finding needs per dimension:
  // 1e-9 for d<=2, 1e-7 for d=3,4, 1e-5 for d>=5.
  static QuadratureSpec defaults(int dims);
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = std::numeric_limits<double>::infinity();
  QuadStatus status = QuadStatus::Inconclusive;
  std::int64_t evaluations = 0;
};

// Asymptotic error model of the midpoint rule under grid doubling:
//   Q(h) = I + sum_j c_j h^{p_j} (log 1/h)^{l_j} + ...
// An empty term list means "unknown": the tracker falls back to
// ratio-estimated (Aitken) acceleration.
struct RefinementModel {
  struct Term {
    double power = 0.0;
    bool log_factor = false;
  };
  std::vector<Term> terms;

  static RefinementModel automatic() { return {}; }

  // Model for an integrand with an isolated band-edge singularity
  // ~ 1/|psi|^(2k) in s active dimensions. Leading error order is
  // h^(s-2k), with a log factor when that exponent is even.
  static RefinementModel edge_singular(int active_dims, int denominator_power = 1);
};

// Consumes the sequence of grid-doubled quadrature values and decides
// Converged / Divergent / Inconclusive, applying model-based extrapolation
// (or Aitken acceleration) on top of the raw agreement test.
class RefinementTracker {
 public:
  // `detect_divergence` = false suppresses the Divergent verdict; callers
  // that have already proven finiteness by the closed-form classifiers use
  // this, since a sharply peaked finite integrand can mimic divergent
  // growth while the grid is still too coarse to resolve the peak.
  RefinementTracker(const QuadratureSpec& spec, RefinementModel model,
                    bool detect_divergence = true);

  // `points_per_axis` of the pass that produced `value`.
  void push(double value, int points_per_axis);

  bool decided() const { return status_ != QuadStatus::Inconclusive; }
  QuadStatus status() const { return status_; }
  double value() const { return value_; }
  double error_estimate() const { return error_estimate_; }
  const std::vector<double>& raw_sequence() const { return raw_; }

  QuadratureResult result(std::int64_t evaluations) const;

 private:
  void update();
  bool check_divergence();
  double extrapolate_model(int drop_coarsest, double* fit_rms) const;

  QuadratureSpec spec_;
  RefinementModel model_;
  bool detect_divergence_ = true;
  std::vector<double> raw_;
  std::vector<int> npts_;
  double value_ = 0.0;
  double error_estimate_ = std::numeric_limits<double>::infinity();
  double prev_extrapolated_ = std::numeric_limits<double>::quiet_NaN();
  QuadStatus status_ = QuadStatus::Inconclusive;
};

namespace detail {

// Runs fn(chunk_index) for chunk_index in [0, n_chunks) on the configured
// number of worker threads. Chunk decomposition is fixed, so any reduction
// done per chunk and combined in chunk order is independent of the thread
// count.
void parallel_chunks(int n_chunks, const std::function<void(int)>& fn);

int grid_chunk_count(std::int64_t outer_size);

// Midpoint abscissae on (-pi, pi]: t_i = -pi + (i + 1/2) * 2pi / n.
std::vector<double> midpoint_angles(int n);

[[noreturn]] void throw_nonfinite(const double* phi, int dims, double value);

// Mean of f over the midpoint grid with n points per axis in `dims`
// dimensions. Deterministic chunked reduction; throws EvaluationError on a
// non-finite sample.
template <class F>
double midpoint_mean(F&& f, int dims, int n) {
  const std::vector<double> t = midpoint_angles(n);
  std::int64_t outer = 1;
  for (int k = 0; k + 1 < dims; ++k) outer *= n;
  const int n_chunks = grid_chunk_count(outer);

  std::vector<double> chunk_sum(n_chunks, 0.0);
  std::vector<std::int64_t> bad_node(n_chunks, -1);

  auto run_chunk = [&](int c) {
    const std::int64_t lo = outer * static_cast<std::int64_t>(c) / n_chunks;
    const std::int64_t hi = outer * static_cast<std::int64_t>(c + 1) / n_chunks;
    double acc = 0.0, comp = 0.0;  // Kahan across rows
    std::vector<double> phi(static_cast<size_t>(dims));
    for (std::int64_t o = lo; o < hi && bad_node[c] < 0; ++o) {
      std::int64_t rem = o;
      for (int k = dims - 2; k >= 0; --k) {
        phi[static_cast<size_t>(k)] = t[static_cast<size_t>(rem % n)];
        rem /= n;
      }
      double row = 0.0;
      for (int i = 0; i < n; ++i) {
        phi[static_cast<size_t>(dims - 1)] = t[static_cast<size_t>(i)];
        const double v = f(phi.data());
        if (!std::isfinite(v)) {
          bad_node[c] = o * n + i;
          break;
        }
        row += v;
      }
      const double y = row - comp;
      const double s = acc + y;
      comp = (s - acc) - y;
      acc = s;
    }
    chunk_sum[c] = acc;
  };
  parallel_chunks(n_chunks, run_chunk);

  for (int c = 0; c < n_chunks; ++c) {
    if (bad_node[c] >= 0) {
      std::int64_t rem = bad_node[c];
      std::vector<double> phi(static_cast<size_t>(dims));
      for (int k = dims - 1; k >= 0; --k) {
        phi[static_cast<size_t>(k)] = t[static_cast<size_t>(rem % n)];
        rem /= n;
      }
      double v = f(phi.data());
      throw_nonfinite(phi.data(), dims, v);
    }
  }

  double total = 0.0, comp = 0.0;
  for (int c = 0; c < n_chunks; ++c) {
    const double y = chunk_sum[c] - comp;
    const double s = total + y;
    comp = (s - total) - y;
    total = s;
  }
  double npoints = 1.0;
  for (int k = 0; k < dims; ++k) npoints *= static_cast<double>(n);
  return total / npoints;
}

// Mean of g(shift + sum_k w_k cos(psi_k)) over the midpoint grid. The
// per-axis cosine tables make the inner loop a single add + transform.
template <class G>
double midpoint_mean_cosine_sum(const Eigen::VectorXd& weights, double shift, G&& g, int n) {
  const int dims = static_cast<int>(weights.size());
  const std::vector<double> t = midpoint_angles(n);
  std::vector<double> ct(t.size());
  for (size_t i = 0; i < t.size(); ++i) ct[i] = std::cos(t[i]);

  std::int64_t outer = 1;
  for (int k = 0; k + 1 < dims; ++k) outer *= n;
  const int n_chunks = grid_chunk_count(outer);

  std::vector<double> chunk_sum(n_chunks, 0.0);
  std::vector<std::int64_t> bad_node(n_chunks, -1);
  const double w_last = weights[dims - 1];

  auto run_chunk = [&](int c) {
    const std::int64_t lo = outer * static_cast<std::int64_t>(c) / n_chunks;
    const std::int64_t hi = outer * static_cast<std::int64_t>(c + 1) / n_chunks;
    double acc = 0.0, comp = 0.0;
    for (std::int64_t o = lo; o < hi && bad_node[c] < 0; ++o) {
      std::int64_t rem = o;
      double base = shift;
      for (int k = dims - 2; k >= 0; --k) {
        base += weights[k] * ct[static_cast<size_t>(rem % n)];
        rem /= n;
      }
      double row = 0.0;
      bool row_ok = true;
      for (int i = 0; i < n; ++i) {
        row += g(base + w_last * ct[static_cast<size_t>(i)]);
      }
      if (!std::isfinite(row)) {
        row_ok = false;
        for (int i = 0; i < n && bad_node[c] < 0; ++i) {
          if (!std::isfinite(g(base + w_last * ct[static_cast<size_t>(i)])))
            bad_node[c] = o * n + i;
        }
        if (bad_node[c] < 0) bad_node[c] = o * n;  // overflow of the row sum itself
      }
      if (!row_ok) break;
      const double y = row - comp;
      const double s = acc + y;
      comp = (s - acc) - y;
      acc = s;
    }
    chunk_sum[c] = acc;
  };
  parallel_chunks(n_chunks, run_chunk);

  for (int c = 0; c < n_chunks; ++c) {
    if (bad_node[c] >= 0) {
      std::int64_t rem = bad_node[c];
      std::vector<double> phi(static_cast<size_t>(dims));
      for (int k = dims - 1; k >= 0; --k) {
        phi[static_cast<size_t>(k)] = t[static_cast<size_t>(rem % n)];
        rem /= n;
      }
      double u = shift;
      for (int k = 0; k < dims; ++k) u += weights[k] * std::cos(phi[static_cast<size_t>(k)]);
      throw_nonfinite(phi.data(), dims, g(u));
    }
  }

  double total = 0.0, comp = 0.0;
  for (int c = 0; c < n_chunks; ++c) {
    const double y = chunk_sum[c] - comp;
    const double s = total + y;
    comp = (s - total) - y;
    total = s;
  }
  double npoints = 1.0;
  for (int k = 0; k < dims; ++k) npoints *= static_cast<double>(n);
  return total / npoints;
}

double pow_2pi(int dims);
std::int64_t pow_i64(std::int64_t base, int exp);

template <class Mean>
QuadratureResult run_refinements(Mean&& mean_at, const QuadratureSpec& spec,
                                 const RefinementModel& model, bool detect_divergence = true) {
  spec.validate();
  RefinementTracker tracker(spec, model, detect_divergence);
  std::int64_t evals = 0;
  int n = spec.initial_points_per_axis;
  const double scale = pow_2pi(spec.dims);
  for (int pass = 0; pass <= spec.max_doublings; ++pass, n *= 2) {
    const std::int64_t cost = pow_i64(n, spec.dims);
    if (cost < 0 || cost > spec.max_points_per_pass) break;
    tracker.push(scale * mean_at(n), n);
    evals += cost;
    if (tracker.decided()) break;
  }
  return tracker.result(evals);
}

}  // namespace detail

// Integral of f over T^dims (unnormalized: f == 1 integrates to (2pi)^d).
// Midpoint grids never sample lattice-commensurate singular points
// (phi = 0 or pi per axis).
template <class F>
QuadratureResult integrate_periodic(F&& f, const QuadratureSpec& spec,
                                    const RefinementModel& model = RefinementModel::automatic(),
                                    bool detect_divergence = true) {
  return detail::run_refinements(
      [&](int n) { return detail::midpoint_mean(f, spec.dims, n); }, spec, model,
      detect_divergence);
}

// Fast path for integrands of the form g(shift + sum_k w_k cos(psi_k)).
// Same contract as integrate_periodic.
template <class G>
QuadratureResult integrate_cosine_sum(const Eigen::VectorXd& weights, double shift, G&& g,
                                      const QuadratureSpec& spec,
                                      const RefinementModel& model = RefinementModel::automatic(),
                                      bool detect_divergence = true) {
  QuadratureSpec s = spec;
  s.dims = static_cast<int>(weights.size());
  return detail::run_refinements(
      [&](int n) { return detail::midpoint_mean_cosine_sum(weights, shift, g, n); }, s, model,
      detect_divergence);
}

// e^{-z} I_0(z) for z >= 0 (power series below z = 20, asymptotic series
// above; relative accuracy ~1e-15).
double scaled_bessel_i0(double z);

// (2pi)^{-d} Int_{T^d} dpsi / (a - sum_k v_k cos psi_k) evaluated through
// the Laplace representation Int_0^inf e^{-at} prod_k I_0(v_k t) dt.
// Requires 0 <= v_k <= 1 and a >= sum v_k; when a == sum v_k the integral
// is finite only for >= 3 nonzero weights (caller's responsibility, checked
// via the m >= 3 count). Used as an independent cross-check oracle.
QuadratureResult integrate_bessel_path(const Eigen::VectorXd& weights, double shift,
                                       double rel_tol = 1e-12);

// Number of worker threads used by the quadrature engine and grid sweeps.
// 0 restores the hardware default. Results are bitwise independent of this
// setting.
void set_thread_count(int n);
int thread_count();

}  // namespace qwalk
