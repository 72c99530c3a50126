#include "qwalk/torus_quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

namespace qwalk {

const char* to_string(QuadStatus s) {
  switch (s) {
    case QuadStatus::Converged: return "Converged";
    case QuadStatus::Divergent: return "Divergent";
    case QuadStatus::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

void QuadratureSpec::validate() const {
  if (dims < 1) throw std::invalid_argument("QuadratureSpec: dims must be >= 1");
  if (initial_points_per_axis < 4 ||
      (initial_points_per_axis & (initial_points_per_axis - 1)) != 0)
    throw std::invalid_argument(
        "QuadratureSpec: initial_points_per_axis must be a power of 2 and >= 4");
  if (max_doublings < 3) throw std::invalid_argument("QuadratureSpec: max_doublings must be >= 3");
  if (!(rel_tol > 0.0 && rel_tol < 1.0))
    throw std::invalid_argument("QuadratureSpec: rel_tol must be in (0, 1)");
  if (!(divergence_growth_factor > 1.0))
    throw std::invalid_argument("QuadratureSpec: divergence_growth_factor must be > 1");
  if (max_points_per_pass < initial_points_per_axis)
    throw std::invalid_argument("QuadratureSpec: max_points_per_pass too small");
}

QuadratureSpec QuadratureSpec::defaults(int dims) {
  QuadratureSpec s;
  s.dims = dims;
  s.initial_points_per_axis = 16;
  s.max_doublings = 8;
  s.rel_tol = dims <= 2 ? 1e-9 : (dims <= 4 ? 1e-7 : 1e-5);
  s.divergence_growth_factor = 1.5;
  return s;
}

RefinementModel RefinementModel::edge_singular(int active_dims, int denominator_power) {
  const int p = active_dims - 2 * denominator_power;
  if (p <= 0)
    throw std::logic_error("edge_singular: model requested for a divergent configuration");
  RefinementModel m;
  if (p % 2 == 1) {
    m.terms = {{double(p), false}, {double(p + 2), false}, {double(p + 4), false}};
  } else {
    m.terms = {{double(p), true}, {double(p), false}, {double(p + 2), true}};
  }
  return m;
}

RefinementTracker::RefinementTracker(const QuadratureSpec& spec, RefinementModel model,
                                     bool detect_divergence)
    : spec_(spec), model_(std::move(model)), detect_divergence_(detect_divergence) {}

void RefinementTracker::push(double value, int points_per_axis) {
  raw_.push_back(value);
  npts_.push_back(points_per_axis);
  update();
}

bool RefinementTracker::check_divergence() {
  const size_t k = raw_.size();
  if (k < 4) return false;
  const double m0 = std::abs(raw_[k - 4]), m1 = std::abs(raw_[k - 3]);
  const double m2 = std::abs(raw_[k - 2]), m3 = std::abs(raw_[k - 1]);
  if (!(m1 > m0 && m2 > m1 && m3 > m2)) return false;
  const double gf = spec_.divergence_growth_factor;
  const bool ratio_growth = m1 >= gf * m0 && m2 >= gf * m1 && m3 >= gf * m2;
  // Logarithmic divergence grows by a near-constant increment per doubling;
  // any h^p-convergent sequence in this corpus has increments decaying by
  // at least a factor 2.
  const double i1 = m1 - m0, i2 = m2 - m1, i3 = m3 - m2;
  const bool stalled_growth = i2 >= 0.75 * i1 && i3 >= 0.75 * i2;
  return ratio_growth || stalled_growth;
}

double RefinementTracker::extrapolate_model(int drop_newest, double* fit_rms) const {
  const int nterms = static_cast<int>(model_.terms.size());
  const int usable = static_cast<int>(raw_.size()) - drop_newest;
  const int rows = std::min(usable, nterms + 2);
  const int cols = nterms + 1;
  Eigen::MatrixXd A(rows, cols);
  Eigen::VectorXd y(rows);
  for (int i = 0; i < rows; ++i) {
    const int idx = usable - rows + i;
    const double h = 2.0 * M_PI / npts_[static_cast<size_t>(idx)];
    A(i, 0) = 1.0;
    for (int j = 0; j < nterms; ++j) {
      const auto& t = model_.terms[static_cast<size_t>(j)];
      A(i, j + 1) = std::pow(h, t.power) * (t.log_factor ? std::log(1.0 / h) : 1.0);
    }
    y(i) = raw_[static_cast<size_t>(idx)];
  }
  for (int j = 1; j < cols; ++j) {
    const double m = A.col(j).cwiseAbs().maxCoeff();
    if (m > 0) A.col(j) /= m;
  }
  Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
  if (fit_rms) {
    const double r = rows > cols ? (A * coef - y).norm() / std::sqrt(double(rows - cols)) : 0.0;
    *fit_rms = r;
  }
  return coef(0);
}

void RefinementTracker::update() {
  const size_t k = raw_.size();
  value_ = raw_.back();

  if (detect_divergence_ && check_divergence()) {
    status_ = QuadStatus::Divergent;
    error_estimate_ = std::numeric_limits<double>::infinity();
    return;
  }

  double raw_diff = std::numeric_limits<double>::infinity();
  if (k >= 2) {
    raw_diff = std::abs(raw_[k - 1] - raw_[k - 2]);
    error_estimate_ = raw_diff;
    if (raw_diff <= spec_.rel_tol * std::max(1.0, std::abs(value_))) {
      status_ = QuadStatus::Converged;
      return;
    }
  }

  const int nterms = static_cast<int>(model_.terms.size());
  if (nterms > 0 && k >= static_cast<size_t>(nterms) + 1) {
    double rms = 0.0;
    const double e = extrapolate_model(0, &rms);
    double est = std::numeric_limits<double>::infinity();
    if (std::isfinite(prev_extrapolated_)) est = std::abs(e - prev_extrapolated_);
    est = std::max(est, rms);
    prev_extrapolated_ = e;
    if (std::isfinite(e) && est < error_estimate_) {
      value_ = e;
      error_estimate_ = est;
    }
    if (std::isfinite(e) && est <= spec_.rel_tol * std::max(1.0, std::abs(e))) {
      value_ = e;
      error_estimate_ = est;
      status_ = QuadStatus::Converged;
    }
    return;
  }

  if (nterms == 0 && k >= 3) {
    // Ratio-guarded iterated Aitken acceleration, two levels.
    std::vector<double> s = raw_;
    double best = raw_.back();
    double best_prev = k >= 2 ? raw_[k - 2] : best;
    for (int level = 0; level < 2 && s.size() >= 3; ++level) {
      const size_t n = s.size();
      bool ok = true;
      for (size_t i = 0; i + 2 < n && ok; ++i) {
        const double d1 = s[i + 1] - s[i], d2 = s[i + 2] - s[i + 1];
        if (d1 == 0.0 || d2 == 0.0 || (d1 > 0) != (d2 > 0)) ok = false;
        else if (std::abs(d1 / d2) < 1.15) ok = false;
      }
      if (!ok) break;
      std::vector<double> next;
      for (size_t i = 0; i + 2 < n; ++i) {
        const double d1 = s[i + 1] - s[i], d2 = s[i + 2] - s[i + 1];
        next.push_back(s[i + 2] - d2 * d2 / (d1 - d2));
      }
      if (next.size() >= 2) {
        best_prev = next[next.size() - 2];
        best = next.back();
      } else {
        best_prev = best;
        best = next.back();
      }
      s = std::move(next);
    }
    const double est = std::abs(best - best_prev);
    if (est < error_estimate_) {
      value_ = best;
      error_estimate_ = est;
    }
    if (est <= spec_.rel_tol * std::max(1.0, std::abs(best))) {
      value_ = best;
      error_estimate_ = est;
      status_ = QuadStatus::Converged;
    }
  }
}

QuadratureResult RefinementTracker::result(std::int64_t evaluations) const {
  QuadratureResult r;
  r.value = value_;
  r.abs_error_estimate = error_estimate_;
  r.status = status_;
  r.evaluations = evaluations;
  return r;
}

namespace detail {

namespace {
std::atomic<int> g_thread_override{0};
}  // namespace

void parallel_chunks(int n_chunks, const std::function<void(int)>& fn) {
  const int T = std::min(thread_count(), n_chunks);
  if (T <= 1) {
    for (int c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int c = next.fetch_add(1);
        if (c >= n_chunks) break;
        fn(c);
      }
    });
  }
  for (auto& th : pool) th.join();
}

int grid_chunk_count(std::int64_t outer_size) {
  return static_cast<int>(std::min<std::int64_t>(64, std::max<std::int64_t>(1, outer_size)));
}

std::vector<double> midpoint_angles(int n) {
  std::vector<double> t(static_cast<size_t>(n));
  const double h = 2.0 * M_PI / n;
  for (int i = 0; i < n; ++i) t[static_cast<size_t>(i)] = -M_PI + (i + 0.5) * h;
  return t;
}

void throw_nonfinite(const double* phi, int dims, double value) {
  std::ostringstream os;
  os << "integrand sample " << value << " is not finite at node (";
  for (int k = 0; k < dims; ++k) os << (k ? ", " : "") << phi[k];
  os << ")";
  throw EvaluationError(os.str());
}

double pow_2pi(int dims) {
  double v = 1.0;
  for (int k = 0; k < dims; ++k) v *= 2.0 * M_PI;
  return v;
}

std::int64_t pow_i64(std::int64_t base, int exp) {
  std::int64_t v = 1;
  for (int k = 0; k < exp; ++k) {
    if (v > INT64_C(4000000000000000) / base) return -1;
    v *= base;
  }
  return v;
}

}  // namespace detail

void set_thread_count(int n) { detail::g_thread_override = std::max(0, n); }

int thread_count() {
  int t = detail::g_thread_override.load();
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, t);
}

double scaled_bessel_i0(double z) {
  z = std::abs(z);
  if (z <= 20.0) {
    const double q = 0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 120; ++k) {
      term *= q / (double(k) * double(k));
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return sum * std::exp(-z);
  }
  double term = 1.0, sum = 1.0, prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 30; ++k) {
    const double factor = double(2 * k - 1) * double(2 * k - 1) / (8.0 * k * z);
    term *= factor;
    if (std::abs(term) >= prev) break;  // asymptotic series: stop at smallest term
    prev = std::abs(term);
    sum += term;
    if (std::abs(term) < 1e-18 * sum) break;
  }
  return sum / std::sqrt(2.0 * M_PI * z);
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] via Newton iteration.
struct GaussRule {
  std::vector<double> x, w;
  explicit GaussRule(int n) : x(static_cast<size_t>(n)), w(static_cast<size_t>(n)) {
    for (int i = 0; i < n; ++i) {
      double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = xi;
        for (int j = 2; j <= n; ++j) {
          const double p2 = ((2 * j - 1) * xi * p1 - (j - 1) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
        const double dx = p1 / dp;
        xi -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double p0 = 1.0, p1 = xi;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * xi * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      x[static_cast<size_t>(i)] = xi;
      w[static_cast<size_t>(i)] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
  }
};

const GaussRule& gl16() { static const GaussRule r(16); return r; }
const GaussRule& gl32() { static const GaussRule r(32); return r; }
const GaussRule& gl64() { static const GaussRule r(64); return r; }

template <class F>
double gauss_on(const GaussRule& g, F&& f, double a, double b, std::int64_t& evals) {
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(c + r * g.x[i]);
  evals += static_cast<std::int64_t>(g.x.size());
  return s * r;
}

}  // namespace

QuadratureResult integrate_bessel_path(const Eigen::VectorXd& weights, double shift,
                                       double rel_tol) {
  for (int k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0 && weights[k] <= 1.0))
      throw std::domain_error("integrate_bessel_path: weights must lie in [0, 1]");
  }
  const double vsum = weights.sum();
  if (shift < vsum - 1e-12 * std::max(1.0, vsum))
    throw std::domain_error(
        "integrate_bessel_path: shift below the weight sum; integrand changes sign and the "
        "Laplace representation is invalid");
  const double gap = std::max(0.0, shift - vsum);

  std::vector<double> active;
  for (int k = 0; k < weights.size(); ++k)
    if (weights[k] > 0.0) active.push_back(weights[k]);
  const int m = static_cast<int>(active.size());

  QuadratureResult out;
  if (gap == 0.0 && m <= 2) {  // edge case divergent for fewer than 3 active weights
    out.status = QuadStatus::Divergent;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }

  const auto f = [&](double t) {
    double v = std::exp(-gap * t);
    for (double vk : active) v *= scaled_bessel_i0(vk * t);
    return v;
  };

  std::int64_t evals = 0;
  double acc = 0.0, err = 0.0;
  double lo = 0.0, hi = 1.0;
  double tail_bound = std::numeric_limits<double>::infinity();
  for (int panel = 0; panel < 64; ++panel) {
    const double coarse = gauss_on(gl16(), f, lo, hi, evals);
    const double fine = gauss_on(gl32(), f, lo, hi, evals);
    acc += fine;
    err += std::abs(fine - coarse);
    lo = hi;
    hi *= 2.0;

    // Algebraic/exponential bound on int_T^inf: the scaled Bessel product is
    // <= prod (2 pi v_k T)^{-1/2} * (1 + 1/(8 v_min T)) for T past the series
    // crossover.
    const double T = lo;
    double c_alg = 1.0;
    double vmin = 1.0;
    for (double vk : active) {
      c_alg /= std::sqrt(2.0 * M_PI * vk * T);
      vmin = std::min(vmin, vk);
    }
    if (m > 0 && vmin * T > 1.0) c_alg *= 1.0 + 1.0 / (8.0 * vmin * T);
    if (gap > 0.0) {
      tail_bound = c_alg * std::exp(-gap * T) / gap;
    } else {
      tail_bound = m > 2 ? c_alg * T / (0.5 * m - 1.0) : std::numeric_limits<double>::infinity();
    }
    if (tail_bound <= 0.25 * rel_tol * std::max(1.0, std::abs(acc))) break;
  }

  // Remaining tail by the substitution t = T / u^2, smooth and algebraic.
  const double T = lo;
  const auto tail_f = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double t = T / (u * u);
    return f(t) * 2.0 * T / (u * u * u);
  };
  const double tail32 = gauss_on(gl32(), tail_f, 0.0, 1.0, evals);
  const double tail64 = gauss_on(gl64(), tail_f, 0.0, 1.0, evals);
  acc += tail64;
  err += std::abs(tail64 - tail32);

  out.value = acc;
  out.abs_error_estimate = err;
  out.evaluations = evals;
  out.status = err <= rel_tol * std::max(1.0, std::abs(acc)) ? QuadStatus::Converged
                                                             : QuadStatus::Inconclusive;
  return out;
}

}  // namespace qwalk
