#include "qwalk_cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include "qwalk/errors.hpp"
#include "qwalk/green_integrals.hpp"
#include "qwalk/lattice_model.hpp"
#include "qwalk/lattice_oracle.hpp"
#include "qwalk/spectral_solver.hpp"
#include "qwalk/torus_quadrature.hpp"
#include "qwalk/wavefunction.hpp"

namespace qwalk::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct CommonOpts {
  std::string format = "json";
  std::string out_path;
  double tol = 0.0;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", c.out_path, "write output to PATH instead of stdout");
  cmd->add_option("--tol", c.tol, "quadrature relative tolerance override");
  cmd->add_option("--threads", c.threads, "worker threads (0 = auto)");
}

// Values are emitted so that infinities stay unambiguous for downstream
// parsers: strings in JSON, INF/-INF in CSV, never floating sentinels.
ordered_json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "INF" : "-INF";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_phi(const std::string& str, int d) {
  std::vector<double> out;
  std::stringstream ss(str);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    const double units = std::stod(item, &pos);
    if (pos != item.size()) throw std::invalid_argument("phi: malformed component '" + item + "'");
    out.push_back(units * M_PI);  // angles are given in units of pi
  }
  if (out.empty()) throw std::invalid_argument("phi: no components");
  if (static_cast<int>(out.size()) == 1 && d > 1) out.assign(static_cast<size_t>(d), out[0]);
  if (static_cast<int>(out.size()) != d)
    throw std::invalid_argument("phi: expected " + std::to_string(d) + " components");
  return out;
}

std::pair<int, int> parse_d_range(const std::string& str) {
  const auto dots = str.find("..");
  if (dots == std::string::npos) {
    const int d = std::stoi(str);
    return {d, d};
  }
  return {std::stoi(str.substr(0, dots)), std::stoi(str.substr(dots + 2))};
}

class OutputSink {
 public:
  OutputSink(const CommonOpts& c, std::ostream& fallback) {
    if (!c.out_path.empty()) {
      file_.open(c.out_path);
      if (!file_) throw std::runtime_error("cannot open output file: " + c.out_path);
      os_ = &file_;
    } else {
      os_ = &fallback;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_ = nullptr;
};

void apply_threads(const CommonOpts& c) { set_thread_count(c.threads); }

QuadratureSpec spec_for(int dims, const CommonOpts& c) {
  QuadratureSpec s = QuadratureSpec::defaults(dims);
  if (c.tol > 0.0) s.rel_tol = c.tol;
  return s;
}

int fail_with(std::ostream& err, const std::string& type, const std::string& message) {
  ordered_json e;
  e["error"]["type"] = type;
  e["error"]["message"] = message;
  err << e.dump(2) << "\n";
  return 2;
}

// ---------------------------------------------------------------- watson

int cmd_watson(const std::string& d_range, const CommonOpts& c, std::ostream& out,
               std::ostream& err) {
  apply_threads(c);
  auto [dlo, dhi] = parse_d_range(d_range);
  if (dlo < 1 || dhi < dlo) return fail_with(err, "validation", "watson: invalid d range");
  OutputSink sink(c, out);
  std::vector<ordered_json> rows;
  for (int d = dlo; d <= dhi; ++d) {
    const QuadratureSpec spec = spec_for(d, c);
    const GreenValue cv = watson_c(d, &spec);
    const GreenValue c1v = watson_c1(d, &spec);
    ordered_json row;
    row["d"] = d;
    row["c"] = json_number(cv.value);
    row["c1"] = json_number(c1v.value);
    row["asym3"] = watson_asym3(d);
    row["status"] = cv.closed_form_divergent ? "divergent" : to_string(cv.quad.status);
    rows.push_back(std::move(row));
  }
  if (c.format == "json") {
    ordered_json doc;
    doc["rows"] = rows;
    sink.stream() << doc.dump(2) << "\n";
  } else {
    sink.stream() << "d,c,c1,asym3,status\n";
    for (const auto& row : rows) {
      const auto num = [&](const ordered_json& v) {
        return v.is_string() ? (v.get<std::string>() == "inf" ? std::string("INF")
                                                              : std::string("-INF"))
                             : csv_number(v.get<double>());
      };
      sink.stream() << row["d"].get<int>() << "," << num(row["c"]) << "," << num(row["c1"]) << ","
                    << csv_number(row["asym3"].get<double>()) << ","
                    << row["status"].get<std::string>() << "\n";
    }
  }
  return 0;
}

// --------------------------------------------------------------- spectrum

ordered_json verdict_json(const PointSpectrumVerdict& v) {
  ordered_json p;
  p["kind"] = to_string(v.kind);
  if (v.has_eigenvalue()) p["nu"] = v.nu;
  p["regime"] = v.regime;
  if (v.near_threshold) p["near_threshold"] = true;
  return p;
}

int cmd_spectrum(double lambda, double lambda1, double lambda2, double mu, int d,
                 const std::string& phi_str, const CommonOpts& c, std::ostream& out,
                 std::ostream& err) {
  apply_threads(c);
  OutputSink sink(c, out);
  const QuadratureSpec spec = spec_for(d, c);
  ClassifyOptions opts;
  opts.quad = &spec;
  SpectrumReport rep;
  try {
    if (!phi_str.empty()) {
      if (lambda1 <= 0.0 || lambda2 <= 0.0)
        return fail_with(err, "validation",
                         "spectrum: the fiber problem needs --lambda1 and --lambda2 > 0");
      TwoParticleParams p{lambda1, lambda2, mu, d};
      const auto phi_vals = parse_phi(phi_str, d);
      QuasiMomentum phi(Eigen::Map<const Eigen::VectorXd>(phi_vals.data(),
                                                          static_cast<int>(phi_vals.size())));
      rep = classify_fiber(phi, p, opts);
    } else if (lambda > 0.0) {
      OneParticleParams p{lambda, mu, d};
      rep = classify_one_particle(p, opts);
    } else {
      return fail_with(err, "validation",
                       "spectrum: provide --lambda (one-particle) or --lambda1/--lambda2 with "
                       "--phi (fiber)");
    }
  } catch (const std::invalid_argument& e) {
    return fail_with(err, "validation", e.what());
  }
  if (c.format == "json") {
    ordered_json doc;
    doc["essential"] = {rep.essential_lo, rep.essential_hi};
    doc["point"] = verdict_json(rep.point);
    sink.stream() << doc.dump(2) << "\n";
  } else {
    sink.stream() << "essential_lo,essential_hi,kind,nu,regime\n";
    sink.stream() << csv_number(rep.essential_lo) << "," << csv_number(rep.essential_hi) << ","
                  << to_string(rep.point.kind) << ","
                  << (rep.point.has_eigenvalue() ? csv_number(rep.point.nu) : "") << ",\""
                  << rep.point.regime << "\"\n";
  }
  return 0;
}

// ---------------------------------------------------------------- surface

int cmd_surface(double lambda1, double lambda2, double mu, int d, const std::string& grid_str,
                const CommonOpts& c, std::ostream& out, std::ostream& err) {
  apply_threads(c);
  OutputSink sink(c, out);
  TwoParticleParams p{lambda1, lambda2, mu, d};
  std::vector<int> grid;
  {
    std::stringstream ss(grid_str);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stoi(item));
    if (grid.size() == 1 && d > 1) grid.assign(static_cast<size_t>(d), grid[0]);
  }
  const QuadratureSpec spec = spec_for(d, c);
  ClassifyOptions opts;
  opts.quad = &spec;
  DispersionSurface surf;
  try {
    surf = dispersion_surface(grid, p, opts);
  } catch (const std::invalid_argument& e) {
    return fail_with(err, "validation", e.what());
  }
  if (surf.grid.empty()) return 0;  // vacuous grid: empty output
  sink.stream() << "# max_adjacent_jump " << csv_number(surf.max_adjacent_jump) << "\n";
  for (int k = 0; k < d; ++k) sink.stream() << "phi" << (k + 1) << ",";
  sink.stream() << "kind,nu\n";
  for (size_t i = 0; i < surf.grid.size(); ++i) {
    for (int k = 0; k < d; ++k) sink.stream() << csv_number(surf.grid[i][k]) << ",";
    const auto& v = surf.verdicts[i];
    sink.stream() << to_string(v.kind) << "," << (v.has_eigenvalue() ? csv_number(v.nu) : "")
                  << "\n";
  }
  return 0;
}

// ------------------------------------------------------------ wavefunction

int cmd_wavefunction(double lambda, double lambda1, double lambda2, double mu, int d,
                     const std::string& phi_str, int radius, const CommonOpts& c,
                     std::ostream& out, std::ostream& err) {
  apply_threads(c);
  if (radius < 1) return fail_with(err, "validation", "wavefunction: radius must be >= 1");
  OutputSink sink(c, out);
  const QuadratureSpec spec = spec_for(d, c);
  try {
    LatticeVector values(1, 0);
    double nu = 0.0;
    double k0_check = 1.0;
    if (!phi_str.empty()) {
      TwoParticleParams p{lambda1, lambda2, mu, d};
      const auto phi_vals = parse_phi(phi_str, d);
      QuasiMomentum phi(Eigen::Map<const Eigen::VectorXd>(phi_vals.data(),
                                                          static_cast<int>(phi_vals.size())));
      const SpectrumReport rep = classify_fiber(phi, p);
      if (!rep.point.has_eigenvalue())
        return fail_with(err, "no-eigenfunction",
                         "wavefunction: point spectrum is empty (" + rep.point.regime + ")");
      nu = rep.point.nu;
      const KernelSample ks = kernel_K(phi, nu, p, radius, {&spec});
      k0_check = ks.values.at(std::vector<int>(static_cast<size_t>(d), 0));
      values = ks.values;
    } else {
      OneParticleParams p{lambda, mu, d};
      const SpectrumReport rep = classify_one_particle(p);
      if (!rep.point.has_eigenvalue())
        return fail_with(err, "no-eigenfunction",
                         "wavefunction: point spectrum is empty (" + rep.point.regime + ")");
      nu = rep.point.nu;
      values = one_particle_eigenfunction(p, nu, radius, {&spec});
    }
    sink.stream() << "# nu " << csv_number(nu) << "\n";
    sink.stream() << "# K0_check " << csv_number(k0_check) << "\n";
    double decay_c = 0.0;
    try {
      const double t = fit_exponential_decay(values, 1e-14, &decay_c);
      sink.stream() << "# decay_fit_t " << csv_number(t) << "\n";
    } catch (const std::domain_error&) {
      sink.stream() << "# decay_fit_t n/a\n";
    }
    for (int k = 0; k < d; ++k) sink.stream() << "x" << (k + 1) << ",";
    sink.stream() << "value\n";
    const std::int64_t side = values.side();
    std::vector<int> x(static_cast<size_t>(d));
    for (std::int64_t flat = 0; flat < values.size(); ++flat) {
      std::int64_t rem = flat;
      for (int k = d - 1; k >= 0; --k) {
        x[static_cast<size_t>(k)] = static_cast<int>(rem % side) - values.radius();
        rem /= side;
      }
      for (int k = 0; k < d; ++k) sink.stream() << x[static_cast<size_t>(k)] << ",";
      sink.stream() << csv_number(values.raw()[flat]) << "\n";
    }
    return 0;
  } catch (const NotSquareIntegrableError& e) {
    return fail_with(err, "not-square-integrable", e.what());
  } catch (const NoSolutionError& e) {
    return fail_with(err, "no-eigenfunction", e.what());
  } catch (const std::invalid_argument& e) {
    return fail_with(err, "validation", e.what());
  } catch (const std::domain_error& e) {
    return fail_with(err, "domain", e.what());
  }
}

// ---------------------------------------------------------------------- g0

int cmd_g0(double lambda1, double lambda2, double mu, int d, int radius1, int radius,
           const CommonOpts& c, std::ostream& out, std::ostream& err) {
  apply_threads(c);
  if (radius1 < 0 || radius < 1) return fail_with(err, "validation", "g0: invalid radii");
  OutputSink sink(c, out);
  TwoParticleParams p{lambda1, lambda2, mu, d};
  try {
    const QuadratureSpec spec = spec_for(d, c);
    const SubspaceGenerator g = subspace_generator_g0(p, radius1, radius, {&spec});
    double norm_sq = g.values.square().sum();
    sink.stream() << "# l2_norm_sq " << csv_number(norm_sq) << "\n";
    sink.stream() << "# status " << to_string(g.status) << "\n";
    for (int k = 0; k < d; ++k) sink.stream() << "x1_" << (k + 1) << ",";
    for (int k = 0; k < d; ++k) sink.stream() << "x" << (k + 1) << ",";
    sink.stream() << "value\n";
    const int side1 = 2 * radius1 + 1, side2 = 2 * radius + 1;
    std::int64_t full2 = 1;
    for (int k = 0; k < d; ++k) full2 *= side2;
    std::vector<int> x1(static_cast<size_t>(d)), x(static_cast<size_t>(d));
    for (std::int64_t flat = 0; flat < g.values.size(); ++flat) {
      std::int64_t f1 = flat / full2, f2 = flat % full2;
      for (int k = d - 1; k >= 0; --k) {
        x1[static_cast<size_t>(k)] = static_cast<int>(f1 % side1) - radius1;
        f1 /= side1;
        x[static_cast<size_t>(k)] = static_cast<int>(f2 % side2) - radius;
        f2 /= side2;
      }
      for (int k = 0; k < d; ++k) sink.stream() << x1[static_cast<size_t>(k)] << ",";
      for (int k = 0; k < d; ++k) sink.stream() << x[static_cast<size_t>(k)] << ",";
      sink.stream() << csv_number(g.values[flat]) << "\n";
    }
    return 0;
  } catch (const NoSolutionError& e) {
    return fail_with(err, "no-subspace", e.what());
  } catch (const ResourceError& e) {
    return fail_with(err, "resource", e.what());
  } catch (const std::invalid_argument& e) {
    return fail_with(err, "validation", e.what());
  }
}

// -------------------------------------------------------------------- verify

struct CheckList {
  ordered_json checks = ordered_json::array();
  int failed = 0;

  void add(const std::string& name, double tolerance, double observed, bool pass) {
    ordered_json c;
    c["name"] = name;
    c["tolerance"] = json_number(tolerance);
    c["observed"] = json_number(observed);
    c["pass"] = pass;
    checks.push_back(std::move(c));
    if (!pass) ++failed;
  }
  void add_close(const std::string& name, double observed_abs_err, double tolerance) {
    add(name, tolerance, observed_abs_err, observed_abs_err <= tolerance);
  }
  void add_flag(const std::string& name, bool pass) { add(name, 0.0, pass ? 0.0 : 1.0, pass); }
};

void verify_quadrature(CheckList& cl) {
  {
    QuadratureSpec s = QuadratureSpec::defaults(2);
    const auto r = integrate_periodic([](const double*) { return 1.0; }, s);
    cl.add_close("const_integrand_2d", std::abs(r.value - 4.0 * M_PI * M_PI), 1e-10);
  }
  {
    QuadratureSpec s = QuadratureSpec::defaults(1);
    const auto r = integrate_periodic([](const double* phi) { return std::cos(phi[0]); }, s);
    cl.add_close("odd_harmonic_1d", std::abs(r.value), 1e-12);
  }
  {
    QuadratureSpec s = QuadratureSpec::defaults(1);
    const auto r =
        integrate_periodic([](const double* phi) { return 1.0 / (2.0 + std::cos(phi[0])); }, s);
    cl.add_close("contour_1d", std::abs(r.value / (2.0 * M_PI) - 1.0 / std::sqrt(3.0)), 1e-10);
  }
  {
    const GreenValue c3 = watson_c(3);
    const auto b3 = integrate_bessel_path(Eigen::VectorXd::Ones(3), 3.0);
    cl.add_close("watson_c3_cross_agreement", std::abs(c3.value - b3.value), 2e-7);
    cl.add_close("watson_c3_value", std::abs(c3.value - 0.5054620), 1e-6);
    const GreenValue c13 = watson_c1(3);
    cl.add_close("symmetry_c_c1_d3", std::abs(c3.value + c13.value), 2e-7);
  }
  cl.add_close("asymptotic_c10", std::abs(watson_c(10).value - watson_asym3(10)), 5e-4);
}

void verify_oracle(CheckList& cl) {
  {
    OneParticleParams p{1.0, 2.0, 1};
    const auto op = build_one_particle(p, 2000, Boundary::Open);
    const auto e = extremal_eigen(op, Extremal::Largest, 1e-10);
    cl.add_close("closed_form_vs_lanczos_d1", std::abs(e.value - 2.0 * (1.0 + std::sqrt(2.0))),
                 1e-8);
  }
  {
    TwoParticleParams p{1.0, 2.0, 1.5, 2};
    OneParticleParams q{3.0, 1.5, 2};
    const auto a = build_fiber(QuasiMomentum::zero(2), p, 6, Boundary::Open);
    const auto b = build_one_particle(q, 6, Boundary::Open);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(a.dim());
    for (std::int64_t i = 0; i < a.dim(); ++i) v[i] = std::complex<double>(nd(rng), nd(rng));
    cl.add_close("fiber_zero_equals_one_particle", ((a * v) - (b * v)).norm() / v.norm(), 1e-12);
  }
  {
    TwoParticleParams p{1.0, 1.0, 2.0, 1};
    const auto op = build_fiber(QuasiMomentum::pi_vector(1), p, 3, Boundary::Open);
    const auto evs = dense_spectrum(op);
    double worst = 0.0;
    for (int i = 0; i < evs.size(); ++i) {
      const double want = i + 1 == evs.size() ? 6.0 : 4.0;
      worst = std::max(worst, std::abs(evs[i] - want));
    }
    cl.add_close("s0_diagonal_spectrum", worst, 1e-12);
  }
  {
    const int N = 12;
    TwoParticleParams p{1.0, 2.0, -1.5, 1};
    const auto full = dense_spectrum(build_two_particle_torus(p, N));
    std::vector<double> fibers;
    for (int j = 0; j < N; ++j) {
      const QuasiMomentum phi(Eigen::VectorXd::Constant(1, 2.0 * M_PI * j / N));
      const auto evs = dense_spectrum(build_fiber_torus(phi, p, N));
      for (int i = 0; i < evs.size(); ++i) fibers.push_back(evs[i]);
    }
    std::sort(fibers.begin(), fibers.end());
    double worst = 0.0;
    for (int i = 0; i < full.size(); ++i) worst = std::max(worst, std::abs(full[i] - fibers[static_cast<size_t>(i)]));
    cl.add_close("direct_integral_d1_N12", worst, 1e-10);
  }
}

void verify_theorem_branches(CheckList& cl) {
  {
    // phi = 0 reduction sweep over mixed dimensions.
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    QuadratureSpec coarse3 = QuadratureSpec::defaults(3);
    coarse3.rel_tol = 1e-5;
    int bad = 0;
    double worst_nu = 0.0;
    for (int t = 0; t < 16; ++t) {
      const int d = t % 8 < 4 ? 1 : (t % 8 < 6 ? 2 : 3);
      TwoParticleParams p{0.5 + 2.0 * U(rng), 0.5 + 2.0 * U(rng),
                          (U(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + 6.0 * U(rng)), d};
      OneParticleParams q{p.lambda_sum(), p.mu, d};
      ClassifyOptions opts;
      if (d == 3) opts.quad = &coarse3;
      const auto a = classify_fiber(QuasiMomentum::zero(d), p, opts);
      const auto b = classify_one_particle(q, opts);
      if (a.point.kind != b.point.kind) ++bad;
      else if (a.point.has_eigenvalue())
        worst_nu = std::max(worst_nu, std::abs(a.point.nu - b.point.nu));
    }
    cl.add_flag("reduction_sweep_kinds", bad == 0);
    cl.add_close("reduction_sweep_nu", worst_nu, 1e-9);
  }
  {
    const double c3 = watson_c(3).value;
    const double mu_star = 4.0 / c3;  // 2(l1+l2)/c with l1=l2=1
    const QuasiMomentum zero3 = QuasiMomentum::zero(3);
    QuadratureSpec coarse3 = QuadratureSpec::defaults(3);
    coarse3.rel_tol = 1e-5;
    ClassifyOptions opts;
    opts.quad = &coarse3;
    TwoParticleParams sub{1.0, 1.0, 1.1 * mu_star, 3};
    TwoParticleParams sup{1.0, 1.0, 0.9 * mu_star, 3};
    TwoParticleParams crit{1.0, 1.0, mu_star, 3};
    cl.add_flag("gate_d3_exists_at_1.1mu",
                classify_fiber(zero3, sub, opts).point.kind == VerdictKind::Exists);
    cl.add_flag("gate_d3_absent_at_0.9mu",
                classify_fiber(zero3, sup, opts).point.kind == VerdictKind::Absent);
    cl.add_flag("gate_d3_absent_at_mu_star",
                classify_fiber(zero3, crit, opts).point.kind == VerdictKind::Absent);
  }
  {
    const double c3 = watson_c(3).value;
    TwoParticleParams eq3{1.0, 1.0, 4.0 / c3, 3};
    cl.add_flag("subspace_d3_equality_none", subspace_exists(eq3) == SubspaceVerdict::None);
    const double c5 = watson_c(5).value;
    TwoParticleParams eq5{1.0, 1.0, 4.0 / c5, 5};
    cl.add_flag("subspace_d5_equality_exists",
                subspace_exists(eq5) == SubspaceVerdict::ExistsUnique);
  }
}

void verify_appendix(CheckList& cl) {
  QuadratureSpec s3 = QuadratureSpec::defaults(3);
  QuadratureSpec s4 = QuadratureSpec::defaults(4);
  s4.initial_points_per_axis = 8;
  QuadratureSpec s5 = QuadratureSpec::defaults(5);
  s5.initial_points_per_axis = 4;
  s5.rel_tol = 2e-3;
  s5.max_points_per_pass = INT64_C(2000000000);
  const Eigen::VectorXd v3 = Eigen::VectorXd::Ones(3);
  const Eigen::VectorXd v4 = Eigen::VectorXd::Ones(4);
  const Eigen::VectorXd v5 = Eigen::VectorXd::Ones(5);
  cl.add_flag("b_probe_m3_edge_divergent",
              b_probe(v3, 3.0, &s3).status == QuadStatus::Divergent);
  cl.add_flag("b_probe_m3_interior_divergent",
              b_probe(v3, 0.0, &s3).status == QuadStatus::Divergent);
  cl.add_flag("b_probe_m4_edge_divergent",
              b_probe(v4, 4.0, &s4).status == QuadStatus::Divergent);
  cl.add_flag("b_probe_m5_edge_converged",
              b_probe(v5, 5.0, &s5).status == QuadStatus::Converged);
  cl.add_flag("b_probe_minus_edge_same_class",
              b_probe(v3, -3.0, &s3).status == QuadStatus::Divergent &&
                  b_probe(v5, -5.0, &s5).status == QuadStatus::Converged);
  cl.add_flag("edge_square_integrable_table",
              !edge_square_integrable(4) && edge_square_integrable(5) &&
                  !edge_square_integrable(0));
}

int cmd_verify(const std::string& suite, const CommonOpts& c, std::ostream& out,
               std::ostream& err) {
  apply_threads(c);
  OutputSink sink(c, out);
  CheckList cl;
  if (suite == "quadrature") verify_quadrature(cl);
  else if (suite == "oracle") verify_oracle(cl);
  else if (suite == "theorem-branches") verify_theorem_branches(cl);
  else if (suite == "appendix") verify_appendix(cl);
  else return fail_with(err, "validation", "verify: unknown suite '" + suite + "'");
  ordered_json doc;
  doc["suite"] = suite;
  doc["checks"] = cl.checks;
  doc["failed"] = cl.failed;
  sink.stream() << doc.dump(2) << "\n";
  return cl.failed == 0 ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lattice quantum-walk spectra: Watson integrals, bound states, fibers"};
  app.require_subcommand(1);
  if (const char* cfg = std::getenv("QWALK_CONFIG"); cfg != nullptr && *cfg != '\0')
    app.set_config("--config", cfg, "key=value configuration file");
  else
    app.set_config("--config", "", "key=value configuration file");

  CommonOpts c_watson_o, c_spectrum_o, c_surface_o, c_wf_o, c_g0_o, c_verify_o;

  auto* w = app.add_subcommand("watson", "Watson integrals c(d), c1(d) and the large-d series");
  std::string d_range = "3";
  w->add_option("--d", d_range, "dimension or range like 1..4");
  add_common(w, c_watson_o);

  auto* sp = app.add_subcommand("spectrum", "essential band and point-spectrum verdict");
  double lambda = 0.0, lambda1 = 0.0, lambda2 = 0.0, mu = 0.0;
  int d = 1;
  std::string phi_str;
  sp->add_option("--lambda", lambda, "one-particle hopping");
  sp->add_option("--lambda1", lambda1, "first hopping");
  sp->add_option("--lambda2", lambda2, "second hopping");
  sp->add_option("--mu", mu, "interaction strength")->required();
  sp->add_option("--d", d, "dimension")->required();
  sp->add_option("--phi", phi_str, "fiber quasimomentum, comma-separated, units of pi");
  add_common(sp, c_spectrum_o);

  auto* su = app.add_subcommand("surface", "bound-state dispersion nu(phi) over a grid");
  double s_l1 = 1.0, s_l2 = 1.0, s_mu = 0.0;
  int s_d = 1;
  std::string grid = "16";
  su->add_option("--lambda1", s_l1, "first hopping")->required();
  su->add_option("--lambda2", s_l2, "second hopping")->required();
  su->add_option("--mu", s_mu, "interaction strength")->required();
  su->add_option("--d", s_d, "dimension")->required();
  su->add_option("--grid", grid, "points per axis (single value or comma list)");
  add_common(su, c_surface_o);

  auto* wf = app.add_subcommand("wavefunction", "bound-state kernel / eigenfunction values");
  double w_l = 0.0, w_l1 = 1.0, w_l2 = 1.0, w_mu = 0.0;
  int w_d = 1, w_radius = 10;
  std::string w_phi;
  wf->add_option("--lambda", w_l, "one-particle hopping");
  wf->add_option("--lambda1", w_l1, "first hopping");
  wf->add_option("--lambda2", w_l2, "second hopping");
  wf->add_option("--mu", w_mu, "interaction strength")->required();
  wf->add_option("--d", w_d, "dimension")->required();
  wf->add_option("--phi", w_phi, "fiber quasimomentum (units of pi); omit for one-particle");
  wf->add_option("--radius", w_radius, "box radius");
  add_common(wf, c_wf_o);

  auto* g0 = app.add_subcommand("g0", "one-particle-subspace generator g0(x1, x)");
  double g_l1 = 1.0, g_l2 = 1.0, g_mu = 0.0;
  int g_d = 1, g_r1 = 5, g_r = 5;
  g0->add_option("--lambda1", g_l1, "first hopping")->required();
  g0->add_option("--lambda2", g_l2, "second hopping")->required();
  g0->add_option("--mu", g_mu, "interaction strength")->required();
  g0->add_option("--d", g_d, "dimension")->required();
  g0->add_option("--radius1", g_r1, "box radius in x1");
  g0->add_option("--radius", g_r, "box radius in x");
  add_common(g0, c_g0_o);

  auto* ve = app.add_subcommand("verify", "run a named verification suite");
  std::string suite;
  ve->add_option("suite", suite, "quadrature | oracle | theorem-branches | appendix")->required();
  add_common(ve, c_verify_o);

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  std::string prog = "qwalk";
  argv.push_back(prog.data());
  for (auto& a : storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail_with(err, "usage", e.what());
  }

  try {
    if (w->parsed()) return cmd_watson(d_range, c_watson_o, out, err);
    if (sp->parsed())
      return cmd_spectrum(lambda, lambda1, lambda2, mu, d, phi_str, c_spectrum_o, out, err);
    if (su->parsed()) return cmd_surface(s_l1, s_l2, s_mu, s_d, grid, c_surface_o, out, err);
    if (wf->parsed())
      return cmd_wavefunction(w_l, w_l1, w_l2, w_mu, w_d, w_phi, w_radius, c_wf_o, out, err);
    if (g0->parsed()) return cmd_g0(g_l1, g_l2, g_mu, g_d, g_r1, g_r, c_g0_o, out, err);
    if (ve->parsed()) return cmd_verify(suite, c_verify_o, out, err);
  } catch (const std::invalid_argument& e) {
    return fail_with(err, "validation", e.what());
  } catch (const std::domain_error& e) {
    return fail_with(err, "domain", e.what());
  } catch (const std::exception& e) {
    return fail_with(err, "internal", e.what());
  }
  return fail_with(err, "usage", "no subcommand given");
}

}  // namespace qwalk::cli
