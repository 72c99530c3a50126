#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qwalk/green_integrals.hpp"
#include "qwalk/lattice_model.hpp"

namespace qwalk {

enum class VerdictKind { Exists, ThresholdUpper, ThresholdLower, Absent };

const char* to_string(VerdictKind k);

struct PointSpectrumVerdict {
  VerdictKind kind = VerdictKind::Absent;
  double nu = 0.0;      // valid unless kind == Absent
  std::string regime;   // classification branch that was applied
  // Set when |2 Lambda / mu| falls within the 1e-9 relative band around the
  // computed critical constant: the verdict is decided per the theorem but
  // is only as trustworthy as the quadrature behind c.
  bool near_threshold = false;

  bool has_eigenvalue() const { return kind != VerdictKind::Absent; }
};

struct SpectrumReport {
  double essential_lo = 0.0;
  double essential_hi = 0.0;
  PointSpectrumVerdict point;
};

enum class BandSide { Above, Below };

// Monotone dispersion function handle. `coarse` requests a cheap
// low-accuracy evaluation, used only for bracketing sign probes.
using DispersionFunction = std::function<double(double nu, bool coarse)>;

struct DispersionSolveOptions {
  double rel_tol = 1e-9;  // on the q-residual, relative to |target|
  double scale = 1.0;     // bandwidth proxy for the initial bracket step
  // Finite band-edge value of |q| when known; infinity when the edge value
  // diverges. |target| beyond it has no solution.
  double edge_value = std::numeric_limits<double>::infinity();
  int max_expansions = 120;
};

// Unique nu with q(nu) = target on the requested side of the band, found by
// geometric bracket expansion from the edge followed by safeguarded
// bisection/secant. Throws NoSolutionError for target == 0 or |target|
// beyond the edge value.
double solve_dispersion(const DispersionFunction& q_fn, double bracket_edge, BandSide side,
                        double target, const DispersionSolveOptions& opts);

struct ClassifyOptions {
  const QuadratureSpec* quad = nullptr;  // override for the q/p/c quadratures
  double solver_rel_tol = 0.0;           // 0: 1e-12 for d <= 2, 1e-9 otherwise
};

// Point-spectrum classification of the one-particle Hamiltonian
// (essential spectrum [0, 4 lambda d]).
SpectrumReport classify_one_particle(const OneParticleParams& p, const ClassifyOptions& = {});

// Point-spectrum classification of the fiber operator at quasimomentum phi
// (essential spectrum [beta1(phi), beta2(phi)]).
SpectrumReport classify_fiber(const QuasiMomentum& phi, const TwoParticleParams& p,
                              const ClassifyOptions& = {});

enum class SubspaceVerdict { ExistsUnique, None };

const char* to_string(SubspaceVerdict v);

// Existence of the one-particle subspace of the two-particle Hamiltonian:
// always for d <= 2 (mu != 0), strict |2 Lambda/mu| < c(d) for d = 3, 4,
// non-strict <= c(d) for d >= 5.
SubspaceVerdict subspace_exists(const TwoParticleParams& p);

struct DispersionSurface {
  std::vector<QuasiMomentum> grid;
  std::vector<PointSpectrumVerdict> verdicts;
  TwoParticleParams params;
  // Largest |nu| jump between axis-adjacent grid points where both carry an
  // eigenvalue; a mesh-dependent continuity modulus.
  double max_adjacent_jump = 0.0;
};

// Samples the bound-state dispersion nu(phi) over a uniform lexicographic
// grid with the given per-axis point counts. Requires mu != 0.
DispersionSurface dispersion_surface(const std::vector<int>& points_per_axis,
                                     const TwoParticleParams& p, const ClassifyOptions& = {});

}  // namespace qwalk
