#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "couette/errors.hpp"
#include "couette/numerics.hpp"
#include "couette/profiles.hpp"
#include "couette/sobolev.hpp"

namespace couette {

struct BifurcationNotFound : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};
struct BracketInvalid : InvalidInput {
  using InvalidInput::InvalidInput;
};
struct DegenerateHessian : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

// Nonlinearity with f(psi0(y)) = U'(y), built parametrically on y in [0,1]
// and extended to zero (C^2 quintic blend) over a margin of half the core
// range on each side.
class NonlinearityF {
 public:
  static NonlinearityF build(const ShearProfile& profile, int n_knots = 8193);

  double operator()(double t) const;
  double deriv(double t) const;
  double deriv2(double t) const;

  double core_min() const { return core_min_; }
  double core_max() const { return core_max_; }
  double margin() const { return margin_; }
  bool in_core(double t) const { return t >= core_min_ && t <= core_max_; }
  const ShearProfile& profile() const { return profile_; }

 private:
  explicit NonlinearityF(ShearProfile p) : profile_(std::move(p)) {}

  struct Edge {
    double f = 0, fp = 0, fpp = 0;
  };

  ShearProfile profile_;
  CubicSpline table_;
  double core_min_ = 0, core_max_ = 0, margin_ = 0;
  Edge lo_, hi_;
};

// Even periodic field sum_m c_m(y) cos(m xi) on interior y nodes of a
// uniform Dirichlet grid (c_m(+-1) = 0 implied).
struct CosineField {
  int n_modes = 0;
  int ny = 0;
  std::vector<double> c;  // c[j * n_modes + m]

  double dy() const { return 2.0 / (ny + 1); }
  double y(int j) const { return -1.0 + (j + 1) * dy(); }
  double& at(int j, int m) { return c[static_cast<std::size_t>(j) * n_modes + m]; }
  double at(int j, int m) const {
    return c[static_cast<std::size_t>(j) * n_modes + m];
  }
  static CosineField zeros(int n_modes, int ny);
};

struct SteadyState {
  double alpha_sq = 0;
  double amplitude = 0;  // signed beta, coefficient of phi0(y) cos(xi)
  CosineField phi;
  double residual_l2 = 0;       // ||F|| on the state's own grid
  double refined_residual = 0;  // ||F|| re-evaluated on a once-refined grid
  bool range_escape = false;    // psi entered the extension zone of f

  double period() const { return 2.0 * std::numbers::pi / std::sqrt(alpha_sq); }
};

struct NewtonDiverged : NumericalFailure {
  NewtonDiverged(const std::string& what, std::vector<SteadyState> good)
      : NumericalFailure(what), states(std::move(good)) {}
  std::vector<SteadyState> states;  // last good branch prefix
};

struct SteadyOptions {
  int modes = 16;
  int ny = 8191;
  double newton_tol = 2e-10;
  int max_newton = 40;
  int max_backtrack = 8;
  int fixed_steps = 5;  // amplitude-pinned steps before pseudo-arclength
};

struct ResidualEval {
  CosineField values;
  double l2 = 0;
  bool range_escape = false;
};

// F = alpha^2 phi_xixi + phi_yy - (f(psi0 + phi) - f(psi0)), cosine-spectral
// in xi, second-order finite differences in y.
ResidualEval steady_residual(const CosineField& phi, double alpha_sq,
                             const NonlinearityF& f);

struct Branch {
  double k0_sq_grid = 0;          // exact grid bifurcation point
  std::vector<double> phi0;       // grid eigenfunction, L2-normalized
  std::vector<SteadyState> states;
};

// Newton continuation from (0, k0_sq) in the +phi0 cos(xi) direction:
// amplitude-pinned steps i*step for the first few, pseudo-arclength after.
Branch continue_branch(const NonlinearityF& f, double k0_sq, double step,
                       int n_steps, const SteadyOptions& opt = {});

struct PeriodRoot {
  double a = 0;
  double period = 0;
};

struct MatchResult {
  double a = 0;
  double period = 0;
  SteadyState state;
  std::vector<PeriodRoot> roots;  // all bracket roots seen in the pre-scan
};

// Outer bisection over the family parameter a at fixed branch amplitude,
// targeting period 2*pi/alpha = target.  The bracket must produce a sign
// change of T - target (BracketInvalid otherwise).
MatchResult match_period(double gamma, double a_lo, double a_hi,
                         double target_period, double amplitude,
                         const SteadyOptions& opt = {});

struct CriticalPoint {
  double xi = 0, y = 0;
  bool saddle = false;
  double psi = 0;
  double det_hess = 0;
};

struct StreamlineReport {
  std::vector<CriticalPoint> points;
  bool cats_eye = false;
  double eye_half_height = 0;
};

// Critical points of psi = psi0 + phi by 2-D Newton seeded at (0,0) and
// (pi,0); saddle/center from the Hessian determinant sign.
StreamlineReport classify_streamlines(const SteadyState& state,
                                      const NonlinearityF& f);

// omega = alpha^2 phi_xixi + psi0'' + phi_yy as a complex-mode field with
// x-period 2*pi/alpha, resampled to ny_out+1 uniform y nodes.
Field2D vorticity_field(const SteadyState& state, const NonlinearityF& f,
                        int ny_out = 1024);

// psi = psi0 + phi in the same representation.
Field2D stream_field(const SteadyState& state, const NonlinearityF& f,
                     int ny_out = 1024);

// Isotropic H^s distance of the state's vorticity from the Couette value 1.
double vorticity_distance(const SteadyState& state, const NonlinearityF& f,
                          double s, int ny_out = 1024);

// ||u . grad(omega)||_{L2} over one period; a measure of how well the state
// solves the steady equation pointwise.
double advection_residual(const SteadyState& state, const NonlinearityF& f);

}  // namespace couette
