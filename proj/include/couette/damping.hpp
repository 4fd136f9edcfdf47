#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "couette/errors.hpp"
#include "couette/numerics.hpp"

namespace couette {

struct OscillationUnresolved : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};
struct NonPositiveNorm : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

// One x-Fourier mode of an initial vorticity perturbation, sampled in y on a
// uniform odd-count grid over [-1,1] (odd so y = 0 stays a node under
// refinement). The x-period convention is 2*pi, so k is an integer != 0.
class ModalVorticity {
 public:
  using Evaluator = std::function<std::complex<double>(double)>;

  static ModalVorticity from_function(int k, Evaluator f, int n_samples);
  static ModalVorticity from_samples(int k,
                                     std::vector<std::complex<double>> samples);

  int k() const { return k_; }
  int size() const { return static_cast<int>(samples_.size()); }
  double dy() const { return 2.0 / (size() - 1); }
  double node(int i) const { return -1.0 + i * dy(); }
  std::span<const std::complex<double>> samples() const { return samples_; }
  std::complex<double> eval(double y) const;

 private:
  ModalVorticity() = default;
  int k_ = 0;
  std::vector<std::complex<double>> samples_;
  Evaluator f_;
  CubicSpline re_, im_;
};

// Sheared mode at time t: omega_k(t,y) = omega_k0(y) * exp(-i k t y).
std::vector<std::complex<double>> free_stream(const ModalVorticity& mode,
                                              double t);

// Dirichlet kernel of (-d^2/dy^2 + k^2) on (-1,1):
//   G(y,y0) = sinh(|k|(y_< + 1)) sinh(|k|(1 - y_>)) / (|k| sinh(2|k|)),
// the denominator fixed by the unit jump of -dG/dy across y = y0. Large |k|
// uses an exponential form that never overflows.
double green_function(int k, double y, double y0);

// Stream function of one mode at time t, solved on a grid refined from the
// mode's own grid until the phase k*t*y is well resolved. psi/psi_prime live
// on the fine grid; base-grid restrictions index the original samples.
class ModalStream {
 public:
  int k = 0;
  double t = 0;
  int fine_n = 0;       // fine sample count (refinement of the base count)
  int base_stride = 1;  // fine index step between base nodes
  std::vector<std::complex<double>> psi;        // fine grid
  std::vector<std::complex<double>> psi_prime;  // fine grid
  double solver_agreement = 0;  // kernel quadrature vs extrapolated FD solve

  double dy() const { return 2.0 / (fine_n - 1); }
  std::vector<std::complex<double>> psi_at_base() const;
  std::vector<std::complex<double>> psi_prime_at_base() const;
  double l2_psi() const;
  double l2_psi_prime() const;
};

// Green-kernel quadrature of the free-streamed mode (primary route), cross
// checked against a Richardson-extrapolated tridiagonal solve of the same
// boundary value problem. Throws OscillationUnresolved past 2^20 points.
ModalStream modal_stream(const ModalVorticity& mode, double t);

struct VelocityNorms {
  double u = 0;  // horizontal perturbation velocity, L2 over the strip
  double v = 0;  // vertical perturbation velocity
};

// ||v||^2 = 2 pi sum_k k^2 ||psi_k||^2, ||u||^2 = 2 pi sum_k ||psi_k'||^2,
// reduced over modes in ascending (|k|, k) order for determinism.
VelocityNorms velocity_norms(std::span<const ModalVorticity> modes, double t);

enum class NormKind { U, V, Velocity };

struct DecayFit {
  NormKind kind = NormKind::V;
  std::vector<double> times;
  std::vector<double> norms;
  double exponent = 0;        // slope of log norm vs log t
  double fit_residual = 0;    // rms of the fit
  double constant = 0;        // max over samples of t^{|exponent|} * norm
};

// Least-squares decay rate over log-spaced times (min time >= 5, spanning at
// least a decade). NonPositiveNorm if any sampled norm underflows.
DecayFit decay_fit(std::span<const ModalVorticity> modes,
                   std::span<const double> times, NormKind kind);

struct AsymptoticsRow {
  double t = 0;
  double norm_f = 0;       // ||t^2 e^{ikty} psi_k(t)|| on the base grid
  double diff_prev = 0;    // distance to the previous row's profile
  double diff_final = 0;   // distance to the last row's profile
};

struct AsymptoticsTable {
  std::vector<AsymptoticsRow> rows;
  double limit_norm = 0;   // ||f_k|| at the largest time
  bool nonzero = false;    // limit_norm > 1e-4
};

// Rescaled profiles f_k(t,y) = t^2 e^{ikty} psi_k(t,y) on the base grid; the
// rows expose the Cauchy differences used to check convergence to a nonzero
// asymptotic profile.
AsymptoticsTable single_mode_asymptotics(const ModalVorticity& mode,
                                         std::span<const double> t_list);

// Seeded rough initial data: conjugate mode pairs +-k for k = 1..k_max with
// ||omega_k|| ~ k^{-rho}, each profile a short random trigonometric sum.
std::vector<ModalVorticity> rough_field(std::uint64_t seed, int k_max,
                                        double rho, int n_samples);

// Mode with a unit jump at y = 0 (value 0 there), H^s in y only for s < 1/2.
ModalVorticity jump_mode(int k, int n_samples);

}  // namespace couette
