#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "couette/errors.hpp"
#include "couette/numerics.hpp"

namespace couette {

struct UnresolvedField : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};
struct ZeroMeanViolation : InvalidInput {
  using InvalidInput::InvalidInput;
};
struct NonVanishing : InvalidInput {
  using InvalidInput::InvalidInput;
};
struct ExponentOutOfRange : InvalidInput {
  using InvalidInput::InvalidInput;
};

// Scalar field sampled uniformly on [-1,1], endpoints included. An optional
// closed-form evaluator makes resampling exact; otherwise a cubic spline of
// the samples is used.
class Field1D {
 public:
  using Evaluator = std::function<double(double)>;

  static Field1D from_samples(std::vector<double> samples);
  static Field1D from_function(Evaluator f, int n_samples);

  int size() const { return static_cast<int>(samples_.size()); }
  double dx() const { return 2.0 / (size() - 1); }
  double node(int i) const { return -1.0 + i * dx(); }
  std::span<const double> samples() const { return samples_; }
  bool has_closed_form() const { return static_cast<bool>(f_); }

  double eval(double y) const;
  Field1D resampled(int n_samples) const;
  double sup_abs() const;

 private:
  Field1D() = default;
  std::vector<double> samples_;
  Evaluator f_;
  CubicSpline spline_;
};

// Normalizer A(sigma) = 4*int_0^inf (1-cos z) z^{-1-2 sigma} dz
// = 2*pi / (Gamma(1+2 sigma) * sin(pi*sigma)), sigma in (0,1). Dividing the
// raw double-integral seminorm by A(sigma) makes it coincide with the
// Fourier-side homogeneous seminorm on the full line, so closed-form
// prefactors are directly comparable.
double gagliardo_normalizer(double sigma);

// Workhorses shared by the 1-D and 2-D norms; samples live on a uniform grid
// with spacing dx, endpoints included.
double l2_norm_sq(std::span<const std::complex<double>> v, double dx);
std::vector<std::complex<double>> fd_derivative(
    std::span<const std::complex<double>> v, double dx);
// Normalized squared seminorm of order sigma in (0,1): double sum over sample
// pairs at least one cell apart plus the analytic near-diagonal correction,
// divided by A(sigma).
double gagliardo_seminorm_sq(std::span<const std::complex<double>> v,
                             double dx, double sigma);
// Squared H^s combination: L2 norms of finite-difference derivatives up to
// floor(s), plus the normalized seminorm of the top derivative when s is
// fractional. No resolution check at this level.
double hs_norm_sq_samples(std::span<const std::complex<double>> v, double dx,
                          double s);

// H^s norm on (-1,1) with a resolution check: the field is recomputed at half
// resolution and an UnresolvedField error is raised if the value moves by
// more than 1%.
double hs_norm_1d(const Field1D& u, double s);

struct GaussianScalingRow {
  double gamma = 0;
  double norm = 0;
};

struct GaussianScaling {
  std::vector<GaussianScalingRow> rows;
  double fitted_exponent = 0;   // slope of log norm vs log gamma
  double fitted_prefactor = 0;  // exp(intercept)
  double cs_closed_form = 0;    // sqrt((1/2) * int |xi|^{2s} e^{-xi^2/2} dxi)
};

// Norms of u_gamma(y) = gamma * exp(-(y/gamma)^2) for each gamma, log-log
// fitted with the largest gamma dropped (it carries the worst truncation to
// the interval). Expected exponent 3/2 - s.
GaussianScaling gaussian_hs_scaling(double s, std::span<const double> gammas);

// Tensor field on [0,T) x [-1,1], periodic in x, held as Fourier modes in x
// sampled in y (uniform grid, endpoints included).
class Field2D {
 public:
  struct Mode {
    int k = 0;
    std::vector<std::complex<double>> values;
  };

  // Modes with duplicate k are rejected; y-sample counts must agree.
  static Field2D from_modes(double period, std::vector<Mode> modes);
  // values[ix][iy] on x_i = i*period/nx (row count nx >= 4) and the uniform
  // y grid; modes up to floor((nx-1)/2) are extracted by direct DFT.
  static Field2D from_samples(double period,
                              const std::vector<std::vector<double>>& values);

  double period() const { return period_; }
  int ny() const { return ny_; }
  double dy() const { return 2.0 / (ny_ - 1); }
  std::span<const Mode> modes() const { return modes_; }
  const Mode* mode(int k) const;

 private:
  Field2D() = default;
  double period_ = 0;
  int ny_ = 0;
  std::vector<Mode> modes_;  // sorted by k
};

// Anisotropic mode-sum norm: sqrt(sum_k |2 pi k / T|^{2 sx} * ||h_k||^2_{H^sy})
// with the k = 0 term included only at sx = 0. Raises ZeroMeanViolation when
// sx < 0 and the mean mode is nonzero.
double hs_norm_2d(const Field2D& h, double sx, double sy);

// Isotropic H^s over the strip: T * sum_k ( sum_{j<=m} w_k^{s-j} ||d^j h_k||^2
// + seminorm_sigma(d^m h_k)^2 ), w_k = 1 + (2 pi k/T)^2. Reduces to
// sqrt(T) * hs_norm of the profile for x-independent fields.
double hs_norm_2d_isotropic(const Field2D& h, double s);

// ||u/(y-y0)||_{L^p} / ||u||_{H^s}. The cell around y0 is integrated
// analytically from a one-sided local model |u| ~ C |y-y0|^theta with
// theta = s - 1/2 (the Holder exponent of H^s functions vanishing at y0),
// tightened to theta = 1 at the endpoint p = 1/(3/2-s) where the Holder
// model is not integrable. Requires u(y0) = 0 to 1e-10 * max(1, sup|u|).
double hardy_ratio(const Field1D& u, double y0, double p, double s);

// Seeded smooth random fields: sum of the first max_mode half-period sine and
// cosine modes with O(1/k^2) coefficients. Used by property sweeps.
Field1D random_band_limited(std::uint64_t seed, int max_mode, int n_samples);

// Returns a copy of u corrected by a smooth multiple of a bump so that the
// closed form vanishes exactly at y0.
Field1D enforce_zero_at(const Field1D& u, double y0);

}  // namespace couette
