#pragma once

#include <vector>

#include "couette/errors.hpp"
#include "couette/numerics.hpp"

namespace couette {

// Monotone shear profiles on [-1, 1] of the form
//
//   U(y) = y + a * gamma^2 * h(y / gamma),
//
// either with h = erf (closed forms throughout) or with h given as a sampled
// odd table (spline-interpolated, C^2).  gamma sets the width of the
// near-wall-free shear layer around y = 0, a its strength.  a = 0 degenerates
// to plain Couette flow, which several consumers rely on.

struct NotOdd : InvalidInput {
  using InvalidInput::InvalidInput;
};
struct NonMonotone : InvalidInput {
  using InvalidInput::InvalidInput;
};
struct NonPositiveB0 : InvalidInput {
  using InvalidInput::InvalidInput;
};

enum class ProfileKind { Erf, GeneralH };

struct HTable {
  std::vector<double> x;  // strictly increasing, spanning a symmetric range
  std::vector<double> h;  // odd samples: h(-x) = -h(x)
};

class ShearProfile {
 public:
  static ShearProfile erf_family(double gamma, double a);
  static ShearProfile general_h(double gamma, double a, const HTable& table);

  ProfileKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double a() const { return a_; }

  double U(double y) const;
  double U_prime(double y) const;
  double U_second(double y) const;
  double U_third(double y) const;

  // Stream function of the shear, psi0(y) = integral of U from 0 to y.
  // Even, with minimum psi0(0) = 0.
  double psi0(double y) const;

  // Minimum of U' over [-1, 1]; construction rejects profiles where this
  // is not strictly positive.
  double min_U_prime() const;

 private:
  ShearProfile(double gamma, double a, ProfileKind kind);

  double h_eval(double x) const;    // clamped to constant beyond the table
  double h_deriv(double x) const;   // 0 beyond the table
  double h_deriv2(double x) const;  // 0 beyond the table

  double gamma_ = 1.0;
  double a_ = 0.0;
  ProfileKind kind_ = ProfileKind::Erf;
  CubicSpline h_;  // GeneralH only
};

// Rayleigh potential Q = U''/U of a shear profile, evaluated through the
// factored form that keeps the removable singularity at y = 0 benign:
//
//   Q(y) = -(4a/gamma) * sigma(y/gamma) / (1 + gamma*a*Lambda(y/gamma)),
//
// with sigma(x) = exp(-x^2)/sqrt(pi) and Lambda(x) = erf(x)/x (Taylor series
// near 0).  The GeneralH analogue replaces -4*sigma(x) by h''(x)/x and
// Lambda by h(x)/x.
class RayleighPotential {
 public:
  explicit RayleighPotential(ShearProfile profile);

  double operator()(double y) const;
  const ShearProfile& profile() const { return profile_; }

 private:
  ShearProfile profile_;
};

// Concentration coefficient of a general odd shear shape:
//
//   b0 = -integral of h''(x)/x over the real line  ( = 4 for h = erf ).
//
// The potential of U_{gamma,a} concentrates to -b0 * a * delta(y) as
// gamma -> 0, so b0 > 0 is what makes the family admissible.  `tail_bound`
// estimates the truncation error from the finite table range.
struct B0Result {
  double b0 = 0;
  double tail_bound = 0;
};
B0Result general_h_b0(const HTable& table);

}  // namespace couette
