#include "couette/profiles.hpp"

#include <algorithm>
#include <cmath>

namespace couette {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

double gauss_sigma(double x) { return std::exp(-x * x) / kSqrtPi; }

// erf(x)/x with the removable singularity expanded.
double lambda_erf(double x) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    return (2.0 / kSqrtPi) *
           (1.0 - x2 / 3.0 + x2 * x2 / 10.0 - x2 * x2 * x2 / 42.0);
  }
  return std::erf(x) / x;
}

CubicSpline build_odd_h_spline(const HTable& table) {
  const std::size_t n = table.x.size();
  if (n < 7 || table.h.size() != n) {
    throw InvalidInput("h table: need at least 7 samples");
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(table.x[i + 1] > table.x[i])) {
      throw InvalidInput("h table: abscissae must be strictly increasing");
    }
  }
  if (table.x.front() > -1e-9 || table.x.back() < 1e-9) {
    throw NotOdd("h table: range must straddle 0");
  }
  CubicSpline s(table.x, table.h);
  // Oddness: compare h(-x) against -h(x) across the overlapping range.
  const double r = std::min(-table.x.front(), table.x.back());
  double scale = 1e-30;
  for (double v : table.h) scale = std::max(scale, std::abs(v));
  for (int i = 0; i <= 64; ++i) {
    const double x = r * i / 64.0;
    if (std::abs(s(x) + s(-x)) > 1e-8 * scale) {
      throw NotOdd("h table: samples are not odd");
    }
  }
  return s;
}

// f(x)/x where f(0) = 0, using the supplied limit value inside |x| < delta
// with a quadratic blend that stays consistent with the outside values.
template <typename F>
double odd_ratio(F&& f, double limit0, double x, double delta) {
  if (std::abs(x) >= delta) return f(x) / x;
  const double rp = f(delta) / delta;
  const double rm = -f(-delta) / delta;
  const double t = x / delta;
  return limit0 + 0.5 * t * (rp - rm) +
         0.5 * t * t * (rp + rm - 2.0 * limit0);
}

}  // namespace

ShearProfile::ShearProfile(double gamma, double a, ProfileKind kind)
    : gamma_(gamma), a_(a), kind_(kind) {
  if (!(gamma > 0)) throw InvalidInput("ShearProfile: gamma must be positive");
  if (!(a >= 0)) throw InvalidInput("ShearProfile: a must be nonnegative");
}

ShearProfile ShearProfile::erf_family(double gamma, double a) {
  ShearProfile p(gamma, a, ProfileKind::Erf);
  if (p.min_U_prime() <= 1e-8) {
    throw NonMonotone("ShearProfile: U is not strictly increasing");
  }
  return p;
}

ShearProfile ShearProfile::general_h(double gamma, double a,
                                     const HTable& table) {
  ShearProfile p(gamma, a, ProfileKind::GeneralH);
  p.h_ = build_odd_h_spline(table);
  if (p.min_U_prime() <= 1e-8) {
    throw NonMonotone("ShearProfile: U is not strictly increasing");
  }
  return p;
}

double ShearProfile::h_eval(double x) const {
  return h_(std::clamp(x, h_.x_min(), h_.x_max()));
}

double ShearProfile::h_deriv(double x) const {
  if (x < h_.x_min() || x > h_.x_max()) return 0.0;
  return h_.deriv(x);
}

double ShearProfile::h_deriv2(double x) const { return h_.deriv2(x); }

double ShearProfile::U(double y) const {
  const double x = y / gamma_;
  if (kind_ == ProfileKind::Erf) {
    return y + a_ * gamma_ * gamma_ * std::erf(x);
  }
  return y + a_ * gamma_ * gamma_ * h_eval(x);
}

double ShearProfile::U_prime(double y) const {
  const double x = y / gamma_;
  if (kind_ == ProfileKind::Erf) {
    return 1.0 + 2.0 * a_ * gamma_ * gauss_sigma(x);
  }
  return 1.0 + a_ * gamma_ * h_deriv(x);
}

double ShearProfile::U_second(double y) const {
  const double x = y / gamma_;
  if (kind_ == ProfileKind::Erf) {
    return -4.0 * a_ * x * gauss_sigma(x);
  }
  return a_ * h_deriv2(x);
}

double ShearProfile::U_third(double y) const {
  const double x = y / gamma_;
  if (kind_ == ProfileKind::Erf) {
    return -(4.0 * a_ / gamma_) * (1.0 - 2.0 * x * x) * gauss_sigma(x);
  }
  return (a_ / gamma_) * h_.deriv3(std::clamp(x, h_.x_min(), h_.x_max()));
}

double ShearProfile::psi0(double y) const {
  const double x = y / gamma_;
  if (kind_ == ProfileKind::Erf) {
    // integral of erf from 0 to x is x*erf(x) + (exp(-x^2) - 1)/sqrt(pi)
    return 0.5 * y * y +
           a_ * gamma_ * gamma_ *
               (y * std::erf(x) + gamma_ * (std::exp(-x * x) - 1.0) / kSqrtPi);
  }
  const double lo = h_.x_min(), hi = h_.x_max();
  const double xc = std::clamp(x, lo, hi);
  double ih = h_.integral(0.0, xc);
  if (x > hi) ih += h_(hi) * (x - hi);
  if (x < lo) ih += h_(lo) * (x - lo);
  return 0.5 * y * y + a_ * gamma_ * gamma_ * gamma_ * ih;
}

double ShearProfile::min_U_prime() const {
  double lo = 1e300;
  const int n = 4096;
  for (int i = 0; i <= n; ++i) {
    const double y = -1.0 + 2.0 * i / n;
    lo = std::min(lo, U_prime(y));
  }
  return lo;
}

RayleighPotential::RayleighPotential(ShearProfile profile)
    : profile_(std::move(profile)) {}

double RayleighPotential::operator()(double y) const {
  const double g = profile_.gamma();
  const double a = profile_.a();
  if (a == 0.0) return 0.0;  // Couette
  const double x = y / g;
  if (profile_.kind() == ProfileKind::Erf) {
    return -(4.0 * a / g) * gauss_sigma(x) / (1.0 + g * a * lambda_erf(x));
  }
  // Q = (a/g) * (h''(x)/x) / (1 + g*a*h(x)/x), both ratios expressed
  // through U so the blend shares the profile's own derivatives.
  const double delta = 1e-3;
  auto h2 = [&](double v) { return profile_.U_second(g * v) / a; };
  auto hv = [&](double v) { return (profile_.U(g * v) - g * v) / (a * g * g); };
  const double rho = odd_ratio(h2, g * profile_.U_third(0.0) / a, x, delta);
  const double lam =
      odd_ratio(hv, (profile_.U_prime(0.0) - 1.0) / (a * g), x, delta);
  return (a / g) * rho / (1.0 + g * a * lam);
}

B0Result general_h_b0(const HTable& table) {
  CubicSpline s = build_odd_h_spline(table);
  const double lo = s.x_min(), hi = s.x_max();
  // h''(x)/x is even with a removable singularity; integrate it on a grid
  // eight times finer than the table.
  const std::size_t nfine = 8 * table.x.size();
  const double dx = (hi - lo) / static_cast<double>(nfine);
  const double delta = std::max(1e-3, 2.0 * dx);
  auto h2 = [&](double v) { return s.deriv2(v); };
  const double limit0 = 0.5 * (s.deriv3(dx / 2) + s.deriv3(-dx / 2));
  std::vector<double> vals(nfine + 1);
  for (std::size_t i = 0; i <= nfine; ++i) {
    const double x = lo + dx * static_cast<double>(i);
    vals[i] = odd_ratio(h2, limit0, x, delta);
  }
  B0Result r;
  r.b0 = -trapezoid(vals, dx);
  // Tail of integral of h''/x beyond the table, via integration by parts:
  // |tail| <= 2|h'(R)|/R when h' decays monotonically.
  r.tail_bound =
      2.0 * std::abs(s.deriv(hi)) / hi + 2.0 * std::abs(s.deriv(lo)) / -lo;
  if (r.b0 <= 0) {
    throw NonPositiveB0("general_h_b0: computed b0 is not positive");
  }
  return r;
}

}  // namespace couette
