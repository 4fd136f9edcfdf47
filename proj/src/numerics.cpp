#include "couette/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "couette/errors.hpp"

namespace couette {

std::vector<double> tridiag_solve(std::span<const double> lower,
                                  std::span<const double> diag,
                                  std::span<const double> upper,
                                  std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (n == 0 || lower.size() != n - 1 || upper.size() != n - 1 ||
      rhs.size() != n) {
    throw InvalidInput("tridiag_solve: inconsistent band sizes");
  }
  // Band storage with one extra superdiagonal for pivoting fill-in.
  std::vector<double> d(diag.begin(), diag.end());
  std::vector<double> u1(n, 0.0), u2(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) u1[i] = upper[i];
  std::vector<double> x(rhs.begin(), rhs.end());

  for (std::size_t i = 0; i + 1 < n; ++i) {
    double sub = lower[i];
    if (std::abs(sub) > std::abs(d[i])) {
      std::swap(d[i], sub);          // row swap: pivot row is i+1
      std::swap(u1[i], d[i + 1]);
      std::swap(u2[i], u1[i + 1]);
      std::swap(x[i], x[i + 1]);
    }
    if (d[i] == 0.0) d[i] = 1e-300;  // keep elimination finite
    const double f = sub / d[i];
    d[i + 1] -= f * u1[i];
    u1[i + 1] -= f * u2[i];
    x[i + 1] -= f * x[i];
  }
  if (d[n - 1] == 0.0) d[n - 1] = 1e-300;
  x[n - 1] /= d[n - 1];
  if (n >= 2) {
    x[n - 2] = (x[n - 2] - u1[n - 2] * x[n - 1]) / d[n - 2];
  }
  for (std::size_t k = n; k-- > 2;) {
    const std::size_t i = k - 2;
    x[i] = (x[i] - u1[i] * x[i + 1] - u2[i] * x[i + 2]) / d[i];
  }
  return x;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidInput("linear_fit: need at least two points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0) throw InvalidInput("linear_fit: degenerate abscissae");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.slope * x[i] - fit.intercept;
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / n);
  return fit;
}

namespace {

QuadratureRule make_gauss_legendre(int order) {
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  // Newton iteration on P_n, cosine initial guesses.
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double pp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int order) {
  if (order < 1 || order > 256) {
    throw InvalidInput("gauss_legendre: order out of range");
  }
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) {
    it = cache.emplace(order, make_gauss_legendre(order)).first;
  }
  return it->second;
}

double trapezoid(std::span<const double> values, double dx) {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * dx;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y,
                         Boundary bc, double slope_lo, double slope_hi)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 3 || y_.size() != n) {
    throw InvalidInput("CubicSpline: need at least three knots");
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(x_[i + 1] > x_[i])) {
      throw InvalidInput("CubicSpline: knots must be strictly increasing");
    }
  }
  // Solve for the knot second derivatives (moments).
  std::vector<double> dl(n - 1), dd(n), du(n - 1), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = x_[i] - x_[i - 1];
    const double hr = x_[i + 1] - x_[i];
    dl[i - 1] = hl / 6.0;
    dd[i] = (hl + hr) / 3.0;
    du[i] = hr / 6.0;
    rhs[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
  }
  const double h0 = x_[1] - x_[0];
  const double h1 = x_[n - 1] - x_[n - 2];
  if (bc == Boundary::Natural) {
    dd[0] = 1.0;
    du[0] = 0.0;
    rhs[0] = 0.0;
    dd[n - 1] = 1.0;
    dl[n - 2] = 0.0;
    rhs[n - 1] = 0.0;
  } else {
    dd[0] = h0 / 3.0;
    du[0] = h0 / 6.0;
    rhs[0] = (y_[1] - y_[0]) / h0 - slope_lo;
    dd[n - 1] = h1 / 3.0;
    dl[n - 2] = h1 / 6.0;
    rhs[n - 1] = slope_hi - (y_[n - 1] - y_[n - 2]) / h1;
  }
  m_ = tridiag_solve(dl, dd, du, rhs);
}

std::size_t CubicSpline::cell(double x) const {
  if (x <= x_.front()) return 0;
  if (x >= x_.back()) return x_.size() - 2;
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double CubicSpline::operator()(double x) const {
  if (x < x_.front()) return y_.front() + deriv(x_.front()) * (x - x_.front());
  if (x > x_.back()) return y_.back() + deriv(x_.back()) * (x - x_.back());
  const std::size_t i = cell(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::deriv(double x) const {
  const double xe = std::clamp(x, x_.front(), x_.back());
  const std::size_t i = cell(xe);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - xe) / h;
  const double b = (xe - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h /
             6.0;
}

double CubicSpline::deriv2(double x) const {
  if (x < x_.front() || x > x_.back()) return 0.0;
  const std::size_t i = cell(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * m_[i] + b * m_[i + 1];
}

double CubicSpline::deriv3(double x) const {
  if (x < x_.front() || x > x_.back()) return 0.0;
  const std::size_t i = cell(x);
  return (m_[i + 1] - m_[i]) / (x_[i + 1] - x_[i]);
}

double CubicSpline::cell_integral(std::size_t i, double a, double b) const {
  // Antiderivative of the standard moment form on cell i.
  const double h = x_[i + 1] - x_[i];
  auto F = [&](double x) {
    const double u = (x_[i + 1] - x) / h;
    const double v = (x - x_[i]) / h;
    const double u2 = u * u, v2 = v * v;
    return h * (-y_[i] * u2 / 2.0 + y_[i + 1] * v2 / 2.0 +
                h * h / 6.0 *
                    (m_[i] * (u2 / 2.0 - u2 * u2 / 4.0) +
                     m_[i + 1] * (v2 * v2 / 4.0 - v2 / 2.0)));
  };
  return F(b) - F(a);
}

double CubicSpline::integral(double a, double b) const {
  if (a == b) return 0.0;
  if (a > b) return -integral(b, a);
  const double lo = std::clamp(a, x_.front(), x_.back());
  const double hi = std::clamp(b, x_.front(), x_.back());
  double total = 0.0;
  // Linear continuation outside the knot range.
  if (a < x_.front()) {
    const double s = deriv(x_.front());
    const double t0 = a - x_.front(), t1 = lo - x_.front();
    total += y_.front() * (t1 - t0) + 0.5 * s * (t1 * t1 - t0 * t0);
  }
  if (b > x_.back()) {
    const double s = deriv(x_.back());
    const double t0 = hi - x_.back(), t1 = b - x_.back();
    total += y_.back() * (t1 - t0) + 0.5 * s * (t1 * t1 - t0 * t0);
  }
  std::size_t i0 = cell(lo), i1 = cell(hi);
  if (i0 == i1) {
    total += cell_integral(i0, lo, hi);
    return total;
  }
  total += cell_integral(i0, lo, x_[i0 + 1]);
  for (std::size_t i = i0 + 1; i < i1; ++i) {
    total += cell_integral(i, x_[i], x_[i + 1]);
  }
  total += cell_integral(i1, x_[i1], hi);
  return total;
}

}  // namespace couette
