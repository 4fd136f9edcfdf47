#pragma once

#include <span>
#include <vector>

namespace couette {

// Solve a tridiagonal system with partial pivoting.  `lower` and `upper`
// have n-1 entries, `diag` and `rhs` have n.  Pivoting matters here: the
// eigensolver calls this with nearly singular shifted matrices.
std::vector<double> tridiag_solve(std::span<const double> lower,
                                  std::span<const double> diag,
                                  std::span<const double> upper,
                                  std::span<const double> rhs);

// Least-squares straight line through (x_i, y_i).
struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double rms = 0;  // root-mean-square residual
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Nodes and weights on [-1, 1].  Cached per order; thread safe.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const QuadratureRule& gauss_legendre(int order);

// Trapezoid rule on uniformly spaced samples.
double trapezoid(std::span<const double> values, double dx);

// Interpolating cubic spline on strictly increasing knots.  Natural or
// clamped (prescribed end slopes) boundary conditions.  Evaluation outside
// the knot range continues linearly with the end slope, so callers that
// need a different extension handle it themselves.
class CubicSpline {
 public:
  enum class Boundary { Natural, Clamped };

  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y,
              Boundary bc = Boundary::Natural, double slope_lo = 0,
              double slope_hi = 0);

  double operator()(double x) const;
  double deriv(double x) const;
  double deriv2(double x) const;
  double deriv3(double x) const;  // piecewise constant
  double integral(double a, double b) const;

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  bool empty() const { return x_.empty(); }

 private:
  std::size_t cell(double x) const;
  double cell_integral(std::size_t i, double a, double b) const;

  std::vector<double> x_, y_, m_;  // m_ = second derivatives at knots
};

}  // namespace couette
