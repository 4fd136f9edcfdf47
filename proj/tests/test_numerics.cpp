#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "couette/numerics.hpp"
#include "oracles.hpp"

using namespace couette;

namespace {

// dense Gaussian elimination with partial pivoting, reference route
std::vector<double> dense_solve(std::vector<std::vector<double>> m,
                                std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    }
    std::swap(m[c], m[p]);
    std::swap(b[c], b[p]);
    for (int r = c + 1; r < n; ++r) {
      const double f = m[r][c] / m[c][c];
      for (int k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < n; ++k) s -= m[r][k] * x[k];
    x[r] = s / m[r][r];
  }
  return x;
}

}  // namespace

TEST_CASE("tridiag_solve matches dense elimination on random systems") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 40);
    std::vector<double> lower(n - 1), diag(n), upper(n - 1), rhs(n);
    for (int i = 0; i < n; ++i) {
      diag[i] = 3.0 + u(rng);
      rhs[i] = u(rng);
    }
    for (int i = 0; i + 1 < n; ++i) {
      lower[i] = u(rng);
      upper[i] = u(rng);
    }
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      m[i][i] = diag[i];
      if (i > 0) m[i][i - 1] = lower[i - 1];
      if (i + 1 < n) m[i][i + 1] = upper[i];
    }
    const auto x = tridiag_solve(lower, diag, upper, rhs);
    const auto xr = dense_solve(m, rhs);
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(xr[i]).epsilon(1e-10));
  }
}

TEST_CASE("tridiag_solve survives a zero pivot via row exchange") {
  // first diagonal entry zero, solvable only with pivoting
  std::vector<double> lower{1.0, 1.0};
  std::vector<double> diag{0.0, 1.0, 2.0};
  std::vector<double> upper{2.0, 1.0};
  std::vector<double> rhs{2.0, 4.0, 8.0};
  const auto x = tridiag_solve(lower, diag, upper, rhs);
  // residual check
  CHECK(std::abs(0.0 * x[0] + 2.0 * x[1] - 2.0) < 1e-12);
  CHECK(std::abs(1.0 * x[0] + 1.0 * x[1] + 1.0 * x[2] - 4.0) < 1e-12);
  CHECK(std::abs(1.0 * x[1] + 2.0 * x[2] - 8.0) < 1e-12);
}

TEST_CASE("linear_fit recovers an exact line") {
  std::vector<double> x{1.0, 2.0, 3.5, 7.0, 11.0};
  std::vector<double> y;
  for (double xi : x) y.push_back(-2.5 * xi + 0.75);
  const LinearFit f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(-2.5).epsilon(1e-13));
  CHECK(f.intercept == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(f.rms < 1e-12);
}

TEST_CASE("gauss_legendre(8) integrates polynomials of degree 15 exactly") {
  const QuadratureRule& q = gauss_legendre(8);
  REQUIRE(q.nodes.size() == 8);
  for (int deg = 0; deg <= 15; ++deg) {
    double s = 0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      s += q.weights[i] * std::pow(q.nodes[i], deg);
    }
    const double exact = (deg % 2 == 0) ? 2.0 / (deg + 1) : 0.0;
    CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
  }
}

TEST_CASE("gauss_legendre matches adaptive quadrature on a smooth integrand") {
  const QuadratureRule& q = gauss_legendre(8);
  auto f = [](double t) { return std::exp(t) * std::cos(3.0 * t); };
  double s = 0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * f(q.nodes[i]);
  const double ref = oracle::integrate(f, -1.0, 1.0, 1e-13);
  CHECK(s == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("trapezoid is exact on linear data") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(trapezoid(v, 0.5) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("cubic spline interpolates and differentiates smooth data") {
  const int n = 201;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = -1.0 + 2.0 * i / (n - 1);
    y[i] = std::sin(2.0 * x[i]);
  }
  const CubicSpline s(x, y, CubicSpline::Boundary::Clamped, 2.0 * std::cos(-2.0),
                      2.0 * std::cos(2.0));
  for (double t : {-0.987, -0.5, 0.0123, 0.4, 0.9}) {
    CHECK(s(t) == doctest::Approx(std::sin(2.0 * t)).epsilon(1e-8));
    CHECK(s.deriv(t) == doctest::Approx(2.0 * std::cos(2.0 * t)).epsilon(1e-5));
    CHECK(s.deriv2(t) ==
          doctest::Approx(-4.0 * std::sin(2.0 * t)).epsilon(1e-3).scale(4.0));
  }
  // integral against the adaptive oracle
  const double ref =
      oracle::integrate([](double t) { return std::sin(2.0 * t); }, -0.6, 0.8);
  CHECK(s.integral(-0.6, 0.8) == doctest::Approx(ref).epsilon(1e-7));
}

TEST_CASE("natural spline has vanishing curvature at the ends") {
  std::vector<double> x{0.0, 0.3, 0.9, 1.4, 2.0};
  std::vector<double> y{1.0, -0.2, 0.7, 0.1, 0.5};
  const CubicSpline s(x, y);
  CHECK(std::abs(s.deriv2(0.0)) < 1e-10);
  CHECK(std::abs(s.deriv2(2.0)) < 1e-10);
}

TEST_CASE("spline continues linearly outside the knot range") {
  std::vector<double> x{0.0, 1.0, 2.0};
  std::vector<double> y{0.0, 1.0, 0.0};
  const CubicSpline s(x, y);
  const double slope_out = s.deriv(2.0);
  CHECK(s(3.0) == doctest::Approx(s(2.0) + slope_out).epsilon(1e-12));
  CHECK(s.deriv(3.0) == doctest::Approx(slope_out).epsilon(1e-12));
  CHECK(s.deriv2(3.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("oracle self-check: erf series/CF agrees with std::erf") {
  for (double x : {-4.2, -2.0, -0.3, 0.0, 0.7, 1.9, 3.0, 5.5}) {
    CHECK(oracle::erf(x) == doctest::Approx(std::erf(x)).epsilon(5e-13).scale(1.0));
  }
}

TEST_CASE("oracle self-check: limit beta solves the transcendental identity") {
  for (double a : {0.6, 1.0, 2.0, 5.0}) {
    const double b = oracle::limit_beta(a);
    CHECK(std::abs(b / std::tanh(b) - 2.0 * a) < 1e-12);
  }
}
