#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <vector>

#include "couette/profiles.hpp"
#include "couette/spectral.hpp"
#include "doctest.h"
#include "oracles.hpp"

#ifdef COUETTE_HAVE_EIGEN
#include <Eigen/Dense>
#endif

using namespace couette;

namespace {

std::vector<double> sample_q(const RayleighPotential& q, DirichletGrid g) {
  std::vector<double> out(g.n);
  for (int j = 0; j < g.n; ++j) out[j] = q(g.node(j));
  return out;
}

// bisection root of 2a = b*coth(b), independent of the library routine
double beta_oracle(double a) {
  auto f = [&](double b) { return b / std::tanh(b) - 2.0 * a; };
  double lo = 1e-12, hi = 2.0 * a + 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("grid geometry and the resolution rule") {
  DirichletGrid g{7};
  CHECK(g.dy() == doctest::Approx(0.25));
  CHECK(g.node(0) == doctest::Approx(-0.75));
  CHECK(g.node(6) == doctest::Approx(0.75));

  const DirichletGrid fine = DirichletGrid::for_gamma(0.01);
  CHECK(fine.n % 2 == 1);
  CHECK(fine.dy() <= 0.01 / 4.0);
  // two sizes down (previous odd n) violates the rule
  CHECK(2.0 / (fine.n - 1) > 0.01 / 4.0);
  CHECK(DirichletGrid::for_gamma(1.0).n == 511);   // floor kicks in
  CHECK(DirichletGrid::for_gamma(0.1).n == 511);   // floor still binding
}

TEST_CASE("zero potential reproduces the sine spectrum") {
  DirichletGrid g{511};
  std::vector<double> q(g.n, 0.0);
  const EigenPair e = lowest_eigenpair(q, g);
  const double pi = std::numbers::pi;
  // discrete eigenvalue of the 3-point Laplacian: (2 - 2cos(pi*dy/2))/dy^2
  const double dy = g.dy();
  const double exact_disc =
      (2.0 - 2.0 * std::cos(pi * dy / 2.0)) / (dy * dy);
  CHECK(e.lambda == doctest::Approx(exact_disc).epsilon(1e-10));
  CHECK(e.lambda == doctest::Approx(pi * pi / 4.0).epsilon(1e-5));
  CHECK(e.residual < 1e-10);
  // eigenvector matches cos(pi y / 2) up to normalization
  const int mid = g.n / 2;
  const double scale = e.phi[mid] / std::cos(pi * g.node(mid) / 2.0);
  for (int j = 0; j < g.n; j += 37) {
    CHECK(e.phi[j] ==
          doctest::Approx(scale * std::cos(pi * g.node(j) / 2.0)).epsilon(1e-6));
  }
}

TEST_CASE("eigenvector is L2-normalized and center-positive") {
  const ShearProfile p = ShearProfile::erf_family(0.1, 1.0);
  const RayleighPotential q(p);
  const DirichletGrid g = DirichletGrid::for_gamma(0.1);
  const EigenPair e = lowest_eigenpair(q, g);
  double nrm = 0;
  for (double v : e.phi) nrm += v * v * g.dy();
  CHECK(std::sqrt(nrm) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.phi[g.n / 2] > 0.0);
  CHECK(e.lambda < 0.0);  // bound state for a = 1
  CHECK(e.residual < 1e-8);
}

#ifdef COUETTE_HAVE_EIGEN
TEST_CASE("matches a dense symmetric eigensolver on a small grid") {
  const ShearProfile p = ShearProfile::erf_family(0.4, 1.5);
  const RayleighPotential q(p);
  DirichletGrid g{201};
  const auto qn = sample_q(q, g);

  const double dy = g.dy();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(g.n, g.n);
  for (int j = 0; j < g.n; ++j) {
    T(j, j) = 2.0 / (dy * dy) + qn[j];
    if (j + 1 < g.n) {
      T(j, j + 1) = -1.0 / (dy * dy);
      T(j + 1, j) = -1.0 / (dy * dy);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const EigenPair e = lowest_eigenpair(qn, g);
  CHECK(e.lambda == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-12));

  // higher eigenvalues too
  for (int k : {1, 2, 5}) {
    CHECK(eigenvalue_k(qn, g, k) ==
          doctest::Approx(es.eigenvalues()(k)).epsilon(1e-11));
  }

  // eigenvector up to sign
  Eigen::VectorXd v = es.eigenvectors().col(0);
  v /= v.norm() * std::sqrt(dy);
  if (v(g.n / 2) < 0) v = -v;
  for (int j = 0; j < g.n; j += 23) {
    CHECK(e.phi[j] == doctest::Approx(v(j)).epsilon(1e-8));
  }
}
#endif

TEST_CASE("limit root satisfies its defining identity") {
  for (double a : {0.51, 0.6, 1.0, 2.0, 5.0, 20.0}) {
    const double b = limit_beta(a);
    CHECK(b / std::tanh(b) == doctest::Approx(2.0 * a).epsilon(1e-14));
    CHECK(b == doctest::Approx(beta_oracle(a)).epsilon(1e-9));
  }
  CHECK(limit_beta(1.0) == doctest::Approx(1.9150080481545377).epsilon(1e-12));
  CHECK_THROWS_AS(limit_beta(0.5), OutOfRange);
  CHECK_THROWS_AS(limit_beta(0.2), OutOfRange);
}

TEST_CASE("rayleigh quotient agrees with the eigenvalue on the eigenvector") {
  const ShearProfile p = ShearProfile::erf_family(0.2, 1.0);
  const RayleighPotential q(p);
  DirichletGrid g{801};
  const auto qn = sample_q(q, g);
  const EigenPair e = lowest_eigenpair(qn, g);
  const double r = rayleigh_quotient(qn, g, e.phi);
  CHECK(r == doctest::Approx(e.lambda).epsilon(1e-10));

  // any admissible vector sits above the minimum
  std::vector<double> trial(g.n);
  double nrm = 0;
  for (int j = 0; j < g.n; ++j) {
    trial[j] = std::cos(std::numbers::pi * g.node(j) / 2.0);
    nrm += trial[j] * trial[j] * g.dy();
  }
  for (auto& v : trial) v /= std::sqrt(nrm);
  CHECK(rayleigh_quotient(qn, g, trial) >= e.lambda - 1e-12);

  std::vector<double> bad(g.n, 1.0);
  CHECK_THROWS_AS(rayleigh_quotient(qn, g, bad), NotNormalized);
}

TEST_CASE("grid refinement converges and the coarse-grid guard trips") {
  const ShearProfile p = ShearProfile::erf_family(0.05, 1.0);
  const RayleighPotential q(p);
  CHECK_THROWS_AS(lowest_eigenpair(q, DirichletGrid{31}), GridTooCoarse);

  const ConvergedEigenvalue ce = grid_converged_lowest(q);
  CHECK(ce.lambda < 0.0);
  CHECK(ce.grid_error < 1e-6);
  CHECK(ce.finest.grid.dy() <= 0.05 / 4.0);
  // extrapolated value within the error bar of the finest grid value
  CHECK(std::abs(ce.lambda - ce.finest.lambda) <= 10 * ce.grid_error + 1e-12);
}

TEST_CASE("functional form of the doubling loop handles positive spectra") {
  // Couette: no potential, lowest eigenvalue pi^2/4 > 0
  const ConvergedEigenvalue ce =
      grid_converged_lowest_fn([](double) { return 0.0; });
  CHECK(ce.lambda ==
        doctest::Approx(std::numbers::pi * std::numbers::pi / 4).epsilon(1e-6));
}

TEST_CASE("sqrt(-lambda) approaches the limit root as gamma shrinks") {
  const std::vector<double> gammas{0.1, 0.05, 0.025};
  const ConvergenceStudy cs = convergence_study(1.0, gammas);
  CHECK(cs.beta_limit == doctest::Approx(1.9150080481545377).epsilon(1e-12));
  REQUIRE(cs.rows.size() == 3);
  for (size_t i = 0; i < cs.rows.size(); ++i) {
    CHECK(cs.rows[i].gamma == gammas[i]);
    CHECK(cs.rows[i].sqrt_neg_lambda > 0.0);
    CHECK(cs.rows[i].error < (i ? cs.rows[i - 1].error : 1.0));
  }
  // gamma^(1/2)-ish convergence: fitted slope comfortably positive
  CHECK(cs.fitted_exponent > 0.4);
  CHECK(cs.fitted_exponent < 1.5);
}
