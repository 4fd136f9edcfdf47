#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "couette/damping.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace couette;
using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

TEST_CASE("green function: symmetry, boundary zeros, jump, and ODE") {
  for (int k : {1, 2, 5, 40}) {
    // symmetry in (y, y0)
    CHECK(green_function(k, 0.3, -0.2) ==
          doctest::Approx(green_function(k, -0.2, 0.3)).epsilon(1e-13));
    // sign of k is immaterial
    CHECK(green_function(-k, 0.3, -0.2) ==
          doctest::Approx(green_function(k, 0.3, -0.2)).epsilon(1e-15));
    // Dirichlet ends
    CHECK(green_function(k, -1.0, 0.1) == doctest::Approx(0.0));
    CHECK(green_function(k, 1.0, 0.1) == doctest::Approx(0.0));
    // closed form at a generic point
    const double y = 0.25, y0 = -0.4;
    const double expected = std::sinh(k * (y0 + 1.0)) * std::sinh(k * (1.0 - y)) /
                            (k * std::sinh(2.0 * k));
    CHECK(green_function(k, y, y0) == doctest::Approx(expected).epsilon(1e-12));
    // unit jump of -dG/dy across y = y0
    const double h = 1e-6;
    const double jump = -(green_function(k, y0 + h, y0) -
                          green_function(k, y0, y0)) / h +
                        (green_function(k, y0, y0) -
                         green_function(k, y0 - h, y0)) / h;
    CHECK(jump == doctest::Approx(1.0).epsilon(1e-4));
    // away from y0 it solves -G'' + k^2 G = 0
    auto g = [&](double yy) { return green_function(k, yy, y0); };
    const double gpp = oracle::fd2(g, 0.5, 1e-4);
    CHECK(gpp == doctest::Approx(k * k * g(0.5)).epsilon(1e-5));
  }
  // huge k must not overflow
  CHECK(std::isfinite(green_function(500, 0.999, 0.998)));
  CHECK(green_function(500, 0.9, -0.9) >= 0.0);
}

TEST_CASE("free streaming multiplies by the shear phase") {
  const int n = 257;
  ModalVorticity m = ModalVorticity::from_function(
      2, [](double y) { return cplx(std::cos(kPi * y / 2), 0.0); }, n);
  const double t = 3.7;
  const auto s = free_stream(m, t);
  REQUIRE(static_cast<int>(s.size()) == n);
  for (int i = 0; i < n; i += 41) {
    const double y = m.node(i);
    const cplx want =
        std::cos(kPi * y / 2) * std::exp(cplx(0.0, -2.0 * t * y));
    CHECK(std::abs(s[i] - want) < 1e-13);
  }
}

TEST_CASE("stream solve at t = 0 against a closed form") {
  // omega = cos(pi y / 2): psi = omega / (pi^2/4 + k^2) solves
  // (-d_yy + k^2) psi = omega with Dirichlet ends
  const int k = 1;
  ModalVorticity m = ModalVorticity::from_function(
      k, [](double y) { return cplx(std::cos(kPi * y / 2), 0.0); }, 513);
  const ModalStream s = modal_stream(m, 0.0);
  const double denom = kPi * kPi / 4.0 + k * k;
  const auto base = s.psi_at_base();
  for (int i = 0; i < m.size(); i += 37) {
    const double want = std::cos(kPi * m.node(i) / 2) / denom;
    CHECK(std::abs(base[i] - want) < 1e-8);
  }
  // derivative route too
  const auto dbase = s.psi_prime_at_base();
  for (int i = 0; i < m.size(); i += 53) {
    const double want = -kPi / 2.0 * std::sin(kPi * m.node(i) / 2) / denom;
    CHECK(std::abs(dbase[i] - want) < 1e-6);
  }
  // the two solver routes agree
  CHECK(s.solver_agreement < 1e-8);
}

TEST_CASE("dual solves stay within 1e-8 of each other at late times") {
  ModalVorticity m = ModalVorticity::from_function(
      1, [](double y) { return cplx(std::cos(kPi * y / 2), 0.0); }, 513);
  for (double t : {10.0, 31.6, 100.0}) {
    const ModalStream s = modal_stream(m, t);
    CHECK(s.solver_agreement < 1e-8);
    CHECK(s.fine_n >= m.size());
    CHECK(s.l2_psi() > 0.0);
  }
}

TEST_CASE("velocity norms: Poincare-type mode inequality and t = 0 value") {
  // single k = 1 mode: ||u|| uses psi', ||v|| uses |k| psi
  ModalVorticity m = ModalVorticity::from_function(
      1, [](double y) { return cplx(std::cos(kPi * y / 2), 0.0); }, 513);
  std::vector<ModalVorticity> modes{m};
  const VelocityNorms n0 = velocity_norms(modes, 0.0);
  // psi = cos(pi y/2)/(pi^2/4+1): ||psi||^2 = 1/(pi^2/4+1)^2,
  // ||psi'||^2 = (pi^2/4)/(pi^2/4+1)^2 over [-1,1]; strip factor 2 pi
  const double denom = kPi * kPi / 4.0 + 1.0;
  CHECK(n0.v == doctest::Approx(std::sqrt(2.0 * kPi) / denom).epsilon(1e-6));
  CHECK(n0.u == doctest::Approx(std::sqrt(2.0 * kPi * kPi * kPi / 4.0) / denom)
                    .epsilon(1e-6));
  // u carries the extra pi/2 factor at k = 1 for this eigen-profile
  CHECK(n0.u == doctest::Approx(kPi / 2.0 * n0.v).epsilon(1e-6));
}

TEST_CASE("inviscid damping rates for a smooth single mode") {
  ModalVorticity m = ModalVorticity::from_function(
      1, [](double y) { return cplx(std::cos(kPi * y / 2), 0.0); }, 513);
  std::vector<ModalVorticity> modes{m};
  std::vector<double> times;
  for (int i = 0; i <= 8; ++i) times.push_back(10.0 * std::pow(10.0, i / 8.0));

  const DecayFit fu = decay_fit(modes, times, NormKind::U);
  const DecayFit fv = decay_fit(modes, times, NormKind::V);
  CHECK(fu.exponent > -1.1);
  CHECK(fu.exponent < -0.9);
  CHECK(fv.exponent > -2.1);
  CHECK(fv.exponent < -1.9);
  CHECK(fu.fit_residual < 0.1);
  CHECK(fv.fit_residual < 0.1);
  CHECK(fu.constant > 0.0);
  REQUIRE(fu.norms.size() == times.size());
  // norms decay monotonically at late times
  for (size_t i = 1; i < fv.norms.size(); ++i) CHECK(fv.norms[i] < fv.norms[i - 1]);
}

TEST_CASE("rescaled profiles converge to a nonzero limit") {
  ModalVorticity m = ModalVorticity::from_function(
      1, [](double y) { return cplx(std::cos(kPi * y / 2), 0.0); }, 257);
  std::vector<double> ts{10.0, 20.0, 40.0, 80.0};
  const AsymptoticsTable tab = single_mode_asymptotics(m, ts);
  REQUIRE(tab.rows.size() == 4);
  CHECK(tab.nonzero);
  CHECK(tab.limit_norm > 1e-4);
  // Cauchy: differences to the final profile shrink
  CHECK(tab.rows[2].diff_final < tab.rows[1].diff_final);
  CHECK(tab.rows[1].diff_final < tab.rows[0].diff_final);
  for (const auto& row : tab.rows) CHECK(std::isfinite(row.norm_f));
}

TEST_CASE("rough field is seed-deterministic with the prescribed spectrum") {
  const auto a = rough_field(7, 4, 2.0, 257);
  const auto b = rough_field(7, 4, 2.0, 257);
  const auto c = rough_field(8, 4, 2.0, 257);
  REQUIRE(a.size() == 8);  // conjugate pairs k = +-1..4
  bool identical = true;
  for (size_t i = 0; i < a.size(); ++i) {
    for (int j = 0; j < a[i].size(); ++j) {
      identical = identical && (a[i].samples()[j] == b[i].samples()[j]);
    }
  }
  CHECK(identical);
  bool differs = false;
  for (int j = 0; j < a[0].size(); ++j) {
    differs = differs || (a[0].samples()[j] != c[0].samples()[j]);
  }
  CHECK(differs);
  // conjugate-pair structure: modes +-k carry conjugate samples
  int idx_p = -1, idx_m = -1;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].k() == 2) idx_p = static_cast<int>(i);
    if (a[i].k() == -2) idx_m = static_cast<int>(i);
  }
  REQUIRE(idx_p >= 0);
  REQUIRE(idx_m >= 0);
  for (int j = 0; j < a[idx_p].size(); j += 19) {
    CHECK(std::abs(a[idx_m].samples()[j] - std::conj(a[idx_p].samples()[j])) <
          1e-15);
  }
}

TEST_CASE("jump mode carries the advertised discontinuity") {
  const ModalVorticity j = jump_mode(1, 513);
  CHECK(j.k() == 1);
  const int mid = (j.size() - 1) / 2;
  CHECK(std::abs(j.samples()[mid]) < 1e-14);  // value 0 at the jump
  const double lo = j.samples()[mid - 1].real();
  const double hi = j.samples()[mid + 1].real();
  CHECK(hi - lo == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(ModalVorticity::from_function(
                      0, [](double) { return cplx(1.0, 0.0); }, 257),
                  InvalidInput);
  CHECK_THROWS_AS(ModalVorticity::from_function(
                      1, [](double) { return cplx(1.0, 0.0); }, 4),
                  InvalidInput);
  // even sample count (no center node) is rejected
  CHECK_THROWS_AS(ModalVorticity::from_function(
                      1, [](double) { return cplx(1.0, 0.0); }, 256),
                  InvalidInput);
  ModalVorticity m = ModalVorticity::from_function(
      1, [](double y) { return cplx(y, 0.0); }, 257);
  std::vector<double> bad_times{0.5, 1.0};  // min time below 5
  std::vector<ModalVorticity> modes{m};
  CHECK_THROWS_AS(decay_fit(modes, bad_times, NormKind::V), InvalidInput);
  std::vector<double> narrow{10.0, 20.0};  // less than a decade of span
  CHECK_THROWS_AS(decay_fit(modes, narrow, NormKind::V), InvalidInput);
}
