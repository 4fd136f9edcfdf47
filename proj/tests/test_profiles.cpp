#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "couette/profiles.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace couette;

namespace {

HTable erf_table(double range = 6.0, int n = 601) {
  HTable t;
  t.x.resize(n);
  t.h.resize(n);
  for (int i = 0; i < n; ++i) {
    t.x[i] = -range + 2.0 * range * i / (n - 1);
    t.h[i] = oracle::erf(t.x[i]);
  }
  return t;
}

}  // namespace

TEST_CASE("erf family matches the series/continued-fraction erf oracle") {
  for (double gamma : {0.2, 0.1, 0.05}) {
    for (double a : {0.3, 1.0, 2.5}) {
      const ShearProfile p = ShearProfile::erf_family(gamma, a);
      for (double y : {-0.9, -0.31, -0.04, 0.013, 0.22, 0.77}) {
        const double ref = y + a * gamma * gamma * oracle::erf(y / gamma);
        CHECK(p.U(y) == doctest::Approx(ref).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("profile derivatives are consistent with finite differences") {
  const ShearProfile p = ShearProfile::erf_family(0.1, 1.3);
  auto U = [&](double y) { return p.U(y); };
  auto Up = [&](double y) { return p.U_prime(y); };
  auto Us = [&](double y) { return p.U_second(y); };
  for (double y : {-0.6, -0.15, -0.03, 0.0, 0.05, 0.4, 0.95}) {
    CHECK(p.U_prime(y) == doctest::Approx(oracle::fd1(U, y, 1e-5)).epsilon(1e-8));
    CHECK(p.U_second(y) ==
          doctest::Approx(oracle::fd2(U, y, 2e-4)).epsilon(2e-5));
    CHECK(p.U_second(y) ==
          doctest::Approx(oracle::fd1(Up, y, 1e-5)).epsilon(1e-7));
    CHECK(p.U_third(y) ==
          doctest::Approx(oracle::fd1(Us, y, 1e-5)).epsilon(1e-6));
  }
}

TEST_CASE("psi0 is the even antiderivative of U vanishing at the center") {
  const ShearProfile p = ShearProfile::erf_family(0.05, 1.0);
  CHECK(p.psi0(0.0) == 0.0);  // exact by construction
  auto U = [&](double y) { return p.U(y); };
  for (double y : {0.01, 0.07, 0.33, 1.0}) {
    CHECK(p.psi0(y) == doctest::Approx(p.psi0(-y)).epsilon(1e-14));
    CHECK(p.psi0(y) ==
          doctest::Approx(oracle::integrate(U, 0.0, y, 1e-14)).epsilon(1e-12));
    CHECK(oracle::fd1([&](double v) { return p.psi0(v); }, y, 1e-6) ==
          doctest::Approx(p.U(y)).epsilon(1e-7));
  }
  // strictly increasing away from the center
  double prev = 0.0;
  for (int i = 1; i <= 40; ++i) {
    const double v = p.psi0(i / 40.0);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("a = 0 degenerates to plain Couette flow") {
  const ShearProfile p = ShearProfile::erf_family(0.1, 0.0);
  const RayleighPotential q(p);
  for (double y : {-1.0, -0.2, 0.0, 1e-9, 0.4, 1.0}) {
    CHECK(p.U(y) == y);
    CHECK(p.U_prime(y) == 1.0);
    CHECK(p.U_second(y) == 0.0);
    CHECK(q(y) == 0.0);
  }
  CHECK(p.psi0(0.5) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("rayleigh potential equals U''/U away from the axis") {
  for (double a : {0.6, 1.0, 3.0}) {
    const ShearProfile p = ShearProfile::erf_family(0.05, a);
    const RayleighPotential q(p);
    for (double y : {-0.8, -0.2, -0.011, 0.013, 0.09, 0.5}) {
      const double naive = p.U_second(y) / p.U(y);
      CHECK(q(y) == doctest::Approx(naive).epsilon(1e-11));
    }
  }
}

TEST_CASE("rayleigh potential center value and continuity") {
  const double gamma = 0.05, a = 1.0;
  const ShearProfile p = ShearProfile::erf_family(gamma, a);
  const RayleighPotential q(p);
  const double sqrt_pi = std::sqrt(std::acos(-1.0));
  const double expected =
      -(4.0 * a / gamma) / sqrt_pi / (1.0 + 2.0 * a * gamma / sqrt_pi);
  CHECK(q(0.0) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(q(0.0) == doctest::Approx(-42.724662).epsilon(1e-6));
  // no singularity across the removable point
  CHECK(q(1e-9) == doctest::Approx(q(0.0)).epsilon(1e-8));
  CHECK(q(-1e-7) == doctest::Approx(q(1e-7)).epsilon(1e-10));
  // even in y
  CHECK(q(0.03) == doctest::Approx(q(-0.03)).epsilon(1e-13));
}

TEST_CASE("construction validates inputs") {
  CHECK_THROWS_AS(ShearProfile::erf_family(0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(ShearProfile::erf_family(-0.1, 1.0), InvalidInput);
  CHECK_THROWS_AS(ShearProfile::erf_family(0.1, -0.5), InvalidInput);
}

TEST_CASE("general h family reproduces the closed erf forms") {
  const double gamma = 0.1, a = 1.0;
  const ShearProfile pe = ShearProfile::erf_family(gamma, a);
  const ShearProfile ph = ShearProfile::general_h(gamma, a, erf_table());
  const RayleighPotential qe(pe), qh(ph);
  for (double y : {-0.7, -0.21, -0.008, 0.0, 0.004, 0.11, 0.52}) {
    CHECK(ph.U(y) == doctest::Approx(pe.U(y)).epsilon(1e-10));
    CHECK(ph.U_prime(y) == doctest::Approx(pe.U_prime(y)).epsilon(1e-7));
    CHECK(ph.psi0(y) == doctest::Approx(pe.psi0(y)).epsilon(1e-9));
    // near the axis the ratio leans on spline third derivatives: ~2e-4
    CHECK(qh(y) == doctest::Approx(qe(y)).epsilon(1e-3));
  }
}

TEST_CASE("general h clamps beyond the tabulated range") {
  // gamma large enough that y/gamma leaves the table inside [-1, 1]
  const double gamma = 0.5, a = 0.4;
  HTable t = erf_table(1.5, 151);
  const ShearProfile p = ShearProfile::general_h(gamma, a, t);
  // beyond x = 1.5 the shape freezes: U continues linearly, U' -> 1
  const double y_out = 0.9;  // x = 1.8
  CHECK(p.U_prime(y_out) == doctest::Approx(1.0).epsilon(1e-12));
  const double step = p.U(0.95) - p.U(0.9);
  CHECK(step == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("h table validation rejects malformed input") {
  HTable short_t;
  short_t.x = {-1, 0, 1};
  short_t.h = {-1, 0, 1};
  CHECK_THROWS_AS(ShearProfile::general_h(0.1, 1.0, short_t), InvalidInput);

  HTable not_odd = erf_table(2.0, 101);
  for (auto& v : not_odd.h) v += 0.05;
  CHECK_THROWS_AS(ShearProfile::general_h(0.1, 1.0, not_odd), NotOdd);

  HTable one_sided;
  one_sided.x.resize(64);
  one_sided.h.resize(64);
  for (int i = 0; i < 64; ++i) {
    one_sided.x[i] = 0.5 + i / 63.0;
    one_sided.h[i] = oracle::erf(one_sided.x[i]);
  }
  CHECK_THROWS_AS(ShearProfile::general_h(0.1, 1.0, one_sided), NotOdd);

  HTable dup = erf_table(2.0, 101);
  dup.x[50] = dup.x[49];
  CHECK_THROWS_AS(ShearProfile::general_h(0.1, 1.0, dup), InvalidInput);
}

TEST_CASE("non-monotone general profiles are rejected") {
  // h(x) = -sin(x) on [-2, 2] drives U' = 1 + a*gamma*h'(x/gamma) negative
  HTable t;
  const int n = 201;
  t.x.resize(n);
  t.h.resize(n);
  for (int i = 0; i < n; ++i) {
    t.x[i] = -2.0 + 4.0 * i / (n - 1);
    t.h[i] = -std::sin(t.x[i]);
  }
  CHECK_THROWS_AS(ShearProfile::general_h(0.5, 10.0, t), NonMonotone);
}

TEST_CASE("b0 of the erf shape is 4") {
  const B0Result r = general_h_b0(erf_table(8.0, 1601));
  CHECK(r.b0 == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(r.tail_bound < 1e-12);
}

TEST_CASE("b0 must be positive") {
  // h = x^3 has h''/x = 6 > 0, so -integral is negative
  HTable t;
  const int n = 101;
  t.x.resize(n);
  t.h.resize(n);
  for (int i = 0; i < n; ++i) {
    t.x[i] = -2.0 + 4.0 * i / (n - 1);
    t.h[i] = t.x[i] * t.x[i] * t.x[i];
  }
  CHECK_THROWS_AS(general_h_b0(t), NonPositiveB0);
}
