#include "couette/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "couette/numerics.hpp"
#include "couette/sobolev.hpp"

namespace couette {

namespace {

constexpr double kBlendRadius = 1e-3;

// Quotient U''(y) / (U(y) - u_s) with the removable singularity at y_i
// bridged by a quadratic through the L'Hopital value U'''(y_i)/U'(y_i).
template <class F0, class F1, class F2, class F3>
double blended_quotient(double y, double yi, double us, const F0& u,
                        const F1& u1, const F2& u2, const F3& u3) {
  const double d = y - yi;
  if (std::abs(d) >= kBlendRadius) return u2(y) / (u(y) - us);
  const double qm =
      u2(yi - kBlendRadius) / (u(yi - kBlendRadius) - us);
  const double qp =
      u2(yi + kBlendRadius) / (u(yi + kBlendRadius) - us);
  const double q0 = u3(yi) / u1(yi);
  const double t = d / kBlendRadius;
  return q0 + 0.5 * (qp - qm) * t + 0.5 * (qp + qm - 2.0 * q0) * t * t;
}

bool in_single_zero_class(const InflectionData& data) {
  return !data.degenerate && data.points.size() == 1 &&
         std::abs(data.points[0].y) <= 1e-6 &&
         std::abs(data.points[0].u_value) <= 1e-8;
}

StabilityVerdict assemble_verdict(std::vector<InflectionEigen> eigs,
                                  bool degenerate, bool class_ok,
                                  double period) {
  StabilityVerdict v;
  v.period = period;
  v.degenerate = degenerate;
  const double k0 = 2.0 * std::numbers::pi / period;
  v.threshold = -k0 * k0;
  v.eigenvalues = std::move(eigs);

  bool all_clear = true;
  for (const InflectionEigen& e : v.eigenvalues) {
    if (!(e.lambda - 10.0 * e.grid_error > v.threshold)) all_clear = false;
  }
  if (all_clear) {
    v.verdict = Verdict::Stable;
    return v;
  }
  if (class_ok && v.eigenvalues.size() == 1) {
    const double lam = v.eigenvalues[0].lambda;
    const double cert = lam + 10.0 * v.eigenvalues[0].grid_error;
    if (cert < 0 &&
        period > 2.0 * std::numbers::pi / std::sqrt(-cert)) {
      v.verdict = Verdict::Unstable;
      v.t_min = 2.0 * std::numbers::pi / std::sqrt(-lam);
      return v;
    }
  }
  v.verdict = Verdict::Indeterminate;
  return v;
}

}  // namespace

InflectionData find_inflections(const ShearProfile& profile) {
  InflectionData data;
  const int n_scan = 8192;
  double sup2 = 0, sup1 = 0;
  std::vector<double> ys(n_scan + 1), u2(n_scan + 1);
  for (int i = 0; i <= n_scan; ++i) {
    ys[i] = -1.0 + 2.0 * i / n_scan;
    u2[i] = profile.U_second(ys[i]);
    sup2 = std::max(sup2, std::abs(u2[i]));
    sup1 = std::max(sup1, std::abs(profile.U_prime(ys[i])));
  }
  if (sup2 <= 1e-12 * std::max(1.0, sup1)) {
    data.degenerate = true;
    return data;
  }
  const double tiny = 1e-13 * sup2;
  for (int i = 0; i <= n_scan; ++i) {
    if (std::abs(u2[i]) <= tiny) u2[i] = 0;
  }
  for (int i = 0; i < n_scan; ++i) {
    double root = 0;
    bool found = false;
    if (u2[i] == 0) {
      if (i > 0 && u2[i - 1] * u2[i + 1] < 0) {
        root = ys[i];
        found = true;
      }
    } else if (u2[i] * u2[i + 1] < 0) {
      double lo = ys[i], hi = ys[i + 1];
      double flo = u2[i];
      for (int iter = 0; iter < 100; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = profile.U_second(mid);
        if (fm == 0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      root = 0.5 * (lo + hi);
      found = true;
    }
    if (found) {
      data.points.push_back({root, profile.U(root)});
    }
  }
  return data;
}

InflectionData find_inflections(std::span<const double> y,
                                std::span<const double> u) {
  if (y.size() != u.size() || y.size() < 9) {
    throw InvalidInput("find_inflections: need matching samples, at least 9");
  }
  if (std::abs(y.front() + 1.0) > 1e-9 || std::abs(y.back() - 1.0) > 1e-9) {
    throw InvalidInput("find_inflections: samples must cover [-1, 1]");
  }
  const CubicSpline s(std::vector<double>(y.begin(), y.end()),
                      std::vector<double>(u.begin(), u.end()));
  // Monotonicity: U' > 0 throughout.
  double sup1 = 0;
  for (int i = 0; i <= 4096; ++i) {
    const double yy = -1.0 + 2.0 * i / 4096;
    const double d = s.deriv(yy);
    if (!(d > 0)) throw NonMonotone("find_inflections: U' must stay positive");
    sup1 = std::max(sup1, std::abs(d));
  }

  InflectionData data;
  // The spline's second derivative is piecewise linear; its nodal values
  // give the exact sign pattern.
  const std::size_t n = y.size();
  std::vector<double> m(n);
  double sup2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = s.deriv2(y[i]);
    sup2 = std::max(sup2, std::abs(m[i]));
  }
  if (sup2 <= 1e-10 * std::max(1.0, sup1)) {
    data.degenerate = true;
    return data;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(m[i]) <= 1e-12 * sup2) m[i] = 0;
  }
  // Where the true u'' sits below the spline interpolation-error floor the
  // nodal values ring, flipping sign cell to cell. A genuine inflection has
  // coherent signs on each side, so demand a local majority before accepting.
  const auto nn = static_cast<std::ptrdiff_t>(n);
  auto coherent = [&](std::ptrdiff_t i, int dir) {
    const double sgn = m[i];
    int agree = 0, seen = 0;
    for (int w = 1; w <= 4; ++w) {
      const std::ptrdiff_t j = i + dir * w;
      if (j < 0 || j >= nn) break;
      ++seen;
      if (m[j] * sgn > 0) ++agree;
    }
    return seen == 0 || 2 * agree > seen;
  };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto si = static_cast<std::ptrdiff_t>(i);
    if (m[i] == 0) {
      if (i > 0 && m[i - 1] * m[i + 1] < 0 && coherent(si - 1, -1) &&
          coherent(si + 1, +1)) {
        data.points.push_back({y[i], s(y[i])});
      }
    } else if (m[i] * m[i + 1] < 0 && coherent(si, -1) &&
               coherent(si + 1, +1)) {
      const double root = y[i] + (y[i + 1] - y[i]) * m[i] / (m[i] - m[i + 1]);
      data.points.push_back({root, s(root)});
    }
  }
  return data;
}

StabilityVerdict classify(const ShearProfile& profile, double period) {
  if (!(period > 0)) throw InvalidInput("classify: period must be positive");
  const InflectionData data = find_inflections(profile);

  std::vector<InflectionEigen> eigs;
  const int n_min = DirichletGrid::for_gamma(profile.gamma()).n;
  if (data.degenerate && data.points.empty()) {
    const ConvergedEigenvalue ce =
        grid_converged_lowest_fn([](double) { return 0.0; }, 1e-7, 511);
    eigs.push_back({{0.0, 0.0}, ce.lambda, ce.grid_error});
    return assemble_verdict(std::move(eigs), true, false, period);
  }

  const bool class_ok = in_single_zero_class(data);
  for (const Inflection& p : data.points) {
    ConvergedEigenvalue ce;
    if (class_ok) {
      // Single inflection at the origin: the factored potential applies
      // verbatim, so reuse it rather than re-deriving the quotient.
      const RayleighPotential q(profile);
      ce = grid_converged_lowest_fn([&q](double yy) { return q(yy); }, 1e-7,
                                    n_min);
    } else {
      auto fq = [&](double yy) {
        return blended_quotient(
            yy, p.y, p.u_value, [&](double t) { return profile.U(t); },
            [&](double t) { return profile.U_prime(t); },
            [&](double t) { return profile.U_second(t); },
            [&](double t) { return profile.U_third(t); });
      };
      ce = grid_converged_lowest_fn(fq, 1e-7, n_min);
    }
    eigs.push_back({p, ce.lambda, ce.grid_error});
  }
  return assemble_verdict(std::move(eigs), data.degenerate, class_ok, period);
}

StabilityVerdict classify(std::span<const double> y,
                          std::span<const double> u, double period) {
  if (!(period > 0)) throw InvalidInput("classify: period must be positive");
  const InflectionData data = find_inflections(y, u);
  const CubicSpline s(std::vector<double>(y.begin(), y.end()),
                      std::vector<double>(u.begin(), u.end()));

  std::vector<InflectionEigen> eigs;
  if (data.degenerate && data.points.empty()) {
    const ConvergedEigenvalue ce =
        grid_converged_lowest_fn([](double) { return 0.0; }, 1e-7, 511);
    eigs.push_back({{0.0, 0.0}, ce.lambda, ce.grid_error});
    return assemble_verdict(std::move(eigs), true, false, period);
  }
  for (const Inflection& p : data.points) {
    auto fq = [&](double yy) {
      return blended_quotient(
          yy, p.y, p.u_value, [&](double t) { return s(t); },
          [&](double t) { return s.deriv(t); },
          [&](double t) { return s.deriv2(t); },
          [&](double t) { return s.deriv3(t); });
    };
    const ConvergedEigenvalue ce = grid_converged_lowest_fn(fq, 1e-7, 511);
    eigs.push_back({p, ce.lambda, ce.grid_error});
  }
  return assemble_verdict(std::move(eigs), data.degenerate,
                          in_single_zero_class(data), period);
}

PeriodWindow unstable_period_window(const ShearProfile& profile) {
  const InflectionData data = find_inflections(profile);
  if (data.degenerate && data.points.empty()) return {true, 0.0};
  if (!in_single_zero_class(data)) {
    throw InvalidInput(
        "unstable_period_window: needs a single inflection at the origin");
  }
  const RayleighPotential q(profile);
  const int n_min = DirichletGrid::for_gamma(profile.gamma()).n;
  const ConvergedEigenvalue ce =
      grid_converged_lowest_fn([&q](double yy) { return q(yy); }, 1e-7, n_min);
  if (ce.lambda + 10.0 * ce.grid_error < 0) {
    return {false, 2.0 * std::numbers::pi / std::sqrt(-ce.lambda)};
  }
  return {true, 0.0};
}

SampledProfile random_near_couette(std::uint64_t seed, double h2_bound,
                                   int n_samples) {
  if (!(h2_bound > 0)) {
    throw InvalidInput("random_near_couette: bound must be positive");
  }
  if (n_samples < 129) {
    throw InvalidInput("random_near_couette: need at least 129 samples");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const int n_modes = 5;
  std::vector<double> coef(n_modes), phase(n_modes);
  for (int k = 0; k < n_modes; ++k) {
    coef[k] = unit(rng) / double((k + 1) * (k + 1));
    phase[k] = angle(rng);
  }
  auto p = [&](double yy) {
    double v = 0;
    for (int k = 0; k < n_modes; ++k) {
      v += coef[k] *
           std::sin((k + 1) * std::numbers::pi * (yy + 1.0) / 2.0 + phase[k]);
    }
    return v;
  };
  // Antiderivative with P(-1) = 0.
  auto P = [&](double yy) {
    double v = 0;
    for (int k = 0; k < n_modes; ++k) {
      const double w = (k + 1) * std::numbers::pi / 2.0;
      v += coef[k] / w * (std::cos(phase[k]) - std::cos(w * (yy + 1.0) + phase[k]));
    }
    return v;
  };
  const Field1D pf = Field1D::from_function(p, 2049);
  const double nrm = hs_norm_1d(pf, 2.0);
  std::uniform_real_distribution<double> frac(0.2, 1.0);
  const double scale = nrm > 0 ? frac(rng) * h2_bound / nrm : 0.0;

  SampledProfile out;
  out.y.resize(n_samples);
  out.u.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    out.y[i] = -1.0 + 2.0 * i / (n_samples - 1);
    out.u[i] = out.y[i] + scale * P(out.y[i]);
  }
  out.y.front() = -1.0;
  out.y.back() = 1.0;
  return out;
}

}  // namespace couette
