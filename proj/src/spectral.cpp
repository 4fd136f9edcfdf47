#include "couette/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "couette/numerics.hpp"

namespace couette {

namespace {

// Symmetric tridiagonal operator T = -D2 + diag(q): diagonal 2/dy^2 + q_j,
// off-diagonal -1/dy^2.
struct Tridiag {
  std::vector<double> d;
  double off = 0;

  static Tridiag assemble(std::span<const double> q, const DirichletGrid& g) {
    Tridiag t;
    const double idy2 = 1.0 / (g.dy() * g.dy());
    t.off = -idy2;
    t.d.resize(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) t.d[j] = 2.0 * idy2 + q[j];
    return t;
  }
};

// Number of eigenvalues strictly below x (Sturm sequence count).
int sturm_count(const Tridiag& t, double x) {
  const double e2 = t.off * t.off;
  int count = 0;
  double q = t.d[0] - x;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < t.d.size(); ++i) {
    if (q == 0.0) q = 1e-300;
    q = t.d[i] - x - e2 / q;
    if (q < 0) ++count;
  }
  return count;
}

double bisect_eigenvalue(const Tridiag& t, int k) {
  double lo = t.d[0], hi = t.d[0];
  const double r = 2.0 * std::abs(t.off);
  for (double dj : t.d) {
    lo = std::min(lo, dj - r);
    hi = std::max(hi, dj + r);
  }
  for (int iter = 0; iter < 220; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (sturm_count(t, mid) >= k + 1) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Inverse iteration at the (already accurate) bisection value.
std::vector<double> inverse_iterate(const Tridiag& t, double lambda,
                                    const DirichletGrid& g) {
  const std::size_t n = t.d.size();
  double scale = 0;
  for (double dj : t.d) scale = std::max(scale, std::abs(dj));
  scale = std::max(scale, std::abs(t.off));

  std::vector<double> lower(n - 1, t.off), upper(n - 1, t.off);
  std::mt19937_64 rng(0x5eed);
  std::vector<double> x(n, 1.0);

  for (int attempt = 0; attempt < 8; ++attempt) {
    // Slightly off the eigenvalue so the shifted matrix stays invertible.
    const double shift = lambda + scale * 1e-13 * (attempt + 1);
    std::vector<double> diag(n);
    for (std::size_t j = 0; j < n; ++j) diag[j] = t.d[j] - shift;
    for (int sweep = 0; sweep < 3; ++sweep) {
      x = tridiag_solve(lower, diag, upper, x);
      double nrm = 0;
      for (double v : x) nrm += v * v;
      nrm = std::sqrt(nrm * g.dy());
      if (!(nrm > 0) || !std::isfinite(nrm)) break;
      for (double& v : x) v /= nrm;
    }
    // Residual in the grid L2 norm.
    double rss = 0;
    for (std::size_t j = 0; j < n; ++j) {
      double tv = t.d[j] * x[j] - lambda * x[j];
      if (j > 0) tv += t.off * x[j - 1];
      if (j + 1 < n) tv += t.off * x[j + 1];
      rss += tv * tv;
    }
    if (std::isfinite(rss) && std::sqrt(rss * g.dy()) <= 1e-8 * scale) {
      return x;
    }
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : x) v = u(rng);
  }
  throw NoConvergence("inverse iteration failed to reach its residual target");
}

double grid_l2(std::span<const double> v, double dy) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s * dy);
}

}  // namespace

DirichletGrid DirichletGrid::for_gamma(double gamma, int n_min) {
  if (!(gamma > 0)) throw InvalidInput("DirichletGrid: gamma must be positive");
  int n = std::max(n_min, static_cast<int>(std::ceil(8.0 / gamma)) - 1);
  if (n % 2 == 0) ++n;
  return DirichletGrid{n};
}

EigenPair lowest_eigenpair(std::span<const double> q_nodes, DirichletGrid g) {
  if (g.n < 16) throw InvalidInput("lowest_eigenpair: grid too small");
  if (static_cast<int>(q_nodes.size()) != g.n) {
    throw InvalidInput("lowest_eigenpair: potential/grid size mismatch");
  }
  const Tridiag t = Tridiag::assemble(q_nodes, g);
  EigenPair pair;
  pair.grid = g;
  pair.lambda = bisect_eigenvalue(t, 0);
  pair.phi = inverse_iterate(t, pair.lambda, g);

  const double nrm = grid_l2(pair.phi, g.dy());
  for (double& v : pair.phi) v /= nrm;
  // Fix the sign by the value nearest y = 0 (ground state has no node).
  const int mid = (g.n - 1) / 2;
  double anchor = pair.phi[mid];
  if (std::abs(anchor) < 1e-14) {
    anchor = *std::max_element(pair.phi.begin(), pair.phi.end(),
                               [](double a, double b) {
                                 return std::abs(a) < std::abs(b);
                               });
  }
  if (anchor < 0) {
    for (double& v : pair.phi) v = -v;
  }
  double rss = 0;
  for (int j = 0; j < g.n; ++j) {
    double tv = (t.d[j] - pair.lambda) * pair.phi[j];
    if (j > 0) tv += t.off * pair.phi[j - 1];
    if (j + 1 < g.n) tv += t.off * pair.phi[j + 1];
    rss += tv * tv;
  }
  pair.residual = std::sqrt(rss * g.dy());
  return pair;
}

EigenPair lowest_eigenpair(const RayleighPotential& q, DirichletGrid g) {
  const double gamma = q.profile().gamma();
  if (g.dy() > gamma / 4.0 + 1e-15) {
    throw GridTooCoarse("lowest_eigenpair: dy exceeds gamma/4");
  }
  std::vector<double> qn(g.n);
  for (int j = 0; j < g.n; ++j) qn[j] = q(g.node(j));
  return lowest_eigenpair(qn, g);
}

double eigenvalue_k(std::span<const double> q_nodes, DirichletGrid g, int k) {
  if (k < 0 || k >= g.n) throw InvalidInput("eigenvalue_k: k out of range");
  const Tridiag t = Tridiag::assemble(q_nodes, g);
  return bisect_eigenvalue(t, k);
}

double limit_beta(double a) {
  if (!(a > 0.5)) {
    throw OutOfRange("limit_beta: 2a = beta*coth(beta) needs a > 1/2");
  }
  auto f = [](double b) { return b / std::tanh(b); };
  double lo = 1e-12, hi = 2.0 * a + 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (f(mid) < 2.0 * a) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double beta = 0.5 * (lo + hi);
  // Newton polish; g'(b) = coth(b) - b*(coth(b)^2 - 1).
  for (int i = 0; i < 4; ++i) {
    const double c = 1.0 / std::tanh(beta);
    const double gp = c - beta * (c * c - 1.0);
    if (gp == 0) break;
    beta -= (beta * c - 2.0 * a) / gp;
  }
  if (std::abs(beta / std::tanh(beta) - 2.0 * a) > 1e-12 * std::max(1.0, a)) {
    throw NoConvergence("limit_beta: root refinement stalled");
  }
  return beta;
}

namespace {

struct Refined {
  double lambda_extrap = 0;
  double gap = 0;  // |lambda_n - lambda_{2n+1}|
  EigenPair finest;
};

Refined refine_until(const RayleighPotential& q, int n0, double sqrt_tol,
                     int n_cap = 600000) {
  auto solve_at = [&](int n) {
    DirichletGrid g{n};
    std::vector<double> qn(n);
    for (int j = 0; j < n; ++j) qn[j] = q(g.node(j));
    return lowest_eigenpair(qn, g);
  };
  EigenPair coarse = solve_at(n0);
  for (int n = 2 * n0 + 1;; n = 2 * n + 1) {
    EigenPair fine = solve_at(n);
    const double s0 = std::sqrt(std::max(0.0, -coarse.lambda));
    const double s1 = std::sqrt(std::max(0.0, -fine.lambda));
    if (std::abs(s1 - s0) <= sqrt_tol || n > n_cap) {
      Refined r;
      r.gap = std::abs(fine.lambda - coarse.lambda);
      r.lambda_extrap = fine.lambda + (fine.lambda - coarse.lambda) / 3.0;
      r.finest = std::move(fine);
      if (std::abs(s1 - s0) > sqrt_tol) {
        throw NoConvergence("eigenvalue grid refinement exceeded its cap");
      }
      return r;
    }
    coarse = std::move(fine);
  }
}

}  // namespace

ConvergenceStudy convergence_study(double a, std::span<const double> gammas,
                                   double sqrt_tol) {
  ConvergenceStudy study;
  study.beta_limit = limit_beta(a);
  std::vector<double> lg, le;
  for (double gamma : gammas) {
    const RayleighPotential q(ShearProfile::erf_family(gamma, a));
    const DirichletGrid g0 = DirichletGrid::for_gamma(gamma);
    const Refined r = refine_until(q, g0.n, sqrt_tol);
    ConvergenceRow row;
    row.gamma = gamma;
    row.n = r.finest.grid.n;
    row.sqrt_neg_lambda = std::sqrt(std::max(0.0, -r.lambda_extrap));
    row.error = std::abs(row.sqrt_neg_lambda - study.beta_limit);
    study.rows.push_back(row);
    if (row.error > 0) {
      lg.push_back(std::log(gamma));
      le.push_back(std::log(row.error));
    }
  }
  if (lg.size() >= 2) {
    study.fitted_exponent = linear_fit(lg, le).slope;
  }
  return study;
}

double rayleigh_quotient(std::span<const double> q_nodes, DirichletGrid g,
                         std::span<const double> phi) {
  if (static_cast<int>(q_nodes.size()) != g.n ||
      static_cast<int>(phi.size()) != g.n) {
    throw InvalidInput("rayleigh_quotient: size mismatch");
  }
  const double dy = g.dy();
  if (std::abs(grid_l2(phi, dy) - 1.0) > 1e-8) {
    throw NotNormalized("rayleigh_quotient: phi is not L2-normalized");
  }
  // phi' energy including the Dirichlet end segments; this reproduces the
  // tridiagonal quadratic form exactly.
  double grad = phi[0] * phi[0] + phi[g.n - 1] * phi[g.n - 1];
  for (int j = 0; j + 1 < g.n; ++j) {
    const double d = phi[j + 1] - phi[j];
    grad += d * d;
  }
  double pot = 0;
  for (int j = 0; j < g.n; ++j) pot += q_nodes[j] * phi[j] * phi[j];
  return grad / dy + pot * dy;
}

ConvergedEigenvalue grid_converged_lowest(const RayleighPotential& q,
                                          double sqrt_tol, int n_min) {
  const DirichletGrid g0 = DirichletGrid::for_gamma(q.profile().gamma(), n_min);
  Refined r = refine_until(q, g0.n, sqrt_tol);
  ConvergedEigenvalue out;
  out.lambda = r.lambda_extrap;
  out.grid_error = r.gap;
  out.finest = std::move(r.finest);
  return out;
}

ConvergedEigenvalue grid_converged_lowest_fn(
    const std::function<double(double)>& q, double rel_tol, int n_min) {
  if (!q) throw InvalidInput("grid_converged_lowest_fn: empty potential");
  auto solve_at = [&](int n) {
    DirichletGrid g{n};
    std::vector<double> qn(n);
    for (int j = 0; j < n; ++j) qn[j] = q(g.node(j));
    return lowest_eigenpair(qn, g);
  };
  int n0 = std::max(n_min, 63);
  if (n0 % 2 == 0) ++n0;
  EigenPair coarse = solve_at(n0);
  for (int n = 2 * n0 + 1;; n = 2 * n + 1) {
    EigenPair fine = solve_at(n);
    const double gap = std::abs(fine.lambda - coarse.lambda);
    if (gap <= rel_tol * std::max(1.0, std::abs(fine.lambda)) || n > 600000) {
      if (gap > rel_tol * std::max(1.0, std::abs(fine.lambda))) {
        throw NoConvergence("eigenvalue grid refinement exceeded its cap");
      }
      ConvergedEigenvalue out;
      out.lambda = fine.lambda + (fine.lambda - coarse.lambda) / 3.0;
      out.grid_error = gap;
      out.finest = std::move(fine);
      return out;
    }
    coarse = std::move(fine);
  }
}

}  // namespace couette
