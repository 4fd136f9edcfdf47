#pragma once

#include <functional>
#include <span>
#include <vector>

#include "couette/errors.hpp"
#include "couette/profiles.hpp"

namespace couette {

// Lowest Dirichlet eigenpair of  -phi'' + Q(y) phi = lambda phi  on (-1, 1),
// discretized with second-order central differences on a uniform grid and
// solved by Sturm-sequence bisection plus inverse iteration.

struct GridTooCoarse : InvalidInput {
  using InvalidInput::InvalidInput;
};
struct NoConvergence : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};
struct NotNormalized : InvalidInput {
  using InvalidInput::InvalidInput;
};
struct OutOfRange : InvalidInput {
  using InvalidInput::InvalidInput;
};

// Interior nodes of a uniform grid on [-1, 1]:  y_j = -1 + (j+1)*dy,
// j = 0..n-1, dy = 2/(n+1).  Endpoint values are the Dirichlet zeros.
struct DirichletGrid {
  int n = 0;

  double dy() const { return 2.0 / (n + 1); }
  double node(int j) const { return -1.0 + (j + 1) * dy(); }

  // Smallest odd n honoring the resolution rule dy <= gamma/4.
  static DirichletGrid for_gamma(double gamma, int n_min = 511);
};

struct EigenPair {
  double lambda = 0;
  std::vector<double> phi;  // interior values, L2-normalized, phi(near 0) > 0
  double residual = 0;      // L2 norm of (T - lambda) phi
  DirichletGrid grid;
};

// Potential sampled at the grid nodes.
EigenPair lowest_eigenpair(std::span<const double> q_nodes, DirichletGrid g);

// Convenience overload; enforces dy <= gamma/4 for the profile's gamma.
EigenPair lowest_eigenpair(const RayleighPotential& q, DirichletGrid g);

// k-th smallest eigenvalue only (k = 0 is the lowest).
double eigenvalue_k(std::span<const double> q_nodes, DirichletGrid g, int k);

// Root of  2a = beta * coth(beta),  the gamma -> 0 limit of sqrt(-lambda)
// for the erf family.  Unique for a > 1/2; OutOfRange otherwise.
double limit_beta(double a);

// sqrt(-lambda) for a list of gammas at fixed a, each grid-converged by
// doubling until the change is below `sqrt_tol`, reported with the
// Richardson-extrapolated eigenvalue.
struct ConvergenceRow {
  double gamma = 0;
  double sqrt_neg_lambda = 0;
  double error = 0;  // |sqrt(-lambda) - limit_beta(a)|
  int n = 0;         // finest grid used
};
struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  double beta_limit = 0;
  double fitted_exponent = 0;  // slope of log(error) vs log(gamma)
};
ConvergenceStudy convergence_study(double a, std::span<const double> gammas,
                                   double sqrt_tol = 5e-7);

// Discrete Rayleigh quotient ||phi'||^2 + <Q phi, phi> for an L2-normalized
// interior vector (NotNormalized if ||phi|| deviates by more than 1e-8).
double rayleigh_quotient(std::span<const double> q_nodes, DirichletGrid g,
                         std::span<const double> phi);

// Lowest eigenvalue converged by grid doubling, with the final Richardson
// extrapolation and an error estimate for the returned value.
struct ConvergedEigenvalue {
  double lambda = 0;          // extrapolated
  double grid_error = 0;      // |lambda(n) - lambda(2n+1)| at the last step
  EigenPair finest;           // pair on the finest grid solved
};
ConvergedEigenvalue grid_converged_lowest(const RayleighPotential& q,
                                          double sqrt_tol = 1e-7,
                                          int n_min = 511);

// Same doubling loop for an arbitrary continuous potential.  The stopping
// rule here is on the eigenvalue itself (relative), which stays meaningful
// when lambda is positive and sqrt(-lambda) would be identically zero.
ConvergedEigenvalue grid_converged_lowest_fn(
    const std::function<double(double)>& q, double rel_tol = 1e-7,
    int n_min = 511);

}  // namespace couette
