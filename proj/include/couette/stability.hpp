#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "couette/profiles.hpp"
#include "couette/spectral.hpp"

namespace couette {

struct Inflection {
  double y = 0;        // where U'' changes sign
  double u_value = 0;  // inflection value U(y)
};

struct InflectionData {
  std::vector<Inflection> points;
  bool degenerate = false;  // U'' identically zero on a region (Couette-like)
};

// Sign-change scan of U'' with root polish. The profile overload uses the
// closed-form second derivative; the sampled overload works on a spline.
InflectionData find_inflections(const ShearProfile& profile);
InflectionData find_inflections(std::span<const double> y,
                                std::span<const double> u);

enum class Verdict { Stable, Unstable, Indeterminate };

struct InflectionEigen {
  Inflection inflection;
  double lambda = 0;      // lowest Dirichlet eigenvalue of -d^2/dy^2 + Q_i
  double grid_error = 0;  // refinement gap, used for the decision margin
};

struct StabilityVerdict {
  Verdict verdict = Verdict::Indeterminate;
  double period = 0;
  double threshold = 0;  // -(2 pi / T)^2
  std::vector<InflectionEigen> eigenvalues;
  bool degenerate = false;
  // Set on the Unstable arm: instability holds for every period > t_min.
  double t_min = 0;
};

// Inflection-value criterion: Stable when every per-inflection lowest
// eigenvalue clears -(2 pi/T)^2 by ten grid errors; Unstable only for the
// single-inflection-at-zero class with a certified negative eigenvalue and
// T beyond the instability window; Indeterminate otherwise.
StabilityVerdict classify(const ShearProfile& profile, double period);
StabilityVerdict classify(std::span<const double> y, std::span<const double> u,
                          double period);

struct PeriodWindow {
  bool empty = true;
  double t_min = 0;  // window is (t_min, infinity) when not empty
};

// Periods destabilized by the profile's single inflection at zero: empty when
// the lowest eigenvalue is nonnegative.
PeriodWindow unstable_period_window(const ShearProfile& profile);

struct SampledProfile {
  std::vector<double> y;
  std::vector<double> u;
};

// Seeded monotone shear U = y + small smooth perturbation, scaled so that
// ||U' - 1||_{H^2} lands in [0.2, 1] * h2_bound.
SampledProfile random_near_couette(std::uint64_t seed, double h2_bound,
                                   int n_samples);

}  // namespace couette
