#include "couette/sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace couette {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<std::complex<double>> complexify(std::span<const double> v) {
  return {v.begin(), v.end()};
}

bool nearly_integer(double s) { return std::abs(s - std::round(s)) < 1e-12; }

}  // namespace

Field1D Field1D::from_samples(std::vector<double> samples) {
  if (samples.size() < 64) {
    throw InvalidInput("Field1D: need at least 64 samples");
  }
  Field1D f;
  f.samples_ = std::move(samples);
  std::vector<double> xs(f.samples_.size());
  for (int i = 0; i < f.size(); ++i) xs[i] = f.node(i);
  f.spline_ = CubicSpline(xs, f.samples_, CubicSpline::Boundary::Natural);
  return f;
}

Field1D Field1D::from_function(Evaluator fn, int n_samples) {
  if (!fn) throw InvalidInput("Field1D: empty evaluator");
  if (n_samples < 64) throw InvalidInput("Field1D: need at least 64 samples");
  std::vector<double> s(n_samples);
  const double dx = 2.0 / (n_samples - 1);
  for (int i = 0; i < n_samples; ++i) s[i] = fn(-1.0 + i * dx);
  Field1D f = from_samples(std::move(s));
  f.f_ = std::move(fn);
  return f;
}

double Field1D::eval(double y) const { return f_ ? f_(y) : spline_(y); }

Field1D Field1D::resampled(int n_samples) const {
  if (f_) return from_function(f_, n_samples);
  std::vector<double> s(n_samples);
  const double dx = 2.0 / (n_samples - 1);
  for (int i = 0; i < n_samples; ++i) s[i] = spline_(-1.0 + i * dx);
  return from_samples(std::move(s));
}

double Field1D::sup_abs() const {
  double m = 0;
  for (double v : samples_) m = std::max(m, std::abs(v));
  return m;
}

double gagliardo_normalizer(double sigma) {
  if (!(sigma > 0) || !(sigma < 1)) {
    throw InvalidInput("gagliardo_normalizer: sigma must lie in (0,1)");
  }
  return 2.0 * kPi / (std::tgamma(1.0 + 2.0 * sigma) * std::sin(kPi * sigma));
}

double l2_norm_sq(std::span<const std::complex<double>> v, double dx) {
  if (v.size() < 2) throw InvalidInput("l2_norm_sq: too few samples");
  double s = 0.5 * (std::norm(v.front()) + std::norm(v.back()));
  for (std::size_t i = 1; i + 1 < v.size(); ++i) s += std::norm(v[i]);
  return s * dx;
}

std::vector<std::complex<double>> fd_derivative(
    std::span<const std::complex<double>> v, double dx) {
  const std::size_t n = v.size();
  if (n < 3) throw InvalidInput("fd_derivative: too few samples");
  std::vector<std::complex<double>> d(n);
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dx);
  d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dx);
  return d;
}

double gagliardo_seminorm_sq(std::span<const std::complex<double>> v,
                             double dx, double sigma) {
  const int n = static_cast<int>(v.size());
  if (n < 8) throw InvalidInput("gagliardo_seminorm_sq: too few samples");
  std::vector<double> pow_table(n);
  for (int d = 1; d < n; ++d) {
    pow_table[d] = std::pow(d * dx, -(1.0 + 2.0 * sigma));
  }
  // Tensor trapezoid over pairs at least one cell apart; pairs exactly one
  // cell apart sit on the excluded band's edge and carry half weight.
  double outer = 0;
  for (int i = 0; i < n; ++i) {
    const double ci = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double cj = (j == n - 1) ? 0.5 : 1.0;
      const double edge = (j - i == 1) ? 0.5 : 1.0;
      outer += ci * cj * edge * std::norm(v[i] - v[j]) * pow_table[j - i];
    }
  }
  outer *= 2.0 * dx * dx;
  // Excluded band |y-z| < dx: |v(y)-v(z)|^2 ~ v'(y)^2 (y-z)^2 there, so the
  // band integrates to ||v'||^2 * 2 dx^{2-2 sigma}/(2-2 sigma) to leading
  // order.
  const auto d1 = fd_derivative(v, dx);
  const double band = l2_norm_sq(d1, dx) * 2.0 *
                      std::pow(dx, 2.0 - 2.0 * sigma) / (2.0 - 2.0 * sigma);
  return (outer + band) / gagliardo_normalizer(sigma);
}

double hs_norm_sq_samples(std::span<const std::complex<double>> v, double dx,
                          double s) {
  if (!(s >= 0.0) || !(s <= 3.0)) {
    throw InvalidInput("hs_norm: order must lie in [0,3]");
  }
  const int m = nearly_integer(s) ? static_cast<int>(std::round(s))
                                  : static_cast<int>(std::floor(s));
  const double sigma = s - m;
  double total = 0;
  std::vector<std::complex<double>> level(v.begin(), v.end());
  for (int j = 0;; ++j) {
    total += l2_norm_sq(level, dx);
    if (j == m) break;
    level = fd_derivative(level, dx);
  }
  if (sigma > 0) total += gagliardo_seminorm_sq(level, dx, sigma);
  return total;
}

double hs_norm_1d(const Field1D& u, double s) {
  const double full =
      std::sqrt(hs_norm_sq_samples(complexify(u.samples()), u.dx(), s));
  int nh = (u.size() + 1) / 2;
  if (nh % 2 == 0) ++nh;
  nh = std::max(nh, 33);
  std::vector<std::complex<double>> half(nh);
  const double dxh = 2.0 / (nh - 1);
  for (int i = 0; i < nh; ++i) half[i] = u.eval(-1.0 + i * dxh);
  const double coarse = std::sqrt(hs_norm_sq_samples(half, dxh, s));
  const double scale = std::max(full, 1e-12 * (1.0 + u.sup_abs()));
  if (std::abs(full - coarse) > 0.01 * scale) {
    throw UnresolvedField("hs_norm_1d: value moved by more than 1% at half resolution");
  }
  return full;
}

namespace {

// int_0^inf xi^{2s} e^{-xi^2/2} dxi: truncated power series on [0, h], then
// geometrically graded Gauss panels out to where the Gaussian tail is dust.
double cs_quadrature(double s) {
  const double h = 1e-3;
  double total = std::pow(h, 2 * s + 1) / (2 * s + 1) -
                 std::pow(h, 2 * s + 3) / (2 * (2 * s + 3));
  const QuadratureRule& rule = gauss_legendre(16);
  double a = h;
  while (a < 16.0) {
    const double b = std::min(2 * a, 16.0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double xi = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
      total += 0.5 * (b - a) * rule.weights[i] *
               std::pow(xi, 2 * s) * std::exp(-0.5 * xi * xi);
    }
    a = b;
  }
  return total;
}

}  // namespace

GaussianScaling gaussian_hs_scaling(double s, std::span<const double> gammas) {
  if (!(s >= 0.0) || !(s <= 1.4)) {
    throw InvalidInput("gaussian_hs_scaling: s must lie in [0, 1.4]");
  }
  if (gammas.size() < 3) {
    throw InvalidInput("gaussian_hs_scaling: need at least 3 gammas");
  }
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0) || gammas[i] > 0.2) {
      throw InvalidInput("gaussian_hs_scaling: gammas must lie in (0, 0.2]");
    }
    if (i > 0 && gammas[i] >= gammas[i - 1]) {
      throw InvalidInput("gaussian_hs_scaling: gammas must decrease");
    }
  }
  GaussianScaling out;
  for (double gamma : gammas) {
    int n = std::max(2049, static_cast<int>(std::ceil(48.0 / gamma)));
    if (n % 2 == 0) ++n;
    Field1D u = Field1D::from_function(
        [gamma](double y) { return gamma * std::exp(-(y / gamma) * (y / gamma)); },
        n);
    out.rows.push_back({gamma, hs_norm_1d(u, s)});
  }
  // Drop the largest gamma: it carries the worst truncation-to-the-line bias.
  std::vector<double> lg, ln;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    lg.push_back(std::log(out.rows[i].gamma));
    ln.push_back(std::log(out.rows[i].norm));
  }
  const LinearFit fit = linear_fit(lg, ln);
  out.fitted_exponent = fit.slope;
  out.fitted_prefactor = std::exp(fit.intercept);
  out.cs_closed_form = std::sqrt(cs_quadrature(s));
  return out;
}

Field2D Field2D::from_modes(double period, std::vector<Mode> modes) {
  if (!(period > 0)) throw InvalidInput("Field2D: period must be positive");
  if (modes.empty()) throw InvalidInput("Field2D: no modes");
  const std::size_t ny = modes.front().values.size();
  if (ny < 64) throw InvalidInput("Field2D: need at least 64 y-samples");
  std::sort(modes.begin(), modes.end(),
            [](const Mode& a, const Mode& b) { return a.k < b.k; });
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].values.size() != ny) {
      throw InvalidInput("Field2D: inconsistent y-sample counts");
    }
    if (i > 0 && modes[i].k == modes[i - 1].k) {
      throw InvalidInput("Field2D: duplicate mode index");
    }
  }
  Field2D f;
  f.period_ = period;
  f.ny_ = static_cast<int>(ny);
  f.modes_ = std::move(modes);
  return f;
}

Field2D Field2D::from_samples(double period,
                              const std::vector<std::vector<double>>& values) {
  if (!(period > 0)) throw InvalidInput("Field2D: period must be positive");
  const int nx = static_cast<int>(values.size());
  if (nx < 4) throw InvalidInput("Field2D: need at least 4 x-slices");
  const std::size_t ny = values.front().size();
  for (const auto& row : values) {
    if (row.size() != ny) throw InvalidInput("Field2D: ragged sample grid");
  }
  const int kmax = (nx - 1) / 2;
  std::vector<Mode> modes;
  for (int k = -kmax; k <= kmax; ++k) {
    Mode m;
    m.k = k;
    m.values.resize(ny);
    for (std::size_t j = 0; j < ny; ++j) {
      std::complex<double> acc = 0;
      for (int i = 0; i < nx; ++i) {
        const double phase = -2.0 * kPi * k * i / nx;
        acc += values[i][j] * std::complex<double>(std::cos(phase), std::sin(phase));
      }
      m.values[j] = acc / static_cast<double>(nx);
    }
    modes.push_back(std::move(m));
  }
  return from_modes(period, std::move(modes));
}

const Field2D::Mode* Field2D::mode(int k) const {
  auto it = std::lower_bound(
      modes_.begin(), modes_.end(), k,
      [](const Mode& m, int kk) { return m.k < kk; });
  if (it == modes_.end() || it->k != k) return nullptr;
  return &*it;
}

double hs_norm_2d(const Field2D& h, double sx, double sy) {
  double total = 0;
  double scale = 0;
  for (const auto& m : h.modes()) {
    scale = std::max(scale, std::sqrt(l2_norm_sq(m.values, h.dy())));
  }
  for (const auto& m : h.modes()) {
    if (m.k == 0) {
      const double l2 = std::sqrt(l2_norm_sq(m.values, h.dy()));
      if (sx < 0 && l2 > 1e-12 * (1.0 + scale)) {
        throw ZeroMeanViolation("hs_norm_2d: negative x-order needs a zero-mean field");
      }
      if (sx == 0) total += hs_norm_sq_samples(m.values, h.dy(), sy);
      continue;
    }
    const double w = std::pow(std::abs(2.0 * kPi * m.k / h.period()), 2.0 * sx);
    total += w * hs_norm_sq_samples(m.values, h.dy(), sy);
  }
  return std::sqrt(total);
}

double hs_norm_2d_isotropic(const Field2D& h, double s) {
  if (!(s >= 0.0) || !(s <= 3.0)) {
    throw InvalidInput("hs_norm_2d_isotropic: order must lie in [0,3]");
  }
  const int m = nearly_integer(s) ? static_cast<int>(std::round(s))
                                  : static_cast<int>(std::floor(s));
  const double sigma = s - m;
  double total = 0;
  for (const auto& mode : h.modes()) {
    const double kappa = 2.0 * kPi * mode.k / h.period();
    const double w = 1.0 + kappa * kappa;
    std::vector<std::complex<double>> level(mode.values.begin(), mode.values.end());
    for (int j = 0;; ++j) {
      total += std::pow(w, s - j) * l2_norm_sq(level, h.dy());
      if (j == m) break;
      level = fd_derivative(level, h.dy());
    }
    if (sigma > 0) total += gagliardo_seminorm_sq(level, h.dy(), sigma);
  }
  return std::sqrt(h.period() * total);
}

double hardy_ratio(const Field1D& u, double y0, double p, double s) {
  if (y0 < -1.0 || y0 > 1.0) throw InvalidInput("hardy_ratio: y0 outside [-1,1]");
  if (!(s > 0.5) || !(s < 1.5)) {
    throw InvalidInput("hardy_ratio: s must lie in (1/2, 3/2)");
  }
  if (!(p >= 1.0)) throw InvalidInput("hardy_ratio: p must be at least 1");
  const double p_max = 1.0 / (1.5 - s);
  if (p > p_max * (1.0 + 1e-12)) {
    throw ExponentOutOfRange("hardy_ratio: p exceeds 1/(3/2 - s)");
  }
  if (std::abs(u.eval(y0)) > 1e-10 * std::max(1.0, u.sup_abs())) {
    throw NonVanishing("hardy_ratio: u does not vanish at y0");
  }

  const double delta = u.dx();
  const double lo_cut = std::max(-1.0, y0 - delta);
  const double hi_cut = std::min(1.0, y0 + delta);
  const QuadratureRule& rule = gauss_legendre(12);
  auto integrand = [&](double y) {
    return std::pow(std::abs(u.eval(y) / (y - y0)), p);
  };
  auto piece = [&](double a, double b) {
    if (b - a < 1e-15) return 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / delta)));
    double acc = 0;
    for (int q = 0; q < panels; ++q) {
      const double pa = a + (b - a) * q / panels;
      const double pb = a + (b - a) * (q + 1) / panels;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double y = 0.5 * (pa + pb) + 0.5 * (pb - pa) * rule.nodes[i];
        acc += 0.5 * (pb - pa) * rule.weights[i] * integrand(y);
      }
    }
    return acc;
  };
  double total = piece(-1.0, lo_cut) + piece(hi_cut, 1.0);

  // Singular cell: one-sided local model |u| ~ C |y-y0|^theta with the Holder
  // exponent theta = s - 1/2; at the endpoint exponent (where that model is
  // not integrable) the linear model theta = 1 applies.
  double theta = s - 0.5;
  if (1.0 + (theta - 1.0) * p < 1e-6) theta = 1.0;
  auto half_cell = [&](double width, double u_edge) {
    if (width < 1e-15) return 0.0;
    const double c = std::abs(u_edge) / std::pow(width, theta);
    const double expo = 1.0 + (theta - 1.0) * p;
    return std::pow(c, p) * std::pow(width, expo) / expo;
  };
  total += half_cell(y0 - lo_cut, u.eval(lo_cut));
  total += half_cell(hi_cut - y0, u.eval(hi_cut));

  const double denom = hs_norm_1d(u, s);
  if (!(denom > 0)) throw InvalidInput("hardy_ratio: zero field");
  return std::pow(total, 1.0 / p) / denom;
}

Field1D random_band_limited(std::uint64_t seed, int max_mode, int n_samples) {
  if (max_mode < 1) throw InvalidInput("random_band_limited: need max_mode >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> a(max_mode + 1), b(max_mode + 1);
  for (int k = 1; k <= max_mode; ++k) {
    a[k] = unit(rng) / (k * k);
    b[k] = unit(rng) / (k * k);
  }
  auto f = [a, b, max_mode](double y) {
    double v = 0;
    for (int k = 1; k <= max_mode; ++k) {
      const double arg = 0.5 * k * kPi * (y + 1.0);
      v += a[k] * std::cos(arg) + b[k] * std::sin(arg);
    }
    return v;
  };
  return Field1D::from_function(f, n_samples);
}

Field1D enforce_zero_at(const Field1D& u, double y0) {
  const double at = u.eval(y0);
  auto f = [u, y0, at](double y) {
    const double c = std::cos(0.25 * kPi * (y - y0));
    return u.eval(y) - at * c * c;
  };
  return Field1D::from_function(f, u.size());
}

}  // namespace couette
