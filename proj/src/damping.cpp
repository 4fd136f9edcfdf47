#include "couette/damping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace couette {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxFinePoints = 1 << 20;

using Complex = std::complex<double>;

// Scaled Dirichlet factors, all bounded by 1/2 for any |k|:
//   hat_u1(y) = sinh(|k|(y+1)) e^{-|k|(y+1)},  hat_u2(y) = sinh(|k|(1-y)) e^{-|k|(1-y)}
double hat_u1(double kk, double y) { return 0.5 * (1.0 - std::exp(-2.0 * kk * (y + 1.0))); }
double hat_u2(double kk, double y) { return 0.5 * (1.0 - std::exp(-2.0 * kk * (1.0 - y))); }
double hat_v1(double kk, double y) { return 0.5 * (1.0 + std::exp(-2.0 * kk * (y + 1.0))); }
double hat_v2(double kk, double y) { return 0.5 * (1.0 + std::exp(-2.0 * kk * (1.0 - y))); }

double trapezoid_sq(std::span<const Complex> v, double dy) {
  double s = 0.5 * (std::norm(v.front()) + std::norm(v.back()));
  for (std::size_t i = 1; i + 1 < v.size(); ++i) s += std::norm(v[i]);
  return s * dy;
}

}  // namespace

ModalVorticity ModalVorticity::from_function(int k, Evaluator f, int n_samples) {
  if (k == 0) throw InvalidInput("ModalVorticity: k must be nonzero");
  if (!f) throw InvalidInput("ModalVorticity: empty evaluator");
  if (n_samples < 65 || n_samples % 2 == 0) {
    throw InvalidInput("ModalVorticity: need an odd sample count >= 65");
  }
  std::vector<Complex> s(n_samples);
  const double dy = 2.0 / (n_samples - 1);
  for (int i = 0; i < n_samples; ++i) s[i] = f(-1.0 + i * dy);
  ModalVorticity m = from_samples(k, std::move(s));
  m.f_ = std::move(f);
  return m;
}

ModalVorticity ModalVorticity::from_samples(int k, std::vector<Complex> samples) {
  if (k == 0) throw InvalidInput("ModalVorticity: k must be nonzero");
  if (samples.size() < 65 || samples.size() % 2 == 0) {
    throw InvalidInput("ModalVorticity: need an odd sample count >= 65");
  }
  ModalVorticity m;
  m.k_ = k;
  m.samples_ = std::move(samples);
  std::vector<double> xs(m.samples_.size()), re(m.samples_.size()), im(m.samples_.size());
  for (int i = 0; i < m.size(); ++i) {
    xs[i] = m.node(i);
    re[i] = m.samples_[i].real();
    im[i] = m.samples_[i].imag();
  }
  m.re_ = CubicSpline(xs, re, CubicSpline::Boundary::Natural);
  m.im_ = CubicSpline(xs, im, CubicSpline::Boundary::Natural);
  return m;
}

Complex ModalVorticity::eval(double y) const {
  if (f_) return f_(y);
  return {re_(y), im_(y)};
}

std::vector<Complex> free_stream(const ModalVorticity& mode, double t) {
  if (t < 0) throw InvalidInput("free_stream: t must be nonnegative");
  std::vector<Complex> out(mode.size());
  for (int i = 0; i < mode.size(); ++i) {
    const double y = mode.node(i);
    const double phase = -mode.k() * t * y;
    out[i] = mode.samples()[i] * Complex(std::cos(phase), std::sin(phase));
  }
  return out;
}

double green_function(int k, double y, double y0) {
  if (k == 0) throw InvalidInput("green_function: k must be nonzero");
  if (y < -1 || y > 1 || y0 < -1 || y0 > 1) {
    throw InvalidInput("green_function: arguments outside [-1,1]");
  }
  const double kk = std::abs(static_cast<double>(k));
  const double lo = std::min(y, y0), hi = std::max(y, y0);
  if (kk < 30.0) {
    return std::sinh(kk * (lo + 1.0)) * std::sinh(kk * (1.0 - hi)) /
           (kk * std::sinh(2.0 * kk));
  }
  // sinh(a) sinh(b) / sinh(2k) with a + b + |y-y0| = 2k, written so that all
  // exponentials are decaying.
  return 2.0 * hat_u1(kk, lo) * hat_u2(kk, hi) * std::exp(-kk * (hi - lo)) /
         (kk * (1.0 - std::exp(-4.0 * kk)));
}

std::vector<Complex> ModalStream::psi_at_base() const {
  std::vector<Complex> out;
  for (int i = 0; i < fine_n; i += base_stride) out.push_back(psi[i]);
  return out;
}

std::vector<Complex> ModalStream::psi_prime_at_base() const {
  std::vector<Complex> out;
  for (int i = 0; i < fine_n; i += base_stride) out.push_back(psi_prime[i]);
  return out;
}

double ModalStream::l2_psi() const { return std::sqrt(trapezoid_sq(psi, dy())); }

double ModalStream::l2_psi_prime() const {
  return std::sqrt(trapezoid_sq(psi_prime, dy()));
}

namespace {

// Direct second-order solve of (-d^2/dy^2 + k^2) psi = g, Dirichlet, on a
// grid with n samples (endpoints included); returns interior+boundary values.
std::vector<Complex> fd_solve(const ModalVorticity& mode, double t, int n) {
  const double dy = 2.0 / (n - 1);
  const int ni = n - 2;
  const double k2 = static_cast<double>(mode.k()) * mode.k();
  std::vector<double> lower(ni - 1, -1.0 / (dy * dy)), upper(ni - 1, -1.0 / (dy * dy));
  std::vector<double> diag(ni, 2.0 / (dy * dy) + k2);
  std::vector<double> re(ni), im(ni);
  for (int j = 0; j < ni; ++j) {
    const double y = -1.0 + (j + 1) * dy;
    const Complex g = mode.eval(y) *
                      std::exp(Complex(0.0, -mode.k() * t * y));
    re[j] = g.real();
    im[j] = g.imag();
  }
  const std::vector<double> xr = tridiag_solve(lower, diag, upper, re);
  const std::vector<double> xi = tridiag_solve(lower, diag, upper, im);
  std::vector<Complex> out(n, Complex(0, 0));
  for (int j = 0; j < ni; ++j) out[j + 1] = {xr[j], xi[j]};
  return out;
}

int refine_to_at_least(int base_n, int wanted, int* stride_out) {
  int n = base_n, stride = 1;
  while (n < wanted) {
    n = 2 * n - 1;
    stride *= 2;
  }
  if (stride_out) *stride_out = stride;
  return n;
}

}  // namespace

ModalStream modal_stream(const ModalVorticity& mode, double t) {
  if (t < 0) throw InvalidInput("modal_stream: t must be nonnegative");
  const double kk = std::abs(static_cast<double>(mode.k()));
  const double kt = kk * t;

  // Fine grid: at least 16 points per oscillation period of exp(-ikty).
  const int wanted = static_cast<int>(std::ceil(16.0 * kt / kPi)) + 2;
  int stride = 1;
  const int n = refine_to_at_least(mode.size(), wanted, &stride);
  if (n > kMaxFinePoints) {
    throw OscillationUnresolved("modal_stream: refinement cap exceeded");
  }
  const double dy = 2.0 / (n - 1);

  // Free-streamed source at arbitrary points.
  auto g = [&](double y) {
    return mode.eval(y) * std::exp(Complex(0.0, -mode.k() * t * y));
  };

  // Per-cell kernel moments, then exponentially damped prefix/suffix sweeps:
  //   Iminus(y_i) = int_{-1}^{y_i} hat_u1(y0) e^{-k (y_i - y0)} g(y0) dy0
  //   Iplus(y_i)  = int_{y_i}^{1} hat_u2(y0) e^{-k (y0 - y_i)} g(y0) dy0
  // Every factor in the sweep is bounded, so no |k| overflows anything.
  const QuadratureRule& rule = gauss_legendre(8);
  std::vector<Complex> p_lo(n - 1), p_hi(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    const double a = -1.0 + i * dy, b = a + dy;
    Complex lo = 0, hi = 0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double y0 = 0.5 * (a + b) + 0.5 * dy * rule.nodes[q];
      const Complex gv = g(y0) * (0.5 * dy * rule.weights[q]);
      lo += hat_u1(kk, y0) * std::exp(-kk * (b - y0)) * gv;
      hi += hat_u2(kk, y0) * std::exp(-kk * (y0 - a)) * gv;
    }
    p_lo[i] = lo;
    p_hi[i] = hi;
  }
  const double damp = std::exp(-kk * dy);
  std::vector<Complex> i_minus(n), i_plus(n);
  i_minus[0] = 0;
  for (int i = 1; i < n; ++i) i_minus[i] = damp * i_minus[i - 1] + p_lo[i - 1];
  i_plus[n - 1] = 0;
  for (int i = n - 2; i >= 0; --i) i_plus[i] = damp * i_plus[i + 1] + p_hi[i];

  ModalStream s;
  s.k = mode.k();
  s.t = t;
  s.fine_n = n;
  s.base_stride = stride;
  s.psi.resize(n);
  s.psi_prime.resize(n);
  const double d0 = 2.0 / (kk * (1.0 - std::exp(-4.0 * kk)));
  for (int i = 0; i < n; ++i) {
    const double y = -1.0 + i * dy;
    s.psi[i] = d0 * (hat_u2(kk, y) * i_minus[i] + hat_u1(kk, y) * i_plus[i]);
    s.psi_prime[i] =
        d0 * kk * (hat_v1(kk, y) * i_plus[i] - hat_v2(kk, y) * i_minus[i]);
  }
  s.psi.front() = s.psi.back() = 0;

  // Cross-check: Richardson-extrapolated tridiagonal solve, on a grid fine
  // enough that the extrapolated truncation error sits below 1e-9.
  int check_n = refine_to_at_least(
      mode.size(), static_cast<int>(std::ceil(82.0 * kt)) + 2, nullptr);
  check_n = std::min(check_n, refine_to_at_least(mode.size(), kMaxFinePoints / 2 + 1, nullptr));
  int check_stride = (check_n - 1) / (mode.size() - 1);
  const std::vector<Complex> coarse = fd_solve(mode, t, check_n);
  const std::vector<Complex> fine = fd_solve(mode, t, 2 * check_n - 1);
  double max_diff = 0, max_val = 0;
  for (int b = 0; b < mode.size(); ++b) {
    const int ic = b * check_stride;
    const Complex extrap = (4.0 * fine[2 * ic] - coarse[ic]) / 3.0;
    const Complex mine = s.psi[b * stride];
    max_diff = std::max(max_diff, std::abs(mine - extrap));
    max_val = std::max(max_val, std::abs(mine));
  }
  s.solver_agreement = max_diff / std::max(max_val, 1e-300);
  return s;
}

VelocityNorms velocity_norms(std::span<const ModalVorticity> modes, double t) {
  if (modes.empty()) throw InvalidInput("velocity_norms: no modes");
  std::vector<int> order(modes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const int ka = std::abs(modes[a].k()), kb = std::abs(modes[b].k());
    if (ka != kb) return ka < kb;
    return modes[a].k() < modes[b].k();
  });
  double u2 = 0, v2 = 0;
  for (int idx : order) {
    const ModalStream s = modal_stream(modes[idx], t);
    const double k2 = static_cast<double>(modes[idx].k()) * modes[idx].k();
    const double psi2 = trapezoid_sq(s.psi, s.dy());
    const double dpsi2 = trapezoid_sq(s.psi_prime, s.dy());
    v2 += k2 * psi2;
    u2 += dpsi2;
  }
  return {std::sqrt(2.0 * kPi * u2), std::sqrt(2.0 * kPi * v2)};
}

DecayFit decay_fit(std::span<const ModalVorticity> modes,
                   std::span<const double> times, NormKind kind) {
  if (times.size() < 3) throw InvalidInput("decay_fit: need at least 3 times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && times[i] <= times[i - 1]) {
      throw InvalidInput("decay_fit: times must increase strictly");
    }
  }
  if (times.front() < 5.0) {
    throw InvalidInput("decay_fit: minimum time is 5 (earlier transients pollute the fit)");
  }
  if (times.back() < 10.0 * times.front()) {
    throw InvalidInput("decay_fit: times must span at least a decade");
  }
  DecayFit fit;
  fit.kind = kind;
  fit.times.assign(times.begin(), times.end());
  for (double t : times) {
    const VelocityNorms vn = velocity_norms(modes, t);
    double value = 0;
    switch (kind) {
      case NormKind::U: value = vn.u; break;
      case NormKind::V: value = vn.v; break;
      case NormKind::Velocity: value = std::hypot(vn.u, vn.v); break;
    }
    if (!(value > 0) || !std::isfinite(value)) {
      throw NonPositiveNorm("decay_fit: norm underflowed");
    }
    fit.norms.push_back(value);
  }
  std::vector<double> lt(times.size()), ln(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    lt[i] = std::log(times[i]);
    ln[i] = std::log(fit.norms[i]);
  }
  const LinearFit lf = linear_fit(lt, ln);
  fit.exponent = lf.slope;
  fit.fit_residual = lf.rms;
  for (std::size_t i = 0; i < times.size(); ++i) {
    fit.constant = std::max(
        fit.constant, std::pow(times[i], std::abs(fit.exponent)) * fit.norms[i]);
  }
  return fit;
}

AsymptoticsTable single_mode_asymptotics(const ModalVorticity& mode,
                                         std::span<const double> t_list) {
  if (t_list.size() < 2) {
    throw InvalidInput("single_mode_asymptotics: need at least 2 times");
  }
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (!(t_list[i] > 0) || (i > 0 && t_list[i] <= t_list[i - 1])) {
      throw InvalidInput("single_mode_asymptotics: times must be positive and increasing");
    }
  }
  const double dy_base = mode.dy();
  std::vector<std::vector<Complex>> profiles;
  for (double t : t_list) {
    const ModalStream s = modal_stream(mode, t);
    std::vector<Complex> f = s.psi_at_base();
    for (int i = 0; i < mode.size(); ++i) {
      const double phase = mode.k() * t * mode.node(i);
      f[i] *= t * t * Complex(std::cos(phase), std::sin(phase));
    }
    profiles.push_back(std::move(f));
  }
  auto dist = [&](const std::vector<Complex>& a, const std::vector<Complex>& b) {
    std::vector<Complex> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return std::sqrt(trapezoid_sq(d, dy_base));
  };
  AsymptoticsTable table;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    AsymptoticsRow row;
    row.t = t_list[i];
    row.norm_f = std::sqrt(trapezoid_sq(profiles[i], dy_base));
    row.diff_prev = i == 0 ? 0.0 : dist(profiles[i], profiles[i - 1]);
    row.diff_final = dist(profiles[i], profiles.back());
    table.rows.push_back(row);
  }
  table.limit_norm = table.rows.back().norm_f;
  table.nonzero = table.limit_norm > 1e-4;
  return table;
}

std::vector<ModalVorticity> rough_field(std::uint64_t seed, int k_max,
                                        double rho, int n_samples) {
  if (k_max < 1) throw InvalidInput("rough_field: need k_max >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<ModalVorticity> modes;
  for (int k = 1; k <= k_max; ++k) {
    const int y_modes = 6;
    std::vector<Complex> c(y_modes + 1);
    double energy = 0;
    for (int j = 1; j <= y_modes; ++j) {
      c[j] = Complex(unit(rng), unit(rng)) / static_cast<double>(j);
      energy += std::norm(c[j]);
    }
    const double scale = std::pow(static_cast<double>(k), -rho) / std::sqrt(energy);
    auto f = [c, scale, y_modes](double y) {
      Complex v = 0;
      for (int j = 1; j <= y_modes; ++j) {
        v += c[j] * std::sin(0.5 * j * kPi * (y + 1.0));
      }
      return scale * v;
    };
    modes.push_back(ModalVorticity::from_function(k, f, n_samples));
    auto fc = [f](double y) { return std::conj(f(y)); };
    modes.push_back(ModalVorticity::from_function(-k, fc, n_samples));
  }
  return modes;
}

ModalVorticity jump_mode(int k, int n_samples) {
  auto f = [](double y) -> Complex {
    if (y > 0) return 0.5;
    if (y < 0) return -0.5;
    return 0.0;
  };
  return ModalVorticity::from_function(k, f, n_samples);
}

}  // namespace couette
