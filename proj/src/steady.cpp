#include "couette/steady.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include "couette/spectral.hpp"

namespace couette {

namespace {

constexpr double kPi = std::numbers::pi;

// Quintic "smootherstep" complement: 1 at s=0, 0 at s=1, with zero first and
// second derivatives at both ends.
double blend(double s) { return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s); }
double blend_d(double s) { return -30.0 * s * s + 60.0 * s * s * s - 30.0 * s * s * s * s; }
double blend_dd(double s) { return -60.0 * s + 180.0 * s * s - 120.0 * s * s * s; }

// ---- small dense LU with partial pivoting (row-major K x K) ----

void lu_factor(double* m, int* piv, int k) {
  for (int i = 0; i < k; ++i) piv[i] = i;
  for (int col = 0; col < k; ++col) {
    int p = col;
    double best = std::abs(m[col * k + col]);
    for (int r = col + 1; r < k; ++r) {
      const double v = std::abs(m[r * k + col]);
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (p != col) {
      std::swap(piv[col], piv[p]);
      for (int c = 0; c < k; ++c) std::swap(m[col * k + c], m[p * k + c]);
    }
    const double d = m[col * k + col];
    if (d == 0.0) throw NumericalFailure("steady: singular diagonal block");
    const double inv = 1.0 / d;
    for (int r = col + 1; r < k; ++r) {
      const double f = m[r * k + col] * inv;
      m[r * k + col] = f;
      for (int c = col + 1; c < k; ++c) m[r * k + c] -= f * m[col * k + c];
    }
  }
}

// Solve with the factored matrix into x (x holds the rhs on entry).
void lu_solve(const double* m, const int* piv, int k, const double* rhs,
              double* x) {
  for (int i = 0; i < k; ++i) x[i] = rhs[piv[i]];
  for (int i = 0; i < k; ++i) {
    double s = x[i];
    for (int j = 0; j < i; ++j) s -= m[i * k + j] * x[j];
    x[i] = s;
  }
  for (int i = k - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < k; ++j) s -= m[i * k + j] * x[j];
    x[i] = s / m[i * k + i];
  }
}

// Invert in place of `m` (destroyed); result written to `out`.
void invert_block(double* m, double* out, int k, int* piv, double* col,
                  double* sol) {
  lu_factor(m, piv, k);
  for (int c = 0; c < k; ++c) {
    for (int r = 0; r < k; ++r) col[r] = (r == c) ? 1.0 : 0.0;
    lu_solve(m, piv, k, col, sol);
    for (int r = 0; r < k; ++r) out[r * k + c] = sol[r];
  }
}

// y = M x for K x K row-major M.
void matvec(const double* m, const double* x, int k, double* y) {
  for (int r = 0; r < k; ++r) {
    double s = 0;
    const double* row = m + static_cast<std::size_t>(r) * k;
    for (int c = 0; c < k; ++c) s += row[c] * x[c];
    y[r] = s;
  }
}

// Block tridiagonal solver with scalar off-diagonal blocks b*I.  Stores the
// inverses of the eliminated diagonal blocks.
struct BlockTridiag {
  int K = 0, ny = 0;
  double b = 0;
  std::vector<double> inv;  // ny blocks of K*K

  // diag: ny blocks of K*K, consumed.
  void factor(std::vector<double>& diag) {
    const std::size_t kk = static_cast<std::size_t>(K) * K;
    inv.assign(static_cast<std::size_t>(ny) * kk, 0.0);
    std::vector<int> piv(K);
    std::vector<double> col(K), sol(K);
    for (int j = 0; j < ny; ++j) {
      double* dj = diag.data() + j * kk;
      if (j > 0) {
        const double* prev = inv.data() + (j - 1) * kk;
        const double b2 = b * b;
        for (std::size_t t = 0; t < kk; ++t) dj[t] -= b2 * prev[t];
      }
      invert_block(dj, inv.data() + j * kk, K, piv.data(), col.data(),
                   sol.data());
    }
  }

  // In-place solve; r holds ny*K entries.
  void solve(std::vector<double>& r) const {
    const std::size_t kk = static_cast<std::size_t>(K) * K;
    std::vector<double> tmp(K);
    for (int j = 1; j < ny; ++j) {
      matvec(inv.data() + (j - 1) * kk, r.data() + (j - 1) * K, K, tmp.data());
      double* rj = r.data() + j * K;
      for (int m = 0; m < K; ++m) rj[m] -= b * tmp[m];
    }
    matvec(inv.data() + (ny - 1) * kk, r.data() + (ny - 1) * K, K, tmp.data());
    std::copy(tmp.begin(), tmp.end(), r.data() + (ny - 1) * K);
    for (int j = ny - 2; j >= 0; --j) {
      double* rj = r.data() + j * K;
      const double* xnext = r.data() + (j + 1) * K;
      std::vector<double> rhs(K);
      for (int m = 0; m < K; ++m) rhs[m] = rj[m] - b * xnext[m];
      matvec(inv.data() + j * kk, rhs.data(), K, tmp.data());
      std::copy(tmp.begin(), tmp.end(), rj);
    }
  }
};

// Collocation tables for the even cosine basis: nodes xi_q = pi q/(Nq-1),
// synthesis C[q,m] = cos(m xi_q) and the exact analysis inverse A with
// half-weight endpoints.
struct Workspace {
  int K = 0, Nq = 0, ny = 0;
  double dy = 0;
  std::vector<double> psi0;  // interior nodes
  std::vector<double> f0;    // f(psi0)
  std::vector<double> C;     // Nq*K
  std::vector<double> A;     // K*Nq
};

Workspace make_workspace(const NonlinearityF& f, int K, int ny) {
  Workspace ws;
  ws.K = K;
  ws.Nq = 2 * K;
  ws.ny = ny;
  ws.dy = 2.0 / (ny + 1);
  ws.psi0.resize(ny);
  ws.f0.resize(ny);
  const ShearProfile& prof = f.profile();
  for (int j = 0; j < ny; ++j) {
    const double y = -1.0 + (j + 1) * ws.dy;
    ws.psi0[j] = prof.psi0(y);
    ws.f0[j] = f(ws.psi0[j]);
  }
  const int N = ws.Nq - 1;
  ws.C.resize(static_cast<std::size_t>(ws.Nq) * K);
  ws.A.resize(static_cast<std::size_t>(K) * ws.Nq);
  for (int q = 0; q < ws.Nq; ++q) {
    const double xi = kPi * q / N;
    for (int m = 0; m < K; ++m) {
      ws.C[static_cast<std::size_t>(q) * K + m] = std::cos(m * xi);
    }
  }
  for (int m = 0; m < K; ++m) {
    const double norm = 2.0 / (N * (m == 0 ? 2.0 : 1.0));
    for (int q = 0; q < ws.Nq; ++q) {
      const double mu = (q == 0 || q == N) ? 0.5 : 1.0;
      ws.A[static_cast<std::size_t>(m) * ws.Nq + q] =
          mu * norm * std::cos(kPi * m * q / N);
    }
  }
  return ws;
}

struct Scratch {
  std::vector<double> phi_q;  // ny*Nq collocation values of phi
  std::vector<double> F;      // ny*K residual coefficients
  double l2 = 0;
  bool escape = false;
};

void eval_residual(const Workspace& ws, const NonlinearityF& f,
                   const std::vector<double>& c, double alpha_sq,
                   Scratch& s) {
  const int K = ws.K, Nq = ws.Nq, ny = ws.ny;
  const double idy2 = 1.0 / (ws.dy * ws.dy);
  s.phi_q.assign(static_cast<std::size_t>(ny) * Nq, 0.0);
  s.F.assign(static_cast<std::size_t>(ny) * K, 0.0);
  s.escape = false;

  std::vector<double> w(Nq);
  for (int j = 0; j < ny; ++j) {
    const double* cj = c.data() + static_cast<std::size_t>(j) * K;
    double* pq = s.phi_q.data() + static_cast<std::size_t>(j) * Nq;
    for (int q = 0; q < Nq; ++q) {
      double v = 0;
      const double* row = ws.C.data() + static_cast<std::size_t>(q) * K;
      for (int m = 0; m < K; ++m) v += cj[m] * row[m];
      pq[q] = v;
      const double t = ws.psi0[j] + v;
      if (!f.in_core(t)) s.escape = true;
      w[q] = f(t) - ws.f0[j];
    }
    double* Fj = s.F.data() + static_cast<std::size_t>(j) * K;
    for (int m = 0; m < K; ++m) {
      double nm = 0;
      const double* arow = ws.A.data() + static_cast<std::size_t>(m) * Nq;
      for (int q = 0; q < Nq; ++q) nm += arow[q] * w[q];
      Fj[m] = -alpha_sq * m * m * cj[m] - nm;
    }
  }
  // second differences with Dirichlet ends
  for (int j = 0; j < ny; ++j) {
    const double* cj = c.data() + static_cast<std::size_t>(j) * K;
    const double* cm = j > 0 ? c.data() + static_cast<std::size_t>(j - 1) * K : nullptr;
    const double* cp =
        j + 1 < ny ? c.data() + static_cast<std::size_t>(j + 1) * K : nullptr;
    double* Fj = s.F.data() + static_cast<std::size_t>(j) * K;
    for (int m = 0; m < K; ++m) {
      const double lo = cm ? cm[m] : 0.0;
      const double hi = cp ? cp[m] : 0.0;
      Fj[m] += (lo - 2.0 * cj[m] + hi) * idy2;
    }
  }
  double acc = 0;
  for (int m = 0; m < K; ++m) {
    const double wm = kPi * (m == 0 ? 2.0 : 1.0) * ws.dy;
    double sm = 0;
    for (int j = 0; j < ny; ++j) {
      const double v = s.F[static_cast<std::size_t>(j) * K + m];
      sm += v * v;
    }
    acc += wm * sm;
  }
  s.l2 = std::sqrt(acc);
}

double flat_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

const double* s_phi(const Scratch& s, int j, int nq) {
  return s.phi_q.data() + static_cast<std::size_t>(j) * nq;
}

// One bordered Newton solve of F(c, alpha^2) = 0 subject to the linear
// constraint gc.c + ga*alpha^2 = target.
bool bordered_newton(const Workspace& ws, const NonlinearityF& f,
                     std::vector<double>& c, double& alpha_sq,
                     const std::vector<double>& gc, double ga, double target,
                     const SteadyOptions& opt, Scratch& sc) {
  const int K = ws.K, Nq = ws.Nq, ny = ws.ny;
  const std::size_t kk = static_cast<std::size_t>(K) * K;
  const double idy2 = 1.0 / (ws.dy * ws.dy);

  eval_residual(ws, f, c, alpha_sq, sc);
  double conres = flat_dot(gc, c) + ga * alpha_sq - target;
  double merit = std::hypot(sc.l2, conres);

  std::vector<double> diag(static_cast<std::size_t>(ny) * kk);
  std::vector<double> z1(static_cast<std::size_t>(ny) * K);
  std::vector<double> z2(static_cast<std::size_t>(ny) * K);
  std::vector<double> cand(c.size());
  std::vector<double> mrow(Nq);
  BlockTridiag bt;
  bt.K = K;
  bt.ny = ny;
  bt.b = idy2;
  Scratch strial;

  const double con_tol = 1e-12 * (1.0 + std::abs(target));
  for (int it = 0; it < opt.max_newton; ++it) {
    if (sc.l2 <= opt.newton_tol && std::abs(conres) <= con_tol) return true;

    // diagonal blocks: -(alpha^2 m^2 + 2/dy^2) I - A diag(f') C
    for (int j = 0; j < ny; ++j) {
      double* dj = diag.data() + static_cast<std::size_t>(j) * kk;
      const double* pq = s_phi(sc, j, Nq);
      for (int q = 0; q < Nq; ++q) mrow[q] = f.deriv(ws.psi0[j] + pq[q]);
      for (int m = 0; m < K; ++m) {
        const double* arow = ws.A.data() + static_cast<std::size_t>(m) * Nq;
        double* drow = dj + static_cast<std::size_t>(m) * K;
        for (int mp = 0; mp < K; ++mp) drow[mp] = 0;
        for (int q = 0; q < Nq; ++q) {
          const double aq = arow[q] * mrow[q];
          const double* crow = ws.C.data() + static_cast<std::size_t>(q) * K;
          for (int mp = 0; mp < K; ++mp) drow[mp] -= aq * crow[mp];
        }
        drow[m] -= alpha_sq * m * m + 2.0 * idy2;
      }
    }
    bt.factor(diag);

    for (int j = 0; j < ny; ++j) {
      for (int m = 0; m < K; ++m) {
        const std::size_t idx = static_cast<std::size_t>(j) * K + m;
        z1[idx] = -sc.F[idx];
        z2[idx] = static_cast<double>(m) * m * c[idx];
      }
    }
    bt.solve(z1);
    bt.solve(z2);

    const double denom = flat_dot(gc, z2) + ga;
    if (!(std::abs(denom) > 1e-300)) return false;
    const double dalpha = (-conres - flat_dot(gc, z1)) / denom;

    // Trust cap on the alpha^2 component: the amplitude constraint observes
    // alpha^2 only weakly at small amplitude, so an unchecked Newton step can
    // fling it far off the branch while barely moving the merit.
    const double amax = 0.25 * std::max(std::abs(alpha_sq), 0.2);
    const double step0 =
        std::abs(dalpha) > amax ? amax / std::abs(dalpha) : 1.0;

    const double prev_l2 = sc.l2;
    bool accepted = false;
    double step = step0;
    for (int bt_i = 0; bt_i <= opt.max_backtrack; ++bt_i) {
      for (std::size_t i = 0; i < c.size(); ++i) {
        cand[i] = c[i] + step * (z1[i] + dalpha * z2[i]);
      }
      const double atrial = alpha_sq + step * dalpha;
      eval_residual(ws, f, cand, atrial, strial);
      const double con2 = flat_dot(gc, cand) + ga * atrial - target;
      const double m2 = std::hypot(strial.l2, con2);
      if (m2 < merit || m2 <= opt.newton_tol) {
        c.swap(cand);
        alpha_sq = atrial;
        std::swap(sc, strial);
        conres = con2;
        merit = m2;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return false;
    // Roundoff plateau: accept once progress stalls safely below the
    // 1e-9 state invariant.
    if (it >= 1 && sc.l2 <= 8e-10 && sc.l2 > 0.5 * prev_l2 &&
        std::abs(conres) <= con_tol) {
      return true;
    }
  }
  return sc.l2 <= 8e-10 && std::abs(conres) <= con_tol;
}

}  // namespace

// ---------------------------------------------------------------------------
// NonlinearityF

NonlinearityF NonlinearityF::build(const ShearProfile& profile, int n_knots) {
  if (n_knots < 65) throw InvalidInput("NonlinearityF: need at least 65 knots");
  if (std::abs(profile.U(0.0)) > 1e-12) {
    throw NotOdd("NonlinearityF: U(0) must vanish");
  }
  NonlinearityF f(profile);
  const RayleighPotential q(profile);

  std::vector<double> t(n_knots), v(n_knots);
  for (int i = 0; i < n_knots; ++i) {
    const double y = static_cast<double>(i) / (n_knots - 1);
    t[i] = profile.psi0(y);
    v[i] = profile.U_prime(y);
  }
  for (int i = 0; i + 1 < n_knots; ++i) {
    if (!(t[i + 1] > t[i])) {
      throw NonMonotone("NonlinearityF: psi0 must increase on (0, 1]");
    }
  }
  f.table_ = CubicSpline(t, v, CubicSpline::Boundary::Clamped, q(0.0), q(1.0));
  f.core_min_ = t.front();
  f.core_max_ = t.back();
  f.margin_ = 0.5 * (f.core_max_ - f.core_min_);
  f.lo_ = {v.front(), q(0.0), f.table_.deriv2(t.front())};
  f.hi_ = {v.back(), q(1.0), f.table_.deriv2(t.back())};
  return f;
}

namespace {

// C^2 decay cap used outside the core table: Taylor data at the edge with
// the slope/curvature terms Gaussian-damped so the extension stays on the
// scale of the edge value, all multiplied by the quintic blend.
struct EdgeExt {
  double f, fp, fpp, margin;

  double scale() const { return std::max(std::abs(f), 0.1); }
  double w1() const { return std::abs(fp) > 0 ? scale() / std::abs(fp) : margin; }
  double w2sq() const {
    return std::abs(fpp) > 0 ? 2.0 * scale() / std::abs(fpp) : margin * margin;
  }

  // tau >= 0 is the distance past the edge; df is the outward derivative
  // direction (+1 above the core, -1 below maps d/dt to d/dtau).
  double value(double tau) const {
    if (tau >= margin) return 0;
    const double d1 = std::exp(-tau * tau / (w1() * w1()));
    const double d2 = std::exp(-tau * tau / w2sq());
    const double p = f + fp * tau * d1 + 0.5 * fpp * tau * tau * d2;
    return p * blend(tau / margin);
  }
  double dvalue(double tau) const {  // d/dtau
    if (tau >= margin) return 0;
    const double iw1 = 1.0 / (w1() * w1());
    const double iw2 = 1.0 / w2sq();
    const double d1 = std::exp(-tau * tau * iw1);
    const double d2 = std::exp(-tau * tau * iw2);
    const double p = f + fp * tau * d1 + 0.5 * fpp * tau * tau * d2;
    const double pp = fp * d1 * (1.0 - 2.0 * tau * tau * iw1) +
                      fpp * tau * d2 * (1.0 - tau * tau * iw2);
    const double s = tau / margin;
    return pp * blend(s) + p * blend_d(s) / margin;
  }
  double ddvalue(double tau) const {
    if (tau >= margin) return 0;
    const double iw1 = 1.0 / (w1() * w1());
    const double iw2 = 1.0 / w2sq();
    const double d1 = std::exp(-tau * tau * iw1);
    const double d2 = std::exp(-tau * tau * iw2);
    const double p = f + fp * tau * d1 + 0.5 * fpp * tau * tau * d2;
    const double pp = fp * d1 * (1.0 - 2.0 * tau * tau * iw1) +
                      fpp * tau * d2 * (1.0 - tau * tau * iw2);
    const double ppp =
        fp * d1 * (-6.0 * tau * iw1 + 4.0 * tau * tau * tau * iw1 * iw1) +
        fpp * d2 *
            (1.0 - 5.0 * tau * tau * iw2 + 2.0 * tau * tau * tau * tau * iw2 * iw2);
    const double s = tau / margin;
    return ppp * blend(s) + 2.0 * pp * blend_d(s) / margin +
           p * blend_dd(s) / (margin * margin);
  }
};

}  // namespace

double NonlinearityF::operator()(double t) const {
  if (t < core_min_) {
    // p(tau) tracks f(core_min - tau), so the tau-slope is -f' at the edge.
    const EdgeExt e{lo_.f, -lo_.fp, lo_.fpp, margin_};
    return e.value(core_min_ - t);
  }
  if (t > core_max_) {
    const EdgeExt e{hi_.f, hi_.fp, hi_.fpp, margin_};
    return e.value(t - core_max_);
  }
  return table_(t);
}

double NonlinearityF::deriv(double t) const {
  if (t < core_min_) {
    // d/dt = -d/dtau; the stored fp is df/dt at the edge, and the outward
    // tau direction reverses it: p(tau) approximates f(core_min - tau),
    // whose tau-derivative is -f'(core_min - tau).
    const EdgeExt e{lo_.f, -lo_.fp, lo_.fpp, margin_};
    return -e.dvalue(core_min_ - t);
  }
  if (t > core_max_) {
    const EdgeExt e{hi_.f, hi_.fp, hi_.fpp, margin_};
    return e.dvalue(t - core_max_);
  }
  return table_.deriv(t);
}

double NonlinearityF::deriv2(double t) const {
  if (t < core_min_) {
    const EdgeExt e{lo_.f, -lo_.fp, lo_.fpp, margin_};
    return e.ddvalue(core_min_ - t);
  }
  if (t > core_max_) {
    const EdgeExt e{hi_.f, hi_.fp, hi_.fpp, margin_};
    return e.ddvalue(t - core_max_);
  }
  return table_.deriv2(t);
}

// ---------------------------------------------------------------------------
// residual and continuation

CosineField CosineField::zeros(int n_modes, int ny) {
  CosineField f;
  f.n_modes = n_modes;
  f.ny = ny;
  f.c.assign(static_cast<std::size_t>(n_modes) * ny, 0.0);
  return f;
}

ResidualEval steady_residual(const CosineField& phi, double alpha_sq,
                             const NonlinearityF& f) {
  if (phi.n_modes < 2 || phi.ny < 15) {
    throw InvalidInput("steady_residual: grid too small");
  }
  if (phi.c.size() != static_cast<std::size_t>(phi.n_modes) * phi.ny) {
    throw InvalidInput("steady_residual: malformed coefficient array");
  }
  const Workspace ws = make_workspace(f, phi.n_modes, phi.ny);
  Scratch sc;
  eval_residual(ws, f, phi.c, alpha_sq, sc);
  ResidualEval out;
  out.values.n_modes = phi.n_modes;
  out.values.ny = phi.ny;
  out.values.c = std::move(sc.F);
  out.l2 = sc.l2;
  out.range_escape = sc.escape;
  return out;
}

namespace {

double state_amplitude(const std::vector<double>& c,
                       const std::vector<double>& phi0, int K, double dy) {
  double s = 0;
  for (std::size_t j = 0; j < phi0.size(); ++j) s += c[j * K + 1] * phi0[j];
  return s * dy;
}

double refined_residual_of(const SteadyState& st, const NonlinearityF& f) {
  const int K = st.phi.n_modes, ny = st.phi.ny;
  const int K2 = 2 * K, ny2 = 2 * ny + 1;
  const double dy = st.phi.dy();

  std::vector<double> knots(ny + 2), vals(ny + 2);
  for (int j = 0; j < ny + 2; ++j) knots[j] = -1.0 + j * dy;
  knots.back() = 1.0;

  std::vector<double> c2(static_cast<std::size_t>(ny2) * K2, 0.0);
  const double dy2 = 2.0 / (ny2 + 1);
  for (int m = 0; m < K; ++m) {
    vals.front() = 0;
    vals.back() = 0;
    for (int j = 0; j < ny; ++j) vals[j + 1] = st.phi.at(j, m);
    const CubicSpline sp(knots, vals);
    for (int j2 = 0; j2 < ny2; ++j2) {
      const double y = -1.0 + (j2 + 1) * dy2;
      c2[static_cast<std::size_t>(j2) * K2 + m] = sp(y);
    }
  }
  const Workspace ws2 = make_workspace(f, K2, ny2);
  Scratch sc;
  eval_residual(ws2, f, c2, st.alpha_sq, sc);
  return sc.l2;
}

}  // namespace

Branch continue_branch(const NonlinearityF& f, double k0_sq, double step,
                       int n_steps, const SteadyOptions& opt) {
  if (!(k0_sq > 0)) throw InvalidInput("continue_branch: k0_sq must be positive");
  if (step == 0) throw InvalidInput("continue_branch: step must be nonzero");
  if (n_steps < 1) throw InvalidInput("continue_branch: need n_steps >= 1");
  if (opt.modes < 4 || opt.modes > 64 || opt.ny < 127 || opt.fixed_steps < 1) {
    throw InvalidInput("continue_branch: unusable solver options");
  }

  const int K = opt.modes, ny = opt.ny;
  const Workspace ws = make_workspace(f, K, ny);
  const double dy = ws.dy;

  // Grid bifurcation point: the linearization about phi = 0 is block
  // diagonal per mode, and mode 1 becomes singular at alpha^2 = -lambda of
  // the grid operator with potential f'(psi0).
  std::vector<double> qj(ny);
  for (int j = 0; j < ny; ++j) qj[j] = f.deriv(ws.psi0[j]);
  const EigenPair pair = lowest_eigenpair(qj, DirichletGrid{ny});
  const double k0g = -pair.lambda;
  if (!(std::abs(k0g - k0_sq) <= 0.01 * std::max(std::abs(k0_sq), 1e-12))) {
    throw BifurcationNotFound(
        "continue_branch: grid linearization disagrees with the requested "
        "bifurcation point by more than 1%");
  }

  Branch branch;
  branch.k0_sq_grid = k0g;
  branch.phi0 = pair.phi;

  std::vector<double> c(static_cast<std::size_t>(ny) * K, 0.0);
  double alpha_sq = k0g;
  std::vector<double> c_prev(c), c_prev2(c);
  double a_prev = alpha_sq, a_prev2 = alpha_sq;
  double beta_prev = 0, beta_prev2 = 0;

  std::vector<double> gc(static_cast<std::size_t>(ny) * K, 0.0);
  Scratch sc;

  // Fixed-amplitude corrector with secant prediction in (c, alpha^2).  The
  // branch leaves the bifurcation point steeply (alpha^2 drops fast in the
  // amplitude), so prediction quality decides whether Newton lands.
  std::fill(gc.begin(), gc.end(), 0.0);
  for (int j = 0; j < ny; ++j) {
    gc[static_cast<std::size_t>(j) * K + 1] = dy * branch.phi0[j];
  }
  auto solve_fixed = [&](double beta_t) -> bool {
    const double den = beta_prev - beta_prev2;
    if (std::abs(den) > 1e-14 * (std::abs(beta_prev) + std::abs(beta_t))) {
      const double s = (beta_t - beta_prev) / den;
      for (std::size_t idx = 0; idx < c.size(); ++idx) {
        c[idx] = c_prev[idx] + s * (c_prev[idx] - c_prev2[idx]);
      }
      alpha_sq = a_prev + s * (a_prev - a_prev2);
    } else {
      c = c_prev;
      alpha_sq = a_prev;
      for (int j = 0; j < ny; ++j) {
        c[static_cast<std::size_t>(j) * K + 1] +=
            (beta_t - beta_prev) * branch.phi0[j];
      }
    }
    if (!bordered_newton(ws, f, c, alpha_sq, gc, 0.0, beta_t, opt, sc)) {
      return false;
    }
    c_prev2 = c_prev;
    a_prev2 = a_prev;
    beta_prev2 = beta_prev;
    c_prev = c;
    a_prev = alpha_sq;
    beta_prev = beta_t;
    return true;
  };
  // Walk the amplitude to beta_t, halving the increment after failures.
  auto advance_fixed = [&](double beta_t) -> bool {
    double inc = beta_t - beta_prev;
    int halvings = 0;
    while (std::abs(beta_t - beta_prev) > 0) {
      double next = beta_prev + inc;
      if ((inc > 0 && next > beta_t) || (inc < 0 && next < beta_t)) {
        next = beta_t;
      }
      if (solve_fixed(next)) continue;
      c = c_prev;
      alpha_sq = a_prev;
      inc *= 0.5;
      if (++halvings > 10) return false;
    }
    return true;
  };

  for (int i = 1; i <= n_steps; ++i) {
    if (i <= opt.fixed_steps) {
      if (!advance_fixed(i * step)) {
        throw NewtonDiverged("continue_branch: Newton failed to converge",
                             branch.states);
      }
    } else {
      // secant pseudo-arclength step, halving the arc increment on failure
      double ds2 = 0;
      for (int j = 0; j < ny; ++j) {
        for (int m = 0; m < K; ++m) {
          const std::size_t idx = static_cast<std::size_t>(j) * K + m;
          const double wm = kPi * (m == 0 ? 2.0 : 1.0) * dy;
          const double d = c_prev[idx] - c_prev2[idx];
          gc[idx] = wm * d;
          ds2 += wm * d * d;
        }
      }
      const double da = a_prev - a_prev2;
      ds2 += da * da;
      const double ds_full = std::sqrt(ds2);
      if (!(ds_full > 0)) {
        throw NewtonDiverged("continue_branch: arclength step collapsed",
                             branch.states);
      }
      for (auto& g : gc) g /= ds_full;
      const double ga = da / ds_full;
      bool ok = false;
      double ds = ds_full;
      for (int att = 0; att < 8 && !ok; ++att) {
        const double r = ds / ds_full;
        for (std::size_t idx = 0; idx < c.size(); ++idx) {
          c[idx] = c_prev[idx] + r * (c_prev[idx] - c_prev2[idx]);
        }
        alpha_sq = a_prev + r * da;
        const double target = flat_dot(gc, c_prev) + ga * a_prev + ds;
        ok = bordered_newton(ws, f, c, alpha_sq, gc, ga, target, opt, sc);
        if (!ok) ds *= 0.5;
      }
      if (!ok) {
        throw NewtonDiverged("continue_branch: Newton failed to converge",
                             branch.states);
      }
      c_prev2 = c_prev;
      a_prev2 = a_prev;
      beta_prev2 = beta_prev;
      c_prev = c;
      a_prev = alpha_sq;
      beta_prev = state_amplitude(c, branch.phi0, K, dy);
    }

    SteadyState st;
    st.alpha_sq = alpha_sq;
    st.amplitude = state_amplitude(c, branch.phi0, K, dy);
    st.phi.n_modes = K;
    st.phi.ny = ny;
    st.phi.c = c;
    st.residual_l2 = sc.l2;
    st.range_escape = sc.escape;
    st.refined_residual = refined_residual_of(st, f);
    branch.states.push_back(std::move(st));
  }
  return branch;
}

// ---------------------------------------------------------------------------
// period matching

namespace {

struct PeriodEval {
  bool ok = false;
  double period = 0;
  SteadyState state;
};

PeriodEval period_at(double gamma, double a, double amplitude,
                     const SteadyOptions& opt) {
  PeriodEval out;
  const ShearProfile prof = ShearProfile::erf_family(gamma, a);
  const RayleighPotential pot(prof);
  ConvergedEigenvalue ce;
  try {
    ce = grid_converged_lowest(pot);
  } catch (const NumericalFailure&) {
    return out;
  }
  if (!(ce.lambda < -1e-9)) return out;
  const NonlinearityF f = NonlinearityF::build(prof);
  try {
    Branch br = continue_branch(f, -ce.lambda, amplitude / opt.fixed_steps,
                                opt.fixed_steps, opt);
    out.state = std::move(br.states.back());
  } catch (const NumericalFailure&) {
    // no branch state at the requested amplitude for this family member
    // (typically the amplitude lies beyond the fold of the projection)
    return out;
  }
  out.ok = true;
  out.period = out.state.period();
  return out;
}

}  // namespace

MatchResult match_period(double gamma, double a_lo, double a_hi,
                         double target_period, double amplitude,
                         const SteadyOptions& opt) {
  if (!(gamma > 0) || !(a_lo < a_hi) || !(target_period > 0) ||
      !(amplitude != 0)) {
    throw InvalidInput("match_period: bad arguments");
  }
  const double tol = 1e-6 * target_period;

  // Pre-scan: period at a few family parameters, collecting every sign
  // change (the bracket is only guaranteed continuous, not monotone).
  const int n_scan = 9;
  std::vector<double> as(n_scan);
  std::vector<PeriodEval> evals(n_scan);
  for (int i = 0; i < n_scan; ++i) {
    as[i] = a_lo + (a_hi - a_lo) * i / (n_scan - 1);
    evals[i] = period_at(gamma, as[i], amplitude, opt);
  }
  if (!evals.front().ok) {
    throw BracketInvalid("match_period: no bifurcating branch at a_lo");
  }
  if (!evals.back().ok) {
    throw BracketInvalid("match_period: no bifurcating branch at a_hi");
  }
  const double s_lo = evals.front().period - target_period;
  const double s_hi = evals.back().period - target_period;
  if (s_lo * s_hi > 0) {
    throw BracketInvalid(
        "match_period: period minus target does not change sign over the "
        "bracket");
  }

  MatchResult result;
  bool have_primary = false;
  for (int i = 0; i + 1 < n_scan; ++i) {
    if (!evals[i].ok || !evals[i + 1].ok) continue;
    double flo = evals[i].period - target_period;
    const double fhi = evals[i + 1].period - target_period;
    if (flo == 0) flo = -fhi;  // degenerate landing: let bisection refine
    if (flo * fhi > 0) continue;

    double lo = as[i], hi = as[i + 1];
    PeriodEval best = std::abs(flo) < std::abs(fhi) ? evals[i] : evals[i + 1];
    double best_a = std::abs(flo) < std::abs(fhi) ? lo : hi;
    for (int iter = 0; iter < 80; ++iter) {
      if (std::abs(best.period - target_period) <= tol) break;
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      const PeriodEval ev = period_at(gamma, mid, amplitude, opt);
      const double fm = ev.ok ? ev.period - target_period : 1.0;
      if (ev.ok &&
          std::abs(fm) < std::abs(best.period - target_period)) {
        best = ev;
        best_a = mid;
      }
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    if (std::abs(best.period - target_period) <= tol) {
      result.roots.push_back({best_a, best.period});
      if (!have_primary) {
        result.a = best_a;
        result.period = best.period;
        result.state = best.state;
        have_primary = true;
      }
    }
  }
  if (!have_primary) {
    throw NumericalFailure(
        "match_period: bisection failed to reach the period tolerance");
  }
  return result;
}

// ---------------------------------------------------------------------------
// streamline classification and fields

namespace {

struct ModalSplines {
  std::vector<CubicSpline> s;

  static ModalSplines of(const CosineField& phi) {
    const int K = phi.n_modes, ny = phi.ny;
    const double dy = phi.dy();
    std::vector<double> knots(ny + 2), vals(ny + 2);
    for (int j = 0; j < ny + 2; ++j) knots[j] = -1.0 + j * dy;
    knots.back() = 1.0;
    ModalSplines ms;
    ms.s.reserve(K);
    for (int m = 0; m < K; ++m) {
      vals.front() = 0;
      vals.back() = 0;
      for (int j = 0; j < ny; ++j) vals[j + 1] = phi.at(j, m);
      ms.s.emplace_back(knots, vals);
    }
    return ms;
  }
};

}  // namespace

StreamlineReport classify_streamlines(const SteadyState& state,
                                      const NonlinearityF& f) {
  StreamlineReport report;
  if (std::abs(state.amplitude) < 1e-13) return report;

  const ShearProfile& prof = f.profile();
  const ModalSplines ms = ModalSplines::of(state.phi);
  const int K = state.phi.n_modes;

  auto psi = [&](double xi, double y) {
    double v = prof.psi0(y);
    for (int m = 0; m < K; ++m) v += ms.s[m](y) * std::cos(m * xi);
    return v;
  };
  auto grad = [&](double xi, double y, double& gx, double& gy) {
    gx = 0;
    gy = prof.U(y);
    for (int m = 0; m < K; ++m) {
      gx -= m * ms.s[m](y) * std::sin(m * xi);
      gy += ms.s[m].deriv(y) * std::cos(m * xi);
    }
  };
  auto hess = [&](double xi, double y, double& hxx, double& hxy, double& hyy) {
    hxx = 0;
    hxy = 0;
    hyy = prof.U_prime(y);
    for (int m = 0; m < K; ++m) {
      const double cm = std::cos(m * xi), sm = std::sin(m * xi);
      hxx -= m * m * ms.s[m](y) * cm;
      hxy -= m * ms.s[m].deriv(y) * sm;
      hyy += ms.s[m].deriv2(y) * cm;
    }
  };

  for (const double xi0 : {0.0, kPi}) {
    double xi = xi0, y = 0;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      double gx, gy;
      grad(xi, y, gx, gy);
      if (std::hypot(gx, gy) <= 1e-11) {
        converged = true;
        break;
      }
      double hxx, hxy, hyy;
      hess(xi, y, hxx, hxy, hyy);
      const double det = hxx * hyy - hxy * hxy;
      if (!(std::abs(det) > 1e-300)) break;
      double dxi = -(hyy * gx - hxy * gy) / det;
      double dyv = -(-hxy * gx + hxx * gy) / det;
      const double len = std::hypot(dxi, dyv);
      if (len > 0.5) {
        dxi *= 0.5 / len;
        dyv *= 0.5 / len;
      }
      xi += dxi;
      y = std::clamp(y + dyv, -0.999, 0.999);
    }
    if (!converged) continue;
    double hxx, hxy, hyy;
    hess(xi, y, hxx, hxy, hyy);
    const double det = hxx * hyy - hxy * hxy;
    if (std::abs(det) < 1e-12) {
      throw DegenerateHessian(
          "classify_streamlines: flat Hessian at a critical point");
    }
    bool dup = false;
    for (const CriticalPoint& p : report.points) {
      if (std::abs(p.xi - xi) < 1e-6 && std::abs(p.y - y) < 1e-6) dup = true;
    }
    if (dup) continue;
    CriticalPoint cp;
    cp.xi = xi;
    cp.y = y;
    cp.saddle = det < 0;
    cp.psi = psi(xi, y);
    cp.det_hess = det;
    report.points.push_back(cp);
  }

  int saddles = 0, centers = 0;
  for (const CriticalPoint& p : report.points) (p.saddle ? saddles : centers)++;
  report.cats_eye = (saddles == 1 && centers == 1);

  if (report.cats_eye) {
    const CriticalPoint* sad = nullptr;
    const CriticalPoint* cen = nullptr;
    for (const CriticalPoint& p : report.points) (p.saddle ? sad : cen) = &p;
    const double sv = sad->psi;
    auto h = [&](double y) { return psi(cen->xi, y) - sv; };
    double lo = cen->y, hi = 0.9999;
    if (h(lo) < 0 && h(hi) > 0) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (h(mid) < 0 ? lo : hi) = mid;
      }
      report.eye_half_height = 0.5 * (lo + hi) - cen->y;
    }
  }
  return report;
}

namespace {

// Modal vorticity rows on the full node set (boundaries included):
// w_m = -alpha^2 m^2 c_m + c_m'' (+ U' for m = 0).
std::vector<double> modal_vorticity_rows(const SteadyState& st,
                                         const ShearProfile& prof) {
  const int K = st.phi.n_modes, ny = st.phi.ny;
  const double dy = st.phi.dy();
  const double idy2 = 1.0 / (dy * dy);
  std::vector<double> w(static_cast<std::size_t>(ny + 2) * K, 0.0);

  auto c_at = [&](int j, int m) -> double {
    if (j < 0 || j >= ny) return 0.0;
    return st.phi.at(j, m);
  };
  for (int j = 0; j < ny; ++j) {
    const double y = st.phi.y(j);
    double* row = w.data() + static_cast<std::size_t>(j + 1) * K;
    for (int m = 0; m < K; ++m) {
      row[m] = (c_at(j - 1, m) - 2.0 * c_at(j, m) + c_at(j + 1, m)) * idy2 -
               st.alpha_sq * m * m * c_at(j, m);
    }
    row[0] += prof.U_prime(y);
  }
  // one-sided second-order second differences at the walls (phi = 0 there)
  double* bot = w.data();
  double* top = w.data() + static_cast<std::size_t>(ny + 1) * K;
  for (int m = 0; m < K; ++m) {
    bot[m] = (-5.0 * c_at(0, m) + 4.0 * c_at(1, m) - c_at(2, m)) * idy2;
    top[m] =
        (-5.0 * c_at(ny - 1, m) + 4.0 * c_at(ny - 2, m) - c_at(ny - 3, m)) *
        idy2;
  }
  bot[0] += prof.U_prime(-1.0);
  top[0] += prof.U_prime(1.0);
  return w;
}

Field2D field_from_modal_rows(const std::vector<double>& rows, int K, int ny,
                              double dy, double period, int ny_out,
                              double mode0_shift) {
  std::vector<double> knots(ny + 2);
  for (int j = 0; j < ny + 2; ++j) knots[j] = -1.0 + j * dy;
  knots.back() = 1.0;

  std::vector<Field2D::Mode> modes;
  std::vector<double> vals(ny + 2);
  for (int m = 0; m < K; ++m) {
    for (int j = 0; j < ny + 2; ++j) {
      vals[j] = rows[static_cast<std::size_t>(j) * K + m];
    }
    const CubicSpline sp(knots, vals);
    std::vector<std::complex<double>> vt(ny_out + 1);
    for (int i = 0; i <= ny_out; ++i) {
      const double y = -1.0 + 2.0 * i / ny_out;
      double v = sp(y);
      if (m == 0) v += mode0_shift;
      vt[i] = (m == 0) ? std::complex<double>(v, 0.0)
                       : std::complex<double>(0.5 * v, 0.0);
    }
    if (m == 0) {
      modes.push_back({0, std::move(vt)});
    } else {
      modes.push_back({m, vt});
      modes.push_back({-m, std::move(vt)});
    }
  }
  return Field2D::from_modes(period, std::move(modes));
}

}  // namespace

Field2D vorticity_field(const SteadyState& state, const NonlinearityF& f,
                        int ny_out) {
  if (ny_out < 64) throw InvalidInput("vorticity_field: ny_out too small");
  const std::vector<double> rows = modal_vorticity_rows(state, f.profile());
  return field_from_modal_rows(rows, state.phi.n_modes, state.phi.ny,
                               state.phi.dy(), state.period(), ny_out, 0.0);
}

Field2D stream_field(const SteadyState& state, const NonlinearityF& f,
                     int ny_out) {
  if (ny_out < 64) throw InvalidInput("stream_field: ny_out too small");
  const int K = state.phi.n_modes, ny = state.phi.ny;
  const ShearProfile& prof = f.profile();
  std::vector<double> rows(static_cast<std::size_t>(ny + 2) * K, 0.0);
  for (int j = 0; j < ny; ++j) {
    double* row = rows.data() + static_cast<std::size_t>(j + 1) * K;
    for (int m = 0; m < K; ++m) row[m] = state.phi.at(j, m);
    row[0] += prof.psi0(state.phi.y(j));
  }
  rows[0] = prof.psi0(-1.0);
  rows[static_cast<std::size_t>(ny + 1) * K] = prof.psi0(1.0);
  return field_from_modal_rows(rows, K, ny, state.phi.dy(), state.period(),
                               ny_out, 0.0);
}

double vorticity_distance(const SteadyState& state, const NonlinearityF& f,
                          double s, int ny_out) {
  if (ny_out < 64) throw InvalidInput("vorticity_distance: ny_out too small");
  const std::vector<double> rows = modal_vorticity_rows(state, f.profile());
  const Field2D field =
      field_from_modal_rows(rows, state.phi.n_modes, state.phi.ny,
                            state.phi.dy(), state.period(), ny_out, -1.0);
  return hs_norm_2d_isotropic(field, s);
}

double advection_residual(const SteadyState& state, const NonlinearityF& f) {
  const int K = state.phi.n_modes, ny = state.phi.ny;
  const int Nq = 2 * K;
  const double dy = state.phi.dy();
  const ShearProfile& prof = f.profile();
  const double alpha = std::sqrt(state.alpha_sq);

  const std::vector<double> w = modal_vorticity_rows(state, prof);
  std::vector<double> cfull(static_cast<std::size_t>(ny + 2) * K, 0.0);
  for (int j = 0; j < ny; ++j) {
    for (int m = 0; m < K; ++m) {
      cfull[static_cast<std::size_t>(j + 1) * K + m] = state.phi.at(j, m);
    }
  }

  const int rows = ny + 2;
  auto ddy = [&](const std::vector<double>& src) {
    std::vector<double> out(src.size());
    for (int m = 0; m < K; ++m) {
      out[m] = (-3.0 * src[m] + 4.0 * src[K + m] - src[2 * K + m]) / (2 * dy);
      const std::size_t last = static_cast<std::size_t>(rows - 1) * K;
      out[last + m] = (3.0 * src[last + m] - 4.0 * src[last - K + m] +
                       src[last - 2 * K + m]) /
                      (2 * dy);
      for (int r = 1; r + 1 < rows; ++r) {
        out[static_cast<std::size_t>(r) * K + m] =
            (src[static_cast<std::size_t>(r + 1) * K + m] -
             src[static_cast<std::size_t>(r - 1) * K + m]) /
            (2 * dy);
      }
    }
    return out;
  };
  const std::vector<double> c1 = ddy(cfull);
  const std::vector<double> w1 = ddy(w);

  const int N = Nq - 1;
  const double dxi = kPi / N;
  std::vector<double> cosq(static_cast<std::size_t>(Nq) * K);
  std::vector<double> sinq(static_cast<std::size_t>(Nq) * K);
  for (int q = 0; q < Nq; ++q) {
    for (int m = 0; m < K; ++m) {
      cosq[static_cast<std::size_t>(q) * K + m] = std::cos(m * dxi * q);
      sinq[static_cast<std::size_t>(q) * K + m] = std::sin(m * dxi * q);
    }
  }

  double acc = 0;
  for (int r = 0; r < rows; ++r) {
    const double y = -1.0 + r * dy;
    const double uy = prof.U(std::min(y, 1.0));
    const double muy = (r == 0 || r == rows - 1) ? 0.5 : 1.0;
    const double* cr = cfull.data() + static_cast<std::size_t>(r) * K;
    const double* c1r = c1.data() + static_cast<std::size_t>(r) * K;
    const double* wr = w.data() + static_cast<std::size_t>(r) * K;
    const double* w1r = w1.data() + static_cast<std::size_t>(r) * K;
    for (int q = 0; q < Nq; ++q) {
      const double* cq = cosq.data() + static_cast<std::size_t>(q) * K;
      const double* sq = sinq.data() + static_cast<std::size_t>(q) * K;
      double psi_y = uy, psi_xi = 0, om_y = 0, om_xi = 0;
      for (int m = 0; m < K; ++m) {
        psi_y += c1r[m] * cq[m];
        psi_xi -= m * cr[m] * sq[m];
        om_y += w1r[m] * cq[m];
        om_xi -= m * wr[m] * sq[m];
      }
      const double res = psi_y * om_xi - psi_xi * om_y;
      const double muq = (q == 0 || q == Nq - 1) ? 0.5 : 1.0;
      acc += muy * muq * res * res;
    }
  }
  // || alpha (psi_y w_xi - psi_xi w_y) ||_{L2(x,y)} with dx = dxi/alpha and
  // the even reflection onto (pi, 2 pi).
  return std::sqrt(alpha * 2.0 * acc * dy * dxi);
}

}  // namespace couette
