#pragma once

// Confluent Heun machinery for the Lorentzian model.
//
// The scalar equation for the interaction-picture amplitude y = b1,
//   y'' + (2 tau/(1+tau^2) + i d) y' + a^2/(4 (1+tau^2)^2) y = 0,
// becomes the generalized spheroidal wave equation (GSWE)
//   z(z - z0) u'' + (B1 + B2 z) u' + [B3 - 2 eta omega (z - z0) + omega^2 z (z - z0)] u = 0
// under y = exp(-i d tau/2) ((tau - i)/(tau + i))^(a/4) u and z = (1 - i tau)/2.
// Worked algebra: with L = y'/y of the prefactor, u_tau = -(i/2) u_z, the
// u-equation is u_zz + 2i(2L + p) u_z - 4(L' + L^2 + pL + q) u = 0 where p and
// q are the coefficients above; multiplying by z(z - 1) gives
//   (2z - 1 + a/2) u_z  and  (-d^2 z^2 + (d^2 + 2d) z - d) u,
// i.e. z0 = 1, B1 = a/2 - 1, B2 = 2, omega = i d, eta = i, B3 = d.
//
// The same equation in the normalized confluent Heun form
//   y'' + (al + (1+be)/z + (1+ga)/(z-1)) y' + (mu/z + nu/(z-1)) y = 0,
//   mu = (al - be - ga + al be - be ga)/2 - et,  nu = (al + be + ga + al ga + be ga)/2 + de + et,
// arises from the prefactor exp(-i d tau) ((tau - i)/(tau + i))^(a/4) with
// (al, be, ga, de, et) = (2d, -a/2, a/2, 2d, a^2/8 - d).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "ltls/core_model.hpp"
#include "ltls/errors.hpp"
#include "ltls/ode.hpp"
#include "ltls/propagator.hpp"

namespace ltls::heun {

struct GsweParams {
  cplx B1, B2, B3, eta, omega, z0;
};

/// GSWE constants for a parameter point plus the singularity data.
struct GsweMap {
  GsweParams g;
  double omega0T = 0.0;
  double deltaT = 0.0;
  std::array<cplx, 2> exponents_zero;  // (0, 1 + B1/z0) at z = 0 (tau = -i)
  std::array<cplx, 2> exponents_z0;    // (0, 1 - B2 - B1/z0) at z = z0 (tau = +i)
};

inline GsweMap lorentzian_to_gswe(const ModelParams& p) {
  const double a = p.omega0T();
  const double d = p.deltaT();
  GsweMap m;
  m.omega0T = a;
  m.deltaT = d;
  m.g = {cplx{0.5 * a - 1.0}, cplx{2.0}, cplx{d}, cplx{0.0, 1.0}, cplx{0.0, d}, cplx{1.0}};
  m.exponents_zero = {0.0, 1.0 + m.g.B1 / m.g.z0};
  m.exponents_z0 = {0.0, 1.0 - m.g.B2 - m.g.B1 / m.g.z0};
  return m;
}

/// z = (1 - i tau)/2 and back.
inline cplx z_of_tau(cplx tau) { return 0.5 * (1.0 - cplx{0.0, 1.0} * tau); }
inline cplx tau_of_z(cplx z) { return cplx{0.0, 1.0} * (2.0 * z - 1.0); }

/// Left-hand side of the GSWE.
inline cplx gswe_residual(const GsweParams& g, cplx z, cplx u, cplx du, cplx d2u) {
  return z * (z - g.z0) * d2u + (g.B1 + g.B2 * z) * du +
         (g.B3 - 2.0 * g.eta * g.omega * (z - g.z0) + g.omega * g.omega * z * (z - g.z0)) * u;
}

/// Sum of the magnitudes of the GSWE terms, a scale for relative residuals.
inline double gswe_scale(const GsweParams& g, cplx z, cplx u, cplx du, cplx d2u) {
  return std::abs(z * (z - g.z0) * d2u) + std::abs((g.B1 + g.B2 * z) * du) +
         std::abs((g.B3 - 2.0 * g.eta * g.omega * (z - g.z0) + g.omega * g.omega * z * (z - g.z0)) * u);
}

/// (zeta^2 + q1 zeta) w'' + (p2 zeta^2 + p1 zeta + p0) w' + (r1 zeta + r0) w = 0,
/// zeta = z - point. Both the GSWE after u = exp(s z) w and the normalized
/// confluent Heun equation take this form at their finite singular points.
struct LocalEquation {
  cplx point{};
  cplx q1, p2, p1, p0, r1, r0;
  // u = exp(s z) w; zero for an equation written directly in w.
  cplx s{};
  // Distance to the nearest other finite singularity.
  double radius = 0.0;
};

/// GSWE at one of its regular singular points (0 or z0), with u = exp(i omega z) w.
inline LocalEquation gswe_local_equation(const GsweParams& g, bool at_z0) {
  LocalEquation e;
  e.point = at_z0 ? g.z0 : cplx{};
  e.s = cplx{0.0, 1.0} * g.omega;
  const cplx P = e.point;
  e.q1 = 2.0 * P - g.z0;
  e.p2 = 2.0 * e.s;
  e.p1 = 2.0 * e.s * e.q1 + g.B2;
  e.p0 = g.B1 + g.B2 * P;
  e.r1 = e.s * g.B2 - 2.0 * g.eta * g.omega;
  e.r0 = e.s * e.p0 + g.B3 - 2.0 * g.eta * g.omega * (P - g.z0);
  e.radius = std::abs(g.z0);
  return e;
}

/// Normalized confluent Heun parameters (alpha, beta, gamma, delta, eta).
struct HeunCParams {
  cplx alpha, beta, gamma, delta, eta;
};

/// Normalized confluent Heun equation at z = 0 (singularities 0 and 1).
inline LocalEquation heunc_local_equation(const HeunCParams& h) {
  const cplx mu = 0.5 * (h.alpha - h.beta - h.gamma + h.alpha * h.beta - h.beta * h.gamma) - h.eta;
  const cplx nu = 0.5 * (h.alpha + h.beta + h.gamma + h.alpha * h.gamma + h.beta * h.gamma) + h.delta + h.eta;
  LocalEquation e;
  e.point = 0.0;
  e.q1 = -1.0;
  e.p2 = h.alpha;
  e.p1 = -h.alpha + 2.0 + h.beta + h.gamma;
  e.p0 = -(1.0 + h.beta);
  e.r1 = mu + nu;
  e.r0 = -mu;
  e.s = 0.0;
  e.radius = 1.0;
  return e;
}

/// Value and first two derivatives with respect to z.
struct Jet {
  cplx value, d1, d2;
};

/// Frobenius solution exp(s z) zeta^r sum_n a_n zeta^n about a regular
/// singular point. Coefficients are fixed at construction.
class FrobeniusSolution {
 public:
  FrobeniusSolution(const LocalEquation& e, cplx exponent, std::size_t n_terms) : eq_(e), r_(exponent) {
    if (n_terms < 3) throw DomainError("frobenius: need at least 3 terms");
    a_.assign(n_terms, cplx{});
    a_[0] = 1.0;
    const double scale = std::max({1.0, std::abs(e.q1), std::abs(e.p0)});
    for (std::size_t n = 1; n < n_terms; ++n) {
      const cplx m = double(n) + r_;
      const cplx div = e.q1 * m * (m - 1.0) + e.p0 * m;
      if (std::abs(div) <= 1e-13 * scale * std::max(1.0, std::norm(m)))
        throw DomainError("frobenius: exponents differ by an integer (logarithmic case)");
      cplx num = a_[n - 1] * ((m - 1.0) * (m - 2.0) + e.p1 * (m - 1.0) + e.r0);
      if (n >= 2) num += a_[n - 2] * (e.p2 * (m - 2.0) + e.r1);
      a_[n] = -num / div;
    }
  }

  cplx point() const noexcept { return eq_.point; }
  cplx exponent() const noexcept { return r_; }
  double radius() const noexcept { return eq_.radius; }
  const std::vector<cplx>& coefficients() const noexcept { return a_; }
  const LocalEquation& equation() const noexcept { return eq_; }

  /// Residual of the recurrence for n in [1, count); should be ~ rounding.
  double recurrence_defect(std::size_t count) const {
    double worst = 0.0;
    for (std::size_t n = 1; n < std::min(count, a_.size()); ++n) {
      const cplx m = double(n) + r_;
      cplx t = a_[n] * (eq_.q1 * m * (m - 1.0) + eq_.p0 * m) +
               a_[n - 1] * ((m - 1.0) * (m - 2.0) + eq_.p1 * (m - 1.0) + eq_.r0);
      if (n >= 2) t += a_[n - 2] * (eq_.p2 * (m - 2.0) + eq_.r1);
      const double sc = std::abs(a_[n] * (eq_.q1 * m * (m - 1.0) + eq_.p0 * m)) + 1e-300;
      worst = std::max(worst, std::abs(t) / sc);
    }
    return worst;
  }

  /// The series w and its derivatives (without the exp(s z) factor).
  Jet series(cplx z) const {
    const cplx zeta = z - eq_.point;
    const double rho = std::abs(zeta);
    if (rho > 0.9 * eq_.radius) throw DomainError("frobenius: evaluation outside 0.9 x convergence radius");
    if (rho == 0.0) {
      // Only meaningful for the exponent-0 solution.
      if (r_ != cplx{}) throw DomainError("frobenius: non-zero exponent evaluated at the singular point");
      return {a_[0], a_.size() > 1 ? a_[1] : cplx{}, a_.size() > 2 ? 2.0 * a_[2] : cplx{}};
    }
    // sum a_n zeta^n and its derivatives, then apply zeta^r.
    cplx s0{}, s1{}, s2{};
    cplx pw = 1.0;
    int small = 0;
    std::size_t n = 0;
    for (; n < a_.size(); ++n) {
      const cplx m = double(n) + r_;
      const cplx t0 = a_[n] * pw;
      s0 += t0;
      s1 += t0 * m;
      s2 += t0 * m * (m - 1.0);
      const double tiny = 1e-16 * std::max(std::abs(s0), std::abs(s1) / std::max(1.0, double(n)));
      if (std::abs(t0) * std::max(1.0, std::abs(m) * std::abs(m)) <= tiny) {
        if (++small == 3) break;
      } else {
        small = 0;
      }
      pw *= zeta;
    }
    if (n == a_.size()) throw ConvergenceError("frobenius: series not converged with the stored terms", rho);
    const cplx zr = r_ == cplx{} ? cplx{1.0} : std::exp(r_ * std::log(zeta));
    // s1 and s2 carry factors zeta^(m-1), zeta^(m-2) once divided by zeta.
    return {zr * s0, zr * s1 / zeta, zr * s2 / (zeta * zeta)};
  }

  /// u = exp(s z) w with derivatives.
  Jet operator()(cplx z) const {
    const Jet w = series(z);
    if (eq_.s == cplx{}) return w;
    const cplx e = std::exp(eq_.s * z);
    const cplx s = eq_.s;
    return {e * w.value, e * (w.d1 + s * w.value), e * (w.d2 + 2.0 * s * w.d1 + s * s * w.value)};
  }

 private:
  LocalEquation eq_;
  cplx r_;
  std::vector<cplx> a_;
};

/// Local solution of the GSWE at z = 0 (at_z0 = false) or z = z0 with the
/// first (0) or second indicial exponent.
inline FrobeniusSolution frobenius_solve(const GsweParams& g, bool at_z0, int exponent_index,
                                         std::size_t n_terms = 800) {
  const LocalEquation e = gswe_local_equation(g, at_z0);
  const cplx r = exponent_index == 0 ? cplx{} : 1.0 - e.p0 / e.q1;
  return FrobeniusSolution(e, r, n_terms);
}

/// Thome normal solution exp(s z) z^rho sum_k c_k z^-k at the irregular point,
/// s = +i omega (sign > 0) or -i omega, rho = eta omega/s - B2/2.
class ThomeSolution {
 public:
  ThomeSolution(const GsweParams& g, int sign, std::size_t n_terms = 120) : g_(g) {
    if (g.omega == cplx{}) throw DomainError("thome: omega must be non-zero");
    s_ = (sign > 0 ? 1.0 : -1.0) * cplx{0.0, 1.0} * g.omega;
    rho_ = g.eta * g.omega / s_ - 0.5 * g.B2;
    c_.assign(n_terms, cplx{});
    c_[0] = 1.0;
    const cplx eo = g.eta * g.omega;
    for (std::size_t k = 1; k < n_terms; ++k) {
      const double kd = double(k);
      const cplx m1 = rho_ - kd + 1.0;
      cplx num = c_[k - 1] * (m1 * (m1 - 1.0) - 2.0 * s_ * g.z0 * m1 + g.B2 * m1 + s_ * g.B1 + g.B3 +
                              2.0 * eo * g.z0);
      if (k >= 2) {
        const cplx m2 = rho_ - kd + 2.0;
        num += c_[k - 2] * (-g.z0 * m2 * (m2 - 1.0) + g.B1 * m2);
      }
      c_[k] = num / (2.0 * s_ * kd);
    }
  }

  cplx s() const noexcept { return s_; }
  cplx rho() const noexcept { return rho_; }
  const std::vector<cplx>& coefficients() const noexcept { return c_; }

  /// Smallest |z| at which the expansion is used.
  double threshold() const {
    return std::max(10.0 / std::abs(g_.omega), 10.0 * std::abs(c_.size() > 1 ? c_[1] : cplx{}));
  }

  /// Leading behaviour with `order` correction terms (order = 1 keeps 1/z).
  Jet leading(cplx z, std::size_t order) const {
    return evaluate(z, std::min(order + 1, c_.size()), false);
  }

  /// Optimally truncated asymptotic sum.
  Jet operator()(cplx z) const {
    if (std::abs(z) < threshold()) throw DomainError("thome: |z| below the asymptotic threshold");
    return evaluate(z, c_.size(), true);
  }

 private:
  Jet evaluate(cplx z, std::size_t count, bool optimal) const {
    const cplx iz = 1.0 / z;
    cplx s0{}, s1{}, s2{};
    cplx pw = 1.0;
    double last = INFINITY;
    for (std::size_t k = 0; k < count; ++k) {
      const cplx t = c_[k] * pw;
      if (optimal && k > 0) {
        if (std::abs(t) > last) break;
        if (std::abs(t) <= 1e-17 * std::abs(s0)) {
          s0 += t;
          const cplx m = rho_ - double(k);
          s1 += t * m;
          s2 += t * m * (m - 1.0);
          break;
        }
      }
      last = std::abs(t);
      s0 += t;
      const cplx m = rho_ - double(k);
      s1 += t * m;
      s2 += t * m * (m - 1.0);
      pw *= iz;
    }
    // v = z^rho S, v' = z^rho S1/z, v'' = z^rho S2/z^2; u = exp(s z) v.
    const cplx pre = std::exp(s_ * z + rho_ * std::log(z));
    const cplx v = pre * s0, v1 = pre * s1 * iz, v2 = pre * s2 * iz * iz;
    return {v, v1 + s_ * v, v2 + 2.0 * s_ * v1 + s_ * s_ * v};
  }

  GsweParams g_;
  cplx s_, rho_;
  std::vector<cplx> c_;
};

inline Jet thome_asymptotic(const GsweParams& g, int sign, cplx z) { return ThomeSolution(g, sign)(z); }

/// (u, u') carried along a path.
struct GsweState {
  cplx u, du;
};

/// Continues (u, u') from za to zb along the straight segment by Taylor
/// re-expansion at ordinary points. Each step stays within half the distance
/// to the nearest singularity and within |omega| h <= 2, so the exp(+-i omega z)
/// behaviour does not cause cancellation in the Taylor sums.
inline GsweState march_gswe(const GsweParams& g, cplx za, GsweState st, cplx zb) {
  const cplx ab = zb - za;
  const double len = std::abs(ab);
  if (len == 0.0) return st;
  cplx zc = za;
  double done = 0.0;
  const double hmax = std::abs(g.omega) > 0.0 ? 2.0 / std::abs(g.omega) : INFINITY;
  std::vector<cplx> c(4);
  for (int steps = 0; done < len; ++steps) {
    if (steps > 100000) throw ConvergenceError("march_gswe: step budget exhausted", done);
    const double dist = std::min(std::abs(zc), std::abs(zc - g.z0));
    if (dist < 1e-3) throw DomainError("march_gswe: path passes through a singular point");
    const double h = std::min({0.5 * dist, hmax, len - done});
    const cplx zn = (done + h >= len) ? zb : za + (done + h) / len * ab;
    const cplx dz = zn - zc;
    // A u'' + B u' + C u = 0 expanded about zc.
    const cplx A0 = zc * (zc - g.z0), A1 = 2.0 * zc - g.z0, A2 = 1.0;
    const cplx B0 = g.B1 + g.B2 * zc, B1 = g.B2;
    const cplx w2 = g.omega * g.omega, eo = 2.0 * g.eta * g.omega;
    const cplx C0 = g.B3 - eo * (zc - g.z0) + w2 * zc * (zc - g.z0);
    const cplx C1 = -eo + w2 * (2.0 * zc - g.z0), C2 = w2;
    c.assign(2, cplx{});
    c[0] = st.u;
    c[1] = st.du;
    cplx u = c[0] + c[1] * dz, du = c[1];
    cplx pw = dz;  // dz^(n+1) for the u sum at index n+1
    int small = 0;
    for (std::size_t n = 0; n < 400; ++n) {
      const double nd = double(n);
      cplx rhs = (A1 * (nd + 1.0) * nd + B0 * (nd + 1.0)) * c[n + 1] + (A2 * nd * (nd - 1.0) + B1 * nd + C0) * c[n];
      if (n >= 1) rhs += C1 * c[n - 1];
      if (n >= 2) rhs += C2 * c[n - 2];
      c.push_back(-rhs / (A0 * (nd + 2.0) * (nd + 1.0)));
      const cplx tu = c[n + 2] * pw * dz;
      const cplx td = (nd + 2.0) * c[n + 2] * pw;
      u += tu;
      du += td;
      pw *= dz;
      if (std::abs(tu) <= 1e-17 * std::abs(u) && std::abs(td) * std::abs(dz) <= 1e-17 * std::abs(u) + 1e-17 * std::abs(du * dz)) {
        if (++small == 3) break;
      } else {
        small = 0;
      }
      if (n == 399) throw ConvergenceError("march_gswe: Taylor series did not converge", done);
    }
    st = {u, du};
    zc = zn;
    done += h;
  }
  return st;
}

/// Same continuation by adaptive Runge-Kutta in the path parameter, as an
/// independent check of march_gswe.
inline GsweState integrate_gswe(const GsweParams& g, cplx za, GsweState st, cplx zb, double rel_tol = 1e-12,
                                double abs_tol = 1e-14) {
  const cplx ab = zb - za;
  auto rhs = [&](double s, const ode::State<2>& y, ode::State<2>& dy) {
    const cplx z = za + s * ab;
    const cplx Q = g.B3 - 2.0 * g.eta * g.omega * (z - g.z0) + g.omega * g.omega * z * (z - g.z0);
    dy[0] = y[1] * ab;
    dy[1] = -((g.B1 + g.B2 * z) * y[1] + Q * y[0]) / (z * (z - g.z0)) * ab;
  };
  ode::State<2> y{st.u, st.du};
  ode::DormandPrince<2> dp({rel_tol, abs_tol, 5'000'000});
  dp.advance(rhs, y, 0.0, 1.0);
  return {y[0], y[1]};
}

namespace detail {

// ((tau - i)/(tau + i))^kappa for real tau with log(tau - i) - log(tau + i)
// continuous on the real line (it runs from -2 pi i at -inf to 0 at +inf).
inline cplx pulse_ratio_pow(double tau, double kappa) {
  const cplx i{0.0, 1.0};
  return std::exp(kappa * (std::log(tau - i) - std::log(tau + i)));
}

}  // namespace detail

struct HeunProbability {
  double probability = 0.0;
  cplx b1_final;          // b1(+inf)
  cplx thome_plus, thome_minus;  // (A, B) in u = A T+ + B T- at the end point
  double start_tau = 0.0;
};

/// Transition probability from the GSWE: start on the Thome solution that
/// carries b1(-inf) = 1, continue along real tau by series re-expansion, and
/// read b1(+inf) from the Thome decomposition at the far end.
inline HeunProbability heun_probability(const ModelParams& p) {
  if (p.resonant()) throw DomainError("heun: omega = i deltaT vanishes on resonance");
  const GsweMap m = lorentzian_to_gswe(p);
  const ThomeSolution tp(m.g, +1), tm(m.g, -1);
  const double a = m.omega0T, d = m.deltaT;
  // Well beyond the usage threshold: the optimally truncated sums still carry
  // ~1e-8 relative error at the threshold itself for moderate omega0T.
  const double zmin = std::max({50.0 / d, 3.0 * tp.threshold(), 3.0 * tm.threshold(), 20.0});
  const double L = 2.0 * zmin;
  const cplx za = z_of_tau(-L), zb = z_of_tau(L);

  // b1 = exp(-i d tau/2) ratio^(a/4) u with u = N T+ -> exp(-d/2) N ratio^(a/4) at -inf.
  const cplx N = std::exp(cplx{0.5 * d, 0.5 * kPi * a});
  const Jet s0 = tp(za);
  const GsweState end = march_gswe(m.g, za, {N * s0.value, N * s0.d1}, zb);

  const Jet ep = tp(zb), em = tm(zb);
  const cplx det = ep.value * em.d1 - em.value * ep.d1;
  const cplx A = (end.u * em.d1 - em.value * end.du) / det;
  const cplx B = (ep.value * end.du - end.u * ep.d1) / det;

  HeunProbability r;
  r.thome_plus = A;
  r.thome_minus = B;
  r.b1_final = A * std::exp(-0.5 * d);
  r.probability = std::clamp(1.0 - std::norm(r.b1_final), 0.0, 1.0);
  r.start_tau = -L;
  return r;
}

/// Residual report for the local-Heun representation of y = b1.
struct HeunVerifyReport {
  GsweMap map;
  HeunCParams derived;      // (2d, -a/2, a/2, 2d, a^2/8 - d)
  cplx candidate_eta;       // (a - d)/8, the alternative fifth argument
  // Max relative residual of y in the scalar equation over the grid.
  double residual_gswe_basis = 0.0;     // exp(-i d tau/2) prefactor with GSWE series
  double residual_heunc_basis = 0.0;    // exp(-i d tau) prefactor with derived HeunC tuple
  double residual_candidate_eta = 0.0;  // same with the alternative fifth argument
  double residual_other_prefactor = 0.0;  // exp(+i d tau) ((tau+i)/(tau-i))^(a/4) with derived tuple
  bool prefactor_minus_ok = false;      // exp(-i d tau)((tau - i)/(tau + i))^(a/4) satisfies the equation
  bool prefactor_plus_ok = false;
  bool candidate_eta_ok = false;
  // Least-squares fit of C1 y1 + C2 y2 to the propagated b1.
  cplx c1, c2;
  double fit_max_error = 0.0;
  std::size_t grid_points = 0;
};

namespace detail {

struct ScalarJet {
  cplx y, dy, d2y;
};

// y(tau) = Pf(tau) Y(z(tau)) with Pf = exp(i sigma d tau) ratio^kappa; Y given as a z-jet.
inline ScalarJet compose(double tau, double sigma, double d, double kappa, const Jet& Y) {
  const cplx i{0.0, 1.0};
  const cplx pf = std::exp(i * sigma * d * tau) * pulse_ratio_pow(tau, kappa);
  const cplx L = i * sigma * d + kappa * (1.0 / (tau - i) - 1.0 / (tau + i));
  const cplx dL = kappa * (-1.0 / ((tau - i) * (tau - i)) + 1.0 / ((tau + i) * (tau + i)));
  const cplx zt = -0.5 * i;  // dz/dtau
  return {pf * Y.value, pf * (L * Y.value + zt * Y.d1),
          pf * ((dL + L * L) * Y.value + 2.0 * L * zt * Y.d1 + zt * zt * Y.d2)};
}

inline double scalar_relative_residual(double tau, double a, double d, const ScalarJet& j) {
  const double den = 1.0 + tau * tau;
  const cplx c1 = 2.0 * tau / den + cplx{0.0, d};
  const double c0 = a * a / (4.0 * den * den);
  const cplx res = j.d2y + c1 * j.dy + c0 * j.y;
  const double sc = std::abs(j.d2y) + std::abs(c1 * j.dy) + std::abs(c0 * j.y) + 1e-300;
  return std::abs(res) / sc;
}

// z^r times a series jet.
inline Jet times_power(cplx z, cplx r, const Jet& w) {
  const cplx zr = std::exp(r * std::log(z));
  const cplx d1 = r / z, d2 = r * (r - 1.0) / (z * z);
  return {zr * w.value, zr * (w.d1 + d1 * w.value), zr * (w.d2 + 2.0 * d1 * w.d1 + d2 * w.value)};
}

}  // namespace detail

/// Builds y1, y2 from local series about z = 0, checks them in the scalar
/// equation, fits C1, C2 to the propagated b1, and discriminates the two
/// candidate prefactors and the candidate fifth Heun argument by residuals.
inline HeunVerifyReport verify_heun_solution(const ModelParams& p, std::span<const double> tau_grid,
                                              double residual_tol = 1e-8) {
  if (tau_grid.size() < 2) throw DomainError("heun verify: need at least two grid points");
  HeunVerifyReport rep;
  rep.map = lorentzian_to_gswe(p);
  const double a = rep.map.omega0T, d = rep.map.deltaT;
  rep.derived = {2.0 * d, -0.5 * a, 0.5 * a, 2.0 * d, a * a / 8.0 - d};
  rep.candidate_eta = (a - d) / 8.0;
  rep.grid_points = tau_grid.size();
  for (double t : tau_grid) {
    if (std::abs(z_of_tau(t)) > 0.9) throw DomainError("heun verify: grid point outside 0.9 x convergence disk");
  }

  const FrobeniusSolution g0 = frobenius_solve(rep.map.g, false, 0);
  const FrobeniusSolution g1 = frobenius_solve(rep.map.g, false, 1);
  auto heunc_pair = [&](cplx eta) {
    HeunCParams lo = rep.derived, hi = rep.derived;
    lo.eta = eta;
    hi.eta = eta;
    hi.beta = -lo.beta;
    // Regular solution for beta = -a/2 and z^(a/2) times the regular one for beta = +a/2.
    return std::pair{FrobeniusSolution(heunc_local_equation(lo), 0.0, 800),
                     FrobeniusSolution(heunc_local_equation(hi), 0.0, 800)};
  };
  const auto derived_pair = heunc_pair(rep.derived.eta);
  const auto candidate_pair = heunc_pair(rep.candidate_eta);
  const cplx half_a = 0.5 * a;

  std::vector<std::array<cplx, 2>> basis(tau_grid.size());
  for (std::size_t k = 0; k < tau_grid.size(); ++k) {
    const double t = tau_grid[k];
    const cplx z = z_of_tau(t);
    const std::array<Jet, 2> gs{g1(z), g0(z)};
    for (int j = 0; j < 2; ++j) {
      const auto y = detail::compose(t, -0.5, d, 0.25 * a, gs[j]);
      rep.residual_gswe_basis = std::max(rep.residual_gswe_basis, detail::scalar_relative_residual(t, a, d, y));
    }
    const std::array<Jet, 2> hd{detail::times_power(z, half_a, derived_pair.second.series(z)),
                                derived_pair.first.series(z)};
    const std::array<Jet, 2> hp{detail::times_power(z, half_a, candidate_pair.second.series(z)),
                                candidate_pair.first.series(z)};
    for (int j = 0; j < 2; ++j) {
      const auto y = detail::compose(t, -1.0, d, 0.25 * a, hd[j]);
      basis[k][j] = y.y;
      rep.residual_heunc_basis = std::max(rep.residual_heunc_basis, detail::scalar_relative_residual(t, a, d, y));
      const auto yo = detail::compose(t, +1.0, d, -0.25 * a, hd[j]);
      rep.residual_other_prefactor =
          std::max(rep.residual_other_prefactor, detail::scalar_relative_residual(t, a, d, yo));
      const auto yp = detail::compose(t, -1.0, d, 0.25 * a, hp[j]);
      rep.residual_candidate_eta = std::max(rep.residual_candidate_eta, detail::scalar_relative_residual(t, a, d, yp));
    }
  }
  rep.prefactor_minus_ok = rep.residual_heunc_basis <= residual_tol;
  rep.prefactor_plus_ok = rep.residual_other_prefactor <= residual_tol;
  rep.candidate_eta_ok = rep.residual_candidate_eta <= residual_tol;

  // Fit to the propagated b1: normal equations for min sum |C1 y1 + C2 y2 - b1|^2.
  PropagationSettings ps;
  ps.rel_tol = 1e-12;
  ps.abs_tol = 1e-14;
  const auto traj = sample_trajectory(p, tau_grid, ps);
  cplx g11{}, g12{}, g22{}, h1{}, h2{};
  for (std::size_t k = 0; k < tau_grid.size(); ++k) {
    const cplx y1 = basis[k][0], y2 = basis[k][1], b = traj[k].c1;
    g11 += std::conj(y1) * y1;
    g12 += std::conj(y1) * y2;
    g22 += std::conj(y2) * y2;
    h1 += std::conj(y1) * b;
    h2 += std::conj(y2) * b;
  }
  const cplx det = g11 * g22 - g12 * std::conj(g12);
  rep.c1 = (h1 * g22 - g12 * h2) / det;
  rep.c2 = (g11 * h2 - std::conj(g12) * h1) / det;
  for (std::size_t k = 0; k < tau_grid.size(); ++k) {
    const cplx fit = rep.c1 * basis[k][0] + rep.c2 * basis[k][1];
    rep.fit_max_error = std::max(rep.fit_max_error, std::abs(fit - traj[k].c1));
  }
  return rep;
}

}  // namespace ltls::heun
