#pragma once

// Incomplete Legendre elliptic integrals for complex amplitude, parameter and
// characteristic. Parameter convention throughout: the integrands contain
// 1 - m sin^2 t, with m entering directly (no modulus squaring).
//
//   F(phi|m)    = int_0^phi (1 - m sin^2 t)^(-1/2) dt
//   E(phi|m)    = int_0^phi (1 - m sin^2 t)^(1/2) dt
//   Pi(n;phi|m) = int_0^phi (1 - n sin^2 t)^(-1) (1 - m sin^2 t)^(-1/2) dt
//
// The square roots are continued along the straight path from t = 0, where
// they equal 1. Carlson's symmetric forms give the same value whenever none
// of their arguments crosses the negative real axis along that path; when one
// does, the integral is evaluated by path quadrature instead.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>

#include "ltls/errors.hpp"
#include "ltls/quadrature.hpp"

namespace ltls::elliptic {

using cplx = std::complex<double>;

namespace detail {

inline constexpr int kMaxDuplications = 200;

inline double max_abs(std::initializer_list<cplx> v) {
  double m = 0.0;
  for (const cplx& z : v) m = std::max(m, std::abs(z));
  return m;
}

// R_C(1, 1 + e) = atan(sqrt(e))/sqrt(e).
inline cplx rc_one(cplx e) {
  if (std::abs(e) < 1e-4) return 1.0 - e / 3.0 + e * e / 5.0 - e * e * e / 7.0 + e * e * e * e / 9.0;
  const cplx s = std::sqrt(e);
  return std::atan(s) / s;
}

}  // namespace detail

/// R_F(x, y, z); empty when the duplication does not converge.
inline std::optional<cplx> carlson_rf(cplx x, cplx y, cplx z) {
  const double tol = std::pow(3.0 * std::numeric_limits<double>::epsilon(), -1.0 / 6.0);
  const cplx x0 = x, y0 = y;
  const cplx a0 = (x + y + z) / 3.0;
  const double q = tol * detail::max_abs({a0 - x, a0 - y, a0 - z});
  cplx a = a0;
  double f = 1.0;
  for (int i = 0; f * q >= std::abs(a); ++i) {
    if (i > detail::kMaxDuplications) return std::nullopt;
    const cplx sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
    const cplx l = sx * sy + sx * sz + sy * sz;
    x = 0.25 * (x + l);
    y = 0.25 * (y + l);
    z = 0.25 * (z + l);
    a = 0.25 * (a + l);
    f *= 0.25;
  }
  const cplx X = (a0 - x0) / a * f;
  const cplx Y = (a0 - y0) / a * f;
  const cplx Z = -X - Y;
  const cplx e2 = X * Y - Z * Z;
  const cplx e3 = X * Y * Z;
  const cplx r = (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / std::sqrt(a);
  if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) return std::nullopt;
  return r;
}

/// R_J(x, y, z, p); empty when the duplication does not converge.
inline std::optional<cplx> carlson_rj(cplx x, cplx y, cplx z, cplx p) {
  const double tol = std::pow(0.25 * std::numeric_limits<double>::epsilon(), -1.0 / 6.0);
  const cplx x0 = x, y0 = y, z0 = z;
  const cplx a0 = (x + y + z + 2.0 * p) / 5.0;
  const cplx delta = (p - x) * (p - y) * (p - z);
  const double q = tol * detail::max_abs({a0 - x, a0 - y, a0 - z, a0 - p});
  cplx a = a0;
  double f = 1.0;
  cplx sum{};
  for (int i = 0; f * q >= std::abs(a); ++i) {
    if (i > detail::kMaxDuplications) return std::nullopt;
    const cplx sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z), sp = std::sqrt(p);
    const cplx l = sx * sy + sx * sz + sy * sz;
    const cplx d = (sp + sx) * (sp + sy) * (sp + sz);
    const cplx e = f * f * f * delta / (d * d);
    sum += f * detail::rc_one(e) / d;
    x = 0.25 * (x + l);
    y = 0.25 * (y + l);
    z = 0.25 * (z + l);
    p = 0.25 * (p + l);
    a = 0.25 * (a + l);
    f *= 0.25;
  }
  const cplx X = (a0 - x0) / a * f;
  const cplx Y = (a0 - y0) / a * f;
  const cplx Z = (a0 - z0) / a * f;
  const cplx P = -0.5 * (X + Y + Z);
  const cplx e2 = X * Y + X * Z + Y * Z - 3.0 * P * P;
  const cplx e3 = X * Y * Z + 2.0 * e2 * P + 4.0 * P * P * P;
  const cplx e4 = (2.0 * X * Y * Z + e2 * P + 3.0 * P * P * P) * P;
  const cplx e5 = X * Y * Z * P * P;
  const cplx series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0 -
                      9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0;
  const cplx r = f * series / (a * std::sqrt(a)) + 6.0 * sum;
  if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) return std::nullopt;
  return r;
}

/// R_D(x, y, z) = R_J(x, y, z, z).
inline std::optional<cplx> carlson_rd(cplx x, cplx y, cplx z) { return carlson_rj(x, y, z, z); }

/// Which route produced a value.
enum class Method { carlson, quadrature };

struct Value {
  cplx value{};
  Method method = Method::carlson;
};

/// The Carlson arguments along the path t = s*phi, s in [0, 1]. A precomputed
/// end point can be supplied so exact zeros at phi are not lost to rounding.
struct LegendreArgs {
  cplx sin_phi{};
  cplx cos2{};    // cos^2 phi
  cplx y{};       // 1 - m sin^2 phi
  cplx p{1.0};    // 1 - n sin^2 phi
};

inline LegendreArgs legendre_args(cplx phi, cplx m, cplx n = 0.0) {
  const cplx s = std::sin(phi);
  const cplx c = std::cos(phi);
  return {s, c * c, 1.0 - m * s * s, 1.0 - n * s * s};
}

/// True when none of cos^2 t, 1 - m sin^2 t, 1 - n sin^2 t crosses the
/// negative real axis for t on the straight segment 0 -> phi. Sign changes of
/// the imaginary part between 256 samples are located by bisection. A zero
/// exactly at the end point is allowed.
inline bool carlson_path_ok(cplx phi, cplx m, cplx n = 0.0, int samples = 256) {
  auto arg = [&](double u, int j) {
    const LegendreArgs g = legendre_args(u * phi, m, n);
    return j == 0 ? g.cos2 : (j == 1 ? g.y : g.p);
  };
  for (int j = 0; j < 3; ++j) {
    double ua = 0.0;
    cplx a = arg(0.0, j);
    for (int i = 1; i <= samples; ++i) {
      const double ub = double(i) / samples;
      const cplx b = arg(ub, j);
      const double scale = std::max({1.0, std::abs(a), std::abs(b)});
      const bool end_zero = (i == samples && std::abs(b) <= 1e-12 * scale);
      if (!end_zero) {
        if (b.imag() == 0.0 && b.real() <= 0.0) return false;
        if ((a.imag() < 0.0) != (b.imag() < 0.0) && a.imag() != 0.0) {
          double lo = ua, hi = ub;
          const bool lo_neg = a.imag() < 0.0;
          cplx mid = a;
          for (int k = 0; k < 60; ++k) {
            const double um = 0.5 * (lo + hi);
            mid = arg(um, j);
            if ((mid.imag() < 0.0) == lo_neg) lo = um;
            else hi = um;
          }
          if (mid.real() <= 1e-12 * scale) return false;
        }
      }
      ua = ub;
      a = b;
    }
  }
  return true;
}

/// Conditions under which the R_J duplication is known to follow the
/// principal branch for complex arguments; elsewhere it may not.
inline bool carlson_rj_safe(cplx x, cplx y, cplx z, cplx p) {
  if (x.real() >= 0.0 && y.real() >= 0.0 && z.real() >= 0.0 && p.real() >= 0.0 && p != cplx{}) return true;
  if (x == p || y == p || z == p) return true;
  if (p.imag() != 0.0 || p.real() >= 0.0) {
    if (x.imag() == 0.0 && x.real() >= 0.0 && std::conj(y) == z) return true;
    if (y.imag() == 0.0 && y.real() >= 0.0 && std::conj(x) == z) return true;
    if (z.imag() == 0.0 && z.real() >= 0.0 && std::conj(x) == y) return true;
  }
  return false;
}

namespace detail {

struct Carlson3 {
  cplx f, e, pi;
};

// F, E and the standard Pi from Carlson forms at the given end-point
// arguments; empty if any duplication fails.
inline std::optional<Carlson3> carlson_legendre(const LegendreArgs& g, cplx m, cplx n, bool want_pi) {
  const cplx s = g.sin_phi;
  const cplx s3 = s * s * s;
  const auto rf = carlson_rf(g.cos2, g.y, 1.0);
  if (!rf) return std::nullopt;
  Carlson3 out{};
  out.f = s * *rf;
  if (m == cplx{}) {
    out.e = out.f;
  } else {
    // R_D is R_J with p = z, always inside the safe set.
    const auto rd = carlson_rd(g.cos2, g.y, 1.0);
    if (!rd) return std::nullopt;
    out.e = out.f - m / 3.0 * s3 * *rd;
  }
  if (want_pi) {
    if (n == cplx{}) {
      out.pi = out.f;
    } else {
      if (!carlson_rj_safe(g.cos2, g.y, 1.0, g.p)) return std::nullopt;
      const auto rj = carlson_rj(g.cos2, g.y, 1.0, g.p);
      if (!rj) return std::nullopt;
      out.pi = out.f + n / 3.0 * s3 * *rj;
    }
  }
  return out;
}

inline quad::PathOptions path_options() {
  quad::PathOptions o;
  o.abs_tol = 1e-15;
  o.rel_tol = 1e-14;
  o.allow_end_zero = true;
  return o;
}

// int_0^phi g(t) w(t)^(power/2) dt on the straight path.
template <typename W, typename G>
cplx path_integral(cplx phi, W&& w, G&& g, int power) {
  if (phi == cplx{}) return {};
  const std::array<cplx, 2> v{cplx{}, phi};
  return quad::integrate_sqrt_path(std::span<const cplx>(v), w, g, power, cplx{1.0, 0.0}, path_options())
      .value;
}

inline cplx sin2(cplx t) {
  const cplx s = std::sin(t);
  return s * s;
}

}  // namespace detail

/// F(phi|m) with the route taken.
inline Value elliptic_f_ex(cplx phi, cplx m) {
  if (phi == cplx{}) return {};
  if (carlson_path_ok(phi, m)) {
    if (auto c = detail::carlson_legendre(legendre_args(phi, m), m, 0.0, false)) return {c->f, Method::carlson};
  }
  auto w = [&](cplx t) { return 1.0 - m * detail::sin2(t); };
  auto one = [](cplx) { return cplx{1.0}; };
  return {detail::path_integral(phi, w, one, -1), Method::quadrature};
}

inline Value elliptic_e_ex(cplx phi, cplx m) {
  if (phi == cplx{}) return {};
  if (carlson_path_ok(phi, m)) {
    if (auto c = detail::carlson_legendre(legendre_args(phi, m), m, 0.0, false)) return {c->e, Method::carlson};
  }
  auto w = [&](cplx t) { return 1.0 - m * detail::sin2(t); };
  auto one = [](cplx) { return cplx{1.0}; };
  return {detail::path_integral(phi, w, one, +1), Method::quadrature};
}

/// Standard Legendre Pi(n; phi|m).
inline Value elliptic_pi_ex(cplx n, cplx phi, cplx m) {
  if (phi == cplx{}) return {};
  if (carlson_path_ok(phi, m, n)) {
    if (auto c = detail::carlson_legendre(legendre_args(phi, m, n), m, n, true)) return {c->pi, Method::carlson};
  }
  // The pole factor has no square root; a zero of it on the path is a pinch.
  auto w = [&](cplx t) { return 1.0 - m * detail::sin2(t); };
  auto g = [&](cplx t) {
    const cplx q = 1.0 - n * detail::sin2(t);
    if (q == cplx{}) throw BranchPinchError("1 - n sin^2 t vanishes on the path");
    return 1.0 / q;
  };
  return {detail::path_integral(phi, w, g, -1), Method::quadrature};
}

/// Symmetric variant int_0^phi [(1 - n sin^2 t)(1 - m sin^2 t)]^(-1/2) dt.
/// With c = cos^2, y = 1 - m sin^2, p = 1 - n sin^2 this equals
/// sin(phi) R_F(c, y, p) for a cut-free path.
inline Value elliptic_pi_symmetric_ex(cplx n, cplx phi, cplx m) {
  if (phi == cplx{}) return {};
  if (carlson_path_ok(phi, m, n)) {
    const LegendreArgs g = legendre_args(phi, m, n);
    if (auto rf = carlson_rf(g.cos2, g.y, g.p)) return {g.sin_phi * *rf, Method::carlson};
  }
  auto w = [&](cplx t) {
    const cplx s2 = detail::sin2(t);
    return (1.0 - n * s2) * (1.0 - m * s2);
  };
  auto one = [](cplx) { return cplx{1.0}; };
  return {detail::path_integral(phi, w, one, -1), Method::quadrature};
}

inline cplx elliptic_f(cplx phi, cplx m) { return elliptic_f_ex(phi, m).value; }
inline cplx elliptic_e(cplx phi, cplx m) { return elliptic_e_ex(phi, m).value; }
inline cplx elliptic_pi(cplx n, cplx phi, cplx m) { return elliptic_pi_ex(n, phi, m).value; }
inline cplx elliptic_pi_symmetric(cplx n, cplx phi, cplx m) { return elliptic_pi_symmetric_ex(n, phi, m).value; }

/// F, E, standard Pi and symmetric Pi at once, from end-point arguments that
/// the caller knows exactly (e.g. 1 - m sin^2 phi = 0 at a branch point).
struct LegendreSet {
  cplx f, e, pi, pi_symmetric;
  Method method = Method::carlson;
};

inline LegendreSet legendre_set(cplx phi, cplx m, cplx n, const std::optional<LegendreArgs>& exact = std::nullopt) {
  LegendreSet out;
  if (carlson_path_ok(phi, m, n)) {
    const LegendreArgs g = exact ? *exact : legendre_args(phi, m, n);
    const auto c = detail::carlson_legendre(g, m, n, true);
    const auto rf = carlson_rf(g.cos2, g.y, g.p);
    if (c && rf) {
      out.f = c->f;
      out.e = c->e;
      out.pi = c->pi;
      out.pi_symmetric = g.sin_phi * *rf;
      return out;
    }
  }
  out.f = elliptic_f_ex(phi, m).value;
  out.e = elliptic_e_ex(phi, m).value;
  out.pi = elliptic_pi_ex(n, phi, m).value;
  out.pi_symmetric = elliptic_pi_symmetric_ex(n, phi, m).value;
  out.method = Method::quadrature;
  return out;
}

}  // namespace ltls::elliptic
