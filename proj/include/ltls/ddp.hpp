#pragma once

// Dykhne-Davis-Pechukas approximation for the Lorentzian pulse.
//
// In units of delta the adiabatic splitting is
//   E(tau) = sqrt(alpha^2 + (1 + tau^2)^2) / (1 + tau^2),  alpha = omega0/delta,
// which vanishes at the transition points tau+- in the upper half-plane. The
// DDP integral is D = deltaT * int_0^{tau+} E(tau) dtau.

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <span>

#include "ltls/core_model.hpp"
#include "ltls/elliptic.hpp"
#include "ltls/errors.hpp"
#include "ltls/quadrature.hpp"

namespace ltls {

/// A point in the complex dimensionless time plane, tau = t/T.
using ComplexPoint = cplx;

struct TransitionPoints {
  ComplexPoint tau_plus;
  ComplexPoint tau_minus;
};

/// tau+- = +-sqrt((-1 + sqrt(1+alpha^2))/2) + i sqrt((1 + sqrt(1+alpha^2))/2).
inline TransitionPoints transition_points(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("transition points need alpha > 0");
  const double r = std::hypot(1.0, alpha);
  // (-1 + r)/2 written without cancellation for small alpha.
  const double re = std::sqrt(0.5 * alpha * alpha / (1.0 + r));
  const double im = std::sqrt(0.5 * (1.0 + r));
  return {{re, im}, {-re, im}};
}

/// alpha^2 + (1 + tau^2)^2, the radicand of the splitting.
template <typename X>
X splitting_radicand(double alpha, X tau) {
  const X u = X(1.0) + tau * tau;
  return X(alpha * alpha) + u * u;
}

/// Mixing-angle rate d theta/d tau = -alpha tau / (alpha^2 + (1+tau^2)^2),
/// continued to complex tau.
template <typename X>
X mixing_angle_rate_tau(double alpha, X tau) {
  return X(-alpha) * tau / splitting_radicand(alpha, tau);
}

struct DdpQuadratureOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-13;
  // Integrate along the straight ray 0 -> tau+ instead of 0 -> Re tau+ -> tau+.
  bool direct_ray = false;
};

/// deltaT * int_0^{tau+} E dtau by path quadrature, the square root continued
/// from its positive value at tau = 0.
inline cplx ddp_integral_quadrature(double alpha, double deltaT, const DdpQuadratureOptions& o = {}) {
  const TransitionPoints tp = transition_points(alpha);
  std::array<cplx, 3> v{cplx{}, cplx{tp.tau_plus.real(), 0.0}, tp.tau_plus};
  std::span<const cplx> path(v);
  if (o.direct_ray) {
    v[1] = tp.tau_plus;
    path = std::span<const cplx>(v.data(), 2);
  }
  quad::PathOptions po;
  po.abs_tol = o.abs_tol;
  po.rel_tol = o.rel_tol;
  po.allow_end_zero = true;
  auto w = [alpha](cplx t) { return splitting_radicand(alpha, t); };
  auto g = [](cplx t) { return 1.0 / (1.0 + t * t); };
  return deltaT * quad::integrate_sqrt_path(path, w, g, +1, cplx{1.0, 0.0}, po).value;
}

inline cplx ddp_integral_quadrature(const ModelParams& p, const DdpQuadratureOptions& o = {}) {
  return ddp_integral_quadrature(p.alpha_or_throw(), p.deltaT(), o);
}

/// Conventions the closed form leaves open.
struct ClosedFormVariant {
  // Standard Legendre Pi (true) or the symmetric integrand
  // [(1 - n sin^2)(1 - k sin^2)]^(-1/2) (false).
  bool standard_pi = true;
  // Amplitude phi = i asinh(tau+/sqrt(1 + i alpha)) (true) or
  // phi = i asinh(tau+/sqrt(2 + 2 i alpha)) (false).
  bool unit_scale = true;
};

struct ClosedFormTerms {
  cplx phi, k, n;
  elliptic::LegendreSet legendre;
};

inline ClosedFormTerms closed_form_terms(double alpha, bool unit_scale) {
  const TransitionPoints tp = transition_points(alpha);
  const cplx ia{0.0, alpha};
  const cplx scale = std::sqrt(unit_scale ? 1.0 + ia : 2.0 + 2.0 * ia);
  ClosedFormTerms t;
  t.phi = cplx{0.0, 1.0} * std::asinh(tp.tau_plus / scale);
  t.k = (1.0 + ia) / (1.0 - ia);
  t.n = 1.0 + ia;
  std::optional<elliptic::LegendreArgs> exact;
  if (unit_scale) {
    // sin(phi) = i tau+/sqrt(1 + i alpha); with tau+^2 = -1 + i alpha the
    // end point sits on the branch point 1 - k sin^2 phi = 0.
    elliptic::LegendreArgs g;
    g.sin_phi = cplx{0.0, 1.0} * tp.tau_plus / scale;
    g.cos2 = 2.0 * ia / (1.0 + ia);
    g.y = 0.0;
    g.p = ia;
    exact = g;
  }
  t.legendre = elliptic::legendre_set(t.phi, t.k, t.n, exact);
  return t;
}

/// (deltaT/sqrt(1 - i alpha)) [(-i - alpha) E + alpha F - i alpha^2 Pi] for a
/// chosen variant.
inline cplx ddp_integral_closed_form(double alpha, double deltaT, ClosedFormVariant v) {
  const ClosedFormTerms t = closed_form_terms(alpha, v.unit_scale);
  const cplx ia{0.0, alpha};
  const cplx pi = v.standard_pi ? t.legendre.pi : t.legendre.pi_symmetric;
  const cplx bracket = (-cplx{0.0, 1.0} - alpha) * t.legendre.e + alpha * t.legendre.f - ia * alpha * pi;
  return deltaT / std::sqrt(1.0 - ia) * bracket;
}

/// Closed form with the variant that reproduces the quadrature: standard Pi
/// and phi = i asinh(tau+/sqrt(1 + i alpha)).
inline cplx ddp_integral_closed_form(double alpha, double deltaT) {
  return ddp_integral_closed_form(alpha, deltaT, ClosedFormVariant{true, true});
}

inline cplx ddp_integral_closed_form(const ModelParams& p) {
  return ddp_integral_closed_form(p.alpha_or_throw(), p.deltaT());
}

struct GammaOptions {
  std::array<double, 3> approach_angles{0.3, 2.4, 4.4};
  // Largest step, relative to the distance to the nearest other pole of theta'.
  double h0 = 1e-2;
  int levels = 5;           // h0, h0/2, ... h0/2^(levels-1)
  double isotropy_tol = 1e-6;
};

struct GammaResult {
  cplx value;               // mean over the approach angles
  double spread = 0.0;      // max deviation of an angle from the mean
  std::array<cplx, 3> per_angle{};
};

/// 4i lim_{tau -> tau_k} (tau - tau_k) theta'(tau), extrapolated to h = 0 by
/// Richardson (Neville) on geometrically shrinking steps along several rays.
inline GammaResult gamma_factor(double alpha, bool plus, const GammaOptions& o = {}) {
  const TransitionPoints tp = transition_points(alpha);
  const cplx tk = plus ? tp.tau_plus : tp.tau_minus;
  if (o.levels < 2 || o.levels > 12) throw DomainError("gamma_factor: levels must be in [2, 12]");
  // The other poles of theta' are -conj(tk) and conj(tk).
  const double h0 = o.h0 * std::min(1.0, 2.0 * std::min(std::abs(tk.real()), tk.imag()));
  GammaResult r;
  cplx sum{};
  for (std::size_t a = 0; a < o.approach_angles.size(); ++a) {
    const cplx dir = std::polar(1.0, o.approach_angles[a]);
    std::array<cplx, 12> tab{};
    std::array<double, 12> hs{};
    for (int j = 0; j < o.levels; ++j) {
      hs[j] = h0 * std::ldexp(1.0, -j);
      const cplx dt = hs[j] * dir;
      tab[j] = cplx{0.0, 4.0} * dt * mixing_angle_rate_tau(alpha, tk + dt);
    }
    // Neville's scheme evaluated at h = 0.
    for (int m = 1; m < o.levels; ++m)
      for (int j = o.levels - 1; j >= m; --j)
        tab[j] = (hs[j - m] * tab[j] - hs[j] * tab[j - 1]) / (hs[j - m] - hs[j]);
    r.per_angle[a] = tab[o.levels - 1];
    sum += r.per_angle[a];
  }
  r.value = sum / double(o.approach_angles.size());
  for (const cplx& g : r.per_angle) r.spread = std::max(r.spread, std::abs(g - r.value));
  if (!(r.spread <= o.isotropy_tol))
    throw ConvergenceError("gamma_factor: limit depends on the approach direction", r.spread);
  return r;
}

inline GammaResult gamma_factor(const ModelParams& p, bool plus, const GammaOptions& o = {}) {
  return gamma_factor(p.alpha_or_throw(), plus, o);
}

/// DDP results at one parameter point.
struct DdpResult {
  cplx d_plus;                    // D(tau+)
  double probability = 0.0;       // sin^2(Re D) / cosh^2(Im D)
  double probability_raw = 0.0;   // 4 exp(-2 Im D) sin^2(Re D)
  double probability_two_point = 0.0;  // |G+ e^{i D+} + G- e^{i D-}|^2, D- = -conj(D+)
  double oscillation_phase = 0.0;  // Re D
  double damping = 0.0;            // Im D
  cplx gamma_plus, gamma_minus;
  // deltaT below the tested adiabatic window (deltaT >= 2).
  bool outside_validity = false;
};

inline constexpr double kAdiabaticWindowDeltaT = 2.0;

enum class DdpIntegral { closed_form, quadrature };

inline DdpResult ddp_probability(const ModelParams& p, DdpIntegral how = DdpIntegral::closed_form) {
  const double alpha = p.alpha_or_throw();
  DdpResult r;
  r.d_plus = how == DdpIntegral::closed_form ? ddp_integral_closed_form(alpha, p.deltaT())
                                             : ddp_integral_quadrature(alpha, p.deltaT());
  const double re = r.d_plus.real();
  const double im = r.d_plus.imag();
  const double s = std::sin(re);
  const double ch = std::cosh(im);
  r.probability = s * s / (ch * ch);
  r.probability_raw = 4.0 * std::exp(-2.0 * im) * s * s;
  r.gamma_plus = gamma_factor(alpha, true).value;
  r.gamma_minus = gamma_factor(alpha, false).value;
  const cplx d_minus = -std::conj(r.d_plus);
  const cplx i{0.0, 1.0};
  r.probability_two_point = std::norm(r.gamma_plus * std::exp(i * r.d_plus) + r.gamma_minus * std::exp(i * d_minus));
  r.oscillation_phase = re;
  r.damping = im;
  r.outside_validity = p.deltaT() < kAdiabaticWindowDeltaT;
  return r;
}

struct OscillationDescriptors {
  double amplitude;  // sech^2(Im D)
  double phase;      // Re D
};

inline OscillationDescriptors oscillation_descriptors(const ModelParams& p) {
  const cplx d = ddp_integral_closed_form(p);
  const double ch = std::cosh(d.imag());
  return {1.0 / (ch * ch), d.real()};
}

}  // namespace ltls
