#pragma once

// Exact numerical reference for the transition probability.
//
// The coupled equations are integrated in the interaction picture
//   b1 = c1 exp(-i deltaT tau / 2),  b2 = c2 exp(+i deltaT tau / 2)
// over the compactified time theta with tau = tan(theta). In theta the
// coupling is the constant omega0T/2 times a phase exp(-+i deltaT tan(theta)),
// so the 1/tau^2 envelope tail costs nothing. On resonance the whole interval
// (-pi/2, pi/2) is integrated. Off resonance the phase oscillates without
// bound near the ends, so integration stops at |tau| = L and the two tails
// are applied as the exponentiated first-order (Magnus) propagator built from
//   I(L) = int_L^inf exp(i deltaT tau) / (1 + tau^2) dtau,
// which is exact through second order in the tail coupling and unitary.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "ltls/core_model.hpp"
#include "ltls/ode.hpp"
#include "ltls/quadrature.hpp"

namespace ltls {

struct PropagationSettings {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  // Distance of the integration end points from +-pi/2 in theta. Zero selects
  // it from abs_tol via the tail error model.
  double margin = 0.0;
  std::size_t max_steps = 20'000'000;
};

struct PropagationResult {
  // Amplitudes at t -> +inf. For the diabatic propagators these are the
  // interaction-picture amplitudes (b1, b2); |b2|^2 = |c2|^2. For the
  // adiabatic propagator they are (a-, a+) up to dynamic phases.
  StateAmplitudes final_state;
  double transition_probability = 0.0;
  double norm_defect = 0.0;
  std::size_t steps = 0;
  // |tau| at which numerical integration stopped (inf on resonance).
  double cutoff_tau = 0.0;
};

namespace detail {

inline void validate(const PropagationSettings& s) {
  if (!(s.rel_tol > 0.0) || s.rel_tol > 1e-3) throw DomainError("rel_tol must lie in (0, 1e-3]");
  if (!(s.abs_tol > 0.0)) throw DomainError("abs_tol must be positive");
  if (s.margin < 0.0 || s.margin >= 0.5) throw DomainError("margin must lie in [0, 0.5)");
}

inline ode::Tolerances tolerances(const PropagationSettings& s) {
  return {s.rel_tol, s.abs_tol, s.max_steps};
}

}  // namespace detail

/// I(L) = int_L^inf exp(i d tau)/(1+tau^2) dtau for L > 0, d >= 0. Evaluated on
/// the vertical contour tau = L + i u/d, which encloses no pole.
inline cplx lorentzian_tail_transform(double L, double d) {
  if (d == 0.0) return {std::atan(1.0 / L), 0.0};
  auto f = [&](double u) -> cplx {
    const cplx tau{L, u / d};
    return std::exp(-u) / (1.0 + tau * tau);
  };
  const quad::Result r = quad::integrate(f, 0.0, 60.0, 0.0, 1e-13);
  return cplx{0.0, 1.0} * std::exp(cplx{0.0, d * L}) / d * r.value;
}

/// Cutoff |tau| for the coupled propagator. The leftover error after the
/// Magnus tail is ~ (omega0T/(2 deltaT L^2)) * omega0T^2/(12 deltaT L^3).
inline double coupled_cutoff(double a, double d, const PropagationSettings& s) {
  if (s.margin > 0.0) return 1.0 / std::tan(s.margin);
  const double dd = std::max(d, 1e-3);
  const double model = std::pow(a * a * a / (24.0 * dd * dd * s.abs_tol), 0.2);
  return std::clamp(std::max({20.0, 20.0 / d, model}), 20.0, 1e8);
}

/// Cutoff for forms whose tail is only handled to first order: the neglected
/// term is the square of the first-order tail amplitude.
inline double first_order_cutoff(double coupling_scale, double d, double power,
                                 const PropagationSettings& s) {
  if (s.margin > 0.0) return 1.0 / std::tan(s.margin);
  const double target = 0.1 * std::sqrt(s.abs_tol);
  const double dd = std::max(d, 1e-3);
  // amplitude ~ coupling_scale / (d L^power)
  const double model = std::pow(coupling_scale / (dd * target), 1.0 / power);
  return std::clamp(std::max({20.0, 20.0 / d, model}), 20.0, 1e8);
}

namespace detail {

// exp(-i K) psi with K = h [[0, conj(j)], [j, 0]].
inline void apply_tail(double h, cplx j, cplx& b1, cplx& b2) {
  const double r = h * std::abs(j);
  if (r == 0.0) return;
  const double c = std::cos(r);
  const double sr = std::sin(r) / r;
  const cplx n1 = c * b1 - cplx{0.0, 1.0} * sr * h * std::conj(j) * b2;
  const cplx n2 = c * b2 - cplx{0.0, 1.0} * sr * h * j * b1;
  b1 = n1;
  b2 = n2;
}

struct CoupledRhs {
  double half_a;
  double d;
  void operator()(double theta, const ode::State<2>& y, ode::State<2>& dy) const {
    const double tau = std::tan(theta);
    const cplx ph = std::polar(1.0, d * tau);
    dy[0] = cplx{0.0, -half_a} * std::conj(ph) * y[1];
    dy[1] = cplx{0.0, -half_a} * ph * y[0];
  }
};

}  // namespace detail

/// Integrates i c' = H c from c = (1, 0) at t = -inf to t = +inf; the
/// transition probability is |c2(+inf)|^2.
inline PropagationResult propagate(const ModelParams& p, const PropagationSettings& s = {}) {
  detail::validate(s);
  const double a = p.omega0T();
  const double d = p.deltaT();
  const bool full = (d == 0.0 && s.margin == 0.0);
  const double L = full ? std::numeric_limits<double>::infinity() : coupled_cutoff(a, d, s);
  const double th = full ? 0.5 * kPi : std::atan(L);

  ode::State<2> y{cplx{1.0, 0.0}, cplx{}};
  cplx tail{};
  if (!full) {
    tail = lorentzian_tail_transform(L, d);
    // Incoming tail (-inf, -L]: the transform there is conj(I(L)).
    detail::apply_tail(0.5 * a, std::conj(tail), y[0], y[1]);
  }
  ode::DormandPrince<2> dp(detail::tolerances(s));
  dp.advance(detail::CoupledRhs{0.5 * a, d}, y, -th, th);
  if (!full) detail::apply_tail(0.5 * a, tail, y[0], y[1]);

  PropagationResult r;
  r.final_state = {y[0], y[1]};
  r.transition_probability = std::norm(y[1]);
  r.norm_defect = std::abs(r.final_state.norm_sq() - 1.0);
  r.steps = dp.stats().accepted;
  r.cutoff_tau = L;
  return r;
}

/// Interaction-picture amplitudes (b1, b2) at the requested dimensionless
/// times (any order; |tau| must stay inside the integration cutoff).
inline std::vector<StateAmplitudes> sample_trajectory(const ModelParams& p, std::span<const double> taus,
                                                      const PropagationSettings& s = {}) {
  detail::validate(s);
  const double a = p.omega0T();
  const double d = p.deltaT();
  const bool full = (d == 0.0 && s.margin == 0.0);
  const double L = full ? std::numeric_limits<double>::infinity() : coupled_cutoff(a, d, s);
  const double th0 = full ? -0.5 * kPi : -std::atan(L);

  std::vector<std::size_t> order(taus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return taus[i] < taus[j]; });

  ode::State<2> y{cplx{1.0, 0.0}, cplx{}};
  if (!full) detail::apply_tail(0.5 * a, std::conj(lorentzian_tail_transform(L, d)), y[0], y[1]);
  ode::DormandPrince<2> dp(detail::tolerances(s));
  std::vector<StateAmplitudes> out(taus.size());
  double th = th0;
  for (std::size_t i : order) {
    if (std::abs(taus[i]) >= L) throw DomainError("sample time outside the integration cutoff");
    const double target = std::atan(taus[i]);
    dp.advance(detail::CoupledRhs{0.5 * a, d}, y, th, target);
    th = target;
    out[i] = {y[0], y[1]};
  }
  return out;
}

/// The second-order scalar form
///   y'' + (2 tau/(1+tau^2) + i deltaT) y' + omega0T^2 / (4 (1+tau^2)^2) y = 0,
/// integrated as it stands for y(-inf) = 1, y'(-inf) = 0. Its solution is the
/// interaction-picture amplitude b1, so P = 1 - |y(+inf)|^2. The state is
/// (y, w) with w = (1+tau^2) y', advanced in theta; both tails are taken to
/// first order from the equation itself.
inline PropagationResult propagate_ode_form(const ModelParams& p, const PropagationSettings& s = {}) {
  detail::validate(s);
  const double a = p.omega0T();
  const double d = p.deltaT();
  const bool full = (d == 0.0 && s.margin == 0.0);
  const double L = full ? std::numeric_limits<double>::infinity()
                        : first_order_cutoff(0.25 * a * a, d, 2.0, s);
  const double th = full ? 0.5 * kPi : std::atan(L);

  ode::State<2> y{cplx{1.0, 0.0}, cplx{}};
  cplx tail{};
  if (!full) {
    tail = lorentzian_tail_transform(L, d);
    y[1] = -0.25 * a * a * std::polar(1.0, d * L) * std::conj(tail);
  }
  auto rhs = [q = 0.25 * a * a, d](double theta, const ode::State<2>& u, ode::State<2>& du) {
    const double c = std::cos(theta);
    const double sec2 = 1.0 / (c * c);
    du[0] = u[1];
    du[1] = cplx{0.0, -d * sec2} * u[1] - q * u[0];
  };
  ode::DormandPrince<2> dp(detail::tolerances(s));
  dp.advance(rhs, y, -th, th);
  cplx y_end = y[0];
  // w = (1+tau^2) y' = -i (omega0T/2) exp(-i deltaT tau) b2 recovers the
  // second amplitude for the norm check.
  const double tau_end = full ? 0.0 : L;
  cplx b2 = cplx{0.0, 2.0 / a} * std::polar(1.0, d * tau_end) * y[1];
  if (!full) {
    y_end += y[1] * std::polar(1.0, d * L) * std::conj(tail);
    b2 += cplx{0.0, -0.5 * a} * tail * y[0];
  }

  PropagationResult r;
  r.final_state = {y_end, b2};
  r.transition_probability = std::clamp(1.0 - std::norm(y_end), 0.0, 1.0);
  r.norm_defect = std::abs(r.final_state.norm_sq() - 1.0);
  r.steps = dp.stats().accepted;
  r.cutoff_tau = L;
  return r;
}

}  // namespace ltls
