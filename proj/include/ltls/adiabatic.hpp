#pragma once

// Adiabatic basis of the RWA Hamiltonian: mixing angle, quasi-energies,
// rotation to the diabatic basis and the transformed Hamiltonian, plus a
// propagator that works in that basis.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "ltls/core_model.hpp"
#include "ltls/ode.hpp"
#include "ltls/propagator.hpp"

namespace ltls {

/// Mixing angle with tan(2 theta) = Omega/delta, 0 <= theta <= pi/4.
struct MixingAngle {
  double theta = 0.0;
};

struct QuasiEnergies {
  double e_minus = 0.0;
  double e_plus = 0.0;
  double splitting = 0.0;
};

using Matrix2 = std::array<std::array<double, 2>, 2>;
using CMatrix2 = std::array<std::array<cplx, 2>, 2>;

inline MixingAngle mixing_angle(const ModelParams& p, double t) {
  if (p.resonant()) throw ResonantDegeneracyError("mixing angle is pinned at pi/4 on resonance");
  return {0.5 * std::atan2(rabi_frequency(p, t), p.delta())};
}

/// Time derivative of the mixing angle, d theta/dt = delta*Omega'/(2(Omega^2+delta^2)).
inline double mixing_angle_rate(const ModelParams& p, double t) {
  if (p.resonant()) throw ResonantDegeneracyError("mixing angle is pinned at pi/4 on resonance");
  if (std::isinf(t)) return 0.0;
  const double x = t / p.T();
  const double den = 1.0 + x * x;
  const double om = p.omega0() / den;
  const double om_dot = -2.0 * p.omega0() * x / (den * den * p.T());
  return p.delta() * om_dot / (2.0 * (om * om + p.delta() * p.delta()));
}

/// E-+ = (delta -+ sqrt(Omega^2 + delta^2))/2. These are the eigenvalues of
/// H + (delta/2) I; the shift is a common phase and drops out of P.
inline QuasiEnergies quasi_energies(const ModelParams& p, double t) {
  const double om = rabi_frequency(p, t);
  const double e = std::hypot(om, p.delta());
  return {0.5 * (p.delta() - e), 0.5 * (p.delta() + e), e};
}

/// R(theta) = [[cos, sin], [-sin, cos]]; c = R a maps adiabatic to diabatic amplitudes.
inline Matrix2 rotation(MixingAngle th) {
  const double c = std::cos(th.theta);
  const double s = std::sin(th.theta);
  return {{{c, s}, {-s, c}}};
}

/// R^T (H + delta/2) R - i R^T dR/dt = [[E-, -i theta'], [i theta', E+]].
inline CMatrix2 adiabatic_hamiltonian(const ModelParams& p, double t) {
  const QuasiEnergies q = quasi_energies(p, t);
  const double rate = mixing_angle_rate(p, t);
  CMatrix2 h{};
  h[0][0] = q.e_minus;
  h[1][1] = q.e_plus;
  h[0][1] = cplx{0.0, -rate};
  h[1][0] = cplx{0.0, rate};
  return h;
}

namespace detail {

// State (alpha-, alpha+, psi) with a-+ = alpha-+ exp(-i int E-+) and the
// accumulated splitting phase int E dtau = deltaT*tau + psi.
struct AdiabaticRhs {
  double a;
  double d;
  void operator()(double tau, const ode::State<3>& y, ode::State<3>& dy) const {
    const double den = 1.0 + tau * tau;
    const double om = a / den;
    const double e = std::hypot(om, d);
    const double rate = -d * a * tau / (den * den * (om * om + d * d));
    const cplx ph = std::polar(1.0, d * tau + y[2].real());
    dy[0] = -rate * std::conj(ph) * y[1];
    dy[1] = rate * ph * y[0];
    dy[2] = om * om / (e + d);
  }
};

}  // namespace detail

/// Cutoff |tau| for the adiabatic propagator. The neglected tail amplitude is
/// bounded by omega0T/(deltaT^2 L^3) (oscillatory estimate) and by
/// omega0T/(2 deltaT L^2) (no cancellation).
inline double adiabatic_cutoff(double a, double d, const PropagationSettings& s) {
  if (s.margin > 0.0) return 1.0 / std::tan(s.margin);
  const double eps = 0.01 * std::sqrt(s.abs_tol);
  const double l_osc = std::cbrt(a / (d * d * eps));
  const double l_flat = std::sqrt(a / (2.0 * d * eps));
  return std::clamp(std::max({20.0, 20.0 / d, std::min(l_osc, l_flat)}), 20.0, 1e8);
}

/// Integrates the adiabatic-basis equations from a-(-inf) = 1; P = |a+(+inf)|^2.
/// final_state holds (alpha-, alpha+) with the dynamic phases removed.
inline PropagationResult propagate_adiabatic(const ModelParams& p, const PropagationSettings& s = {}) {
  detail::validate(s);
  if (p.resonant()) throw ResonantDegeneracyError("adiabatic basis is degenerate on resonance");
  const double a = p.omega0T();
  const double d = p.deltaT();
  const double L = adiabatic_cutoff(a, d, s);

  ode::State<3> y{cplx{1.0, 0.0}, cplx{}, cplx{}};
  ode::DormandPrince<3> dp(detail::tolerances(s));
  dp.advance(detail::AdiabaticRhs{a, d}, y, -L, L);

  PropagationResult r;
  r.final_state = {y[0], y[1]};
  r.transition_probability = std::norm(y[1]);
  r.norm_defect = std::abs(r.final_state.norm_sq() - 1.0);
  r.steps = dp.stats().accepted;
  r.cutoff_tau = L;
  return r;
}

}  // namespace ltls
