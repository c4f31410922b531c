#pragma once

// Two-state system driven by a Lorentzian pulse in the rotating-wave
// approximation. Physical units appear only here; everything downstream works
// with the dimensionless time tau = t/T and the pair (omega0*T, delta*T).

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "ltls/errors.hpp"

namespace ltls {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Physical configuration: peak Rabi frequency, detuning, pulse width.
class ModelParams {
 public:
  ModelParams(double omega0, double delta, double T) : omega0_(omega0), delta_(delta), T_(T) {
    if (!(omega0 > 0.0) || !std::isfinite(omega0))
      throw DomainError("omega0 must be positive and finite, got " + std::to_string(omega0));
    if (!(delta >= 0.0) || !std::isfinite(delta))
      throw DomainError("delta must be non-negative and finite, got " + std::to_string(delta) +
                        " (the transition probability is even in delta; use |delta|)");
    if (!(T > 0.0) || !std::isfinite(T))
      throw DomainError("T must be positive and finite, got " + std::to_string(T));
  }

  /// Builds parameters from the dimensionless pair with T = 1.
  static ModelParams dimensionless(double omega0T, double deltaT) { return {omega0T, deltaT, 1.0}; }

  double omega0() const noexcept { return omega0_; }
  double delta() const noexcept { return delta_; }
  double T() const noexcept { return T_; }

  double omega0T() const noexcept { return omega0_ * T_; }
  double deltaT() const noexcept { return delta_ * T_; }

  bool resonant() const noexcept { return delta_ == 0.0; }

  /// Coupling-to-detuning ratio omega0/delta; empty on resonance.
  std::optional<double> alpha() const noexcept {
    if (resonant()) return std::nullopt;
    return omega0_ / delta_;
  }

  /// alpha() for callers that require delta > 0.
  double alpha_or_throw() const {
    if (resonant()) throw ResonantDegeneracyError("alpha = omega0/delta is undefined on resonance");
    return omega0_ / delta_;
  }

 private:
  double omega0_;
  double delta_;
  double T_;
};

/// Diabatic-basis probability amplitudes (c1, c2).
struct StateAmplitudes {
  cplx c1{1.0, 0.0};
  cplx c2{0.0, 0.0};

  double norm_sq() const noexcept { return std::norm(c1) + std::norm(c2); }
};

/// 2x2 RWA Hamiltonian in units of hbar (rad/time); row-major.
struct Hamiltonian2 {
  std::array<std::array<cplx, 2>, 2> m{};

  const cplx& operator()(int r, int c) const { return m[r][c]; }
  cplx& operator()(int r, int c) { return m[r][c]; }

  cplx trace() const { return m[0][0] + m[1][1]; }

  bool hermitian(double tol = 0.0) const {
    return std::abs(m[0][1] - std::conj(m[1][0])) <= tol && std::abs(m[0][0].imag()) <= tol &&
           std::abs(m[1][1].imag()) <= tol;
  }
};

/// Lorentzian envelope Omega(t) = omega0 / (1 + t^2/T^2).
inline double rabi_frequency(const ModelParams& p, double t) noexcept {
  if (std::isinf(t)) return 0.0;
  const double x = t / p.T();
  return p.omega0() / (1.0 + x * x);
}

/// Dimensionless envelope in units of 1/T: omega0T / (1 + tau^2). Valid for
/// complex tau away from the poles at +-i.
template <typename X>
inline X rabi_frequency_tau(double omega0T, X tau) {
  return omega0T / (X(1.0) + tau * tau);
}

/// H(t) = 1/2 [[-delta, Omega(t)], [Omega(t), delta]].
inline Hamiltonian2 hamiltonian(const ModelParams& p, double t) noexcept {
  const double om = rabi_frequency(p, t);
  Hamiltonian2 h;
  h(0, 0) = -0.5 * p.delta();
  h(0, 1) = 0.5 * om;
  h(1, 0) = 0.5 * om;
  h(1, 1) = 0.5 * p.delta();
  return h;
}

}  // namespace ltls
