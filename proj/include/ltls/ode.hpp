#pragma once

// Embedded Dormand-Prince 5(4) integrator with PI step-size control for
// small complex-valued systems. The state is a fixed-size array so that the
// right-hand side can be a plain lambda without allocations.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>

#include "ltls/errors.hpp"

namespace ltls::ode {

template <std::size_t N>
using State = std::array<std::complex<double>, N>;

struct Tolerances {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  std::size_t max_steps = 20'000'000;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

namespace detail {

// Dormand & Prince (1980) RK5(4)7M tableau.
struct DP54 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  // error coefficients: b5 - b4
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Adaptive integrator that can be advanced repeatedly through a sequence of
/// stop points; the step size carries over between calls.
template <std::size_t N>
class DormandPrince {
 public:
  explicit DormandPrince(Tolerances tol = {}) : tol_(tol) {}

  const Stats& stats() const noexcept { return stats_; }
  double last_step() const noexcept { return h_; }

  /// Integrates y from x0 to x1 (x1 may be < x0). Throws ConvergenceError on
  /// step-size underflow or when the step budget is exhausted.
  template <typename Rhs>
  void advance(Rhs&& f, State<N>& y, double x0, double x1) {
    using detail::DP54;
    if (x0 == x1) return;
    const double dir = x1 > x0 ? 1.0 : -1.0;
    const double span = std::abs(x1 - x0);

    State<N> k1, k2, k3, k4, k5, k6, k7, tmp, ynew;
    f(x0, y, k1);
    ++stats_.rhs_evals;

    double h = h_;
    if (!(h > 0.0)) h = initial_step(f, y, x0, dir, k1, span);
    h = std::min(h, span);

    double x = x0;
    while (dir * (x1 - x) > 0.0) {
      if (stats_.accepted + stats_.rejected >= tol_.max_steps)
        throw ConvergenceError("integrator step budget exhausted", x);
      bool last = false;
      if (h >= std::abs(x1 - x)) {
        h = std::abs(x1 - x);
        last = true;
      }
      const double min_h = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
      if (h < min_h) {
        std::ostringstream os;
        os << "step size underflow at x = " << x;
        throw ConvergenceError(os.str(), x);
      }
      const double hs = dir * h;

      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (DP54::a21 * k1[i]);
      f(x + DP54::c2 * hs, tmp, k2);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (DP54::a31 * k1[i] + DP54::a32 * k2[i]);
      f(x + DP54::c3 * hs, tmp, k3);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + hs * (DP54::a41 * k1[i] + DP54::a42 * k2[i] + DP54::a43 * k3[i]);
      f(x + DP54::c4 * hs, tmp, k4);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + hs * (DP54::a51 * k1[i] + DP54::a52 * k2[i] + DP54::a53 * k3[i] +
                              DP54::a54 * k4[i]);
      f(x + DP54::c5 * hs, tmp, k5);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + hs * (DP54::a61 * k1[i] + DP54::a62 * k2[i] + DP54::a63 * k3[i] +
                              DP54::a64 * k4[i] + DP54::a65 * k5[i]);
      const double xnew = last ? x1 : x + hs;
      f(xnew, tmp, k6);
      for (std::size_t i = 0; i < N; ++i)
        ynew[i] = y[i] + hs * (DP54::a71 * k1[i] + DP54::a73 * k3[i] + DP54::a74 * k4[i] +
                               DP54::a75 * k5[i] + DP54::a76 * k6[i]);
      f(xnew, ynew, k7);
      stats_.rhs_evals += 6;

      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const std::complex<double> e =
            hs * (DP54::e1 * k1[i] + DP54::e3 * k3[i] + DP54::e4 * k4[i] + DP54::e5 * k5[i] +
                  DP54::e6 * k6[i] + DP54::e7 * k7[i]);
        const double sc = tol_.abs_tol + tol_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err += std::norm(e) / (sc * sc);
      }
      err = std::sqrt(err / N);
      if (!std::isfinite(err)) err = 1e10;

      if (err <= 1.0) {
        ++stats_.accepted;
        // PI controller (Gustafsson); exponents for an order-5 pair.
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(err_old_, 0.4 / 5.0);
        fac = std::clamp(fac, 0.2, reject_last_ ? 1.0 : 10.0);
        err_old_ = std::max(err, 1e-4);
        reject_last_ = false;
        y = ynew;
        k1 = k7;
        x = xnew;
        if (!last) h *= fac;
        else h = std::max(h, h * fac);
      } else {
        ++stats_.rejected;
        reject_last_ = true;
        h *= std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
      }
    }
    h_ = h;
  }

 private:
  template <typename Rhs>
  double initial_step(Rhs& f, const State<N>& y, double x0, double dir, const State<N>& k1,
                      double span) {
    // Hairer-Norsett-Wanner starting step heuristic.
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = tol_.abs_tol + tol_.rel_tol * std::abs(y[i]);
      d0 += std::norm(y[i]) / (sc * sc);
      d1 += std::norm(k1[i]) / (sc * sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    State<N> y1, k2;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + dir * h0 * k1[i];
    f(x0 + dir * h0, y1, k2);
    ++stats_.rhs_evals;
    double d2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = tol_.abs_tol + tol_.rel_tol * std::abs(y[i]);
      d2 += std::norm(k2[i] - k1[i]) / (sc * sc);
    }
    d2 = std::sqrt(d2 / N) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, span});
  }

  Tolerances tol_;
  Stats stats_{};
  double h_ = 0.0;
  double err_old_ = 1e-4;
  bool reject_last_ = false;
};

}  // namespace ltls::ode
