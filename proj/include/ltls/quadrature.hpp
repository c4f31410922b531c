#pragma once

// Adaptive Gauss-Kronrod quadrature for complex-valued integrands of a real
// parameter, plus integration along polylines in the complex plane with a
// square root continued by phase tracking rather than taken on the principal
// branch point by point.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include "ltls/errors.hpp"

namespace ltls::quad {

using cplx = std::complex<double>;

struct Result {
  cplx value{};
  double error = 0.0;
  std::size_t evals = 0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod nodes on [-1, 1] (non-negative half).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace detail

/// One G7-K15 panel on [a, b]; error is |K15 - G7|.
template <typename F>
Result gauss_kronrod15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const cplx fc = f(c);
  cplx k = fc * detail::kWgk[7];
  cplx g = fc * detail::kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * detail::kXgk[j];
    const cplx f1 = f(c - dx);
    const cplx f2 = f(c + dx);
    k += detail::kWgk[j] * (f1 + f2);
    if (j % 2 == 1) g += detail::kWg[j / 2] * (f1 + f2);
  }
  return {k * h, std::abs((k - g) * h), 15};
}

/// Globally adaptive bisection on [a, b] until the summed error estimate is
/// below max(abs_tol, rel_tol*|I|).
template <typename F>
Result integrate(F&& f, double a, double b, double abs_tol = 1e-13, double rel_tol = 1e-13,
                 std::size_t max_panels = 4000) {
  struct Panel {
    double a, b;
    Result r;
    bool operator<(const Panel& o) const { return r.error < o.r.error; }
  };
  std::priority_queue<Panel> heap;
  Result total;
  {
    Result r = gauss_kronrod15(f, a, b);
    heap.push({a, b, r});
    total = r;
  }
  while (total.error > std::max(abs_tol, rel_tol * std::abs(total.value))) {
    if (heap.size() >= max_panels) {
      throw ConvergenceError("adaptive quadrature did not reach tolerance", heap.top().a);
    }
    Panel worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    if (!(m > worst.a && m < worst.b)) {
      throw ConvergenceError("adaptive quadrature panel underflow", worst.a);
    }
    Result left = gauss_kronrod15(f, worst.a, m);
    Result right = gauss_kronrod15(f, m, worst.b);
    total.value += left.value + right.value - worst.r.value;
    total.error += left.error + right.error - worst.r.error;
    total.evals += 30;
    heap.push({worst.a, m, left});
    heap.push({m, worst.b, right});
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  cplx v{};
  double e = 0.0;
  while (!heap.empty()) {
    v += heap.top().r.value;
    e += heap.top().r.error;
    heap.pop();
  }
  total.value = v;
  total.error = e;
  return total;
}

/// Picks the root of w whose direction is closest to `ref`.
inline cplx sqrt_near(cplx w, cplx ref) {
  cplx s = std::sqrt(w);
  if (std::real(s * std::conj(ref)) < 0.0) s = -s;
  return s;
}

struct PathOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-13;
  // Initial panels per segment for the branch map.
  int min_panels = 16;
  // Largest phase change of w allowed between neighbouring branch anchors.
  double max_arg_step = 0.5;
  // Allow w to vanish at the very end of the path (integrable endpoint).
  bool allow_end_zero = false;
};

/// Square root of an analytic w(s), s in [0, 1], continued along the path
/// from a reference value at s = 0. Anchors are refined until the phase of w
/// changes by at most `max_arg_step` between neighbours.
class SqrtContinuation {
 public:
  template <typename W>
  SqrtContinuation(W&& w, cplx start_ref, const PathOptions& opt) {
    const int n = std::max(2, opt.min_panels);
    cplx w0 = w(0.0);
    if (w0 == cplx{}) throw BranchPinchError("square-root argument vanishes at path start");
    cplx sq0 = sqrt_near(w0, start_ref == cplx{} ? std::sqrt(w0) : start_ref);
    s_.push_back(0.0);
    sq_.push_back(sq0);
    cplx wa = w0;
    for (int i = 1; i <= n; ++i) {
      const double sb = double(i) / n;
      const bool end = (i == n);
      refine(w, s_.back(), wa, sb, w(sb), 0, opt, end);
      wa = w(sb);
    }
  }

  /// Continued sqrt at s given the value w(s).
  cplx at(double s, cplx w_val) const {
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t j = it == s_.begin() ? 0 : std::size_t(it - s_.begin()) - 1;
    return sqrt_near(w_val, sq_[j]);
  }

  const std::vector<double>& anchors() const noexcept { return s_; }
  cplx end_value() const noexcept { return sq_.back(); }

 private:
  template <typename W>
  void refine(W& w, double sa, cplx wa, double sb, cplx wb, int depth, const PathOptions& opt,
              bool end) {
    const double scale = std::max(std::abs(wa), 1e-300);
    if (end && opt.allow_end_zero && std::abs(wb) <= 1e-13 * std::max(1.0, scale) && sb == 1.0) {
      // The integrable endpoint zero: the root there is zero by definition.
      s_.push_back(sb);
      sq_.push_back(cplx{});
      return;
    }
    if (wb == cplx{}) throw BranchPinchError("square-root argument vanishes on the path");
    const double dphase = std::abs(std::arg(wb / wa));
    if (dphase > opt.max_arg_step) {
      if (depth > 48) throw BranchPinchError("square-root argument winds through zero on the path");
      const double sm = 0.5 * (sa + sb);
      const cplx wm = w(sm);
      refine(w, sa, wa, sm, wm, depth + 1, opt, false);
      refine(w, sm, wm, sb, wb, depth + 1, opt, end);
      return;
    }
    s_.push_back(sb);
    sq_.push_back(sqrt_near(wb, sq_.back()));
  }

  std::vector<double> s_;
  std::vector<cplx> sq_;
};

struct SqrtPathResult {
  cplx value{};
  double error = 0.0;
  // Continued root at the end of the path (zero if it ends on a zero of w).
  cplx end_sqrt{};
};

/// Integrates g(tau) * sqrt(w(tau))^power along the polyline `vertices`, with
/// the root continued from `start_ref` at the first vertex. power is +1 or -1.
template <typename W, typename G>
SqrtPathResult integrate_sqrt_path(std::span<const cplx> vertices, W&& w, G&& g, int power,
                                   cplx start_ref, PathOptions opt = {}) {
  SqrtPathResult out;
  cplx ref = start_ref;
  for (std::size_t k = 0; k + 1 < vertices.size(); ++k) {
    const cplx a = vertices[k];
    const cplx d = vertices[k + 1] - a;
    if (d == cplx{}) continue;
    auto wpath = [&](double s) { return w(a + s * d); };
    PathOptions seg = opt;
    seg.allow_end_zero = opt.allow_end_zero && (k + 2 == vertices.size());
    SqrtContinuation root(wpath, ref, seg);
    auto integrand = [&](double s) -> cplx {
      const cplx tau = a + s * d;
      const cplx wv = w(tau);
      const cplx r = root.at(s, wv);
      const cplx rp = power > 0 ? r : 1.0 / r;
      return g(tau) * rp * d;
    };
    const auto& an = root.anchors();
    for (std::size_t j = 0; j + 1 < an.size(); ++j) {
      Result r = integrate(integrand, an[j], an[j + 1], opt.abs_tol / double(an.size()), opt.rel_tol);
      out.value += r.value;
      out.error += r.error;
    }
    ref = root.end_value();
  }
  out.end_sqrt = ref;
  return out;
}

}  // namespace ltls::quad
