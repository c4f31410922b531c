#pragma once

// Traces the Stokes line Im D(tau) = Im D(tau+) through the transition points.
//
// With G(tau) = int_{tau_k}^{tau} E ds the level set is Im G = 0. Along it
// dG = E dtau is real, so the tangent is +-conj(E)/|E| and a point off the
// curve is pulled back by the Newton step tau -= i Im(G)/E. G is accumulated
// segment by segment with the square root continued from the previous vertex.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ltls/core_model.hpp"
#include "ltls/ddp.hpp"
#include "ltls/errors.hpp"
#include "ltls/quadrature.hpp"

namespace ltls {

struct StokesVertex {
  ComplexPoint tau;
  // |Im D(tau) - Im D(tau+)|, including the factor deltaT.
  double residual = 0.0;
};

enum class BranchEnd { escaped, reached_partner, stopped };

struct StokesBranch {
  bool from_plus = true;   // emanates from tau+ (else tau-)
  double start_angle = 0.0;
  BranchEnd end = BranchEnd::stopped;
  std::vector<StokesVertex> vertices;  // starts at the transition point
  // For reached_partner: distance of the last traced vertex to the partner
  // point before the partner itself was appended.
  double arrival_gap = 0.0;
};

struct StokesPolyline {
  // Ordered from Re tau = -span through tau-, tau+ to Re tau = +span.
  std::vector<StokesVertex> vertices;
  TransitionPoints points;
  cplx d_plus;
  double max_residual = 0.0;
  double arrival_gap = 0.0;  // connecting branch: closest traced approach to tau-
  std::vector<StokesBranch> branches;  // every ray traced, for diagnostics
};

/// Tracer failure; carries what was traced so far.
class StokesTraceError : public ConvergenceError {
 public:
  StokesTraceError(const std::string& what, double last_reliable, std::vector<StokesVertex> partial)
      : ConvergenceError(what, last_reliable), partial_(std::move(partial)) {}
  const std::vector<StokesVertex>& partial() const noexcept { return partial_; }

 private:
  std::vector<StokesVertex> partial_;
};

struct StokesOptions {
  double span = 6.0;
  double step = 0.01;
  double corrector_tol = 1e-13;
  std::size_t max_vertices = 200'000;
};

namespace detail {

class LevelTracer {
 public:
  LevelTracer(double alpha, double deltaT, ComplexPoint origin, ComplexPoint partner, const StokesOptions& o)
      : alpha_(alpha), dT_(deltaT), origin_(origin), partner_(partner), o_(o) {}

  cplx radicand(cplx t) const { return splitting_radicand(alpha_, t); }
  static cplx weight(cplx t) { return 1.0 / (1.0 + t * t); }

  // int_b^tau E ds for a branch point b, via tau(s) = b + s^2 (tau - b) which
  // removes the square-root endpoint singularity. `ref` is the root of the
  // radicand at tau on the wanted sheet.
  cplx from_branch_point(cplx b, cplx tau, cplx ref) const {
    const cplx dtau = tau - b;
    auto f = [&](double s) {
      const cplx t = b + s * s * dtau;
      const cplx r = quad::sqrt_near(radicand(t), ref * s);
      return r * weight(t) * 2.0 * s * dtau;
    };
    return quad::integrate(f, 0.0, 1.0, 1e-15, 1e-14).value;
  }

  // int_a^b E ds with roots ra at a and rb at b on the same sheet.
  cplx segment(cplx a, cplx b, cplx ra, cplx rb) const {
    const cplx d = b - a;
    auto f = [&](double s) {
      const cplx t = a + s * d;
      const cplx r = quad::sqrt_near(radicand(t), ra + s * (rb - ra));
      return r * weight(t) * d;
    };
    return quad::integrate(f, 0.0, 1.0, 1e-15, 1e-14).value;
  }

  StokesBranch trace(double angle) const {
    StokesBranch br;
    br.from_plus = origin_.real() > 0.0;
    br.start_angle = angle;
    br.vertices.push_back({origin_, 0.0});

    // Root sheet at the first point: sqrt(R'(b)(tau - b)).
    const cplx rp = 4.0 * origin_ * (1.0 + origin_ * origin_);
    const cplx dir0 = std::polar(1.0, angle);
    double h = o_.step;
    cplx tau = origin_ + 0.1 * h * dir0;
    cplx root = std::sqrt(rp * (tau - origin_));
    root = quad::sqrt_near(radicand(tau), root);
    cplx g = from_branch_point(origin_, tau, root);
    correct(tau, root, g);
    br.vertices.push_back({tau, dT_ * std::abs(g.imag())});
    cplx dir = dir0;

    while (br.vertices.size() < o_.max_vertices) {
      if (std::abs(tau.real()) >= o_.span) {
        br.end = BranchEnd::escaped;
        return br;
      }
      const double to_partner = std::abs(tau - partner_);
      if (to_partner < 1e-5) {
        br.arrival_gap = to_partner;
        // Partner is a zero of the radicand: integrate towards it from the
        // partner side with the substitution, on the sheet fixed by `root`.
        const cplx back = from_branch_point(partner_, tau, root);
        const cplx g_end = g - back;
        br.vertices.push_back({partner_, dT_ * std::abs(g_end.imag())});
        br.end = BranchEnd::reached_partner;
        return br;
      }
      if (std::abs(tau - cplx{0.0, 1.0}) < 0.02 || tau.imag() > 4.0 * (origin_.imag() + o_.span) ||
          tau.imag() < 0.0) {
        br.end = BranchEnd::stopped;
        return br;
      }
      double hs = std::min(h, to_partner < 3.0 * h ? to_partner / 3.0 : h);
      // Tangent with Im(E dtau) = 0, oriented along the previous direction.
      const cplx e = root * weight(tau);
      cplx t = std::conj(e) / std::abs(e);
      if (std::real(t * std::conj(dir)) < 0.0) t = -t;
      bool ok = false;
      for (int attempt = 0; attempt < 30 && !ok; ++attempt) {
        cplx tn = tau + hs * t;
        cplx rn = quad::sqrt_near(radicand(tn), root);
        cplx gn = g + segment(tau, tn, root, rn);
        if (correct(tn, rn, gn) && std::abs(tn - tau) < 2.0 * hs) {
          dir = (tn - tau) / std::abs(tn - tau);
          tau = tn;
          root = rn;
          g = gn;
          ok = true;
        } else {
          hs *= 0.5;
        }
      }
      if (!ok) {
        throw StokesTraceError("Stokes tracer lost the level set", tau.real(), br.vertices);
      }
      br.vertices.push_back({tau, dT_ * std::abs(g.imag())});
    }
    throw StokesTraceError("Stokes tracer exceeded the vertex budget", tau.real(), br.vertices);
  }

 private:
  // Newton iterations tau -= i Im(G)/E; updates root and G consistently.
  bool correct(cplx& tau, cplx& root, cplx& g) const {
    const double scale = std::max(1.0, std::abs(g));
    for (int it = 0; it < 20; ++it) {
      if (std::abs(g.imag()) <= o_.corrector_tol * scale) return true;
      const cplx e = root * weight(tau);
      if (std::abs(e) == 0.0) return false;
      const cplx tn = tau - cplx{0.0, 1.0} * g.imag() / e;
      const cplx rn = quad::sqrt_near(radicand(tn), root);
      g += segment(tau, tn, root, rn);
      tau = tn;
      root = rn;
    }
    return std::abs(g.imag()) <= 1e3 * o_.corrector_tol * scale;
  }

  double alpha_, dT_;
  ComplexPoint origin_, partner_;
  StokesOptions o_;
};

inline double kappa_arg(ComplexPoint tk) {
  // E ~ kappa (tau - tk)^(1/2), kappa^2 = R'(tk)/(1+tk^2)^2.
  const cplx u = 1.0 + tk * tk;
  const cplx k2 = 4.0 * tk * u / (u * u);
  return 0.5 * std::arg(k2);
}

}  // namespace detail

/// Directions (radians) of the three local Stokes rays at a transition point:
/// theta_m = (2/3)(m pi - arg kappa).
inline std::array<double, 3> stokes_ray_angles(double alpha, bool plus) {
  const TransitionPoints tp = transition_points(alpha);
  const double ak = detail::kappa_arg(plus ? tp.tau_plus : tp.tau_minus);
  std::array<double, 3> a{};
  for (int m = 0; m < 3; ++m) a[m] = 2.0 / 3.0 * (m * kPi - ak);
  return a;
}

/// Number of level-set crossings of Im G on a small circle around the
/// transition point, counted with G continued around the circle (the sheet
/// flip at the closing point is not counted).
inline int stokes_ray_count(double alpha, bool plus, double radius = 1e-3, int samples = 720) {
  const TransitionPoints tp = transition_points(alpha);
  const ComplexPoint b = plus ? tp.tau_plus : tp.tau_minus;
  detail::LevelTracer tr(alpha, 1.0, b, plus ? tp.tau_minus : tp.tau_plus, StokesOptions{});
  const cplx rp = 4.0 * b * (1.0 + b * b);
  cplx root{};
  double prev = 0.0;
  int count = 0;
  for (int j = 0; j < samples; ++j) {
    const double th = 2.0 * kPi * j / samples;
    const cplx t = b + std::polar(radius, th);
    if (j == 0) root = quad::sqrt_near(tr.radicand(t), std::sqrt(rp * (t - b)));
    else root = quad::sqrt_near(tr.radicand(t), root);
    const double im = tr.from_branch_point(b, t, root).imag();
    if (j > 0 && ((prev < 0.0) != (im < 0.0))) ++count;
    prev = im;
  }
  return count;
}

/// Traces the Stokes line through tau+ and tau- over Re tau in [-span, span].
inline StokesPolyline trace_stokes_line(const ModelParams& p, const StokesOptions& o = {}) {
  const double alpha = p.alpha_or_throw();
  const double dT = p.deltaT();
  if (!(o.step > 0.0) || !(o.span > 0.0)) throw DomainError("stokes: span and step must be positive");
  StokesPolyline out;
  out.points = transition_points(alpha);
  out.d_plus = ddp_integral_closed_form(alpha, dT);

  auto min_im = [](const StokesBranch& b) {
    double m = b.vertices.front().tau.imag();
    for (const StokesVertex& v : b.vertices) m = std::min(m, v.tau.imag());
    return m;
  };
  const StokesBranch* escape_plus = nullptr;
  const StokesBranch* escape_minus = nullptr;
  const StokesBranch* connect = nullptr;
  for (bool plus : {true, false}) {
    const ComplexPoint o0 = plus ? out.points.tau_plus : out.points.tau_minus;
    const ComplexPoint o1 = plus ? out.points.tau_minus : out.points.tau_plus;
    detail::LevelTracer tr(alpha, dT, o0, o1, o);
    for (double a : stokes_ray_angles(alpha, plus)) out.branches.push_back(tr.trace(a));
  }
  for (const StokesBranch& b : out.branches) {
    if (b.end == BranchEnd::escaped) {
      const double re = b.vertices.back().tau.real();
      if (b.from_plus && re > 0.0 && !escape_plus) escape_plus = &b;
      if (!b.from_plus && re < 0.0 && !escape_minus) escape_minus = &b;
    }
    // Two rays join the points, one on each side of the pole at tau = i; the
    // lower one leaves the strip above the real axis free of singularities.
    if (b.end == BranchEnd::reached_partner && b.from_plus && (!connect || min_im(b) < min_im(*connect)))
      connect = &b;
  }
  if (!escape_plus || !escape_minus || !connect) {
    std::vector<StokesVertex> partial;
    for (const StokesBranch& b : out.branches) partial.insert(partial.end(), b.vertices.begin(), b.vertices.end());
    throw StokesTraceError("Stokes line does not connect -inf, tau-, tau+, +inf", 0.0, partial);
  }
  for (auto it = escape_minus->vertices.rbegin(); it != escape_minus->vertices.rend(); ++it)
    out.vertices.push_back(*it);
  // Connecting branch runs tau+ -> tau-; reverse it and drop the duplicate tau-.
  for (auto it = connect->vertices.rbegin() + 1; it != connect->vertices.rend(); ++it)
    out.vertices.push_back(*it);
  out.vertices.insert(out.vertices.end(), escape_plus->vertices.begin() + 1, escape_plus->vertices.end());
  out.arrival_gap = connect->arrival_gap;
  for (const StokesVertex& v : out.vertices) out.max_residual = std::max(out.max_residual, v.residual);
  return out;
}

}  // namespace ltls
