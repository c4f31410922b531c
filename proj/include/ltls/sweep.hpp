#pragma once

// Parameter sweeps over omega0T or deltaT, lineshape widths and oscillation
// nodes. Grid points are evaluated independently; a parallel sweep writes each
// result into its own slot, so tables do not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ltls/core_model.hpp"
#include "ltls/ddp.hpp"
#include "ltls/errors.hpp"
#include "ltls/heun.hpp"
#include "ltls/propagator.hpp"

namespace ltls {

enum class Method { numeric, ddp_sech, ddp_raw, heun };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::numeric: return "numeric";
    case Method::ddp_sech: return "ddp-sech";
    case Method::ddp_raw: return "ddp-raw";
    case Method::heun: return "heun";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "numeric") return Method::numeric;
  if (s == "ddp-sech" || s == "ddp") return Method::ddp_sech;
  if (s == "ddp-raw") return Method::ddp_raw;
  if (s == "heun") return Method::heun;
  throw DomainError("unknown method '" + std::string(s) + "' (numeric, ddp-sech, ddp-raw, heun)");
}

/// Comma-separated method list, duplicates dropped, order kept.
inline std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    std::string_view item = list.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const Method m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    pos = comma + 1;
  }
  if (out.empty()) throw DomainError("empty method list");
  return out;
}

enum class Axis { omega0T, deltaT };

struct SweepSpec {
  Axis axis = Axis::deltaT;
  double start = 0.0;
  double stop = 1.0;
  std::size_t points = 2;
  // The other dimensionless parameter and the pulse width.
  double fixed = 1.0;
  double T = 1.0;
  std::vector<Method> methods{Method::numeric};
  PropagationSettings settings{};

  void validate() const {
    if (!(start < stop) || !std::isfinite(start) || !std::isfinite(stop))
      throw DomainError("sweep: need finite start < stop");
    if (points < 2) throw DomainError("sweep: need at least 2 points");
    if (axis == Axis::deltaT && start < 0.0)
      throw DomainError("sweep: deltaT must be >= 0 (P is even in deltaT)");
    if (axis == Axis::omega0T && !(start > 0.0)) throw DomainError("sweep: omega0T must be > 0");
  }

  /// Grid value i, computed from the index so that every run sees the same doubles.
  double at(std::size_t i) const {
    if (i + 1 == points) return stop;
    return start + (stop - start) * double(i) / double(points - 1);
  }

  ModelParams params(double x) const {
    const double a = axis == Axis::omega0T ? x : fixed;
    const double d = axis == Axis::deltaT ? x : fixed;
    return ModelParams(a / T, d / T, T);
  }
};

/// Outcome of one method at one point. Domain errors (for example DDP on
/// resonance) leave a NaN and a note instead of aborting the sweep.
struct Cell {
  double p = std::numeric_limits<double>::quiet_NaN();
  bool domain_error = false;
  bool outside_validity = false;
};

inline Cell evaluate(const ModelParams& p, Method m, const PropagationSettings& s) {
  Cell c;
  try {
    switch (m) {
      case Method::numeric:
        c.p = propagate(p, s).transition_probability;
        break;
      case Method::ddp_sech:
      case Method::ddp_raw: {
        const cplx d = ddp_integral_closed_form(p);
        const double sn = std::sin(d.real());
        const double ch = std::cosh(d.imag());
        c.p = m == Method::ddp_sech ? sn * sn / (ch * ch) : 4.0 * std::exp(-2.0 * d.imag()) * sn * sn;
        c.outside_validity = p.deltaT() < kAdiabaticWindowDeltaT;
        break;
      }
      case Method::heun:
        c.p = heun::heun_probability(p).probability;
        break;
    }
  } catch (const DomainError&) {
    c = Cell{};
    c.domain_error = true;
  }
  return c;
}

/// Runs f(i) for i in [0, n) on `threads` workers with a static contiguous
/// partition. The first exception (lowest index) is rethrown after all
/// workers finish.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  threads = std::max(1u, std::min<unsigned>(threads, unsigned(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t lo = n * w / threads, hi = n * (w + 1) / threads;
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (std::size_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// cells[i][k]: grid point i, method k.
struct SweepTable {
  std::vector<double> grid;
  std::vector<std::vector<Cell>> cells;
};

inline SweepTable run_sweep(const SweepSpec& spec, unsigned threads = 1) {
  spec.validate();
  SweepTable t;
  t.grid.resize(spec.points);
  t.cells.assign(spec.points, std::vector<Cell>(spec.methods.size()));
  for (std::size_t i = 0; i < spec.points; ++i) t.grid[i] = spec.at(i);
  parallel_for(spec.points, threads, [&](std::size_t i) {
    const ModelParams p = spec.params(t.grid[i]);
    for (std::size_t k = 0; k < spec.methods.size(); ++k) t.cells[i][k] = evaluate(p, spec.methods[k], spec.settings);
  });
  return t;
}

/// One lobe of P(deltaT) with its full width at half maximum. The axis is the
/// full real line: a grid that starts at 0 is mirrored using P(-d) = P(d).
struct Lobe {
  double peak_deltaT = 0.0;
  double peak_p = 0.0;
  double left = std::numeric_limits<double>::quiet_NaN();
  double right = std::numeric_limits<double>::quiet_NaN();
  double fwhm = std::numeric_limits<double>::quiet_NaN();
};

struct LineshapeResult {
  SweepTable table;
  Method width_method = Method::numeric;
  std::vector<Lobe> lobes;
  bool multimodal = false;
  // FWHM of the highest lobe.
  double linewidth = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// Bisection for P(x) = level between x_in (P >= level) and x_out (P < level).
template <typename P>
double bisect_level(P&& prob, double x_in, double x_out, double level, double tol = 1e-10) {
  for (int it = 0; it < 200 && std::abs(x_out - x_in) > tol; ++it) {
    const double mid = 0.5 * (x_in + x_out);
    (prob(mid) >= level ? x_in : x_out) = mid;
  }
  return 0.5 * (x_in + x_out);
}

}  // namespace detail

/// Lineshape table plus FWHM per lobe. Lobes are interior local maxima of the
/// (mirrored) grid above 1e-3 of the global maximum; each width is found by
/// bisection between the peak and the first half-maximum crossing per side.
inline LineshapeResult lineshape(const SweepSpec& spec, unsigned threads = 1, Method width_method = Method::numeric) {
  if (spec.axis != Axis::deltaT) throw DomainError("lineshape: axis must be deltaT");
  LineshapeResult r;
  r.table = run_sweep(spec, threads);
  r.width_method = width_method;
  const auto it = std::find(spec.methods.begin(), spec.methods.end(), width_method);
  if (it == spec.methods.end()) throw DomainError("lineshape: width method not among the sweep methods");
  const std::size_t k = std::size_t(it - spec.methods.begin());

  // Mirrored axis when the grid starts at 0.
  std::vector<double> xs, ps;
  const bool mirror = spec.start == 0.0;
  if (mirror)
    for (std::size_t i = spec.points - 1; i >= 1; --i) {
      xs.push_back(-r.table.grid[i]);
      ps.push_back(r.table.cells[i][k].p);
    }
  for (std::size_t i = 0; i < spec.points; ++i) {
    xs.push_back(r.table.grid[i]);
    ps.push_back(r.table.cells[i][k].p);
  }
  for (double v : ps)
    if (!std::isfinite(v)) throw DomainError("lineshape: width method has undefined grid values");

  const double pmax = *std::max_element(ps.begin(), ps.end());
  auto prob = [&](double x) {
    const Cell c = evaluate(spec.params(std::abs(x)), width_method, spec.settings);
    if (!std::isfinite(c.p)) throw DomainError("lineshape: width method undefined during bisection");
    return c.p;
  };
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || ps[i] > ps[i - 1];
    const bool right_ok = i + 1 == n || ps[i] >= ps[i + 1];
    if (!(left_ok && right_ok) || ps[i] < 1e-3 * pmax) continue;
    // A mirrored grid has each off-axis lobe twice; keep the d >= 0 copy.
    if (mirror && xs[i] < 0.0) continue;
    Lobe lb;
    lb.peak_deltaT = xs[i];
    lb.peak_p = ps[i];
    const double half = 0.5 * ps[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (ps[j] < half) {
        lb.right = detail::bisect_level(prob, xs[j - 1], xs[j], half);
        break;
      }
      if (ps[j] > ps[j - 1] && ps[j] > ps[i]) break;
    }
    for (std::size_t j = i; j-- > 0;) {
      if (ps[j] < half) {
        lb.left = detail::bisect_level(prob, xs[j + 1], xs[j], half);
        break;
      }
      if (ps[j] > ps[j + 1] && ps[j] > ps[i]) break;
    }
    lb.fwhm = lb.right - lb.left;
    r.lobes.push_back(lb);
  }
  // With mirroring, a lobe off the axis has a twin at -d.
  std::size_t count = 0;
  for (const Lobe& lb : r.lobes) count += (mirror && lb.peak_deltaT > 0.0) ? 2 : 1;
  r.multimodal = count > 1;
  double best = -1.0;
  for (const Lobe& lb : r.lobes)
    if (lb.peak_p > best) {
      best = lb.peak_p;
      r.linewidth = lb.fwhm;
    }
  return r;
}

/// A DDP node Re D = m pi and the nearest numeric minimum on the grid.
struct Node {
  int m = 0;
  double omega0T = 0.0;
  double numeric_min = std::numeric_limits<double>::quiet_NaN();
  double offset = std::numeric_limits<double>::quiet_NaN();
};

struct OscillationResult {
  SweepTable table;
  std::vector<double> envelope;  // sech^2(Im D)
  std::vector<double> phase;     // Re D
  std::vector<Node> nodes;
  std::vector<double> numeric_minima;
};

/// P(omega0T) at fixed deltaT with the DDP envelope and phase, the nodes
/// Re D = m pi located by bisection in omega0T, and the local minima of the
/// numeric column.
inline OscillationResult oscillations(const SweepSpec& spec, unsigned threads = 1) {
  if (spec.axis != Axis::omega0T) throw DomainError("oscillations: axis must be omega0T");
  if (!(spec.fixed > 0.0)) throw DomainError("oscillations: DDP phase needs deltaT > 0");
  OscillationResult r;
  r.table = run_sweep(spec, threads);
  const std::size_t n = spec.points;
  r.envelope.resize(n);
  r.phase.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const OscillationDescriptors o = oscillation_descriptors(spec.params(r.table.grid[i]));
    r.envelope[i] = o.amplitude;
    r.phase[i] = o.phase;
  });
  auto phase_at = [&](double a) { return oscillation_descriptors(spec.params(a)).phase; };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const int m0 = int(std::floor(r.phase[i] / kPi));
    const int m1 = int(std::floor(r.phase[i + 1] / kPi));
    for (int m = std::min(m0, m1) + 1; m <= std::max(m0, m1); ++m) {
      double lo = r.table.grid[i], hi = r.table.grid[i + 1];
      const bool rising = r.phase[i + 1] > r.phase[i];
      for (int it = 0; it < 100 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        ((phase_at(mid) < m * kPi) == rising ? lo : hi) = mid;
      }
      r.nodes.push_back({m, 0.5 * (lo + hi)});
    }
  }
  const auto it = std::find(spec.methods.begin(), spec.methods.end(), Method::numeric);
  if (it != spec.methods.end()) {
    const std::size_t k = std::size_t(it - spec.methods.begin());
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double pm = r.table.cells[i - 1][k].p, p0 = r.table.cells[i][k].p, pp = r.table.cells[i + 1][k].p;
      if (p0 < pm && p0 <= pp) r.numeric_minima.push_back(r.table.grid[i]);
    }
    for (Node& nd : r.nodes) {
      double best = INFINITY;
      for (double x : r.numeric_minima)
        if (std::abs(x - nd.omega0T) < std::abs(best - nd.omega0T)) best = x;
      if (std::isfinite(best)) {
        nd.numeric_min = best;
        nd.offset = best - nd.omega0T;
      }
    }
  }
  return r;
}

}  // namespace ltls
