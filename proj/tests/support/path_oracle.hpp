#pragma once

// Test-side oracle for integrals int_0^phi g(t) w(t)^(power/2) dt along the
// straight segment, with the square root continued from 1 at t = 0. Uses
// Boost adaptive Gauss-Kronrod on short pieces; inside a piece the root is
// the branch nearest to its value at the piece start.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <complex>

namespace oracle {

using cplx = std::complex<double>;

inline cplx nearest_root(cplx w, cplx ref) {
  const cplx r = std::sqrt(w);
  return std::abs(r - ref) <= std::abs(r + ref) ? r : -r;
}

// Segment a -> b with the root starting at `ref`; returns the integral and
// updates `ref` to the root at b.
template <typename W, typename G>
cplx segment_integral(cplx a, cplx b, W&& w, G&& g, int power, cplx& ref, int pieces = 256) {
  cplx total{};
  const cplx ab = b - a;
  for (int k = 0; k < pieces; ++k) {
    const double s0 = double(k) / pieces, s1 = double(k + 1) / pieces;
    const cplx start = ref;
    auto f = [&](double s) {
      const cplx t = a + s * ab;
      const cplx r = nearest_root(w(t), start);
      return ab * g(t) * (power > 0 ? r : 1.0 / r);
    };
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, s0, s1, 8, 1e-12, &err);
    ref = nearest_root(w(a + s1 * ab), start);
  }
  return total;
}

template <typename W, typename G>
cplx path_integral(cplx phi, W&& w, G&& g, int power, int pieces = 256) {
  cplx ref{1.0};
  return segment_integral(cplx{}, phi, w, g, power, ref, pieces);
}

inline cplx sin2(cplx t) {
  const cplx s = std::sin(t);
  return s * s;
}

inline cplx F(cplx phi, cplx m) {
  return path_integral(phi, [&](cplx t) { return 1.0 - m * sin2(t); }, [](cplx) { return cplx{1.0}; }, -1);
}
inline cplx E(cplx phi, cplx m) {
  return path_integral(phi, [&](cplx t) { return 1.0 - m * sin2(t); }, [](cplx) { return cplx{1.0}; }, +1);
}
inline cplx Pi(cplx n, cplx phi, cplx m) {
  return path_integral(phi, [&](cplx t) { return 1.0 - m * sin2(t); },
                       [&](cplx t) { return 1.0 / (1.0 - n * sin2(t)); }, -1);
}

// int_0^tau sqrt(alpha^2 + (1+t^2)^2)/(1+t^2) dt along 0 -> Re tau -> tau,
// the root positive at t = 0.
inline cplx splitting_integral(double alpha, cplx tau) {
  auto w = [&](cplx t) {
    const cplx u = 1.0 + t * t;
    return alpha * alpha + u * u;
  };
  auto g = [](cplx t) { return 1.0 / (1.0 + t * t); };
  cplx ref = std::sqrt(1.0 + alpha * alpha);
  const cplx corner{tau.real(), 0.0};
  cplx total = segment_integral(cplx{}, corner, w, g, +1, ref, 64);
  if (tau.imag() != 0.0) total += segment_integral(corner, tau, w, g, +1, ref, 256);
  return total;
}

// Smallest |1 - q sin^2 t| on the segment, to keep samples away from pinches.
inline double min_factor(cplx phi, cplx q, int samples = 400) {
  double best = 1e300;
  for (int i = 0; i <= samples; ++i) best = std::min(best, std::abs(1.0 - q * sin2(double(i) / samples * phi)));
  return best;
}

}  // namespace oracle
