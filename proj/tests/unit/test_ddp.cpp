#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/path_oracle.hpp"
#include "ltls/ddp.hpp"
#include "ltls/propagator.hpp"

using namespace ltls;

TEST(TransitionPoints, AreZerosOfTheSplitting) {
  for (double alpha : {1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 1e3}) {
    const TransitionPoints tp = transition_points(alpha);
    const double scale = alpha * alpha + 1.0;
    EXPECT_LT(std::abs(splitting_radicand(alpha, tp.tau_plus)) / scale, 1e-14) << alpha;
    EXPECT_LT(std::abs(splitting_radicand(alpha, tp.tau_minus)) / scale, 1e-14) << alpha;
    EXPECT_GT(tp.tau_plus.imag(), 1.0);
    EXPECT_GT(tp.tau_plus.real(), 0.0);
    EXPECT_EQ(tp.tau_minus, -std::conj(tp.tau_plus));
    // (1 + tau^2) = i alpha at tau+.
    EXPECT_LT(std::abs(1.0 + tp.tau_plus * tp.tau_plus - cplx{0.0, alpha}), 1e-12 * scale);
  }
  EXPECT_THROW(transition_points(0.0), DomainError);
}

TEST(DdpIntegral, QuadratureMatchesIndependentOracle) {
  for (double alpha : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    const cplx tp = transition_points(alpha).tau_plus;
    const cplx want = 1.7 * oracle::splitting_integral(alpha, tp);
    const cplx got = ddp_integral_quadrature(alpha, 1.7);
    EXPECT_LT(std::abs(got - want) / std::abs(want), 1e-10) << alpha;
  }
}

TEST(DdpIntegral, StraightRayGivesSameValue) {
  DdpQuadratureOptions o;
  o.direct_ray = true;
  for (double alpha : {0.3, 3.0}) {
    const cplx a = ddp_integral_quadrature(alpha, 1.0);
    const cplx b = ddp_integral_quadrature(alpha, 1.0, o);
    EXPECT_LT(std::abs(a - b) / std::abs(a), 1e-11);
  }
}

TEST(DdpIntegral, ClosedFormMatchesQuadrature) {
  for (double alpha : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    const cplx q = ddp_integral_quadrature(alpha, 2.0);
    const cplx c = ddp_integral_closed_form(alpha, 2.0);
    EXPECT_LT(std::abs(c - q) / std::abs(q), 1e-8) << alpha;
  }
}

TEST(DdpIntegral, OtherClosedFormReadingsDoNotMatch) {
  // The symmetric Pi integrand and the sqrt(2 + 2 i alpha) amplitude scale
  // both miss the quadrature by far more than rounding.
  for (double alpha : {0.5, 2.0}) {
    const cplx q = ddp_integral_quadrature(alpha, 1.0);
    for (ClosedFormVariant v : {ClosedFormVariant{false, true}, ClosedFormVariant{true, false}, ClosedFormVariant{false, false}})
      EXPECT_GT(std::abs(ddp_integral_closed_form(alpha, 1.0, v) - q) / std::abs(q), 1e-3);
  }
}

TEST(DdpIntegral, ScalesLinearlyInDeltaT) {
  const cplx d1 = ddp_integral_closed_form(1.3, 1.0);
  const cplx d3 = ddp_integral_closed_form(1.3, 3.0);
  EXPECT_LT(std::abs(d3 - 3.0 * d1), 1e-13 * std::abs(d3));
}

TEST(DdpIntegral, WeakCouplingLimit) {
  // As alpha -> 0 the splitting is ~1, so D ~ deltaT * tau+ ~ i deltaT.
  const cplx d = ddp_integral_closed_form(1e-3, 1.0);
  EXPECT_NEAR(d.imag(), 1.0, 1e-3);
  EXPECT_NEAR(d.real(), 0.0, 1e-3);
}

TEST(Gamma, LimitsAreUnitAndOpposite) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> L(-1.5, 1.5);
  for (int i = 0; i < 20; ++i) {
    const double alpha = std::pow(10.0, L(rng));
    const GammaResult gp = gamma_factor(alpha, true);
    const GammaResult gm = gamma_factor(alpha, false);
    EXPECT_LT(std::abs(gp.value + 1.0), 1e-6) << alpha;
    EXPECT_LT(std::abs(gm.value - 1.0), 1e-6) << alpha;
    EXPECT_LT(gp.spread, 1e-6);
  }
}

TEST(DdpProbability, RangeAndForms) {
  for (double a : {0.5, 2.0, 8.0})
    for (double d : {0.5, 2.0, 4.0}) {
      const DdpResult r = ddp_probability(ModelParams::dimensionless(a, d));
      EXPECT_GE(r.probability, 0.0);
      EXPECT_LE(r.probability, 1.0);
      EXPECT_NEAR(r.probability_two_point, r.probability_raw, 1e-12 * std::max(1.0, r.probability_raw));
      EXPECT_EQ(r.oscillation_phase, r.d_plus.real());
      EXPECT_EQ(r.damping, r.d_plus.imag());
      EXPECT_EQ(r.outside_validity, d < 2.0);
      // sech^2 and 4 exp(-2 Im D) agree when Im D is large.
      if (r.damping > 5.0) {
        EXPECT_NEAR(r.probability / r.probability_raw, 1.0, 1e-3);
      }
    }
}

TEST(DdpProbability, QuadratureRouteAgrees) {
  const ModelParams p = ModelParams::dimensionless(3.0, 2.5);
  const DdpResult a = ddp_probability(p, DdpIntegral::closed_form);
  const DdpResult b = ddp_probability(p, DdpIntegral::quadrature);
  EXPECT_NEAR(a.probability, b.probability, 1e-10);
}

TEST(DdpProbability, ResonanceIsRejected) {
  EXPECT_THROW(ddp_probability(ModelParams::dimensionless(1.0, 0.0)), ResonantDegeneracyError);
}

TEST(DdpProbability, TracksNumericDeepInTheAdiabaticRegime) {
  // Large deltaT and alpha: the exponent dominates and DDP is accurate.
  const ModelParams p = ModelParams::dimensionless(20.0, 4.0);
  const double num = propagate(p).transition_probability;
  const double ddp = ddp_probability(p).probability;
  EXPECT_NEAR(ddp, num, 0.02);
}

TEST(Oscillations, DescriptorsFollowD) {
  const ModelParams p = ModelParams::dimensionless(6.0, 2.0);
  const OscillationDescriptors o = oscillation_descriptors(p);
  const cplx d = ddp_integral_closed_form(p);
  EXPECT_DOUBLE_EQ(o.phase, d.real());
  EXPECT_NEAR(o.amplitude, 1.0 / std::pow(std::cosh(d.imag()), 2), 1e-15);
  // Re D grows with the coupling.
  EXPECT_GT(oscillation_descriptors(ModelParams::dimensionless(8.0, 2.0)).phase, o.phase);
}
