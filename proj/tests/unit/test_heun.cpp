#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ltls/heun.hpp"
#include "ltls/propagator.hpp"

using namespace ltls;
using namespace ltls::heun;

namespace {

PropagationSettings tight() {
  PropagationSettings s;
  s.rel_tol = 1e-12;
  s.abs_tol = 1e-14;
  return s;
}

double rel_residual(const GsweParams& g, cplx z, const Jet& u) {
  return std::abs(gswe_residual(g, z, u.value, u.d1, u.d2)) / gswe_scale(g, z, u.value, u.d1, u.d2);
}

}  // namespace

TEST(GsweMap, ConstantsAndSingularities) {
  const GsweMap m = lorentzian_to_gswe(ModelParams::dimensionless(3.0, 0.8));
  EXPECT_EQ(m.g.z0, cplx{1.0});
  EXPECT_EQ(m.g.B1, cplx{0.5});
  EXPECT_EQ(m.g.B2, cplx{2.0});
  EXPECT_EQ(m.g.B3, cplx{0.8});
  EXPECT_EQ(m.g.omega, cplx(0.0, 0.8));
  EXPECT_EQ(m.g.eta, cplx(0.0, 1.0));
  // Images of tau = -i and tau = +i.
  EXPECT_EQ(z_of_tau(cplx{0.0, -1.0}), cplx{});
  EXPECT_EQ(z_of_tau(cplx{0.0, 1.0}), m.g.z0);
  EXPECT_LT(std::abs(tau_of_z(z_of_tau(cplx{0.3, 0.2})) - cplx(0.3, 0.2)), 1e-15);
}

TEST(GsweMap, ExponentsFromRecurrenceMatchIndicialFormulas) {
  for (double a : {0.7, 3.0, 5.5}) {
    const GsweMap m = lorentzian_to_gswe(ModelParams::dimensionless(a, 1.1));
    EXPECT_LT(std::abs(m.exponents_zero[1] - (1.0 + m.g.B1 / m.g.z0)), 1e-12);
    EXPECT_LT(std::abs(m.exponents_z0[1] - (1.0 - m.g.B2 - m.g.B1 / m.g.z0)), 1e-12);
    EXPECT_LT(std::abs(frobenius_solve(m.g, false, 1).exponent() - 0.5 * a), 1e-12);
    EXPECT_LT(std::abs(frobenius_solve(m.g, true, 1).exponent() + 0.5 * a), 1e-12);
  }
}

TEST(GsweMap, MappedEquationHoldsForPropagatedAmplitude) {
  // u = b1 / prefactor, with b1, b1', b1'' from the first-order system; the
  // u-equation must hold at regular points.
  const double a = 2.7, d = 0.9;
  const ModelParams p = ModelParams::dimensionless(a, d);
  const GsweMap m = lorentzian_to_gswe(p);
  const std::vector<double> taus{-2.3, -0.4, 0.5, 1.7};
  const auto tr = sample_trajectory(p, taus, tight());
  const cplx i{0.0, 1.0};
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const double t = taus[k];
    const double f = 1.0 / (1.0 + t * t);
    const cplx b1 = tr[k].c1, b2 = tr[k].c2;
    const cplx e = std::exp(i * d * t);
    const cplx db1 = -i * 0.5 * a * f * std::conj(e) * b2;
    const cplx db2 = -i * 0.5 * a * f * e * b1;
    const cplx df = -2.0 * t * f * f;
    const cplx d2b1 = -i * 0.5 * a * (df * std::conj(e) * b2 - i * d * f * std::conj(e) * b2 + f * std::conj(e) * db2);
    // Prefactor P = exp(-i d t/2) ((t - i)/(t + i))^(a/4), L = P'/P.
    const cplx L = -0.5 * i * d + 0.25 * a * (1.0 / (t - i) - 1.0 / (t + i));
    const cplx dL = 0.25 * a * (-1.0 / ((t - i) * (t - i)) + 1.0 / ((t + i) * (t + i)));
    const cplx P = std::exp(-0.5 * i * d * t) * std::exp(0.25 * a * (std::log(t - i) - std::log(t + i)));
    const cplx u = b1 / P;
    const cplx du_t = db1 / P - L * u;
    const cplx d2u_t = d2b1 / P - 2.0 * L * du_t - (dL + L * L) * u;
    // d/dz = (dt/dz) d/dt = 2i d/dt.
    const Jet uz{u, 2.0 * i * du_t, -4.0 * d2u_t};
    EXPECT_LT(rel_residual(m.g, z_of_tau(t), uz), 1e-9) << t;
  }
}

TEST(Frobenius, ResidualInsideHalfDisk) {
  const GsweMap m = lorentzian_to_gswe(ModelParams::dimensionless(1.7, 1.3));
  for (bool at_z0 : {false, true})
    for (int e : {0, 1}) {
      const FrobeniusSolution s = frobenius_solve(m.g, at_z0, e);
      EXPECT_LT(s.recurrence_defect(200), 1e-13);
      for (double r : {0.1, 0.3, 0.5})
        for (double ang : {0.3, 1.9, 4.0}) {
          const cplx z = s.point() + std::polar(r, ang);
          EXPECT_LT(rel_residual(m.g, z, s(z)), 1e-9) << at_z0 << e << z;
        }
    }
}

TEST(Frobenius, NormalizationAndDomain) {
  const GsweMap m = lorentzian_to_gswe(ModelParams::dimensionless(1.7, 1.3));
  const FrobeniusSolution s = frobenius_solve(m.g, false, 0);
  EXPECT_EQ(s.series(0.0).value, cplx{1.0});
  EXPECT_THROW(s(cplx{0.95, 0.0}), DomainError);
  EXPECT_NO_THROW(s(cplx{0.0, 0.89}));
}

TEST(Frobenius, WronskianFollowsAbel) {
  // W = u1 u2' - u2 u1' is proportional to z^B1 (1 - z)^-(B1 + B2); the
  // (1 - z) form keeps the branch cut outside the disk.
  const GsweMap m = lorentzian_to_gswe(ModelParams::dimensionless(1.3, 0.6));
  const FrobeniusSolution s0 = frobenius_solve(m.g, false, 0), s1 = frobenius_solve(m.g, false, 1);
  auto ratio = [&](cplx z) {
    const Jet a = s0(z), b = s1(z);
    const cplx w = a.value * b.d1 - b.value * a.d1;
    return w / (std::pow(z, m.g.B1) * std::pow(1.0 - z, -(m.g.B1 + m.g.B2)));
  };
  const cplx r0 = ratio(cplx{0.2, 0.1});
  EXPECT_GT(std::abs(r0), 1e-3);
  for (cplx z : {cplx{0.4, -0.3}, cplx{-0.3, 0.2}, cplx{0.1, 0.6}})
    EXPECT_LT(std::abs(ratio(z) - r0) / std::abs(r0), 1e-10) << z;
}

TEST(Frobenius, IntegerExponentGapIsRejected) {
  // omega0T = 2 gives exponents (0, 1) at z = 0: the exponent-0 series is logarithmic.
  const GsweMap m = lorentzian_to_gswe(ModelParams::dimensionless(2.0, 1.0));
  EXPECT_THROW(frobenius_solve(m.g, false, 0), DomainError);
  EXPECT_NO_THROW(frobenius_solve(m.g, false, 1));
}

TEST(Thome, NumericContinuationApproachesConstantRatio) {
  const GsweMap m = lorentzian_to_gswe(ModelParams::dimensionless(1.5, 1.0));
  const ThomeSolution tp(m.g, +1);
  // Start on T+ far out and integrate inward; the ratio to T+ stays at 1.
  const cplx far{0.5, -400.0};
  const Jet s = tp(far);
  for (double y : {200.0, 100.0, 50.0}) {
    const cplx z{0.5, -y};
    const GsweState u = integrate_gswe(m.g, far, {s.value, s.d1}, z, 1e-13, 1e-16);
    EXPECT_LT(std::abs(u.u / tp(z).value - 1.0), 1e-9) << y;
  }
}

TEST(Thome, FirstCorrectionShrinksAsOneOverZ) {
  const GsweMap m = lorentzian_to_gswe(ModelParams::dimensionless(2.5, 1.5));
  const ThomeSolution tp(m.g, -1);
  auto corr = [&](double y) {
    const cplx z{0.5, y};
    return std::abs(tp.leading(z, 1).value - tp.leading(z, 0).value) / std::abs(tp.leading(z, 0).value);
  };
  EXPECT_NEAR(corr(50.0) / corr(100.0), 2.0, 0.05);
  EXPECT_NEAR(corr(100.0) / corr(200.0), 2.0, 0.02);
}

TEST(Thome, BranchesAreIndependentAndThresholdEnforced) {
  const GsweMap m = lorentzian_to_gswe(ModelParams::dimensionless(2.5, 1.5));
  const ThomeSolution tp(m.g, +1), tm(m.g, -1);
  const cplx r1 = tp(cplx{0.5, 60.0}).value / tm(cplx{0.5, 60.0}).value;
  const cplx r2 = tp(cplx{0.5, 61.0}).value / tm(cplx{0.5, 61.0}).value;
  EXPECT_GT(std::abs(r1 - r2), 1e-2);
  EXPECT_THROW(tp(cplx{0.5, 0.5 * tp.threshold()}), DomainError);
  EXPECT_EQ(tp.rho(), cplx{});
  EXPECT_EQ(tm.rho(), cplx{-2.0});
  EXPECT_THROW(ThomeSolution(lorentzian_to_gswe(ModelParams::dimensionless(1.0, 0.0)).g, 1), DomainError);
}

TEST(Continuation, SeriesMarchingAgreesWithDirectIntegration) {
  for (auto [a, d] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {3.0, 0.5}, {7.0, 3.0}}) {
    const GsweMap m = lorentzian_to_gswe(ModelParams::dimensionless(a, d));
    const FrobeniusSolution f = frobenius_solve(m.g, false, 1);
    const Jet j = f(0.3);
    const cplx end{0.5, -25.0};
    const GsweState s = march_gswe(m.g, 0.3, {j.value, j.d1}, end);
    const GsweState o = integrate_gswe(m.g, 0.3, {j.value, j.d1}, end);
    EXPECT_LT(std::abs(s.u - o.u) / std::abs(o.u), 1e-7) << a << " " << d;
    EXPECT_LT(std::abs(s.du - o.du) / std::abs(o.du), 1e-7);
  }
}

TEST(HeunProbability, MatchesNumericPropagation) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> L(-1.0, 1.2);
  for (int i = 0; i < 30; ++i) {
    const ModelParams p = ModelParams::dimensionless(std::pow(10.0, L(rng)), std::pow(10.0, L(rng)));
    const double num = propagate(p, tight()).transition_probability;
    EXPECT_NEAR(heun_probability(p).probability, num, 1e-8) << p.omega0T() << " " << p.deltaT();
  }
  EXPECT_THROW(heun_probability(ModelParams::dimensionless(1.0, 0.0)), DomainError);
}

TEST(VerifyHeunSolution, ResolvesPrefactorAndFifthArgument) {
  std::vector<double> grid;
  for (int k = -28; k <= 28; ++k) grid.push_back(0.05 * k);
  for (auto [a, d] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {3.0, 0.5}, {1.3, 2.2}}) {
    const HeunVerifyReport r = verify_heun_solution(ModelParams::dimensionless(a, d), grid);
    EXPECT_LE(r.residual_gswe_basis, 1e-8);
    EXPECT_LE(r.residual_heunc_basis, 1e-8);
    EXPECT_LE(r.fit_max_error, 1e-6);
    EXPECT_TRUE(r.prefactor_minus_ok);
    EXPECT_FALSE(r.prefactor_plus_ok);
    EXPECT_FALSE(r.candidate_eta_ok);
    EXPECT_EQ(r.derived.eta, cplx(a * a / 8.0 - d));
  }
}

TEST(VerifyHeunSolution, GridOutsideDiskIsRejected) {
  const std::vector<double> grid{-1.6, 0.0, 1.6};
  EXPECT_THROW(verify_heun_solution(ModelParams::dimensionless(1.0, 1.0), grid), DomainError);
}
