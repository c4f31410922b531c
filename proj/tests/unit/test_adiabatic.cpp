#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ltls/adiabatic.hpp"

using namespace ltls;

TEST(MixingAngle, RangeAndLimits) {
  const ModelParams p(3.0, 0.5, 1.0);
  EXPECT_NEAR(mixing_angle(p, 1e9).theta, 0.0, 1e-12);
  EXPECT_NEAR(mixing_angle(p, 0.0).theta, 0.5 * std::atan(6.0), 1e-15);
  for (double t = -5.0; t <= 5.0; t += 0.25) {
    const double th = mixing_angle(p, t).theta;
    EXPECT_GE(th, 0.0);
    EXPECT_LE(th, M_PI / 4.0);
  }
}

TEST(MixingAngle, ResonanceIsDegenerate) {
  const ModelParams p(1.0, 0.0, 1.0);
  EXPECT_THROW(mixing_angle(p, 0.0), ResonantDegeneracyError);
  EXPECT_THROW(mixing_angle_rate(p, 0.0), ResonantDegeneracyError);
  EXPECT_THROW(propagate_adiabatic(p), ResonantDegeneracyError);
}

TEST(MixingAngle, RateMatchesFiniteDifference) {
  const ModelParams p(2.0, 0.7, 1.5);
  for (double t : {-2.0, -0.3, 0.4, 3.0}) {
    const double h = 1e-5;
    const double fd = (mixing_angle(p, t + h).theta - mixing_angle(p, t - h).theta) / (2.0 * h);
    EXPECT_NEAR(mixing_angle_rate(p, t), fd, 1e-8);
  }
}

TEST(Rotation, OrthogonalWithUnitDeterminant) {
  for (double th : {0.0, 0.1, 0.5, M_PI / 4.0}) {
    const Matrix2 r = rotation({th});
    EXPECT_NEAR(r[0][0] * r[1][1] - r[0][1] * r[1][0], 1.0, 1e-15);
    EXPECT_NEAR(r[0][0] * r[0][1] + r[1][0] * r[1][1], 0.0, 1e-15);
  }
}

TEST(Rotation, DiagonalizesShiftedHamiltonian) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.1, 4.0), Tt(-4.0, 4.0);
  for (int i = 0; i < 50; ++i) {
    const ModelParams p(U(rng), U(rng), 1.0);
    const double t = Tt(rng);
    const Hamiltonian2 h = hamiltonian(p, t);
    const Matrix2 r = rotation(mixing_angle(p, t));
    // R^T H R
    double m[2][2] = {};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) m[a][b] += r[k][a] * h(k, l).real() * r[l][b];
    const QuasiEnergies q = quasi_energies(p, t);
    EXPECT_NEAR(m[0][1], 0.0, 1e-12);
    EXPECT_NEAR(m[0][0] + 0.5 * p.delta(), q.e_minus, 1e-12);
    EXPECT_NEAR(m[1][1] + 0.5 * p.delta(), q.e_plus, 1e-12);
    EXPECT_NEAR(q.e_plus - q.e_minus, q.splitting, 1e-12);
  }
}

TEST(AdiabaticHamiltonian, HermitianCouplingIsThetaDot) {
  const ModelParams p(1.3, 0.9, 1.0);
  const CMatrix2 h = adiabatic_hamiltonian(p, 0.6);
  EXPECT_EQ(h[0][1], std::conj(h[1][0]));
  EXPECT_NEAR(h[1][0].imag(), mixing_angle_rate(p, 0.6), 1e-15);
  EXPECT_EQ(h[0][0].imag(), 0.0);
}

TEST(PropagateAdiabatic, ConservesNorm) {
  for (double a : {0.3, 2.0, 6.0})
    for (double d : {0.4, 2.0}) {
      const PropagationResult r = propagate_adiabatic(ModelParams::dimensionless(a, d));
      EXPECT_LT(r.norm_defect, 1e-8);
    }
}
