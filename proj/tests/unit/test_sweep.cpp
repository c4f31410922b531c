#include <gtest/gtest.h>

#include <cmath>

#include "ltls/sweep.hpp"

using namespace ltls;

TEST(Methods, ParseListKeepsOrderAndDropsDuplicates) {
  const auto m = parse_methods("heun, numeric,ddp-sech,numeric");
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0], Method::heun);
  EXPECT_EQ(m[1], Method::numeric);
  EXPECT_EQ(m[2], Method::ddp_sech);
  EXPECT_THROW(parse_methods("numeric,magic"), DomainError);
  EXPECT_THROW(parse_methods(" , "), DomainError);
  for (Method x : {Method::numeric, Method::ddp_sech, Method::ddp_raw, Method::heun})
    EXPECT_EQ(parse_method(method_name(x)), x);
}

TEST(SweepSpec, ValidationAndGrid) {
  SweepSpec s;
  s.start = 1.0;
  s.stop = 1.0;
  EXPECT_THROW(s.validate(), DomainError);
  s.stop = 2.0;
  s.points = 1;
  EXPECT_THROW(s.validate(), DomainError);
  s.points = 7;
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.at(0), 1.0);
  EXPECT_EQ(s.at(6), 2.0);
  s.start = -1.0;
  EXPECT_THROW(s.validate(), DomainError);
}

TEST(Sweep, ParallelTableEqualsSerial) {
  SweepSpec s;
  s.axis = Axis::deltaT;
  s.start = 0.0;
  s.stop = 3.0;
  s.points = 23;
  s.fixed = 1.7;
  s.methods = {Method::numeric, Method::ddp_sech, Method::heun};
  const SweepTable a = run_sweep(s, 1), b = run_sweep(s, 4), c = run_sweep(s, 1);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i)
    for (std::size_t k = 0; k < a.cells[i].size(); ++k) {
      const double x = a.cells[i][k].p, y = b.cells[i][k].p, z = c.cells[i][k].p;
      EXPECT_TRUE((std::isnan(x) && std::isnan(y)) || x == y);
      EXPECT_TRUE((std::isnan(x) && std::isnan(z)) || x == z);
    }
  // Resonance: DDP and Heun are undefined at deltaT = 0.
  EXPECT_TRUE(a.cells[0][1].domain_error);
  EXPECT_TRUE(a.cells[0][2].domain_error);
  EXPECT_FALSE(a.cells[0][0].domain_error);
}

TEST(Lineshape, WeakFieldWidthIsLn2) {
  // First order: P ~ (pi a/2)^2 exp(-2|d|), whose FWHM is ln 2.
  SweepSpec s;
  s.axis = Axis::deltaT;
  s.start = 0.0;
  s.stop = 2.0;
  s.points = 41;
  s.fixed = 0.01;
  const LineshapeResult r = lineshape(s);
  ASSERT_EQ(r.lobes.size(), 1u);
  EXPECT_FALSE(r.multimodal);
  EXPECT_NEAR(r.linewidth, std::log(2.0), 1e-3);
  EXPECT_NEAR(r.lobes[0].left, -r.lobes[0].right, 1e-12);
  s.fixed = 0.2;
  EXPECT_NEAR(lineshape(s).linewidth / std::log(2.0), 1.0, 0.02);
}

TEST(Lineshape, StrongFieldIsFlaggedMultimodal) {
  SweepSpec s;
  s.axis = Axis::deltaT;
  s.start = 0.0;
  s.stop = 3.0;
  s.points = 61;
  s.fixed = 6.0;  // P(0) = sin^2(3 pi) = 0
  const LineshapeResult r = lineshape(s, 2);
  EXPECT_TRUE(r.multimodal);
  ASSERT_FALSE(r.lobes.empty());
  EXPECT_GT(r.lobes[0].peak_deltaT, 0.0);
}

TEST(Lineshape, DdpColumnStaysInUnitInterval) {
  SweepSpec s;
  s.axis = Axis::deltaT;
  s.start = 0.0;
  s.stop = 3.0;
  s.points = 31;
  s.fixed = 2.0;
  s.methods = {Method::numeric, Method::ddp_sech};
  const LineshapeResult r = lineshape(s);
  for (const auto& row : r.table.cells) {
    if (row[1].domain_error) continue;
    EXPECT_GE(row[1].p, 0.0);
    EXPECT_LE(row[1].p, 1.0);
  }
  EXPECT_THROW(lineshape([&] { auto t = s; t.axis = Axis::omega0T; t.start = 0.1; return t; }()), DomainError);
}

TEST(Oscillations, NodesAndEnvelope) {
  SweepSpec s;
  s.axis = Axis::omega0T;
  s.start = 0.5;
  s.stop = 12.0;
  s.points = 231;
  s.fixed = 3.0;
  const OscillationResult r = oscillations(s, 3);
  ASSERT_GE(r.nodes.size(), 2u);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    EXPECT_EQ(r.nodes[i].m, int(i) + 1);
    EXPECT_NEAR(oscillation_descriptors(s.params(r.nodes[i].omega0T)).phase, r.nodes[i].m * M_PI, 1e-9);
  }
  // Envelope dominates numeric P within DDP accuracy in the adiabatic window.
  for (std::size_t i = 0; i < r.table.grid.size(); ++i) EXPECT_LE(r.table.cells[i][0].p, r.envelope[i] + 0.02);
  // A wider range contains more nodes.
  SweepSpec wide = s;
  wide.stop = 20.0;
  wide.points = 391;
  EXPECT_GT(oscillations(wide, 3).nodes.size(), r.nodes.size());
}
