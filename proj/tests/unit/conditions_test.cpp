#include "granflow/conditions.hpp"
#include "granflow/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace granflow;

namespace {

const MaterialParams kMat{};

GridSpec small_grid()
{
  return GridSpec::parse("phi=0.42:0.58:4,I=0.05:5:5:log,p=10:1000:2:log");
}

} // namespace

TEST(Grid, DefaultAxes)
{
  const GridSpec g;
  EXPECT_EQ(g.size(), 400u);
  const auto I = g.I.values();
  ASSERT_EQ(I.size(), 10u);
  EXPECT_DOUBLE_EQ(I.front(), 1e-2);
  EXPECT_NEAR(I.back(), 10.0, 1e-12);
  EXPECT_NEAR(I[1] / I[0], I[9] / I[8], 1e-12);
  const auto phi = g.phi.values();
  EXPECT_NEAR(phi[1] - phi[0], (0.595 - 0.40) / 9.0, 1e-15);
}

TEST(Grid, ParseAndPrintRoundTrip)
{
  const auto g = GridSpec::parse("phi=0.45:0.55:3,I=0.1:1:4:log");
  EXPECT_EQ(g.phi.count, 3);
  EXPECT_TRUE(g.I.log);
  EXPECT_EQ(g.p.count, GridSpec{}.p.count);
  const auto again = GridSpec::parse(g.to_string());
  EXPECT_EQ(again.to_string(), g.to_string());
}

TEST(Grid, RejectsMalformedSpecs)
{
  EXPECT_THROW(GridSpec::parse("phi=0.5"), ConfigError);
  EXPECT_THROW(GridSpec::parse("q=1:2:3"), ConfigError);
  EXPECT_THROW(GridSpec::parse("phi=0.5:0.4:3"), ConfigError);
  EXPECT_THROW(GridSpec::parse("I=0:1:3:log"), ConfigError);
  EXPECT_THROW(GridSpec::parse("phi=0.4:0.5:1"), ConfigError);
  EXPECT_THROW(GridSpec::parse("phi=0.4:0.5:3:cubic"), ConfigError);
}

TEST(Conditions, DruckerPragerClosedFormsAtAPoint)
{
  const auto dp = ModelSpec::drucker_prager(kMat);
  EXPECT_LT(std::abs(residual_C1(dp, 0.5, 100.0, 0.7)), 1e-8);
  const auto c2 = check_C2(dp, 0.5, 0.7);
  EXPECT_NEAR(c2.value, std::sin(kMat.delta), 1e-12);
  EXPECT_TRUE(c2.pass);
  // f does not depend on p, so the C3 value is -I f_I / (2p) = -sin d I_eq / (2 p I)
  const auto c3 = check_C3(dp, 0.5, 100.0, 0.7);
  EXPECT_NEAR(c3.value, -std::sin(kMat.delta) * 0.5 / (2.0 * 100.0 * 0.7), 1e-9);
  EXPECT_TRUE(c3.pass);
  const auto diss = check_dissipation(dp, 0.5, 100.0, 0.7);
  EXPECT_NEAR(diss.value, std::sin(kMat.delta) * 0.5 / 0.7, 1e-14);
}

TEST(Conditions, EquilibriumSigns)
{
  const auto mui = ModelSpec::mu_i(kMat);
  const auto eq = check_equilibrium_signs(mui, 0.5, 100.0);
  EXPECT_TRUE(eq.pass);
  EXPECT_NEAR(eq.f_at_eq, 0.0, 1e-14);
  EXPECT_GT(eq.f_above, 0.0);
  ASSERT_TRUE(eq.f_below.has_value());
  EXPECT_LT(*eq.f_below, 0.0);

  const auto at_max = check_equilibrium_signs(mui, kMat.phi_max, 100.0);
  EXPECT_TRUE(at_max.pass);
  EXPECT_FALSE(at_max.f_below.has_value());
}

TEST(Conditions, DissipationDensities)
{
  const GasParams gas;
  const auto dp = ModelSpec::drucker_prager(kMat);
  const std::vector<double> grad{120.0, -40.0};
  const double p = 400.0;
  const double I = 0.8;
  const double shear = I * std::sqrt(p / kMat.rho_s) / kMat.d;
  const FlowState s{0.5, p, shear, 0.0};
  const double general = dissipation_density(dp, s, gas, grad);
  const double closed = dissipation_density_dp(kMat, s, gas, grad);
  EXPECT_NEAR(general, closed, 1e-10 * closed);
}

TEST(Conditions, PowerLawDissipationSplit)
{
  for (const double n : {0.0, 1.0, 2.0, 3.0, -0.5}) {
    const auto model = ModelSpec::power_law(n, kMat);
    const double p = 250.0;
    const double I = 1.3;
    const double shear = I * std::sqrt(p / kMat.rho_s) / kMat.d;
    const FlowState s{0.5, p, shear, 0.0};
    const auto split = power_law_dissipation(n, kMat, {}, s);
    const double direct = 2.0 * (yield_Z(model, 0.5, I) - dilatancy_f(model, 0.5, p, I)) * p * shear;
    EXPECT_NEAR(split.total(), direct, 1e-10 * std::abs(direct)) << n;
    EXPECT_NEAR(split.shear_coefficient, 3.0 * n / (2.0 * (n + 1.0)), 1e-15);
    EXPECT_NEAR(split.pressure_coefficient, (2.0 - n) / (2.0 * (n + 1.0)), 1e-15);
  }
}

TEST(Sweep, CompliantModelsPassEverything)
{
  for (const char* id : {"dp", "mui"}) {
    const auto report = sweep(model_from_id(id, kMat), GridSpec{});
    EXPECT_TRUE(report.all_enabled_pass()) << id;
    EXPECT_EQ(report.skipped(), 0u);
    EXPECT_EQ(report.points.size(), 400u);
  }
}

TEST(Sweep, DilatancyAngleModelsPassNearEquilibrium)
{
  // C2 (Z + I Z_I >= 0) holds for I within a decade of I_eq
  for (const char* id : {"dp-psi", "mui-psi"}) {
    const auto model = model_from_id(id, kMat);
    for (const double phi : {0.42, 0.5, 0.58}) {
      const double Ieq = model.i_eq(phi);
      for (const double r : {0.1, 0.5, 1.0, 2.0, 10.0}) {
        EXPECT_TRUE(check_C2(model, phi, r * Ieq).pass) << id << " phi=" << phi << " I/Ieq=" << r;
      }
    }
  }
}

TEST(Sweep, DilatancyAngleModelsViolateC2FarBelowEquilibrium)
{
  // DP+psi: Z + I Z_I = sin d + cos d K (1 - (1 - beta) r^beta), r = I_eq / I, turns negative past r ~ 13.3
  const auto dp_psi = model_from_id("dp-psi", kMat);
  const double phi = 0.4;  // I_eq = 1
  EXPECT_TRUE(check_C2(dp_psi, phi, 1.0 / 12.0).pass);
  EXPECT_FALSE(check_C2(dp_psi, phi, 1.0 / 15.0).pass);
  const double d = kMat.delta;
  const double K = std::sin(d) / (1.0 - std::cos(d));
  const double beta = dp_dilatancy_exponent(d);
  const double r = 50.0;
  const double expected = std::sin(d) + std::cos(d) * K * (1.0 - (1.0 - beta) * std::pow(r, beta));
  EXPECT_NEAR(check_C2(dp_psi, phi, 1.0 / r).value, expected, 1e-6);

  // mu(I)+psi: G ~ ln I drives Z + I Z_I to -infinity as I -> 0
  const auto mui_psi = model_from_id("mui-psi", kMat);
  EXPECT_FALSE(check_C2(mui_psi, phi, 1e-2).pass);

  const auto report = sweep(dp_psi, GridSpec{});
  EXPECT_FALSE(report.all_pass(Condition::C2));
  EXPECT_TRUE(report.all_pass(Condition::C1));
  EXPECT_TRUE(report.all_pass(Condition::C3));
  EXPECT_TRUE(report.all_pass(Condition::Equilibrium));
}

TEST(Sweep, NegativeControlsFailC1WithWorstPoint)
{
  MaterialParams mat = kMat;
  mat.a_rr = 1.0;
  for (const char* id : {"dp-incompressible", "roux-radjai"}) {
    const auto report = sweep(model_from_id(id, mat), small_grid());
    const auto& c1 = report[Condition::C1];
    EXPECT_GT(c1.failures, 0u) << id;
    ASSERT_TRUE(c1.worst_index.has_value());
    EXPECT_GT(std::abs(c1.worst_value), kC1Tolerance);
    EXPECT_EQ(std::abs(report.points[*c1.worst_index].c1_residual), std::abs(c1.worst_value));
  }
}

TEST(Sweep, RouxRadjaiResidualAtReferencePoint)
{
  MaterialParams mat = kMat;
  mat.a_rr = 1.0;
  const auto rr = model_from_id("roux-radjai", mat).with_yield_from(ModelSpec::drucker_prager(mat));
  EXPECT_GT(std::abs(residual_C1(rr, 0.5, 100.0, 1.0)), 1e-3);
}

TEST(Sweep, PowerLawThreeFailsDissipation)
{
  const auto report = sweep(ModelSpec::power_law(3.0, kMat), small_grid());
  EXPECT_FALSE(report.all_pass(Condition::Dissipation));
  EXPECT_TRUE(report.all_pass(Condition::C1));
}

TEST(Sweep, DeterministicAcrossThreadCounts)
{
  const auto model = ModelSpec::mu_i(kMat);
  SweepOptions one;
  one.threads = 1;
  SweepOptions four;
  four.threads = 4;
  std::ostringstream a;
  std::ostringstream b;
  sweep(model, small_grid(), one).write_csv(a);
  sweep(model, small_grid(), four).write_csv(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "phi,I,p,status,c1_residual,c2_value,c3_value,dissipation_gap,eq_anchor,eq_sign_ok,reason");
}

TEST(Sweep, DisabledConditionsAreIgnored)
{
  SweepOptions opts;
  opts.enabled = {false, false, true, false, false};
  const auto report = sweep(ModelSpec::power_law(3.0, kMat), small_grid(), opts);
  EXPECT_FALSE(report[Condition::Dissipation].enabled);
  EXPECT_TRUE(report.all_enabled_pass());
}

TEST(Sweep, DomainErrorsBecomeSkippedPoints)
{
  // Schaeffer's law cannot be inverted below phi_max - delta_phi
  const auto model = ModelSpec::mu_i(kMat, EquilibriumLaw::schaeffer());
  const auto report = sweep(model, GridSpec::parse("phi=0.3:0.5:3,I=0.1:1:2:log,p=10:100:2:log"));
  EXPECT_GT(report.skipped(), 0u);
  EXPECT_LT(report.skipped(), report.points.size());
  for (const auto& pt : report.points) {
    if (pt.skipped) {
      EXPECT_FALSE(pt.reason.empty());
    }
  }
}
