#include "granflow/box.hpp"
#include "granflow/errors.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace granflow;

namespace {

const MaterialParams kMat{};

} // namespace

TEST(Forcing, ConstantInertialHitsTargetI)
{
  const auto f = Forcing::constant_inertial(kMat, 1.5, 200.0);
  EXPECT_NEAR(inertial_number(kMat, f.shear(0.0), f.p(0.0)), 1.5, 1e-14);
  EXPECT_FALSE(f.next_switch(0.0).has_value());
}

TEST(Forcing, PiecewiseLookup)
{
  const auto f = Forcing::piecewise({{0.0, 1.0, 10.0}, {0.5, 2.0, 20.0}, {1.0, 3.0, 30.0}});
  EXPECT_EQ(f.shear(0.25), 1.0);
  EXPECT_EQ(f.shear(0.5), 2.0);
  EXPECT_EQ(f.at(0.5, true).shear, 1.0);
  EXPECT_EQ(f.shear(7.0), 3.0);
  EXPECT_EQ(*f.next_switch(0.5), 1.0);
  EXPECT_EQ(f.last_switch(), 1.0);
  EXPECT_THROW(Forcing::piecewise({{0.1, 1.0, 1.0}}), DomainError);
  EXPECT_THROW(Forcing::piecewise({{0.0, 1.0, 1.0}, {0.0, 1.0, 1.0}}), DomainError);
}

TEST(Forcing, PressureFloorEnforced)
{
  EXPECT_THROW(Forcing::constant(1.0, 0.0), DomainError);
  EXPECT_THROW(Forcing::constant(1.0, 5.0, 10.0), DomainError);
  EXPECT_THROW(Forcing::constant(1.0, 5.0, 0.0), DomainError);
  EXPECT_EQ(Forcing::constant(1.0, kDefaultPressureFloor).p(0.0), kDefaultPressureFloor);
  RandomForcingRange low;
  low.p_lo = 1e-3;
  low.p_hi = 1e-2;
  for (const auto& s : Forcing::random(5, kMat, 6, low, 0.5).segments()) {
    EXPECT_EQ(s.p, 0.5);
  }
}

TEST(Forcing, RandomIsReproducible)
{
  const auto a = Forcing::random(42, kMat, 8);
  const auto b = Forcing::random(42, kMat, 8);
  const auto c = Forcing::random(43, kMat, 8);
  ASSERT_EQ(a.segments().size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(a.segments()[i].shear, b.segments()[i].shear);
    EXPECT_EQ(a.segments()[i].t_start, b.segments()[i].t_start);
  }
  EXPECT_NE(a.segments()[0].shear, c.segments()[0].shear);
  for (const auto& s : a.segments()) {
    const double I = inertial_number(kMat, s.shear, s.p);
    EXPECT_GE(I, 0.05 * (1 - 1e-12));
    EXPECT_LE(I, 4.0 * (1 + 1e-12));
  }
}

TEST(StepBox, MatchesDirectEvaluationForSmallStep)
{
  const auto model = ModelSpec::drucker_prager(kMat);
  const auto f = Forcing::constant_inertial(kMat, 1.0, 100.0);
  const BoxState s0{0.0, 0.5, std::nullopt};
  const double dt = 1e-7;
  const auto s1 = step_box(s0, model, f, dt);
  const double rate = -s0.phi * div_u(model, FlowState{s0.phi, 100.0, f.shear(0.0), 0.0});
  EXPECT_NEAR((s1.state.phi - s0.phi) / dt, rate, 1e-4 * std::abs(rate));
  EXPECT_FALSE(s1.bound_violation);
  EXPECT_EQ(s1.state.t, dt);
}

TEST(StepBox, MatchesAdaptiveOracleOverManySteps)
{
  const auto model = ModelSpec::mu_i(kMat);
  const double p = 100.0;
  const auto f = Forcing::constant_inertial(kMat, 2.0, p);
  const double shear = f.shear(0.0);
  const auto rhs = [&](double phi) { return -phi * 2.0 * shear * dilatancy_f(model, phi, p, 2.0); };
  BoxState s{0.0, 0.45, std::nullopt};
  const double dt = 1e-4;
  for (int k = 0; k < 200; ++k) {
    s = step_box(s, model, f, dt).state;
  }
  EXPECT_NEAR(s.phi, oracle::integrate_ode(rhs, 0.45, 200 * dt), 1e-9);
}

TEST(StepBox, GasPressureFollowsVolumeChange)
{
  const auto model = ModelSpec::drucker_prager(kMat);
  const GasParams gas;
  const auto f = Forcing::constant_inertial(kMat, 1.0, 100.0);
  const BoxState s0{0.0, 0.45, 0.0};
  const auto s1 = step_box(s0, model, f, 1e-7, gas).state;
  ASSERT_TRUE(s1.p_f.has_value());
  // dilating (I > I_eq) lowers the pore pressure
  EXPECT_LT(*s1.p_f, 0.0);
  const double du = div_u(model, FlowState{0.45, 100.0, f.shear(0.0), 0.0});
  const double expected = -gas.p_atm * du / (1 - 0.45);
  EXPECT_NEAR(*s1.p_f / 1e-7, expected, 1e-4 * std::abs(expected));
}

TEST(StepBox, EquilibriumIsStationary)
{
  for (const char* id : {"dp", "mui", "dp-psi", "mui-psi"}) {
    const auto model = model_from_id(id, kMat);
    const auto f = Forcing::constant_inertial(kMat, 1.0, 100.0);
    const double phi0 = model.phi_eq(1.0);
    BoxState s{0.0, phi0, std::nullopt};
    for (int k = 0; k < 1000; ++k) {
      s = step_box(s, model, f, 1e-4).state;
    }
    EXPECT_LT(std::abs(s.phi - phi0), 1e-10) << id;
  }
}

TEST(RunBox, MonotoneApproachMatchesOracle)
{
  const auto model = ModelSpec::drucker_prager(kMat);
  const double p = 100.0;
  const auto f = Forcing::constant_inertial(kMat, 1.0, p);
  const double shear = f.shear(0.0);
  const double rate = 2.0 * shear * roux_radjai_gain(model, 1.0) * 0.4;
  BoxConfig cfg;
  cfg.phi0 = 0.55;
  cfg.t_end = 5.0 / rate;
  const auto run = run_box(model, f, cfg);
  for (std::size_t i = 1; i < run.trajectory.size(); ++i) {
    EXPECT_LE(run.trajectory[i].phi, run.trajectory[i - 1].phi);
  }
  const auto rhs = [&](double phi) { return -phi * 2.0 * shear * dilatancy_f(model, phi, p, 1.0); };
  EXPECT_NEAR(run.diagnostics.final_phi, oracle::integrate_ode(rhs, 0.55, cfg.t_end), 1e-6);
}

TEST(RunBox, ConvergesToEquilibrium)
{
  for (const char* id : {"dp", "mui"}) {
    const auto model = model_from_id(id, kMat);
    BoxConfig cfg;
    cfg.phi0 = 0.55;
    cfg.t_end = 2.0;
    const auto run = run_box(model, Forcing::constant_inertial(kMat, 1.0, 100.0), cfg);
    EXPECT_NEAR(run.diagnostics.final_phi, 0.4, 1e-6) << id;
    EXPECT_NEAR(run.diagnostics.final_phi_eq, 0.4, 1e-15);
    EXPECT_EQ(run.diagnostics.bound_violations, 0u);
    EXPECT_EQ(run.diagnostics.sign_mismatches, 0u);
    EXPECT_GT(run.diagnostics.sign_checks, 0u);
  }
}

TEST(RunBox, StartAtMaximumStaysBounded)
{
  const auto model = ModelSpec::drucker_prager(kMat);
  BoxConfig cfg;
  cfg.phi0 = kMat.phi_max;
  cfg.t_end = 0.3;
  const auto run = run_box(model, Forcing::random(3, kMat, 10), cfg);
  EXPECT_LE(run.diagnostics.phi_max_seen, kMat.phi_max + kBoundSlack);
  EXPECT_EQ(run.diagnostics.bound_violations, 0u);
}

TEST(RunBox, CsvIsDeterministicAndHasHeader)
{
  const auto model = ModelSpec::mu_i(kMat);
  BoxConfig cfg;
  cfg.t_end = 0.05;
  cfg.p_f0 = 0.0;
  cfg.output_every = 5;
  std::ostringstream a;
  std::ostringstream b;
  run_box(model, Forcing::random(9, kMat, 4), cfg).write_csv(a);
  run_box(model, Forcing::random(9, kMat, 4), cfg).write_csv(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "t,phi,pf,shear,p,I,I_eq,f,div_u");
}

TEST(RunBox, RejectsBadConfig)
{
  const auto model = ModelSpec::drucker_prager(kMat);
  BoxConfig cfg;
  cfg.phi0 = 0.7;
  EXPECT_THROW(run_box(model, Forcing::constant(1.0, 1.0), cfg), DomainError);
  cfg.phi0 = -0.1;
  EXPECT_THROW(run_box(model, Forcing::constant(1.0, 1.0), cfg), DomainError);
  cfg.phi0 = 0.5;
  cfg.t_end = -1.0;
  EXPECT_THROW(run_box(model, Forcing::constant(1.0, 1.0), cfg), DomainError);
}
