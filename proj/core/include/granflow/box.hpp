#pragma once

#include "granflow/constitutive.hpp"
#include "granflow/material.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace granflow {

/// Lower bound on the prescribed pressure; keeps I finite.
inline constexpr double kDefaultPressureFloor = 1.0;
/// Slack allowed around [0, phi_max] before a step is flagged.
inline constexpr double kBoundSlack = 1e-9;
/// |f| below which the sign of div u is not compared with sign(I - I_eq).
inline constexpr double kSignDeadBand = 1e-12;

/// Homogeneous box: phi and optionally p_f, both uniform.
struct BoxState
{
  double t = 0.0;
  double phi = 0.0;
  std::optional<double> p_f;
};

/// Sampling ranges of Forcing::random.
struct RandomForcingRange
{
  double I_lo = 0.05;
  double I_hi = 4.0;
  double p_lo = 10.0;
  double p_hi = 1e4;
  double duration_lo = 5e-3;
  double duration_hi = 5e-2;
};

/// Piecewise-constant (|S|, p) signal. Segment i holds on [t_i, t_{i+1}).
class Forcing
{
public:
  struct Segment
  {
    double t_start = 0.0;
    double shear = 0.0;
    double p = 0.0;
  };

  static Forcing constant(double shear, double p, double p_floor = kDefaultPressureFloor);
  /// Shear chosen so that the inertial number equals I at pressure p.
  static Forcing constant_inertial(const MaterialParams& mat, double I, double p,
                                   double p_floor = kDefaultPressureFloor);
  /// Segments must start at t = 0 and be strictly increasing in time.
  static Forcing piecewise(std::vector<Segment> segments, double p_floor = kDefaultPressureFloor);
  /// Log-uniform I and p per segment, uniform durations. Bit-reproducible for a seed.
  static Forcing random(std::uint64_t seed, const MaterialParams& mat, int segments, RandomForcingRange range = {},
                        double p_floor = kDefaultPressureFloor);

  /// Segment in force at t. With `left`, a time equal to a segment start
  /// belongs to the previous segment (used for the end of a step).
  const Segment& at(double t, bool left = false) const;
  double shear(double t) const { return at(t).shear; }
  double p(double t) const { return at(t).p; }

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  /// Start of the last segment.
  double last_switch() const { return segments_.back().t_start; }
  /// First segment start strictly after t, if any.
  std::optional<double> next_switch(double t) const;
  double p_floor() const noexcept { return p_floor_; }

private:
  Forcing(std::vector<Segment> segments, double p_floor);

  std::vector<Segment> segments_;
  double p_floor_;
};

struct BoxStep
{
  BoxState state;
  bool bound_violation = false;
};

/**
 * One classical RK4 step of
 *
 *   d phi / dt = -phi div u,                  div u = 2 |S| f(phi, p, I)
 *   (1 - phi) d p_f / dt = -(p_atm + p_f) div u   (only when state.p_f is set)
 *
 * with I recomputed from the forcing at every stage. Stages that overshoot
 * phi_max evaluate f at phi_max; the state itself is never clamped, a value
 * outside [-kBoundSlack, phi_max + kBoundSlack] is reported instead.
 * The forcing must not switch inside (t, t + dt).
 */
BoxStep step_box(const BoxState& state, const ModelSpec& model, const Forcing& forcing, double dt,
                 const GasParams& gas = {});

struct BoxConfig
{
  double phi0 = 0.5;
  std::optional<double> p_f0;
  double t_end = 1.0;
  double dt_max = 1e-3;
  /// Upper bound on dt times the local relaxation rate 2 |S| (|f| + phi |df/dphi|).
  double stiffness_limit = 0.2;
  std::size_t output_every = 1;
  GasParams gas;
};

struct BoxSample
{
  double t = 0.0;
  double phi = 0.0;
  std::optional<double> p_f;
  double shear = 0.0;
  double p = 0.0;
  double I = 0.0;
  std::optional<double> I_eq;
  double f = 0.0;
  double div_u = 0.0;
};

struct BoxDiagnostics
{
  std::size_t steps = 0;
  double phi_min = 0.0;
  double phi_max_seen = 0.0;
  std::size_t bound_violations = 0;
  std::optional<std::size_t> first_violation_step;
  std::size_t sign_checks = 0;
  std::size_t sign_mismatches = 0;
  double final_phi = 0.0;
  /// phi_eq(I) of the last forcing segment.
  double final_phi_eq = 0.0;
};

struct BoxRun
{
  std::vector<BoxSample> trajectory;
  BoxDiagnostics diagnostics;

  /// Header `t,phi,pf,shear,p,I,I_eq,f,div_u`; absent values are left empty.
  void write_csv(std::ostream& out) const;
};

/// Integrates from t = 0 to config.t_end, splitting steps at forcing switches.
/// Step failures are rethrown with the step index prepended.
BoxRun run_box(const ModelSpec& model, const Forcing& forcing, const BoxConfig& config);

} // namespace granflow
