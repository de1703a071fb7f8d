#include "granflow/box.hpp"

#include "granflow/errors.hpp"
#include "granflow/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace granflow {

Forcing::Forcing(std::vector<Segment> segments, double p_floor)
  : segments_(std::move(segments))
  , p_floor_(p_floor)
{
  if (!(p_floor_ > 0.0)) {
    throw DomainError("pressure floor must be positive");
  }
  if (segments_.empty() || segments_.front().t_start != 0.0) {
    throw DomainError("forcing must start at t = 0");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (i > 0 && !(s.t_start > segments_[i - 1].t_start)) {
      throw DomainError("forcing segments must be strictly increasing in time");
    }
    if (!(s.shear >= 0.0) || !std::isfinite(s.shear)) {
      throw DomainError("forcing shear must be finite and non-negative");
    }
    if (!(s.p >= p_floor_) || !std::isfinite(s.p)) {
      throw DomainError("forcing pressure " + format_double(s.p) + " below the floor " + format_double(p_floor_));
    }
  }
}

Forcing Forcing::constant(double shear, double p, double p_floor)
{
  return Forcing({{0.0, shear, p}}, p_floor);
}

Forcing Forcing::constant_inertial(const MaterialParams& mat, double I, double p, double p_floor)
{
  if (!(I >= 0.0) || !(p > 0.0)) {
    throw DomainError("constant forcing needs I >= 0 and p > 0");
  }
  return constant(I * std::sqrt(p / mat.rho_s) / mat.d, p, p_floor);
}

Forcing Forcing::piecewise(std::vector<Segment> segments, double p_floor)
{
  return Forcing(std::move(segments), p_floor);
}

Forcing Forcing::random(std::uint64_t seed, const MaterialParams& mat, int segments, RandomForcingRange range,
                        double p_floor)
{
  if (segments < 1) {
    throw DomainError("random forcing needs at least one segment");
  }
  if (!(range.I_lo > 0.0 && range.I_lo <= range.I_hi && range.p_lo > 0.0 && range.p_lo <= range.p_hi &&
        range.duration_lo > 0.0 && range.duration_lo <= range.duration_hi)) {
    throw DomainError("random forcing ranges are inconsistent");
  }
  std::mt19937_64 rng(seed);
  // 53-bit uniform in [0, 1); avoids the implementation-defined distributions
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::log(lo) + uniform() * (std::log(hi) - std::log(lo)));
  };
  std::vector<Segment> out;
  double t = 0.0;
  for (int i = 0; i < segments; ++i) {
    const double I = log_uniform(range.I_lo, range.I_hi);
    const double p = std::max(log_uniform(range.p_lo, range.p_hi), p_floor);
    out.push_back({t, I * std::sqrt(p / mat.rho_s) / mat.d, p});
    t += range.duration_lo + uniform() * (range.duration_hi - range.duration_lo);
  }
  return Forcing(std::move(out), p_floor);
}

const Forcing::Segment& Forcing::at(double t, bool left) const
{
  auto it = left ? std::lower_bound(segments_.begin(), segments_.end(), t,
                                    [](const Segment& s, double x) { return s.t_start < x; })
                 : std::upper_bound(segments_.begin(), segments_.end(), t,
                                    [](double x, const Segment& s) { return x < s.t_start; });
  if (it == segments_.begin()) {
    return segments_.front();
  }
  return *std::prev(it);
}

std::optional<double> Forcing::next_switch(double t) const
{
  const auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double x, const Segment& s) { return x < s.t_start; });
  if (it == segments_.end()) {
    return std::nullopt;
  }
  return it->t_start;
}

namespace {

struct Rates
{
  double phi;
  double p_f;
};

double f_at(const ModelSpec& model, double phi, double p, double I)
{
  return dilatancy_f(model, std::min(phi, model.material().phi_max), p, I);
}

Rates box_rates(const ModelSpec& model, const Forcing::Segment& seg, double phi, double p_f, bool with_pf,
                const GasParams& gas)
{
  if (seg.shear == 0.0) {
    return {0.0, 0.0};
  }
  const double I = inertial_number(model.material(), seg.shear, seg.p);
  const double divu = 2.0 * seg.shear * f_at(model, phi, seg.p, I);
  Rates r{-phi * divu, 0.0};
  if (with_pf) {
    r.p_f = -(gas.p_atm + p_f) * divu / (1.0 - phi);
  }
  return r;
}

bool out_of_bounds(double phi, double phi_max)
{
  return phi < -kBoundSlack || phi > phi_max + kBoundSlack;
}

} // namespace

BoxStep step_box(const BoxState& s, const ModelSpec& model, const Forcing& forcing, double dt, const GasParams& gas)
{
  if (!(dt > 0.0)) {
    throw DomainError("time step must be positive");
  }
  const bool with_pf = s.p_f.has_value();
  const double pf = s.p_f.value_or(0.0);
  const auto& seg0 = forcing.at(s.t);
  const auto& seg1 = forcing.at(s.t + 0.5 * dt, true);
  const auto& seg2 = forcing.at(s.t + dt, true);

  const Rates k1 = box_rates(model, seg0, s.phi, pf, with_pf, gas);
  const Rates k2 = box_rates(model, seg1, s.phi + 0.5 * dt * k1.phi, pf + 0.5 * dt * k1.p_f, with_pf, gas);
  const Rates k3 = box_rates(model, seg1, s.phi + 0.5 * dt * k2.phi, pf + 0.5 * dt * k2.p_f, with_pf, gas);
  const Rates k4 = box_rates(model, seg2, s.phi + dt * k3.phi, pf + dt * k3.p_f, with_pf, gas);

  BoxStep out;
  out.state.t = s.t + dt;
  out.state.phi = s.phi + dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
  if (with_pf) {
    out.state.p_f = pf + dt / 6.0 * (k1.p_f + 2.0 * k2.p_f + 2.0 * k3.p_f + k4.p_f);
    if (!(*out.state.p_f > -gas.p_atm)) {
      throw DomainError("pore pressure fell below -p_atm");
    }
  }
  out.bound_violation = out_of_bounds(out.state.phi, model.material().phi_max);
  return out;
}

namespace {

BoxSample sample(const ModelSpec& model, const Forcing& forcing, const BoxState& s)
{
  BoxSample out;
  out.t = s.t;
  out.phi = s.phi;
  out.p_f = s.p_f;
  const auto& seg = forcing.at(s.t);
  out.shear = seg.shear;
  out.p = seg.p;
  out.I = inertial_number(model.material(), seg.shear, seg.p);
  if (s.phi <= model.material().phi_max) {
    out.I_eq = model.i_eq(s.phi);
  }
  if (out.I > 0.0) {
    out.f = f_at(model, s.phi, seg.p, out.I);
    out.div_u = 2.0 * seg.shear * out.f;
  }
  return out;
}

// Local relaxation rate used to bound the step.
double relaxation_rate(const ModelSpec& model, const Forcing::Segment& seg, double phi)
{
  if (seg.shear == 0.0) {
    return 0.0;
  }
  const double phi_max = model.material().phi_max;
  const double I = inertial_number(model.material(), seg.shear, seg.p);
  const double x = std::min(phi, phi_max);
  const double h = 1e-7;
  const double hi = std::min(x + h, phi_max);
  const double lo = hi - 2.0 * h;
  const double slope = (f_at(model, hi, seg.p, I) - f_at(model, lo, seg.p, I)) / (hi - lo);
  return 2.0 * seg.shear * (std::abs(f_at(model, x, seg.p, I)) + std::abs(phi) * std::abs(slope));
}

} // namespace

BoxRun run_box(const ModelSpec& model, const Forcing& forcing, const BoxConfig& config)
{
  if (!(config.t_end > 0.0) || !(config.dt_max > 0.0) || !(config.stiffness_limit > 0.0)) {
    throw DomainError("box run needs positive t_end, dt_max and stiffness limit");
  }
  if (config.output_every == 0) {
    throw DomainError("output_every must be at least 1");
  }
  if (!(config.phi0 >= 0.0 && config.phi0 <= model.material().phi_max)) {
    throw DomainError("initial volume fraction " + format_double(config.phi0) + " outside [0, phi_max]");
  }
  if (config.p_f0 && !(*config.p_f0 > -config.gas.p_atm)) {
    throw DomainError("initial pore pressure must exceed -p_atm");
  }
  BoxRun run;
  auto& diag = run.diagnostics;
  BoxState state{0.0, config.phi0, config.p_f0};
  diag.phi_min = diag.phi_max_seen = state.phi;

  const auto record = [&](const BoxState& s) {
    BoxSample smp = sample(model, forcing, s);
    if (smp.I_eq && smp.I > 0.0 && std::abs(smp.f) >= kSignDeadBand) {
      ++diag.sign_checks;
      const double gap = smp.I - *smp.I_eq;
      if (gap == 0.0 || (smp.div_u > 0.0) != (gap > 0.0)) {
        ++diag.sign_mismatches;
      }
    }
    run.trajectory.push_back(smp);
  };
  record(state);

  std::size_t step = 0;
  while (state.t < config.t_end) {
    double dt = std::min(config.dt_max, config.t_end - state.t);
    double target = state.t + dt;
    if (const auto sw = forcing.next_switch(state.t); sw && *sw <= target) {
      target = *sw;
      dt = target - state.t;
    }
    try {
      const double rate = relaxation_rate(model, forcing.at(state.t), state.phi);
      if (rate * dt > config.stiffness_limit) {
        dt = config.stiffness_limit / rate;
        target = state.t + dt;
      }
      BoxStep next = step_box(state, model, forcing, dt, config.gas);
      next.state.t = target;
      state = next.state;
      if (next.bound_violation) {
        ++diag.bound_violations;
        if (!diag.first_violation_step) diag.first_violation_step = step;
      }
    } catch (const DomainError& e) {
      throw DomainError("step " + std::to_string(step) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("step " + std::to_string(step) + ": " + e.what());
    }
    ++step;
    diag.phi_min = std::min(diag.phi_min, state.phi);
    diag.phi_max_seen = std::max(diag.phi_max_seen, state.phi);
    if (step % config.output_every == 0 || state.t >= config.t_end) {
      record(state);
    }
  }
  diag.steps = step;
  diag.final_phi = state.phi;
  const auto& last = forcing.at(state.t);
  diag.final_phi_eq = model.phi_eq(inertial_number(model.material(), last.shear, last.p));
  return run;
}

void BoxRun::write_csv(std::ostream& out) const
{
  out << "t,phi,pf,shear,p,I,I_eq,f,div_u\n";
  for (const auto& s : trajectory) {
    out << format_double(s.t) << ',' << format_double(s.phi) << ',' << (s.p_f ? format_double(*s.p_f) : "")
        << ',' << format_double(s.shear) << ',' << format_double(s.p) << ',' << format_double(s.I) << ','
        << (s.I_eq ? format_double(*s.I_eq) : "") << ',' << format_double(s.f) << ','
        << format_double(s.div_u) << '\n';
  }
}

} // namespace granflow
