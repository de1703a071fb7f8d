#include "granflow/conditions.hpp"

#include "granflow/config_file.hpp"
#include "granflow/errors.hpp"
#include "granflow/format.hpp"
#include "granflow/gas.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <exception>
#include <limits>
#include <thread>

namespace granflow {

// -- grid -------------------------------------------------------------------

std::vector<double> GridAxis::values() const
{
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out[static_cast<std::size_t>(i)] =
      log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
  }
  // pin the endpoints so that log spacing does not drift off them
  out.front() = lo;
  out.back() = hi;
  return out;
}

namespace {

GridAxis parse_axis(std::string_view name, std::string_view spec)
{
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3 && parts.size() != 4) {
    throw ConfigError("grid axis '" + std::string(name) + "' expects lo:hi:n[:log]");
  }
  GridAxis axis;
  axis.lo = parse_double(parts[0]);
  axis.hi = parse_double(parts[1]);
  const double n = parse_double(parts[2]);
  if (n != std::floor(n) || n < 2 || n > 1e6) {
    throw ConfigError("grid axis '" + std::string(name) + "' needs an integer count >= 2");
  }
  axis.count = static_cast<int>(n);
  if (parts.size() == 4) {
    if (parts[3] == "log") axis.log = true;
    else if (parts[3] == "lin") axis.log = false;
    else throw ConfigError("grid axis spacing must be 'log' or 'lin'");
  }
  return axis;
}

std::string axis_string(std::string_view name, const GridAxis& a)
{
  return std::string(name) + "=" + format_double(a.lo) + ":" + format_double(a.hi) + ":" +
         std::to_string(a.count) + (a.log ? ":log" : "");
}

} // namespace

GridSpec GridSpec::parse(std::string_view text)
{
  GridSpec grid;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    if (!item.empty()) {
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("grid item '" + std::string(item) + "' lacks '='");
      }
      const auto name = item.substr(0, eq);
      const auto axis = parse_axis(name, item.substr(eq + 1));
      if (name == "phi") grid.phi = axis;
      else if (name == "I") grid.I = axis;
      else if (name == "p") grid.p = axis;
      else throw ConfigError("unknown grid axis '" + std::string(name) + "'");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  grid.validate();
  return grid;
}

std::string GridSpec::to_string() const
{
  return axis_string("phi", phi) + "," + axis_string("I", I) + "," + axis_string("p", p);
}

void GridSpec::validate() const
{
  const auto check = [](const GridAxis& a, std::string_view name, bool positive) {
    if (!(a.lo < a.hi)) throw ConfigError("grid axis " + std::string(name) + " needs lo < hi");
    if (a.count < 2) throw ConfigError("grid axis " + std::string(name) + " needs at least 2 points");
    if ((positive || a.log) && !(a.lo > 0.0)) {
      throw ConfigError("grid axis " + std::string(name) + " needs lo > 0");
    }
  };
  check(phi, "phi", false);
  check(I, "I", true);
  check(p, "p", true);
}

std::size_t GridSpec::size() const
{
  return static_cast<std::size_t>(phi.count) * static_cast<std::size_t>(I.count) *
         static_cast<std::size_t>(p.count);
}

std::string_view to_string(Condition c)
{
  switch (c) {
    case Condition::Dissipation: return "dissipation";
    case Condition::C1: return "C1";
    case Condition::C2: return "C2";
    case Condition::C3: return "C3";
    case Condition::Equilibrium: return "equilibrium";
  }
  return "?";
}

// -- pointwise checks -------------------------------------------------------

namespace {

double step_for(double I) { return 1e-6 * std::max(I, 1e-3); }

// Central difference; on a domain error the step is shrunk once.
template <class G>
double central_difference(G&& g, double x, double h)
{
  try {
    return (g(x + h) - g(x - h)) / (2.0 * h);
  } catch (const DomainError&) {
    h *= 1e-2;
    return (g(x + h) - g(x - h)) / (2.0 * h);
  }
}

} // namespace

double residual_C1(const ModelSpec& m, double phi, double p, double I)
{
  if (!(I > 0.0) || !(p > 0.0)) {
    throw DomainError("C1 residual needs I > 0 and p > 0");
  }
  const double h = step_for(I);
  const auto Z = [&](double J) { return yield_Z(m, phi, J); };
  const auto f = [&](double J) { return dilatancy_f(m, phi, p, J); };
  const double z_I = central_difference(Z, I, h);
  const double f_I = central_difference(f, I, h);
  return (Z(I) - 0.5 * I * z_I) - (f(I) + I * f_I);
}

CheckValue check_C2(const ModelSpec& m, double phi, double I)
{
  if (!(I > 0.0)) {
    throw DomainError("C2 needs I > 0");
  }
  const auto Z = [&](double J) { return yield_Z(m, phi, J); };
  const double value = Z(I) + I * central_difference(Z, I, step_for(I));
  return {value, value >= kC2Tolerance};
}

CheckValue check_C3(const ModelSpec& m, double phi, double p, double I)
{
  if (!(I > 0.0) || !(p > 0.0)) {
    throw DomainError("C3 needs I > 0 and p > 0");
  }
  const auto f_of_I = [&](double J) { return dilatancy_f(m, phi, p, J); };
  const auto f_of_p = [&](double q) { return dilatancy_f(m, phi, q, I); };
  const double f_I = central_difference(f_of_I, I, step_for(I));
  const double f_p = central_difference(f_of_p, p, 1e-6 * p);
  const double value = f_p - I / (2.0 * p) * f_I;
  return {value, value < kC3Tolerance};
}

CheckValue check_dissipation(const ModelSpec& m, double phi, double p, double I)
{
  const double gap = yield_Z(m, phi, I) - dilatancy_f(m, phi, p, I);
  return {gap, gap >= kDissipationTolerance};
}

EquilibriumCheck check_equilibrium_signs(const ModelSpec& m, double phi, double p)
{
  const double I_eq = m.i_eq(phi);
  EquilibriumCheck out;
  if (I_eq == 0.0) {
    out.f_above = dilatancy_f(m, phi, p, 1.0);
    out.pass = out.f_above > 0.0;
    return out;
  }
  out.f_at_eq = dilatancy_f(m, phi, p, I_eq);
  out.f_above = dilatancy_f(m, phi, p, 2.0 * I_eq);
  out.f_below = dilatancy_f(m, phi, p, 0.5 * I_eq);
  out.pass = std::abs(out.f_at_eq) < kEquilibriumAnchorTolerance && out.f_above > 0.0 && *out.f_below < 0.0;
  return out;
}

// -- dissipation densities --------------------------------------------------

namespace {

double squared_norm(std::span<const double> v)
{
  double s = 0.0;
  for (const double x : v) s += x * x;
  return s;
}

double darcy_part(const MaterialParams& mat, const GasParams& gas, double phi, std::span<const double> grad)
{
  const double g2 = squared_norm(grad);
  return g2 == 0.0 ? 0.0 : permeability_kappa(gas, mat.d, phi) * g2;
}

} // namespace

double dissipation_density(const ModelSpec& m, const FlowState& s, const GasParams& gas,
                           std::span<const double> grad_pf)
{
  double granular = 0.0;
  if (s.shear > 0.0) {
    const double I = inertial_number(m.material(), s.shear, s.p);
    granular = 2.0 * (yield_Z(m, s.phi, I) - dilatancy_f(m, s.phi, s.p, I)) * s.p * s.shear;
  } else if (!(s.p > 0.0)) {
    throw DomainError("dissipation density needs p > 0");
  }
  return darcy_part(m.material(), gas, s.phi, grad_pf) + granular;
}

double dissipation_density_dp(const MaterialParams& mat, const FlowState& s, const GasParams& gas,
                              std::span<const double> grad_pf)
{
  if (!(s.p > 0.0)) {
    throw DomainError("dissipation density needs p > 0");
  }
  const double lambda = 1.0 / (mat.delta_phi * mat.d * std::sqrt(mat.rho_s));
  return 2.0 * lambda * std::sin(mat.delta) * (mat.phi_max - s.phi) * s.p * std::sqrt(s.p) +
         darcy_part(mat, gas, s.phi, grad_pf);
}

PowerLawDissipation power_law_dissipation(double n, const MaterialParams& mat, const EquilibriumLaw& law,
                                          const FlowState& s)
{
  PowerLawDissipation out{};
  out.pressure_coefficient = power_law_f_coefficient(n);
  out.shear_coefficient = 3.0 * n / (2.0 * (n + 1.0));
  const double I = inertial_number(mat, s.shear, s.p);
  const double I_eq = i_eq(law, mat, s.phi);
  out.shear_part = s.shear > 0.0 ? 2.0 * out.shear_coefficient * std::pow(I, n) * s.p * s.shear : 0.0;
  out.pressure_part = I_eq > 0.0 ? 2.0 * out.pressure_coefficient * std::pow(I_eq, n + 1.0) * s.p *
                                     std::sqrt(s.p) / (mat.d * std::sqrt(mat.rho_s))
                                 : 0.0;
  return out;
}

// -- sweep ------------------------------------------------------------------

bool PointRecord::passes(Condition c) const
{
  if (skipped) return true;
  switch (c) {
    case Condition::Dissipation: return dissipation_gap >= kDissipationTolerance;
    case Condition::C1: return std::abs(c1_residual) < kC1Tolerance;
    case Condition::C2: return c2_value >= kC2Tolerance;
    case Condition::C3: return c3_value < kC3Tolerance;
    case Condition::Equilibrium: return eq_sign_ok;
  }
  return false;
}

bool ConditionReport::all_enabled_pass() const
{
  return std::all_of(summary.begin(), summary.end(), [](const ConditionSummary& s) { return s.all_pass(); });
}

std::size_t ConditionReport::skipped() const
{
  return static_cast<std::size_t>(
    std::count_if(points.begin(), points.end(), [](const PointRecord& r) { return r.skipped; }));
}

namespace {

std::string csv_safe(std::string s)
{
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// Larger is worse.
double badness(const PointRecord& r, Condition c)
{
  switch (c) {
    case Condition::Dissipation: return -r.dissipation_gap;
    case Condition::C1: return std::abs(r.c1_residual);
    case Condition::C2: return -r.c2_value;
    case Condition::C3: return r.c3_value;
    case Condition::Equilibrium: return (r.eq_sign_ok ? 0.0 : 1.0) + std::abs(r.eq_anchor);
  }
  return 0.0;
}

double reported_value(const PointRecord& r, Condition c)
{
  switch (c) {
    case Condition::Dissipation: return r.dissipation_gap;
    case Condition::C1: return r.c1_residual;
    case Condition::C2: return r.c2_value;
    case Condition::C3: return r.c3_value;
    case Condition::Equilibrium: return r.eq_anchor;
  }
  return 0.0;
}

} // namespace

void ConditionReport::write_csv(std::ostream& out) const
{
  out << "phi,I,p,status,c1_residual,c2_value,c3_value,dissipation_gap,eq_anchor,eq_sign_ok,reason\n";
  for (const auto& r : points) {
    out << format_double(r.phi) << ',' << format_double(r.I) << ',' << format_double(r.p) << ',';
    if (r.skipped) {
      out << "skipped,,,,,,," << csv_safe(r.reason) << '\n';
      continue;
    }
    out << "ok," << format_double(r.c1_residual) << ',' << format_double(r.c2_value) << ','
        << format_double(r.c3_value) << ',' << format_double(r.dissipation_gap) << ','
        << format_double(r.eq_anchor) << ',' << (r.eq_sign_ok ? 1 : 0) << ",\n";
  }
}

void ConditionReport::write_summary(std::ostream& out) const
{
  out << "model: " << model_id << '\n'
      << "grid: " << grid.to_string() << '\n'
      << "points: " << points.size() << " (skipped " << skipped() << ")\n";
  for (const Condition c : kAllConditions) {
    const auto& s = (*this)[c];
    out << "  " << to_string(c) << ": ";
    if (!s.enabled) {
      out << "disabled\n";
      continue;
    }
    out << (s.all_pass() ? "pass" : "FAIL") << ", failures " << s.failures << '/' << s.evaluated;
    if (s.worst_index) {
      const auto& r = points[*s.worst_index];
      out << ", worst " << format_double(s.worst_value) << " at phi=" << format_double(r.phi)
          << " I=" << format_double(r.I) << " p=" << format_double(r.p);
    }
    out << '\n';
  }
}

ConditionReport sweep(const ModelSpec& m, const GridSpec& grid, const SweepOptions& options)
{
  grid.validate();
  const auto phis = grid.phi.values();
  const auto Is = grid.I.values();
  const auto ps = grid.p.values();
  const auto enabled = [&](Condition c) { return options.enabled[static_cast<std::size_t>(c)]; };

  ConditionReport report;
  report.model_id = m.id();
  report.grid = grid;
  report.points.resize(grid.size());

  const std::size_t n_I = Is.size();
  const std::size_t n_p = ps.size();
  const auto evaluate = [&](std::size_t index) {
    PointRecord& r = report.points[index];
    const std::size_t ip = index % n_p;
    const std::size_t iI = (index / n_p) % n_I;
    const std::size_t iphi = index / (n_p * n_I);
    r.phi = phis[iphi];
    r.I = Is[iI];
    r.p = ps[ip];
    try {
      if (enabled(Condition::C1)) r.c1_residual = residual_C1(m, r.phi, r.p, r.I);
      if (enabled(Condition::C2)) r.c2_value = check_C2(m, r.phi, r.I).value;
      if (enabled(Condition::C3)) r.c3_value = check_C3(m, r.phi, r.p, r.I).value;
      if (enabled(Condition::Dissipation)) r.dissipation_gap = check_dissipation(m, r.phi, r.p, r.I).value;
      if (enabled(Condition::Equilibrium)) {
        const auto eq = check_equilibrium_signs(m, r.phi, r.p);
        r.eq_sign_ok = eq.pass;
        r.eq_anchor = eq.f_at_eq;
      }
    } catch (const DomainError& e) {
      r.skipped = true;
      r.reason = e.what();
    } catch (const NumericalError& e) {
      r.skipped = true;
      r.reason = e.what();
    }
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, report.points.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < report.points.size(); ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = next++; i < report.points.size(); i = next++) evaluate(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (const Condition c : kAllConditions) {
    auto& s = report[c];
    s.enabled = enabled(c);
    if (!s.enabled) continue;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < report.points.size(); ++i) {
      const auto& r = report.points[i];
      if (r.skipped) continue;
      ++s.evaluated;
      if (!r.passes(c)) ++s.failures;
      const double b = badness(r, c);
      if (b > worst) {
        worst = b;
        s.worst_index = i;
        s.worst_value = reported_value(r, c);
      }
    }
  }
  return report;
}

} // namespace granflow
