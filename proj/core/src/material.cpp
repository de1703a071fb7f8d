#include "granflow/material.hpp"

#include "granflow/config_file.hpp"
#include "granflow/errors.hpp"
#include "granflow/format.hpp"

#include <boost/math/tools/roots.hpp>

#include <array>
#include <charconv>
#include <ostream>
#include <string>

namespace granflow {

std::string format_double(double value)
{
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) {
    return "nan";
  }
  return std::string(buf.data(), ptr);
}

void MaterialParams::validate() const
{
  if (!(rho_s > 0.0)) throw DomainError("rho_s must be positive");
  if (!(d > 0.0)) throw DomainError("grain diameter d must be positive");
  if (!(phi_max > 0.0 && phi_max < 1.0)) throw DomainError("phi_max must lie in (0, 1)");
  if (!(delta_phi > 0.0)) throw DomainError("delta_phi must be positive");
  if (!(mu1 > 0.0 && mu1 < mu2)) throw DomainError("friction bounds need 0 < mu1 < mu2");
  if (!(I0 > 0.0)) throw DomainError("I0 must be positive");
  if (!(delta > 0.0 && delta < std::numbers::pi / 2)) throw DomainError("delta must lie in (0, pi/2)");
}

void GasParams::validate() const
{
  if (!(eta_f > 0.0)) throw DomainError("eta_f must be positive");
  if (!(p_atm > 0.0)) throw DomainError("p_atm must be positive");
  if (!(rho_f0 > 0.0)) throw DomainError("rho_f0 must be positive");
}

double inertial_number(const MaterialParams& mat, double shear, double p)
{
  if (!(p > 0.0)) {
    throw DomainError("inertial number undefined for p <= 0 (p = " + format_double(p) + ")");
  }
  if (shear < 0.0) {
    throw DomainError("shear rate norm must be non-negative");
  }
  return mat.d * shear / std::sqrt(p / mat.rho_s);
}

double viscous_number_J(const GasParams& gas, double shear, double p)
{
  if (!(p > 0.0)) {
    throw DomainError("viscous number undefined for p <= 0");
  }
  return gas.eta_f * shear / p;
}

double phi_eq(const EquilibriumLaw& law, const MaterialParams& mat, double I)
{
  if (I < 0.0 || std::isnan(I)) {
    throw DomainError("equilibrium law needs I >= 0");
  }
  switch (law.kind) {
    case EquilibriumKind::Linear:
      return mat.phi_max - mat.delta_phi * I;
    case EquilibriumKind::Schaeffer:
      // delta_phi / (1 + 1/I) written so that I = 0 gives phi_max
      return mat.phi_max - mat.delta_phi * I / (1.0 + I);
    case EquilibriumKind::Robinson:
      return mat.phi_max - law.A * std::pow(I, law.a);
    case EquilibriumKind::Breard:
      return mat.phi_max / (1.0 + I);
  }
  return mat.phi_max;
}

double phi_eq_slope(const EquilibriumLaw& law, const MaterialParams& mat, double I)
{
  if (I < 0.0) {
    throw DomainError("equilibrium law needs I >= 0");
  }
  switch (law.kind) {
    case EquilibriumKind::Linear:
      return mat.delta_phi;
    case EquilibriumKind::Schaeffer:
      return mat.delta_phi / ((1.0 + I) * (1.0 + I));
    case EquilibriumKind::Robinson:
      return law.A * law.a * std::pow(I, law.a - 1.0);
    case EquilibriumKind::Breard:
      return mat.phi_max / ((1.0 + I) * (1.0 + I));
  }
  return mat.delta_phi;
}

double i_eq(const EquilibriumLaw& law, const MaterialParams& mat, double phi)
{
  if (phi > mat.phi_max) {
    throw DomainError("no non-negative equilibrium inertial number for phi = " + format_double(phi) +
                      " > phi_max");
  }
  if (law.kind == EquilibriumKind::Linear) {
    return (mat.phi_max - phi) / mat.delta_phi;
  }
  if (phi == mat.phi_max) {
    return 0.0;
  }
  const auto residual = [&](double I) { return phi_eq(law, mat, I) - phi; };
  if (residual(kEquilibriumInversionCap) > 0.0) {
    throw NumericalError("equilibrium inversion: phi = " + format_double(phi) +
                         " is not bracketed on [0, " + format_double(kEquilibriumInversionCap) + "]");
  }
  const auto tol = [](double lo, double hi) { return hi - lo <= 1e-15 * std::max(1.0, hi); };
  const auto [lo, hi] = boost::math::tools::bisect(residual, 0.0, kEquilibriumInversionCap, tol);
  return 0.5 * (lo + hi);
}

double div_u_from_angle(double shear, double psi, AngleMode mode)
{
  if (!(std::abs(psi) < std::numbers::pi / 2)) {
    throw DomainError("dilatancy angle must satisfy |psi| < pi/2");
  }
  switch (mode) {
    case AngleMode::Planar2D:
      return 2.0 * shear * std::sin(psi);
    case AngleMode::Exact3D: {
      const double s = std::sin(psi);
      return 2.0 * shear * s / std::sqrt(1.0 + s * s / 3.0);
    }
    case AngleMode::SmallAngle:
      return 2.0 * shear * psi;
  }
  return 0.0;
}

double angle_from_div_u(double shear, double divu, AngleMode mode)
{
  if (divu == 0.0) {
    return 0.0;
  }
  if (!(shear > 0.0)) {
    throw DomainError("dilatancy angle undefined for zero shear with non-zero div u");
  }
  switch (mode) {
    case AngleMode::Planar2D: {
      const double s = divu / (2.0 * shear);
      if (std::abs(s) > 1.0) throw DomainError("|div u| exceeds 2|S|: no dilatancy angle");
      return std::asin(s);
    }
    case AngleMode::Exact3D: {
      const double ell2 = 4.0 * shear * shear - divu * divu / 3.0;
      if (!(ell2 > 0.0)) throw DomainError("4|S|^2 - (div u)^2/3 <= 0: no dilatancy angle");
      const double s = divu / std::sqrt(ell2);
      if (std::abs(s) > 1.0) throw DomainError("arcsin argument out of range");
      return std::asin(s);
    }
    case AngleMode::SmallAngle:
      return divu / (2.0 * shear);
  }
  return 0.0;
}

std::string_view to_string(EquilibriumKind kind)
{
  switch (kind) {
    case EquilibriumKind::Linear: return "linear";
    case EquilibriumKind::Schaeffer: return "schaeffer";
    case EquilibriumKind::Robinson: return "robinson";
    case EquilibriumKind::Breard: return "breard";
  }
  return "linear";
}

EquilibriumKind parse_equilibrium_kind(std::string_view name)
{
  if (name == "linear") return EquilibriumKind::Linear;
  if (name == "schaeffer") return EquilibriumKind::Schaeffer;
  if (name == "robinson") return EquilibriumKind::Robinson;
  if (name == "breard") return EquilibriumKind::Breard;
  throw ConfigError("unknown equilibrium law '" + std::string(name) + "'");
}

std::string_view to_string(AngleMode mode)
{
  switch (mode) {
    case AngleMode::Planar2D: return "planar2d";
    case AngleMode::Exact3D: return "exact3d";
    case AngleMode::SmallAngle: return "small-angle";
  }
  return "planar2d";
}

AngleMode parse_angle_mode(std::string_view name)
{
  if (name == "planar2d") return AngleMode::Planar2D;
  if (name == "exact3d") return AngleMode::Exact3D;
  if (name == "small-angle") return AngleMode::SmallAngle;
  throw ConfigError("unknown angle mode '" + std::string(name) + "'");
}

MaterialParams material_from_config(KeyValueFile& cfg)
{
  MaterialParams mat;
  mat.rho_s = cfg.take_double("rho_s", mat.rho_s);
  mat.d = cfg.take_double("d", mat.d);
  mat.phi_max = cfg.take_double("phi_max", mat.phi_max);
  mat.delta_phi = cfg.take_double("delta_phi", mat.delta_phi);
  mat.delta = cfg.take_angle("delta", mat.delta);
  mat.mu1 = cfg.take_double("mu1", mat.mu1);
  mat.mu2 = cfg.take_double("mu2", mat.mu2);
  mat.I0 = cfg.take_double("I0", mat.I0);
  if (auto a = cfg.take_double("a_rr")) {
    mat.a_rr = *a;
  }
  try {
    mat.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid material parameters: ") + e.what());
  }
  return mat;
}

GasParams gas_from_config(KeyValueFile& cfg)
{
  GasParams gas;
  gas.eta_f = cfg.take_double("eta_f", gas.eta_f);
  gas.p_atm = cfg.take_double("p_atm", gas.p_atm);
  gas.rho_f0 = cfg.take_double("rho_f0", gas.rho_f0);
  try {
    gas.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid gas parameters: ") + e.what());
  }
  return gas;
}

EquilibriumLaw equilibrium_from_config(KeyValueFile& cfg)
{
  EquilibriumLaw law;
  law.kind = parse_equilibrium_kind(cfg.take_string("eq_law", "linear"));
  law.A = cfg.take_double("eq_A", law.A);
  law.a = cfg.take_double("eq_a", law.a);
  return law;
}

void write_config(std::ostream& out, const MaterialParams& mat)
{
  out << "rho_s = " << format_double(mat.rho_s) << '\n'
      << "d = " << format_double(mat.d) << '\n'
      << "phi_max = " << format_double(mat.phi_max) << '\n'
      << "delta_phi = " << format_double(mat.delta_phi) << '\n'
      << "delta = " << format_double(mat.delta) << "rad\n"
      << "mu1 = " << format_double(mat.mu1) << '\n'
      << "mu2 = " << format_double(mat.mu2) << '\n'
      << "I0 = " << format_double(mat.I0) << '\n';
  if (mat.a_rr) {
    out << "a_rr = " << format_double(*mat.a_rr) << '\n';
  }
}

void write_config(std::ostream& out, const GasParams& gas)
{
  out << "eta_f = " << format_double(gas.eta_f) << '\n'
      << "p_atm = " << format_double(gas.p_atm) << '\n'
      << "rho_f0 = " << format_double(gas.rho_f0) << '\n';
}

void write_config(std::ostream& out, const EquilibriumLaw& law)
{
  out << "eq_law = " << to_string(law.kind) << '\n';
  if (law.kind == EquilibriumKind::Robinson) {
    out << "eq_A = " << format_double(law.A) << '\n' << "eq_a = " << format_double(law.a) << '\n';
  }
}

} // namespace granflow
