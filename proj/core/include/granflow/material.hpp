#pragma once

#include <cmath>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string_view>

namespace granflow {

class KeyValueFile;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Granular phase parameters. Defaults are the glass-bead constants.
struct MaterialParams
{
  double rho_s = 2500.0;                      ///< solid density [kg/m^3]
  double d = 1.0e-3;                          ///< grain diameter [m]
  double phi_max = 0.6;                       ///< maximum volume fraction [-]
  double delta_phi = 0.2;                     ///< slope of the linear equilibrium law [-]
  double delta = deg_to_rad(30.0);            ///< internal friction angle [rad]
  double mu1 = std::tan(deg_to_rad(21.0));    ///< quasi-static friction [-]
  double mu2 = std::tan(deg_to_rad(33.0));    ///< limiting friction [-]
  double I0 = 0.3;                            ///< inertial scale [-]
  std::optional<double> a_rr;                 ///< Roux-Radjai gain, only for that closure

  /// Throws DomainError on the first violated invariant.
  void validate() const;
};

/// Interstitial gas parameters (air by default).
struct GasParams
{
  double eta_f = 1.8e-5;   ///< dynamic viscosity [Pa s]
  double p_atm = 1.013e5;  ///< atmospheric pressure [Pa]
  double rho_f0 = 1.0;     ///< gas density at p_atm [kg/m^3]

  void validate() const;
};

enum class EquilibriumKind { Linear, Schaeffer, Robinson, Breard };

/// Packing fraction reached under steady isochoric shearing at inertial number I.
///
/// Linear:    phi_max - delta_phi I
/// Schaeffer: phi_max - delta_phi / (1 + 1/I)
/// Robinson:  phi_max - A I^a
/// Breard:    phi_max / (1 + I)
struct EquilibriumLaw
{
  EquilibriumKind kind = EquilibriumKind::Linear;
  double A = 0.1305;  ///< Robinson prefactor
  double a = 0.8156;  ///< Robinson exponent

  static EquilibriumLaw linear() { return {}; }
  static EquilibriumLaw schaeffer() { return {EquilibriumKind::Schaeffer}; }
  static EquilibriumLaw robinson(double A = 0.1305, double a = 0.8156)
  {
    return {EquilibriumKind::Robinson, A, a};
  }
  static EquilibriumLaw breard() { return {EquilibriumKind::Breard}; }
};

/// Upper end of the bracket used when inverting non-linear equilibrium laws.
inline constexpr double kEquilibriumInversionCap = 1.0e3;

/// Local state at which the laws are evaluated.
struct FlowState
{
  double phi = 0.0;    ///< volume fraction [-]
  double p = 0.0;      ///< solid pressure [Pa]
  double shear = 0.0;  ///< |S|, second-invariant norm of the deviatoric strain rate [1/s]
  double p_f = 0.0;    ///< pore gas pressure [Pa]
};

/// I = d |S| / sqrt(p / rho_s). Throws DomainError for p <= 0 or shear < 0.
double inertial_number(const MaterialParams& mat, double shear, double p);

/// J = eta_f |S| / p. Throws DomainError for p <= 0.
double viscous_number_J(const GasParams& gas, double shear, double p);

/// Returned as-is: the linear law goes negative for I > phi_max / delta_phi.
double phi_eq(const EquilibriumLaw& law, const MaterialParams& mat, double I);

/// Inverse of phi_eq. Linear law in closed form, the others by bisection on
/// [0, kEquilibriumInversionCap]. Throws DomainError for phi > phi_max and
/// NumericalError when phi is not bracketed.
double i_eq(const EquilibriumLaw& law, const MaterialParams& mat, double phi);

/// -d(phi_eq)/dI, positive for every supported law.
double phi_eq_slope(const EquilibriumLaw& law, const MaterialParams& mat, double I);

enum class AngleMode { Planar2D, Exact3D, SmallAngle };

/// Rate of volume change produced by a dilatancy angle psi under shear |S|.
double div_u_from_angle(double shear, double psi, AngleMode mode);

/// Inverse of div_u_from_angle.
double angle_from_div_u(double shear, double divu, AngleMode mode);

std::string_view to_string(EquilibriumKind kind);
EquilibriumKind parse_equilibrium_kind(std::string_view name);
std::string_view to_string(AngleMode mode);
AngleMode parse_angle_mode(std::string_view name);

/// Pull material keys (rho_s, d, phi_max, delta_phi, delta, mu1, mu2, I0, a_rr).
MaterialParams material_from_config(KeyValueFile& cfg);
/// Pull gas keys (eta_f, p_atm, rho_f0).
GasParams gas_from_config(KeyValueFile& cfg);
/// Pull eq_law, eq_A, eq_a.
EquilibriumLaw equilibrium_from_config(KeyValueFile& cfg);

/// Writes the resolved parameters back as `key = value` lines.
void write_config(std::ostream& out, const MaterialParams& mat);
void write_config(std::ostream& out, const GasParams& gas);
void write_config(std::ostream& out, const EquilibriumLaw& law);

} // namespace granflow
