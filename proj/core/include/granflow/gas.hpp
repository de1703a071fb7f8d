#pragma once

#include "granflow/material.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace granflow {

/// Interphase drag coefficient beta(phi) = 150 eta_f phi^2 / (d^2 (1 - phi)).
double drag_beta(const GasParams& gas, double d, double phi);

/// Carman-Kozeny permeability kappa(phi) = d^2 (1 - phi)^3 / (150 eta_f phi^2) = (1 - phi)^2 / beta.
double permeability_kappa(const GasParams& gas, double d, double phi);

/// Pressure-density law p_f = Q(rho_f) of the interstitial gas.
///
/// The ideal gas uses rho_f = rho_f0 (1 + p_f / p_atm), i.e. Q(rho) = p_atm (rho / rho_f0 - 1).
/// Custom laws supply Q and Q' on a density interval and must be monotone there
/// for density() to be defined.
class StateLaw
{
public:
  struct IdealGas
  {
    GasParams gas;
  };

  struct Custom
  {
    std::function<double(double)> Q;
    std::function<double(double)> Q_prime;
    double rho_lo = 0.0;
    double rho_hi = 0.0;
    std::string label;
  };

  static StateLaw ideal(const GasParams& gas);
  static StateLaw custom(Custom law);

  /// Monotone-cubic (PCHIP) interpolation of tabulated (rho, Q) pairs.
  static StateLaw tabulated(std::vector<double> rho, std::vector<double> q, std::string label = "tabulated");

  /// Two-column CSV with header `rho,Q`.
  static StateLaw from_csv(const std::filesystem::path& path);

  double pressure(double rho) const;
  double pressure_derivative(double rho) const;
  double density(double p_f) const;

  /// Admissible density interval (the ideal gas allows (0, inf)).
  double rho_lo() const;
  double rho_hi() const;

  bool is_ideal() const { return std::holds_alternative<IdealGas>(law_); }
  std::string label() const;

private:
  explicit StateLaw(std::variant<IdealGas, Custom> law) : law_(std::move(law)) {}

  std::variant<IdealGas, Custom> law_;
};

/// p_f = Q(rho_f). Throws DomainError outside the law's density interval.
double pf_from_rho(const StateLaw& law, double rho);
/// Inverse of pf_from_rho.
double rho_from_pf(const StateLaw& law, double p_f);

/**
 * Energy density H(rho_f) solving x H'(x) - H(x) = Q(x):
 *
 *   H(x) = x * integral_{c1}^{x} Q(z) / z^2 dz + c2
 *
 * Evaluation at an arbitrary density re-runs the quadrature; the values at the
 * construction grid are kept and can be interpolated monotonically.
 */
class EnthalpyH
{
public:
  EnthalpyH(StateLaw law, double c1, double c2, std::vector<double> grid, std::vector<double> values);

  double operator()(double x) const;
  double interpolate(double x) const;

  double c1() const noexcept { return c1_; }
  double c2() const noexcept { return c2_; }
  std::span<const double> grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }

private:
  std::shared_ptr<const StateLaw> law_;
  double c1_;
  double c2_;
  std::vector<double> grid_;
  std::vector<double> values_;
  std::shared_ptr<const std::function<double(double)>> interpolant_;
};

/// Relative tolerance of the enthalpy quadrature.
inline constexpr double kEnthalpyQuadratureTol = 1e-13;

EnthalpyH enthalpy_from_statelaw(const StateLaw& law, double c1, std::span<const double> x_grid, double c2 = 0.0);

/// Closed form for the ideal gas: (p_atm + p_f) [ln(1 + p_f / p_atm) - 1].
double enthalpy_ideal(const GasParams& gas, double p_f);

/// Gas velocity from Darcy's law: u_f = u - (1 - phi) grad p_f / beta(phi).
std::vector<double> darcy_fluid_velocity(std::span<const double> u,
                                         std::span<const double> grad_pf,
                                         double phi,
                                         const GasParams& gas,
                                         double d);

} // namespace granflow
