#pragma once

#include "granflow/material.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace granflow {

/// Static solid column on [0, L] with n cells; gas pressure diffuses through it.
struct ColumnState
{
  std::vector<double> z;    ///< cell centres [m]
  std::vector<double> phi;  ///< volume fraction per cell, constant in time
  std::vector<double> p_f;  ///< pore pressure per cell [Pa]
  double dz = 0.0;
  double t = 0.0;

  double length() const { return dz * static_cast<double>(z.size()); }
};

ColumnState make_column(double length, std::size_t cells, const std::function<double(double z)>& phi,
                        const std::function<double(double z)>& p_f);

enum class ColumnScheme { Explicit, Implicit };

std::string_view to_string(ColumnScheme s);
ColumnScheme parse_column_scheme(std::string_view name);

/// Face permeabilities (harmonic mean of the neighbouring cells); n - 1 entries.
std::vector<double> face_permeability(const ColumnState& s, const GasParams& gas, double d);

/// Largest explicit step: 0.8 min_i dz^2 (1 - phi_i) / (p_atm (kappa_{i-1/2} + kappa_{i+1/2})).
double column_dt_limit(const ColumnState& s, const GasParams& gas, double d);

/**
 * One step of (1 - phi) d_t p_f = p_atm d_z (kappa d_z p_f) with zero flux at
 * both ends. Explicit (forward Euler) throws DomainError when dt exceeds
 * column_dt_limit; implicit (backward Euler) solves a tridiagonal system.
 */
ColumnState step_column(const ColumnState& s, const GasParams& gas, const MaterialParams& mat, double dt,
                        ColumnScheme scheme = ColumnScheme::Explicit);

/// sum (1 - phi) p_f dz.
double gas_content(const ColumnState& s);

/// E1 = sum (1 - phi) H(p_f) dz with the ideal-gas H.
double column_energy(const ColumnState& s, const GasParams& gas);

/// sum over faces of kappa |d_z p_f|^2 dz.
double column_dissipation(const ColumnState& s, const GasParams& gas, double d);

/// Exact rate of decrease of E1 under the discrete linear equation:
/// sum over faces of p_atm kappa (d_z p_f) (d_z ln(1 + p_f / p_atm)) dz.
double column_dissipation_effective(const ColumnState& s, const GasParams& gas, double d);

/// Projection of p_f - mean onto cos(pi z / L).
double cosine_mode_amplitude(const ColumnState& s);

struct EnergyLedger
{
  std::vector<double> t;
  std::vector<double> energy;
  std::vector<double> dissipation;            ///< integral of kappa |grad p_f|^2
  std::vector<double> dissipation_effective;  ///< exact discrete energy decay rate
  std::vector<double> residual;               ///< per interval: dE/dt + D_eff(start), length n - 1
  double max_abs_residual = 0.0;
  double cumulative_residual = 0.0;           ///< sum residual dt
  std::size_t increases = 0;                  ///< intervals where E1 went up
  bool non_increasing() const { return increases == 0; }
};

EnergyLedger energy_ledger(std::span<const ColumnState> history, const GasParams& gas, double d);

/// Rows `t,z,pf`, one per cell and snapshot.
void write_column_csv(std::ostream& out, std::span<const ColumnState> history);

} // namespace granflow
