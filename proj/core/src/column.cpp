#include "granflow/column.hpp"

#include "granflow/errors.hpp"
#include "granflow/format.hpp"
#include "granflow/gas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

namespace granflow {

ColumnState make_column(double length, std::size_t cells, const std::function<double(double z)>& phi,
                        const std::function<double(double z)>& p_f)
{
  if (!(length > 0.0) || cells < 2) {
    throw DomainError("column needs a positive length and at least 2 cells");
  }
  ColumnState s;
  s.dz = length / static_cast<double>(cells);
  s.z.resize(cells);
  s.phi.resize(cells);
  s.p_f.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    s.z[i] = (static_cast<double>(i) + 0.5) * s.dz;
    s.phi[i] = phi(s.z[i]);
    s.p_f[i] = p_f(s.z[i]);
    if (!(s.phi[i] > 0.0 && s.phi[i] < 1.0)) {
      throw DomainError("column volume fraction must lie in (0, 1)");
    }
  }
  return s;
}

std::string_view to_string(ColumnScheme s)
{
  return s == ColumnScheme::Explicit ? "explicit" : "implicit";
}

ColumnScheme parse_column_scheme(std::string_view name)
{
  if (name == "explicit") return ColumnScheme::Explicit;
  if (name == "implicit") return ColumnScheme::Implicit;
  throw ConfigError("unknown time scheme '" + std::string(name) + "' (explicit|implicit)");
}

std::vector<double> face_permeability(const ColumnState& s, const GasParams& gas, double d)
{
  const std::size_t n = s.p_f.size();
  std::vector<double> cell(n);
  for (std::size_t i = 0; i < n; ++i) {
    cell[i] = permeability_kappa(gas, d, s.phi[i]);
  }
  std::vector<double> face(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    face[i] = 2.0 * cell[i] * cell[i + 1] / (cell[i] + cell[i + 1]);
  }
  return face;
}

double column_dt_limit(const ColumnState& s, const GasParams& gas, double d)
{
  const auto face = face_permeability(s, gas, d);
  const std::size_t n = s.p_f.size();
  double limit = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double k_left = i > 0 ? face[i - 1] : 0.0;
    const double k_right = i + 1 < n ? face[i] : 0.0;
    const double k_sum = k_left + k_right;
    if (k_sum > 0.0) {
      limit = std::min(limit, s.dz * s.dz * (1.0 - s.phi[i]) / (gas.p_atm * k_sum));
    }
  }
  return 0.8 * limit;
}

ColumnState step_column(const ColumnState& s, const GasParams& gas, const MaterialParams& mat, double dt,
                        ColumnScheme scheme)
{
  if (!(dt > 0.0)) {
    throw DomainError("time step must be positive");
  }
  const std::size_t n = s.p_f.size();
  const auto face = face_permeability(s, gas, mat.d);
  const double r = dt * gas.p_atm / (s.dz * s.dz);
  ColumnState out = s;
  out.t = s.t + dt;

  if (scheme == ColumnScheme::Explicit) {
    const double limit = column_dt_limit(s, gas, mat.d);
    if (dt > limit) {
      throw DomainError("explicit column step dt = " + format_double(dt) + " exceeds the stability limit " +
                        format_double(limit) + "; reduce dt or use the implicit scheme");
    }
    std::vector<double> flux(n + 1, 0.0);  // flux[i] across the face left of cell i
    for (std::size_t i = 1; i < n; ++i) {
      flux[i] = face[i - 1] * (s.p_f[i] - s.p_f[i - 1]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.p_f[i] = s.p_f[i] + r * (flux[i + 1] - flux[i]) / (1.0 - s.phi[i]);
    }
    return out;
  }

  // Thomas algorithm for a_i x_{i-1} + b_i x_i + c_i x_{i+1} = rhs_i
  std::vector<double> c_prime(n, 0.0);
  std::vector<double> d_prime(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double k_left = i > 0 ? face[i - 1] : 0.0;
    const double k_right = i + 1 < n ? face[i] : 0.0;
    const double a = -r * k_left;
    const double b = (1.0 - s.phi[i]) + r * (k_left + k_right);
    const double c = -r * k_right;
    const double rhs = (1.0 - s.phi[i]) * s.p_f[i];
    const double denom = i > 0 ? b - a * c_prime[i - 1] : b;
    c_prime[i] = c / denom;
    d_prime[i] = (i > 0 ? rhs - a * d_prime[i - 1] : rhs) / denom;
  }
  out.p_f[n - 1] = d_prime[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    out.p_f[i] = d_prime[i] - c_prime[i] * out.p_f[i + 1];
  }
  return out;
}

double gas_content(const ColumnState& s)
{
  double total = 0.0;
  for (std::size_t i = 0; i < s.p_f.size(); ++i) {
    total += (1.0 - s.phi[i]) * s.p_f[i];
  }
  return total * s.dz;
}

double column_energy(const ColumnState& s, const GasParams& gas)
{
  double total = 0.0;
  for (std::size_t i = 0; i < s.p_f.size(); ++i) {
    total += (1.0 - s.phi[i]) * enthalpy_ideal(gas, s.p_f[i]);
  }
  return total * s.dz;
}

double column_dissipation(const ColumnState& s, const GasParams& gas, double d)
{
  const auto face = face_permeability(s, gas, d);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < s.p_f.size(); ++i) {
    const double g = (s.p_f[i + 1] - s.p_f[i]) / s.dz;
    total += face[i] * g * g;
  }
  return total * s.dz;
}

double column_dissipation_effective(const ColumnState& s, const GasParams& gas, double d)
{
  const auto face = face_permeability(s, gas, d);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < s.p_f.size(); ++i) {
    const double g = (s.p_f[i + 1] - s.p_f[i]) / s.dz;
    const double h = (std::log1p(s.p_f[i + 1] / gas.p_atm) - std::log1p(s.p_f[i] / gas.p_atm)) / s.dz;
    total += gas.p_atm * face[i] * g * h;
  }
  return total * s.dz;
}

double cosine_mode_amplitude(const ColumnState& s)
{
  const std::size_t n = s.p_f.size();
  double mean = 0.0;
  for (const double p : s.p_f) mean += p;
  mean /= static_cast<double>(n);
  const double L = s.length();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(std::numbers::pi * s.z[i] / L);
    num += (s.p_f[i] - mean) * c;
    den += c * c;
  }
  return num / den;
}

EnergyLedger energy_ledger(std::span<const ColumnState> history, const GasParams& gas, double d)
{
  EnergyLedger ledger;
  for (const auto& s : history) {
    ledger.t.push_back(s.t);
    ledger.energy.push_back(column_energy(s, gas));
    ledger.dissipation.push_back(column_dissipation(s, gas, d));
    ledger.dissipation_effective.push_back(column_dissipation_effective(s, gas, d));
  }
  for (std::size_t k = 0; k + 1 < history.size(); ++k) {
    const double dt = ledger.t[k + 1] - ledger.t[k];
    if (!(dt > 0.0)) {
      throw DomainError("column history must be strictly increasing in time");
    }
    const double dE = ledger.energy[k + 1] - ledger.energy[k];
    const double res = dE / dt + ledger.dissipation_effective[k];
    ledger.residual.push_back(res);
    ledger.max_abs_residual = std::max(ledger.max_abs_residual, std::abs(res));
    ledger.cumulative_residual += res * dt;
    if (dE > 0.0) ++ledger.increases;
  }
  return ledger;
}

void write_column_csv(std::ostream& out, std::span<const ColumnState> history)
{
  out << "t,z,pf\n";
  for (const auto& s : history) {
    const std::string t = format_double(s.t);
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      out << t << ',' << format_double(s.z[i]) << ',' << format_double(s.p_f[i]) << '\n';
    }
  }
}

} // namespace granflow
