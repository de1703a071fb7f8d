#include "granflow/gas.hpp"

#include "granflow/config_file.hpp"
#include "granflow/errors.hpp"
#include "granflow/format.hpp"
#include "quadrature.hpp"

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace granflow {

double drag_beta(const GasParams& gas, double d, double phi)
{
  if (!(phi >= 0.0 && phi < 1.0)) {
    throw DomainError("drag coefficient needs 0 <= phi < 1 (phi = " + format_double(phi) + ")");
  }
  return 150.0 * gas.eta_f * phi * phi / (d * d * (1.0 - phi));
}

double permeability_kappa(const GasParams& gas, double d, double phi)
{
  if (!(phi > 0.0 && phi < 1.0)) {
    throw DomainError("permeability needs 0 < phi < 1 (phi = " + format_double(phi) + ")");
  }
  const double porosity = 1.0 - phi;
  return d * d * porosity * porosity * porosity / (150.0 * gas.eta_f * phi * phi);
}

StateLaw StateLaw::ideal(const GasParams& gas)
{
  gas.validate();
  return StateLaw(IdealGas{gas});
}

StateLaw StateLaw::custom(Custom law)
{
  if (!law.Q || !law.Q_prime) {
    throw ConfigError("custom state law needs both Q and Q'");
  }
  if (!(law.rho_lo > 0.0 && law.rho_lo < law.rho_hi)) {
    throw ConfigError("custom state law needs a density interval 0 < rho_lo < rho_hi");
  }
  return StateLaw(std::move(law));
}

StateLaw StateLaw::tabulated(std::vector<double> rho, std::vector<double> q, std::string label)
{
  if (rho.size() != q.size()) {
    throw ConfigError("tabulated state law: rho and Q columns differ in length");
  }
  if (rho.size() < 4) {
    throw ConfigError("tabulated state law needs at least 4 samples for monotone cubic interpolation");
  }
  if (!std::is_sorted(rho.begin(), rho.end()) ||
      std::adjacent_find(rho.begin(), rho.end()) != rho.end()) {
    throw ConfigError("tabulated state law: rho must be strictly increasing");
  }
  if (!(rho.front() > 0.0)) {
    throw ConfigError("tabulated state law: densities must be positive");
  }
  const double lo = rho.front();
  const double hi = rho.back();
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  auto spline = std::make_shared<const Pchip>(std::move(rho), std::move(q));
  Custom law;
  law.Q = [spline](double x) { return (*spline)(x); };
  law.Q_prime = [spline](double x) { return spline->prime(x); };
  law.rho_lo = lo;
  law.rho_hi = hi;
  law.label = std::move(label);
  return custom(std::move(law));
}

StateLaw StateLaw::from_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open state-law table '" + path.string() + "'");
  }
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) {
    throw ConfigError(path.string() + ": empty state-law table");
  }
  line.erase(std::remove_if(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\r'; }),
             line.end());
  if (line != "rho,Q") {
    throw ConfigError(path.string() + ": expected header 'rho,Q'", line_no);
  }
  std::vector<double> rho;
  std::vector<double> q;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError(path.string() + ": expected two comma-separated columns", line_no);
    }
    rho.push_back(parse_double(line.substr(0, comma), line_no));
    q.push_back(parse_double(line.substr(comma + 1), line_no));
  }
  return tabulated(std::move(rho), std::move(q), path.filename().string());
}

double StateLaw::rho_lo() const
{
  if (const auto* c = std::get_if<Custom>(&law_)) {
    return c->rho_lo;
  }
  return 0.0;
}

double StateLaw::rho_hi() const
{
  if (const auto* c = std::get_if<Custom>(&law_)) {
    return c->rho_hi;
  }
  return std::numeric_limits<double>::infinity();
}

std::string StateLaw::label() const
{
  if (const auto* c = std::get_if<Custom>(&law_)) {
    return c->label;
  }
  return "ideal";
}

double StateLaw::pressure(double rho) const
{
  if (const auto* ideal = std::get_if<IdealGas>(&law_)) {
    if (!(rho > 0.0)) {
      throw DomainError("gas density must be positive");
    }
    return ideal->gas.p_atm * (rho / ideal->gas.rho_f0 - 1.0);
  }
  const auto& c = std::get<Custom>(law_);
  if (!(rho >= c.rho_lo && rho <= c.rho_hi)) {
    throw DomainError("density " + format_double(rho) + " outside the state law's range [" +
                      format_double(c.rho_lo) + ", " + format_double(c.rho_hi) + "]");
  }
  return c.Q(rho);
}

double StateLaw::pressure_derivative(double rho) const
{
  if (const auto* ideal = std::get_if<IdealGas>(&law_)) {
    if (!(rho > 0.0)) {
      throw DomainError("gas density must be positive");
    }
    return ideal->gas.p_atm / ideal->gas.rho_f0;
  }
  const auto& c = std::get<Custom>(law_);
  if (!(rho >= c.rho_lo && rho <= c.rho_hi)) {
    throw DomainError("density outside the state law's range");
  }
  return c.Q_prime(rho);
}

double StateLaw::density(double p_f) const
{
  if (const auto* ideal = std::get_if<IdealGas>(&law_)) {
    if (!(p_f > -ideal->gas.p_atm)) {
      throw DomainError("ideal gas needs p_f > -p_atm");
    }
    return ideal->gas.rho_f0 * (1.0 + p_f / ideal->gas.p_atm);
  }
  const auto& c = std::get<Custom>(law_);
  const auto residual = [&](double rho) { return c.Q(rho) - p_f; };
  const double r_lo = residual(c.rho_lo);
  const double r_hi = residual(c.rho_hi);
  if (r_lo == 0.0) return c.rho_lo;
  if (r_hi == 0.0) return c.rho_hi;
  if (r_lo * r_hi > 0.0) {
    throw DomainError("pressure " + format_double(p_f) + " not attained by the state law on its range");
  }
  const auto tol = [](double a, double b) { return b - a <= 1e-15 * std::max(1.0, std::abs(b)); };
  const auto [a, b] = boost::math::tools::bisect(residual, c.rho_lo, c.rho_hi, tol);
  return 0.5 * (a + b);
}

double pf_from_rho(const StateLaw& law, double rho) { return law.pressure(rho); }

double rho_from_pf(const StateLaw& law, double p_f) { return law.density(p_f); }

namespace {

double enthalpy_at(const StateLaw& law, double c1, double c2, double x)
{
  if (!(x > 0.0)) {
    throw DomainError("enthalpy needs a positive density");
  }
  const auto integrand = [&](double z) { return law.pressure(z) / (z * z); };
  return x * detail::integrate(integrand, c1, x, kEnthalpyQuadratureTol) + c2;
}

} // namespace

EnthalpyH::EnthalpyH(StateLaw law, double c1, double c2, std::vector<double> grid, std::vector<double> values)
  : law_(std::make_shared<const StateLaw>(std::move(law)))
  , c1_(c1)
  , c2_(c2)
  , grid_(std::move(grid))
  , values_(std::move(values))
{
  const bool increasing = std::is_sorted(grid_.begin(), grid_.end()) &&
                          std::adjacent_find(grid_.begin(), grid_.end()) == grid_.end();
  if (increasing && grid_.size() >= 4) {
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
    auto spline = std::make_shared<const Pchip>(std::vector<double>(grid_), std::vector<double>(values_));
    interpolant_ = std::make_shared<const std::function<double(double)>>(
      [spline](double x) { return (*spline)(x); });
  }
}

double EnthalpyH::operator()(double x) const { return enthalpy_at(*law_, c1_, c2_, x); }

double EnthalpyH::interpolate(double x) const
{
  if (!interpolant_) {
    throw DomainError("enthalpy interpolation needs at least 4 strictly increasing grid points");
  }
  if (x < grid_.front() || x > grid_.back()) {
    throw DomainError("enthalpy interpolation outside the sampled grid");
  }
  return (*interpolant_)(x);
}

EnthalpyH enthalpy_from_statelaw(const StateLaw& law, double c1, std::span<const double> x_grid, double c2)
{
  if (!(c1 > 0.0)) {
    throw DomainError("enthalpy integration anchor c1 must be positive");
  }
  std::vector<double> grid(x_grid.begin(), x_grid.end());
  std::vector<double> values;
  values.reserve(grid.size());
  const bool increasing = !grid.empty() && grid.front() > 0.0 &&
                          std::adjacent_find(grid.begin(), grid.end(), std::greater_equal<>{}) == grid.end();
  if (!increasing) {
    for (const double x : grid) {
      values.push_back(enthalpy_at(law, c1, c2, x));
    }
    return EnthalpyH(law, c1, c2, std::move(grid), std::move(values));
  }
  // Cumulative along the grid: the segment integrals do not depend on c1, so
  // a change of gauge shifts every value by exactly the same x * constant.
  const auto integrand = [&](double z) { return law.pressure(z) / (z * z); };
  double primitive = detail::integrate(integrand, c1, grid.front(), kEnthalpyQuadratureTol);
  values.push_back(grid.front() * primitive + c2);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    primitive += detail::integrate(integrand, grid[i - 1], grid[i], kEnthalpyQuadratureTol);
    values.push_back(grid[i] * primitive + c2);
  }
  return EnthalpyH(law, c1, c2, std::move(grid), std::move(values));
}

double enthalpy_ideal(const GasParams& gas, double p_f)
{
  if (!(p_f > -gas.p_atm)) {
    throw DomainError("ideal-gas enthalpy needs p_f > -p_atm");
  }
  return (gas.p_atm + p_f) * (std::log1p(p_f / gas.p_atm) - 1.0);
}

std::vector<double> darcy_fluid_velocity(std::span<const double> u,
                                         std::span<const double> grad_pf,
                                         double phi,
                                         const GasParams& gas,
                                         double d)
{
  if (u.size() != grad_pf.size()) {
    throw DomainError("velocity and pressure gradient dimensions differ");
  }
  if (!(phi > 0.0)) {
    throw DomainError("Darcy closure needs phi > 0 (beta vanishes)");
  }
  const double mobility = (1.0 - phi) / drag_beta(gas, d, phi);
  std::vector<double> u_f(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u_f[i] = u[i] - mobility * grad_pf[i];
  }
  return u_f;
}

} // namespace granflow
