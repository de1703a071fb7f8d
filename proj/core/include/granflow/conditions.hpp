#pragma once

#include "granflow/constitutive.hpp"
#include "granflow/material.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace granflow {

struct GridAxis
{
  double lo = 0.0;
  double hi = 0.0;
  int count = 2;
  bool log = false;

  std::vector<double> values() const;
};

/// Tensor grid over (phi, I, p).
struct GridSpec
{
  GridAxis phi{0.40, 0.595, 10, false};
  GridAxis I{1e-2, 10.0, 10, true};
  GridAxis p{10.0, 1e4, 4, true};

  /// "phi=lo:hi:n,I=lo:hi:n:log,p=lo:hi:n". Axes left out keep their defaults.
  static GridSpec parse(std::string_view text);
  std::string to_string() const;

  /// Throws ConfigError: lo < hi, count >= 2, I and p strictly positive.
  void validate() const;

  std::size_t size() const;
};

enum class Condition { Dissipation, C1, C2, C3, Equilibrium };

inline constexpr std::array<Condition, 5> kAllConditions{
  Condition::Dissipation, Condition::C1, Condition::C2, Condition::C3, Condition::Equilibrium};

std::string_view to_string(Condition c);

inline constexpr double kC1Tolerance = 1e-5;
inline constexpr double kC2Tolerance = -1e-10;
inline constexpr double kC3Tolerance = -1e-14;
inline constexpr double kDissipationTolerance = -1e-12;
/// |f(phi, p, I_eq(phi))| allowed by the equilibrium check.
inline constexpr double kEquilibriumAnchorTolerance = 1e-9;

struct CheckValue
{
  double value = 0.0;
  bool pass = false;
};

/// (Z - I Z_I / 2) - (f + I f_I), central differences with h = 1e-6 max(I, 1e-3).
double residual_C1(const ModelSpec& model, double phi, double p, double I);
/// Z + I Z_I, pass when >= kC2Tolerance.
CheckValue check_C2(const ModelSpec& model, double phi, double I);
/// f_p - I f_I / (2 p), pass when < kC3Tolerance.
CheckValue check_C3(const ModelSpec& model, double phi, double p, double I);
/// Z - f, pass when >= kDissipationTolerance.
CheckValue check_dissipation(const ModelSpec& model, double phi, double p, double I);

struct EquilibriumCheck
{
  bool pass = false;
  double f_at_eq = 0.0;               ///< f(phi, p, I_eq); zero when I_eq = 0 (not evaluable)
  double f_above = 0.0;               ///< f at 2 I_eq (or at I = 1 when I_eq = 0)
  std::optional<double> f_below;      ///< f at I_eq / 2, absent when I_eq = 0
};

/// f vanishes at I_eq, is positive above and negative below. At phi = phi_max
/// only positivity for I > 0 is checked.
EquilibriumCheck check_equilibrium_signs(const ModelSpec& model, double phi, double p);

/// kappa |grad p_f|^2 + 2 (Z - f) p |S|.
double dissipation_density(const ModelSpec& model, const FlowState& state, const GasParams& gas,
                           std::span<const double> grad_pf);

/// Drucker-Prager closed form 2 lambda sin d (phi_max - phi) p sqrt(p) + kappa |grad p_f|^2,
/// lambda = 1 / (delta_phi d sqrt(rho_s)). Linear equilibrium law only.
double dissipation_density_dp(const MaterialParams& mat, const FlowState& state, const GasParams& gas,
                              std::span<const double> grad_pf);

/// Split of 2 (Z - f) p |S| for the power law Z = I^n.
struct PowerLawDissipation
{
  double shear_coefficient;     ///< 3n / (2(n+1)), multiplies I^n p |S|
  double pressure_coefficient;  ///< (2-n) / (2(n+1)), multiplies I_eq^(n+1) p sqrt(p) / (d sqrt(rho_s))
  double shear_part;            ///< 2 shear_coefficient I^n p |S|
  double pressure_part;         ///< 2 pressure_coefficient I_eq^(n+1) p sqrt(p) / (d sqrt(rho_s))
  double total() const { return shear_part + pressure_part; }
};

PowerLawDissipation power_law_dissipation(double n, const MaterialParams& mat, const EquilibriumLaw& law,
                                          const FlowState& state);

struct PointRecord
{
  double phi = 0.0;
  double I = 0.0;
  double p = 0.0;
  bool skipped = false;
  std::string reason;
  double c1_residual = 0.0;
  double c2_value = 0.0;
  double c3_value = 0.0;
  double dissipation_gap = 0.0;
  bool eq_sign_ok = false;
  double eq_anchor = 0.0;

  bool passes(Condition c) const;
};

struct ConditionSummary
{
  bool enabled = true;
  std::size_t evaluated = 0;
  std::size_t failures = 0;
  std::optional<std::size_t> worst_index;
  double worst_value = 0.0;

  bool all_pass() const { return !enabled || failures == 0; }
};

class ConditionReport
{
public:
  std::string model_id;
  GridSpec grid;
  std::vector<PointRecord> points;
  std::array<ConditionSummary, kAllConditions.size()> summary{};

  const ConditionSummary& operator[](Condition c) const { return summary[static_cast<std::size_t>(c)]; }
  ConditionSummary& operator[](Condition c) { return summary[static_cast<std::size_t>(c)]; }

  bool all_pass(Condition c) const { return (*this)[c].all_pass(); }
  bool all_enabled_pass() const;
  std::size_t skipped() const;

  void write_csv(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

struct SweepOptions
{
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  std::array<bool, kAllConditions.size()> enabled{true, true, true, true, true};
};

/// Evaluates every enabled check at every grid point. Points where the model
/// raises DomainError or NumericalError are recorded as skipped, not fatal.
/// Point order is phi-major, then I, then p, independent of the thread count.
ConditionReport sweep(const ModelSpec& model, const GridSpec& grid, const SweepOptions& options = {});

} // namespace granflow
