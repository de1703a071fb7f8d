#pragma once

#include "granflow/material.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace granflow {

/// Yield function Z(phi, I): tau = Z p S / |S|.
using YieldFn = std::function<double(double phi, double I)>;
/// Dilatancy function f(phi, p, I): div u = 2 |S| f.
using DilatancyFn = std::function<double(double phi, double p, double I)>;

class ModelSpec;

namespace model {

struct DruckerPrager
{
  double delta;
};

struct MuI
{
  double mu1;
  double mu2;
  double I0;
};

/// Z = coefficient * I^n. n = -1 is excluded (the integral of Z becomes a log).
struct PowerLaw
{
  double n;
  double coefficient = 1.0;
};

/// Small-angle Drucker-Prager with dilatancy angle: Z = sin d + cos d psi, f = psi.
struct DPDilatancy
{
  double delta;
};

/// mu(I) with dilatancy angle: Z = mu(I) + psi, f = psi.
struct MuIDilatancy
{
  double mu1;
  double mu2;
  double I0;
};

/// Critical-state closure f = a (phi - phi_eq(I)), paired with the naive
/// small-angle yield Z = sin d + cos d a (phi - phi_eq(I)).
struct RouxRadjai
{
  double a;
  double delta;
};

struct DeriveCache;

/// f obtained from an arbitrary Z by quadrature (see derive_f_numeric).
/// Evaluations are memoized in a shared, internally locked cache.
struct DerivedNumeric
{
  YieldFn Z;
  double I1;
  std::string label;
  std::shared_ptr<DeriveCache> cache;
};

/// Caller-supplied pair; used for negative controls and tabulated laws.
struct Explicit
{
  YieldFn Z;
  DilatancyFn f;
  std::string label;
};

struct Term
{
  std::function<double(double phi)> weight;
  std::shared_ptr<const ModelSpec> model;
};

/// sum_i w_i(phi) (Z_i, f_i). Weights may depend on phi only.
struct LinearCombination
{
  std::vector<Term> terms;
};

using Variant = std::variant<DruckerPrager,
                             MuI,
                             PowerLaw,
                             LinearCombination,
                             DPDilatancy,
                             MuIDilatancy,
                             RouxRadjai,
                             DerivedNumeric,
                             Explicit>;

} // namespace model

/**
 * A named (Z, f) pair together with the material and equilibrium law that fix
 * I_eq(phi). Immutable once built.
 */
class ModelSpec
{
public:
  ModelSpec(model::Variant variant, MaterialParams mat, EquilibriumLaw law = {}, std::string id = {});

  static ModelSpec drucker_prager(const MaterialParams& mat, EquilibriumLaw law = {});
  static ModelSpec mu_i(const MaterialParams& mat, EquilibriumLaw law = {});
  static ModelSpec power_law(double n, const MaterialParams& mat, EquilibriumLaw law = {}, double coefficient = 1.0);
  static ModelSpec dp_dilatancy(const MaterialParams& mat, EquilibriumLaw law = {});
  static ModelSpec mu_i_dilatancy(const MaterialParams& mat, EquilibriumLaw law = {});
  /// Gain taken from `a`, else mat.a_rr; ConfigError when neither is set.
  static ModelSpec roux_radjai(const MaterialParams& mat, EquilibriumLaw law = {}, std::optional<double> a = {});
  static ModelSpec derived(YieldFn Z, const MaterialParams& mat, EquilibriumLaw law = {},
                           std::optional<double> I1 = {}, std::string label = "derived");
  static ModelSpec explicit_pair(YieldFn Z, DilatancyFn f, const MaterialParams& mat, EquilibriumLaw law = {},
                                 std::string label = "explicit");
  static ModelSpec combination(std::vector<model::Term> terms, const MaterialParams& mat, EquilibriumLaw law = {});

  /// Same dilatancy function, yield function taken from `z_source`.
  ModelSpec with_yield_from(const ModelSpec& z_source) const;

  const model::Variant& variant() const noexcept { return variant_; }
  const MaterialParams& material() const noexcept { return mat_; }
  const EquilibriumLaw& eq_law() const noexcept { return law_; }
  const std::string& id() const noexcept { return id_; }
  const ModelSpec* yield_override() const noexcept { return yield_override_.get(); }

  double i_eq(double phi) const;
  double phi_eq(double I) const;

private:
  model::Variant variant_;
  MaterialParams mat_;
  EquilibriumLaw law_;
  std::string id_;
  std::shared_ptr<const ModelSpec> yield_override_;
};

// -- scalar building blocks -------------------------------------------------

/// mu(I) = mu1 + (mu2 - mu1) / (1 + I0 / I); equals mu1 at I = 0.
double mu_of_I(double mu1, double mu2, double I0, double I);
double mu_prime(double mu1, double mu2, double I0, double I);

/// F(I) = 3 M(I) / (2 I) - mu(I) / 2 with M the primitive of mu vanishing at 0.
double F_of_I(double mu1, double mu2, double I0, double I);
double F_prime(double mu1, double mu2, double I0, double I);

/// G(I) = (2 mu1 / 3) ln(I / I0) + ((mu2 - mu1) / 3) (1 / (1 + I/I0) + 2 ln(1 + I/I0)).
double G_of_I(double mu1, double mu2, double I0, double I);
double G_prime(double mu1, double mu2, double I0, double I);

/// beta = 2 (1 - cos d) / (2 + cos d).
double dp_dilatancy_exponent(double delta);

/// psi = sin d / (1 - cos d) (1 - (I_eq / I)^beta); vanishes at I = I_eq.
double psi_dp(double delta, double I_eq, double I);

/// psi = G(I) - G(I_eq); needs I_eq > 0.
double psi_mui(double mu1, double mu2, double I0, double I_eq, double I);

/// Coefficient (2 - n) / (2 (n + 1)) of the power-law dilatancy function.
double power_law_f_coefficient(double n);

// -- model-level evaluation --------------------------------------------------

double yield_Z(const ModelSpec& model, double phi, double I);
double dilatancy_f(const ModelSpec& model, double phi, double p, double I);

/// Relative tolerance used by derive_f_numeric's quadratures.
inline constexpr double kDeriveQuadratureTol = 1e-13;

/**
 * Dilatancy function forced by the first stability condition and the
 * equilibrium anchor:
 *
 *   W(phi, I) = 3 / (2 I) integral_{I1}^{I} Z(phi, J) dJ - Z(phi, I) / 2
 *   f = W(phi, I) - I_eq W(phi, I_eq) / I
 *
 * The result does not depend on I1 (up to quadrature error).
 */
double derive_f_numeric(const YieldFn& Z, const EquilibriumLaw& law, const MaterialParams& mat,
                        double phi, double p, double I, double I1);

/// First-order gain a such that f ~ a (phi - phi_eq(I)) near equilibrium.
double roux_radjai_gain(const ModelSpec& model, double I);

struct DilatancyEval
{
  double f_value = 0.0;
  double div_u = 0.0;
  std::optional<double> psi;
};

DilatancyEval evaluate_dilatancy(const ModelSpec& model, const FlowState& state);

/// div u = 2 |S| f(phi, p, I); zero when |S| = 0.
double div_u(const ModelSpec& model, const FlowState& state);

/// Shear/pressure split for the models with f = A(I) - I_eq A(I_eq) / I
/// (Drucker-Prager, mu(I), power laws):
///
///   div u = 2 A(I) |S| - 2 I_eq A(I_eq) sqrt(p) / (d sqrt(rho_s))
///
/// Throws std::invalid_argument for the other variants.
double div_u_pressure_form(const ModelSpec& model, const FlowState& state);

/// Catalogue ids: dp, mui, dp-psi, mui-psi, power:<n>, roux-radjai,
/// dp-incompressible, derived:<id>.
ModelSpec model_from_id(std::string_view id, const MaterialParams& mat, const EquilibriumLaw& law = {});

} // namespace granflow
