#include "granflow/constitutive.hpp"

#include "granflow/config_file.hpp"
#include "granflow/errors.hpp"
#include "granflow/format.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace granflow {

namespace model {

struct DeriveCache
{
  std::mutex mutex;
  std::map<std::pair<double, double>, double> values;
};

} // namespace model

namespace {

constexpr std::size_t kDeriveCacheLimit = 1u << 16;

template <class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive_I(double I, const char* what)
{
  if (!(I > 0.0)) {
    throw DomainError(std::string(what) + " needs I > 0 (I = " + format_double(I) + ")");
  }
}

void require_delta(double delta)
{
  if (!(delta > 0.0 && delta < std::numbers::pi / 2)) {
    throw DomainError("friction angle must lie in (0, pi/2)");
  }
}

// 1 - cos d without cancellation for small angles.
double one_minus_cos(double delta)
{
  const double s = std::sin(0.5 * delta);
  return 2.0 * s * s;
}

} // namespace

// -- scalar building blocks -------------------------------------------------

double mu_of_I(double mu1, double mu2, double I0, double I)
{
  if (I < 0.0 || std::isnan(I)) {
    throw DomainError("mu(I) needs I >= 0");
  }
  return mu1 + (mu2 - mu1) * I / (I + I0);
}

double mu_prime(double mu1, double mu2, double I0, double I)
{
  if (I < 0.0 || std::isnan(I)) {
    throw DomainError("mu'(I) needs I >= 0");
  }
  return (mu2 - mu1) * I0 / ((I + I0) * (I + I0));
}

double F_of_I(double mu1, double mu2, double I0, double I)
{
  require_positive_I(I, "F(I)");
  const double x = I / I0;
  const double H = 1.0 / (1.0 + x) - 3.0 * std::log1p(x) / x;
  return mu2 + 0.5 * (mu2 - mu1) * H;
}

double F_prime(double mu1, double mu2, double I0, double I)
{
  require_positive_I(I, "F'(I)");
  // F = 3 M / (2 I) - mu / 2 differentiates to (mu - F) / I - mu' / 2
  return (mu_of_I(mu1, mu2, I0, I) - F_of_I(mu1, mu2, I0, I)) / I - 0.5 * mu_prime(mu1, mu2, I0, I);
}

double G_of_I(double mu1, double mu2, double I0, double I)
{
  require_positive_I(I, "G(I)");
  const double x = I / I0;
  return (2.0 * mu1 / 3.0) * std::log(x) + ((mu2 - mu1) / 3.0) * (1.0 / (1.0 + x) + 2.0 * std::log1p(x));
}

double G_prime(double mu1, double mu2, double I0, double I)
{
  require_positive_I(I, "G'(I)");
  const double x = I / I0;
  return 2.0 * mu1 / (3.0 * I) + (mu2 - mu1) / (3.0 * I0) * (1.0 + 2.0 * x) / ((1.0 + x) * (1.0 + x));
}

double dp_dilatancy_exponent(double delta)
{
  require_delta(delta);
  return 2.0 * one_minus_cos(delta) / (2.0 + std::cos(delta));
}

double psi_dp(double delta, double I_eq, double I)
{
  require_delta(delta);
  require_positive_I(I, "dilatancy angle");
  if (I_eq < 0.0) {
    throw DomainError("equilibrium inertial number must be non-negative");
  }
  const double beta = dp_dilatancy_exponent(delta);
  // 1 - r^beta = -expm1(beta ln r)
  const double gap = I_eq == 0.0 ? 1.0 : -std::expm1(beta * std::log(I_eq / I));
  return std::sin(delta) / one_minus_cos(delta) * gap;
}

double psi_mui(double mu1, double mu2, double I0, double I_eq, double I)
{
  require_positive_I(I, "mu(I) dilatancy angle");
  if (!(I_eq > 0.0)) {
    throw DomainError("mu(I) dilatancy angle is singular at I_eq = 0 (phi = phi_max)");
  }
  return G_of_I(mu1, mu2, I0, I) - G_of_I(mu1, mu2, I0, I_eq);
}

double power_law_f_coefficient(double n)
{
  if (n == -1.0) {
    throw DomainError("power-law yield with n = -1 is not supported");
  }
  return (2.0 - n) / (2.0 * (n + 1.0));
}

// -- ModelSpec --------------------------------------------------------------

ModelSpec::ModelSpec(model::Variant variant, MaterialParams mat, EquilibriumLaw law, std::string id)
  : variant_(std::move(variant))
  , mat_(std::move(mat))
  , law_(law)
  , id_(std::move(id))
{
  if (const auto* pl = std::get_if<model::PowerLaw>(&variant_)) {
    power_law_f_coefficient(pl->n);
  }
  if (auto* dn = std::get_if<model::DerivedNumeric>(&variant_)) {
    if (!dn->Z) throw ConfigError("derived model needs a yield function");
    if (!(dn->I1 > 0.0)) throw ConfigError("derived model needs a positive quadrature anchor I1");
    if (!dn->cache) dn->cache = std::make_shared<model::DeriveCache>();
  }
  if (const auto* ex = std::get_if<model::Explicit>(&variant_)) {
    if (!ex->Z || !ex->f) throw ConfigError("explicit model needs both Z and f");
  }
  if (const auto* lc = std::get_if<model::LinearCombination>(&variant_)) {
    for (const auto& term : lc->terms) {
      if (!term.weight || !term.model) throw ConfigError("linear combination term is incomplete");
    }
  }
}

ModelSpec ModelSpec::drucker_prager(const MaterialParams& mat, EquilibriumLaw law)
{
  return {model::DruckerPrager{mat.delta}, mat, law, "dp"};
}

ModelSpec ModelSpec::mu_i(const MaterialParams& mat, EquilibriumLaw law)
{
  return {model::MuI{mat.mu1, mat.mu2, mat.I0}, mat, law, "mui"};
}

ModelSpec ModelSpec::power_law(double n, const MaterialParams& mat, EquilibriumLaw law, double coefficient)
{
  return {model::PowerLaw{n, coefficient}, mat, law, "power:" + format_double(n)};
}

ModelSpec ModelSpec::dp_dilatancy(const MaterialParams& mat, EquilibriumLaw law)
{
  return {model::DPDilatancy{mat.delta}, mat, law, "dp-psi"};
}

ModelSpec ModelSpec::mu_i_dilatancy(const MaterialParams& mat, EquilibriumLaw law)
{
  return {model::MuIDilatancy{mat.mu1, mat.mu2, mat.I0}, mat, law, "mui-psi"};
}

ModelSpec ModelSpec::roux_radjai(const MaterialParams& mat, EquilibriumLaw law, std::optional<double> a)
{
  const auto gain = a ? a : mat.a_rr;
  if (!gain) {
    throw ConfigError("roux-radjai model needs the gain a_rr");
  }
  return {model::RouxRadjai{*gain, mat.delta}, mat, law, "roux-radjai"};
}

ModelSpec ModelSpec::derived(YieldFn Z, const MaterialParams& mat, EquilibriumLaw law,
                             std::optional<double> I1, std::string label)
{
  const double anchor = I1.value_or(mat.I0 / 100.0);
  std::string id = label;
  return {model::DerivedNumeric{std::move(Z), anchor, std::move(label), nullptr}, mat, law, std::move(id)};
}

ModelSpec ModelSpec::explicit_pair(YieldFn Z, DilatancyFn f, const MaterialParams& mat, EquilibriumLaw law,
                                   std::string label)
{
  std::string id = label;
  return {model::Explicit{std::move(Z), std::move(f), std::move(label)}, mat, law, std::move(id)};
}

ModelSpec ModelSpec::combination(std::vector<model::Term> terms, const MaterialParams& mat, EquilibriumLaw law)
{
  std::string id = "combination(";
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) id += ",";
    id += terms[i].model ? terms[i].model->id() : "?";
  }
  id += ")";
  return {model::LinearCombination{std::move(terms)}, mat, law, std::move(id)};
}

ModelSpec ModelSpec::with_yield_from(const ModelSpec& z_source) const
{
  ModelSpec out = *this;
  out.yield_override_ = std::make_shared<const ModelSpec>(z_source);
  out.id_ = id_ + "+Z:" + z_source.id();
  return out;
}

double ModelSpec::i_eq(double phi) const { return granflow::i_eq(law_, mat_, phi); }

double ModelSpec::phi_eq(double I) const { return granflow::phi_eq(law_, mat_, I); }

// -- evaluation -------------------------------------------------------------

double yield_Z(const ModelSpec& m, double phi, double I)
{
  if (const ModelSpec* z = m.yield_override()) {
    return yield_Z(*z, phi, I);
  }
  return std::visit(
    overloaded{
      [](const model::DruckerPrager& v) { return std::sin(v.delta); },
      [&](const model::MuI& v) { return mu_of_I(v.mu1, v.mu2, v.I0, I); },
      [&](const model::PowerLaw& v) {
        if (v.n < 0.0) require_positive_I(I, "negative power-law yield");
        if (I < 0.0) throw DomainError("yield function needs I >= 0");
        return v.coefficient * std::pow(I, v.n);
      },
      [&](const model::LinearCombination& v) {
        double z = 0.0;
        for (const auto& t : v.terms) z += t.weight(phi) * yield_Z(*t.model, phi, I);
        return z;
      },
      [&](const model::DPDilatancy& v) {
        return std::sin(v.delta) + std::cos(v.delta) * psi_dp(v.delta, m.i_eq(phi), I);
      },
      [&](const model::MuIDilatancy& v) {
        return mu_of_I(v.mu1, v.mu2, v.I0, I) + psi_mui(v.mu1, v.mu2, v.I0, m.i_eq(phi), I);
      },
      [&](const model::RouxRadjai& v) {
        return std::sin(v.delta) + std::cos(v.delta) * v.a * (phi - m.phi_eq(I));
      },
      [&](const model::DerivedNumeric& v) { return v.Z(phi, I); },
      [&](const model::Explicit& v) { return v.Z(phi, I); },
    },
    m.variant());
}

double derive_f_numeric(const YieldFn& Z, const EquilibriumLaw& law, const MaterialParams& mat,
                        double phi, double /*p*/, double I, double I1)
{
  require_positive_I(I, "derived dilatancy");
  if (!(I1 > 0.0)) {
    throw DomainError("quadrature anchor I1 must be positive");
  }
  const double I_eq = i_eq(law, mat, phi);
  const auto z_of = [&](double J) { return Z(phi, J); };
  // I * W(I) = 3/2 int_{I1}^{I} Z - I Z(I) / 2
  const auto IW = [&](double J) {
    return 1.5 * detail::integrate(z_of, I1, J, kDeriveQuadratureTol) - 0.5 * J * Z(phi, J);
  };
  const double anchor = I_eq > 0.0 ? IW(I_eq) : 1.5 * detail::integrate(z_of, I1, 0.0, kDeriveQuadratureTol);
  return (IW(I) - anchor) / I;
}

double dilatancy_f(const ModelSpec& m, double phi, double p, double I)
{
  require_positive_I(I, "dilatancy function");
  return std::visit(
    overloaded{
      [&](const model::DruckerPrager& v) { return std::sin(v.delta) * (1.0 - m.i_eq(phi) / I); },
      [&](const model::MuI& v) {
        const double I_eq = m.i_eq(phi);
        const double anchor = I_eq > 0.0 ? I_eq * F_of_I(v.mu1, v.mu2, v.I0, I_eq) : 0.0;
        return F_of_I(v.mu1, v.mu2, v.I0, I) - anchor / I;
      },
      [&](const model::PowerLaw& v) {
        const double I_eq = m.i_eq(phi);
        if (I_eq == 0.0 && v.n + 1.0 < 0.0) {
          throw DomainError("power law with n < -1 is singular at I_eq = 0");
        }
        const double anchor = I_eq > 0.0 ? std::pow(I_eq, v.n + 1.0) : 0.0;
        return v.coefficient * power_law_f_coefficient(v.n) * (std::pow(I, v.n) - anchor / I);
      },
      [&](const model::LinearCombination& v) {
        double f = 0.0;
        for (const auto& t : v.terms) f += t.weight(phi) * dilatancy_f(*t.model, phi, p, I);
        return f;
      },
      [&](const model::DPDilatancy& v) { return psi_dp(v.delta, m.i_eq(phi), I); },
      [&](const model::MuIDilatancy& v) { return psi_mui(v.mu1, v.mu2, v.I0, m.i_eq(phi), I); },
      [&](const model::RouxRadjai& v) { return v.a * (phi - m.phi_eq(I)); },
      [&](const model::DerivedNumeric& v) {
        const auto key = std::make_pair(phi, I);
        {
          std::lock_guard lock(v.cache->mutex);
          if (auto it = v.cache->values.find(key); it != v.cache->values.end()) {
            return it->second;
          }
        }
        const double f = derive_f_numeric(v.Z, m.eq_law(), m.material(), phi, p, I, v.I1);
        std::lock_guard lock(v.cache->mutex);
        if (v.cache->values.size() >= kDeriveCacheLimit) {
          v.cache->values.clear();
        }
        v.cache->values.emplace(key, f);
        return f;
      },
      [&](const model::Explicit& v) { return v.f(phi, p, I); },
    },
    m.variant());
}

namespace {

// Z - I dZ/dI / 2 evaluated at (phi, I); analytic for the closed forms.
double c1_left(const ModelSpec& m, double phi, double I)
{
  const ModelSpec& zm = m.yield_override() ? *m.yield_override() : m;
  if (const auto* v = std::get_if<model::DruckerPrager>(&zm.variant())) {
    return std::sin(v->delta);
  }
  if (const auto* v = std::get_if<model::MuI>(&zm.variant())) {
    return mu_of_I(v->mu1, v->mu2, v->I0, I) - 0.5 * I * mu_prime(v->mu1, v->mu2, v->I0, I);
  }
  if (const auto* v = std::get_if<model::PowerLaw>(&zm.variant())) {
    return v->coefficient * std::pow(I, v->n) * (1.0 - 0.5 * v->n);
  }
  const double h = 1e-6 * std::max(I, 1e-3);
  const double lo = std::max(I - h, 0.5 * I);
  const double dz = (yield_Z(zm, phi, I + h) - yield_Z(zm, phi, lo)) / (I + h - lo);
  return yield_Z(zm, phi, I) - 0.5 * I * dz;
}

} // namespace

double roux_radjai_gain(const ModelSpec& m, double I)
{
  require_positive_I(I, "near-equilibrium gain");
  const double slope = phi_eq_slope(m.eq_law(), m.material(), I);
  const double phi0 = m.phi_eq(I);
  return std::visit(
    overloaded{
      [&](const model::RouxRadjai& v) { return v.a; },
      [&](const model::DPDilatancy& v) {
        return 2.0 * std::sin(v.delta) / ((2.0 + std::cos(v.delta)) * slope * I);
      },
      [&](const model::MuIDilatancy& v) { return G_prime(v.mu1, v.mu2, v.I0, I) / slope; },
      [&](const model::Explicit&) {
        const double h = 1e-6;
        return (dilatancy_f(m, phi0 + h, 1.0, I) - dilatancy_f(m, phi0 - h, 1.0, I)) / (2.0 * h);
      },
      [&](const auto&) { return c1_left(m, phi0, I) / (I * slope); },
    },
    m.variant());
}

DilatancyEval evaluate_dilatancy(const ModelSpec& m, const FlowState& s)
{
  if (!(s.shear > 0.0)) {
    throw DomainError("dilatancy evaluation needs |S| > 0 (I would vanish)");
  }
  const double I = inertial_number(m.material(), s.shear, s.p);
  DilatancyEval out;
  out.f_value = dilatancy_f(m, s.phi, s.p, I);
  out.div_u = 2.0 * s.shear * out.f_value;
  if (std::holds_alternative<model::DPDilatancy>(m.variant()) ||
      std::holds_alternative<model::MuIDilatancy>(m.variant())) {
    out.psi = out.f_value;
  }
  return out;
}

double div_u(const ModelSpec& m, const FlowState& s)
{
  if (s.shear == 0.0) {
    return 0.0;
  }
  return evaluate_dilatancy(m, s).div_u;
}

double div_u_pressure_form(const ModelSpec& m, const FlowState& s)
{
  const auto& mat = m.material();
  const double I = inertial_number(mat, s.shear, s.p);
  const double I_eq = m.i_eq(s.phi);
  const auto A = [&](double J) -> double {
    return std::visit(
      overloaded{
        [&](const model::DruckerPrager& v) { return std::sin(v.delta); },
        [&](const model::MuI& v) { return J > 0.0 ? F_of_I(v.mu1, v.mu2, v.I0, J) : v.mu1; },
        [&](const model::PowerLaw& v) {
          return v.coefficient * power_law_f_coefficient(v.n) * std::pow(J, v.n);
        },
        [](const auto&) -> double {
          throw std::invalid_argument("pressure form only exists for Drucker-Prager, mu(I) and power laws");
        },
      },
      m.variant());
  };
  const double shear_part = s.shear > 0.0 ? 2.0 * A(I) * s.shear : 0.0;
  const double pressure_part =
    I_eq > 0.0 ? 2.0 * I_eq * A(I_eq) * std::sqrt(s.p) / (mat.d * std::sqrt(mat.rho_s)) : 0.0;
  return shear_part - pressure_part;
}

namespace {

double parse_exponent(std::string_view text)
{
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    return parse_double(text);
  }
  const double num = parse_double(text.substr(0, slash));
  const double den = parse_double(text.substr(slash + 1));
  if (den == 0.0) {
    throw ConfigError("power-law exponent has a zero denominator");
  }
  return num / den;
}

} // namespace

ModelSpec model_from_id(std::string_view id, const MaterialParams& mat, const EquilibriumLaw& law)
{
  if (id == "dp") return ModelSpec::drucker_prager(mat, law);
  if (id == "mui") return ModelSpec::mu_i(mat, law);
  if (id == "dp-psi") return ModelSpec::dp_dilatancy(mat, law);
  if (id == "mui-psi") return ModelSpec::mu_i_dilatancy(mat, law);
  if (id == "roux-radjai") return ModelSpec::roux_radjai(mat, law);
  if (id == "dp-incompressible") {
    const double z = std::sin(mat.delta);
    return ModelSpec::explicit_pair([z](double, double) { return z; }, [](double, double, double) { return 0.0; },
                                    mat, law, "dp-incompressible");
  }
  if (id.starts_with("power:")) {
    const double n = parse_exponent(id.substr(6));
    try {
      auto m = ModelSpec::power_law(n, mat, law);
      return ModelSpec(m.variant(), mat, law, std::string(id));
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (id.starts_with("derived:")) {
    const ModelSpec base = model_from_id(id.substr(8), mat, law);
    auto Z = [base](double phi, double I) { return yield_Z(base, phi, I); };
    return ModelSpec::derived(std::move(Z), mat, law, std::nullopt, std::string(id));
  }
  throw ConfigError("unknown model id '" + std::string(id) + "'");
}

} // namespace granflow
