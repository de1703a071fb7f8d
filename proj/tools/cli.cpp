#include "cli.hpp"

#include "granflow/box.hpp"
#include "granflow/column.hpp"
#include "granflow/conditions.hpp"
#include "granflow/config_file.hpp"
#include "granflow/constitutive.hpp"
#include "granflow/errors.hpp"
#include "granflow/format.hpp"
#include "granflow/gas.hpp"
#include "granflow/stability.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace granflow::cli {

namespace {

struct Options
{
  std::string command;
  std::optional<std::string> model;
  std::optional<std::string> config;
  std::optional<std::string> grid;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> z_override;
  std::optional<double> I;
  std::vector<std::string> sets;
};

/// The resolved configuration, printed in `key = value` form so that a report
/// can be fed back through --config.
class Resolved
{
public:
  void add(const std::string& key, const std::string& value) { text_ << key << " = " << value << '\n'; }
  void add(const std::string& key, double value) { add(key, format_double(value)); }
  void add_block(const std::string& block) { text_ << block; }
  std::string str() const { return text_.str(); }

private:
  std::ostringstream text_;
};

/// Result lines are written as comments so the report stays a valid config file.
class Results
{
public:
  template <class T>
  Results& line(const std::string& key, const T& value)
  {
    text_ << "# " << key << ": " << value << '\n';
    return *this;
  }
  Results& line(const std::string& key, double value) { return line(key, format_double(value)); }
  void block(const std::string& text)
  {
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) text_ << "# " << l << '\n';
  }
  std::string str() const { return text_.str(); }

private:
  std::ostringstream text_;
};

struct Context
{
  KeyValueFile cfg;
  MaterialParams mat;
  GasParams gas;
  EquilibriumLaw law;
  Resolved resolved;
  std::optional<std::string> out_path;
};

void write_output(const std::optional<std::string>& path, const std::function<void(std::ostream&)>& writer)
{
  if (!path) return;
  std::ofstream file(*path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open output file '" + *path + "'");
  }
  writer(file);
  file.flush();
  if (!file) {
    throw std::runtime_error("failed writing output file '" + *path + "'");
  }
}

Context make_context(const Options& opt)
{
  Context ctx;
  if (opt.config) {
    ctx.cfg = KeyValueFile::load(*opt.config);
  }
  for (const auto& kv : opt.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    ctx.cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (opt.model) ctx.cfg.set("model", *opt.model);
  if (opt.z_override) ctx.cfg.set("z_override", *opt.z_override);
  if (opt.grid) ctx.cfg.set("grid", *opt.grid);
  if (opt.seed) ctx.cfg.set("seed", std::to_string(*opt.seed));
  if (opt.mode) ctx.cfg.set("scheme", *opt.mode);
  if (opt.I) ctx.cfg.set("I", format_double(*opt.I));
  ctx.out_path = opt.out;
  if (const auto cmd = ctx.cfg.take("command"); cmd && *cmd != opt.command) {
    throw ConfigError("configuration was written for '" + *cmd + "', not '" + opt.command + "'");
  }

  ctx.mat = material_from_config(ctx.cfg);
  ctx.gas = gas_from_config(ctx.cfg);
  ctx.law = equilibrium_from_config(ctx.cfg);
  ctx.resolved.add("command", opt.command);
  return ctx;
}

void add_physics(Context& ctx)
{
  std::ostringstream block;
  write_config(block, ctx.mat);
  write_config(block, ctx.gas);
  write_config(block, ctx.law);
  ctx.resolved.add_block(block.str());
}

ModelSpec resolve_model(Context& ctx)
{
  const auto id = ctx.cfg.take("model");
  if (!id) {
    throw ConfigError("no model given (use --model or the 'model' key)");
  }
  auto model = model_from_id(*id, ctx.mat, ctx.law);
  ctx.resolved.add("model", *id);
  if (const auto z = ctx.cfg.take("z_override")) {
    model = model.with_yield_from(model_from_id(*z, ctx.mat, ctx.law));
    ctx.resolved.add("z_override", *z);
  }
  return model;
}

GridSpec resolve_grid(Context& ctx)
{
  const auto grid = GridSpec::parse(ctx.cfg.take_string("grid", ""));
  ctx.resolved.add("grid", grid.to_string());
  return grid;
}

std::uint64_t resolve_seed(Context& ctx)
{
  const long long seed = ctx.cfg.take_int("seed", 1);
  if (seed < 0) throw ConfigError("seed must be non-negative");
  ctx.resolved.add("seed", std::to_string(seed));
  return static_cast<std::uint64_t>(seed);
}

double take_positive(Context& ctx, const std::string& key, double fallback)
{
  const double v = ctx.cfg.take_double(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError("'" + key + "' must be positive");
  }
  ctx.resolved.add(key, v);
  return v;
}

void finish(Context& ctx, std::ostream& out, const Results& results)
{
  ctx.cfg.reject_unconsumed();
  out << "# resolved configuration\n" << ctx.resolved.str() << results.str();
}

// -- commands --------------------------------------------------------------

int cmd_check(Context& ctx, std::ostream& out, bool classify_only)
{
  auto model = resolve_model(ctx);
  const auto grid = resolve_grid(ctx);
  add_physics(ctx);
  ctx.cfg.reject_unconsumed();

  Results results;
  int code = kSuccess;
  if (classify_only) {
    const auto v = classify(model, grid);
    std::ostringstream summary;
    v.report.write_summary(summary);
    results.block(summary.str());
    results.line("verdict", to_string(v.verdict));
    std::string failing;
    for (const auto c : v.failing) failing += (failing.empty() ? "" : " ") + std::string(to_string(c));
    results.line("failing", failing.empty() ? "none" : failing);
    write_output(ctx.out_path, [&](std::ostream& o) { v.report.write_csv(o); });
    code = v.verdict == Verdict::CertifiedStable ? kSuccess : kConditionFailure;
  } else {
    const auto report = sweep(model, grid);
    std::ostringstream summary;
    report.write_summary(summary);
    results.block(summary.str());
    const bool ok = report.all_enabled_pass() && report.skipped() == 0;
    results.line("result", ok ? "all conditions hold" : "conditions violated or not evaluable");
    write_output(ctx.out_path, [&](std::ostream& o) { report.write_csv(o); });
    code = ok ? kSuccess : kConditionFailure;
  }
  finish(ctx, out, results);
  return code;
}

int cmd_derive(Context& ctx, std::ostream& out)
{
  auto model = resolve_model(ctx);
  const auto grid = resolve_grid(ctx);
  const double I1 = take_positive(ctx, "I1", ctx.mat.I0 / 100.0);
  add_physics(ctx);
  ctx.cfg.reject_unconsumed();

  const YieldFn Z = [&model](double phi, double I) { return yield_Z(model, phi, I); };
  const double p = grid.p.lo;
  std::ostringstream csv;
  csv << "phi,I,p,Z,f_model,f_derived,abs_diff\n";
  double worst = 0.0;
  std::size_t skipped = 0;
  for (const double phi : grid.phi.values()) {
    for (const double I : grid.I.values()) {
      try {
        const double fm = dilatancy_f(model, phi, p, I);
        const double fd = derive_f_numeric(Z, ctx.law, ctx.mat, phi, p, I, I1);
        const double diff = std::abs(fm - fd);
        worst = std::max(worst, diff);
        csv << format_double(phi) << ',' << format_double(I) << ',' << format_double(p) << ','
            << format_double(Z(phi, I)) << ',' << format_double(fm) << ',' << format_double(fd) << ','
            << format_double(diff) << '\n';
      } catch (const DomainError&) {
        ++skipped;
      } catch (const NumericalError&) {
        ++skipped;
      }
    }
  }
  write_output(ctx.out_path, [&](std::ostream& o) { o << csv.str(); });
  const bool ok = worst < 1e-8 && skipped == 0;
  Results results;
  results.line("max |f_model - f_derived|", worst)
    .line("skipped points", skipped)
    .line("result", ok ? "f matches the dilatancy function forced by C1" : "f differs from the derived one");
  finish(ctx, out, results);
  return ok ? kSuccess : kConditionFailure;
}

std::string exponent_label(double n)
{
  if (n == -0.5) return "-1/2";
  return format_double(n);
}

int cmd_table1(Context& ctx, std::ostream& out)
{
  const double I_eq = take_positive(ctx, "table_I_eq", 0.5);
  const auto Is = ctx.cfg.take_doubles("table_I").value_or(std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0});
  const auto ns = ctx.cfg.take_doubles("table_n").value_or(std::vector<double>{0.0, 1.0, 2.0, 3.0, -0.5});
  const double p = take_positive(ctx, "p", 1000.0);
  {
    std::string list;
    for (const double I : Is) list += (list.empty() ? "" : " ") + format_double(I);
    ctx.resolved.add("table_I", list);
    list.clear();
    for (const double n : ns) list += (list.empty() ? "" : " ") + format_double(n);
    ctx.resolved.add("table_n", list);
  }
  add_physics(ctx);
  ctx.cfg.reject_unconsumed();

  const double phi = phi_eq(ctx.law, ctx.mat, I_eq);
  std::ostringstream csv;
  csv << "n,Z,I_eq,I,f_closed,f_derived,abs_diff,shear_coefficient,pressure_coefficient,dissipation\n";
  double worst = 0.0;
  for (const double n : ns) {
    const auto model = ModelSpec::power_law(n, ctx.mat, ctx.law);
    const YieldFn Z = [n](double, double J) { return std::pow(J, n); };
    for (const double I : Is) {
      if (!(I > 0.0)) throw ConfigError("table_I values must be positive");
      const double fc = dilatancy_f(model, phi, p, I);
      const double fd = derive_f_numeric(Z, ctx.law, ctx.mat, phi, p, I, ctx.mat.I0 / 100.0);
      const double shear = I * std::sqrt(p / ctx.mat.rho_s) / ctx.mat.d;
      const auto diss = power_law_dissipation(n, ctx.mat, ctx.law, FlowState{phi, p, shear, 0.0});
      worst = std::max(worst, std::abs(fc - fd));
      csv << exponent_label(n) << ",I^" << exponent_label(n) << ',' << format_double(I_eq) << ','
          << format_double(I) << ',' << format_double(fc) << ',' << format_double(fd) << ','
          << format_double(std::abs(fc - fd)) << ',' << format_double(diss.shear_coefficient) << ','
          << format_double(diss.pressure_coefficient) << ',' << format_double(diss.total()) << '\n';
    }
  }
  write_output(ctx.out_path, [&](std::ostream& o) { o << csv.str(); });
  if (!ctx.out_path) out << csv.str();
  Results results;
  results.line("max |f_closed - f_derived|", worst).line("result", worst < 1e-8 ? "columns agree" : "columns differ");
  finish(ctx, out, results);
  return worst < 1e-8 ? kSuccess : kConditionFailure;
}

int cmd_simulate_box(Context& ctx, std::ostream& out)
{
  auto model = resolve_model(ctx);
  const std::string forcing_kind = ctx.cfg.take_string("forcing", "constant");
  ctx.resolved.add("forcing", forcing_kind);
  BoxConfig cfg;
  cfg.gas = ctx.gas;
  const double p_floor = take_positive(ctx, "p_floor", kDefaultPressureFloor);
  std::optional<Forcing> forcing;
  if (forcing_kind == "constant") {
    const double I = ctx.cfg.take_double("I", 1.0);
    if (!(I >= 0.0)) throw ConfigError("'I' must be non-negative");
    ctx.resolved.add("I", I);
    const double p = take_positive(ctx, "p", 1000.0);
    forcing = Forcing::constant_inertial(ctx.mat, I, p, p_floor);
  } else if (forcing_kind == "random") {
    const auto seed = resolve_seed(ctx);
    const long long segments = ctx.cfg.take_int("segments", 20);
    if (segments < 1) throw ConfigError("'segments' must be at least 1");
    ctx.resolved.add("segments", std::to_string(segments));
    forcing = Forcing::random(seed, ctx.mat, static_cast<int>(segments), {}, p_floor);
  } else {
    throw ConfigError("unknown forcing '" + forcing_kind + "' (constant|random)");
  }
  cfg.phi0 = ctx.cfg.take_double("phi0", 0.5);
  ctx.resolved.add("phi0", cfg.phi0);
  if (const auto pf0 = ctx.cfg.take_double("p_f0")) {
    cfg.p_f0 = *pf0;
    ctx.resolved.add("p_f0", *pf0);
  }
  const double default_end = forcing_kind == "random" ? forcing->last_switch() + 5e-2 : 1.0;
  cfg.t_end = take_positive(ctx, "t_end", default_end);
  cfg.dt_max = take_positive(ctx, "dt_max", 1e-3);
  cfg.stiffness_limit = take_positive(ctx, "stiffness_limit", 0.2);
  const long long every = ctx.cfg.take_int("output_every", 1);
  if (every < 1) throw ConfigError("'output_every' must be at least 1");
  cfg.output_every = static_cast<std::size_t>(every);
  ctx.resolved.add("output_every", std::to_string(every));
  add_physics(ctx);
  ctx.cfg.reject_unconsumed();

  const auto run = run_box(model, *forcing, cfg);
  write_output(ctx.out_path, [&](std::ostream& o) { run.write_csv(o); });
  const auto& d = run.diagnostics;
  const bool ok = d.bound_violations == 0 && d.sign_mismatches == 0;
  Results results;
  results.line("steps", d.steps)
    .line("final phi", d.final_phi)
    .line("final phi_eq", d.final_phi_eq)
    .line("|final phi - phi_eq|", std::abs(d.final_phi - d.final_phi_eq))
    .line("phi range", "[" + format_double(d.phi_min) + ", " + format_double(d.phi_max_seen) + "]")
    .line("bound violations", d.bound_violations)
    .line("sign checks", d.sign_checks)
    .line("sign mismatches", d.sign_mismatches)
    .line("result", ok ? "bounds and equilibrium signs respected" : "model violation events recorded");
  finish(ctx, out, results);
  return ok ? kSuccess : kConditionFailure;
}

int cmd_simulate_column(Context& ctx, std::ostream& out)
{
  const double L = take_positive(ctx, "length", 0.1);
  const long long cells = ctx.cfg.take_int("cells", 200);
  if (cells < 2) throw ConfigError("'cells' must be at least 2");
  ctx.resolved.add("cells", std::to_string(cells));
  const double phi = take_positive(ctx, "phi", 0.6);
  const double pf_mean = ctx.cfg.take_double("pf_mean", 2000.0);
  const double pf_amp = ctx.cfg.take_double("pf_amp", 1000.0);
  ctx.resolved.add("pf_mean", pf_mean);
  ctx.resolved.add("pf_amp", pf_amp);
  const auto scheme = parse_column_scheme(ctx.cfg.take_string("scheme", "explicit"));
  ctx.resolved.add("scheme", std::string(to_string(scheme)));

  auto state = make_column(
    L, static_cast<std::size_t>(cells), [phi](double) { return phi; },
    [&](double z) { return pf_mean + pf_amp * std::cos(std::numbers::pi * z / L); });
  const double c = pore_diffusivity(phi, ctx.gas, ctx.mat.d);
  const double rate = c * std::pow(std::numbers::pi / L, 2);
  const double t_end = take_positive(ctx, "t_end", 1.0 / rate);
  const double dt = take_positive(ctx, "dt", column_dt_limit(state, ctx.gas, ctx.mat.d));
  const long long snapshots = ctx.cfg.take_int("snapshots", 10);
  if (snapshots < 1) throw ConfigError("'snapshots' must be at least 1");
  ctx.resolved.add("snapshots", std::to_string(snapshots));
  add_physics(ctx);
  ctx.cfg.reject_unconsumed();

  const double a0 = cosine_mode_amplitude(state);
  std::vector<ColumnState> history{state};
  double conservation = 0.0;
  while (state.t < t_end * (1.0 - 1e-12)) {
    const double before = gas_content(state);
    state = step_column(state, ctx.gas, ctx.mat, std::min(dt, t_end - state.t), scheme);
    conservation = std::max(conservation, std::abs(gas_content(state) - before) / std::abs(before));
    history.push_back(state);
  }
  const auto ledger = energy_ledger(history, ctx.gas, ctx.mat.d);
  const double measured = a0 != 0.0 ? -std::log(cosine_mode_amplitude(state) / a0) / state.t : 0.0;

  std::vector<ColumnState> dumps;
  const std::size_t stride = std::max<std::size_t>(1, (history.size() - 1) / static_cast<std::size_t>(snapshots));
  for (std::size_t i = 0; i < history.size(); i += stride) dumps.push_back(history[i]);
  if ((history.size() - 1) % stride != 0) dumps.push_back(history.back());
  write_output(ctx.out_path, [&](std::ostream& o) { write_column_csv(o, dumps); });

  const bool ok = ledger.non_increasing() && conservation < 1e-12;
  Results results;
  results.line("steps", history.size() - 1)
    .line("pore diffusivity c", c)
    .line("predicted decay rate c (pi/L)^2", rate)
    .line("measured decay rate", measured)
    .line("relative difference", std::abs(measured - rate) / rate)
    .line("max per-step gas content change", conservation)
    .line("E1 initial", ledger.energy.front())
    .line("E1 final", ledger.energy.back())
    .line("E1 increases", ledger.increases)
    .line("max ledger residual", ledger.max_abs_residual)
    .line("cumulative ledger residual", ledger.cumulative_residual)
    .line("result", ok ? "gas conserved, energy non-increasing" : "conservation or energy check failed");
  finish(ctx, out, results);
  return ok ? kSuccess : kConditionFailure;
}

std::string complex_list(const Eigen::VectorXcd& v)
{
  std::vector<std::complex<double>> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::string s;
  for (const auto& z : sorted) {
    s += (s.empty() ? "" : " ") + format_double(z.real()) + (z.imag() < 0 ? "" : "+") + format_double(z.imag()) + "i";
  }
  return s;
}

int cmd_symbol(Context& ctx, std::ostream& out)
{
  const auto seed = resolve_seed(ctx);
  const long long k = ctx.cfg.take_int("k", 3);
  if (k < 1 || k > 64) throw ConfigError("'k' must lie in [1, 64]");
  ctx.resolved.add("k", std::to_string(k));
  const auto xi_values = ctx.cfg.take_doubles("xi").value_or(std::vector<double>{1.0});
  if (xi_values.empty() || static_cast<long long>(xi_values.size()) > k) {
    throw ConfigError("'xi' needs between 1 and k components");
  }
  {
    std::string list;
    for (const double x : xi_values) list += (list.empty() ? "" : " ") + format_double(x);
    ctx.resolved.add("xi", list);
  }
  double c = 0.0;
  if (const auto given = ctx.cfg.take_double("c")) {
    c = *given;
    ctx.resolved.add("c", c);
  } else {
    const double phi0 = take_positive(ctx, "phi0", 0.6);
    c = pore_diffusivity(phi0, ctx.gas, ctx.mat.d);
  }
  add_physics(ctx);
  ctx.cfg.reject_unconsumed();

  // portable uniform draws: the top 53 bits of mt19937_64
  std::mt19937_64 rng(seed);
  const auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  const auto n = static_cast<Eigen::Index>(k);
  Eigen::MatrixXcd N(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = uniform();
      N(i, j) = {re, uniform()};
    }
  }
  Eigen::VectorXd xi(static_cast<Eigen::Index>(xi_values.size()));
  std::vector<int> rows;
  for (std::size_t j = 0; j < xi_values.size(); ++j) {
    xi(static_cast<Eigen::Index>(j)) = xi_values[j];
    rows.push_back(static_cast<int>(j));
  }
  const auto sym = assemble_extended_symbol(N, xi, rows, c);
  const auto eN = eigenvalues(sym.N);
  const auto eM = eigenvalues(sym.M);
  const double err = spectral_union_error(sym);
  const bool property = extended_spectrum_property(sym);

  write_output(ctx.out_path, [&](std::ostream& o) {
    o << "row,col,re,im\n";
    for (Eigen::Index i = 0; i < sym.M.rows(); ++i) {
      for (Eigen::Index j = 0; j < sym.M.cols(); ++j) {
        o << i << ',' << j << ',' << format_double(sym.M(i, j).real()) << ',' << format_double(sym.M(i, j).imag())
          << '\n';
      }
    }
  });
  const bool ok = err < 1e-8 && property;
  Results results;
  results.line("pore diffusivity c", c)
    .line("added eigenvalue c |xi|^2", sym.added_eigenvalue())
    .line("spec(N)", complex_list(eN))
    .line("spec(M)", complex_list(eM))
    .line("spectral union error", err)
    .line("stability inherited", property ? "yes" : "no")
    .line("result", ok ? "spec(M) = spec(N) + {c |xi|^2}" : "spectral property failed");
  finish(ctx, out, results);
  return ok ? kSuccess : kConditionFailure;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Well-posedness checks and desk-scale simulations for dense granular flow closures", "granflow"};
  app.require_subcommand(1, 1);
  Options opt;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "flat key = value configuration file");
    sub->add_option("--out", opt.out, "CSV output path");
    sub->add_option("--set", opt.sets, "override a configuration key (key=value), repeatable");
  };
  const auto with_model = [&](CLI::App* sub) {
    sub->add_option("--model", opt.model, "model id: dp, mui, dp-psi, mui-psi, power:<n>, roux-radjai, dp-incompressible");
    sub->add_option("--z-override", opt.z_override, "take the yield function from another model id");
  };

  auto* derive = app.add_subcommand("derive", "compare a model's f with the one forced by C1");
  common(derive);
  with_model(derive);
  derive->add_option("--grid", opt.grid, "phi=lo:hi:n,I=lo:hi:n:log,p=lo:hi:n");

  auto* check = app.add_subcommand("check", "evaluate the condition suite on a grid");
  common(check);
  with_model(check);
  check->add_option("--grid", opt.grid, "phi=lo:hi:n,I=lo:hi:n:log,p=lo:hi:n");

  auto* classify_cmd = app.add_subcommand("classify", "well-posedness verdict from the condition suite");
  common(classify_cmd);
  with_model(classify_cmd);
  classify_cmd->add_option("--grid", opt.grid, "phi=lo:hi:n,I=lo:hi:n:log,p=lo:hi:n");

  auto* table1 = app.add_subcommand("table1", "power-law closures: closed form vs quadrature");
  common(table1);

  auto* box = app.add_subcommand("simulate-box", "homogeneous box under prescribed shear and pressure");
  common(box);
  with_model(box);
  box->add_option("--I", opt.I, "inertial number of the constant forcing");
  box->add_option("--seed", opt.seed, "seed of the random forcing");

  auto* column = app.add_subcommand("simulate-column", "pore-pressure diffusion in a static column");
  common(column);
  column->add_option("--mode", opt.mode, "explicit|implicit")->check(CLI::IsMember({"explicit", "implicit"}));

  auto* symbol = app.add_subcommand("symbol", "extended symbol with the pore-pressure row");
  common(symbol);
  symbol->add_option("--seed", opt.seed, "seed of the random granular block");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  opt.command = app.get_subcommands().front()->get_name();

  try {
    auto ctx = make_context(opt);
    if (opt.command == "derive") return cmd_derive(ctx, out);
    if (opt.command == "check") return cmd_check(ctx, out, false);
    if (opt.command == "classify") return cmd_check(ctx, out, true);
    if (opt.command == "table1") return cmd_table1(ctx, out);
    if (opt.command == "simulate-box") return cmd_simulate_box(ctx, out);
    if (opt.command == "simulate-column") return cmd_simulate_column(ctx, out);
    if (opt.command == "symbol") return cmd_symbol(ctx, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  err << "error: unhandled command '" << opt.command << "'\n";
  return kError;
}

} // namespace granflow::cli
