#include "granflow/stability.hpp"

#include "granflow/errors.hpp"
#include "granflow/format.hpp"
#include "granflow/gas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace granflow {

double pore_diffusivity(double phi0, const GasParams& gas, double d)
{
  if (!(phi0 > 0.0 && phi0 < 1.0)) {
    throw DomainError("pore diffusivity needs 0 < phi0 < 1");
  }
  return gas.p_atm * permeability_kappa(gas, d, phi0) / (1.0 - phi0);
}

ExtendedSymbol assemble_extended_symbol(const Eigen::MatrixXcd& N, const Eigen::VectorXd& xi,
                                        const std::vector<int>& momentum_rows, double c)
{
  if (N.rows() != N.cols() || N.rows() == 0) {
    throw std::invalid_argument("granular block N must be square and non-empty");
  }
  if (static_cast<Eigen::Index>(momentum_rows.size()) != xi.size()) {
    throw std::invalid_argument("need one momentum row per wavevector component (" +
                                std::to_string(momentum_rows.size()) + " rows, " +
                                std::to_string(xi.size()) + " components)");
  }
  if (std::set<int>(momentum_rows.begin(), momentum_rows.end()).size() != momentum_rows.size()) {
    throw std::invalid_argument("momentum rows must be distinct");
  }
  if (!(c >= 0.0)) {
    throw std::invalid_argument("pore diffusivity must be non-negative");
  }
  const Eigen::Index k = N.rows();
  ExtendedSymbol sym;
  sym.N = N;
  sym.xi = xi;
  sym.momentum_rows = momentum_rows;
  sym.c = c;
  sym.M = Eigen::MatrixXcd::Zero(k + 1, k + 1);
  sym.M.topLeftCorner(k, k) = N;
  for (std::size_t j = 0; j < momentum_rows.size(); ++j) {
    const int row = momentum_rows[j];
    if (row < 0 || row >= k) {
      throw std::invalid_argument("momentum row " + std::to_string(row) + " outside N");
    }
    sym.M(row, k) = std::complex<double>(0.0, xi(static_cast<Eigen::Index>(j)));
  }
  sym.M(k, k) = sym.added_eigenvalue();
  return sym;
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& A)
{
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(A, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("complex eigensolver did not converge");
  }
  return solver.eigenvalues();
}

double multiset_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
  if (a.size() != b.size()) {
    return std::numeric_limits<double>::infinity();
  }
  const auto n = static_cast<std::size_t>(a.size());
  if (n == 0) {
    return 0.0;
  }
  if (n <= 8) {
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    double best = std::numeric_limits<double>::infinity();
    do {
      double worst = 0.0;
      for (std::size_t i = 0; i < n && worst < best; ++i) {
        worst = std::max(worst, std::abs(a(static_cast<Eigen::Index>(i)) - b(perm[i])));
      }
      best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<bool> used(n, false);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d_best = std::numeric_limits<double>::infinity();
    std::size_t j_best = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(a(static_cast<Eigen::Index>(i)) - b(static_cast<Eigen::Index>(j)));
      if (d < d_best) {
        d_best = d;
        j_best = j;
      }
    }
    used[j_best] = true;
    worst = std::max(worst, d_best);
  }
  return worst;
}

double spectral_union_error(const ExtendedSymbol& sym)
{
  const Eigen::VectorXcd spec_M = eigenvalues(sym.M);
  const Eigen::VectorXcd spec_N = eigenvalues(sym.N);
  Eigen::VectorXcd expected(spec_N.size() + 1);
  expected << spec_N, std::complex<double>(sym.added_eigenvalue(), 0.0);
  return multiset_distance(spec_M, expected);
}

bool extended_spectrum_property(const ExtendedSymbol& sym, double tol)
{
  const Eigen::VectorXcd spec_M = eigenvalues(sym.M);
  const Eigen::VectorXcd spec_N = eigenvalues(sym.N);
  const double min_M = spec_M.real().minCoeff();
  const double min_N = spec_N.real().minCoeff();
  const double added = sym.added_eigenvalue();
  const double scale = std::max({1.0, sym.M.cwiseAbs().maxCoeff()});
  return std::isfinite(added) && added >= 0.0 && min_M >= std::min(min_N, 0.0) - tol * scale;
}

Eigen::MatrixXcd diagnostic_N(const std::vector<std::complex<double>>& eigenvalues)
{
  if (eigenvalues.empty()) {
    throw std::invalid_argument("diagnostic block needs at least one eigenvalue");
  }
  Eigen::VectorXcd diag(static_cast<Eigen::Index>(eigenvalues.size()));
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    diag(static_cast<Eigen::Index>(i)) = eigenvalues[i];
  }
  return diag.asDiagonal();
}

std::string_view to_string(Verdict v)
{
  switch (v) {
    case Verdict::CertifiedStable: return "certified-stable";
    case Verdict::ConditionsViolated: return "conditions-violated";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

WellPosednessVerdict classify(const ModelSpec& model, const GridSpec& grid, const SweepOptions& options)
{
  SweepOptions opts = options;
  for (const Condition c : {Condition::C1, Condition::C2, Condition::C3}) {
    opts.enabled[static_cast<std::size_t>(c)] = true;
  }
  WellPosednessVerdict out;
  out.model_id = model.id();
  out.report = sweep(model, grid, opts);
  for (const Condition c : {Condition::C1, Condition::C2, Condition::C3}) {
    if (!out.report.all_pass(c)) out.failing.push_back(c);
  }
  if (!out.failing.empty()) {
    out.verdict = Verdict::ConditionsViolated;
  } else if (out.report.skipped() > 0 || out.report.points.empty()) {
    out.verdict = Verdict::Indeterminate;
  } else {
    out.verdict = Verdict::CertifiedStable;
  }
  return out;
}

} // namespace granflow
