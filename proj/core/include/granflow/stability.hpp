#pragma once

#include "granflow/conditions.hpp"
#include "granflow/constitutive.hpp"
#include "granflow/material.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace granflow {

/// Diffusivity of the linearized pore-pressure equation: p_atm kappa(phi0) / (1 - phi0).
double pore_diffusivity(double phi0, const GasParams& gas, double d);

/**
 * Symbol of the linearized system extended by the pore pressure:
 *
 *   M = | N        i xi (momentum rows) |
 *       | 0 ... 0  c |xi|^2             |
 *
 * N is the k x k symbol of the granular part and is supplied by the caller.
 */
struct ExtendedSymbol
{
  Eigen::MatrixXcd N;
  Eigen::VectorXd xi;
  std::vector<int> momentum_rows;
  double c = 0.0;
  Eigen::MatrixXcd M;

  double added_eigenvalue() const { return c * xi.squaredNorm(); }
};

/// Throws std::invalid_argument on a non-square N, a momentum row outside N,
/// repeated rows, |momentum_rows| != dim(xi), or c < 0.
ExtendedSymbol assemble_extended_symbol(const Eigen::MatrixXcd& N, const Eigen::VectorXd& xi,
                                        const std::vector<int>& momentum_rows, double c);

/// Dense general complex eigensolve; NumericalError on failure.
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& A);

/// Smallest achievable max |a_i - b_pi(i)| over pairings. Exhaustive for
/// n <= 8, greedy nearest-neighbour beyond. Infinity when the sizes differ.
double multiset_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

/// Distance between spec(M) and spec(N) + {c |xi|^2}.
double spectral_union_error(const ExtendedSymbol& sym);

/// min Re spec(M) >= min(min Re spec(N), 0) and the added eigenvalue is real
/// and non-negative. `tol` absorbs eigensolver round-off.
bool extended_spectrum_property(const ExtendedSymbol& sym, double tol = 1e-10);

/// Diagonal placeholder for the granular block with the given eigenvalues.
Eigen::MatrixXcd diagnostic_N(const std::vector<std::complex<double>>& eigenvalues);

enum class Verdict { CertifiedStable, ConditionsViolated, Indeterminate };

std::string_view to_string(Verdict v);

struct WellPosednessVerdict
{
  std::string model_id;
  ConditionReport report;
  Verdict verdict = Verdict::Indeterminate;
  std::vector<Condition> failing;
};

/// Certified only when C1, C2 and C3 hold at every grid point and none was
/// skipped; a failure of any of them yields ConditionsViolated. The conditions
/// are sufficient, so a violation is not a proof of instability.
WellPosednessVerdict classify(const ModelSpec& model, const GridSpec& grid, const SweepOptions& options = {});

} // namespace granflow
