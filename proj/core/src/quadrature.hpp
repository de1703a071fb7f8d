#pragma once

#include "granflow/errors.hpp"
#include "granflow/format.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

namespace granflow::detail {

struct Panel
{
  double a;
  double b;
  double value;
  double error;
  double l1;
  bool operator<(const Panel& o) const { return error < o.error; }
};

/// 15-point Kronrod and embedded 7-point Gauss rule on one panel. Boost only
/// supplies the nodes and weights; its own error estimate has an absolute
/// floor near 1e-15 that breaks relative tolerances on small integrals.
template <class F>
Panel gk15_panel(F& f, double a, double b)
{
  using K = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  const auto& x = K::abscissa();
  const auto& wk = K::weights();
  const auto& wg = G::weights();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double f0 = f(c);
  double kron = wk[0] * f0;
  double gauss = wg[0] * f0;
  double l1 = wk[0] * std::abs(f0);
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fl = f(c - h * x[i]);
    const double fr = f(c + h * x[i]);
    kron += wk[i] * (fl + fr);
    l1 += wk[i] * (std::abs(fl) + std::abs(fr));
    // even-indexed Kronrod nodes are the Gauss nodes
    if (i % 2 == 0) {
      gauss += wg[i / 2] * (fl + fr);
    }
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h), l1 * std::abs(h)};
}

/// Globally adaptive 7/15 Gauss-Kronrod on [a, b] (largest-error panel split
/// first). Converged when the summed error is below rel_tol |value| or below
/// the round-off floor 200 eps L1. Throws NumericalError otherwise.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol, std::size_t max_panels = 4000)
{
  if (a == b) {
    return 0.0;
  }
  constexpr double kRoundoff = 200.0 * std::numeric_limits<double>::epsilon();
  std::priority_queue<Panel> panels;
  auto first = gk15_panel(f, a, b);
  double value = first.value;
  double error = first.error;
  double l1 = first.l1;
  panels.push(first);
  while (error > std::max(rel_tol * std::abs(value), kRoundoff * l1)) {
    if (panels.size() >= max_panels || !std::isfinite(value)) {
      throw NumericalError("quadrature on [" + format_double(a) + ", " + format_double(b) +
                           "] did not converge: estimate " + format_double(value) + ", error " +
                           format_double(error) + ", L1 " + format_double(l1));
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = gk15_panel(f, worst.a, mid);
    const Panel right = gk15_panel(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    panels.push(left);
    panels.push(right);
  }
  return value;
}

} // namespace granflow::detail
