#pragma once

// Second-order Dyson purity. With lambda = xi / sqrt(wS wE), W- = wE - wS,
// W+ = wS + wE and u = t' - t'':
//   gamma2(t) = 1 - 1/4 int int lambda(t') lambda(t'')
//               {[1 - 2 Theta(u)] cos(W- u) + [1 + 2 Theta(u)] cos(W+ u)}.
// Pairing (t', t'') with (t'', t') cancels the W- term, so the square equals the
// triangle t'' < t' with kernel 4 lambda lambda' cos(W+ u). Splitting the cosine
// factorizes the triangle into 2 |int lambda e^{i W+ t'} dt'|^2.

#include "gaussdyn/model.hpp"
#include "gaussdyn/quadrature.hpp"

namespace gaussdyn {

// Time-ordered integrand (braces times lambda lambda'), Theta(0) = 1/2.
double o2_kernel(double t1, double t2, const ScenarioParams& p);
// o2_kernel(t1, t2) + o2_kernel(t2, t1).
double o2_kernel_symmetric(double t1, double t2, const ScenarioParams& p);

// Integrates from t_start = t_in (smooth) or -t0 (top hat) to t, through the
// factorized form: two one-dimensional adaptive quadratures.
double purity_o2_quadrature(double t, const ScenarioParams& p, const QuadratureConfig& q = {});
// Same quantity by nested adaptive quadrature over the triangle. Cost grows with the
// square of the number of kernel periods; kept as an independent cross-check.
double purity_o2_nested(double t, const ScenarioParams& p, const QuadratureConfig& q = {});

// Top-hat closed form; dt is measured from the window start.
double purity_o2_isoso(double dt, const ScenarioParams& p);

}  // namespace gaussdyn
