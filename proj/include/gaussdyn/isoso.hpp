#pragma once

// Closed-form dynamics for the top-hat coupling xi(t) = xi0 on (-t0, t0).
//
// Inside the window the normal modes evolve as
//   x_i(dt) = e^{-i w_i dt} b_i / sqrt(2|w_i|) + e^{+i w_i dt} c_i / sqrt(2|w_i|),
// with w_1 = i^delta |w_1| (delta = 1 above criticality) and dt = t + t0. The
// companion operator c_i equals b_i^dagger when delta = 0; for delta = 1 it is the
// independent operator fixed by continuity of x and p at t = -t0.

#include <array>
#include <complex>
#include <optional>
#include <string>

#include "gaussdyn/linalg.hpp"
#include "gaussdyn/model.hpp"

namespace gaussdyn {

using cplx = std::complex<double>;

// Expansion of b_i and c_i over the incoming ladder operators:
// b_i = sum_I alpha[i][I] a_I + beta[i][I] a_I^dagger, c_i likewise with the
// companion arrays. Index 0 = mode 1 / system, 1 = mode 2 / environment.
struct BogoliubovSet {
    std::array<std::array<cplx, 2>, 2> alpha{};
    std::array<std::array<cplx, 2>, 2> beta{};
    std::array<std::array<cplx, 2>, 2> companion_alpha{};
    std::array<std::array<cplx, 2>, 2> companion_beta{};
    int delta = 0;
};

// Vacuum two-point functions. Operator order: b_i b_j, b_i c_j, c_i b_j, c_i c_j.
struct BCorrelators {
    std::array<std::array<cplx, 2>, 2> bb{};
    std::array<std::array<cplx, 2>, 2> bc{};
    std::array<std::array<cplx, 2>, 2> cb{};
    std::array<std::array<cplx, 2>, 2> cc{};
};

// Throws CriticalPoint when |xi0/xi_c - 1| < 1e-8.
BogoliubovSet bogoliubov_coeffs(const ScenarioParams& p);

// [b_i, c_j] from the coefficients. Equals delta_ij |w_i| / w_i, i.e. delta_ij
// below criticality and -i delta_11 above.
cplx commutator_bc(const BogoliubovSet& set, int i, int j);
// [b_i, b_j^dagger] with the true adjoint.
cplx commutator_b_bdag(const BogoliubovSet& set, int i, int j);

BCorrelators b_correlators(const BogoliubovSet& set);

// System covariance block at time t (vacuum before the window, frozen after it).
Mat2 isoso_sigma_s(double t, const ScenarioParams& p);
double isoso_purity(double t, const ScenarioParams& p);

enum class ExpansionCase { U1, U2a, U2b, C1, C2, O1a, O1b, O2 };

std::string to_string(ExpansionCase c);
// Accepts "U1", "U2a", "C1plus", "C1+", "C1", ... (sign suffixes map to the shared formula).
ExpansionCase parse_expansion_case(const std::string& name);
// Case whose formula applies to a regime label.
ExpansionCase expansion_for(const RegimeLabel& label);

// Leading-order purity of the named regime at dt = t + t0, with the exact normal
// frequencies. Near-critical formulas continue analytically through psi = 1.
double regime_purity(ExpansionCase c, double dt, const ScenarioParams& p);

// |w_1| above criticality.
std::optional<double> decoherence_rate(const ScenarioParams& p);

}  // namespace gaussdyn
