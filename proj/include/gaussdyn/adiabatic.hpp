#pragma once

// Adiabatic expansion in the instantaneous normal-mode basis. With phases
// W_i(t) = int_{t_in}^t omega_i, rates f_i = d(omega_i)/dt / omega_i and
// r = sqrt(omega1/omega2) + sqrt(omega2/omega1):
//   gamma0   = {1 - sin^2(2 theta)/4 (2 - omega1/omega2 - omega2/omega1)}^{-1/2}
//   I_wi(t)  = int f_i(t') cos 2[W_i(t) - W_i(t')] dt'
//   I_th(t)  = int theta'(t') r(t') cos[W_1(t) - W_1(t') + W_2(t) - W_2(t')] dt'
//   dgamma1  = sin(2 theta)/2 gamma0^3 [Itilde_w - Itilde_th]
//   Itilde_w = sin(2 theta)/4 (omega2/omega1 - omega1/omega2)(I_w2 - I_w1)
//   Itilde_th = r I_th

#include <memory>
#include <vector>

#include "gaussdyn/model.hpp"
#include "gaussdyn/quadrature.hpp"
#include "gaussdyn/transport.hpp"

namespace gaussdyn {

// W_1, W_2 sampled on a grid; W_i(t_in) = 0.
struct PhaseAccumulator {
    std::vector<double> t;
    std::vector<double> W1;
    std::vector<double> W2;
};

struct NloIntegrals {
    double I_omega1 = 0.0;
    double I_omega2 = 0.0;
    double I_theta = 0.0;
    double Itilde_omega = 0.0;
    double Itilde_theta = 0.0;
};

// Grid must be non-decreasing; points before t_in get W = 0. Throws
// SupercriticalExcursion if omega1^2 <= 0 anywhere on [t_in, max(grid)].
PhaseAccumulator accumulate_phases(const ScenarioParams& p, const std::vector<double>& grid,
                                   const QuadratureConfig& q = {});

double purity_adiabatic_lo(double t, const ScenarioParams& p);

// Cumulative tables of the oscillatory integrals on [t_in, t_max], built once and
// evaluated at any t in that range. Panels never exceed (2 pi / omega2) / 8.
class AdiabaticExpansion {
public:
    AdiabaticExpansion(const ScenarioParams& p, double t_max, const QuadratureConfig& q = {});
    ~AdiabaticExpansion();
    AdiabaticExpansion(AdiabaticExpansion&&) noexcept;
    AdiabaticExpansion& operator=(AdiabaticExpansion&&) noexcept;

    double phase1(double t) const;
    double phase2(double t) const;
    NloIntegrals integrals(double t) const;
    double lo(double t) const;
    double nlo_correction(double t) const;

private:
    struct Table;
    std::unique_ptr<Table> table_;
};

double purity_nlo_correction(double t, const ScenarioParams& p, const QuadratureConfig& q = {});
NloIntegrals nlo_contributions(double t, const ScenarioParams& p, const QuadratureConfig& q = {});

// Exact frozen purity after the coupling has decayed below 1e-10 xi_c (the
// config's end policy is overridden).
double latetime_purity(const ScenarioParams& p, const IntegratorConfig& cfg = {});
// 1 - gamma_inf from the cross-correlations, resolved far below machine epsilon.
double latetime_impurity(const ScenarioParams& p, const IntegratorConfig& cfg = {});

// Below this, 1 - gamma is beyond double resolution by subtraction; the
// cross-block value is kept only when a tighter rerun reproduces it.
inline constexpr double kImpurityFloor = 1e-13;

// d ln y / d ln x: second-order centered differences on the nonuniform grid,
// one-sided at the ends. Entries touching a non-positive y are NaN. Throws
// DerivativeUndefined for fewer than two points.
std::vector<double> log_log_slopes(const std::vector<double>& x, const std::vector<double>& y);

struct SlopeSeries {
    std::vector<double> tau_over_t0;
    std::vector<double> impurity;
    // d ln(1 - gamma_inf) / d ln(tau/t0); NaN where a stencil touches a floored point.
    std::vector<double> slope;
    // Below kImpurityFloor and not reproduced by the tighter rerun.
    std::vector<bool> below_floor;
};

// tau is taken from tau_over_t0 * p.t0; other fields of p are kept.
SlopeSeries nonanalyticity_slope(const ScenarioParams& p, const std::vector<double>& tau_over_t0,
                                 const IntegratorConfig& cfg = {}, unsigned workers = 1);

struct ThresholdConfig {
    double criterion = 0.01;
    // Relative bracket width at which bisection stops.
    double resolution = 0.01;
    IntegratorConfig integrator;
    unsigned workers = 1;
};

struct ThresholdPoint {
    double tau_over_t0;
    double T_omega_thr;
    // Criterion held on the whole T_omega grid.
    bool at_grid_max;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ThresholdCurve {
    std::vector<ThresholdPoint> points;
    LinearFit fit;
};

// Recoherence test at T_omega = omega_s / (omega_e - omega_s): omega_e is derived
// from T_omega and xi0 keeps the base psi.
ScenarioParams threshold_scenario(const ScenarioParams& base, double tau_over_t0, double T_omega);
bool recoheres(const ScenarioParams& p, double criterion, const IntegratorConfig& cfg);

// For each tau/t0, the largest T_omega in the grid range meeting
// 1 - gamma_inf < criterion (1 - gamma_min), refined by bisection. Throws
// NoThreshold if some tau/t0 meets the criterion nowhere on the grid.
ThresholdCurve recoherence_threshold_scan(const ScenarioParams& base, const std::vector<double>& tau_over_t0,
                                          const std::vector<double>& T_omega_grid, const ThresholdConfig& cfg = {});

}  // namespace gaussdyn
