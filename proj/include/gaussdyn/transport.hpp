#pragma once

#include <array>
#include <optional>
#include <vector>

#include "gaussdyn/linalg.hpp"
#include "gaussdyn/model.hpp"
#include "gaussdyn/ode.hpp"

namespace gaussdyn {

struct CovarianceState {
    double t = 0.0;
    Mat4 sigma;
};

enum class EndPolicy { FixedWindow, CouplingCutoff };

// Working precision of the integrated state. Supercritical runs squeeze the state
// exponentially, so determinants need more digits than double carries.
enum class Precision { Auto, Double, Extended, Quad };

// RungeKutta: Dormand-Prince 5(4) on the entries of sigma.
// Symplectic: Gauss-Legendre propagation of the phase-space map S, sigma = S sigma0 S^T.
// Auto picks Symplectic for supercritical coupling, where sigma grows exponentially
// and the Runge-Kutta truncation error breaks the uncertainty bound.
enum class Method { Auto, RungeKutta, Symplectic };

struct IntegratorConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    // User cap; the automatic oscillation and ramp caps still apply.
    double max_step = std::numeric_limits<double>::infinity();
    // Output cadence; unset means (2 pi / omega2) / 40 at peak coupling.
    std::optional<double> sample_dt;
    EndPolicy end_policy = EndPolicy::FixedWindow;
    double cutoff_threshold = 1e-10;
    // Overrides the policy-derived end time.
    std::optional<double> t_end;
    // Explicit output times; replaces the sample_dt grid when non-empty.
    std::vector<double> sample_times;
    Precision precision = Precision::Auto;
    Method method = Method::Auto;

    void validate() const;
};

// Samples on a strictly increasing time grid. Derivatives are kept for cubic
// Hermite interpolation between samples.
struct Trajectory {
    std::vector<CovarianceState> samples;
    std::vector<Mat4> rates;
    std::vector<double> purity_s;
    std::vector<double> purity_e;
    // det(sigma) evaluated in the working precision before rounding.
    std::vector<double> det_sigma;
    // Block determinants in the working precision; sqrt(det) is the block's
    // symplectic eigenvalue.
    std::vector<double> det_s;
    std::vector<double> det_e;
    std::vector<double> xi;
    ode::Stats stats;

    std::size_t size() const { return samples.size(); }
    CovarianceState at(double t) const;
};

// The 10 independent entries of a symmetric 4x4 matrix, row-major upper triangle.
using Packed = std::array<double, 10>;
Packed pack(const Mat4& sym);
Mat4 unpack(const Packed& v);

CovarianceState vacuum_initial(const ScenarioParams& p);

// d sigma/dt = Omega H sigma - sigma H Omega for a given coupling value.
Mat4 transport_rhs_at_xi(const Mat4& sigma, double xi, const ScenarioParams& p);
Mat4 transport_rhs(const CovarianceState& state, const ScenarioParams& p);

Mat2 system_block(const CovarianceState& state);
Mat2 environment_block(const CovarianceState& state);
Mat2 cross_block(const CovarianceState& state);

// End time implied by the policy: mirror of t_in, or the first t > 0 at which
// xi(t) / xi_c drops below the cutoff threshold.
double end_time(const ScenarioParams& p, const IntegratorConfig& cfg);

Method resolve_method(const ScenarioParams& p, const IntegratorConfig& cfg);

// Auto: Double for Runge-Kutta; for the symplectic path the precision grows with
// the peak instability exponent 2 |omega1| (2 t0).
Precision resolve_precision(const ScenarioParams& p, const IntegratorConfig& cfg);

// Effective step cap for the profile.
double step_cap(const ScenarioParams& p, const IntegratorConfig& cfg);

Trajectory integrate(const ScenarioParams& p, const IntegratorConfig& cfg);

// State at a single time, without storing samples.
CovarianceState propagate(const ScenarioParams& p, const IntegratorConfig& cfg, double t);

// Integrates with the smooth profile at tau = 1e-4 t0, approximating the top hat.
Trajectory isoso_reference_run(const ScenarioParams& p, const IntegratorConfig& cfg);

// 1 - gamma_S for a globally pure state, from det(sigma_SE) = 1 - det(sigma_S).
// Well conditioned when the cross block is small.
double impurity_from_cross_block(const CovarianceState& state);

}  // namespace gaussdyn
