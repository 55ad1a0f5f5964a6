#pragma once

#include <optional>
#include <string>

#include "gaussdyn/linalg.hpp"

namespace gaussdyn {

enum class ProfileKind { Smooth, IsosoTopHat };

std::string to_string(ProfileKind kind);

// Two position-coupled oscillators. Frequencies are angular; the coupling is
// positive and switches on around [-t0, t0] with ramp width tau.
struct ScenarioParams {
    double omega_s = 1.0;
    double omega_e = 2.0;
    double xi0 = 0.0;
    double t0 = 1.0;
    double tau = 1.0;
    ProfileKind profile = ProfileKind::Smooth;

    // Resolve the coupling amplitude from psi = xi0 / (omega_s * omega_e).
    static ScenarioParams with_psi(double omega_s, double omega_e, double psi, double t0, double tau,
                                   ProfileKind profile = ProfileKind::Smooth);
    static ScenarioParams with_xi0(double omega_s, double omega_e, double xi0, double t0, double tau,
                                   ProfileKind profile = ProfileKind::Smooth);

    // Throws InvalidArgument unless frequencies and t0 (and tau for the smooth
    // profile) are positive and finite and xi0 >= 0.
    void validate() const;

    // Coupling at which the slow normal-mode frequency vanishes.
    double xi_c() const { return omega_s * omega_e; }
    double psi() const { return xi0 / xi_c(); }
    double w() const { return omega_s / omega_e; }
    // Time at which integration starts.
    double t_in() const;
};

struct DerivedParams {
    double xi_c;
    double w;
    double psi;
    double g_p;
    std::optional<double> t_omega;
    double t_in;
};

DerivedParams derive(const ScenarioParams& p);

double coupling_xi(double t, const ScenarioParams& p);
// Throws DerivativeUndefined for the top-hat profile.
double coupling_xi_dot(double t, const ScenarioParams& p);

// Hamiltonian matrix H(t) with H_SS = diag(wS^2, 1), H_EE = diag(wE^2, 1) and the
// position-position coupling xi(t).
Mat4 hamiltonian_matrix(double t, const ScenarioParams& p);

struct AdiabaticFrame {
    double theta;
    double theta_dot;
    double omega1_sq;
    double omega2_sq;
    // |omega1|; for omega1_sq < 0 the physical frequency is i * omega1_abs.
    double omega1_abs;
    double omega2;
    bool hyperbolic;
    // d(omega_i)/dt / (2 omega_i), defined in both regimes.
    double beta1;
    double beta2;
};

// Frame at an instantaneous coupling value; derivative terms are zero.
AdiabaticFrame adiabatic_frame_at_xi(double xi, double omega_s, double omega_e);
// Frame along the profile. Throws CriticalPoint when |omega1^2| < 1e-12 omega_s^2.
AdiabaticFrame adiabatic_frame(double t, const ScenarioParams& p);

// Normal-mode squared frequencies at coupling xi (omega1_sq may be negative).
struct NormalModes {
    double omega1_sq;
    double omega2_sq;
};
NormalModes normal_modes(double xi, double omega_s, double omega_e);

double critical_coupling(const ScenarioParams& p);
bool is_supercritical(const ScenarioParams& p);

double perturbativity_gp(const ScenarioParams& p);
double perturbativity_gp(double w, double psi);

struct RegimeThresholds {
    double psi_low = 0.5;
    double psi_high = 2.0;
    double w_split = 0.3;
};

struct RegimeLabel {
    std::string label;
    bool perturbative;
    // Secular time in units of 1/omega_s, when the case defines one.
    std::optional<double> secular_time;
};

// Requires 0 < w <= 1; callers with omega_s > omega_e swap the two oscillators.
RegimeLabel classify_regime(double w, double psi, const RegimeThresholds& thresholds = {});

// Secular time in absolute units, or nullopt for cases without one.
std::optional<double> secular_time(const RegimeLabel& label, const ScenarioParams& p);

}  // namespace gaussdyn
