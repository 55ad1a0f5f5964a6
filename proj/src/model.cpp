#include "gaussdyn/model.hpp"

#include <algorithm>
#include <cmath>

#include "gaussdyn/errors.hpp"

namespace gaussdyn {

namespace {

// log(cosh(x)) without overflow.
double log_cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::string to_string(ProfileKind kind) { return kind == ProfileKind::Smooth ? "smooth" : "isoso"; }

ScenarioParams ScenarioParams::with_psi(double omega_s, double omega_e, double psi, double t0, double tau,
                                        ProfileKind profile) {
    ScenarioParams p{omega_s, omega_e, psi * omega_s * omega_e, t0, tau, profile};
    return p;
}

ScenarioParams ScenarioParams::with_xi0(double omega_s, double omega_e, double xi0, double t0, double tau,
                                        ProfileKind profile) {
    ScenarioParams p{omega_s, omega_e, xi0, t0, tau, profile};
    return p;
}

void ScenarioParams::validate() const {
    if (!positive_finite(omega_s) || !positive_finite(omega_e)) {
        throw InvalidArgument("oscillator frequencies must be positive and finite");
    }
    if (!positive_finite(t0)) {
        throw InvalidArgument("t0 must be positive and finite");
    }
    if (profile == ProfileKind::Smooth && !positive_finite(tau)) {
        throw InvalidArgument("tau must be positive and finite for the smooth profile");
    }
    if (!std::isfinite(xi0) || xi0 < 0.0) {
        throw InvalidArgument("coupling amplitude must be non-negative and finite");
    }
}

double ScenarioParams::t_in() const { return profile == ProfileKind::Smooth ? -t0 - 20.0 * tau : -t0; }

DerivedParams derive(const ScenarioParams& p) {
    DerivedParams d{};
    d.xi_c = p.xi_c();
    d.w = p.w();
    d.psi = p.psi();
    d.g_p = perturbativity_gp(p);
    if (p.omega_e != p.omega_s) {
        d.t_omega = p.omega_s / (p.omega_e - p.omega_s);
    }
    d.t_in = p.t_in();
    return d;
}

double coupling_xi(double t, const ScenarioParams& p) {
    if (p.profile == ProfileKind::IsosoTopHat) {
        return (t > -p.t0 && t < p.t0) ? p.xi0 : 0.0;
    }
    // 1 + tanh(a) tanh(b) = cosh(a + b) / (cosh a cosh b) with a + b = 2 t0 / tau, so
    // xi = xi0 cosh^2(t0/tau) / (cosh a cosh b); the log form is even in t term by term.
    const double x0 = p.t0 / p.tau;
    const double a = (p.t0 + t) / p.tau;
    const double b = (p.t0 - t) / p.tau;
    return p.xi0 * std::exp(2.0 * log_cosh(x0) - (log_cosh(a) + log_cosh(b)));
}

double coupling_xi_dot(double t, const ScenarioParams& p) {
    if (p.profile == ProfileKind::IsosoTopHat) {
        throw DerivativeUndefined("the top-hat coupling has no derivative");
    }
    const double a = (p.t0 + t) / p.tau;
    const double b = (p.t0 - t) / p.tau;
    return -coupling_xi(t, p) * (std::tanh(a) - std::tanh(b)) / p.tau;
}

Mat4 hamiltonian_matrix(double t, const ScenarioParams& p) {
    const double xi = coupling_xi(t, p);
    Mat4 h;
    h(0, 0) = p.omega_s * p.omega_s;
    h(1, 1) = 1.0;
    h(2, 2) = p.omega_e * p.omega_e;
    h(3, 3) = 1.0;
    h(0, 2) = xi;
    h(2, 0) = xi;
    return h;
}

NormalModes normal_modes(double xi, double omega_s, double omega_e) {
    const double ss = omega_s * omega_s;
    const double ee = omega_e * omega_e;
    const double sum = ss + ee;
    const double r = std::hypot(2.0 * xi, ee - ss);
    const double xi_c = omega_s * omega_e;
    // omega1^2 = 2 (xi_c^2 - xi^2) / (sum + r) avoids cancellation near criticality.
    const double w1 = 2.0 * (xi_c - xi) * (xi_c + xi) / (sum + r);
    return {w1, 0.5 * (sum + r)};
}

AdiabaticFrame adiabatic_frame_at_xi(double xi, double omega_s, double omega_e) {
    AdiabaticFrame f{};
    const NormalModes nm = normal_modes(xi, omega_s, omega_e);
    f.theta = 0.5 * std::atan2(2.0 * xi, omega_e * omega_e - omega_s * omega_s);
    f.omega1_sq = nm.omega1_sq;
    f.omega2_sq = nm.omega2_sq;
    f.omega1_abs = std::sqrt(std::abs(nm.omega1_sq));
    f.omega2 = std::sqrt(nm.omega2_sq);
    f.hyperbolic = nm.omega1_sq < 0.0;
    return f;
}

AdiabaticFrame adiabatic_frame(double t, const ScenarioParams& p) {
    const double xi = coupling_xi(t, p);
    AdiabaticFrame f = adiabatic_frame_at_xi(xi, p.omega_s, p.omega_e);
    if (std::abs(f.omega1_sq) < 1e-12 * p.omega_s * p.omega_s) {
        throw CriticalPoint("slow normal mode frequency vanishes");
    }
    if (p.profile == ProfileKind::Smooth) {
        const double xi_dot = coupling_xi_dot(t, p);
        const double d = p.omega_e * p.omega_e - p.omega_s * p.omega_s;
        const double r2 = 4.0 * xi * xi + d * d;
        f.theta_dot = xi_dot * d / r2;
        // d(omega_{1,2}^2)/dt = -/+ 2 xi xi_dot / r
        const double dw2 = 2.0 * xi * xi_dot / std::sqrt(r2);
        f.beta1 = -dw2 / (4.0 * f.omega1_sq);
        f.beta2 = dw2 / (4.0 * f.omega2_sq);
    }
    return f;
}

double critical_coupling(const ScenarioParams& p) { return p.omega_s * p.omega_e; }

bool is_supercritical(const ScenarioParams& p) { return p.xi0 > critical_coupling(p); }

std::optional<double> secular_time(const RegimeLabel& label, const ScenarioParams& p) {
    if (!label.secular_time) {
        return std::nullopt;
    }
    return *label.secular_time / p.omega_s;
}

double perturbativity_gp(const ScenarioParams& p) {
    const double ws = p.omega_s;
    const double we = p.omega_e;
    return p.xi0 / std::sqrt(2.0 * ws * we * (ws * ws + we * we));
}

double perturbativity_gp(double w, double psi) { return psi * std::sqrt(w / (2.0 * (1.0 + w * w))); }

RegimeLabel classify_regime(double w, double psi, const RegimeThresholds& th) {
    if (!(w > 0.0 && w <= 1.0)) {
        throw InvalidArgument("w must lie in (0, 1]; swap system and environment");
    }
    if (!(psi > 0.0) || !std::isfinite(psi)) {
        throw InvalidArgument("psi must be positive and finite");
    }
    RegimeLabel r{};
    r.perturbative = perturbativity_gp(w, psi) < 0.1;
    const bool family1 = w < th.w_split;
    const double delta_w = 1.0 / w - 1.0;
    const double delta_psi = 1.0 - psi;
    if (psi < th.psi_low) {
        if (family1) {
            r.label = "U1";
            r.secular_time = 1.0 / (psi * psi);
        } else if (delta_w < psi) {
            r.label = "U2a";
            r.secular_time = 1.0 / psi;
        } else {
            r.label = "U2b";
            r.secular_time = delta_w / (psi * psi);
        }
    } else if (psi <= th.psi_high) {
        const std::string sign = delta_psi < 0.0 ? "plus" : "minus";
        r.label = (family1 ? "C1" : "C2") + sign;
        if (family1) {
            r.secular_time = std::min(1.0 / w, 1.0 / std::sqrt(std::abs(delta_psi)));
        }
    } else {
        if (!family1) {
            r.label = "O2";
        } else {
            r.label = w < 1.0 / psi ? "O1a" : "O1b";
        }
    }
    return r;
}

}  // namespace gaussdyn
