#include "gaussdyn/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "gaussdyn/errors.hpp"

namespace gaussdyn {

namespace {

double lambda_at(double t, const ScenarioParams& p) { return coupling_xi(t, p) / std::sqrt(p.omega_s * p.omega_e); }

// Splits [a, b] at the ramps of the smooth profile. Ramp segments (within 10 tau of
// +-t0) use panels of width tau; elsewhere the kernel period sets the panel.
template <class F>
double integrate_profile(F&& f, double a, double b, const ScenarioParams& p, const QuadratureConfig& q,
                         double period_panel) {
    std::vector<double> cuts{a, b};
    const bool smooth = p.profile == ProfileKind::Smooth;
    if (smooth) {
        for (double c : {-p.t0 - 10.0 * p.tau, -p.t0 + 10.0 * p.tau, p.t0 - 10.0 * p.tau, p.t0 + 10.0 * p.tau}) {
            if (c > a && c < b) cuts.push_back(c);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    QuadratureConfig seg = q;
    seg.abs_tol = q.abs_tol / static_cast<double>(cuts.size() - 1);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double lo = cuts[k], hi = cuts[k + 1];
        const double mid = 0.5 * (lo + hi);
        const bool ramp = smooth && std::abs(std::abs(mid) - p.t0) < 10.0 * p.tau;
        const double panel = ramp ? std::min(period_panel, p.tau) : period_panel;
        total += integrate_adaptive(f, lo, hi, seg, panel).value;
    }
    return total;
}

}  // namespace

double o2_kernel(double t1, double t2, const ScenarioParams& p) {
    const double u = t1 - t2;
    const double theta = u > 0.0 ? 1.0 : (u < 0.0 ? 0.0 : 0.5);
    const double wm = p.omega_e - p.omega_s;
    const double wp = p.omega_s + p.omega_e;
    return lambda_at(t1, p) * lambda_at(t2, p) *
           ((1.0 - 2.0 * theta) * std::cos(wm * u) + (1.0 + 2.0 * theta) * std::cos(wp * u));
}

double o2_kernel_symmetric(double t1, double t2, const ScenarioParams& p) {
    return 4.0 * lambda_at(t1, p) * lambda_at(t2, p) * std::cos((p.omega_s + p.omega_e) * (t1 - t2));
}

namespace {

struct Window {
    double start;
    double stop;
};

Window o2_window(double t, const ScenarioParams& p) {
    const bool top_hat = p.profile == ProfileKind::IsosoTopHat;
    return {top_hat ? -p.t0 : p.t_in(), top_hat ? std::min(t, p.t0) : t};
}

// Quarter period of the cos(W+ u) kernel.
double kernel_panel(const ScenarioParams& p) { return 0.25 * 2.0 * std::numbers::pi / (p.omega_s + p.omega_e); }

}  // namespace

double purity_o2_quadrature(double t, const ScenarioParams& p, const QuadratureConfig& q) {
    p.validate();
    q.validate();
    const Window win = o2_window(t, p);
    if (!(win.stop > win.start) || p.xi0 == 0.0) return 1.0;
    const double wp = p.omega_s + p.omega_e;
    const double panel = kernel_panel(p);
    // Phases are taken relative to the window start to keep the arguments small.
    auto c = [&](double s) { return lambda_at(s, p) * std::cos(wp * (s - win.start)); };
    auto sn = [&](double s) { return lambda_at(s, p) * std::sin(wp * (s - win.start)); };
    const double C = integrate_profile(c, win.start, win.stop, p, q, panel);
    const double S = integrate_profile(sn, win.start, win.stop, p, q, panel);
    return 1.0 - 0.5 * (C * C + S * S);
}

double purity_o2_nested(double t, const ScenarioParams& p, const QuadratureConfig& q) {
    p.validate();
    q.validate();
    const Window win = o2_window(t, p);
    if (!(win.stop > win.start) || p.xi0 == 0.0) return 1.0;
    const double panel = kernel_panel(p);
    // Inner errors feed the outer integrand; keep them well below the outer target.
    QuadratureConfig inner = q;
    inner.abs_tol = q.abs_tol / std::max(1.0, 10.0 * (win.stop - win.start));
    inner.rel_tol = q.rel_tol / 10.0;
    auto outer = [&](double t1) {
        if (lambda_at(t1, p) == 0.0 || t1 <= win.start) return 0.0;
        auto f = [&](double t2) { return o2_kernel_symmetric(t1, t2, p); };
        return integrate_profile(f, win.start, t1, p, inner, panel);
    };
    return 1.0 - 0.25 * integrate_profile(outer, win.start, win.stop, p, q, panel);
}

double purity_o2_isoso(double dt, const ScenarioParams& p) {
    p.validate();
    const double w = p.w();
    const double gp = perturbativity_gp(p);
    const double s = std::sin(0.5 * (p.omega_s + p.omega_e) * dt);
    return 1.0 - 4.0 * gp * gp * (1.0 + w * w) / ((1.0 + w) * (1.0 + w)) * s * s;
}

}  // namespace gaussdyn
