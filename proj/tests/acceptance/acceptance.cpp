// Acceptance suite: one PASS/FAIL line per criterion. Usage: acceptance [n ...];
// with no arguments every criterion runs. Exit status is nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "gaussdyn/adiabatic.hpp"
#include "gaussdyn/experiments.hpp"
#include "gaussdyn/isoso.hpp"
#include "gaussdyn/markov.hpp"
#include "gaussdyn/perturbation.hpp"
#include "gaussdyn/transport.hpp"

using namespace gaussdyn;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [FAIL]");
    }
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ScenarioParams top_hat(ScenarioParams p) {
    p.profile = ProfileKind::IsosoTopHat;
    return p;
}

struct PresetTrajectory {
    std::string id;
    ScenarioParams params;
    Trajectory trajectory;
};

std::vector<PresetTrajectory> integrate_presets(const std::vector<std::string>& names) {
    std::vector<PresetTrajectory> out;
    for (const auto& name : names) {
        for (const auto& c : preset_cases(name)) {
            out.push_back({name + "/" + c.id, c.scenario.params, integrate(c.scenario.params, c.scenario.integrator)});
        }
    }
    return out;
}

Outcome criterion_isoso_exactness() {
    Outcome o;
    for (const auto& c : preset_cases("fig5")) {
        if (c.id.rfind("isoso", 0) != 0) continue;
        const auto start = std::chrono::steady_clock::now();
        const ScenarioParams hat = top_hat(c.scenario.params);
        const Trajectory tr = isoso_reference_run(hat, c.scenario.integrator);
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double t = tr.samples[i].t;
            if (t < -hat.t0 || t > hat.t0) continue;
            worst = std::max(worst, std::abs(isoso_purity(t, hat) - tr.purity_s[i]));
        }
        const double elapsed = seconds_since(start);
        o.check(worst < 5e-3, c.id + fmt(" max|diff|=%.3g", worst));
        o.check(elapsed < 10.0, c.id + fmt(" runtime=%.2fs", elapsed));
    }
    return o;
}

Outcome criterion_decay_rate() {
    Outcome o;
    for (const auto& c : preset_cases("fig2")) {
        const ScenarioParams& p = c.scenario.params;
        if (p.psi() < 1.05) continue;
        const Trajectory tr = integrate(p, c.scenario.integrator);
        std::vector<double> t, y;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            if (tr.samples[i].t < 0.0 || tr.samples[i].t > p.t0) continue;
            t.push_back(tr.samples[i].t);
            y.push_back(std::log(tr.purity_s[i]));
        }
        const double ratio = -fit_line(t, y).slope / decoherence_rate(p).value();
        o.check(std::abs(ratio - 1.0) <= 0.05, c.id + fmt(" slope/|w1|=%.4f", ratio));
    }
    return o;
}

double o2_gap_to_integrator(double psi) {
    const auto p = ScenarioParams::with_psi(1.0, 1e2, psi, 0.3, 1.0, ProfileKind::IsosoTopHat);
    IntegratorConfig cfg;
    cfg.rtol = 1e-12;
    cfg.atol = 1e-14;
    const Trajectory tr = integrate(p, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        worst = std::max(worst, std::abs(tr.purity_s[i] - purity_o2_isoso(tr.samples[i].t + p.t0, p)));
    }
    return worst;
}

Outcome criterion_perturbation() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uw(0.02, 1.0), upsi(0.01, 2.0), ut(0.2, 5.0);
    double worst = 0.0, gp_max = 0.0;
    int draws = 0;
    while (draws < 20) {
        const double w = uw(rng);
        const auto p = ScenarioParams::with_psi(1.0, 1.0 / w, upsi(rng), ut(rng), 1.0, ProfileKind::IsosoTopHat);
        const double gp = perturbativity_gp(p);
        if (gp > 0.3) continue;
        gp_max = std::max(gp_max, gp);
        for (int k = 0; k <= 20; ++k) {
            const double dt = 2.0 * p.t0 * k / 20.0;
            worst = std::max(worst, std::abs(purity_o2_quadrature(dt - p.t0, p) - purity_o2_isoso(dt, p)));
        }
        ++draws;
    }
    o.check(worst < 1e-6, fmt("quadrature vs closed form max=%.3g (max g_p %.3f)", worst, gp_max));
    const double ratio = o2_gap_to_integrator(0.1) / o2_gap_to_integrator(0.05);
    o.check(ratio >= 8.0 && ratio <= 32.0, fmt("U1 halving-psi error ratio=%.2f", ratio));
    return o;
}

Outcome criterion_regime_expansions() {
    Outcome o;
    for (const char* preset : {"fig5", "fig6", "fig7"}) {
        for (const auto& c : preset_cases(preset)) {
            if (!c.scenario.expansion) continue;
            const ScenarioParams& smooth = c.scenario.params;
            const ScenarioParams hat = top_hat(smooth);
            const ExpansionCase ec = parse_expansion_case(*c.scenario.expansion);
            const Trajectory tr = integrate(smooth, c.scenario.integrator);
            double worst = 0.0;
            for (std::size_t i = 0; i < tr.size(); ++i) {
                const double dt = tr.samples[i].t + hat.t0;
                if (dt < 0.0 || dt > 2.0 * hat.t0) continue;
                const double exact = tr.purity_s[i];
                worst = std::max(worst, std::abs(regime_purity(ec, dt, hat) - exact) / exact);
            }
            o.check(worst <= 0.1, c.id + fmt(" rel=%.3g", worst));
            if (c.id[0] != 'U') continue;
            const double gp = perturbativity_gp(hat);
            double gap = 0.0;
            for (double dt = 0.0; dt < 1.0 / hat.omega_s && dt <= 2.0 * hat.t0; dt += 1e-4) {
                gap = std::max(gap, std::abs(regime_purity(ec, dt, hat) - purity_o2_isoso(dt, hat)));
            }
            o.check(gap <= 10.0 * std::pow(gp, 4), c.id + fmt(" early gap=%.3g vs 10 g_p^4=%.3g", gap, 10.0 * std::pow(gp, 4)));
        }
    }
    return o;
}

struct AdiabaticErrors {
    double lo = 0.0;
    double nlo = 0.0;
};

AdiabaticErrors adiabatic_errors(const PresetCase& c) {
    const ScenarioParams& p = c.scenario.params;
    const Trajectory tr = integrate(p, c.scenario.integrator);
    const AdiabaticExpansion ae(p, tr.samples.back().t);
    AdiabaticErrors e;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.samples[i].t;
        const double lo = ae.lo(t);
        e.lo = std::max(e.lo, std::abs(lo - tr.purity_s[i]));
        if (c.scenario.order >= 1) e.nlo = std::max(e.nlo, std::abs(lo + ae.nlo_correction(t) - tr.purity_s[i]));
    }
    return e;
}

Outcome criterion_adiabatic_lo() {
    Outcome o;
    const PresetCase c = preset_cases("fig8L").at(0);
    const AdiabaticErrors e = adiabatic_errors(c);
    o.check(e.lo < 1e-2, fmt("max|LO - exact|=%.3g", e.lo));
    const double late = latetime_purity(c.scenario.params, c.scenario.integrator);
    o.check(late > 0.999, fmt("gamma_inf=%.6f", late));
    return o;
}

Outcome criterion_adiabatic_nlo() {
    Outcome o;
    const PresetCase c = preset_cases("fig8R").at(0);
    const AdiabaticErrors e = adiabatic_errors(c);
    o.check(e.nlo <= 0.5 * e.lo, fmt("max err LO=%.3g LO+NLO=%.3g", e.lo, e.nlo));
    const ScenarioParams& p = c.scenario.params;
    double t_off = p.t0;
    while (coupling_xi(t_off, p) / p.xi_c() >= 1e-10) t_off += 0.01 * p.tau;
    double worst = 0.0;
    for (double t = t_off; t <= t_off + 10.0 * p.tau; t += 0.5 * p.tau) {
        worst = std::max(worst, std::abs(purity_nlo_correction(t, p)));
    }
    o.check(worst < 1e-8, fmt("late |delta gamma1|=%.3g", worst));
    return o;
}

Outcome criterion_dominance() {
    Outcome o;
    const ScenarioParams p = preset_cases("fig9").at(0).scenario.params;
    const double t_max = p.t0 + 20.0 * p.tau;
    const AdiabaticExpansion ae(p, t_max);
    int dominant = 0, total = 0;
    for (double t = p.t_in(); t <= t_max; t += 0.02) {
        if (coupling_xi(t, p) < 0.5 * p.xi0) continue;
        const NloIntegrals in = ae.integrals(t);
        ++total;
        if (std::abs(in.Itilde_omega) > std::abs(in.Itilde_theta)) ++dominant;
    }
    const double frac = total ? static_cast<double>(dominant) / total : 0.0;
    o.check(total > 100 && frac >= 0.9, fmt("|I_omega| > |I_theta| at %.3f of %g samples", frac, total));
    return o;
}

Outcome criterion_nonperturbative_slope() {
    Outcome o;
    const SweepSpec spec = preset_sweep("fig12").value();
    const SlopeSeries s = nonanalyticity_slope(spec.base.params, spec.axes.at(0).values(), spec.base.integrator);
    bool increasing = true;
    std::string mags;
    for (std::size_t i = 0; i < s.slope.size(); ++i) {
        const double m = std::abs(s.slope[i]);
        mags += (i ? "," : "") + fmt("%.2f", m);
        if (!std::isfinite(m) || s.below_floor[i]) increasing = false;
        if (i > 0 && !(m > std::abs(s.slope[i - 1]))) increasing = false;
    }
    o.check(increasing, "|slope| over tau/t0 in [4,20]: " + mags);
    std::vector<double> x, y;
    for (double r : spec.axes.at(0).values()) {
        x.push_back(r);
        y.push_back(2.5 * std::pow(r, -3.7));
    }
    double worst = 0.0;
    for (double v : log_log_slopes(x, y)) worst = std::max(worst, std::abs(v / -3.7 - 1.0));
    o.check(worst <= 0.02, fmt("power-law self-test rel err=%.3g", worst));
    return o;
}

Outcome criterion_threshold_linearity() {
    Outcome o;
    const SweepSpec spec = preset_sweep("fig13").value();
    ThresholdConfig cfg;
    cfg.criterion = spec.criterion;
    cfg.integrator = spec.base.integrator;
    const auto tau = spec.axes.at(0).values();
    const ThresholdCurve curve = recoherence_threshold_scan(spec.base.params, tau, spec.t_omega->values(), cfg);
    o.check(tau.back() / tau.front() >= 10.0 - 1e-9, fmt("tau/t0 span %.1fx", tau.back() / tau.front()));
    o.check(curve.fit.r_squared > 0.95, fmt("R^2=%.4f", curve.fit.r_squared));
    o.check(curve.fit.slope > 0.0, fmt("slope=%.4f", curve.fit.slope));
    return o;
}

Outcome criterion_non_markovianity() {
    Outcome o;
    std::size_t checked = 0, violations = 0, runs = 0;
    double max_det = -INFINITY;
    for (const auto& name : preset_names()) {
        for (const auto& pt : integrate_presets({name})) {
            if (pt.params.xi0 == 0.0) continue;
            const NoiseAudit a = audit_noise(pt.trajectory, pt.params);
            checked += a.checked;
            violations += a.violations;
            max_det = std::max(max_det, a.max_det_B);
            ++runs;
        }
    }
    o.check(violations == 0 && checked > 0,
            std::to_string(runs) + " trajectories, " + std::to_string(checked) + " points, " +
                std::to_string(violations) + " violations" + fmt(", max det B=%.3g", max_det));
    return o;
}

Outcome criterion_bures_velocity() {
    Outcome o;
    for (const char* preset : {"fig14a", "fig14b", "fig14c"}) {
        for (const auto& c : preset_cases(preset)) {
            const ScenarioParams& p = c.scenario.params;
            const Trajectory tr = integrate(p, c.scenario.integrator);
            const auto samples = markov_analysis(tr, p, c.scenario.surrogate);
            const std::string id = std::string(preset) + "/" + c.id;
            if (c.scenario.surrogate == Surrogate::DropNegative) {
                double worst = 0.0;
                std::size_t n = 0;
                for (const auto& m : samples) {
                    if (m.velocity.pure_state_singularity || !(m.purity < 0.999)) continue;
                    const double v = m.velocity.closed_form;
                    const double rel = v > 0.0 ? std::abs(m.velocity.finite_difference - v) / v
                                               : (m.velocity.finite_difference == 0.0 ? 0.0 : INFINITY);
                    worst = std::max(worst, rel);
                    ++n;
                }
                o.check(worst < 1e-4, id + fmt(" closed vs FD worst rel=%.3g over %g points", worst, n));
            } else {
                double worst = 0.0;
                std::size_t n = 0;
                for (const auto& m : samples) {
                    if (m.velocity.pure_state_singularity || !(m.purity_rate < 0.0)) continue;
                    worst = std::max(worst, m.velocity.closed_form);
                    ++n;
                }
                o.check(n > 0 && worst < 1e-8, id + fmt(" max v_B while decohering=%.3g over %g points", worst, n));
            }
        }
    }
    return o;
}

Outcome criterion_semigroup_cp() {
    Outcome o;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    IntegratorConfig tight;
    tight.rtol = 1e-12;
    tight.atol = 1e-14;
    double wx = 0.0, wy = 0.0;
    std::vector<std::pair<ScenarioParams, Trajectory>> runs;
    for (const char* preset : {"fig14a", "fig14b", "fig14c"}) {
        const PresetCase c = preset_cases(preset).at(0);
        const ScenarioParams& p = c.scenario.params;
        const double lo = -p.t0 - 2.0 * p.tau, hi = p.t0 + 2.0 * p.tau;
        for (int k = 0; k < 5; ++k) {
            double a = lo + (hi - lo) * unit(rng), b = lo + (hi - lo) * unit(rng);
            if (a > b) std::swap(a, b);
            const double m = a + (b - a) * unit(rng);
            const MapPair whole = map_pair_evolve(p, a, b, tight);
            const MapPair joined = compose(map_pair_evolve(p, a, m, tight), map_pair_evolve(p, m, b, tight));
            wx = std::max(wx, frobenius_norm(joined.X - whole.X));
            wy = std::max(wy, frobenius_norm(joined.Y - whole.Y) / std::max(1.0, frobenius_norm(whole.Y)));
        }
        runs.push_back({p, integrate(p, c.scenario.integrator)});
    }
    o.check(wx < 1e-8 && wy < 1e-8, fmt("composition |dX|=%.3g |dY|/max(1,|Y|)=%.3g", wx, wy));

    // Candidate points: coupling on and a non-vanishing cross correlation.
    std::vector<std::pair<const ScenarioParams*, const CovarianceState*>> pool;
    for (const auto& [p, tr] : runs) {
        for (const auto& s : tr.samples) {
            if (coupling_xi(s.t, p) > 0.01 * p.xi0 && std::abs(s.sigma(0, 2)) > 1e-8) pool.push_back({&p, &s});
        }
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t n = std::min<std::size_t>(100, pool.size());
    std::size_t exact_cp = 0, dropped_not_cp = 0;
    const double dt = 1e-6;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& [p, s] = pool[i];
        const NoiseMatrix noise = noise_B(*s, *p);
        if (cp_check(constant_noise_step(noise.B, *p, dt)).completely_positive) ++exact_cp;
        const SurrogateNoise dropped = surrogate_noise(Surrogate::DropNegative, system_block(*s), noise);
        if (!cp_check(constant_noise_step(dropped.B_tilde, *p, dt)).completely_positive) ++dropped_not_cp;
    }
    o.check(n == 100 && exact_cp == 0 && dropped_not_cp == 0,
            std::to_string(n) + " points: exact B CP at " + std::to_string(exact_cp) + ", drop-negative non-CP at " +
                std::to_string(dropped_not_cp));
    return o;
}

Outcome criterion_invariants() {
    Outcome o;
    double det = 0.0, mismatch = 0.0, nu = INFINITY;
    std::size_t runs = 0;
    for (const auto& name : preset_names()) {
        for (const auto& pt : integrate_presets({name})) {
            const InvariantReport r = check_invariants(pt.trajectory);
            det = std::max(det, r.max_det_error);
            mismatch = std::max(mismatch, r.max_purity_mismatch);
            nu = std::min(nu, r.min_symplectic_eigenvalue);
            ++runs;
        }
    }
    o.check(det <= 1e-8, fmt("max|det sigma - 1|=%.3g", det));
    o.check(mismatch <= 1e-8, fmt("max|gamma_S - gamma_E|=%.3g", mismatch));
    o.check(nu >= 1.0 - 1e-9, fmt("min nu=%.12f", nu) + " over " + std::to_string(runs) + " trajectories");
    return o;
}

const std::map<int, std::function<Outcome()>>& criteria() {
    static const std::map<int, std::function<Outcome()>> table = {
        {1, criterion_isoso_exactness},      {2, criterion_decay_rate},
        {3, criterion_perturbation},         {4, criterion_regime_expansions},
        {5, criterion_adiabatic_lo},         {6, criterion_adiabatic_nlo},
        {7, criterion_dominance},            {8, criterion_nonperturbative_slope},
        {9, criterion_threshold_linearity},  {10, criterion_non_markovianity},
        {11, criterion_bures_velocity},      {12, criterion_semigroup_cp},
        {13, criterion_invariants},
    };
    return table;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
    if (selected.empty()) {
        for (const auto& [n, _] : criteria()) selected.push_back(n);
    }
    bool all = true;
    for (int n : selected) {
        const auto it = criteria().find(n);
        if (it == criteria().end()) {
            std::fprintf(stderr, "unknown criterion %d\n", n);
            return 2;
        }
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            o = it->second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("CRITERION %d: %s (%.1fs) %s\n", n, o.pass ? "PASS" : "FAIL", seconds_since(start),
                    o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
