#include "gaussdyn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaussdyn/adiabatic.hpp"
#include "gaussdyn/errors.hpp"
#include "gaussdyn/isoso.hpp"
#include "gaussdyn/markov.hpp"
#include "gaussdyn/parallel.hpp"
#include "gaussdyn/perturbation.hpp"

namespace gaussdyn {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kPerturbationRows = 200;

// Samples at which a non-Markovianity or Bures check is meaningful.
constexpr double kCrossFloor = 1e-10;
constexpr double kBuresPurityCap = 0.999;

double json_number(double v) { return std::isfinite(v) ? v : kNan; }

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string profile_key(ProfileKind k) { return k == ProfileKind::Smooth ? "smooth" : "isoso"; }

ScenarioParams top_hat(const ScenarioParams& p) {
    ScenarioParams q = p;
    q.profile = ProfileKind::IsosoTopHat;
    return q;
}

Json params_json(const ScenarioParams& p) {
    Json j;
    j["omega_s"] = p.omega_s;
    j["omega_e"] = p.omega_e;
    j["xi0"] = p.xi0;
    j["psi"] = p.psi();
    j["t0"] = p.t0;
    j["tau"] = p.tau;
    j["profile"] = profile_key(p.profile);
    return j;
}

// The classifier expects w <= 1; the roles of system and environment are swapped
// otherwise, which leaves psi unchanged.
RegimeLabel regime_of(const ScenarioParams& p, const RegimeThresholds& th) {
    const double w = std::min(p.omega_s / p.omega_e, p.omega_e / p.omega_s);
    return classify_regime(w, p.psi(), th);
}

// Rows kept for the expensive per-time analyses: every k-th sample plus the last.
std::vector<std::size_t> thinned_rows(std::size_t n, std::size_t limit) {
    std::vector<std::size_t> rows;
    if (n == 0) return rows;
    const std::size_t stride = std::max<std::size_t>(1, (n + limit - 1) / limit);
    for (std::size_t i = 0; i < n; i += stride) rows.push_back(i);
    if (rows.back() != n - 1) rows.push_back(n - 1);
    return rows;
}

}  // namespace

CsvTable trajectory_table(const Trajectory& tr) {
    CsvTable t{kTrajectoryHeader, {}};
    t.rows.reserve(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const Mat4& s = tr.samples[i].sigma;
        t.add_numbers({tr.samples[i].t, s(0, 0), s(0, 1), s(1, 1), s(2, 2), s(2, 3), s(3, 3), s(0, 2), s(0, 3),
                       s(1, 2), s(1, 3), tr.purity_s[i], tr.xi[i]});
    }
    return t;
}

InvariantReport check_invariants(const Trajectory& tr) {
    InvariantReport r;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        r.max_det_error = std::max(r.max_det_error, std::abs(tr.det_sigma[i] - 1.0));
        r.max_purity_mismatch = std::max(r.max_purity_mismatch, std::abs(tr.purity_s[i] - tr.purity_e[i]));
        r.min_symplectic_eigenvalue =
            std::min({r.min_symplectic_eigenvalue, std::sqrt(tr.det_s[i]), std::sqrt(tr.det_e[i])});
    }
    return r;
}

NoiseAudit audit_noise(const Trajectory& tr, const ScenarioParams& p) {
    NoiseAudit a;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const CovarianceState& st = tr.samples[i];
        if (!(tr.xi[i] > 0.0) || !(std::abs(st.sigma(0, 2)) > kCrossFloor)) continue;
        const double det = noise_B(st, p).B.det();
        ++a.checked;
        a.max_det_B = std::max(a.max_det_B, det);
        if (!(det < 0.0)) ++a.violations;
    }
    return a;
}

Json scenario_summary(const Scenario& s, const Trajectory& tr) {
    const ScenarioParams& p = s.params;
    const DerivedParams d = derive(p);
    const NormalModes modes = normal_modes(p.xi0, p.omega_s, p.omega_e);
    Json j;
    j["schema"] = kJsonSchema;
    j["params"] = params_json(p);
    j["xi_c"] = d.xi_c;
    j["g_p"] = d.g_p;
    j["omega1_abs"] = std::sqrt(std::abs(modes.omega1_sq));
    j["omega2"] = std::sqrt(modes.omega2_sq);
    j["supercritical"] = modes.omega1_sq < 0.0;
    j["t_omega"] = d.t_omega ? Json(*d.t_omega) : Json(nullptr);
    if (p.xi0 > 0.0) {
        const RegimeLabel r = regime_of(p, s.thresholds);
        j["regime"] = {{"label", r.label},
                       {"perturbative", r.perturbative},
                       {"secular_time", r.secular_time ? Json(*r.secular_time) : Json(nullptr)}};
    } else {
        j["regime"] = {{"label", "free"}, {"perturbative", true}, {"secular_time", nullptr}};
    }
    double gmin = 1.0;
    for (double g : tr.purity_s) gmin = std::min(gmin, g);
    j["gamma_min"] = gmin;
    j["gamma_inf"] = tr.purity_s.empty() ? 1.0 : tr.purity_s.back();
    j["samples"] = tr.size();
    j["method"] = resolve_method(p, s.integrator) == Method::Symplectic ? "symplectic" : "runge-kutta";
    const Precision prec = resolve_precision(p, s.integrator);
    j["precision"] = prec == Precision::Quad ? "quad" : prec == Precision::Extended ? "extended" : "double";
    const InvariantReport inv = check_invariants(tr);
    j["invariants"] = {{"max_det_error", inv.max_det_error},
                       {"max_purity_mismatch", inv.max_purity_mismatch},
                       {"min_symplectic_eigenvalue", inv.min_symplectic_eigenvalue}};
    const NoiseAudit audit = audit_noise(tr, p);
    j["noise_audit"] = {{"checked", audit.checked},
                        {"violations", audit.violations},
                        {"max_det_B", number_or_null(audit.max_det_B)}};
    return j;
}

CsvTable isoso_table(const Scenario& s, const Trajectory& tr, Json& summary) {
    const ScenarioParams hat = top_hat(s.params);
    std::optional<ExpansionCase> ec;
    if (s.expansion) ec = parse_expansion_case(*s.expansion);
    CsvTable t{{"t", "purity_analytic"}, {}};
    if (ec) t.header.push_back("purity_expansion");
    double max_dev = 0.0;
    double max_exp_rel = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double time = tr.samples[i].t;
        const double g = isoso_purity(time, hat);
        max_dev = std::max(max_dev, std::abs(g - tr.purity_s[i]));
        std::vector<double> row{time, g};
        if (ec) {
            const double dt = time + hat.t0;
            double e = kNan;
            if (dt >= 0.0 && dt <= 2.0 * hat.t0) {
                e = regime_purity(*ec, dt, hat);
                max_exp_rel = std::max(max_exp_rel, std::abs(e - tr.purity_s[i]) / tr.purity_s[i]);
            }
            row.push_back(e);
        }
        t.add_numbers(row);
    }
    Json& j = summary["isoso"];
    j["max_abs_deviation"] = max_dev;
    if (ec) {
        j["expansion"] = to_string(*ec);
        j["expansion_max_rel_error"] = max_exp_rel;
    }
    return t;
}

CsvTable perturbation_table(const Scenario& s, const Trajectory& tr, Json& summary) {
    const ScenarioParams hat = top_hat(s.params);
    const std::vector<std::size_t> rows = thinned_rows(tr.size(), kPerturbationRows);
    std::vector<double> quad(rows.size()), closed(rows.size());
    parallel_for(rows.size(), s.workers, [&](std::size_t k) {
        const double time = tr.samples[rows[k]].t;
        quad[k] = purity_o2_quadrature(time, s.params);
        const double dt = std::clamp(time + hat.t0, 0.0, 2.0 * hat.t0);
        closed[k] = purity_o2_isoso(dt, hat);
    });
    CsvTable t{{"t", "purity_exact", "purity_o2", "purity_o2_isoso"}, {}};
    double max_dev = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t i = rows[k];
        t.add_numbers({tr.samples[i].t, tr.purity_s[i], quad[k], closed[k]});
        max_dev = std::max(max_dev, std::abs(quad[k] - tr.purity_s[i]));
    }
    summary["perturb"] = {{"rows", rows.size()}, {"max_abs_deviation_o2", max_dev}, {"g_p", perturbativity_gp(s.params)}};
    return t;
}

CsvTable adiabatic_table(const Scenario& s, const Trajectory& tr, Json& summary) {
    const ScenarioParams& p = s.params;
    if (p.profile != ProfileKind::Smooth) throw DerivativeUndefined("the adiabatic expansion needs the smooth profile");
    if (tr.size() == 0) throw InvalidArgument("empty trajectory");
    const AdiabaticExpansion ex(p, tr.samples.back().t);
    CsvTable t{{"t", "purity_exact", "purity_lo"}, {}};
    if (s.order == 1) {
        for (const char* h : {"delta_gamma1", "purity_nlo", "Itilde_omega", "Itilde_theta"}) t.header.push_back(h);
    }
    double max_lo = 0.0, max_nlo = 0.0;
    std::size_t region = 0, dominant = 0;
    double late_dg = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double time = tr.samples[i].t;
        const double lo = ex.lo(time);
        const double exact = tr.purity_s[i];
        max_lo = std::max(max_lo, std::abs(lo - exact));
        std::vector<double> row{time, exact, lo};
        if (s.order == 1) {
            const NloIntegrals I = ex.integrals(time);
            const double dg = ex.nlo_correction(time);
            max_nlo = std::max(max_nlo, std::abs(lo + dg - exact));
            late_dg = dg;
            if (tr.xi[i] >= 0.5 * p.xi0) {
                ++region;
                if (std::abs(I.Itilde_omega) > std::abs(I.Itilde_theta)) ++dominant;
            }
            for (double v : {dg, lo + dg, I.Itilde_omega, I.Itilde_theta}) row.push_back(v);
        }
        t.add_numbers(row);
    }
    Json& j = summary["adiabatic"];
    j["order"] = s.order;
    j["max_lo_error"] = max_lo;
    if (s.order == 1) {
        j["max_nlo_error"] = max_nlo;
        j["final_delta_gamma1"] = late_dg;
        j["final_xi_over_xi_c"] = tr.xi.back() / p.xi_c();
        j["interaction_samples"] = region;
        j["creation_dominant_fraction"] = region ? static_cast<double>(dominant) / static_cast<double>(region) : kNan;
    }
    return t;
}

CsvTable markov_table(const Scenario& s, const Trajectory& tr, Json& summary) {
    const std::vector<MarkovSample> ms = markov_analysis(tr, s.params, s.surrogate, s.workers);
    CsvTable t{kMarkovHeader, {}};
    double max_rel = 0.0, max_v = 0.0;
    std::size_t compared = 0, flagged = 0, non_cp = 0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const MarkovSample& m = ms[i];
        const BuresVelocity& v = m.velocity;
        t.add({format_number(m.t), format_number(m.purity), format_number(m.lambda_minus),
               format_number(m.lambda_plus), format_number(v.closed_form), format_number(v.finite_difference),
               to_string(v.applied), m.cp_exact ? "1" : "0"});
        if (v.pure_state_singularity) ++flagged;
        if (!m.cp_exact) ++non_cp;
        if (std::isfinite(v.closed_form)) max_v = std::max(max_v, v.closed_form);
        if (m.purity < kBuresPurityCap && !v.pure_state_singularity && std::isfinite(v.closed_form) &&
            v.finite_difference > 0.0) {
            ++compared;
            max_rel = std::max(max_rel, std::abs(v.closed_form - v.finite_difference) / v.finite_difference);
        }
    }
    summary["markov"] = {{"surrogate", to_string(s.surrogate)},
                         {"max_v_bures", max_v},
                         {"compared_samples", compared},
                         {"max_rel_error_closed_vs_fd", json_number(compared ? max_rel : kNan)},
                         {"pure_state_flags", flagged},
                         {"non_cp_exact_samples", non_cp}};
    return t;
}

ScenarioRun run_scenario(const Scenario& s) {
    s.params.validate();
    ensure_writable_dir(s.out_dir);
    ScenarioRun run;
    run.trajectory = integrate(s.params, s.integrator);
    run.summary = scenario_summary(s, run.trajectory);
    Json files = Json::array();
    auto emit = [&](const std::string& name, const CsvTable& t) {
        write_csv(join_path(s.out_dir, name), t);
        files.push_back(name);
    };
    emit("trajectory.csv", trajectory_table(run.trajectory));
    if (s.wants(Analysis::Isoso)) emit("isoso.csv", isoso_table(s, run.trajectory, run.summary));
    if (s.wants(Analysis::Perturbation)) emit("perturb.csv", perturbation_table(s, run.trajectory, run.summary));
    if (s.wants(Analysis::Adiabatic)) emit("adiabatic.csv", adiabatic_table(s, run.trajectory, run.summary));
    if (s.wants(Analysis::Markov)) emit("markov.csv", markov_table(s, run.trajectory, run.summary));
    files.push_back("summary.json");
    run.summary["files"] = files;
    write_json(join_path(s.out_dir, "summary.json"), run.summary);
    return run;
}

namespace {

// psi <= 0 marks a coupling given as xi0.
void apply_axis(const std::string& name, double v, ScenarioParams& p, double& psi) {
    if (name == "omega_s") p.omega_s = v;
    else if (name == "omega_e") p.omega_e = v;
    else if (name == "t0") p.t0 = v;
    else if (name == "tau") p.tau = v;
    else if (name == "xi0") {
        p.xi0 = v;
        psi = 0.0;
    } else if (name == "psi") psi = v;
}

// Applies a grid cell in dependency order: frequencies and t0 first, then the
// quantities defined relative to them.
ScenarioParams cell_params(const Scenario& base, const std::vector<std::pair<std::string, double>>& cell) {
    ScenarioParams p = base.params;
    double psi = base.psi.value_or(0.0);
    for (const auto& [name, v] : cell) apply_axis(name, v, p, psi);
    for (const auto& [name, v] : cell) {
        if (name == "T_omega") p.omega_e = p.omega_s * (1.0 + 1.0 / v);
    }
    for (const auto& [name, v] : cell) {
        if (name == "tau_over_t0") p.tau = v * p.t0;
    }
    if (psi > 0.0) p.xi0 = psi * p.xi_c();
    p.validate();
    return p;
}

SweepResult latetime_sweep(const SweepSpec& spec) {
    std::vector<std::vector<double>> grids;
    for (const auto& a : spec.axes) grids.push_back(a.values());
    const std::size_t n2 = grids.size() > 1 ? grids[1].size() : 1;
    const std::size_t total = grids[0].size() * n2;
    std::vector<double> impurity(total);
    std::vector<std::vector<std::pair<std::string, double>>> cells(total);
    for (std::size_t i = 0; i < total; ++i) {
        cells[i].emplace_back(spec.axes[0].name, grids[0][i / n2]);
        if (grids.size() > 1) cells[i].emplace_back(spec.axes[1].name, grids[1][i % n2]);
    }
    parallel_for(total, spec.workers, [&](std::size_t i) {
        impurity[i] = latetime_impurity(cell_params(spec.base, cells[i]), spec.base.integrator);
    });
    SweepResult r;
    for (const auto& a : spec.axes) r.table.header.push_back(a.name);
    r.table.header.push_back("gamma_inf");
    r.table.header.push_back("impurity");
    for (std::size_t i = 0; i < total; ++i) {
        std::vector<double> row;
        for (const auto& c : cells[i]) row.push_back(c.second);
        row.push_back(1.0 - impurity[i]);
        row.push_back(impurity[i]);
        r.table.add_numbers(row);
    }
    r.summary["cells"] = total;
    return r;
}

SweepResult slope_sweep(const SweepSpec& spec) {
    const std::vector<double> grid = spec.axes[0].values();
    const SlopeSeries s = nonanalyticity_slope(spec.base.params, grid, spec.base.integrator, spec.workers);
    SweepResult r;
    r.table.header = {"tau_over_t0", "impurity", "slope", "below_floor"};
    std::vector<double> mags;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        r.table.add({format_number(grid[i]), format_number(s.impurity[i]), format_number(s.slope[i]),
                     s.below_floor[i] ? "1" : "0"});
        if (std::isfinite(s.slope[i])) mags.push_back(std::abs(s.slope[i]));
    }
    bool increasing = mags.size() >= 2;
    for (std::size_t i = 1; i < mags.size(); ++i) increasing = increasing && mags[i] > mags[i - 1];
    r.summary["finite_slopes"] = mags.size();
    r.summary["abs_slope_strictly_increasing"] = increasing;
    r.summary["max_abs_slope"] = mags.empty() ? Json(nullptr) : Json(*std::max_element(mags.begin(), mags.end()));
    return r;
}

SweepResult threshold_sweep(const SweepSpec& spec) {
    ThresholdConfig cfg;
    cfg.criterion = spec.criterion;
    cfg.integrator = spec.base.integrator;
    cfg.workers = spec.workers;
    ScenarioParams base = spec.base.params;
    const ThresholdCurve c =
        recoherence_threshold_scan(base, spec.axes[0].values(), spec.t_omega->values(), cfg);
    SweepResult r;
    r.table.header = kScanHeader;
    Json at_max = Json::array();
    for (const auto& pt : c.points) {
        r.table.add_numbers({pt.tau_over_t0, pt.T_omega_thr, c.fit.slope, c.fit.r_squared});
        at_max.push_back(pt.at_grid_max);
    }
    r.summary["fit"] = {{"slope", c.fit.slope}, {"intercept", c.fit.intercept}, {"r_squared", c.fit.r_squared}};
    r.summary["criterion"] = spec.criterion;
    r.summary["at_grid_max"] = at_max;
    return r;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    for (const auto& a : spec.axes) {
        if (a.count == 0) throw ConfigError("sweep grids must be non-empty");
    }
    SweepResult r;
    switch (spec.reduction) {
        case Reduction::LatetimePurity: r = latetime_sweep(spec); break;
        case Reduction::Slope: r = slope_sweep(spec); break;
        case Reduction::Threshold: r = threshold_sweep(spec); break;
    }
    r.summary["schema"] = kJsonSchema;
    r.summary["reduction"] = to_string(spec.reduction);
    r.summary["base"] = params_json(spec.base.params);
    Json axes = Json::array();
    for (const auto& a : spec.axes) {
        axes.push_back({{"name", a.name}, {"grid", a.log ? "log" : "linear"}, {"lo", a.lo}, {"hi", a.hi},
                        {"count", a.count}});
    }
    r.summary["axes"] = axes;
    return r;
}

const std::vector<LabelledPoint>& labelled_points() {
    static const std::vector<LabelledPoint> pts = {
        {"U1", 1e-2, 1e-2, "U1"},           {"U2a", 1.0 / 1.01, 0.1, "U2a"},
        {"U2b", 1.0 / 1.1, 1e-2, "U2b"},    {"C1+", 0.1, 1.1, "C1plus"},
        {"C1-", 0.1, 0.9, "C1minus"},       {"C2+", 1.0 / 1.1, 1.1, "C2plus"},
        {"C2-", 1.0 / 1.1, 0.9, "C2minus"}, {"O1a", 1e-2, 10.0, "O1a"},
        {"O1b", 0.1, 100.0, "O1b"},         {"O2", 1.0 / 1.1, 10.0, "O2"},
    };
    return pts;
}

PhaseDiagram phase_diagram(const SweepAxis& w_axis, const SweepAxis& psi_axis, const RegimeThresholds& th) {
    if (!(w_axis.lo > 0.0) || w_axis.hi > 1.0) throw InvalidArgument("w grid must lie in (0, 1]; swap S and E");
    if (!(psi_axis.lo > 0.0) || psi_axis.hi > 100.0) throw InvalidArgument("psi grid must lie in (0, 100]");
    PhaseDiagram d;
    d.cells.header = {"w", "psi", "label", "g_p", "perturbative", "supercritical", "near_critical"};
    d.contour.header = {"w", "psi_critical", "psi_gp_0.1"};
    const auto ws = w_axis.values();
    const auto psis = psi_axis.values();
    for (double w : ws) {
        for (double psi : psis) {
            const RegimeLabel r = classify_regime(w, psi, th);
            d.cells.add({format_number(w), format_number(psi), r.label, format_number(perturbativity_gp(w, psi)),
                         r.perturbative ? "1" : "0", psi > 1.0 ? "1" : "0", r.label[0] == 'C' ? "1" : "0"});
        }
        // g_p is linear in psi.
        d.contour.add_numbers({w, 1.0, 0.1 / perturbativity_gp(w, 1.0)});
    }
    Json pts = Json::array();
    for (const auto& lp : labelled_points()) {
        const RegimeLabel r = classify_regime(lp.w, lp.psi, th);
        pts.push_back({{"name", lp.name}, {"w", lp.w}, {"psi", lp.psi}, {"label", r.label},
                       {"g_p", perturbativity_gp(lp.w, lp.psi)}, {"matches", r.label == lp.regime}});
    }
    d.summary["schema"] = kJsonSchema;
    d.summary["cells"] = ws.size() * psis.size();
    d.summary["labelled_points"] = pts;
    return d;
}

namespace {

Scenario make_scenario(double omega_e, double psi, double t0, double tau, std::vector<Analysis> analyses = {}) {
    Scenario s;
    s.params = ScenarioParams::with_psi(1.0, omega_e, psi, t0, tau);
    s.psi = psi;
    s.analyses = std::move(analyses);
    return s;
}

// Regime-expansion case at (t0, w, psi) with omega_s = 1 and tau = 1e-4 t0.
Scenario expansion_case(double t0, double w, double psi, const std::string& expansion) {
    Scenario s = make_scenario(1.0 / w, psi, t0, 1e-4 * t0, {Analysis::Isoso});
    s.expansion = expansion;
    return s;
}

std::vector<PresetCase> markov_cases(double omega_e, double psi, double tau, double t0) {
    std::vector<PresetCase> out;
    for (Surrogate sur : {Surrogate::DropNegative, Surrogate::BestDecohering}) {
        Scenario s = make_scenario(omega_e, psi, t0, tau, {Analysis::Markov});
        s.surrogate = sur;
        out.push_back({to_string(sur), s});
    }
    return out;
}

std::string tag(const char* prefix, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%g", prefix, v);
    return buf;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fig2", "fig3",  "fig5",  "fig6",  "fig7",   "fig8L",  "fig8R", "fig9",
                                                   "fig10", "fig11", "fig12", "fig13", "fig14a", "fig14b", "fig14c"};
    return names;
}

std::vector<PresetCase> preset_cases(const std::string& name) {
    std::vector<PresetCase> out;
    if (name == "fig2") {
        for (double psi : {0.5, 0.9, 1.1, 1.5, 2.0}) out.push_back({tag("psi", psi), make_scenario(2.0, psi, 10.0, 1.0)});
    } else if (name == "fig3") {
        for (double psi : {1.1, 0.1}) {
            for (double we : {1.5, 2.0, 5.0, 10.0}) {
                out.push_back({tag("psi", psi) + tag("_omega_e", we), make_scenario(we, psi, 10.0, 1.0)});
            }
        }
    } else if (name == "fig5") {
        for (double psi : {1.1, 0.9}) {
            out.push_back({tag("isoso_psi", psi), make_scenario(2.0, psi, 10.0, 1e-3, {Analysis::Isoso})});
        }
        out.push_back({"U1", expansion_case(0.3, 1e-2, 1e-2, "U1")});
        out.back().scenario.analyses.push_back(Analysis::Perturbation);
        out.push_back({"U2a", expansion_case(10.0, 1.0 / 1.01, 0.1, "U2a")});
        out.push_back({"U2b", expansion_case(10.0, 1.0 / 1.1, 1e-2, "U2b")});
    } else if (name == "fig6") {
        out.push_back({"C1plus", expansion_case(5.0, 0.1, 1.1, "C1plus")});
        out.push_back({"C1minus", expansion_case(5.0, 0.1, 0.9, "C1minus")});
        out.push_back({"C2plus", expansion_case(5.0, 1.0 / 1.1, 1.1, "C2plus")});
        out.push_back({"C2minus", expansion_case(5.0, 1.0 / 1.1, 0.9, "C2minus")});
    } else if (name == "fig7") {
        out.push_back({"O1a", expansion_case(0.2, 1e-2, 10.0, "O1a")});
        out.push_back({"O1b", expansion_case(0.2, 0.1, 100.0, "O1b")});
        out.push_back({"O2", expansion_case(2.0, 1.0 / 1.1, 10.0, "O2")});
    } else if (name == "fig8L" || name == "fig8R" || name == "fig9") {
        const double tau = name == "fig8L" ? 50.0 : 10.0;
        Scenario s = make_scenario(2.0, 0.9, 1.0, tau, {Analysis::Adiabatic});
        s.order = name == "fig8L" ? 0 : 1;
        // Ten samples per period of the fast mode keep the long adiabatic runs compact.
        s.integrator.sample_dt = 0.2;
        s.integrator.end_policy = EndPolicy::CouplingCutoff;
        out.push_back({tag("tau", tau), s});
    } else if (name == "fig10") {
        Scenario a = make_scenario(1000.0, 7.0, 0.1, 1e-5, {Analysis::Isoso, Analysis::Perturbation});
        Scenario c = make_scenario(100.0, 1.1, 0.5, 5e-5, {Analysis::Isoso, Analysis::Perturbation});
        out.push_back({"O1a_prime", a});
        out.push_back({"C1plus_prime", c});
    } else if (name == "fig14a") {
        out = markov_cases(10.0, 0.5, 0.01, 1.0);
    } else if (name == "fig14b") {
        out = markov_cases(2.0, 1.1, 1.0, 5.0);
    } else if (name == "fig14c") {
        out = markov_cases(10.0, 1.1, 1.0, 5.0);
    } else if (name != "fig11" && name != "fig12" && name != "fig13") {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return out;
}

std::optional<SweepSpec> preset_sweep(const std::string& name) {
    SweepSpec spec;
    if (name == "fig11") {
        spec.base = make_scenario(2.0, 0.9, 0.1, 0.1);
        spec.reduction = Reduction::LatetimePurity;
        spec.axes = {{"T_omega", true, 1.0, 100.0, 5}, {"tau_over_t0", true, 0.1, 100.0, 16}};
    } else if (name == "fig12") {
        spec.base = make_scenario(2.0, 0.9, 1.0, 1.0);
        spec.reduction = Reduction::Slope;
        spec.axes = {{"tau_over_t0", true, 4.0, 20.0, 9}};
    } else if (name == "fig13") {
        spec.base = make_scenario(2.0, 0.9, 1.0, 1.0);
        spec.reduction = Reduction::Threshold;
        spec.axes = {{"tau_over_t0", true, 1.0, 10.0, 10}};
        spec.t_omega = SweepAxis{"T_omega", true, 0.1, 1000.0, 25};
        spec.criterion = 0.01;
    } else {
        preset_cases(name);
        return std::nullopt;
    }
    return spec;
}

Json run_preset(const std::string& name, const std::string& out_dir, unsigned workers) {
    const std::vector<PresetCase> cases = preset_cases(name);
    const std::string root = join_path(out_dir, name);
    ensure_writable_dir(root);
    Json j;
    j["schema"] = kJsonSchema;
    j["preset"] = name;
    Json runs = Json::object();
    for (const auto& c : cases) {
        Scenario s = c.scenario;
        s.out_dir = join_path(root, c.id);
        s.workers = workers;
        runs[c.id] = run_scenario(s).summary;
    }
    if (!cases.empty()) j["cases"] = runs;
    if (auto spec = preset_sweep(name)) {
        spec->workers = workers;
        const SweepResult r = run_sweep(*spec);
        write_csv(join_path(root, "sweep.csv"), r.table);
        j["sweep"] = r.summary;
    }
    write_json(join_path(root, "summary.json"), j);
    return j;
}

}  // namespace gaussdyn
