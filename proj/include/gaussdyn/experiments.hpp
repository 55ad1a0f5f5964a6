#pragma once

// Scenario runs, sweeps, the regime phase diagram and the named figure presets.
// Every output is a pure function of its inputs: worker counts and timing never
// reach a CSV.

#include <optional>
#include <string>
#include <vector>

#include "gaussdyn/config.hpp"
#include "gaussdyn/report.hpp"
#include "gaussdyn/transport.hpp"

namespace gaussdyn {

// CSV headers shared with downstream plotting.
inline const std::vector<std::string> kTrajectoryHeader = {"t",   "s11", "s12", "s22", "e11", "e12",     "e22",
                                                           "c11", "c12", "c21", "c22", "purity_s", "xi"};
inline const std::vector<std::string> kMarkovHeader = {"t",      "purity",     "lambda_minus", "lambda_plus",
                                                       "v_bures", "v_bures_fd", "surrogate",    "cp_flag"};
inline const std::vector<std::string> kScanHeader = {"tau_over_t0", "T_omega_thr", "slope_fit", "r_squared"};

CsvTable trajectory_table(const Trajectory& tr);

// Invariant residuals over a trajectory.
struct InvariantReport {
    double max_det_error = 0.0;
    double max_purity_mismatch = 0.0;
    double min_symplectic_eigenvalue = 1.0;
};
InvariantReport check_invariants(const Trajectory& tr);

// Non-Markovianity audit: det B must be negative wherever the coupling is on and
// |sigma_SE,11| > 1e-10.
struct NoiseAudit {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double max_det_B = -std::numeric_limits<double>::infinity();
};
NoiseAudit audit_noise(const Trajectory& tr, const ScenarioParams& p);

// Parameters, derived quantities, regime label, gamma_min, gamma_inf and invariants.
Json scenario_summary(const Scenario& s, const Trajectory& tr);

// Per-analysis tables. Each returns its CSV and fills its block of the summary.
// isoso: `t,purity_analytic[,purity_expansion]` with the expansion evaluated inside
// the window and nan outside it.
CsvTable isoso_table(const Scenario& s, const Trajectory& tr, Json& summary);
// perturb: `t,purity_exact,purity_o2,purity_o2_isoso` on at most 200 rows.
CsvTable perturbation_table(const Scenario& s, const Trajectory& tr, Json& summary);
// adiabatic: `t,purity_exact,purity_lo` plus `delta_gamma1,purity_nlo,Itilde_omega,
// Itilde_theta` at order 1. Smooth subcritical scenarios only.
CsvTable adiabatic_table(const Scenario& s, const Trajectory& tr, Json& summary);
CsvTable markov_table(const Scenario& s, const Trajectory& tr, Json& summary);

struct ScenarioRun {
    Trajectory trajectory;
    Json summary;
};

// Integrates, runs the requested analyses and writes trajectory.csv, one CSV per
// analysis and summary.json into s.out_dir.
ScenarioRun run_scenario(const Scenario& s);

struct SweepResult {
    CsvTable table;
    Json summary;
};

// latetime_purity: one row per grid cell, first axis outermost, columns
// `<axes>,gamma_inf,impurity`. slope: `tau_over_t0,impurity,slope,below_floor`.
// threshold: the scan header, fit repeated per row.
SweepResult run_sweep(const SweepSpec& spec);

// Regime classification of a (w, psi) grid. Cells: `w,psi,label,g_p,perturbative,
// supercritical,near_critical`; contour: `w,psi_critical,psi_gp_0.1`.
struct PhaseDiagram {
    CsvTable cells;
    CsvTable contour;
    Json summary;
};

// w in (0, 1] and psi in (0, 100]; InvalidArgument otherwise.
PhaseDiagram phase_diagram(const SweepAxis& w_axis, const SweepAxis& psi_axis, const RegimeThresholds& th = {});

struct LabelledPoint {
    std::string name;
    double w;
    double psi;
    // Label the classifier must assign.
    std::string regime;
};
// Parameter-space points of the regime expansions, with omega_s = 1.
const std::vector<LabelledPoint>& labelled_points();

// Preset names in the order they are run by `preset all`.
const std::vector<std::string>& preset_names();

// A preset trajectory case with its own output subdirectory.
struct PresetCase {
    std::string id;
    Scenario scenario;
};

// Trajectory cases of a preset; empty for the sweep-only presets (fig11, fig12,
// fig13). Throws ConfigError for an unknown name.
std::vector<PresetCase> preset_cases(const std::string& name);
// Sweep of a sweep-only preset.
std::optional<SweepSpec> preset_sweep(const std::string& name);

// Runs every case and sweep of the preset under out_dir/<name>/ and returns the
// combined summary.
Json run_preset(const std::string& name, const std::string& out_dir, unsigned workers = 1);

}  // namespace gaussdyn
