#pragma once

// Plain-text configuration: one `key = value` per line, `#` starts a comment.
// Unknown keys, repeated keys and files without any key are ConfigError.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gaussdyn/markov.hpp"
#include "gaussdyn/model.hpp"
#include "gaussdyn/transport.hpp"

namespace gaussdyn {

enum class Analysis { Isoso, Perturbation, Adiabatic, Markov };

std::string to_string(Analysis a);

struct Scenario {
    ScenarioParams params;
    // Set when the coupling was given as psi; sweeps over frequencies keep psi fixed.
    std::optional<double> psi;
    IntegratorConfig integrator;
    RegimeThresholds thresholds;
    // The trajectory is always produced; these add analysis CSVs.
    std::vector<Analysis> analyses;
    std::string out_dir = ".";
    Surrogate surrogate = Surrogate::DropNegative;
    // Adiabatic order: 0 (leading) or 1 (with the first non-adiabatic correction).
    int order = 1;
    // Regime expansion overlaid on the ISOSO CSV.
    std::optional<std::string> expansion;
    unsigned workers = 1;

    bool wants(Analysis a) const;
};

// Scenario keys: omega_s (default 1), omega_e, exactly one of xi0 | psi, t0, tau
// (smooth profile only, required there), profile = smooth | isoso.
// Integrator keys: rtol, atol, max_step, sample_dt, t_end, end_policy = fixed | cutoff,
// cutoff_threshold, precision = auto | double | extended | quad,
// method = auto | rk | symplectic.
// Other keys: psi_low, psi_high, w_split, analyses (comma list of isoso, perturb,
// adiabatic, markov), out_dir, surrogate, order, expansion, workers.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// name:linear|log:lo:hi:count. A single-point axis has lo == hi.
struct SweepAxis {
    std::string name;
    bool log = false;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;

    std::vector<double> values() const;
};

SweepAxis parse_axis(const std::string& text);

enum class Reduction { LatetimePurity, Threshold, Slope };

std::string to_string(Reduction r);

// Swept parameter names for latetime_purity: omega_s, omega_e, xi0, psi, t0, tau,
// tau_over_t0, T_omega (sets omega_e = omega_s (1 + 1/T_omega) at fixed psi).
// Threshold and slope sweep tau_over_t0 only.
struct SweepSpec {
    Scenario base;
    Reduction reduction = Reduction::LatetimePurity;
    std::vector<SweepAxis> axes;
    // Threshold reduction: T_omega grid and the recoherence criterion.
    std::optional<SweepAxis> t_omega;
    double criterion = 0.01;
    unsigned workers = 1;
};

// Scenario keys plus reduction, axis, axis2, t_omega, criterion (workers is shared).
SweepSpec parse_sweep_spec(const std::string& text);
SweepSpec load_sweep_spec(const std::string& path);

}  // namespace gaussdyn
