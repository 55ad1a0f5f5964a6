#include "gaussdyn/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gaussdyn/errors.hpp"
#include "gaussdyn/isoso.hpp"

namespace gaussdyn {

namespace {

using KeyValues = std::map<std::string, std::string>;

const std::set<std::string> kScenarioKeys = {
    "omega_s", "omega_e", "xi0", "psi", "t0", "tau", "profile",
    "rtol", "atol", "max_step", "sample_dt", "t_end", "end_policy", "cutoff_threshold", "precision", "method",
    "psi_low", "psi_high", "w_split", "analyses", "out_dir", "surrogate", "order", "expansion", "workers"};

const std::set<std::string> kSweepKeys = {"reduction", "axis", "axis2", "t_omega", "criterion"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

KeyValues parse_lines(const std::string& text, const std::set<std::string>& allowed) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!allowed.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
        if (!kv.emplace(key, value).second) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
    }
    if (kv.empty()) throw ConfigError("configuration contains no keys");
    return kv;
}

double to_number(const std::string& key, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError("'" + key + "' is not a finite number: " + value);
    }
    return v;
}

unsigned to_count(const std::string& key, const std::string& value) {
    const double v = to_number(key, value);
    if (v < 1.0 || v != std::floor(v) || v > 1e6) throw ConfigError("'" + key + "' must be a positive integer");
    return static_cast<unsigned>(v);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

Analysis parse_analysis(const std::string& name) {
    if (name == "isoso") return Analysis::Isoso;
    if (name == "perturb") return Analysis::Perturbation;
    if (name == "adiabatic") return Analysis::Adiabatic;
    if (name == "markov") return Analysis::Markov;
    throw ConfigError("unknown analysis '" + name + "'");
}

// Keys in `supplied` come from a sweep axis: a missing value is tolerated and the
// parameters are validated per grid cell instead.
Scenario build_scenario(const KeyValues& kv, const std::set<std::string>& supplied) {
    auto get = [&](const std::string& k) -> std::optional<std::string> {
        const auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    auto num = [&](const std::string& k) -> std::optional<double> {
        const auto v = get(k);
        if (!v) return std::nullopt;
        return to_number(k, *v);
    };

    Scenario s;
    ScenarioParams& p = s.params;
    if (const auto prof = get("profile")) {
        if (*prof == "smooth") p.profile = ProfileKind::Smooth;
        else if (*prof == "isoso") p.profile = ProfileKind::IsosoTopHat;
        else throw ConfigError("profile must be smooth or isoso");
    }
    p.omega_s = num("omega_s").value_or(1.0);
    const auto omega_e = num("omega_e");
    if (!omega_e && !supplied.count("omega_e")) throw ConfigError("missing omega_e");
    p.omega_e = omega_e.value_or(2.0 * p.omega_s);
    const auto t0 = num("t0");
    if (!t0 && !supplied.count("t0")) throw ConfigError("missing t0");
    p.t0 = t0.value_or(1.0);
    const auto tau = num("tau");
    if (tau) {
        p.tau = *tau;
    } else if (p.profile == ProfileKind::Smooth && !supplied.count("tau")) {
        throw ConfigError("missing tau for the smooth profile");
    }

    const auto xi0 = num("xi0");
    const auto psi = num("psi");
    const bool coupling_swept = supplied.count("xi0") || supplied.count("psi");
    if (xi0 && psi) throw ConfigError("give exactly one of xi0 and psi");
    if (coupling_swept && (xi0 || psi)) throw ConfigError("the coupling is swept; drop xi0/psi from the base");
    if (!xi0 && !psi && !coupling_swept) throw ConfigError("give exactly one of xi0 and psi");
    if (xi0) p.xi0 = *xi0;
    if (psi) {
        p.xi0 = *psi * p.xi_c();
        s.psi = *psi;
    }
    if (supplied.empty()) {
        try {
            p.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }

    IntegratorConfig& c = s.integrator;
    if (const auto v = num("rtol")) c.rtol = *v;
    if (const auto v = num("atol")) c.atol = *v;
    if (const auto v = num("max_step")) c.max_step = *v;
    if (const auto v = num("sample_dt")) c.sample_dt = *v;
    if (const auto v = num("t_end")) c.t_end = *v;
    if (const auto v = num("cutoff_threshold")) c.cutoff_threshold = *v;
    if (const auto v = get("end_policy")) {
        if (*v == "fixed") c.end_policy = EndPolicy::FixedWindow;
        else if (*v == "cutoff") c.end_policy = EndPolicy::CouplingCutoff;
        else throw ConfigError("end_policy must be fixed or cutoff");
    }
    if (const auto v = get("precision")) {
        if (*v == "auto") c.precision = Precision::Auto;
        else if (*v == "double") c.precision = Precision::Double;
        else if (*v == "extended") c.precision = Precision::Extended;
        else if (*v == "quad") c.precision = Precision::Quad;
        else throw ConfigError("precision must be auto, double, extended or quad");
    }
    if (const auto v = get("method")) {
        if (*v == "auto") c.method = Method::Auto;
        else if (*v == "rk") c.method = Method::RungeKutta;
        else if (*v == "symplectic") c.method = Method::Symplectic;
        else throw ConfigError("method must be auto, rk or symplectic");
    }
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }

    if (const auto v = num("psi_low")) s.thresholds.psi_low = *v;
    if (const auto v = num("psi_high")) s.thresholds.psi_high = *v;
    if (const auto v = num("w_split")) s.thresholds.w_split = *v;
    if (!(s.thresholds.psi_low > 0.0 && s.thresholds.psi_low < 1.0 && s.thresholds.psi_high > 1.0 &&
          s.thresholds.w_split > 0.0 && s.thresholds.w_split < 1.0)) {
        throw ConfigError("regime thresholds need 0 < psi_low < 1 < psi_high and 0 < w_split < 1");
    }
    if (const auto v = get("analyses")) {
        for (const auto& name : split(*v, ',')) {
            const Analysis a = parse_analysis(name);
            if (!s.wants(a)) s.analyses.push_back(a);
        }
    }
    if (const auto v = get("out_dir")) s.out_dir = *v;
    if (const auto v = get("surrogate")) {
        try {
            s.surrogate = parse_surrogate(*v);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    if (const auto v = get("order")) {
        if (*v == "0") s.order = 0;
        else if (*v == "1") s.order = 1;
        else throw ConfigError("order must be 0 or 1");
    }
    if (const auto v = get("expansion")) {
        try {
            parse_expansion_case(*v);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
        s.expansion = *v;
    }
    if (const auto v = get("workers")) s.workers = to_count("workers", *v);
    return s;
}

}  // namespace

std::string to_string(Analysis a) {
    switch (a) {
        case Analysis::Isoso: return "isoso";
        case Analysis::Perturbation: return "perturb";
        case Analysis::Adiabatic: return "adiabatic";
        case Analysis::Markov: return "markov";
    }
    return "unknown";
}

bool Scenario::wants(Analysis a) const {
    return std::find(analyses.begin(), analyses.end(), a) != analyses.end();
}

Scenario parse_scenario(const std::string& text) {
    return build_scenario(parse_lines(text, kScenarioKeys), {});
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::vector<double> SweepAxis::values() const {
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(count - 1);
        v[i] = log ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
    }
    v.front() = lo;
    v.back() = hi;
    return v;
}

SweepAxis parse_axis(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 5) throw ConfigError("axis must read name:linear|log:lo:hi:count");
    SweepAxis a;
    a.name = parts[0];
    if (parts[1] == "log") a.log = true;
    else if (parts[1] != "linear") throw ConfigError("axis grid must be linear or log");
    a.lo = to_number("axis lo", parts[2]);
    a.hi = to_number("axis hi", parts[3]);
    a.count = to_count("axis count", parts[4]);
    if (a.count == 1 ? a.hi != a.lo : !(a.hi > a.lo)) throw ConfigError("axis bounds must be ordered");
    if (a.log && !(a.lo > 0.0)) throw ConfigError("log axis needs positive bounds");
    return a;
}

std::string to_string(Reduction r) {
    switch (r) {
        case Reduction::LatetimePurity: return "latetime_purity";
        case Reduction::Threshold: return "threshold";
        case Reduction::Slope: return "slope";
    }
    return "unknown";
}

SweepSpec parse_sweep_spec(const std::string& text) {
    std::set<std::string> allowed = kScenarioKeys;
    allowed.insert(kSweepKeys.begin(), kSweepKeys.end());
    KeyValues kv = parse_lines(text, allowed);

    SweepSpec spec;
    const auto red = kv.find("reduction");
    if (red == kv.end()) throw ConfigError("missing reduction");
    if (red->second == "latetime_purity") spec.reduction = Reduction::LatetimePurity;
    else if (red->second == "threshold") spec.reduction = Reduction::Threshold;
    else if (red->second == "slope") spec.reduction = Reduction::Slope;
    else throw ConfigError("reduction must be latetime_purity, threshold or slope");

    for (const char* key : {"axis", "axis2"}) {
        const auto it = kv.find(key);
        if (it != kv.end()) spec.axes.push_back(parse_axis(it->second));
    }
    if (spec.axes.empty()) throw ConfigError("missing axis");
    if (spec.axes.size() == 2 && spec.axes[0].name == spec.axes[1].name) throw ConfigError("axes must differ");
    static const std::set<std::string> sweepable = {"omega_s", "omega_e", "xi0", "psi", "t0", "tau",
                                                   "tau_over_t0", "T_omega"};
    std::set<std::string> supplied;
    for (const auto& a : spec.axes) {
        if (!sweepable.count(a.name)) throw ConfigError("cannot sweep '" + a.name + "'");
        supplied.insert(a.name == "tau_over_t0" ? "tau" : a.name == "T_omega" ? "omega_e" : a.name);
    }
    for (const auto& a : spec.axes) {
        if (a.name == "T_omega" && (kv.count("omega_e") || !kv.count("psi") || supplied.count("omega_s"))) {
            throw ConfigError("a T_omega axis needs psi, a fixed omega_s and no omega_e");
        }
        if (a.name == "omega_e" && supplied.count("T_omega")) throw ConfigError("omega_e and T_omega conflict");
    }
    if (supplied.count("xi0") && supplied.count("psi")) throw ConfigError("sweep at most one of xi0 and psi");
    if (spec.reduction != Reduction::LatetimePurity) {
        if (spec.axes.size() != 1 || spec.axes[0].name != "tau_over_t0") {
            throw ConfigError(to_string(spec.reduction) + " sweeps a single tau_over_t0 axis");
        }
    }
    if (spec.reduction == Reduction::Threshold) {
        const auto it = kv.find("t_omega");
        if (it == kv.end()) throw ConfigError("threshold reduction needs a t_omega axis");
        spec.t_omega = parse_axis(it->second);
        // T_omega fixes omega_e cell by cell.
        if (kv.count("omega_e")) throw ConfigError("omega_e is derived from t_omega in a threshold scan");
        if (!kv.count("psi")) throw ConfigError("threshold scan needs psi");
        supplied.insert("omega_e");
    } else if (kv.count("t_omega")) {
        throw ConfigError("t_omega applies to the threshold reduction only");
    }
    if (const auto it = kv.find("criterion"); it != kv.end()) {
        spec.criterion = to_number("criterion", it->second);
        if (!(spec.criterion > 0.0)) throw ConfigError("criterion must be positive");
    }
    for (const auto& k : kSweepKeys) kv.erase(k);
    spec.base = build_scenario(kv, supplied);
    spec.workers = spec.base.workers;
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path) { return parse_sweep_spec(read_file(path)); }

}  // namespace gaussdyn
