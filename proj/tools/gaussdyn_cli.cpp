#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gaussdyn/config.hpp"
#include "gaussdyn/errors.hpp"
#include "gaussdyn/experiments.hpp"
#include "gaussdyn/isoso.hpp"
#include "gaussdyn/report.hpp"

using namespace gaussdyn;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::string config;
    std::string out;
    bool json = false;
    unsigned workers = 0;
};

Scenario load(const Common& c) {
    Scenario s = load_scenario(c.config);
    if (!c.out.empty()) s.out_dir = c.out;
    if (c.workers) s.workers = c.workers;
    return s;
}

void report(const Common& c, const Json& summary, const std::string& where) {
    if (c.json) {
        std::cout << summary.dump(2) << "\n";
    } else {
        std::cout << "wrote " << where << "\n";
    }
}

int run_with(const Common& c, Scenario s) {
    const ScenarioRun r = run_scenario(s);
    report(c, r.summary, s.out_dir);
    return 0;
}

// a:b:n (linear) or log:a:b:n.
SweepAxis grid_arg(const std::string& name, const std::string& text) {
    const bool log = text.rfind("log:", 0) == 0;
    const std::string body = log ? text.substr(4) : text;
    return parse_axis(name + (log ? ":log:" : ":linear:") + body);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian dynamics of two coupled oscillators"};
    app.require_subcommand(1);
    Common c;
    auto add_common = [&](CLI::App* sub, bool config) {
        if (config) sub->add_option("--config", c.config, "scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", c.out, "output directory");
        sub->add_flag("--json", c.json, "print the JSON summary on stdout");
        sub->add_option("--workers", c.workers, "worker threads");
    };

    auto* simulate = app.add_subcommand("simulate", "integrate a scenario and run its configured analyses");
    add_common(simulate, true);

    std::string expansion;
    auto* isoso = app.add_subcommand("isoso", "closed-form top-hat purity against the integrator");
    add_common(isoso, true);
    isoso->add_option("--expansion", expansion, "regime expansion to overlay (U1, U2a, ..., O2)");

    auto* perturb = app.add_subcommand("perturb", "second-order perturbative purity");
    add_common(perturb, true);

    int order = 1;
    auto* adiabatic = app.add_subcommand("adiabatic", "adiabatic expansion against the integrator");
    add_common(adiabatic, true);
    adiabatic->add_option("--order", order, "0 or 1")->check(CLI::IsMember({0, 1}));

    std::string surrogate = "drop-negative";
    auto* markov = app.add_subcommand("markov", "noise matrix, CP check and Bures velocity");
    add_common(markov, true);
    markov->add_option("--surrogate", surrogate, "drop-negative, best or unitary")
        ->check(CLI::IsMember({"drop-negative", "best", "unitary"}));

    std::string spec_path;
    auto* sweep = app.add_subcommand("sweep", "evaluate a reduction on a parameter grid");
    sweep->add_option("--spec", spec_path, "sweep specification")->required()->check(CLI::ExistingFile);
    add_common(sweep, false);

    std::string w_grid, psi_grid;
    auto* phase = app.add_subcommand("phase-diagram", "regime classification on a (w, psi) grid");
    phase->add_option("--w", w_grid, "a:b:n or log:a:b:n")->required();
    phase->add_option("--psi", psi_grid, "a:b:n or log:a:b:n")->required();
    add_common(phase, false);

    std::string preset_name;
    auto* preset = app.add_subcommand("preset", "run a figure preset (or 'all', or 'list')");
    preset->add_option("name", preset_name, "preset name")->required();
    add_common(preset, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*simulate) return run_with(c, load(c));
        if (*isoso) {
            Scenario s = load(c);
            s.analyses = {Analysis::Isoso};
            if (!expansion.empty()) {
                parse_expansion_case(expansion);
                s.expansion = expansion;
            }
            return run_with(c, s);
        }
        if (*perturb) {
            Scenario s = load(c);
            s.analyses = {Analysis::Perturbation};
            return run_with(c, s);
        }
        if (*adiabatic) {
            Scenario s = load(c);
            s.analyses = {Analysis::Adiabatic};
            s.order = order;
            return run_with(c, s);
        }
        if (*markov) {
            Scenario s = load(c);
            s.analyses = {Analysis::Markov};
            s.surrogate = parse_surrogate(surrogate);
            return run_with(c, s);
        }
        if (*sweep) {
            SweepSpec spec = load_sweep_spec(spec_path);
            if (c.workers) spec.workers = c.workers;
            const std::string dir = c.out.empty() ? spec.base.out_dir : c.out;
            ensure_writable_dir(dir);
            const SweepResult r = run_sweep(spec);
            write_csv(join_path(dir, "sweep.csv"), r.table);
            write_json(join_path(dir, "sweep.json"), r.summary);
            report(c, r.summary, dir);
            return 0;
        }
        if (*phase) {
            const std::string dir = c.out.empty() ? "." : c.out;
            ensure_writable_dir(dir);
            const PhaseDiagram d = phase_diagram(grid_arg("w", w_grid), grid_arg("psi", psi_grid));
            write_csv(join_path(dir, "phase_diagram.csv"), d.cells);
            write_csv(join_path(dir, "phase_contour.csv"), d.contour);
            write_json(join_path(dir, "phase_diagram.json"), d.summary);
            report(c, d.summary, dir);
            return 0;
        }
        if (*preset) {
            if (preset_name == "list") {
                for (const auto& n : preset_names()) std::cout << n << "\n";
                return 0;
            }
            const std::string dir = c.out.empty() ? "out" : c.out;
            const unsigned workers = c.workers ? c.workers : 1;
            if (preset_name == "all") {
                Json all = Json::object();
                for (const auto& n : preset_names()) all[n] = run_preset(n, dir, workers);
                report(c, all, dir);
                return 0;
            }
            report(c, run_preset(preset_name, dir, workers), join_path(dir, preset_name));
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
