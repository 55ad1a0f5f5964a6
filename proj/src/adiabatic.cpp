#include "gaussdyn/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gaussdyn/errors.hpp"
#include "gaussdyn/parallel.hpp"

namespace gaussdyn {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

AdiabaticFrame subcritical_frame(double t, const ScenarioParams& p) {
    const AdiabaticFrame f = adiabatic_frame(t, p);
    if (f.omega1_sq <= 0.0) {
        throw SupercriticalExcursion("slow normal mode is unstable at t = " + std::to_string(t));
    }
    return f;
}

void require_subcritical(const ScenarioParams& p) {
    p.validate();
    if (p.xi0 >= p.xi_c()) {
        throw SupercriticalExcursion("adiabatic expansion needs xi0 < xi_c");
    }
}

// Widest panel that keeps at least eight per fastest period.
double panel_width(const ScenarioParams& p) {
    const double w2 = std::sqrt(normal_modes(p.xi0, p.omega_s, p.omega_e).omega2_sq);
    double h = 2.0 * std::numbers::pi / w2 / 8.0;
    if (p.profile == ProfileKind::Smooth) h = std::min(h, 0.25 * p.tau);
    return h;
}

struct PhasePair {
    double w1 = 0.0, w2 = 0.0;
};

// Fixed Kronrod 15-point rule for both phase increments on a short interval.
PhasePair phase_increment(const ScenarioParams& p, double a, double b) {
    using quad_detail::wgk;
    using quad_detail::xgk;
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    PhasePair r;
    auto add = [&](double t, double w) {
        const NormalModes nm = normal_modes(coupling_xi(t, p), p.omega_s, p.omega_e);
        r.w1 += w * std::sqrt(nm.omega1_sq);
        r.w2 += w * std::sqrt(nm.omega2_sq);
    };
    add(c, wgk[7]);
    for (int j = 0; j < 7; ++j) {
        add(c - h * xgk[j], wgk[j]);
        add(c + h * xgk[j], wgk[j]);
    }
    r.w1 *= h;
    r.w2 *= h;
    return r;
}

PhasePair adaptive_phase_increment(const ScenarioParams& p, double a, double b, const QuadratureConfig& q) {
    if (b <= a) return {};
    auto w = [&](double t) {
        const NormalModes nm = normal_modes(coupling_xi(t, p), p.omega_s, p.omega_e);
        if (nm.omega1_sq <= 0.0) {
            throw SupercriticalExcursion("slow normal mode is unstable at t = " + std::to_string(t));
        }
        return nm;
    };
    QuadratureConfig tight = q;
    tight.rel_tol = std::min(q.rel_tol, 1e-12);
    tight.abs_tol = std::min(q.abs_tol, 1e-14 * (b - a));
    const double h = panel_width(p);
    return {integrate_adaptive([&](double t) { return std::sqrt(w(t).omega1_sq); }, a, b, tight, h).value,
            integrate_adaptive([&](double t) { return std::sqrt(w(t).omega2_sq); }, a, b, tight, h).value};
}

// Integrands of the cumulative sums: f1 cos 2W1, f1 sin 2W1, f2 cos 2W2, f2 sin 2W2,
// g cos(W1 + W2), g sin(W1 + W2).
using Six = std::array<double, 6>;

Six integrands(const ScenarioParams& p, double t, const PhasePair& w) {
    const AdiabaticFrame f = subcritical_frame(t, p);
    const double w1 = std::sqrt(f.omega1_sq);
    const double f1 = 2.0 * f.beta1;
    const double f2 = 2.0 * f.beta2;
    const double g = f.theta_dot * (std::sqrt(w1 / f.omega2) + std::sqrt(f.omega2 / w1));
    const double ph = w.w1 + w.w2;
    return {f1 * std::cos(2.0 * w.w1), f1 * std::sin(2.0 * w.w1), f2 * std::cos(2.0 * w.w2),
            f2 * std::sin(2.0 * w.w2), g * std::cos(ph), g * std::sin(ph)};
}

}  // namespace

PhaseAccumulator accumulate_phases(const ScenarioParams& p, const std::vector<double>& grid,
                                   const QuadratureConfig& q) {
    p.validate();
    q.validate();
    if (!std::is_sorted(grid.begin(), grid.end())) {
        throw InvalidArgument("phase grid must be non-decreasing");
    }
    PhaseAccumulator acc;
    acc.t = grid;
    acc.W1.reserve(grid.size());
    acc.W2.reserve(grid.size());
    const double t_in = p.t_in();
    double prev = t_in;
    PhasePair w;
    for (double t : grid) {
        if (t > prev) {
            const PhasePair d = adaptive_phase_increment(p, prev, t, q);
            w.w1 += d.w1;
            w.w2 += d.w2;
            prev = t;
        }
        acc.W1.push_back(w.w1);
        acc.W2.push_back(w.w2);
    }
    return acc;
}

double purity_adiabatic_lo(double t, const ScenarioParams& p) {
    p.validate();
    const AdiabaticFrame f = adiabatic_frame_at_xi(coupling_xi(t, p), p.omega_s, p.omega_e);
    if (std::abs(f.omega1_sq) < 1e-12 * p.omega_s * p.omega_s) {
        throw CriticalPoint("slow normal mode frequency vanishes");
    }
    if (f.omega1_sq < 0.0) {
        throw SupercriticalExcursion("adiabatic purity needs a stable slow mode");
    }
    const double s2 = std::sin(2.0 * f.theta);
    const double a = f.omega1_abs / f.omega2;
    // 2 - a - 1/a = -(1 - a)^2 / a <= 0, so the bracket is >= 1.
    const double bracket = 1.0 + 0.25 * s2 * s2 * (1.0 - a) * (1.0 - a) / a;
    return 1.0 / std::sqrt(bracket);
}

struct AdiabaticExpansion::Table {
    ScenarioParams p;
    QuadratureConfig q;
    double t_in = 0.0;
    double t_max = 0.0;
    double span = 1.0;
    std::vector<double> edges;
    std::vector<PhasePair> phase;
    std::vector<Six> cumulative;

    // Vector Gauss-Kronrod on [a, b] with phases W(a) = wa, bisected until every
    // component meets the tolerance.
    Six panel(double a, double b, const PhasePair& wa, int depth) const {
        using quad_detail::wg;
        using quad_detail::wgk;
        using quad_detail::xgk;
        const double c = 0.5 * (a + b);
        const double h = 0.5 * (b - a);
        Six kron{}, gauss{};
        auto node = [&](double x, double wk, double wgauss) {
            const PhasePair d = phase_increment(p, a, x);
            const Six v = integrands(p, x, {wa.w1 + d.w1, wa.w2 + d.w2});
            for (int k = 0; k < 6; ++k) {
                kron[k] += wk * v[k];
                gauss[k] += wgauss * v[k];
            }
        };
        node(c, wgk[7], wg[3]);
        for (int j = 0; j < 7; ++j) {
            const double wgauss = j % 2 == 1 ? wg[j / 2] : 0.0;
            node(c - h * xgk[j], wgk[j], wgauss);
            node(c + h * xgk[j], wgk[j], wgauss);
        }
        double err = 0.0, mag = 0.0;
        for (int k = 0; k < 6; ++k) {
            kron[k] *= h;
            err = std::max(err, std::abs(kron[k] - gauss[k] * h));
            mag = std::max(mag, std::abs(kron[k]));
        }
        const double tol = std::max(q.abs_tol * (b - a) / span, q.rel_tol * mag);
        if (err <= tol || depth >= q.max_depth) {
            if (err > tol) throw QuadratureNoConvergence("adiabatic integrals did not converge");
            return kron;
        }
        const PhasePair dm = phase_increment(p, a, c);
        const Six l = panel(a, c, wa, depth + 1);
        const Six r = panel(c, b, {wa.w1 + dm.w1, wa.w2 + dm.w2}, depth + 1);
        Six s{};
        for (int k = 0; k < 6; ++k) s[k] = l[k] + r[k];
        return s;
    }

    std::size_t locate(double t) const {
        const auto it = std::upper_bound(edges.begin(), edges.end(), t);
        return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - edges.begin() - 1));
    }

    void check(double t) const {
        if (t > t_max + 1e-14 * std::max(1.0, std::abs(t_max))) {
            throw InvalidArgument("time beyond the tabulated range");
        }
    }

    struct Point {
        PhasePair w;
        Six sums{};
    };

    Point at(double t) const {
        check(t);
        if (t <= t_in) return {};
        const std::size_t k = std::min(locate(t), edges.size() - 2);
        Point pt;
        pt.w = phase[k];
        pt.sums = cumulative[k];
        if (t > edges[k]) {
            const Six part = panel(edges[k], t, phase[k], 0);
            const PhasePair d = phase_increment(p, edges[k], t);
            for (int i = 0; i < 6; ++i) pt.sums[i] += part[i];
            pt.w.w1 += d.w1;
            pt.w.w2 += d.w2;
        }
        return pt;
    }
};

AdiabaticExpansion::AdiabaticExpansion(const ScenarioParams& p, double t_max, const QuadratureConfig& q)
    : table_(std::make_unique<Table>()) {
    require_subcritical(p);
    q.validate();
    if (p.profile != ProfileKind::Smooth) {
        throw DerivativeUndefined("adiabatic corrections need a differentiable profile");
    }
    Table& tb = *table_;
    tb.p = p;
    tb.q = q;
    tb.t_in = p.t_in();
    tb.t_max = std::max(t_max, tb.t_in);
    tb.span = std::max(tb.t_max - tb.t_in, 1e-300);
    const double h = panel_width(p);
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((tb.t_max - tb.t_in) / h)));
    tb.edges.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        tb.edges[k] = k == n ? tb.t_max : tb.t_in + (tb.t_max - tb.t_in) * static_cast<double>(k) / static_cast<double>(n);
    }
    tb.phase.assign(n + 1, {});
    tb.cumulative.assign(n + 1, {});
    for (std::size_t k = 0; k < n; ++k) {
        const double a = tb.edges[k], b = tb.edges[k + 1];
        const Six s = tb.panel(a, b, tb.phase[k], 0);
        const PhasePair d = adaptive_phase_increment(p, a, b, q);
        tb.phase[k + 1] = {tb.phase[k].w1 + d.w1, tb.phase[k].w2 + d.w2};
        for (int i = 0; i < 6; ++i) tb.cumulative[k + 1][i] = tb.cumulative[k][i] + s[i];
    }
}

AdiabaticExpansion::~AdiabaticExpansion() = default;
AdiabaticExpansion::AdiabaticExpansion(AdiabaticExpansion&&) noexcept = default;
AdiabaticExpansion& AdiabaticExpansion::operator=(AdiabaticExpansion&&) noexcept = default;

double AdiabaticExpansion::phase1(double t) const { return table_->at(t).w.w1; }
double AdiabaticExpansion::phase2(double t) const { return table_->at(t).w.w2; }

NloIntegrals AdiabaticExpansion::integrals(double t) const {
    const Table::Point pt = table_->at(t);
    NloIntegrals r;
    if (t <= table_->t_in) return r;
    const double c1 = std::cos(2.0 * pt.w.w1), s1 = std::sin(2.0 * pt.w.w1);
    const double c2 = std::cos(2.0 * pt.w.w2), s2 = std::sin(2.0 * pt.w.w2);
    const double ph = pt.w.w1 + pt.w.w2;
    r.I_omega1 = c1 * pt.sums[0] + s1 * pt.sums[1];
    r.I_omega2 = c2 * pt.sums[2] + s2 * pt.sums[3];
    r.I_theta = std::cos(ph) * pt.sums[4] + std::sin(ph) * pt.sums[5];

    const AdiabaticFrame f = subcritical_frame(t, table_->p);
    const double w1 = std::sqrt(f.omega1_sq);
    const double sin2 = std::sin(2.0 * f.theta);
    r.Itilde_omega = 0.25 * sin2 * (f.omega2 / w1 - w1 / f.omega2) * (r.I_omega2 - r.I_omega1);
    r.Itilde_theta = (std::sqrt(w1 / f.omega2) + std::sqrt(f.omega2 / w1)) * r.I_theta;
    return r;
}

double AdiabaticExpansion::lo(double t) const { return purity_adiabatic_lo(t, table_->p); }

double AdiabaticExpansion::nlo_correction(double t) const {
    const NloIntegrals in = integrals(t);
    const double theta = adiabatic_frame_at_xi(coupling_xi(t, table_->p), table_->p.omega_s, table_->p.omega_e).theta;
    const double g0 = lo(t);
    return 0.5 * std::sin(2.0 * theta) * g0 * g0 * g0 * (in.Itilde_omega - in.Itilde_theta);
}

double purity_nlo_correction(double t, const ScenarioParams& p, const QuadratureConfig& q) {
    return AdiabaticExpansion(p, t, q).nlo_correction(t);
}

NloIntegrals nlo_contributions(double t, const ScenarioParams& p, const QuadratureConfig& q) {
    return AdiabaticExpansion(p, t, q).integrals(t);
}

namespace {

IntegratorConfig cutoff_config(const IntegratorConfig& cfg) {
    IntegratorConfig c = cfg;
    c.end_policy = EndPolicy::CouplingCutoff;
    c.cutoff_threshold = 1e-10;
    c.t_end.reset();
    return c;
}

}  // namespace

double latetime_impurity(const ScenarioParams& p, const IntegratorConfig& cfg) {
    p.validate();
    const IntegratorConfig c = cutoff_config(cfg);
    if (p.xi0 == 0.0) return 0.0;
    return impurity_from_cross_block(propagate(p, c, end_time(p, c)));
}

double latetime_purity(const ScenarioParams& p, const IntegratorConfig& cfg) {
    return 1.0 - latetime_impurity(p, cfg);
}

std::vector<double> log_log_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InvalidArgument("slope grids differ in length");
    const std::size_t n = x.size();
    if (n < 2) throw DerivativeUndefined("a slope needs at least two points");
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0)) throw InvalidArgument("log-log slope needs positive abscissae");
        if (i > 0 && !(x[i] > x[i - 1])) throw InvalidArgument("slope grid must be strictly increasing");
        lx[i] = std::log(x[i]);
        ly[i] = y[i] > 0.0 ? std::log(y[i]) : kNan;
    }
    std::vector<double> s(n);
    if (n == 2) {
        s[0] = s[1] = (ly[1] - ly[0]) / (lx[1] - lx[0]);
        return s;
    }
    s[0] = (ly[1] - ly[0]) / (lx[1] - lx[0]);
    s[n - 1] = (ly[n - 1] - ly[n - 2]) / (lx[n - 1] - lx[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = lx[i] - lx[i - 1];
        const double hr = lx[i + 1] - lx[i];
        s[i] = (hl * hl * (ly[i + 1] - ly[i]) + hr * hr * (ly[i] - ly[i - 1])) / (hl * hr * (hl + hr));
    }
    return s;
}

SlopeSeries nonanalyticity_slope(const ScenarioParams& p, const std::vector<double>& tau_over_t0,
                                 const IntegratorConfig& cfg, unsigned workers) {
    if (tau_over_t0.size() < 2) throw DerivativeUndefined("a slope needs at least two grid points");
    require_subcritical(p);
    SlopeSeries s;
    s.tau_over_t0 = tau_over_t0;
    s.impurity.resize(tau_over_t0.size());
    parallel_for(tau_over_t0.size(), workers, [&](std::size_t i) {
        ScenarioParams q = p;
        q.profile = ProfileKind::Smooth;
        q.tau = tau_over_t0[i] * p.t0;
        s.impurity[i] = latetime_impurity(q, cfg);
    });
    // Below the floor a value is kept only if a 100x tighter rerun reproduces it to 5%.
    IntegratorConfig tight = cfg;
    tight.rtol = cfg.rtol / 100.0;
    tight.atol = cfg.atol / 100.0;
    std::vector<char> resolved(s.impurity.size(), 1);
    parallel_for(s.impurity.size(), workers, [&](std::size_t i) {
        if (s.impurity[i] >= kImpurityFloor) return;
        ScenarioParams q = p;
        q.profile = ProfileKind::Smooth;
        q.tau = tau_over_t0[i] * p.t0;
        const double check = latetime_impurity(q, tight);
        resolved[i] = s.impurity[i] > 0.0 && std::abs(check - s.impurity[i]) <= 5e-2 * check;
        if (resolved[i]) s.impurity[i] = check;
    });
    std::vector<double> masked(s.impurity.size());
    s.below_floor.resize(s.impurity.size());
    for (std::size_t i = 0; i < masked.size(); ++i) {
        s.below_floor[i] = !resolved[i];
        masked[i] = s.below_floor[i] ? kNan : s.impurity[i];
    }
    s.slope = log_log_slopes(s.tau_over_t0, masked);
    return s;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("line fit needs two or more paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidArgument("line fit needs distinct abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
    return f;
}

ScenarioParams threshold_scenario(const ScenarioParams& base, double tau_over_t0, double T_omega) {
    if (!(T_omega > 0.0) || !(tau_over_t0 > 0.0)) {
        throw InvalidArgument("T_omega and tau/t0 must be positive");
    }
    const double we = base.omega_s * (1.0 + 1.0 / T_omega);
    return ScenarioParams::with_psi(base.omega_s, we, base.psi(), base.t0, tau_over_t0 * base.t0, ProfileKind::Smooth);
}

bool recoheres(const ScenarioParams& p, double criterion, const IntegratorConfig& cfg) {
    const Trajectory tr = integrate(p, cutoff_config(cfg));
    double min_purity = 1.0;
    for (double g : tr.purity_s) min_purity = std::min(min_purity, g);
    return impurity_from_cross_block(tr.samples.back()) < criterion * (1.0 - min_purity);
}

ThresholdCurve recoherence_threshold_scan(const ScenarioParams& base, const std::vector<double>& tau_over_t0,
                                          const std::vector<double>& T_omega_grid, const ThresholdConfig& cfg) {
    base.validate();
    if (tau_over_t0.empty() || T_omega_grid.empty()) throw InvalidArgument("threshold grids must be non-empty");
    if (!std::is_sorted(T_omega_grid.begin(), T_omega_grid.end())) {
        throw InvalidArgument("T_omega grid must be increasing");
    }
    if (!(base.psi() < 1.0)) throw SupercriticalExcursion("threshold scan needs subcritical coupling");
    if (!(cfg.criterion > 0.0) || !(cfg.resolution > 0.0)) {
        throw InvalidArgument("criterion and resolution must be positive");
    }
    ThresholdCurve curve;
    curve.points.resize(tau_over_t0.size());
    parallel_for(tau_over_t0.size(), cfg.workers, [&](std::size_t i) {
        const double r = tau_over_t0[i];
        auto ok = [&](double T) { return recoheres(threshold_scenario(base, r, T), cfg.criterion, cfg.integrator); };
        // Largest grid point meeting the criterion, then bisection towards the next one.
        std::ptrdiff_t last = -1;
        for (std::size_t k = 0; k < T_omega_grid.size(); ++k) {
            if (ok(T_omega_grid[k])) last = static_cast<std::ptrdiff_t>(k);
        }
        if (last < 0) {
            throw NoThreshold("no recoherence on the T_omega grid at tau/t0 = " + std::to_string(r));
        }
        const auto k = static_cast<std::size_t>(last);
        ThresholdPoint pt{r, T_omega_grid[k], k + 1 == T_omega_grid.size()};
        if (!pt.at_grid_max) {
            double lo = T_omega_grid[k], hi = T_omega_grid[k + 1];
            while ((hi - lo) > cfg.resolution * lo) {
                const double mid = std::sqrt(lo * hi);
                (ok(mid) ? lo : hi) = mid;
            }
            pt.T_omega_thr = lo;
        }
        curve.points[i] = pt;
    });
    if (curve.points.size() >= 2) {
        std::vector<double> x, y;
        for (const auto& pt : curve.points) {
            x.push_back(pt.tau_over_t0);
            y.push_back(pt.T_omega_thr);
        }
        curve.fit = fit_line(x, y);
    }
    return curve;
}

}  // namespace gaussdyn
