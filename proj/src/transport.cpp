#include "gaussdyn/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gaussdyn/errors.hpp"
#include "propagator.hpp"

namespace gaussdyn {

namespace {

constexpr std::array<std::array<int, 2>, 10> kPackedIndex = {
    {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}}};

// Packed right-hand side: with K = Omega H, d sigma = K sigma + (K sigma)^T.
template <class T>
inline std::array<T, 10> packed_rhs(const std::array<T, 10>& v, T xi, T ws2, T we2) {
    static constexpr int idx[4][4] = {{0, 1, 2, 3}, {1, 4, 5, 6}, {2, 5, 7, 8}, {3, 6, 8, 9}};
    T m[4][4];
    for (int j = 0; j < 4; ++j) {
        const T s0 = v[idx[0][j]], s1 = v[idx[1][j]], s2 = v[idx[2][j]], s3 = v[idx[3][j]];
        m[0][j] = s1;
        m[1][j] = -ws2 * s0 - xi * s2;
        m[2][j] = s3;
        m[3][j] = -xi * s0 - we2 * s2;
    }
    std::array<T, 10> d{};
    for (std::size_t k = 0; k < 10; ++k) {
        const int i = kPackedIndex[k][0];
        const int j = kPackedIndex[k][1];
        d[k] = m[i][j] + m[j][i];
    }
    return d;
}

// Determinant of the packed symmetric matrix, by complementary 2x2 minors.
template <class T>
T packed_det(const std::array<T, 10>& v) {
    static constexpr int idx[4][4] = {{0, 1, 2, 3}, {1, 4, 5, 6}, {2, 5, 7, 8}, {3, 6, 8, 9}};
    auto a = [&](int i, int j) { return v[idx[i][j]]; };
    auto m01 = [&](int c1, int c2) { return a(0, c1) * a(1, c2) - a(0, c2) * a(1, c1); };
    auto m23 = [&](int c1, int c2) { return a(2, c1) * a(3, c2) - a(2, c2) * a(3, c1); };
    return m01(0, 1) * m23(2, 3) - m01(0, 2) * m23(1, 3) + m01(0, 3) * m23(1, 2) + m01(1, 2) * m23(0, 3) -
           m01(1, 3) * m23(0, 2) + m01(2, 3) * m23(0, 1);
}

template <class T>
std::array<T, 10> to_working(const Packed& v) {
    std::array<T, 10> r{};
    for (std::size_t k = 0; k < 10; ++k) r[k] = static_cast<T>(v[k]);
    return r;
}

template <class T>
Packed to_double(const std::array<T, 10>& v) {
    Packed r{};
    for (std::size_t k = 0; k < 10; ++k) r[k] = static_cast<double>(v[k]);
    return r;
}

double peak_omega2(const ScenarioParams& p) {
    return std::sqrt(normal_modes(p.xi0, p.omega_s, p.omega_e).omega2_sq);
}

std::vector<double> output_grid(const ScenarioParams& p, const IntegratorConfig& cfg, double ta, double tb,
                                 const std::vector<double>& breakpoints) {
    std::vector<double> grid;
    if (!cfg.sample_times.empty()) {
        for (double t : cfg.sample_times) {
            if (t > ta && t <= tb) grid.push_back(t);
        }
    } else {
        const double dt = cfg.sample_dt.value_or(2.0 * std::numbers::pi / peak_omega2(p) / 40.0);
        const auto n = static_cast<long long>(std::floor((tb - ta) / dt));
        for (long long k = 1; k <= n; ++k) {
            grid.push_back(ta + static_cast<double>(k) * dt);
        }
    }
    for (double b : breakpoints) {
        if (b > ta && b < tb) grid.push_back(b);
    }
    grid.push_back(tb);
    std::sort(grid.begin(), grid.end());
    // Merge near-coincident points, keeping exact breakpoints and the end time.
    std::vector<double> out;
    const double tol = 1e-12 * std::max(1.0, std::max(std::abs(ta), std::abs(tb)));
    for (double t : grid) {
        const bool pinned = t == tb || std::find(breakpoints.begin(), breakpoints.end(), t) != breakpoints.end();
        if (!out.empty() && t - out.back() <= tol) {
            if (pinned) out.back() = t;
            continue;
        }
        out.push_back(t);
    }
    return out;
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) {
        throw InvalidArgument("integrator tolerances must be positive");
    }
    if (!(max_step > 0.0)) {
        throw InvalidArgument("max_step must be positive");
    }
    if (sample_dt && !(*sample_dt > 0.0)) {
        throw InvalidArgument("sample_dt must be positive");
    }
    if (!(cutoff_threshold > 0.0)) {
        throw InvalidArgument("cutoff threshold must be positive");
    }
}

Packed pack(const Mat4& s) {
    Packed v{};
    for (std::size_t k = 0; k < 10; ++k) {
        v[k] = s(kPackedIndex[k][0], kPackedIndex[k][1]);
    }
    return v;
}

Mat4 unpack(const Packed& v) {
    Mat4 s;
    for (std::size_t k = 0; k < 10; ++k) {
        const auto i = static_cast<std::size_t>(kPackedIndex[k][0]);
        const auto j = static_cast<std::size_t>(kPackedIndex[k][1]);
        s(i, j) = v[k];
        s(j, i) = v[k];
    }
    return s;
}

CovarianceState vacuum_initial(const ScenarioParams& p) {
    CovarianceState st;
    st.t = p.t_in();
    st.sigma(0, 0) = 1.0 / p.omega_s;
    st.sigma(1, 1) = p.omega_s;
    st.sigma(2, 2) = 1.0 / p.omega_e;
    st.sigma(3, 3) = p.omega_e;
    return st;
}

Mat4 transport_rhs_at_xi(const Mat4& sigma, double xi, const ScenarioParams& p) {
    return unpack(packed_rhs<double>(pack(sigma), xi, p.omega_s * p.omega_s, p.omega_e * p.omega_e));
}

Mat4 transport_rhs(const CovarianceState& state, const ScenarioParams& p) {
    return transport_rhs_at_xi(state.sigma, coupling_xi(state.t, p), p);
}

Mat2 system_block(const CovarianceState& state) { return state.sigma.block(0, 0); }
Mat2 environment_block(const CovarianceState& state) { return state.sigma.block(1, 1); }
Mat2 cross_block(const CovarianceState& state) { return state.sigma.block(0, 1); }

double end_time(const ScenarioParams& p, const IntegratorConfig& cfg) {
    if (cfg.t_end) {
        return *cfg.t_end;
    }
    if (p.profile == ProfileKind::IsosoTopHat) {
        return p.t0;
    }
    if (cfg.end_policy == EndPolicy::FixedWindow) {
        return -p.t_in();
    }
    const double target = cfg.cutoff_threshold * p.xi_c();
    if (p.xi0 <= target) {
        return p.t0;
    }
    double lo = 0.0;
    double hi = p.t0 + p.tau;
    while (coupling_xi(hi, p) >= target) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (coupling_xi(mid, p) >= target ? lo : hi) = mid;
    }
    return hi;
}

Method resolve_method(const ScenarioParams& p, const IntegratorConfig& cfg) {
    if (cfg.method != Method::Auto) {
        return cfg.method;
    }
    return p.xi0 > p.xi_c() ? Method::Symplectic : Method::RungeKutta;
}

Precision resolve_precision(const ScenarioParams& p, const IntegratorConfig& cfg) {
    if (cfg.precision != Precision::Auto) {
        return cfg.precision;
    }
    if (resolve_method(p, cfg) == Method::RungeKutta) {
        return Precision::Double;
    }
    // Rounding in det(sigma) is amplified by the squared growth of the propagator.
    const double growth = 2.0 * std::sqrt(std::abs(normal_modes(p.xi0, p.omega_s, p.omega_e).omega1_sq)) * 2.0 * p.t0;
    if (growth <= 16.0) return Precision::Double;
    if (growth <= 23.0) return Precision::Extended;
    return Precision::Quad;
}

double step_cap(const ScenarioParams& p, const IntegratorConfig& cfg) {
    double cap = std::min(cfg.max_step, 0.05 * 2.0 * std::numbers::pi / peak_omega2(p));
    if (p.profile == ProfileKind::Smooth) {
        cap = std::min(cap, p.tau / 20.0);
    }
    return cap;
}

namespace {

struct Segments {
    std::vector<double> breakpoints;
    std::vector<double> edges;
    // Step cap per segment [edges[k], edges[k+1]].
    std::vector<double> caps;
    std::vector<double> grid;
};

// ISOSO segments split at the jumps. Smooth profiles split off the plateau
// |t| < t0 - 20 tau, where the coupling is constant to double precision and the
// ramp cap tau/20 is not needed.
Segments segments(const ScenarioParams& p, const IntegratorConfig& cfg, double ta, double t_end, bool sampled) {
    Segments s;
    std::vector<double> cuts;
    if (p.profile == ProfileKind::IsosoTopHat) {
        s.breakpoints = {-p.t0, p.t0};
        cuts = s.breakpoints;
    } else if (p.t0 - 20.0 * p.tau > 0.0) {
        cuts = {-(p.t0 - 20.0 * p.tau), p.t0 - 20.0 * p.tau};
    }
    if (sampled) {
        s.grid = output_grid(p, cfg, ta, t_end, s.breakpoints);
    }
    s.edges.push_back(ta);
    for (double b : cuts) {
        if (b > ta && b < t_end) s.edges.push_back(b);
    }
    s.edges.push_back(t_end);
    const double ramp_cap = step_cap(p, cfg);
    IntegratorConfig no_ramp = cfg;
    ScenarioParams flat = p;
    flat.profile = ProfileKind::IsosoTopHat;
    const double plateau_cap = step_cap(flat, no_ramp);
    for (std::size_t k = 0; k + 1 < s.edges.size(); ++k) {
        const double mid = 0.5 * (s.edges[k] + s.edges[k + 1]);
        const bool plateau = p.profile == ProfileKind::Smooth && std::abs(mid) < p.t0 - 20.0 * p.tau;
        s.caps.push_back(plateau ? plateau_cap : ramp_cap);
    }
    return s;
}

// Constant coupling on an ISOSO segment, read at its midpoint.
double segment_xi(const ScenarioParams& p, double a, double b) {
    const double mid = 0.5 * (a + b);
    return (mid > -p.t0 && mid < p.t0) ? p.xi0 : 0.0;
}

void push_sample(Trajectory& tr, const ScenarioParams& p, double t, const Mat4& sigma, double det_s, double det_e,
                 double det_sigma) {
    const double xi = coupling_xi(t, p);
    tr.rates.push_back(transport_rhs_at_xi(sigma, xi, p));
    tr.purity_s.push_back(purity_from_det(det_s));
    tr.purity_e.push_back(purity_from_det(det_e));
    tr.det_sigma.push_back(det_sigma);
    tr.det_s.push_back(det_s);
    tr.det_e.push_back(det_e);
    tr.xi.push_back(xi);
    tr.samples.push_back({t, sigma});
}

ode::StepControl step_control(const ScenarioParams& p, const IntegratorConfig& cfg) {
    ode::StepControl sc;
    sc.rtol = cfg.rtol;
    sc.atol = cfg.atol;
    sc.max_step = step_cap(p, cfg);
    return sc;
}

// Runge-Kutta transport of the 10 independent entries of sigma in precision T.
// When `trajectory` is null only the final state is produced.
template <class T>
CovarianceState run_rk(const ScenarioParams& p, const IntegratorConfig& cfg, double t_end, Trajectory* trajectory) {
    const CovarianceState init = vacuum_initial(p);
    const double ta = init.t;
    ode::StepControl sc = step_control(p, cfg);
    const Segments seg = segments(p, cfg, ta, t_end, trajectory != nullptr);

    using State = std::array<T, 10>;
    const T ws2 = static_cast<T>(p.omega_s) * static_cast<T>(p.omega_s);
    const T we2 = static_cast<T>(p.omega_e) * static_cast<T>(p.omega_e);
    auto record = [&](double t, const State& v) {
        if (!trajectory) return;
        push_sample(*trajectory, p, t, unpack(to_double(v)), static_cast<double>(v[0] * v[4] - v[1] * v[1]),
                    static_cast<double>(v[7] * v[9] - v[8] * v[8]), static_cast<double>(packed_det(v)));
    };

    State y = to_working<T>(pack(init.sigma));
    record(ta, y);
    double h = 0.0;
    ode::Stats stats;
    for (std::size_t s = 0; s + 1 < seg.edges.size(); ++s) {
        const double a = seg.edges[s];
        const double b = seg.edges[s + 1];
        if (!(b > a)) continue;
        sc.max_step = seg.caps[s];
        if (p.profile == ProfileKind::Smooth) {
            auto f = [&](double t, const State& v) {
                return packed_rhs<T>(v, static_cast<T>(coupling_xi(t, p)), ws2, we2);
            };
            y = ode::integrate<10, T>(f, a, y, b, seg.grid, sc, record, h, &stats);
        } else {
            const T xi_seg = static_cast<T>(segment_xi(p, a, b));
            auto f = [&](double, const State& v) { return packed_rhs<T>(v, xi_seg, ws2, we2); };
            y = ode::integrate<10, T>(f, a, y, b, seg.grid, sc, record, h, &stats);
        }
    }
    if (trajectory) trajectory->stats = stats;
    return {t_end, unpack(to_double(y))};
}

// sigma = S diag(d) S^T together with the block determinants, all in precision T.
// Block determinants come from Cauchy-Binet sums over 2x2 minors of S, which
// stay accurate when S is exponentially large.
template <class T>
struct FromPropagator {
    Mat4 sigma;
    double det_s;
    double det_e;
    double det_sigma;
};

template <class T>
FromPropagator<T> evaluate_propagator(const detail::M4<T>& s, const std::array<T, 4>& d) {
    FromPropagator<T> out;
    T sig[16];
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            T v = T(0);
            for (int k = 0; k < 4; ++k) v += s[4 * i + k] * d[k] * s[4 * j + k];
            sig[4 * i + j] = v;
            sig[4 * j + i] = v;
        }
    for (int k = 0; k < 16; ++k) out.sigma.m[static_cast<std::size_t>(k)] = static_cast<double>(sig[k]);
    auto minor = [&](int r, int i, int j) { return s[4 * r + i] * s[4 * (r + 1) + j] - s[4 * r + j] * s[4 * (r + 1) + i]; };
    T ds = T(0), de = T(0);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const T w = d[i] * d[j];
            const T ms = minor(0, i, j);
            const T me = minor(2, i, j);
            ds += w * ms * ms;
            de += w * me * me;
        }
    out.det_s = static_cast<double>(ds);
    out.det_e = static_cast<double>(de);
    const T det_map = detail::lu_det<T, 4>(s);
    out.det_sigma = static_cast<double>(d[0] * d[1] * d[2] * d[3] * det_map * det_map);
    return out;
}

// Gauss-Legendre propagation of the phase-space map in precision T.
template <class T>
CovarianceState run_symplectic(const ScenarioParams& p, const IntegratorConfig& cfg, double t_end,
                               Trajectory* trajectory) {
    const CovarianceState init = vacuum_initial(p);
    const double ta = init.t;
    ode::StepControl sc = step_control(p, cfg);
    const Segments seg = segments(p, cfg, ta, t_end, trajectory != nullptr);

    const std::array<T, 4> d = {static_cast<T>(init.sigma(0, 0)), static_cast<T>(init.sigma(1, 1)),
                                static_cast<T>(init.sigma(2, 2)), static_cast<T>(init.sigma(3, 3))};
    const T ws2 = static_cast<T>(p.omega_s) * static_cast<T>(p.omega_s);
    const T we2 = static_cast<T>(p.omega_e) * static_cast<T>(p.omega_e);
    auto record = [&](double t, const detail::M4<T>& s) {
        if (!trajectory) return;
        const FromPropagator<T> e = evaluate_propagator<T>(s, d);
        push_sample(*trajectory, p, t, e.sigma, e.det_s, e.det_e, e.det_sigma);
    };

    detail::M4<T> s = detail::identity4<T>();
    record(ta, s);
    double h = 0.0;
    ode::Stats stats;
    for (std::size_t k = 0; k + 1 < seg.edges.size(); ++k) {
        const double a = seg.edges[k];
        const double b = seg.edges[k + 1];
        if (!(b > a)) continue;
        sc.max_step = seg.caps[k];
        if (p.profile == ProfileKind::Smooth) {
            auto kof = [&](double t) { return detail::generator<T>(static_cast<T>(coupling_xi(t, p)), ws2, we2); };
            s = detail::propagate_symplectic<T>(kof, a, s, b, seg.grid, sc, record, h, &stats);
        } else {
            const detail::M4<T> kseg = detail::generator<T>(static_cast<T>(segment_xi(p, a, b)), ws2, we2);
            auto kof = [&](double) { return kseg; };
            s = detail::propagate_symplectic<T>(kof, a, s, b, seg.grid, sc, record, h, &stats);
        }
    }
    if (trajectory) trajectory->stats = stats;
    return {t_end, evaluate_propagator<T>(s, d).sigma};
}

template <class T>
CovarianceState run_in(Method m, const ScenarioParams& p, const IntegratorConfig& cfg, double t_end,
                       Trajectory* trajectory) {
    return m == Method::Symplectic ? run_symplectic<T>(p, cfg, t_end, trajectory)
                                   : run_rk<T>(p, cfg, t_end, trajectory);
}

CovarianceState run(const ScenarioParams& p, const IntegratorConfig& cfg, double t_end, Trajectory* trajectory) {
    p.validate();
    cfg.validate();
    if (t_end < p.t_in()) {
        throw InvalidArgument("end time precedes the initial time");
    }
    const Method m = resolve_method(p, cfg);
    switch (resolve_precision(p, cfg)) {
        case Precision::Double:
            return run_in<double>(m, p, cfg, t_end, trajectory);
        case Precision::Extended:
            return run_in<long double>(m, p, cfg, t_end, trajectory);
        case Precision::Quad:
            return run_in<__float128>(m, p, cfg, t_end, trajectory);
        case Precision::Auto:
            break;
    }
    throw InvalidArgument("unresolved precision");
}

}  // namespace

Trajectory integrate(const ScenarioParams& p, const IntegratorConfig& cfg) {
    Trajectory tr;
    run(p, cfg, end_time(p, cfg), &tr);
    return tr;
}

CovarianceState propagate(const ScenarioParams& p, const IntegratorConfig& cfg, double t) {
    return run(p, cfg, t, nullptr);
}

Trajectory isoso_reference_run(const ScenarioParams& p, const IntegratorConfig& cfg) {
    ScenarioParams q = p;
    q.profile = ProfileKind::Smooth;
    q.tau = 1e-4 * p.t0;
    return integrate(q, cfg);
}

CovarianceState Trajectory::at(double t) const {
    if (samples.empty()) {
        throw InvalidArgument("empty trajectory");
    }
    if (t <= samples.front().t) return samples.front();
    if (t >= samples.back().t) return samples.back();
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const CovarianceState& s) { return v < s.t; });
    const std::size_t i1 = static_cast<std::size_t>(it - samples.begin());
    const std::size_t i0 = i1 - 1;
    const double t0 = samples[i0].t;
    const double h = samples[i1].t - t0;
    const double s = (t - t0) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    CovarianceState out;
    out.t = t;
    out.sigma = samples[i0].sigma * h00 + rates[i0] * (h10 * h) + samples[i1].sigma * h01 + rates[i1] * (h11 * h);
    return out;
}

double impurity_from_cross_block(const CovarianceState& state) {
    const double d = cross_block(state).det();
    return -std::expm1(-0.5 * std::log1p(-d));
}

}  // namespace gaussdyn
