#include "gaussdyn/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gaussdyn/errors.hpp"
#include "gaussdyn/ode.hpp"
#include "gaussdyn/parallel.hpp"
#include "gaussdyn/quadrature.hpp"
#include "propagator.hpp"

namespace gaussdyn {

namespace {

Mat2 noise_from(const Mat4& sigma, double xi) {
    const double c11 = sigma(0, 2);
    const double c21 = sigma(1, 2);
    return Mat2::symmetric(0.0, -xi * c11, -2.0 * xi * c21);
}

// Free rotation exp(Omega H_S s).
Mat2 free_map(double omega, double s) {
    const double c = std::cos(omega * s);
    const double sn = std::sin(omega * s);
    return {c, sn / omega, -omega * sn, c};
}

// 10 packed entries of sigma, then X (4, row-major), then Y (3: 11, 12, 22).
using MapState = ode::Vec<17>;

}  // namespace

NoiseMatrix noise_B(const CovarianceState& state, const ScenarioParams& p) {
    const double xi = coupling_xi(state.t, p);
    NoiseMatrix n;
    n.B = noise_from(state.sigma, xi);
    const double c11 = state.sigma(0, 2);
    const double c21 = state.sigma(1, 2);
    // xi [-c21 -/+ r]; the root without cancellation comes first, the other from the product.
    const double r = std::hypot(c21, c11);
    const double prod = -xi * xi * c11 * c11;
    if (xi == 0.0 || (c11 == 0.0 && c21 == 0.0)) {
        n.lambda_minus = n.lambda_plus = 0.0;
    } else if (c21 >= 0.0) {
        n.lambda_minus = -xi * (c21 + r);
        n.lambda_plus = prod / n.lambda_minus;
    } else {
        n.lambda_plus = xi * (-c21 + r);
        n.lambda_minus = prod / n.lambda_plus;
    }
    return n;
}

Mat2 system_hamiltonian(const ScenarioParams& p) { return Mat2::diag(p.omega_s * p.omega_s, 1.0); }

Mat2 reduced_rhs(const Mat2& sigma_s, const Mat2& B, const Mat2& h_s) {
    const Mat2 om = omega2();
    return om * h_s * sigma_s - sigma_s * h_s * om + B;
}

double purity_rate(const Mat2& sigma_s, const Mat2& B) {
    const double gamma = purity_from_block(sigma_s);
    return -0.5 * gamma * (sigma_s.inverse() * B).trace();
}

MapPair map_pair_evolve(const ScenarioParams& p, double t_a, double t_b, const IntegratorConfig& cfg) {
    p.validate();
    CovarianceState start = vacuum_initial(p);
    if (t_a > start.t) start = propagate(p, cfg, t_a);
    start.t = t_a;
    return map_pair_evolve(p, start, t_b, cfg);
}

MapPair map_pair_evolve(const ScenarioParams& p, const CovarianceState& start, double t_b,
                        const IntegratorConfig& cfg) {
    p.validate();
    cfg.validate();
    MapPair out;
    out.t_a = start.t;
    out.t_b = t_b;
    if (!(t_b > start.t)) {
        if (t_b < start.t) throw InvalidArgument("map interval must be ordered");
        return out;
    }
    const Packed s0 = pack(start.sigma);
    MapState y{};
    std::copy(s0.begin(), s0.end(), y.begin());
    y[10] = 1.0;
    y[13] = 1.0;
    const Mat2 h = system_hamiltonian(p);
    const Mat2 k = omega2() * h;
    auto rhs = [&](double t, const MapState& v) {
        Packed ps;
        std::copy(v.begin(), v.begin() + 10, ps.begin());
        const Mat4 sigma = unpack(ps);
        const double xi = coupling_xi(t, p);
        const Packed ds = pack(transport_rhs_at_xi(sigma, xi, p));
        const Mat2 x{v[10], v[11], v[12], v[13]};
        const Mat2 yv = Mat2::symmetric(v[14], v[15], v[16]);
        const Mat2 dx = k * x;
        const Mat2 dy = reduced_rhs(yv, noise_from(sigma, xi), h);
        MapState d{};
        std::copy(ds.begin(), ds.end(), d.begin());
        d[10] = dx.a11, d[11] = dx.a12, d[12] = dx.a21, d[13] = dx.a22;
        d[14] = dy.a11, d[15] = dy.a12, d[16] = dy.a22;
        return d;
    };
    ode::StepControl sc;
    sc.rtol = cfg.rtol;
    sc.atol = cfg.atol;
    sc.max_step = std::min(cfg.max_step, step_cap(p, cfg));
    double h0 = 0.0;
    y = ode::integrate<17>(rhs, start.t, y, t_b, {}, sc, [](double, const MapState&) {}, h0);
    out.X = {y[10], y[11], y[12], y[13]};
    out.Y = Mat2::symmetric(y[14], y[15], y[16]);
    return out;
}

MapPair compose(const MapPair& earlier, const MapPair& later) {
    MapPair r;
    r.t_a = earlier.t_a;
    r.t_b = later.t_b;
    r.X = later.X * earlier.X;
    r.Y = later.X * earlier.Y * later.X.transpose() + later.Y;
    return r;
}

MapPair constant_noise_step(const Mat2& B, const ScenarioParams& p, double dt) {
    MapPair r;
    r.t_b = dt;
    if (dt == 0.0) return r;
    r.X = free_map(p.omega_s, dt);
    // Kronrod weights are positive, so Y stays a positive combination of X B X^T.
    using quad_detail::wgk;
    using quad_detail::xgk;
    const double c = 0.5 * dt, h = 0.5 * dt;
    auto term = [&](double s, double w) {
        const Mat2 x = free_map(p.omega_s, s);
        r.Y += (x * B * x.transpose()) * (w * h);
    };
    term(c, wgk[7]);
    for (int j = 0; j < 7; ++j) {
        term(c - h * xgk[j], wgk[j]);
        term(c + h * xgk[j], wgk[j]);
    }
    r.Y = Mat2::symmetric(r.Y.a11, 0.5 * (r.Y.a12 + r.Y.a21), r.Y.a22);
    return r;
}

CpResult cp_check(const MapPair& pair, double tol) {
    // X Omega X^T = det(X) Omega for 2x2, so the CP matrix is Y + (i/2)(det X - 1) Omega.
    const double g = 0.5 * (pair.X.det() - 1.0);
    const SymEigen2 e = eig_herm2(pair.Y.a11, 0.5 * (pair.Y.a12 + pair.Y.a21), -g, pair.Y.a22);
    CpResult r;
    r.min_eigenvalue = e.lambda_minus;
    r.completely_positive = e.lambda_minus >= -tol * std::max(1.0, frobenius_norm(pair.Y));
    return r;
}

namespace {

long double physical_det(const Mat2& s) {
    const long double d = static_cast<long double>(s.a11) * s.a22 - static_cast<long double>(s.a12) * s.a21;
    if (!(d >= 1.0L - 1e-9L)) {
        throw NonPhysicalState("covariance block violates the uncertainty bound");
    }
    return std::max(d, 1.0L);
}

}  // namespace

double gaussian_fidelity(const Mat2& s1, const Mat2& s2) {
    return static_cast<double>([&] {
        const long double d1 = physical_det(s1);
        const long double d2 = physical_det(s2);
        const long double a11 = static_cast<long double>(s1.a11) + s2.a11;
        const long double a12 = static_cast<long double>(s1.a12) + s2.a12;
        const long double a21 = static_cast<long double>(s1.a21) + s2.a21;
        const long double a22 = static_cast<long double>(s1.a22) + s2.a22;
        const long double sum_det = a11 * a22 - a12 * a21;
        const long double delta = (d1 - 1.0L) * (d2 - 1.0L);
        return std::min(1.0L, 2.0L / (std::sqrt(sum_det + delta) - std::sqrt(delta)));
    }());
}

double bures_distance(const Mat2& s1, const Mat2& s2) {
    // 1 - F evaluated before rounding to double keeps nearby states resolved.
    const long double d1 = physical_det(s1);
    const long double d2 = physical_det(s2);
    const long double a11 = static_cast<long double>(s1.a11) + s2.a11;
    const long double a12 = static_cast<long double>(s1.a12) + s2.a12;
    const long double a21 = static_cast<long double>(s1.a21) + s2.a21;
    const long double a22 = static_cast<long double>(s1.a22) + s2.a22;
    const long double delta = (d1 - 1.0L) * (d2 - 1.0L);
    const long double den = std::sqrt(a11 * a22 - a12 * a21 + delta) - std::sqrt(delta);
    const long double one_minus_f = std::max(0.0L, (den - 2.0L) / den);
    return static_cast<double>(std::sqrt(2.0L * one_minus_f));
}

std::string to_string(Surrogate s) {
    switch (s) {
        case Surrogate::DropNegative:
            return "drop-negative";
        case Surrogate::BestDecohering:
            return "best";
        case Surrogate::Unitary:
            return "unitary";
    }
    return "unknown";
}

Surrogate parse_surrogate(const std::string& name) {
    if (name == "drop-negative") return Surrogate::DropNegative;
    if (name == "best") return Surrogate::BestDecohering;
    if (name == "unitary") return Surrogate::Unitary;
    throw InvalidArgument("unknown surrogate '" + name + "'");
}

std::optional<Mat2> best_markovian_B(const Mat2& sigma_s, const Mat2& B) {
    const double gamma = purity_from_block(sigma_s);
    const double rate = purity_rate(sigma_s, B);
    if (rate > 0.0) return std::nullopt;
    return sigma_s * (-rate / gamma);
}

SurrogateNoise surrogate_noise(Surrogate s, const Mat2& sigma_s, const NoiseMatrix& noise) {
    SurrogateNoise r;
    switch (s) {
        case Surrogate::DropNegative:
            r.B_tilde = Mat2::diag(0.0, noise.lambda_plus);
            r.applied = Surrogate::DropNegative;
            break;
        case Surrogate::BestDecohering:
            if (auto b = best_markovian_B(sigma_s, noise.B)) {
                r.B_tilde = *b;
                r.applied = Surrogate::BestDecohering;
            }
            break;
        case Surrogate::Unitary:
            break;
    }
    return r;
}

namespace {

using Q = __float128;
using QState = ode::Vec<13, Q>;

// d sigma = K sigma + (K sigma)^T on the packed full state, then the surrogate block.
QState fd_rhs(double t, const QState& u, const ScenarioParams& p, Surrogate applied) {
    static constexpr int idx[4][4] = {{0, 1, 2, 3}, {1, 4, 5, 6}, {2, 5, 7, 8}, {3, 6, 8, 9}};
    static constexpr int pk[10][2] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}};
    const Q xi = coupling_xi(t, p);
    const Q ws2 = static_cast<Q>(p.omega_s) * p.omega_s;
    const Q we2 = static_cast<Q>(p.omega_e) * p.omega_e;
    Q m[4][4];
    for (int j = 0; j < 4; ++j) {
        m[0][j] = u[idx[1][j]];
        m[1][j] = -ws2 * u[idx[0][j]] - xi * u[idx[2][j]];
        m[2][j] = u[idx[3][j]];
        m[3][j] = -xi * u[idx[0][j]] - we2 * u[idx[2][j]];
    }
    QState d{};
    for (int k = 0; k < 10; ++k) d[k] = m[pk[k][0]][pk[k][1]] + m[pk[k][1]][pk[k][0]];

    // Noise from the exact cross block: B = -xi [[0, c11], [c11, 2 c21]].
    const Q c11 = u[2], c21 = u[5];
    const Q b12 = -xi * c11, b22 = -Q(2) * xi * c21;
    const Q s11 = u[10], s12 = u[11], s22 = u[12];
    Q t11 = 0, t12 = 0, t22 = 0;
    if (applied == Surrogate::DropNegative) {
        const Q r = detail::sqrt_of(c21 * c21 + c11 * c11);
        t22 = c21 <= Q(0) ? xi * (r - c21) : xi * xi * c11 * c11 / (xi * (c21 + r));
    } else if (applied == Surrogate::BestDecohering) {
        // -(gamma_dot / gamma) sigma = (1/2) Tr(sigma^{-1} B) sigma, kept only while decohering.
        const Q tr = (s11 * b22 - Q(2) * s12 * b12) / (s11 * s22 - s12 * s12);
        if (tr >= Q(0)) {
            t11 = tr / 2 * s11;
            t12 = tr / 2 * s12;
            t22 = tr / 2 * s22;
        }
    }
    // Omega H sigma - sigma H Omega + B_tilde with H = diag(wS^2, 1).
    d[10] = Q(2) * s12 + t11;
    d[11] = s22 - ws2 * s11 + t12;
    d[12] = -Q(2) * ws2 * s12 + t22;
    return d;
}

Q fd_bures_velocity(const CovarianceState& state, const ScenarioParams& p, Surrogate applied, double dt) {
    QState y{};
    const Packed s0 = pack(state.sigma);
    for (int k = 0; k < 10; ++k) y[k] = s0[k];
    y[10] = s0[0], y[11] = s0[1], y[12] = s0[4];
    ode::StepControl sc;
    sc.rtol = 1e-14;
    sc.atol = 1e-30;
    sc.min_step = 1e-18;
    double h = dt;
    y = ode::integrate<13, Q>([&](double t, const QState& u) { return fd_rhs(t, u, p, applied); }, state.t, y,
                              state.t + dt, {}, sc, [](double, const QState&) {}, h);
    // Bures distance between the exact block (entries 0, 1, 4) and the surrogate block.
    const Q a11 = y[0], a12 = y[1], a22 = y[4];
    const Q e11 = y[10], e12 = y[11], e22 = y[12];
    const Q d1 = std::max<Q>(a11 * a22 - a12 * a12, Q(1));
    const Q d2 = std::max<Q>(e11 * e22 - e12 * e12, Q(1));
    const Q sum = (a11 + e11) * (a22 + e22) - (a12 + e12) * (a12 + e12);
    const Q delta = (d1 - 1) * (d2 - 1);
    const Q den = detail::sqrt_of(sum + delta) - detail::sqrt_of(delta);
    const Q one_minus_f = std::max<Q>(Q(0), (den - 2) / den);
    return detail::sqrt_of(2 * one_minus_f) / dt;
}

}  // namespace

BuresVelocity bures_velocity(const CovarianceState& state, const ScenarioParams& p, Surrogate s) {
    BuresVelocity v;
    const Mat2 sig = system_block(state);
    const NoiseMatrix noise = noise_B(state, p);
    const SurrogateNoise sur = surrogate_noise(s, sig, noise);
    v.applied = sur.applied;

    const double d = sig.det();
    const double gamma = purity_from_det(d);
    const double tr = (sig.inverse() * (noise.B - sur.B_tilde)).trace();
    if (gamma >= 1.0 - kPureGuard) {
        v.pure_state_singularity = tr != 0.0;
        v.closed_form = tr != 0.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    } else {
        // det^2 - 1 = (det - 1)(det + 1) avoids cancellation near purity.
        v.closed_form = d / (2.0 * std::sqrt((d - 1.0) * (d + 1.0))) * std::abs(tr);
    }

    // Exact and surrogate reduced equations over one short step from the same
    // sigma_S, in quad precision: the two blocks differ only at O(dt).
    const double w2 = std::sqrt(normal_modes(coupling_xi(state.t, p), p.omega_s, p.omega_e).omega2_sq);
    const double dt = 1e-6 * 2.0 * std::numbers::pi / w2;
    v.finite_difference = static_cast<double>(fd_bures_velocity(state, p, sur.applied, dt));
    return v;
}

std::vector<MarkovSample> markov_analysis(const Trajectory& tr, const ScenarioParams& p, Surrogate s,
                                          unsigned workers) {
    std::vector<MarkovSample> out(tr.size());
    const double w2 = std::sqrt(normal_modes(p.xi0, p.omega_s, p.omega_e).omega2_sq);
    const double cp_dt = 1e-3 * 2.0 * std::numbers::pi / w2;
    parallel_for(tr.size(), workers, [&](std::size_t i) {
        const CovarianceState& st = tr.samples[i];
        MarkovSample m;
        m.t = st.t;
        m.purity = tr.purity_s[i];
        const NoiseMatrix n = noise_B(st, p);
        m.det_B = n.B.det();
        m.lambda_minus = n.lambda_minus;
        m.lambda_plus = n.lambda_plus;
        m.purity_rate = purity_rate(system_block(st), n.B);
        m.velocity = bures_velocity(st, p, s);
        m.cp_exact = cp_check(constant_noise_step(n.B, p, cp_dt)).completely_positive;
        out[i] = m;
    });
    return out;
}

}  // namespace gaussdyn
