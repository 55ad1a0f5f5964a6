#include "gaussdyn/isoso.hpp"

#include <cmath>

#include "gaussdyn/errors.hpp"

namespace gaussdyn {

namespace {

using lcplx = std::complex<long double>;

struct Window {
    AdiabaticFrame frame;
    // Complex normal frequencies; w1 = i |w1| above criticality.
    lcplx w[2];
    long double wabs[2];
    // Rows of the rotation x_i = sum_I rot[i][I] x_I.
    long double rot[2][2];
};

Window window(const ScenarioParams& p) {
    p.validate();
    if (std::abs(p.psi() - 1.0) < 1e-8) {
        throw CriticalPoint("coupling within 1e-8 of the critical value");
    }
    Window win;
    win.frame = adiabatic_frame_at_xi(p.xi0, p.omega_s, p.omega_e);
    const long double c = std::cos(static_cast<long double>(win.frame.theta));
    const long double s = std::sin(static_cast<long double>(win.frame.theta));
    win.rot[0][0] = c;
    win.rot[0][1] = -s;
    win.rot[1][0] = s;
    win.rot[1][1] = c;
    win.wabs[0] = win.frame.omega1_abs;
    win.wabs[1] = win.frame.omega2;
    win.w[0] = win.frame.hyperbolic ? lcplx(0.0L, win.wabs[0]) : lcplx(win.wabs[0], 0.0L);
    win.w[1] = lcplx(win.wabs[1], 0.0L);
    return win;
}

// Coefficients of a_I (first) and a_I^dagger (second) in b_i (sign = +1) or c_i (sign = -1):
// b_i, c_i = sqrt(|w_i|/2) (x_i +- i p_i / w_i) at dt = 0, with
// x_I(-t0) = (e^{i w_I t0} a_I + e^{-i w_I t0} a_I^dagger) / sqrt(2 w_I).
void ladder_coeffs(const Window& win, const ScenarioParams& p, int i, int sign, lcplx a[2], lcplx ad[2]) {
    const long double om[2] = {p.omega_s, p.omega_e};
    for (int I = 0; I < 2; ++I) {
        const long double pre = win.rot[i][I] * std::sqrt(win.wabs[i] / 2.0L) / std::sqrt(2.0L * om[I]);
        const lcplx ratio = lcplx(om[I], 0.0L) / win.w[i];
        const lcplx phase = std::polar(1.0L, om[I] * static_cast<long double>(p.t0));
        a[I] = pre * (1.0L + static_cast<long double>(sign) * ratio) * phase;
        ad[I] = pre * (1.0L - static_cast<long double>(sign) * ratio) * std::conj(phase);
    }
}

struct LadderTable {
    // Rows: b_1, b_2, c_1, c_2. Columns: a_S, a_E (a) and a_S^dagger, a_E^dagger (ad).
    lcplx a[4][2];
    lcplx ad[4][2];
};

LadderTable ladder_table(const Window& win, const ScenarioParams& p) {
    LadderTable t;
    for (int i = 0; i < 2; ++i) {
        ladder_coeffs(win, p, i, +1, t.a[i], t.ad[i]);
        ladder_coeffs(win, p, i, -1, t.a[2 + i], t.ad[2 + i]);
    }
    return t;
}

// <O_k O_l> on the incoming vacuum: only a_I a_I^dagger contributes.
lcplx vacuum_pair(const LadderTable& t, int k, int l) {
    return t.a[k][0] * t.ad[l][0] + t.a[k][1] * t.ad[l][1];
}

cplx to_c(lcplx z) { return {static_cast<double>(z.real()), static_cast<double>(z.imag())}; }

// sigma_S inside the window from the mode functions and the b/c correlators.
Mat2 window_sigma_s(const Window& win, const LadderTable& tab, long double dt) {
    // x_S = sum_k X_k O_k and p_S = sum_k P_k O_k over O = (b_1, b_2, c_1, c_2).
    lcplx X[4], P[4];
    const long double csys[2] = {win.rot[0][0], win.rot[1][0]};
    const lcplx I(0.0L, 1.0L);
    for (int i = 0; i < 2; ++i) {
        const long double norm = 1.0L / std::sqrt(2.0L * win.wabs[i]);
        const lcplx u = std::exp(-I * win.w[i] * dt) * norm;
        const lcplx v = std::exp(I * win.w[i] * dt) * norm;
        X[i] = csys[i] * u;
        X[2 + i] = csys[i] * v;
        P[i] = csys[i] * (-I * win.w[i]) * u;
        P[2 + i] = csys[i] * (I * win.w[i]) * v;
    }
    lcplx xx = 0, pp = 0, xp = 0, px = 0;
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
            const lcplx m = vacuum_pair(tab, k, l);
            xx += X[k] * X[l] * m;
            pp += P[k] * P[l] * m;
            xp += X[k] * P[l] * m;
            px += P[k] * X[l] * m;
        }
    const long double s11 = 2.0L * xx.real();
    const long double s22 = 2.0L * pp.real();
    const long double s12 = (xp + px).real();
    return Mat2::symmetric(static_cast<double>(s11), static_cast<double>(s12), static_cast<double>(s22));
}

}  // namespace

BogoliubovSet bogoliubov_coeffs(const ScenarioParams& p) {
    const Window win = window(p);
    const LadderTable t = ladder_table(win, p);
    BogoliubovSet set;
    set.delta = win.frame.hyperbolic ? 1 : 0;
    for (int i = 0; i < 2; ++i)
        for (int I = 0; I < 2; ++I) {
            set.alpha[i][I] = to_c(t.a[i][I]);
            set.beta[i][I] = to_c(t.ad[i][I]);
            set.companion_alpha[i][I] = to_c(t.a[2 + i][I]);
            set.companion_beta[i][I] = to_c(t.ad[2 + i][I]);
        }
    return set;
}

cplx commutator_bc(const BogoliubovSet& s, int i, int j) {
    cplx r = 0;
    for (int I = 0; I < 2; ++I) {
        r += s.alpha[i][I] * s.companion_beta[j][I] - s.beta[i][I] * s.companion_alpha[j][I];
    }
    return r;
}

cplx commutator_b_bdag(const BogoliubovSet& s, int i, int j) {
    cplx r = 0;
    for (int I = 0; I < 2; ++I) {
        r += s.alpha[i][I] * std::conj(s.alpha[j][I]) - s.beta[i][I] * std::conj(s.beta[j][I]);
    }
    return r;
}

BCorrelators b_correlators(const BogoliubovSet& s) {
    BCorrelators c;
    auto pair = [](const std::array<cplx, 2>& a, const std::array<cplx, 2>& ad) { return a[0] * ad[0] + a[1] * ad[1]; };
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            c.bb[i][j] = pair(s.alpha[i], s.beta[j]);
            c.bc[i][j] = pair(s.alpha[i], s.companion_beta[j]);
            c.cb[i][j] = pair(s.companion_alpha[i], s.beta[j]);
            c.cc[i][j] = pair(s.companion_alpha[i], s.companion_beta[j]);
        }
    return c;
}

Mat2 isoso_sigma_s(double t, const ScenarioParams& p) {
    if (t <= -p.t0) {
        p.validate();
        return Mat2::diag(1.0 / p.omega_s, p.omega_s);
    }
    const Window win = window(p);
    const LadderTable tab = ladder_table(win, p);
    const double dt = std::min(t, p.t0) + p.t0;
    return window_sigma_s(win, tab, dt);
}

double isoso_purity(double t, const ScenarioParams& p) {
    if (p.xi0 == 0.0 || t <= -p.t0) {
        p.validate();
        return 1.0;
    }
    return purity_from_block(isoso_sigma_s(t, p));
}

std::string to_string(ExpansionCase c) {
    switch (c) {
        case ExpansionCase::U1: return "U1";
        case ExpansionCase::U2a: return "U2a";
        case ExpansionCase::U2b: return "U2b";
        case ExpansionCase::C1: return "C1";
        case ExpansionCase::C2: return "C2";
        case ExpansionCase::O1a: return "O1a";
        case ExpansionCase::O1b: return "O1b";
        case ExpansionCase::O2: return "O2";
    }
    return "?";
}

ExpansionCase parse_expansion_case(const std::string& name) {
    std::string n = name;
    for (const char* suffix : {"plus", "minus", "+", "-"}) {
        const std::string s(suffix);
        if (n.size() > s.size() && n.compare(n.size() - s.size(), s.size(), s) == 0) {
            n.erase(n.size() - s.size());
            break;
        }
    }
    for (ExpansionCase c : {ExpansionCase::U1, ExpansionCase::U2a, ExpansionCase::U2b, ExpansionCase::C1,
                            ExpansionCase::C2, ExpansionCase::O1a, ExpansionCase::O1b, ExpansionCase::O2}) {
        if (to_string(c) == n) return c;
    }
    throw InvalidArgument("unknown expansion case: " + name);
}

ExpansionCase expansion_for(const RegimeLabel& label) { return parse_expansion_case(label.label); }

double regime_purity(ExpansionCase c, double dt, const ScenarioParams& p) {
    if (dt < 0.0) {
        throw InvalidArgument("regime_purity needs dt >= 0");
    }
    p.validate();
    const AdiabaticFrame f = adiabatic_frame_at_xi(p.xi0, p.omega_s, p.omega_e);
    const cplx w1 = f.hyperbolic ? cplx(0.0, f.omega1_abs) : cplx(f.omega1_abs, 0.0);
    const double w2 = f.omega2;
    const double w = p.w();
    const double psi = p.psi();
    const double dpsi = 1.0 - psi;
    const double a1 = f.omega1_abs * dt;
    const double c2 = std::cos(2.0 * w2 * dt), s2 = std::sin(2.0 * w2 * dt);
    // Hyperbolic functions of a1 carried as cosh(k a1) e^{-2 a1}, finite for every dt >= 0.
    const double e1 = std::exp(-a1), e2 = e1 * e1, e3 = e2 * e1, e4 = e2 * e2;
    const double g = e2;  // the common scale e^{-2 a1}
    const double ch1 = 0.5 * (e1 + e3), sh1 = 0.5 * (e1 - e3);
    const double ch2 = 0.5 * (1.0 + e4), sh2 = 0.5 * (1.0 - e4);
    // Inner determinants are linear in the scaled functions, so gamma = e^{-a1} / sqrt(scaled inner).
    auto from_scaled = [&](double inner_scaled) { return e1 / std::sqrt(inner_scaled); };
    auto sq = [](cplx z) { return z * z; };
    switch (c) {
        case ExpansionCase::U1:
            return 1.0 - 2.0 * w * psi * psi * sq(std::sin(0.5 * (w1 + w2) * dt)).real();
        case ExpansionCase::U2a:
            return 1.0 - psi * psi / 16.0 *
                             (3.0 - 2.0 * std::cos(2.0 * w1 * dt) - 2.0 * c2 + std::cos(2.0 * (w2 - w1) * dt)).real();
        case ExpansionCase::U2b:
            return 1.0 - 0.5 * psi * psi * sq(std::sin(0.5 * (w1 + w2) * dt)).real();
        case ExpansionCase::C1:
        case ExpansionCase::C2: {
            // Real continuations: sin^2(w1 dt), sin(w1 dt)/sqrt(dpsi), cos(w1 dt), cos(2 w1 dt),
            // sin(2 w1 dt)/sqrt(2 dpsi). All stay real across the critical point.
            double one, s1sq, s1r, c1, c21, s21r;
            if (f.hyperbolic) {
                const double r = std::sqrt(-dpsi);
                one = g;
                s1sq = -0.25 * (1.0 - e2) * (1.0 - e2);
                s1r = sh1 / r;
                c1 = ch1;
                c21 = ch2;
                s21r = sh2 / (std::sqrt(2.0) * r);
            } else {
                const double x = f.omega1_abs * dt;
                one = 1.0;
                s1sq = std::sin(x) * std::sin(x);
                s1r = std::sin(x) / std::sqrt(dpsi);
                c1 = std::cos(x);
                c21 = std::cos(2.0 * x);
                s21r = std::sin(2.0 * x) / std::sqrt(2.0 * dpsi);
            }
            double inner;
            if (c == ExpansionCase::C1) {
                inner = one + w / (2.0 * dpsi) * s1sq + std::sqrt(2.0) * w * s1r * std::sin(w2 * dt) +
                        w / 8.0 * (9.0 * one + 7.0 * c21 - 16.0 * c1 * std::cos(w2 * dt));
            } else {
                inner = s1sq * (3.0 - c2) / (8.0 * dpsi) + s21r * s2 / 8.0 +
                        (23.0 * one + c21 * (11.0 - 3.0 * c2) + c2 * one) / 32.0;
            }
            return f.hyperbolic ? from_scaled(inner) : 1.0 / std::sqrt(inner);
        }
        case ExpansionCase::O1a:
            return from_scaled(g + w * psi * psi * (0.5 * ch2 - 2.0 * ch1 * std::cos(w2 * dt) + 1.5 * g));
        case ExpansionCase::O1b: {
            const double cw = std::cos(w2 * dt);
            const double inner = psi / 8.0 * (ch2 + sh2 * s2 - c2 * g) +
                                 1.0 / (16.0 * w) * (ch2 - 2.0 * ch2 * c2 + c2 * g) +
                                 (5.0 * g + c2 * g + 2.0 * ch2 * cw * cw) / 8.0 +
                                 1.0 / (128.0 * psi * w * w) *
                                     (3.0 * c2 * g - 3.0 * ch2 + 32.0 * sh1 * std::sin(w2 * dt) - 13.0 * sh2 * s2);
            return from_scaled(inner);
        }
        case ExpansionCase::O2: {
            const double inner =
                psi / 8.0 * (ch2 + sh2 * s2 - c2 * g) + (5.0 * g + 2.0 * c2 * g + ch2 * (2.0 - c2)) / 8.0;
            return from_scaled(inner);
        }
    }
    throw InvalidArgument("unknown expansion case");
}

std::optional<double> decoherence_rate(const ScenarioParams& p) {
    if (!(p.xi0 > p.xi_c())) return std::nullopt;
    return std::sqrt(-normal_modes(p.xi0, p.omega_s, p.omega_e).omega1_sq);
}

}  // namespace gaussdyn
