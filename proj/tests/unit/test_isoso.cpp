#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "bridge.hpp"
#include "gaussdyn/errors.hpp"
#include "gaussdyn/isoso.hpp"
#include "gaussdyn/perturbation.hpp"
#include "gaussdyn/transport.hpp"

using namespace gaussdyn;

namespace {

using C = std::complex<double>;

// Coefficients of (b1, c1, b2, c2) over (a_S, a_E, a_S^dagger, a_E^dagger), from
// continuity of the rotated positions and momenta at the window start, solved as a
// dense linear system.
struct MatchedCoefficients {
    C coeff[4][4];  // [operator: b1, c1, b2, c2][basis]
};

MatchedCoefficients matching_oracle(double ws, double we, double xi, double t0) {
    const double tr = ws * ws + we * we;
    const double disc = std::sqrt((we * we - ws * ws) * (we * we - ws * ws) + 4.0 * xi * xi);
    const double lam[2] = {0.5 * (tr - disc), 0.5 * (tr + disc)};
    double rot[2][2];
    for (int i = 0; i < 2; ++i) {
        const double vs = xi, ve = lam[i] - ws * ws;
        const double n = std::hypot(vs, ve);
        rot[i][0] = vs / n;
        rot[i][1] = ve / n;
    }
    const C wn[2] = {std::sqrt(C(lam[0], 0.0)), std::sqrt(C(lam[1], 0.0))};
    const double om[2] = {ws, we};
    const C I(0.0, 1.0);
    MatchedCoefficients out{};
    for (int k = 0; k < 4; ++k) {
        const int mode = k % 2;
        const bool dagger = k >= 2;
        const C phase = std::exp((dagger ? -1.0 : 1.0) * I * om[mode] * t0);
        const C x_free = phase / std::sqrt(2.0 * om[mode]);
        const C p_free = (dagger ? 1.0 : -1.0) * I * om[mode] * x_free;
        std::vector<std::vector<C>> a(4, std::vector<C>(4, 0.0));
        std::vector<C> rhs(4);
        for (int i = 0; i < 2; ++i) {
            const double norm = 1.0 / std::sqrt(2.0 * std::abs(wn[i]));
            a[2 * i][2 * i] = norm;
            a[2 * i][2 * i + 1] = norm;
            a[2 * i + 1][2 * i] = -I * wn[i] * norm;
            a[2 * i + 1][2 * i + 1] = I * wn[i] * norm;
            rhs[2 * i] = rot[i][mode] * x_free;
            rhs[2 * i + 1] = rot[i][mode] * p_free;
        }
        const auto u = oracle::solve(a, rhs);
        for (int op = 0; op < 4; ++op) out.coeff[op][k] = u[op];
    }
    return out;
}

void expect_matches_oracle(const ScenarioParams& p) {
    const BogoliubovSet s = bogoliubov_coeffs(p);
    const MatchedCoefficients ref = matching_oracle(p.omega_s, p.omega_e, p.xi0, p.t0);
    for (int i = 0; i < 2; ++i)
        for (int I = 0; I < 2; ++I) {
            EXPECT_LT(std::abs(s.alpha[i][I] - ref.coeff[2 * i][I]), 1e-12);
            EXPECT_LT(std::abs(s.beta[i][I] - ref.coeff[2 * i][2 + I]), 1e-12);
            EXPECT_LT(std::abs(s.companion_alpha[i][I] - ref.coeff[2 * i + 1][I]), 1e-12);
            EXPECT_LT(std::abs(s.companion_beta[i][I] - ref.coeff[2 * i + 1][2 + I]), 1e-12);
        }
}

// sigma_S inside the window from the matrix exponential of the constant generator.
double exponential_purity(const ScenarioParams& p, double dt) {
    const oracle::M4 k = oracle::mul(oracle::omega(), oracle::hamiltonian(p.xi0, p.omega_s, p.omega_e));
    const oracle::M4 u = oracle::expm(oracle::scale(k, dt));
    return oracle::system_purity(
        oracle::mul(oracle::mul(u, oracle::vacuum(p.omega_s, p.omega_e)), oracle::transpose(u)));
}

ScenarioParams top_hat(double w, double psi, double t0) {
    return ScenarioParams::with_psi(1.0, 1.0 / w, psi, t0, 1.0, ProfileKind::IsosoTopHat);
}

}  // namespace

TEST(Bogoliubov, DecoupledLimit) {
    const auto p = ScenarioParams::with_xi0(1.0, 2.0, 1e-9, 3.0, 1.0, ProfileKind::IsosoTopHat);
    const BogoliubovSet s = bogoliubov_coeffs(p);
    EXPECT_EQ(s.delta, 0);
    EXPECT_LT(std::abs(s.alpha[0][0] - std::polar(1.0, 3.0)), 1e-8);
    EXPECT_LT(std::abs(s.alpha[1][1] - std::polar(1.0, 6.0)), 1e-8);
    EXPECT_LT(std::abs(s.alpha[0][1]), 1e-8);
    EXPECT_LT(std::abs(s.alpha[1][0]), 1e-8);
    for (int i = 0; i < 2; ++i)
        for (int I = 0; I < 2; ++I) EXPECT_LT(std::abs(s.beta[i][I]), 1e-8);
}

TEST(Bogoliubov, SubcriticalMatchesLinearMatching) {
    expect_matches_oracle(ScenarioParams::with_psi(1.0, 2.0, 0.9, 10.0, 1.0, ProfileKind::IsosoTopHat));
    expect_matches_oracle(ScenarioParams::with_psi(0.7, 5.0, 0.3, 1.3, 1.0, ProfileKind::IsosoTopHat));
}

TEST(Bogoliubov, SupercriticalMatchesLinearMatching) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 1.1, 10.0, 1.0, ProfileKind::IsosoTopHat);
    EXPECT_EQ(bogoliubov_coeffs(p).delta, 1);
    expect_matches_oracle(p);
    expect_matches_oracle(ScenarioParams::with_psi(1.0, 100.0, 7.0, 0.1, 1.0, ProfileKind::IsosoTopHat));
    // The hyperbolic branch changes the magnitude of the slow-mode coefficient.
    const auto below = ScenarioParams::with_psi(1.0, 2.0, 0.9, 10.0, 1.0, ProfileKind::IsosoTopHat);
    EXPECT_GT(std::abs(std::abs(bogoliubov_coeffs(p).alpha[0][0]) - std::abs(bogoliubov_coeffs(below).alpha[0][0])),
              1e-3);
}

TEST(Bogoliubov, CommutatorsPreserved) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> uw(0.05, 1.0), upsi(0.05, 3.0), ut(0.1, 5.0);
    for (int k = 0; k < 200; ++k) {
        const auto p = top_hat(uw(rng), upsi(rng), ut(rng));
        if (std::abs(p.psi() - 1.0) < 1e-3) continue;
        const BogoliubovSet s = bogoliubov_coeffs(p);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                C expected = 0.0;
                if (i == j) expected = (i == 0 && s.delta == 1) ? C(0.0, -1.0) : C(1.0, 0.0);
                EXPECT_LT(std::abs(commutator_bc(s, i, j) - expected), 1e-10);
                if (s.delta == 0) {
                    EXPECT_LT(std::abs(commutator_b_bdag(s, i, j) - (i == j ? 1.0 : 0.0)), 1e-10);
                }
            }
    }
}

TEST(Bogoliubov, CorrelatorNormalOrdering) {
    for (double psi : {0.2, 0.9, 1.1, 3.0}) {
        const BogoliubovSet s = bogoliubov_coeffs(top_hat(0.5, psi, 2.0));
        const BCorrelators c = b_correlators(s);
        for (int i = 0; i < 2; ++i) {
            const C diff = c.bc[i][i] - c.cb[i][i];
            if (s.delta == 0 || i == 1) {
                EXPECT_LT(std::abs(diff - 1.0), 1e-10) << psi << " " << i;
            } else {
                EXPECT_LT(std::abs(diff - C(0.0, -1.0)), 1e-10);
            }
        }
    }
}

TEST(Bogoliubov, CriticalPointRejected) {
    EXPECT_THROW(bogoliubov_coeffs(top_hat(0.5, 1.0, 1.0)), CriticalPoint);
    EXPECT_THROW(isoso_purity(0.0, top_hat(0.5, 1.0 + 1e-9, 1.0)), CriticalPoint);
}

TEST(IsosoPurity, PureAtWindowStartAndFrozenAfter) {
    for (double psi : {0.5, 0.9, 1.1, 5.0}) {
        const auto p = top_hat(0.5, psi, 2.0);
        EXPECT_NEAR(isoso_purity(-2.0, p), 1.0, 1e-10);
        EXPECT_EQ(isoso_purity(-3.0, p), 1.0);
        EXPECT_EQ(isoso_purity(7.0, p), isoso_purity(2.0, p));
    }
}

TEST(IsosoPurity, MatchesMatrixExponential) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> uw(0.05, 1.0), upsi(0.05, 3.0), ut(0.2, 5.0), uf(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const auto p = top_hat(uw(rng), upsi(rng), ut(rng));
        if (std::abs(p.psi() - 1.0) < 1e-3) continue;
        const double dt = 2.0 * p.t0 * uf(rng);
        // Closed-form determinants cancel terms of size e^{4 a}; keep a = |w1| dt inside double range.
        if (decoherence_rate(p).value_or(0.0) * dt > 6.0) continue;
        const double ref = exponential_purity(p, dt);
        EXPECT_NEAR(isoso_purity(dt - p.t0, p), ref, 1e-9 * std::max(1.0, 1.0 / ref) * ref) << k;
    }
}

TEST(IsosoPurity, FigureFiveAgreementWithNumericRun) {
    for (double psi : {0.9, 1.1}) {
        const auto p = ScenarioParams::with_psi(1.0, 2.0, psi, 10.0, 1e-3);
        const Trajectory tr = isoso_reference_run(p, IntegratorConfig{});
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double t = tr.samples[i].t;
            if (t < -p.t0 || t > p.t0) continue;
            worst = std::max(worst, std::abs(isoso_purity(t, p) - tr.purity_s[i]));
        }
        EXPECT_LT(worst, 5e-3) << psi;
    }
}

TEST(IsosoPurity, RandomDrawsAgreeWithNumericRun) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uw(0.25, 0.9), ut(0.5, 3.0), usub(0.1, 0.9), usup(1.1, 1.6);
    for (int k = 0; k < 20; ++k) {
        const double psi = k % 2 == 0 ? usub(rng) : usup(rng);
        const auto p = ScenarioParams::with_psi(1.0, 1.0 / uw(rng), psi, ut(rng), 1.0);
        IntegratorConfig cfg;
        cfg.sample_dt = p.t0 / 50.0;
        const Trajectory tr = isoso_reference_run(p, cfg);
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double t = tr.samples[i].t;
            if (t < -p.t0 || t > p.t0) continue;
            worst = std::max(worst, std::abs(isoso_purity(t, p) - tr.purity_s[i]));
        }
        EXPECT_LT(worst, 1e-2) << k;
    }
}

TEST(IsosoPurity, SupercriticalDecayRateAndMonotoneEnvelope) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 1.1, 10.0, 1.0, ProfileKind::IsosoTopHat);
    const double rate = *decoherence_rate(p);
    // Least-squares slope of ln gamma over the second half of the window averages out the beat.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double t = 0.0; t <= p.t0; t += 1e-3, ++n) {
        const double y = std::log(isoso_purity(t, p));
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT_NEAR(-slope / rate, 1.0, 0.05);
    // Local maxima after the first e-fold decrease.
    double prev_max = 2.0;
    const double start = -p.t0 + 1.0 / rate;
    std::vector<double> g;
    for (double t = start; t <= p.t0; t += 1e-3) g.push_back(isoso_purity(t, p));
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        if (g[i] >= g[i - 1] && g[i] >= g[i + 1]) {
            EXPECT_LT(g[i], prev_max);
            prev_max = g[i];
        }
    }
}

TEST(DecoherenceRate, Cases) {
    EXPECT_FALSE(decoherence_rate(top_hat(0.5, 0.9, 1.0)).has_value());
    // Near criticality with small w the rate grows as sqrt|dpsi|.
    const double r1 = *decoherence_rate(top_hat(1e-3, 1.01, 1.0));
    const double r4 = *decoherence_rate(top_hat(1e-3, 1.04, 1.0));
    EXPECT_NEAR(r4 / r1, 2.0, 0.02);
    // Strong coupling with small w: rate close to xi0 / omega_e.
    const auto o1a = top_hat(1e-2, 10.0, 0.2);
    EXPECT_NEAR(*decoherence_rate(o1a) / (o1a.xi0 / o1a.omega_e), 1.0, 0.01);
}

TEST(RegimeExpansion, ParseNames) {
    EXPECT_EQ(parse_expansion_case("U1"), ExpansionCase::U1);
    EXPECT_EQ(parse_expansion_case("C1plus"), ExpansionCase::C1);
    EXPECT_EQ(parse_expansion_case("C2-"), ExpansionCase::C2);
    EXPECT_EQ(parse_expansion_case("O1b"), ExpansionCase::O1b);
    EXPECT_THROW(parse_expansion_case("X9"), InvalidArgument);
    EXPECT_EQ(expansion_for(classify_regime(0.1, 1.1)), ExpansionCase::C1);
}

TEST(RegimeExpansion, AllStartPure) {
    const struct {
        const char* name;
        double t0, w, psi;
    } cases[] = {{"U1", 0.3, 1e-2, 1e-2},  {"U2a", 10, 1 / 1.01, 0.1}, {"U2b", 10, 1 / 1.1, 0.01},
                 {"C1+", 5, 0.1, 1.1},     {"C1-", 5, 0.1, 0.9},      {"C2+", 5, 1 / 1.1, 1.1},
                 {"C2-", 5, 1 / 1.1, 0.9}, {"O1a", 0.2, 1e-2, 10},    {"O1b", 0.2, 0.1, 100},
                 {"O2", 2, 1 / 1.1, 10}};
    for (const auto& c : cases) {
        const auto p = top_hat(c.w, c.psi, c.t0);
        const ExpansionCase e = parse_expansion_case(c.name);
        EXPECT_NEAR(regime_purity(e, 0.0, p), 1.0, 1e-12) << c.name;
        for (double dt : {0.0, 0.1, 1.0, 10.0, 100.0}) EXPECT_TRUE(std::isfinite(regime_purity(e, dt, p))) << c.name;
        EXPECT_THROW(regime_purity(e, -1.0, p), InvalidArgument);
    }
}

TEST(RegimeExpansion, UnderCriticalAmplitude) {
    const auto p = top_hat(1e-2, 1e-2, 0.3);
    double lowest = 1.0;
    for (double dt = 0.0; dt < 2.0; dt += 1e-5) lowest = std::min(lowest, regime_purity(ExpansionCase::U1, dt, p));
    EXPECT_NEAR(lowest, 1.0 - 2.0 * 1e-2 * 1e-4, 1e-12);
}

// The near-critical expansion is leading order in w: its worst relative error over
// omega_S dt <= 5 must shrink as w decreases.
TEST(RegimeExpansion, NearCriticalErrorShrinksWithW) {
    for (double psi : {0.9, 1.1}) {
        double prev = 1.0;
        for (double w : {0.1, 0.03, 0.01}) {
            const auto p = top_hat(w, psi, 5.0);
            double worst = 0.0;
            for (double dt = 0.0; dt <= 5.0; dt += 0.01) {
                const double exact = isoso_purity(dt - p.t0, p);
                worst = std::max(worst, std::abs(regime_purity(ExpansionCase::C1, dt, p) - exact) / exact);
            }
            EXPECT_LT(worst, prev) << psi << " " << w;
            prev = worst;
        }
        EXPECT_LT(prev, 0.03) << psi;
    }
}

TEST(RegimeExpansion, StrongCouplingLateTime) {
    const auto p = top_hat(0.1, 100.0, 0.2);
    const double rate = *decoherence_rate(p);
    const double dt = 0.4;
    ASSERT_GT(rate * dt, 5.0);
    const double exact = isoso_purity(dt - p.t0, p);
    EXPECT_NEAR(regime_purity(ExpansionCase::O1b, dt, p) / exact, 1.0, 0.1);
    // Long baseline so the bounded oscillating factor does not bias the slope.
    const double slope = (std::log(regime_purity(ExpansionCase::O1b, 10.0, p)) -
                          std::log(regime_purity(ExpansionCase::O1b, 1.0, p))) / 9.0;
    EXPECT_NEAR(-slope / rate, 1.0, 0.05);
}

// The U expansions drop relative O(w) and O(dw) corrections to the impurity, so their
// distance from the closed-form second-order purity is a small fraction of 1 - gamma.
TEST(RegimeExpansion, UnderCriticalMatchesSecondOrderEarly) {
    const struct {
        ExpansionCase c;
        double t0, w, psi;
    } cases[] = {{ExpansionCase::U1, 0.3, 1e-2, 1e-2},
                 {ExpansionCase::U2a, 10, 1 / 1.01, 0.1},
                 {ExpansionCase::U2b, 10, 1 / 1.1, 0.01}};
    for (const auto& c : cases) {
        const auto p = top_hat(c.w, c.psi, c.t0);
        double worst = 0.0, impurity = 0.0;
        for (double dt = 0.0; dt < 1.0; dt += 1e-3) {
            const double o2 = purity_o2_isoso(dt, p);
            worst = std::max(worst, std::abs(regime_purity(c.c, dt, p) - o2) / o2);
            impurity = std::max(impurity, 1.0 - o2);
        }
        EXPECT_LT(worst, 0.05 * impurity) << static_cast<int>(c.c);
    }
}

TEST(RegimeExpansion, UnderCriticalGapScalesWithImpurity) {
    auto gap = [](double psi) {
        const auto p = top_hat(1e-2, psi, 0.3);
        double worst = 0.0;
        for (double dt = 0.0; dt < 1.0; dt += 1e-3) {
            const double o2 = purity_o2_isoso(dt, p);
            worst = std::max(worst, std::abs(regime_purity(ExpansionCase::U1, dt, p) - o2) / o2);
        }
        return worst;
    };
    EXPECT_NEAR(gap(1e-2) / gap(5e-3), 4.0, 0.4);
}
