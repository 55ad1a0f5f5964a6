#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bridge.hpp"
#include "gaussdyn/errors.hpp"
#include "gaussdyn/transport.hpp"

using namespace gaussdyn;

namespace {

void expect_invariants(const Trajectory& tr) {
    ASSERT_GT(tr.size(), 2u);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        if (i > 0) {
            EXPECT_GT(tr.samples[i].t, tr.samples[i - 1].t);
        }
        EXPECT_NEAR(tr.det_sigma[i], 1.0, 1e-8) << tr.samples[i].t;
        EXPECT_NEAR(tr.purity_s[i], tr.purity_e[i], 1e-8) << tr.samples[i].t;
        EXPECT_GE(std::sqrt(tr.det_s[i]), 1.0 - 1e-9);
        EXPECT_GE(std::sqrt(tr.det_e[i]), 1.0 - 1e-9);
    }
}

Mat4 random_symmetric_positive(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat4 a;
    for (double& v : a.m) v = u(rng);
    return a * a.transpose() + Mat4::identity() * 0.5;
}

}  // namespace

TEST(Vacuum, InitialState) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 0.5, 3.0, 0.5);
    const CovarianceState s = vacuum_initial(p);
    EXPECT_DOUBLE_EQ(s.t, -3.0 - 20.0 * 0.5);
    const double diag[4] = {1.0, 1.0, 0.5, 2.0};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) EXPECT_EQ(s.sigma(i, j), i == j ? diag[i] : 0.0);
    EXPECT_DOUBLE_EQ(purity_from_block(system_block(s)), 1.0);
    EXPECT_DOUBLE_EQ(purity_from_block(environment_block(s)), 1.0);
    EXPECT_DOUBLE_EQ(s.sigma.det(), 1.0);
    const Mat2 c = cross_block(s);
    EXPECT_EQ(frobenius_norm(c), 0.0);
}

TEST(TransportRhs, VacuumIsStationaryWithoutCoupling) {
    const auto p = ScenarioParams::with_psi(1.3, 2.0, 0.5, 1.0, 1.0);
    const Mat4 r = transport_rhs_at_xi(vacuum_initial(p).sigma, 0.0, p);
    EXPECT_LT(frobenius_norm(r), 1e-15);
}

TEST(TransportRhs, FreeRotationOfSqueezedSystem) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 0.5, 1.0, 1.0);
    const Mat4 sigma = Mat4::from_blocks(Mat2::diag(2.0, 0.5), Mat2{}, Mat2{}, Mat2::diag(0.5, 2.0));
    const Mat4 r = transport_rhs_at_xi(sigma, 0.0, p);
    // K = Omega diag(1, 1): K sigma + (K sigma)^T = [[0, -1.5], [-1.5, 0]].
    EXPECT_NEAR(r(0, 0), 0.0, 1e-15);
    EXPECT_NEAR(r(0, 1), -1.5, 1e-15);
    EXPECT_NEAR(r(1, 0), -1.5, 1e-15);
    EXPECT_NEAR(r(1, 1), 0.0, 1e-15);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i >= 2 || j >= 2) EXPECT_NEAR(r(i, j), 0.0, 1e-15);
}

TEST(TransportRhs, SymmetricMatchesOracleAndPreservesDeterminant) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uxi(0.0, 3.0);
    const auto p = ScenarioParams::with_psi(0.7, 1.9, 0.5, 1.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const Mat4 sigma = random_symmetric_positive(rng);
        const double xi = uxi(rng);
        const Mat4 r = transport_rhs_at_xi(sigma, xi, p);
        const oracle::M4 ref = oracle::rhs(oracle::from(sigma), oracle::hamiltonian(xi, 0.7, 1.9));
        const double scale = frobenius_norm(r) + 1.0;
        EXPECT_LT(oracle::max_abs_diff(oracle::from(r), ref), 1e-13 * scale);
        EXPECT_LT(frobenius_norm(r - r.transpose()), 1e-14 * scale);
        // d det / dt = det Tr(sigma^{-1} rhs) = 0; checked through a first-order step.
        const double h = 1e-7;
        const double d0 = sigma.det();
        const double d1 = (sigma + r * h).det();
        const double d2 = (sigma - r * h).det();
        EXPECT_LT(std::abs(d1 - d2) / (2.0 * h), 1e-6 * d0 * scale);
    }
}

TEST(Integrate, NoCouplingKeepsPurity) {
    const auto p = ScenarioParams::with_xi0(1.0, 2.0, 0.0, 2.0, 1.0);
    const Trajectory tr = integrate(p, IntegratorConfig{});
    for (double g : tr.purity_s) EXPECT_NEAR(g, 1.0, 1e-10);
    const Trajectory ref = isoso_reference_run(p, IntegratorConfig{});
    for (double g : ref.purity_s) EXPECT_NEAR(g, 1.0, 1e-10);
}

TEST(Integrate, SupercriticalDecayFollowsUnstableRate) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 1.1, 10.0, 1.0);
    const Trajectory tr = integrate(p, IntegratorConfig{});
    expect_invariants(tr);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.samples[i].t;
        if (t < 0.0 || t > p.t0) continue;
        const double y = std::log(tr.purity_s[i]);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double rate = adiabatic_frame_at_xi(p.xi0, 1.0, 2.0).omega1_abs;
    EXPECT_NEAR(-slope / rate, 1.0, 0.05);
    // Decay envelope: the purity at the end of the window is far below its value at the peak.
    EXPECT_LT(tr.purity_s.back(), 1e-2);
}

TEST(Integrate, SlowSwitchRecoheres) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 0.9, 1.0, 50.0);
    IntegratorConfig cfg;
    cfg.end_policy = EndPolicy::CouplingCutoff;
    cfg.sample_dt = 1.0;
    const Trajectory tr = integrate(p, cfg);
    expect_invariants(tr);
    EXPECT_GT(tr.purity_s.back(), 0.999);
}

TEST(Integrate, MatchesRk4OracleOnSmoothProfile) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 0.5, 1.0, 0.5);
    IntegratorConfig cfg;
    cfg.rtol = 1e-12;
    cfg.atol = 1e-14;
    const CovarianceState s = propagate(p, cfg, 2.0);
    const oracle::M4 ref = oracle::rk4(oracle::vacuum(1.0, 2.0), p.t_in(), 2.0, 1e-4,
                                       [&](double t) { return oracle::smooth_xi(t, p.xi0, p.t0, p.tau); }, 1.0,
                                       2.0);
    EXPECT_LT(oracle::max_abs_diff(oracle::from(s.sigma), ref), 1e-9);
}

TEST(Integrate, TopHatMatchesMatrixExponential) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 1.1, 3.0, 1.0, ProfileKind::IsosoTopHat);
    IntegratorConfig cfg;
    cfg.sample_times = {-3.0, -1.7, 0.0, 1.3, 3.0};
    const Trajectory tr = integrate(p, cfg);
    ASSERT_EQ(tr.size(), 5u);
    const oracle::M4 k = oracle::mul(oracle::omega(), oracle::hamiltonian(p.xi0, 1.0, 2.0));
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double dt = tr.samples[i].t + p.t0;
        const oracle::M4 u = oracle::expm(oracle::scale(k, dt));
        const oracle::M4 ref = oracle::mul(oracle::mul(u, oracle::vacuum(1.0, 2.0)), oracle::transpose(u));
        double scale = 0.0;
        for (const auto& row : ref)
            for (double v : row) scale = std::max(scale, std::abs(v));
        EXPECT_LT(oracle::max_abs_diff(oracle::from(tr.samples[i].sigma), ref), 1e-8 * scale) << dt;
    }
}

TEST(Integrate, TopHatIsContinuousAtWindowEdges) {
    // The top-hat run starts at -t0 from the vacuum, which the free evolution keeps.
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 0.9, 2.0, 1.0, ProfileKind::IsosoTopHat);
    IntegratorConfig cfg;
    cfg.t_end = 5.0;
    cfg.sample_times = {-2.0 + 1e-9, 2.0 - 1e-9, 2.0, 2.0 + 1e-9};
    const Trajectory tr = integrate(p, cfg);
    ASSERT_EQ(tr.size(), 6u);
    EXPECT_DOUBLE_EQ(tr.samples[0].t, -2.0);
    EXPECT_LT(frobenius_norm(tr.samples[1].sigma - vacuum_initial(p).sigma), 1e-7);
    EXPECT_LT(frobenius_norm(tr.samples[2].sigma - tr.samples[3].sigma), 1e-7);
    EXPECT_LT(frobenius_norm(tr.samples[4].sigma - tr.samples[3].sigma), 1e-7);
}

TEST(Integrate, FrozenAfterCouplingCutoff) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 0.9, 1.0, 1.0);
    IntegratorConfig cut;
    cut.end_policy = EndPolicy::CouplingCutoff;
    const double tc = end_time(p, cut);
    EXPECT_NEAR(coupling_xi(tc, p) / p.xi_c(), 1e-10, 1e-14);
    IntegratorConfig cfg;
    cfg.t_end = tc + 20.0;
    cfg.sample_dt = 0.5;
    const Trajectory tr = integrate(p, cfg);
    std::size_t first = 0;
    while (tr.samples[first].t <= tc) ++first;
    for (std::size_t i = first; i < tr.size(); ++i) {
        const double t = tr.samples[i].t;
        const double drift = std::abs(tr.purity_s[i] - tr.purity_s[first]);
        EXPECT_LE(drift, 1e-9 * (t - tr.samples[first].t) + 1e-12) << t;
    }
}

TEST(Integrate, HalvingStepCapIsConverged) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 0.9, 1.0, 1.0);
    IntegratorConfig a;
    a.max_step = 0.05;
    IntegratorConfig b = a;
    b.max_step = 0.025;
    const Trajectory ta = integrate(p, a);
    const Trajectory tb = integrate(p, b);
    EXPECT_LT(std::abs(ta.purity_s.back() - tb.purity_s.back()), 10.0 * a.rtol);
}

TEST(Integrate, CrossCorrelationsBuildUp) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 0.5, 2.0, 0.5);
    const CovarianceState s = propagate(p, IntegratorConfig{}, 0.0);
    const Mat2 c = cross_block(s);
    const double biggest = std::max({std::abs(c.a11), std::abs(c.a12), std::abs(c.a21), std::abs(c.a22)});
    EXPECT_GT(biggest, 1e-6);
}

TEST(Integrate, InvariantsOnMixedCases) {
    for (double psi : {0.3, 0.9, 1.5}) {
        for (ProfileKind k : {ProfileKind::Smooth, ProfileKind::IsosoTopHat}) {
            const auto p = ScenarioParams::with_psi(1.0, 3.0, psi, 2.0, 0.5, k);
            expect_invariants(integrate(p, IntegratorConfig{}));
        }
    }
}

TEST(Integrate, SampleTimesAndInterpolation) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 0.7, 1.0, 1.0);
    IntegratorConfig cfg;
    cfg.rtol = 1e-12;
    cfg.atol = 1e-14;
    const Trajectory tr = integrate(p, cfg);
    for (double t : {-3.3, 0.123, 2.71}) {
        const CovarianceState direct = propagate(p, cfg, t);
        EXPECT_LT(frobenius_norm(tr.at(t).sigma - direct.sigma), 1e-6) << t;
    }
    IntegratorConfig pick;
    pick.sample_times = {-1.0, 0.5, 4.0};
    const Trajectory few = integrate(p, pick);
    // The start and end states are always recorded around the requested times.
    ASSERT_EQ(few.size(), 5u);
    EXPECT_DOUBLE_EQ(few.samples[0].t, p.t_in());
    EXPECT_DOUBLE_EQ(few.samples[2].t, 0.5);
    EXPECT_DOUBLE_EQ(few.samples[4].t, -p.t_in());
}

TEST(Integrate, ReferenceRunUsesShortRamp) {
    const auto p = ScenarioParams::with_psi(1.0, 100.0, 1e-2, 0.3, 1.0);
    const Trajectory tr = isoso_reference_run(p, IntegratorConfig{});
    expect_invariants(tr);
    EXPECT_NEAR(tr.samples.front().t, -0.3 - 20.0 * 0.3e-4, 1e-12);
}

TEST(Integrate, InvalidConfigRejected) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 0.7, 1.0, 1.0);
    IntegratorConfig cfg;
    cfg.rtol = 0.0;
    EXPECT_THROW(integrate(p, cfg), InvalidArgument);
}

TEST(Packing, RoundTrip) {
    std::mt19937_64 rng(12);
    const Mat4 s = random_symmetric_positive(rng);
    EXPECT_EQ(frobenius_norm(unpack(pack(s)) - s), 0.0);
}

TEST(Method, AutoSelection) {
    IntegratorConfig cfg;
    EXPECT_EQ(resolve_method(ScenarioParams::with_psi(1.0, 2.0, 0.9, 10.0, 1.0), cfg), Method::RungeKutta);
    EXPECT_EQ(resolve_method(ScenarioParams::with_psi(1.0, 2.0, 1.1, 10.0, 1.0), cfg), Method::Symplectic);
    EXPECT_EQ(resolve_precision(ScenarioParams::with_psi(1.0, 2.0, 0.9, 10.0, 1.0), cfg), Precision::Double);
    EXPECT_EQ(resolve_precision(ScenarioParams::with_psi(1.0, 2.0, 2.0, 10.0, 1.0), cfg), Precision::Quad);
}

TEST(Impurity, CrossBlockFormulaAgreesWithPurity) {
    const auto p = ScenarioParams::with_psi(1.0, 2.0, 0.8, 1.0, 1.0);
    const CovarianceState s = propagate(p, IntegratorConfig{}, 0.5);
    const double direct = 1.0 - purity_from_block(system_block(s));
    EXPECT_NEAR(impurity_from_cross_block(s), direct, 1e-8 * direct + 1e-12);
}
