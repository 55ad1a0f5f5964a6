#pragma once

// Symplectic propagation of the 4x4 phase-space map S(t) with dS/dt = K(t) S,
// K = Omega H. Each Gauss-Legendre step is an exactly symplectic map (up to
// rounding), so sigma = S sigma0 S^T stays a pure Gaussian state even when S is
// exponentially large.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "gaussdyn/errors.hpp"
#include "gaussdyn/ode.hpp"

namespace gaussdyn::detail {

template <class T>
using M4 = std::array<T, 16>;

template <class T>
T abs_t(T x) {
    return x < T(0) ? -x : x;
}

template <class T>
T sqrt_t(double v) {
    // Newton refinement of the double square root in the working precision.
    T x = static_cast<T>(std::sqrt(v));
    const T tv = static_cast<T>(v);
    for (int i = 0; i < 3; ++i) x = (x + tv / x) / T(2);
    return x;
}

template <class T>
T sqrt_of(T v) {
    if (!(v > T(0))) return T(0);
    T x = static_cast<T>(std::sqrt(static_cast<double>(v)));
    for (int i = 0; i < 3; ++i) x = (x + v / x) / T(2);
    return x;
}

template <class T>
M4<T> identity4() {
    M4<T> m{};
    for (int i = 0; i < 4; ++i) m[5 * i] = T(1);
    return m;
}

template <class T>
M4<T> generator(T xi, T ws2, T we2) {
    M4<T> k{};
    k[1] = T(1);
    k[4] = -ws2;
    k[6] = -xi;
    k[11] = T(1);
    k[12] = -xi;
    k[14] = -we2;
    return k;
}

template <class T>
M4<T> mul4(const M4<T>& a, const M4<T>& b) {
    M4<T> r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            T s = T(0);
            for (int k = 0; k < 4; ++k) s += a[4 * i + k] * b[4 * k + j];
            r[4 * i + j] = s;
        }
    return r;
}

// Determinant by LU with partial pivoting (backward stable, unlike cofactors).
template <class T, std::size_t N>
T lu_det(std::array<T, N * N> a) {
    T det = T(1);
    for (std::size_t c = 0; c < N; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < N; ++r)
            if (abs_t(a[r * N + c]) > abs_t(a[piv * N + c])) piv = r;
        if (a[piv * N + c] == T(0)) return T(0);
        if (piv != c) {
            for (std::size_t j = 0; j < N; ++j) std::swap(a[c * N + j], a[piv * N + j]);
            det = -det;
        }
        det *= a[c * N + c];
        for (std::size_t r = c + 1; r < N; ++r) {
            const T f = a[r * N + c] / a[c * N + c];
            for (std::size_t j = c; j < N; ++j) a[r * N + j] -= f * a[c * N + j];
        }
    }
    return det;
}

// Three-stage Gauss-Legendre collocation (order 6).
template <class T>
struct Gauss3 {
    T a[3][3];
    T b[3];
    double c[3];

    static const Gauss3& get() {
        static const Gauss3 g = [] {
            Gauss3 r{};
            const T s15 = sqrt_t<T>(15.0);
            const T one = T(1);
            r.a[0][0] = T(5) / T(36);
            r.a[0][1] = T(2) / T(9) - s15 / T(15);
            r.a[0][2] = T(5) / T(36) - s15 / T(30);
            r.a[1][0] = T(5) / T(36) + s15 / T(24);
            r.a[1][1] = T(2) / T(9);
            r.a[1][2] = T(5) / T(36) - s15 / T(24);
            r.a[2][0] = T(5) / T(36) + s15 / T(30);
            r.a[2][1] = T(2) / T(9) + s15 / T(15);
            r.a[2][2] = T(5) / T(36);
            r.b[0] = T(5) / T(18);
            r.b[1] = T(4) / T(9);
            r.b[2] = T(5) / T(18);
            (void)one;
            r.c[0] = 0.5 - std::sqrt(15.0) / 10.0;
            r.c[1] = 0.5;
            r.c[2] = 0.5 + std::sqrt(15.0) / 10.0;
            return r;
        }();
        return g;
    }
};

// One Gauss-Legendre step for the linear system dS/dt = K(t) S. The stage
// equations are linear, solved as a 12x12 system with four right-hand sides.
template <class T, class KOf>
M4<T> gauss_step(const M4<T>& s, double t, double h, KOf&& k_of) {
    const Gauss3<T>& g = Gauss3<T>::get();
    const T ht = static_cast<T>(h);
    M4<T> kk[3];
    for (int i = 0; i < 3; ++i) kk[i] = k_of(t + g.c[i] * h);

    constexpr int n = 12;
    std::array<T, n * n> m{};
    std::array<T, n * 4> rhs{};
    for (int bi = 0; bi < 3; ++bi) {
        const M4<T> ks = mul4(kk[bi], s);
        for (int r = 0; r < 4; ++r) {
            for (int col = 0; col < 4; ++col) rhs[(4 * bi + r) * 4 + col] = ks[4 * r + col];
            for (int bj = 0; bj < 3; ++bj) {
                const T f = ht * g.a[bi][bj];
                for (int c = 0; c < 4; ++c) m[(4 * bi + r) * n + 4 * bj + c] = -f * kk[bi][4 * r + c];
            }
            m[(4 * bi + r) * n + 4 * bi + r] += T(1);
        }
    }
    // Gaussian elimination with partial pivoting.
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (abs_t(m[r * n + c]) > abs_t(m[piv * n + c])) piv = r;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(m[c * n + j], m[piv * n + j]);
            for (int j = 0; j < 4; ++j) std::swap(rhs[c * 4 + j], rhs[piv * 4 + j]);
        }
        const T inv = T(1) / m[c * n + c];
        for (int r = c + 1; r < n; ++r) {
            const T f = m[r * n + c] * inv;
            if (f == T(0)) continue;
            for (int j = c; j < n; ++j) m[r * n + j] -= f * m[c * n + j];
            for (int j = 0; j < 4; ++j) rhs[r * 4 + j] -= f * rhs[c * 4 + j];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        for (int j = 0; j < 4; ++j) {
            T v = rhs[r * 4 + j];
            for (int c = r + 1; c < n; ++c) v -= m[r * n + c] * rhs[c * 4 + j];
            rhs[r * 4 + j] = v / m[r * n + r];
        }
    }
    M4<T> out = s;
    for (int bi = 0; bi < 3; ++bi) {
        const T w = ht * g.b[bi];
        for (int r = 0; r < 4; ++r)
            for (int col = 0; col < 4; ++col) out[4 * r + col] += w * rhs[(4 * bi + r) * 4 + col];
    }
    return out;
}

// Adaptive driver: step doubling gives the error estimate; the two half steps are
// kept so every accepted update is a composition of symplectic maps. Stops are
// handled as in ode::integrate.
template <class T, class KOf, class Observer>
M4<T> propagate_symplectic(KOf&& k_of, double ta, M4<T> s, double tb, const std::vector<double>& stops,
                           const ode::StepControl& sc, Observer&& observer, double& h, ode::Stats* stats) {
    if (!(tb > ta)) return s;
    const double hmax = std::min(sc.max_step, tb - ta);
    if (h <= 0.0) h = hmax;
    h = std::min(h, hmax);
    auto stop_it = std::lower_bound(stops.begin(), stops.end(), ta, [](double v, double t) { return v <= t; });
    const double snap = 8.0 * std::numeric_limits<double>::epsilon();
    double t = ta;
    while (t < tb) {
        double target = tb;
        if (stop_it != stops.end() && *stop_it < tb) target = *stop_it;
        double step = std::min(h, hmax);
        bool clipped = false;
        if (t + step >= target - snap * std::max(1.0, std::abs(target))) {
            step = target - t;
            clipped = true;
        }
        const M4<T> full = gauss_step<T>(s, t, step, k_of);
        const M4<T> half = gauss_step<T>(s, t, 0.5 * step, k_of);
        const M4<T> two = gauss_step<T>(half, t + 0.5 * step, 0.5 * step, k_of);
        double en = 0.0;
        for (int i = 0; i < 16; ++i) {
            const double scale = sc.atol + sc.rtol * std::max(std::abs(static_cast<double>(s[i])),
                                                              std::abs(static_cast<double>(two[i])));
            const double e = static_cast<double>(two[i] - full[i]) / 63.0 / scale;
            en += e * e;
        }
        en = std::sqrt(en / 16.0);
        if (!std::isfinite(en)) {
            throw StepFailure("non-finite propagator at t = " + std::to_string(t));
        }
        const double fac = en == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(en, -1.0 / 7.0), 0.2, 4.0);
        if (en <= 1.0) {
            t = clipped ? target : t + step;
            s = two;
            if (stats) ++stats->accepted;
            if (clipped && stop_it != stops.end() && target == *stop_it) {
                observer(t, s);
                ++stop_it;
            }
            if (!clipped || fac < 1.0) h = std::min(step * fac, hmax);
        } else {
            if (stats) ++stats->rejected;
            h = step * std::min(1.0, fac);
            if (h < sc.min_step) {
                throw StepFailure("step size fell below " + std::to_string(sc.min_step) + " at t = " +
                                  std::to_string(t));
            }
        }
    }
    return s;
}

}  // namespace gaussdyn::detail
