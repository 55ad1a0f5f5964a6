#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "gaussdyn/errors.hpp"

namespace gaussdyn::ode {

template <std::size_t N, class T = double>
using Vec = std::array<T, N>;

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 1e-12;
};

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

namespace detail {

// Butcher tableau of the Dormand-Prince 5(4) pair, rounded once in the working precision.
template <class T>
struct Tableau {
    T a21, a31, a32, a41, a42, a43, a51, a52, a53, a54, a61, a62, a63, a64, a65;
    T b1, b3, b4, b5, b6;
    // Difference between the 5th- and 4th-order weights.
    T e1, e3, e4, e5, e6, e7;

    static const Tableau& get() {
        static const Tableau tab = [] {
            auto q = [](double n, double d) { return static_cast<T>(n) / static_cast<T>(d); };
            Tableau r{};
            r.a21 = q(1, 5);
            r.a31 = q(3, 40), r.a32 = q(9, 40);
            r.a41 = q(44, 45), r.a42 = q(-56, 15), r.a43 = q(32, 9);
            r.a51 = q(19372, 6561), r.a52 = q(-25360, 2187), r.a53 = q(64448, 6561), r.a54 = q(-212, 729);
            r.a61 = q(9017, 3168), r.a62 = q(-355, 33), r.a63 = q(46732, 5247), r.a64 = q(49, 176),
            r.a65 = q(-5103, 18656);
            r.b1 = q(35, 384), r.b3 = q(500, 1113), r.b4 = q(125, 192), r.b5 = q(-2187, 6784), r.b6 = q(11, 84);
            r.e1 = q(71, 57600), r.e3 = q(-71, 16695), r.e4 = q(71, 1920), r.e5 = q(-17253, 339200),
            r.e6 = q(22, 525), r.e7 = q(-1, 40);
            return r;
        }();
        return tab;
    }
};

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

template <std::size_t N, class T>
double error_norm(const Vec<N, T>& err, const Vec<N, T>& y0, const Vec<N, T>& y1, const StepControl& sc) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double scale =
            sc.atol + sc.rtol * std::max(std::abs(static_cast<double>(y0[i])), std::abs(static_cast<double>(y1[i])));
        const double r = static_cast<double>(err[i]) / scale;
        s += r * r;
    }
    return std::sqrt(s / static_cast<double>(N));
}

}  // namespace detail

// Integrates y' = f(t, y) from ta to tb. Steps are clipped so that every time in
// `stops` (sorted, inside (ta, tb]) is hit exactly; observer(t, y) runs at each stop.
// `h` carries the step-size guess in and the last unclipped step out (0 = choose).
template <std::size_t N, class T = double, class F, class Observer>
Vec<N, T> integrate(F&& f, double ta, Vec<N, T> y, double tb, const std::vector<double>& stops, const StepControl& sc,
                 Observer&& observer, double& h, Stats* stats = nullptr) {
    using namespace detail;
    const Tableau<T>& k = Tableau<T>::get();
    if (!(tb > ta)) {
        return y;
    }
    const double span = tb - ta;
    const double hmax = std::min(sc.max_step, span);
    Vec<N, T> k1 = f(ta, y);
    if (h <= 0.0) {
        // Initial guess from the scaled derivative norm.
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double yi = static_cast<double>(y[i]);
            const double ki = static_cast<double>(k1[i]);
            const double scale = sc.atol + sc.rtol * std::abs(yi);
            d0 += (yi / scale) * (yi / scale);
            d1 += (ki / scale) * (ki / scale);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h = std::min(h, hmax);
    }
    h = std::min(h, hmax);

    auto stop_it = std::lower_bound(stops.begin(), stops.end(), ta, [](double s, double t) { return s <= t; });
    double t = ta;
    Vec<N, T> k2, k3, k4, k5, k6, k7, yt, ynew, err;
    const double snap = 8.0 * std::numeric_limits<double>::epsilon();

    while (t < tb) {
        double target = tb;
        if (stop_it != stops.end() && *stop_it < tb) {
            target = *stop_it;
        }
        double step = std::min(h, hmax);
        bool clipped = false;
        if (t + step >= target - snap * std::max(1.0, std::abs(target))) {
            step = target - t;
            clipped = true;
        }

        const T hs = static_cast<T>(step);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (k.a21 * k1[i]);
        k2 = f(t + c2 * step, yt);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (k.a31 * k1[i] + k.a32 * k2[i]);
        k3 = f(t + c3 * step, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (k.a41 * k1[i] + k.a42 * k2[i] + k.a43 * k3[i]);
        k4 = f(t + c4 * step, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (k.a51 * k1[i] + k.a52 * k2[i] + k.a53 * k3[i] + k.a54 * k4[i]);
        k5 = f(t + c5 * step, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] +
                    hs * (k.a61 * k1[i] + k.a62 * k2[i] + k.a63 * k3[i] + k.a64 * k4[i] + k.a65 * k5[i]);
        const double tn = clipped ? target : t + step;
        k6 = f(t + step, yt);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + hs * (k.b1 * k1[i] + k.b3 * k3[i] + k.b4 * k4[i] + k.b5 * k5[i] + k.b6 * k6[i]);
        k7 = f(tn, ynew);
        for (std::size_t i = 0; i < N; ++i)
            err[i] = hs * (k.e1 * k1[i] + k.e3 * k3[i] + k.e4 * k4[i] + k.e5 * k5[i] + k.e6 * k6[i] +
                           k.e7 * k7[i]);

        const double en = error_norm(err, y, ynew, sc);
        if (!std::isfinite(en)) {
            throw StepFailure("non-finite state during integration at t = " + std::to_string(t));
        }
        const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        if (en <= 1.0) {
            t = tn;
            y = ynew;
            k1 = k7;
            if (stats) ++stats->accepted;
            if (clipped && stop_it != stops.end() && target == *stop_it) {
                observer(t, y);
                ++stop_it;
            }
            // A clipped step says nothing about the attainable size; keep the old guess then.
            if (!clipped || fac < 1.0) {
                h = std::min(step * fac, hmax);
            }
        } else {
            if (stats) ++stats->rejected;
            h = step * std::min(1.0, fac);
            if (h < sc.min_step) {
                throw StepFailure("step size fell below " + std::to_string(sc.min_step) + " at t = " +
                                  std::to_string(t));
            }
        }
    }
    return y;
}

}  // namespace gaussdyn::ode
