#pragma once

// Globally adaptive Gauss-Kronrod (7, 15) quadrature.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "gaussdyn/errors.hpp"

namespace gaussdyn {

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    // Maximum bisection depth of any panel.
    int max_depth = 40;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_depth < 1) {
            throw InvalidArgument("quadrature tolerances and depth must be positive");
        }
    }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
};

namespace quad_detail {

inline constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                  0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                  0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                 0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    int depth;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b, int depth) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * wgk[7];
    double gauss = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[j];
        const double fsum = f(c - dx) + f(c + dx);
        kron += wgk[j] * fsum;
        if (j % 2 == 1) gauss += wg[j / 2] * fsum;
    }
    return {a, b, kron * h, std::abs((kron - gauss) * h), depth};
}

}  // namespace quad_detail

// Integrates f over [a, b]; panels never exceed max_panel. Converged when the
// summed error estimate is below max(abs_tol, rel_tol |I|).
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, const QuadratureConfig& cfg,
                              double max_panel = std::numeric_limits<double>::infinity()) {
    using quad_detail::Panel;
    QuadResult res;
    if (a == b) return res;
    const double sign = b > a ? 1.0 : -1.0;
    if (b < a) std::swap(a, b);
    const std::size_t n0 =
        std::isfinite(max_panel) ? std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / max_panel)))
                                 : 1;
    std::priority_queue<Panel> heap;
    double total = 0.0, err = 0.0;
    for (std::size_t k = 0; k < n0; ++k) {
        const double pa = a + (b - a) * static_cast<double>(k) / static_cast<double>(n0);
        const double pb = k + 1 == n0 ? b : a + (b - a) * static_cast<double>(k + 1) / static_cast<double>(n0);
        Panel p = quad_detail::gk15(f, pa, pb, 0);
        total += p.value;
        err += p.error;
        heap.push(p);
    }
    res.evaluations = 15 * n0;
    while (err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
        Panel p = heap.top();
        heap.pop();
        if (p.depth >= cfg.max_depth) {
            throw QuadratureNoConvergence("quadrature did not converge on [" + std::to_string(p.a) + ", " +
                                          std::to_string(p.b) + "]");
        }
        const double m = 0.5 * (p.a + p.b);
        Panel l = quad_detail::gk15(f, p.a, m, p.depth + 1);
        Panel r = quad_detail::gk15(f, m, p.b, p.depth + 1);
        res.evaluations += 30;
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        heap.push(l);
        heap.push(r);
    }
    // Recompute the sum from the panels to shed accumulated cancellation.
    total = 0.0;
    err = 0.0;
    std::vector<Panel> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    for (const Panel& p : panels) {
        total += p.value;
        err += p.error;
    }
    res.value = sign * total;
    res.error = err;
    return res;
}

}  // namespace gaussdyn
