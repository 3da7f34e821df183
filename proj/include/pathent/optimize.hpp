#pragma once

// One-dimensional search primitives shared by the MaxEnt identification and
// the sweep feature extraction.

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

namespace pathent::detail {

/// Golden-section maximisation of f on [a, b]; returns (argmax, max).
template <typename F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

/// Walks uphill from x0 within [lo, hi] to bracket the local maximum
/// containing it, then refines with golden sections.  Boundary maxima
/// converge to the endpoint.
template <typename F>
std::pair<double, double> local_ascent(F&& f, double lo, double hi, double x0, double step,
                                       double tol) {
    double a = std::max(lo, x0 - step);
    double c = std::min(hi, x0 + step);
    double b = x0;
    double fa = f(a), fb = f(b), fc = f(c);
    while (fc > fb && c < hi) {
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        c = std::min(hi, c + 2.0 * (c - a));
        fc = f(c);
    }
    while (fa > fb && a > lo) {
        c = b;
        fc = fb;
        b = a;
        fb = fa;
        a = std::max(lo, a - 2.0 * (c - a));
        fa = f(a);
    }
    return golden_max(f, a, c, tol);
}

template <typename F>
std::optional<double> bisect_sign_change(F&& f, double a, double b, double tol) {
    double fa = f(a);
    const double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) return std::nullopt;
    while (b - a > tol) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

} // namespace pathent::detail
