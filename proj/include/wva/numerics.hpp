// Copyright 2026 The wva-fisher Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "wva/errors.hpp"

namespace wva {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// ln(n!) through std::lgamma; exact enough for n up to the truncation cap.
inline double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// ln(n!) - [n ln n - n + ln(2 pi n)/2], the Stirling remainder.
inline double stirling_remainder(double n) {
    const double r = 1.0 / n;
    const double r2 = r * r;
    return r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)));
}

/// Poisson mass e^{-m} m^n / n! evaluated in log space.
///
/// For n >= 15 the large terms of -m + n ln m - ln n! are cancelled
/// analytically through Stirling's series, which keeps the relative error
/// near machine precision even at m ~ 10^4.
inline double poisson_mass(double mean, std::size_t n) {
    if (mean <= 0.0) return n == 0 ? 1.0 : 0.0;
    const double nn = static_cast<double>(n);
    if (n < 15) return std::exp(-mean + nn * std::log(mean) - log_factorial(n));
    const double log_p = (nn - mean) + nn * std::log1p((mean - nn) / nn) -
                         0.5 * std::log(2.0 * std::numbers::pi * nn) - stirling_remainder(nn);
    return std::exp(log_p);
}

struct SimpsonOptions {
    std::size_t initial_intervals = 64;
    int max_refinements = 20;
    double rel_tol = 1e-9;
    /// Absolute floor so that integrals which vanish analytically still converge.
    double abs_tol = 1e-14;
};

struct SimpsonResult {
    double value = 0.0;
    std::size_t intervals = 0;
    int refinements = 0;
};

/// Composite Simpson on [lo, hi], halving the step until two successive
/// estimates agree to `rel_tol`. Every previously evaluated node is reused.
template <class F>
SimpsonResult integrate_simpson(F&& f, double lo, double hi, const SimpsonOptions& opt = {}) {
    std::size_t n = opt.initial_intervals;
    if (n < 2) n = 2;
    if (n % 2 != 0) ++n;
    double h = (hi - lo) / static_cast<double>(n);
    double ends = f(lo) + f(hi);
    double even = 0.0;
    double odd = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        double v = f(lo + static_cast<double>(i) * h);
        (i % 2 == 0 ? even : odd) += v;
    }
    double prev = h / 3.0 * (ends + 2.0 * even + 4.0 * odd);
    for (int r = 1; r <= opt.max_refinements; ++r) {
        even += odd;
        odd = 0.0;
        n *= 2;
        h *= 0.5;
        for (std::size_t i = 1; i < n; i += 2) odd += f(lo + static_cast<double>(i) * h);
        double cur = h / 3.0 * (ends + 2.0 * even + 4.0 * odd);
        if (std::abs(cur - prev) <= opt.rel_tol * std::abs(cur) + opt.abs_tol) return {cur, n, r};
        prev = cur;
    }
    throw IntegrationNotConverged("Simpson step halving did not stabilise after " +
                                  std::to_string(opt.max_refinements) + " refinements");
}

struct AdaptiveSimpsonOptions {
    std::size_t initial_panels = 64;
    int max_depth = 50;
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
};

namespace detail {

template <class F>
double adaptive_panel(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth,
                      int max_depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (!std::isfinite(diff)) throw IntegrationNotConverged("integrand is not finite");
    if (std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    if (depth >= max_depth)
        throw IntegrationNotConverged("adaptive Simpson exceeded " + std::to_string(max_depth) + " refinement levels");
    return adaptive_panel(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
           adaptive_panel(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

} // namespace detail

/// Adaptive Simpson on [lo, hi] with a global tolerance of
/// rel_tol * |I| + abs_tol, where |I| comes from a composite first pass over
/// `initial_panels` panels. Unlike uniform step halving this resolves
/// integrands with isolated narrow features (e.g. (dP)^2/P near an almost-zero
/// of P) without refining the smooth bulk.
template <class F>
double integrate_adaptive(F&& f, double lo, double hi, const AdaptiveSimpsonOptions& opt = {}) {
    const std::size_t panels = std::max<std::size_t>(opt.initial_panels, 1);
    const double w = (hi - lo) / static_cast<double>(panels);
    std::vector<double> fx(2 * panels + 1);
    for (std::size_t i = 0; i < fx.size(); ++i) fx[i] = f(lo + 0.5 * w * static_cast<double>(i));
    std::vector<double> whole(panels);
    double first = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
        whole[k] = w / 6.0 * (fx[2 * k] + 4.0 * fx[2 * k + 1] + fx[2 * k + 2]);
        first += whole[k];
    }
    const double tol = (opt.rel_tol * std::abs(first) + opt.abs_tol) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
        const double a = lo + w * static_cast<double>(k);
        total += detail::adaptive_panel(f, a, a + w, fx[2 * k], fx[2 * k + 1], fx[2 * k + 2], whole[k], tol, 0,
                                        opt.max_depth);
    }
    return total;
}

/// Golden-section search for the maximum of a unimodal `f` on [lo, hi].
template <class F>
double golden_section_max(F&& f, double lo, double hi, double tol = 1e-6) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
    auto e = linspace(std::log(lo), std::log(hi), n);
    for (auto& v : e) v = std::exp(v);
    if (n > 1) {
        e.front() = lo;
        e.back() = hi;
    }
    return e;
}

/// n equally spaced angles covering [0, 2pi) without the endpoint.
inline std::vector<double> periodic_grid(std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    return out;
}

} // namespace wva
