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

/// Coherent-state mathematics: amplitudes, truncated Fock expansions,
/// homodyne wavefunctions and overlaps.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "wva/errors.hpp"
#include "wva/numerics.hpp"

namespace wva {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

/// Field amplitude alpha of a coherent state |alpha>.
struct CoherentAmplitude {
    Complex alpha{};

    double n_bar() const { return std::norm(alpha); }

    /// Amplitude with |alpha|^2 = n_bar and argument `phase`.
    static CoherentAmplitude from_n_bar(double n_bar, double phase = 0.0) {
        if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) throw InvalidInput("mean photon number must be finite and >= 0");
        return {std::polar(std::sqrt(n_bar), phase)};
    }

    /// alpha e^{i angle}
    CoherentAmplitude rotated(double angle) const { return {alpha * std::polar(1.0, angle)}; }
};

/// Local-oscillator phase of the homodyne x-quadrature measurement.
struct HomodynePhase {
    double varphi = 0.0;

    /// alpha-tilde = alpha e^{-i varphi}: the amplitude seen in the rotated quadrature frame.
    Complex rotate(Complex alpha) const { return alpha * std::polar(1.0, -varphi); }
};

/// Truncated photon-number representation. `tail_bound` is a certified upper
/// bound on the probability mass beyond `n_max()`.
struct FockVector {
    std::vector<Complex> coeffs;
    double tail_bound = 0.0;

    std::size_t n_max() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& c : coeffs) s += std::norm(c);
        return s;
    }

    Complex inner(const FockVector& other) const {
        Complex s{};
        std::size_t n = std::min(coeffs.size(), other.coeffs.size());
        for (std::size_t i = 0; i < n; ++i) s += std::conj(coeffs[i]) * other.coeffs[i];
        return s;
    }
};

struct TruncationPolicy {
    double tol = 1e-12;
    std::size_t hard_cap = 1'000'000;
    /// Stretches the certified cutoff; used to check truncation stability.
    double n_max_multiplier = 1.0;
};

struct Cutoff {
    std::size_t n_max = 0;
    double tail_bound = 0.0;
};

/// Smallest N whose Poisson(n_bar) tail beyond N is certified below `policy.tol`.
///
/// For N + 2 > n_bar the mass ratio p_{n+1}/p_n = n_bar/(n+1) is below
/// r = n_bar/(N+2) for every n > N, so the tail is bounded by the geometric
/// series p_{N+1} / (1 - r). The scan starts at the mode and is guided by the
/// n_bar + 10 sqrt(n_bar) + 20 heuristic, continuing past it if `tol` demands.
inline Cutoff fock_cutoff(double n_bar, const TruncationPolicy& policy = {}) {
    if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) throw InvalidInput("mean photon number must be finite and >= 0");
    if (n_bar == 0.0) return {0, 0.0};
    if (n_bar > static_cast<double>(policy.hard_cap))
        throw TruncationOverflow("mean photon number exceeds the truncation hard cap");
    auto tail = [&](std::size_t N) {
        double r = n_bar / (static_cast<double>(N) + 2.0);
        return poisson_mass(n_bar, N + 1) / (1.0 - r);
    };
    std::size_t N = static_cast<std::size_t>(std::floor(n_bar));
    const auto heuristic = static_cast<std::size_t>(n_bar + 10.0 * std::sqrt(n_bar) + 20.0);
    // Coarse jump: the bound is monotone for N >= n_bar, so probe the heuristic first.
    if (heuristic > N && tail(heuristic) < policy.tol) {
        std::size_t lo = N, hi = heuristic;
        while (hi - lo > 1) {
            std::size_t mid = lo + (hi - lo) / 2;
            (tail(mid) < policy.tol ? hi : lo) = mid;
        }
        N = tail(lo) < policy.tol ? lo : hi;
    } else {
        N = std::max(N, heuristic);
        while (tail(N) >= policy.tol) {
            ++N;
            if (N > policy.hard_cap) throw TruncationOverflow("Fock truncation exceeds the hard cap");
        }
    }
    if (policy.n_max_multiplier != 1.0)
        N = static_cast<std::size_t>(std::ceil(policy.n_max_multiplier * static_cast<double>(N)));
    if (N > policy.hard_cap) throw TruncationOverflow("Fock truncation exceeds the hard cap");
    return {N, tail(N)};
}

/// Coefficients e^{-|a|^2/2} a^n / sqrt(n!) up to `n_max`, computed by the
/// multiplicative recurrence run outward from the Poisson mode so that large
/// n_bar never underflows the seed value.
inline std::vector<Complex> coherent_coefficients(Complex alpha, std::size_t n_max) {
    std::vector<Complex> c(n_max + 1, Complex{});
    const double nb = std::norm(alpha);
    if (nb == 0.0) {
        c[0] = 1.0;
        return c;
    }
    const std::size_t mode = std::min<std::size_t>(static_cast<std::size_t>(std::floor(nb)), n_max);
    const double arg = std::arg(alpha);
    c[mode] = std::polar(std::sqrt(poisson_mass(nb, mode)), static_cast<double>(mode) * arg);
    for (std::size_t n = mode; n < n_max; ++n) c[n + 1] = c[n] * alpha / std::sqrt(static_cast<double>(n + 1));
    for (std::size_t n = mode; n > 0; --n) c[n - 1] = c[n] * std::sqrt(static_cast<double>(n)) / alpha;
    return c;
}

/// Expansion on a caller-chosen range, e.g. a cutoff shared by several states.
inline FockVector fock_expand_to(const CoherentAmplitude& a, std::size_t n_max) {
    double tail = 0.0;
    if (a.n_bar() > 0.0) {
        const double r = a.n_bar() / (static_cast<double>(n_max) + 2.0);
        tail = r < 1.0 ? poisson_mass(a.n_bar(), n_max + 1) / (1.0 - r) : 1.0;
    }
    return {coherent_coefficients(a.alpha, n_max), tail};
}

inline FockVector fock_expand(const CoherentAmplitude& a, const TruncationPolicy& policy = {}) {
    if (!(policy.tol > 0.0)) throw InvalidInput("truncation tolerance must be positive");
    auto cut = fock_cutoff(a.n_bar(), policy);
    return {coherent_coefficients(a.alpha, cut.n_max), cut.tail_bound};
}

/// <a1|a2> = exp(-(|a1|^2 + |a2|^2)/2 + conj(a1) a2)
inline Complex coherent_overlap(const CoherentAmplitude& a1, const CoherentAmplitude& a2) {
    return std::exp(-0.5 * (a1.n_bar() + a2.n_bar()) + std::conj(a1.alpha) * a2.alpha);
}

/// <x|alpha> in the quadrature frame rotated by the local-oscillator phase:
/// pi^{-1/4} exp((at^2 - |at|^2 - (x - sqrt2 at)^2) / 2) with at = alpha e^{-i varphi}.
/// The phase is fixed so that integrated overlaps reproduce coherent_overlap.
inline Complex coherent_wavefunction(const CoherentAmplitude& a, const HomodynePhase& phase, double x) {
    const Complex at = phase.rotate(a.alpha);
    const Complex shift = x - std::numbers::sqrt2 * at;
    return std::pow(kPi, -0.25) * std::exp(0.5 * (at * at - std::norm(at) - shift * shift));
}

/// Mean of |<x|alpha>|^2, which is a Gaussian of variance 1/2.
inline double quadrature_mean(const CoherentAmplitude& a, const HomodynePhase& phase) {
    return std::numbers::sqrt2 * phase.rotate(a.alpha).real();
}

inline constexpr double kQuadratureSigma = 0.70710678118654752440;

} // namespace wva
