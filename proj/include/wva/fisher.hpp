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

/// Quantum and classical Fisher information of the post-selected meter, and
/// the conventional (no post-selection, system in |g>) baselines.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "wva/errors.hpp"
#include "wva/numerics.hpp"
#include "wva/policy.hpp"
#include "wva/postselect.hpp"
#include "wva/qstate.hpp"

namespace wva {

/// What an FI value measures. The aav_* tags mark the small-lambda
/// approximations of the photon-number FI.
enum class Scheme { photon_number, quadrature, qfi, conventional_quadrature, conventional_qfi, aav_leading, aav_next };

inline std::string_view to_string(Scheme s) {
    switch (s) {
    case Scheme::photon_number: return "photon_number";
    case Scheme::quadrature: return "quadrature";
    case Scheme::qfi: return "qfi";
    case Scheme::conventional_quadrature: return "conventional_quadrature";
    case Scheme::conventional_qfi: return "conventional_qfi";
    case Scheme::aav_leading: return "aav_leading";
    case Scheme::aav_next: return "aav_next";
    }
    return "unknown";
}

struct ParamEcho {
    double theta_i = 0.0;
    double theta_f = 0.0;
    double phi0 = 0.0;
    Complex alpha{};
    double n_bar = 0.0;
    double lambda = 0.0;
    std::optional<double> varphi;
};

struct FisherReport {
    Scheme scheme = Scheme::qfi;
    double p_a = 1.0;
    double fisher = 0.0;
    double weighted = 0.0;
    ParamEcho meta;
};

inline ParamEcho echo(const PostSelectedMeter& m, std::optional<double> varphi = std::nullopt) {
    return {m.pre.theta, m.post.theta, m.phi0(), m.alpha.alpha, m.n_bar(), m.lambda, varphi};
}

inline FisherReport make_report(Scheme s, double p_a, double fisher, ParamEcho meta) {
    return {s, p_a, fisher, p_a * fisher, std::move(meta)};
}

/// Sum of dP^2 / P over outcomes, leaving out P < skip_rel * max P.
inline double discrete_fisher(const std::vector<double>& prob, const std::vector<double>& dprob, double skip_rel) {
    double pmax = 0.0;
    for (double p : prob) pmax = std::max(pmax, p);
    const double floor = skip_rel * pmax;
    double f = 0.0;
    for (std::size_t n = 0; n < prob.size(); ++n)
        if (prob[n] > floor && prob[n] > 0.0) f += dprob[n] * dprob[n] / prob[n];
    return f;
}

// ---------------------------------------------------------------------------
// Quantum Fisher information

/// Q_a = 4 [<dPhi|dPhi> - |<Phi|dPhi>|^2] with d|Phi_f>/d lambda taken
/// analytically in the truncated Fock basis. The normalisation derivative
/// uses the closed-form d p_a / d lambda.
inline FisherReport qfi_postselected(const PostSelectedMeter& m, const NumericPolicy& policy = {}) {
    require_postselection(m.p_a, policy);
    const auto f = fock_expand(m.alpha, policy.truncation);
    const double inv = 1.0 / std::sqrt(m.p_a);
    const double dlogp = success_probability_derivative(m.pre, m.post, m.n_bar(), m.lambda) / m.p_a;
    double dd = 0.0;
    Complex cd{};
    for (std::size_t n = 0; n < f.coeffs.size(); ++n) {
        const double nn = static_cast<double>(n);
        const Complex e_minus = std::polar(1.0, -m.lambda * nn);
        const Complex e_plus = std::conj(e_minus);
        const Complex c = (m.u1 * e_minus + m.u2 * e_plus) * f.coeffs[n] * inv;
        const Complex dc = kI * nn * (m.u2 * e_plus - m.u1 * e_minus) * f.coeffs[n] * inv - 0.5 * dlogp * c;
        dd += std::norm(dc);
        cd += std::conj(c) * dc;
    }
    const double q = std::max(0.0, 4.0 * (dd - std::norm(cd)));
    return make_report(Scheme::qfi, m.p_a, q, echo(m));
}

/// Q_cm = 4 |alpha|^2 for |alpha e^{-i lambda}>.
inline FisherReport conventional_qfi(const CoherentAmplitude& alpha) {
    ParamEcho meta{0.0, 0.0, 0.0, alpha.alpha, alpha.n_bar(), 0.0, std::nullopt};
    return make_report(Scheme::conventional_qfi, 1.0, 4.0 * alpha.n_bar(), meta);
}

// ---------------------------------------------------------------------------
// Photon-number measurement

struct PhotonDistribution {
    std::vector<double> prob;
    std::vector<double> dprob; ///< d P(n) / d lambda
    double p_a = 0.0;
};

/// P_f(n) = e^{-n_bar} n_bar^n / n! [A + B cos(2 lambda n + phi0)] / p_a, with
/// A = [1 + cos ti cos tf]/2 and B = sin ti sin tf / 2, plus its analytic
/// lambda derivative.
inline PhotonDistribution pn_distribution(const PostSelectedMeter& m, const NumericPolicy& policy = {}) {
    const double nb = m.n_bar();
    const double pa = success_probability(m.pre, m.post, nb, m.lambda);
    require_postselection(pa, policy);
    const double dpa = success_probability_derivative(m.pre, m.post, nb, m.lambda);
    const double a = 0.5 * (1.0 + std::cos(m.pre.theta) * std::cos(m.post.theta));
    const double b = 0.5 * std::sin(m.pre.theta) * std::sin(m.post.theta);
    const auto cut = fock_cutoff(nb, policy.truncation);
    PhotonDistribution d;
    d.p_a = pa;
    d.prob.resize(cut.n_max + 1);
    d.dprob.resize(cut.n_max + 1);
    for (std::size_t n = 0; n <= cut.n_max; ++n) {
        const double nn = static_cast<double>(n);
        const double pn = poisson_mass(nb, n);
        const double arg = 2.0 * m.lambda * nn + m.phi0();
        const double k = a + b * std::cos(arg);
        const double dk = -2.0 * nn * b * std::sin(arg);
        d.prob[n] = pn * k / pa;
        d.dprob[n] = pn * (dk * pa - k * dpa) / (pa * pa);
    }
    return d;
}

inline FisherReport fi_photon(const PostSelectedMeter& m, const NumericPolicy& policy = {}) {
    const auto d = pn_distribution(m, policy);
    return make_report(Scheme::photon_number, d.p_a, discrete_fisher(d.prob, d.dprob, policy.skip_rel), echo(m));
}

// ---------------------------------------------------------------------------
// Quadrature measurement

/// Density |u1 psi1(x) + u2 psi2(x)|^2 / p_a of the homodyne outcome, where
/// psi_{1,2} are the quadrature wavefunctions of the two meter branches.
class QuadratureDistribution {
  public:
    QuadratureDistribution(Complex u1, Complex u2, Complex at_minus, Complex at_plus, double p_a, double dp_a,
                           double window_sigmas)
        : u1_(u1), u2_(u2), at1_(at_minus), at2_(at_plus), p_a_(p_a), dp_a_(dp_a) {
        const double m1 = std::numbers::sqrt2 * at1_.real();
        const double m2 = std::numbers::sqrt2 * at2_.real();
        lo_ = std::min(m1, m2) - window_sigmas * kQuadratureSigma;
        hi_ = std::max(m1, m2) + window_sigmas * kQuadratureSigma;
        c1_ = -0.25 * std::log(kPi) + 0.5 * (-at1_ * at1_ - std::norm(at1_));
        c2_ = -0.25 * std::log(kPi) + 0.5 * (-at2_ * at2_ - std::norm(at2_));
    }

    double operator()(double x) const { return std::norm(amplitude(x)) / p_a_; }

    /// (P(x), dP(x)/d lambda)
    std::pair<double, double> with_derivative(double x) const {
        const Complex psi1 = wave(c1_, at1_, x);
        const Complex psi2 = wave(c2_, at2_, x);
        const Complex psi = u1_ * psi1 + u2_ * psi2;
        const double s2x = std::numbers::sqrt2 * x;
        const Complex dpsi = u1_ * psi1 * (s2x - at1_) * (-kI * at1_) + u2_ * psi2 * (s2x - at2_) * (kI * at2_);
        const double mod2 = std::norm(psi);
        return {mod2 / p_a_, 2.0 * std::real(std::conj(psi) * dpsi) / p_a_ - mod2 * dp_a_ / (p_a_ * p_a_)};
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double p_a() const { return p_a_; }

  private:
    Complex amplitude(double x) const { return u1_ * wave(c1_, at1_, x) + u2_ * wave(c2_, at2_, x); }

    // pi^{-1/4} exp((at^2 - |at|^2 - (x - sqrt2 at)^2)/2); the x-independent
    // part of the exponent is precomputed in log_c.
    static Complex wave(Complex log_c, Complex at, double x) {
        return std::exp(log_c - 0.5 * x * x + std::numbers::sqrt2 * at * x);
    }

    Complex u1_, u2_, at1_, at2_;
    double p_a_, dp_a_;
    Complex c1_, c2_;
    double lo_ = 0.0, hi_ = 0.0;
};

/// Gaussian x-quadrature density of |alpha e^{-i lambda}> (no post-selection).
inline QuadratureDistribution conventional_quadrature_distribution(const CoherentAmplitude& alpha,
                                                                   const HomodynePhase& phase, double lambda,
                                                                   double window_sigmas = 12.0) {
    const Complex at = phase.rotate(alpha.rotated(-lambda).alpha);
    return {1.0, 0.0, at, at, 1.0, 0.0, window_sigmas};
}

/// F_cm = 4 Im^2(alpha-tilde e^{-i lambda}); 4|alpha|^2 sin^2(varphi + lambda) for real alpha.
inline FisherReport conventional_quadrature_fi(const CoherentAmplitude& alpha, const HomodynePhase& phase,
                                               double lambda) {
    const double im = std::imag(phase.rotate(alpha.alpha) * std::polar(1.0, -lambda));
    ParamEcho meta{0.0, 0.0, 0.0, alpha.alpha, alpha.n_bar(), lambda, phase.varphi};
    return make_report(Scheme::conventional_quadrature, 1.0, 4.0 * im * im, meta);
}

inline QuadratureDistribution wva_quadrature_distribution(const PostSelectedMeter& m, const HomodynePhase& phase,
                                                          const NumericPolicy& policy = {}) {
    require_postselection(m.p_a, policy);
    const double dpa = success_probability_derivative(m.pre, m.post, m.n_bar(), m.lambda);
    return {m.u1,
            m.u2,
            phase.rotate(m.branch_minus.alpha),
            phase.rotate(m.branch_plus.alpha),
            m.p_a,
            dpa,
            policy.window_sigmas};
}

/// Integral of (dP/d lambda)^2 / P over the certified Simpson window.
inline double quadrature_fisher(const QuadratureDistribution& dist, const NumericPolicy& policy = {}) {
    const double skip = policy.quadrature_skip;
    auto integrand = [&](double x) {
        auto [p, dp] = dist.with_derivative(x);
        return p < skip ? 0.0 : dp * dp / p;
    };
    return integrate_adaptive(integrand, dist.lo(), dist.hi(), policy.fisher_integration);
}

inline FisherReport fi_quadrature(const PostSelectedMeter& m, const HomodynePhase& phase,
                                  const NumericPolicy& policy = {}) {
    const auto dist = wva_quadrature_distribution(m, phase, policy);
    return make_report(Scheme::quadrature, m.p_a, quadrature_fisher(dist, policy), echo(m, phase.varphi));
}

struct PhaseOptimum {
    double varphi = 0.0;
    FisherReport report;
};

/// Local-oscillator phase maximising F^(x). Shifting varphi by pi mirrors
/// P_f(x) about x = 0, so only the first half of the `grid_points` phases in
/// [0, 2pi) is scanned; golden-section refinement follows around the best one.
inline PhaseOptimum optimize_phase(const PostSelectedMeter& m, const NumericPolicy& policy = {},
                                   std::size_t grid_points = 720, double tol = 1e-6) {
    require_postselection(m.p_a, policy);
    if (grid_points < 2) throw InvalidInput("phase grid needs at least 2 points");
    auto fi = [&](double phi) { return fi_quadrature(m, HomodynePhase{phi}, policy).fisher; };
    const auto grid = periodic_grid(grid_points);
    const std::size_t half = (grid_points + 1) / 2;
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::size_t i = 0; i < half; ++i) {
        const double v = fi(grid[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double h = kTwoPi / static_cast<double>(grid_points);
    const double refined = golden_section_max(fi, grid[best] - h, grid[best] + h, tol);
    double phi = grid[best];
    if (fi(refined) > best_val) phi = refined - kPi * std::floor(refined / kPi);
    return {phi, fi_quadrature(m, HomodynePhase{phi}, policy)};
}

} // namespace wva
