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

/// Classical mixtures of coherent states as meters: moments, the
/// post-selected photon-number distribution, its Fisher information and the
/// small-lambda weak-value approximations.

#include <algorithm>
#include <cmath>
#include <vector>

#include "wva/errors.hpp"
#include "wva/fisher.hpp"
#include "wva/numerics.hpp"
#include "wva/policy.hpp"
#include "wva/postselect.hpp"
#include "wva/qstate.hpp"

namespace wva {

struct EnsembleComponent {
    double weight = 1.0;
    CoherentAmplitude amplitude;
};

/// rho = sum_j w_j |alpha_j><alpha_j|
class MeterEnsemble {
  public:
    explicit MeterEnsemble(std::vector<EnsembleComponent> components) : components_(std::move(components)) {
        if (components_.empty()) throw InvalidInput("ensemble needs at least one component");
        double total = 0.0;
        for (const auto& c : components_) {
            if (!(c.weight >= 0.0)) throw InvalidInput("ensemble weights must be non-negative");
            total += c.weight;
        }
        if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("ensemble weights must sum to 1");
    }

    static MeterEnsemble pure(const CoherentAmplitude& alpha) { return MeterEnsemble({{1.0, alpha}}); }

    /// Equal-weight mixture of |alpha>, |alpha + delta>, |alpha - delta>.
    static MeterEnsemble three_component(Complex alpha, Complex delta) {
        const double w = 1.0 / 3.0;
        return MeterEnsemble({{w, {alpha}}, {w, {alpha + delta}}, {1.0 - 2.0 * w, {alpha - delta}}});
    }

    const std::vector<EnsembleComponent>& components() const { return components_; }

    double max_component_n_bar() const {
        double m = 0.0;
        for (const auto& c : components_) m = std::max(m, c.amplitude.n_bar());
        return m;
    }

  private:
    std::vector<EnsembleComponent> components_;
};

/// Real delta >= 0 with |alpha|^2 + 2 delta^2 / 3 = n_bar.
inline double solve_delta_for_n_bar(Complex alpha, double n_bar) {
    const double excess = n_bar - std::norm(alpha);
    if (excess < 0.0) throw InvalidInput("target n_bar is below |alpha|^2");
    return std::sqrt(1.5 * excess);
}

struct EnsembleMoments {
    double n_bar = 0.0;
    double variance = 0.0;
    double third_central = 0.0;
};

/// Exact moments of the Poisson mixture.
inline EnsembleMoments ensemble_moments(const MeterEnsemble& e) {
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (const auto& c : e.components()) {
        const double m = c.amplitude.n_bar();
        m1 += c.weight * m;
        m2 += c.weight * (m * m + m);
        m3 += c.weight * (m * m * m + 3.0 * m * m + m);
    }
    const double var = std::max(0.0, m2 - m1 * m1);
    return {m1, var, m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1};
}

/// Closed form of the three-component photon-number variance:
/// (2/9)|d|^4 + (4/3)[|a d|^2 + Re(a^2 conj(d)^2)] + n_bar.
inline double three_component_variance(Complex alpha, Complex delta) {
    const double nb = std::norm(alpha) + 2.0 / 3.0 * std::norm(delta);
    const double d2 = std::norm(delta);
    return 2.0 / 9.0 * d2 * d2 +
           4.0 / 3.0 * (std::norm(alpha * delta) + std::real(alpha * alpha * std::conj(delta) * std::conj(delta))) + nb;
}

/// Mixture photon-number mass p-bar(n) = sum_j w_j Poisson(|alpha_j|^2; n) on [0, n_max].
inline std::vector<double> mixture_mass(const MeterEnsemble& e, std::size_t n_max) {
    std::vector<double> p(n_max + 1, 0.0);
    for (const auto& c : e.components())
        for (std::size_t n = 0; n <= n_max; ++n) p[n] += c.weight * poisson_mass(c.amplitude.n_bar(), n);
    return p;
}

/// Success probability of the mixture: sum_j w_j p_a(n_bar_j).
inline double ensemble_success_probability(const MeterEnsemble& e, const QubitState& pre, const QubitState& post,
                                           double lambda) {
    double p = 0.0;
    for (const auto& c : e.components()) p += c.weight * success_probability(pre, post, c.amplitude.n_bar(), lambda);
    return p;
}

inline double ensemble_success_probability_derivative(const MeterEnsemble& e, const QubitState& pre,
                                                      const QubitState& post, double lambda) {
    double p = 0.0;
    for (const auto& c : e.components())
        p += c.weight * success_probability_derivative(pre, post, c.amplitude.n_bar(), lambda);
    return p;
}

/// K_n = [1 + cos ti cos tf + sin ti sin tf cos(2 lambda n + phi0)] / 2
inline double postselection_prefactor(const QubitState& pre, const QubitState& post, double lambda, double n) {
    return 0.5 * (1.0 + std::cos(pre.theta) * std::cos(post.theta) +
                  std::sin(pre.theta) * std::sin(post.theta) * std::cos(2.0 * lambda * n + relative_phase(pre, post)));
}

/// P_f(n) = K_n p-bar(n) / p-tilde_a for the mixture, with its lambda derivative.
/// Truncation follows the brightest component.
inline PhotonDistribution mixed_pn_distribution(const MeterEnsemble& e, const QubitState& pre,
                                                const QubitState& post, double lambda,
                                                const NumericPolicy& policy = {}) {
    const double pa = ensemble_success_probability(e, pre, post, lambda);
    require_postselection(pa, policy);
    const double dpa = ensemble_success_probability_derivative(e, pre, post, lambda);
    const auto cut = fock_cutoff(e.max_component_n_bar(), policy.truncation);
    const auto pbar = mixture_mass(e, cut.n_max);
    const double b = std::sin(pre.theta) * std::sin(post.theta);
    const double phi0 = relative_phase(pre, post);
    PhotonDistribution d;
    d.p_a = pa;
    d.prob.resize(pbar.size());
    d.dprob.resize(pbar.size());
    for (std::size_t n = 0; n < pbar.size(); ++n) {
        const double nn = static_cast<double>(n);
        const double k = postselection_prefactor(pre, post, lambda, nn);
        const double dk = -b * nn * std::sin(2.0 * lambda * nn + phi0);
        d.prob[n] = k * pbar[n] / pa;
        d.dprob[n] = pbar[n] * (dk * pa - k * dpa) / (pa * pa);
    }
    return d;
}

inline FisherReport fi_mixed_photon(const MeterEnsemble& e, const QubitState& pre, const QubitState& post,
                                    double lambda, const NumericPolicy& policy = {}) {
    const auto d = mixed_pn_distribution(e, pre, post, lambda, policy);
    const auto mom = ensemble_moments(e);
    ParamEcho meta{pre.theta, post.theta, relative_phase(pre, post), {}, mom.n_bar, lambda, std::nullopt};
    return make_report(Scheme::photon_number, d.p_a, discrete_fisher(d.prob, d.dprob, policy.skip_rel), meta);
}

enum class AavOrder { leading, next };

/// Small-lambda approximations of the photon-number FI.
///   leading: 4 (Im w)^2 (Delta n)^2
///   next:    4 (Im w)^2 sum_n (n - n_bar)^2 / (1 - 2 lambda Im w (n - n_bar)) p-bar(n)
/// where w is the weak value of sigma_z.
inline double aav_fi_approx(const MeterEnsemble& e, const QubitState& pre, const QubitState& post, double lambda,
                            AavOrder order, const NumericPolicy& policy = {}) {
    const double imw = weak_value(pre, post, policy.weak_value_threshold).value.imag();
    const auto mom = ensemble_moments(e);
    if (order == AavOrder::leading) return 4.0 * imw * imw * mom.variance;

    const auto cut = fock_cutoff(e.max_component_n_bar(), policy.truncation);
    const double reach = std::max(static_cast<double>(cut.n_max) - mom.n_bar, mom.n_bar);
    if (!(2.0 * lambda * std::abs(imw) * reach < 1.0))
        throw ExpansionInvalid("2 lambda |Im w| (n - n_bar) reaches 1 inside the truncated range");
    const auto pbar = mixture_mass(e, cut.n_max);
    double s = 0.0;
    for (std::size_t n = 0; n < pbar.size(); ++n) {
        const double dn = static_cast<double>(n) - mom.n_bar;
        s += dn * dn / (1.0 - 2.0 * lambda * imw * dn) * pbar[n];
    }
    return 4.0 * imw * imw * s;
}

/// The approximation packaged with the exact mixture success probability.
inline FisherReport aav_fi_report(const MeterEnsemble& e, const QubitState& pre, const QubitState& post,
                                  double lambda, AavOrder order, const NumericPolicy& policy = {}) {
    const double fisher = aav_fi_approx(e, pre, post, lambda, order, policy);
    const double pa = ensemble_success_probability(e, pre, post, lambda);
    ParamEcho meta{pre.theta, post.theta, relative_phase(pre, post), {}, ensemble_moments(e).n_bar, lambda, std::nullopt};
    return make_report(order == AavOrder::leading ? Scheme::aav_leading : Scheme::aav_next, pa, fisher, meta);
}

} // namespace wva
