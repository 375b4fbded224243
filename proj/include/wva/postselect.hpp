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

/// Pre/post-selected qubit states, the conditioned meter state and weak values.
///
/// Sign convention: sigma_z = |e><e| - |g><g| and the coupling is
/// U = exp(i lambda sigma_z n), so |g> is paired with |alpha e^{-i lambda}>
/// and |e> with |alpha e^{+i lambda}>.

#include <cmath>
#include <complex>
#include <vector>

#include "wva/errors.hpp"
#include "wva/policy.hpp"
#include "wva/qstate.hpp"

namespace wva {

/// cos(theta/2)|g> + sin(theta/2) e^{i phi}|e>
struct QubitState {
    double theta = 0.0;
    double phi = 0.0;

    Complex ground() const { return std::cos(0.5 * theta); }
    Complex excited() const { return std::polar(std::sin(0.5 * theta), phi); }

    static QubitState ground_state() { return {0.0, 0.0}; }
};

/// phi_0 = phi_i - phi_f
inline double relative_phase(const QubitState& pre, const QubitState& post) { return pre.phi - post.phi; }

/// Everything about a single post-selected meter: the branch weights
/// u1, u2, the branch amplitudes alpha e^{-+i lambda}, and the success
/// probability p_a, together with the inputs that produced them.
struct PostSelectedMeter {
    QubitState pre;
    QubitState post;
    CoherentAmplitude alpha;
    double lambda = 0.0;

    Complex u1;
    Complex u2;
    CoherentAmplitude branch_minus;
    CoherentAmplitude branch_plus;
    double p_a = 0.0;

    double phi0() const { return relative_phase(pre, post); }
    double n_bar() const { return alpha.n_bar(); }
};

/// Closed angle form of the success probability for mean photon number n_bar:
/// p_a = [1 + cos ti cos tf + sin ti sin tf e^{-2 n sin^2 l} cos(n sin 2l + phi0)] / 2
inline double success_probability(const QubitState& pre, const QubitState& post, double n_bar, double lambda) {
    const double s = std::sin(lambda);
    return 0.5 * (1.0 + std::cos(pre.theta) * std::cos(post.theta) +
                  std::sin(pre.theta) * std::sin(post.theta) * std::exp(-2.0 * n_bar * s * s) *
                      std::cos(n_bar * std::sin(2.0 * lambda) + relative_phase(pre, post)));
}

/// d p_a / d lambda of success_probability.
inline double success_probability_derivative(const QubitState& pre, const QubitState& post, double n_bar,
                                             double lambda) {
    const double s = std::sin(lambda);
    const double decay = std::exp(-2.0 * n_bar * s * s);
    const double arg = n_bar * std::sin(2.0 * lambda) + relative_phase(pre, post);
    return 0.5 * std::sin(pre.theta) * std::sin(post.theta) * decay * -2.0 * n_bar *
           (std::sin(2.0 * lambda) * std::cos(arg) + std::cos(2.0 * lambda) * std::sin(arg));
}

inline PostSelectedMeter postselect_meter(const QubitState& pre, const QubitState& post,
                                          const CoherentAmplitude& alpha, double lambda) {
    PostSelectedMeter m;
    m.pre = pre;
    m.post = post;
    m.alpha = alpha;
    m.lambda = lambda;
    m.u1 = std::cos(0.5 * pre.theta) * std::cos(0.5 * post.theta);
    m.u2 = std::polar(std::sin(0.5 * pre.theta) * std::sin(0.5 * post.theta), relative_phase(pre, post));
    m.branch_minus = alpha.rotated(-lambda);
    m.branch_plus = alpha.rotated(lambda);
    const double p = std::norm(m.u1) + std::norm(m.u2) +
                     2.0 * std::real(std::conj(m.u1) * m.u2 * coherent_overlap(m.branch_minus, m.branch_plus));
    m.p_a = std::max(p, 0.0);
    return m;
}

inline void require_postselection(double p_a, const NumericPolicy& policy) {
    if (!(p_a > policy.p_min)) throw PostSelectionImpossible(p_a);
}

/// Normalised conditioned meter state in the Fock basis:
/// c_n = (u1 e^{-i lambda n} + u2 e^{i lambda n}) e^{-n/2} alpha^n / sqrt(n!) / sqrt(p_a)
inline FockVector meter_fock_state(const PostSelectedMeter& m, const NumericPolicy& policy = {}) {
    require_postselection(m.p_a, policy);
    FockVector v = fock_expand(m.alpha, policy.truncation);
    const double inv = 1.0 / std::sqrt(m.p_a);
    for (std::size_t n = 0; n < v.coeffs.size(); ++n) {
        const double ph = m.lambda * static_cast<double>(n);
        v.coeffs[n] *= (m.u1 * std::polar(1.0, -ph) + m.u2 * std::polar(1.0, ph)) * inv;
    }
    v.tail_bound /= m.p_a;
    return v;
}

struct WeakValue {
    Complex value;
};

/// <psi_f|sigma_z|psi_i> / <psi_f|psi_i>
inline WeakValue weak_value(const QubitState& pre, const QubitState& post, double threshold = 1e-10) {
    const Complex gg = std::conj(post.ground()) * pre.ground();
    const Complex ee = std::conj(post.excited()) * pre.excited();
    const Complex overlap = gg + ee;
    if (!(std::abs(overlap) > threshold))
        throw DivergentWeakValue("pre- and post-selected states are orthogonal");
    return {(ee - gg) / overlap};
}

} // namespace wva
