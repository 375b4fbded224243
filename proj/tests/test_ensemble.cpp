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

#include "wva/ensemble.hpp"

#include <random>

#include "gtest/gtest.h"

using namespace wva;

namespace {

// Mixture parameters used throughout: alpha = 0.1 with delta solved for n_bar = 3.
const QubitState kPre{kPi / 2, kPi / 2};
const Complex kAlpha{0.1, 0.0};

QubitState post(double theta_f) { return {theta_f, 0.0}; }

MeterEnsemble mixture(double n_bar) { return MeterEnsemble::three_component(kAlpha, solve_delta_for_n_bar(kAlpha, n_bar)); }

// Raw moments by direct truncated summation over each component.
EnsembleMoments brute_moments(const MeterEnsemble& e) {
    double m1 = 0, m2 = 0, m3 = 0;
    for (const auto& c : e.components()) {
        const double nb = c.amplitude.n_bar();
        const std::size_t top = static_cast<std::size_t>(nb + 40.0 * std::sqrt(nb) + 60.0);
        for (std::size_t n = 0; n <= top; ++n) {
            const double p = c.weight * std::exp(-nb + n * std::log(std::max(nb, 1e-300)) - std::lgamma(n + 1.0));
            const double x = static_cast<double>(n);
            m1 += x * p;
            m2 += x * x * p;
            m3 += x * x * x * p;
        }
    }
    return {m1, m2 - m1 * m1, m3 - 3 * m1 * m2 + 2 * m1 * m1 * m1};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST(Ensemble, RejectsBadWeights) {
    EXPECT_THROW(MeterEnsemble({}), InvalidInput);
    EXPECT_THROW(MeterEnsemble({{0.5, {1.0}}, {0.4, {2.0}}}), InvalidInput);
    EXPECT_THROW(MeterEnsemble({{1.5, {1.0}}, {-0.5, {2.0}}}), InvalidInput);
    EXPECT_NO_THROW(MeterEnsemble({{0.25, {1.0}}, {0.75, {2.0}}}));
}

TEST(Ensemble, DeltaSolvedFromMeanPhotonNumber) {
    const double d = solve_delta_for_n_bar(kAlpha, 3.0);
    EXPECT_NEAR(d, 2.1178, 1e-4);
    EXPECT_NEAR(ensemble_moments(mixture(3.0)).n_bar, 3.0, 1e-12);
    EXPECT_THROW(solve_delta_for_n_bar(Complex{2.0, 0.0}, 3.0), InvalidInput);
}

TEST(Ensemble, ZeroDeltaIsPoisson) {
    const auto m = ensemble_moments(MeterEnsemble::three_component({1.5, 0.5}, 0.0));
    EXPECT_NEAR(m.n_bar, 2.5, 1e-12);
    EXPECT_NEAR(m.variance, 2.5, 1e-12);
    EXPECT_NEAR(m.third_central, 2.5, 1e-10);
}

TEST(Ensemble, MomentsMatchBruteForce) {
    const auto e = mixture(3.0);
    const auto exact = ensemble_moments(e);
    const auto brute = brute_moments(e);
    EXPECT_NEAR(exact.n_bar, brute.n_bar, 1e-8);
    EXPECT_NEAR(exact.variance, brute.variance, 1e-8);
    EXPECT_NEAR(exact.third_central, brute.third_central, 1e-8);
}

TEST(Ensemble, VarianceClosedFormRealParameters) {
    const double a = 0.7, d = 3.0;
    const double nb = a * a + 2.0 / 3.0 * d * d;
    const double expected = 2.0 / 9.0 * std::pow(d, 4) + 4.0 / 3.0 * (a * a * d * d + a * a * d * d) + nb;
    EXPECT_NEAR(three_component_variance(a, d), expected, 1e-12 * expected);
    EXPECT_NEAR(ensemble_moments(MeterEnsemble::three_component(a, d)).variance, expected, 1e-12 * expected);
}

TEST(Ensemble, VarianceClosedFormRandomComplex) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double nb = std::pow(10.0, 4.0 * u(rng));
        const double share = u(rng);
        const Complex a = std::polar(std::sqrt(share * nb), kTwoPi * u(rng));
        const bool real = i % 2 == 0;
        const Complex d = std::polar(std::sqrt(1.5 * (1 - share) * nb), real ? 0.0 : kTwoPi * u(rng));
        const Complex ar = real ? Complex{std::abs(a), 0.0} : a;
        const auto e = MeterEnsemble::three_component(ar, d);
        const auto brute = brute_moments(e);
        EXPECT_LE(rel(three_component_variance(ar, d), brute.variance), 1e-8) << "nb=" << nb;
        EXPECT_LE(rel(ensemble_moments(e).variance, brute.variance), 1e-8);
    }
}

TEST(Ensemble, ComponentNormalisationIdentity) {
    const auto e = mixture(3.0);
    for (double tf : {0.3, kPi / 2, 2.0, 3 * kPi / 2}) {
        for (double l : {1e-3, 0.1, 0.7}) {
            for (const auto& c : e.components()) {
                const double nb = c.amplitude.n_bar();
                double s = 0.0;
                for (std::size_t n = 0; n < 200; ++n)
                    s += postselection_prefactor(kPre, post(tf), l, static_cast<double>(n)) * poisson_mass(nb, n);
                const double phi0 = relative_phase(kPre, post(tf));
                const double closed = 0.5 * (1 + std::cos(kPre.theta) * std::cos(tf) +
                                             std::sin(kPre.theta) * std::sin(tf) * std::exp(-2 * nb * std::sin(l) * std::sin(l)) *
                                                 std::cos(nb * std::sin(2 * l) + phi0));
                EXPECT_NEAR(s, closed, 1e-10);
            }
        }
    }
}

TEST(Ensemble, MixedDistributionNormalised) {
    for (double tf : {0.2, 1.0, kPi / 2, 4.0}) {
        const auto d = mixed_pn_distribution(mixture(3.0), kPre, post(tf), 1e-3);
        double s = 0.0;
        for (double p : d.prob) s += p;
        EXPECT_NEAR(s, 1.0, 1e-10);
    }
}

TEST(Ensemble, MixedDerivativeMatchesFiniteDifference) {
    const auto e = mixture(3.0);
    const double l = 0.05, h = 1e-5;
    const auto d = mixed_pn_distribution(e, kPre, post(2.2), l);
    const auto p1 = mixed_pn_distribution(e, kPre, post(2.2), l + h), m1 = mixed_pn_distribution(e, kPre, post(2.2), l - h);
    const auto p2 = mixed_pn_distribution(e, kPre, post(2.2), l + h / 2),
               m2 = mixed_pn_distribution(e, kPre, post(2.2), l - h / 2);
    double scale = 0.0;
    for (double x : d.dprob) scale = std::max(scale, std::abs(x));
    for (std::size_t n = 0; n < d.prob.size(); ++n) {
        const double fd = (4 * (p2.prob[n] - m2.prob[n]) / h - (p1.prob[n] - m1.prob[n]) / (2 * h)) / 3;
        EXPECT_NEAR(d.dprob[n], fd, 1e-6 * scale) << n;
    }
}

TEST(Ensemble, SingleComponentCollapse) {
    const CoherentAmplitude a{Complex{1.3, 0.4}};
    const auto e = MeterEnsemble::pure(a);
    const QubitState pre{1.1, 0.4};
    for (double tf : {0.5, 2.5, 4.1}) {
        const auto m = postselect_meter(pre, post(tf), a, 0.2);
        const auto pure = pn_distribution(m);
        const auto mixed = mixed_pn_distribution(e, pre, post(tf), 0.2);
        ASSERT_EQ(pure.prob.size(), mixed.prob.size());
        EXPECT_NEAR(pure.p_a, mixed.p_a, 1e-12);
        for (std::size_t n = 0; n < pure.prob.size(); ++n) {
            EXPECT_NEAR(pure.prob[n], mixed.prob[n], 1e-12);
            EXPECT_NEAR(pure.dprob[n], mixed.dprob[n], 1e-12);
        }
        const double f_pure = fi_photon(m).fisher, f_mixed = fi_mixed_photon(e, pre, post(tf), 0.2).fisher;
        EXPECT_LE(rel(f_mixed, f_pure), 1e-12);
    }
}

TEST(Ensemble, ZeroDeltaEqualsPureFisher) {
    const Complex a{1.5, 0.0};
    const auto e = MeterEnsemble::three_component(a, 0.0);
    const auto m = postselect_meter(kPre, post(2.0), {a}, 0.1);
    EXPECT_LE(rel(fi_mixed_photon(e, kPre, post(2.0), 0.1).fisher, fi_photon(m).fisher), 1e-12);
}

TEST(Ensemble, LeadingOrderIsVarianceFormula) {
    const auto e = mixture(3.0);
    const double imw = weak_value(kPre, post(1.0)).value.imag();
    EXPECT_DOUBLE_EQ(aav_fi_approx(e, kPre, post(1.0), 1e-4, AavOrder::leading),
                     4 * imw * imw * ensemble_moments(e).variance);
}

TEST(Ensemble, WeakLimitMatchesVarianceFormula) {
    const auto e = mixture(3.0);
    const auto exact = fi_mixed_photon(e, kPre, post(kPi / 2), 1e-4);
    const double aav = aav_fi_approx(e, kPre, post(kPi / 2), 1e-4, AavOrder::leading);
    EXPECT_LE(rel(exact.weighted, aav * exact.p_a), 0.01);
}

TEST(Ensemble, WeakLimitConvergesMonotonically) {
    const auto e = mixture(3.0);
    double last = std::numeric_limits<double>::infinity();
    for (double l : {1e-2, 1e-3, 1e-4, 1e-5}) {
        const double exact = fi_mixed_photon(e, kPre, post(kPi / 2), l).fisher;
        const double gap = rel(aav_fi_approx(e, kPre, post(kPi / 2), l, AavOrder::leading), exact);
        EXPECT_LT(gap, last) << l;
        last = gap;
    }
}

TEST(Ensemble, NextOrderTracksExact) {
    // The truncated expansion drops the normalisation term, which sits at 2.4e-3 here.
    const auto e = mixture(3.0);
    const double exact = fi_mixed_photon(e, kPre, post(kPi / 2), 1e-4).fisher;
    const double next = aav_fi_approx(e, kPre, post(kPi / 2), 1e-4, AavOrder::next);
    const double lead = aav_fi_approx(e, kPre, post(kPi / 2), 1e-4, AavOrder::leading);
    EXPECT_LE(rel(next, exact), 3e-3);
    EXPECT_LT(rel(next, exact), rel(lead, exact));
}

TEST(Ensemble, FirstOrderCorrectionOfExactFisher) {
    // With Im w = 1: F = 4 var (1 + 8 lambda n_bar) + 8 lambda <(n - n_bar)^3> + O(lambda^2).
    const auto e = mixture(3.0);
    const auto mom = ensemble_moments(e);
    const double l = 1e-5;
    const double exact = fi_mixed_photon(e, kPre, post(kPi / 2), l).fisher;
    const double slope = (exact - 4 * mom.variance) / l;
    EXPECT_NEAR(slope, 32 * mom.n_bar * mom.variance + 8 * mom.third_central, 0.01 * slope);
}

TEST(Ensemble, SkewCorrectionRaisesNextOrder) {
    const auto e = mixture(3.0);
    const double skew = ensemble_moments(e).third_central;
    const double tf = skew < 0 ? 3 * kPi / 2 : kPi / 2;
    const double imw = weak_value(kPre, post(tf)).value.imag();
    ASSERT_GT(imw * skew, 0.0);
    EXPECT_GT(aav_fi_approx(e, kPre, post(tf), 1e-2, AavOrder::next),
              aav_fi_approx(e, kPre, post(tf), 1e-2, AavOrder::leading));
    // First order in lambda the gap is 8 lambda (Im w)^3 <(n - n_bar)^3>.
    const double l = 1e-5;
    const double gap = aav_fi_approx(e, kPre, post(tf), l, AavOrder::next) -
                       aav_fi_approx(e, kPre, post(tf), l, AavOrder::leading);
    EXPECT_NEAR(gap, 8 * l * imw * imw * imw * skew, 1e-3 * std::abs(gap));
}

TEST(Ensemble, ExpansionValidityIsChecked) {
    EXPECT_THROW(aav_fi_approx(mixture(1e3), kPre, post(kPi / 2), 1e-2, AavOrder::next), ExpansionInvalid);
    EXPECT_NO_THROW(aav_fi_approx(mixture(1e3), kPre, post(kPi / 2), 1e-2, AavOrder::leading));
}

TEST(Ensemble, OrthogonalSelectionErrors) {
    const QubitState pre{kPi / 2, kPi};
    EXPECT_THROW(aav_fi_approx(mixture(3.0), pre, post(kPi / 2), 1e-3, AavOrder::leading), DivergentWeakValue);
    EXPECT_THROW(fi_mixed_photon(MeterEnsemble::three_component(0.0, 0.0), pre, post(kPi / 2), 1e-3),
                 PostSelectionImpossible);
}

TEST(Ensemble, MixtureBeatsPureStateSomewhere) {
    const auto e = mixture(3.0);
    const auto a = CoherentAmplitude::from_n_bar(3.0, 0.0);
    int wins = 0;
    for (double tf : periodic_grid(720)) {
        try {
            const double mixed = fi_mixed_photon(e, kPre, post(tf), 1e-3).weighted;
            const double pure = qfi_postselected(postselect_meter(kPre, post(tf), a, 1e-3)).weighted;
            if (mixed > pure) ++wins;
        } catch (const PostSelectionImpossible&) {
        }
    }
    EXPECT_GT(wins, 0);
}
