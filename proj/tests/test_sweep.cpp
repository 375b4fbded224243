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

#include "wva/sweep.hpp"

#include <cstdlib>

#include "gtest/gtest.h"

using namespace wva;

namespace {

SweepSpec fig3(double lambda, std::vector<Quantity> q) {
    SweepSpec s;
    s.swept = SweptParameter::theta_f;
    s.grid = periodic_grid(72);
    s.fixed.lambda = lambda;
    s.quantities = std::move(q);
    s.threads = 1;
    return s;
}

bool same(const FisherReport& a, const FisherReport& b) {
    return a.scheme == b.scheme && a.p_a == b.p_a && a.fisher == b.fisher && a.weighted == b.weighted &&
           a.meta.varphi == b.meta.varphi;
}

} // namespace

TEST(Sweep, RejectsInvalidSpecs) {
    SweepSpec s = fig3(0.1, {Quantity::pure_qfi});
    s.grid = {};
    EXPECT_THROW(run_sweep(s), InvalidSpec);
    s.grid = {0.1, 0.1};
    EXPECT_THROW(run_sweep(s), InvalidSpec);
    s.grid = {0.2, 0.1};
    EXPECT_THROW(run_sweep(s), InvalidSpec);
    s.grid = {0.1};
    s.quantities = {};
    EXPECT_THROW(run_sweep(s), InvalidSpec);
}

TEST(Sweep, SinglePointEqualsDirectCall) {
    SweepSpec s = fig3(0.1, {Quantity::pure_qfi, Quantity::pure_photon, Quantity::pure_quadrature});
    s.grid = {2.0};
    const auto t = run_sweep(s);
    ASSERT_EQ(t.rows.size(), 1u);
    const auto m = postselect_meter({kPi / 2, kPi}, {2.0, 0.0}, CoherentAmplitude{2.0}, 0.1);
    EXPECT_TRUE(same(*t.rows[0].cells[0].report, qfi_postselected(m)));
    EXPECT_TRUE(same(*t.rows[0].cells[1].report, fi_photon(m)));
    EXPECT_TRUE(same(*t.rows[0].cells[2].report, fi_quadrature(m, HomodynePhase{0.0})));
}

TEST(Sweep, CellsMatchPointEvaluation) {
    SweepSpec s = fig3(0.05, {Quantity::pure_qfi, Quantity::mixed_photon, Quantity::conventional_qfi});
    s.fixed.alpha = 0.1;
    s.grid = linspace(0.1, 6.0, 9);
    const auto t = run_sweep(s);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        for (std::size_t j = 0; j < s.quantities.size(); ++j) {
            const auto direct = evaluate(with_value(s.fixed, s.swept, s.grid[i]), s.quantities[j]);
            ASSERT_TRUE(t.rows[i].cells[j].report.has_value());
            EXPECT_TRUE(same(*t.rows[i].cells[j].report, direct));
        }
    }
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
    SweepSpec s = fig3(0.1, {Quantity::pure_qfi, Quantity::pure_photon, Quantity::pure_quadrature});
    s.grid = periodic_grid(24);
    const auto one = run_sweep(s);
    s.threads = 4;
    const auto four = run_sweep(s);
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        EXPECT_EQ(one.rows[i].value, four.rows[i].value);
        for (std::size_t j = 0; j < 3; ++j) EXPECT_TRUE(same(*one.rows[i].cells[j].report, *four.rows[i].cells[j].report));
    }
}

TEST(Sweep, InfeasiblePointsKeepTheirRow) {
    SweepSpec s = fig3(0.0, {Quantity::pure_qfi, Quantity::conventional_qfi});
    s.grid = {kPi / 2 - 0.5, kPi / 2, kPi / 2 + 0.5};
    const auto t = run_sweep(s);
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_TRUE(t.rows[0].cells[0].report.has_value());
    EXPECT_FALSE(t.rows[1].cells[0].report.has_value());
    EXPECT_FALSE(t.rows[1].cells[0].error.empty());
    EXPECT_TRUE(t.rows[1].cells[1].report.has_value());
    EXPECT_TRUE(t.rows[2].cells[0].report.has_value());
}

TEST(Sweep, ExpansionFailuresBecomeMarkers) {
    SweepSpec s;
    s.swept = SweptParameter::n_bar;
    s.grid = {3.0, 1e3};
    s.fixed = {kPi / 2, kPi / 2, kPi / 2, 1e-2, 3.0, 0.1, 0.0};
    s.quantities = {Quantity::mixed_aav_next};
    const auto t = run_sweep(s);
    EXPECT_TRUE(t.rows[0].cells[0].report.has_value());
    EXPECT_FALSE(t.rows[1].cells[0].report.has_value());
}

TEST(Sweep, QfiRisesToPlateau) {
    SweepSpec s;
    s.swept = SweptParameter::lambda;
    s.grid = default_lambda_grid();
    s.quantities = {Quantity::pure_qfi};
    const auto t = run_sweep(s);
    EXPECT_LT(t.rows.front().cells[0].report->weighted, 0.01);
    const auto last = evaluate(with_value(s.fixed, s.swept, 1.2), Quantity::pure_qfi);
    EXPECT_NEAR(last.weighted, 40.0, 2.0);
}

TEST(Sweep, StrongCouplingBeatsConventionalLimit) {
    const auto t = run_sweep(fig3(1.0, {Quantity::pure_qfi}));
    double best = 0.0;
    for (const auto& r : t.rows)
        if (r.cells[0].report) best = std::max(best, r.cells[0].report->weighted);
    EXPECT_GT(best, 16.0);
}

TEST(Sweep, ArgmaxFindsAnalyticMaximiser) {
    // Weighted F_cm = 4 n_bar sin^2(varphi + lambda), maximal at varphi = pi/2 - lambda.
    SweepSpec s;
    s.swept = SweptParameter::varphi;
    s.grid = linspace(0.0, kPi, 37);
    s.fixed.lambda = 0.123;
    const auto best = argmax_scan(s, Quantity::conventional_quadrature);
    EXPECT_NEAR(best.value, kPi / 2 - 0.123, 1e-6);
    EXPECT_NEAR(best.report.weighted, 16.0, 1e-10);
}

TEST(Sweep, ArgmaxDominatesGridSamples) {
    SweepSpec s = fig3(0.1, {Quantity::pure_photon});
    const auto best = argmax_scan(s, Quantity::pure_photon);
    const auto t = run_sweep(s);
    for (const auto& r : t.rows)
        if (r.cells[0].report) {
            EXPECT_GE(best.report.weighted, r.cells[0].report->weighted);
        }
}

TEST(Sweep, PhotonArgmaxReachesQfi) {
    for (double l : {0.1, 1.0}) {
        SweepSpec s = fig3(l, {Quantity::pure_photon});
        s.grid = periodic_grid(720);
        const auto best = argmax_scan(s, Quantity::pure_photon);
        const auto q = evaluate(with_value(s.fixed, s.swept, best.value), Quantity::pure_qfi);
        EXPECT_NEAR(best.report.weighted, q.weighted, 0.01 * q.weighted) << l;
    }
}

TEST(Sweep, RealWeakValueStarvesPhotonCounting) {
    // With phi0 = pi the weak value is real, so photon counting has no
    // first-order signal; for weak coupling its best theta_f stays well below
    // the best QFI while theta_f = 3pi/2 still saturates its own QFI.
    for (double l : {0.01, 0.05}) {
        SweepSpec s = fig3(l, {Quantity::pure_photon});
        s.grid = periodic_grid(720);
        const double photon = argmax_scan(s, Quantity::pure_photon).report.weighted;
        const double qfi = argmax_scan(s, Quantity::pure_qfi).report.weighted;
        EXPECT_LT(photon, 0.7 * qfi) << l;
        const auto at = with_value(s.fixed, s.swept, 3 * kPi / 2);
        EXPECT_NEAR(evaluate(at, Quantity::pure_photon).weighted, evaluate(at, Quantity::pure_qfi).weighted,
                    1e-6 * evaluate(at, Quantity::pure_qfi).weighted);
    }
}

TEST(Sweep, PhaseArgmaxReachesQfi) {
    SweepSpec s;
    s.swept = SweptParameter::varphi;
    s.grid = periodic_grid(72);
    s.fixed.lambda = 0.1;
    const auto best = argmax_scan(s, Quantity::pure_quadrature);
    const auto q = evaluate(s.fixed, Quantity::pure_qfi);
    EXPECT_NEAR(best.report.weighted, q.weighted, 0.01 * q.weighted);
}

TEST(Sweep, NoFeasiblePoint) {
    SweepSpec s = fig3(0.0, {Quantity::pure_qfi});
    s.grid = {kPi / 2};
    EXPECT_THROW(argmax_scan(s, Quantity::pure_qfi), NoFeasiblePoint);
}

TEST(Fits, LogLogSlopeRecoversPowerLaws) {
    for (double k : {0.5, 1.0, 2.0, 3.0}) {
        std::vector<std::pair<double, double>> pts;
        for (double x : default_n_bar_grid()) pts.emplace_back(x, 0.7 * std::pow(x, k));
        const auto f = loglog_slope(pts, 1e2, 1e4);
        EXPECT_NEAR(f.slope_k, k, 1e-10);
        EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
        EXPECT_EQ(f.points, 25u);
    }
}

TEST(Fits, LogLogSlopeNeedsFivePoints) {
    std::vector<std::pair<double, double>> pts{{1, 1}, {2, 4}, {3, 9}, {4, 16}, {5, -1}, {50, 2500}};
    EXPECT_THROW(loglog_slope(pts, 0.5, 10), InsufficientPoints);
    EXPECT_NO_THROW(loglog_slope(pts, 0.5, 100));
}

TEST(Fits, LinearFitRecoversLine) {
    std::vector<std::pair<double, double>> pts;
    for (double x : default_n_bar_grid()) pts.emplace_back(x, 0.5 - 1e-5 * x);
    const auto f = pa_linear_fit(pts);
    EXPECT_NEAR(f.d, 0.5, 1e-12);
    EXPECT_NEAR(f.b, 1e-5, 1e-15);
    EXPECT_NEAR(f.residual, 0.0, 1e-12);
    EXPECT_THROW(pa_linear_fit({{1.0, 2.0}}), InsufficientPoints);
}

TEST(Fits, SuccessSlopeGrowsWithCoupling) {
    auto b_of = [](double lambda) {
        SweepSpec s;
        s.swept = SweptParameter::n_bar;
        s.grid = default_n_bar_grid();
        s.fixed = {kPi / 2, kPi / 2, kPi / 2, lambda, 3.0, 0.1, 0.0};
        s.quantities = {Quantity::mixed_photon};
        const auto t = run_sweep(s);
        std::vector<std::pair<double, double>> from_sweep, direct;
        for (const auto& r : t.rows) {
            from_sweep.emplace_back(r.value, r.cells[0].report->p_a);
            const auto p = with_value(s.fixed, s.swept, r.value);
            direct.emplace_back(r.value, ensemble_success_probability(p.mixture(), p.pre(), p.post(), lambda));
        }
        const double b = pa_linear_fit(from_sweep).b;
        EXPECT_NEAR(b, pa_linear_fit(direct).b, 1e-14);
        return b;
    };
    EXPECT_GT(b_of(1e-2), b_of(1e-3));
}

TEST(Threads, EnvironmentFallback) {
    EXPECT_EQ(resolve_threads(3), 3u);
    setenv("WVA_FISHER_THREADS", "5", 1);
    EXPECT_EQ(resolve_threads(0), 5u);
    setenv("WVA_FISHER_THREADS", "junk", 1);
    EXPECT_GE(resolve_threads(0), 1u);
    unsetenv("WVA_FISHER_THREADS");
}
