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

/// Parameter sweeps over a single axis, argmax searches and the regression
/// fits used to read off scaling exponents.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wva/ensemble.hpp"
#include "wva/errors.hpp"
#include "wva/fisher.hpp"
#include "wva/numerics.hpp"
#include "wva/parallel.hpp"
#include "wva/policy.hpp"
#include "wva/postselect.hpp"

namespace wva {

enum class SweptParameter { lambda, theta_f, varphi, n_bar };

inline std::string_view to_string(SweptParameter p) {
    switch (p) {
    case SweptParameter::lambda: return "lambda";
    case SweptParameter::theta_f: return "theta_f";
    case SweptParameter::varphi: return "varphi";
    case SweptParameter::n_bar: return "n_bar";
    }
    return "unknown";
}

/// Quantities a sweep can tabulate. The pure_* entries use the coherent meter
/// sqrt(n_bar) e^{i arg alpha}; the mixed_* entries use the three-component
/// mixture around alpha with real delta solved from n_bar.
enum class Quantity {
    pure_photon,
    pure_quadrature,
    pure_qfi,
    conventional_quadrature,
    conventional_qfi,
    mixed_photon,
    mixed_aav_leading,
    mixed_aav_next,
};

inline std::string_view to_string(Quantity q) {
    switch (q) {
    case Quantity::pure_photon: return "pure_photon";
    case Quantity::pure_quadrature: return "pure_quadrature";
    case Quantity::pure_qfi: return "pure_qfi";
    case Quantity::conventional_quadrature: return "conventional_quadrature";
    case Quantity::conventional_qfi: return "conventional_qfi";
    case Quantity::mixed_photon: return "mixed_photon";
    case Quantity::mixed_aav_leading: return "mixed_aav_leading";
    case Quantity::mixed_aav_next: return "mixed_aav_next";
    }
    return "unknown";
}

/// One parameter point. The pre-selected state is (theta_i, phi0) and the
/// post-selected state (theta_f, 0), so phi0 is the relative phase.
struct PointSpec {
    double theta_i = kPi / 2;
    double theta_f = 3 * kPi / 2;
    double phi0 = kPi;
    double lambda = 0.1;
    double n_bar = 4.0;
    /// Phase reference for the pure meter; fixed core amplitude of the mixture.
    Complex alpha{2.0, 0.0};
    /// Local-oscillator phase; empty means maximise F^(x) over it.
    std::optional<double> varphi = 0.0;

    QubitState pre() const { return {theta_i, phi0}; }
    QubitState post() const { return {theta_f, 0.0}; }
    CoherentAmplitude pure_amplitude() const { return CoherentAmplitude::from_n_bar(n_bar, std::arg(alpha)); }
    MeterEnsemble mixture() const {
        return MeterEnsemble::three_component(alpha, solve_delta_for_n_bar(alpha, n_bar));
    }
};

struct SweepSpec {
    SweptParameter swept = SweptParameter::lambda;
    std::vector<double> grid;
    PointSpec fixed;
    std::vector<Quantity> quantities;
    /// Phase grid used when fixed.varphi is empty.
    std::size_t phase_grid = 720;
    /// 0 means WVA_FISHER_THREADS, then the hardware count.
    unsigned threads = 0;
    NumericPolicy policy{};
};

inline void validate(const SweepSpec& s) {
    if (s.grid.empty()) throw InvalidSpec("sweep grid is empty");
    for (double v : s.grid)
        if (!std::isfinite(v)) throw InvalidSpec("sweep grid has a non-finite value");
    for (std::size_t i = 1; i < s.grid.size(); ++i)
        if (!(s.grid[i] > s.grid[i - 1])) throw InvalidSpec("sweep grid must be strictly increasing");
    if (s.quantities.empty()) throw InvalidSpec("sweep has no quantities");
    if (s.phase_grid < 3) throw InvalidSpec("phase grid needs at least 3 points");
    if (s.swept == SweptParameter::n_bar && s.grid.front() < 0.0) throw InvalidSpec("n_bar must be non-negative");
}

inline PointSpec with_value(PointSpec p, SweptParameter swept, double v) {
    switch (swept) {
    case SweptParameter::lambda: p.lambda = v; break;
    case SweptParameter::theta_f: p.theta_f = v; break;
    case SweptParameter::varphi: p.varphi = v; break;
    case SweptParameter::n_bar: p.n_bar = v; break;
    }
    return p;
}

/// Direct evaluation of one quantity at one point.
inline FisherReport evaluate(const PointSpec& p, Quantity q, const NumericPolicy& policy = {},
                             std::size_t phase_grid = 720) {
    switch (q) {
    case Quantity::pure_photon: return fi_photon(postselect_meter(p.pre(), p.post(), p.pure_amplitude(), p.lambda), policy);
    case Quantity::pure_qfi:
        return qfi_postselected(postselect_meter(p.pre(), p.post(), p.pure_amplitude(), p.lambda), policy);
    case Quantity::pure_quadrature: {
        const auto m = postselect_meter(p.pre(), p.post(), p.pure_amplitude(), p.lambda);
        if (p.varphi) return fi_quadrature(m, HomodynePhase{*p.varphi}, policy);
        return optimize_phase(m, policy, phase_grid).report;
    }
    case Quantity::conventional_quadrature: {
        const auto a = p.pure_amplitude();
        // Im(alpha e^{-i(varphi + lambda)}) peaks at varphi = arg alpha - lambda - pi/2.
        const double phase = p.varphi ? *p.varphi : std::remainder(std::arg(a.alpha) - p.lambda - kPi / 2, kTwoPi);
        return conventional_quadrature_fi(a, HomodynePhase{phase}, p.lambda);
    }
    case Quantity::conventional_qfi: return conventional_qfi(p.pure_amplitude());
    case Quantity::mixed_photon: return fi_mixed_photon(p.mixture(), p.pre(), p.post(), p.lambda, policy);
    case Quantity::mixed_aav_leading:
        return aav_fi_report(p.mixture(), p.pre(), p.post(), p.lambda, AavOrder::leading, policy);
    case Quantity::mixed_aav_next:
        return aav_fi_report(p.mixture(), p.pre(), p.post(), p.lambda, AavOrder::next, policy);
    }
    throw InvalidSpec("unknown quantity");
}

/// A table cell: a report, or the reason the point has none.
struct SweepCell {
    std::optional<FisherReport> report;
    std::string error;
};

struct SweepRow {
    double value = 0.0;
    std::vector<SweepCell> cells;
};

struct SweepTable {
    SweptParameter swept = SweptParameter::lambda;
    std::vector<Quantity> quantities;
    std::vector<SweepRow> rows;
};

inline SweepCell evaluate_cell(const PointSpec& p, Quantity q, const NumericPolicy& policy, std::size_t phase_grid) {
    try {
        return {evaluate(p, q, policy, phase_grid), {}};
    } catch (const PostSelectionImpossible&) {
        return {std::nullopt, "post-selection impossible"};
    } catch (const InvalidSpec&) {
        throw;
    } catch (const Error& e) {
        return {std::nullopt, e.what()};
    }
}

/// Rows come back in grid order whatever the thread count.
inline SweepTable run_sweep(const SweepSpec& spec) {
    validate(spec);
    const std::size_t nq = spec.quantities.size();
    SweepTable table{spec.swept, spec.quantities, {}};
    table.rows.resize(spec.grid.size());
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        table.rows[i].value = spec.grid[i];
        table.rows[i].cells.resize(nq);
    }
    parallel_for(spec.grid.size() * nq, resolve_threads(spec.threads), [&](std::size_t k) {
        const std::size_t i = k / nq, j = k % nq;
        const auto p = with_value(spec.fixed, spec.swept, spec.grid[i]);
        auto cell = evaluate_cell(p, spec.quantities[j], spec.policy, spec.phase_grid);
        table.rows[i].cells[j] = std::move(cell);
    });
    return table;
}

struct ArgmaxResult {
    double value = 0.0;
    FisherReport report;
};

/// Maximiser of the weighted FI p_a F over the swept parameter. The grid
/// maximum (first on ties) is refined by golden section between its
/// neighbours and kept only if it improves on the grid sample.
inline ArgmaxResult argmax_scan(const SweepSpec& spec, Quantity q, double tol = 1e-6) {
    SweepSpec single = spec;
    single.quantities = {q};
    const auto table = run_sweep(single);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i].cells[0].report;
        if (r && (!best || r->weighted > table.rows[*best].cells[0].report->weighted)) best = i;
    }
    if (!best) throw NoFeasiblePoint("no grid point admits post-selection");
    ArgmaxResult out{spec.grid[*best], *table.rows[*best].cells[0].report};
    if (spec.grid.size() < 2) return out;

    auto objective = [&](double v) {
        const auto cell = evaluate_cell(with_value(spec.fixed, spec.swept, v), q, spec.policy, spec.phase_grid);
        return cell.report ? cell.report->weighted : -std::numeric_limits<double>::infinity();
    };
    const double lo = spec.grid[*best == 0 ? 0 : *best - 1];
    const double hi = spec.grid[std::min(*best + 1, spec.grid.size() - 1)];
    const double v = golden_section_max(objective, lo, hi, tol);
    const auto cell = evaluate_cell(with_value(spec.fixed, spec.swept, v), q, spec.policy, spec.phase_grid);
    if (cell.report && cell.report->weighted > out.report.weighted) out = {v, *cell.report};
    return out;
}

struct ScalingFit {
    double slope_k = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double range_lo = 0.0;
    double range_hi = 0.0;
    std::size_t points = 0;
};

struct LinearFit {
    double d = 0.0;
    double b = 0.0;
    /// Root-mean-square residual.
    double residual = 0.0;
};

namespace detail {

struct Ols {
    double slope, intercept, r_squared, rms;
};

inline Ols ordinary_least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0)) throw InsufficientPoints("fit needs at least two distinct abscissae");
    const double slope = sxy / sxx, intercept = my - slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - intercept - slope * x[i];
        sse += r * r;
    }
    const double r2 = syy > 0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    return {slope, intercept, r2, std::sqrt(sse / n)};
}

} // namespace detail

/// Least squares of ln y on ln x over points with x in [lo, hi] and y > 0.
inline ScalingFit loglog_slope(const std::vector<std::pair<double, double>>& points, double lo, double hi) {
    std::vector<double> lx, ly;
    for (const auto& [x, y] : points) {
        if (x >= lo && x <= hi && x > 0 && y > 0 && std::isfinite(y)) {
            lx.push_back(std::log(x));
            ly.push_back(std::log(y));
        }
    }
    if (lx.size() < 5) throw InsufficientPoints("scaling fit needs at least 5 positive points in range");
    const auto f = detail::ordinary_least_squares(lx, ly);
    return {f.slope, f.intercept, f.r_squared, lo, hi, lx.size()};
}

/// p_a = d - b n_bar; b > 0 when p_a falls with n_bar.
inline LinearFit pa_linear_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw InsufficientPoints("linear fit needs at least 2 points");
    std::vector<double> x, y;
    for (const auto& [a, b] : points) {
        x.push_back(a);
        y.push_back(b);
    }
    const auto f = detail::ordinary_least_squares(x, y);
    return {f.intercept, -f.slope, f.rms};
}

/// Default grids.
inline std::vector<double> default_angle_grid() { return periodic_grid(720); }
inline std::vector<double> default_lambda_grid() { return logspace(1e-4, 1.5, 200); }
inline std::vector<double> default_n_bar_grid() { return logspace(1e2, 1e4, 25); }

} // namespace wva
