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

/// Monte-Carlo simulation of post-selected measurement records and maximum
/// likelihood estimation of lambda, for checking Cramer-Rao efficiency.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "wva/errors.hpp"
#include "wva/fisher.hpp"
#include "wva/numerics.hpp"
#include "wva/parallel.hpp"
#include "wva/policy.hpp"
#include "wva/postselect.hpp"
#include "wva/random.hpp"

namespace wva {

enum class Measurement { photon_number, quadrature };

inline std::string_view to_string(Measurement m) {
    return m == Measurement::photon_number ? "photon_number" : "quadrature";
}

struct TrialConfig {
    QubitState pre{kPi / 2, kPi};
    QubitState post{3 * kPi / 2, 0.0};
    CoherentAmplitude alpha{2.0};
    double true_lambda = 0.1;
    /// Attempted pre/post-selection trials.
    std::uint64_t shots = 20000;
    std::uint64_t seed = 1;
    /// Experiment index; selects an independent counter stream.
    std::uint64_t stream = 0;
    Measurement scheme = Measurement::photon_number;
    double varphi = 0.0;
};

/// Accepted outcomes of one experiment: photon counts or quadrature values.
struct MeasurementRecord {
    Measurement scheme = Measurement::photon_number;
    std::uint64_t shots = 0;
    std::vector<double> outcomes;

    std::uint64_t accepted() const { return outcomes.size(); }
};

/// Piecewise-linear inverse CDF over a tabulated density.
class InverseCdf {
  public:
    InverseCdf(std::vector<double> nodes, std::vector<double> cdf) : nodes_(std::move(nodes)), cdf_(std::move(cdf)) {
        const double total = cdf_.back();
        for (auto& c : cdf_) c /= total;
    }

    double operator()(double u) const {
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.begin()) return nodes_.front();
        if (it == cdf_.end()) return nodes_.back();
        const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
        const double span = cdf_[i] - cdf_[i - 1];
        const double t = span > 0 ? (u - cdf_[i - 1]) / span : 0.0;
        return nodes_[i - 1] + t * (nodes_[i] - nodes_[i - 1]);
    }

    /// CDF at x, linear between nodes.
    double cdf(double x) const {
        if (x <= nodes_.front()) return 0.0;
        if (x >= nodes_.back()) return 1.0;
        const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
        const double t = (x - nodes_[i - 1]) / (nodes_[i] - nodes_[i - 1]);
        return cdf_[i - 1] + t * (cdf_[i] - cdf_[i - 1]);
    }

  private:
    std::vector<double> nodes_;
    std::vector<double> cdf_;
};

/// Cumulative Simpson table of P_f(x) on the certified window. Panels are
/// doubled from 2^10 until the total moves by less than the Simpson tolerance;
/// the CDF is tabulated at panel ends.
inline InverseCdf quadrature_sampler(const QuadratureDistribution& dist, const NumericPolicy& policy = {}) {
    const double lo = dist.lo(), hi = dist.hi();
    std::size_t panels = 1024;
    std::vector<double> nodes, cdf;
    double last = std::numeric_limits<double>::quiet_NaN();
    for (int r = 0; r <= policy.simpson.max_refinements; ++r, panels *= 2) {
        const double h = (hi - lo) / static_cast<double>(panels);
        nodes.assign(panels + 1, 0.0);
        cdf.assign(panels + 1, 0.0);
        double f0 = dist(lo);
        nodes[0] = lo;
        for (std::size_t i = 0; i < panels; ++i) {
            const double a = lo + h * static_cast<double>(i);
            const double fm = dist(a + 0.5 * h), f1 = dist(a + h);
            nodes[i + 1] = a + h;
            cdf[i + 1] = cdf[i] + h / 6.0 * (f0 + 4.0 * fm + f1);
            f0 = f1;
        }
        const double total = cdf.back();
        if (std::abs(total - last) <= policy.simpson.rel_tol * std::abs(total) + policy.simpson.abs_tol)
            return {std::move(nodes), std::move(cdf)};
        last = total;
    }
    throw IntegrationNotConverged("sampling table did not converge");
}

/// Accepted outcomes of cfg.shots attempts. Shot s uses the two uniforms of
/// counter block s: the first decides acceptance, the second the outcome.
inline MeasurementRecord simulate_record(const TrialConfig& cfg, const NumericPolicy& policy = {}) {
    if (cfg.shots < 1) throw InvalidInput("shots must be at least 1");
    const auto m = postselect_meter(cfg.pre, cfg.post, cfg.alpha, cfg.true_lambda);
    require_postselection(m.p_a, policy);
    const ShotStream rng(cfg.seed, cfg.stream);
    MeasurementRecord rec{cfg.scheme, cfg.shots, {}};
    rec.outcomes.reserve(static_cast<std::size_t>(static_cast<double>(cfg.shots) * m.p_a * 1.1) + 16);

    if (cfg.scheme == Measurement::photon_number) {
        const auto d = pn_distribution(m, policy);
        std::vector<double> cdf(d.prob.size());
        double acc = 0.0;
        for (std::size_t n = 0; n < d.prob.size(); ++n) cdf[n] = acc += d.prob[n];
        for (std::uint64_t s = 0; s < cfg.shots; ++s) {
            const auto [ua, uo] = rng.uniforms(s);
            if (!(ua < m.p_a)) continue;
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), uo * acc);
            rec.outcomes.push_back(static_cast<double>(std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1)));
        }
    } else {
        const auto sampler = quadrature_sampler(wva_quadrature_distribution(m, HomodynePhase{cfg.varphi}, policy), policy);
        for (std::uint64_t s = 0; s < cfg.shots; ++s) {
            const auto [ua, uo] = rng.uniforms(s);
            if (ua < m.p_a) rec.outcomes.push_back(sampler(uo));
        }
    }
    return rec;
}

enum class EdgePolicy { error, clamp };

struct MleOptions {
    /// Search window is centre +- half_width.
    double half_width = 0.1;
    std::size_t grid_points = 41;
    double tol = 1e-7;
    /// Include the binomial acceptance term log p_a^k (1 - p_a)^(N - k).
    bool use_acceptance = true;
    EdgePolicy edge = EdgePolicy::error;
};

struct EstimationResult {
    double lambda_hat = 0.0;
    std::uint64_t accepted = 0;
    std::uint64_t shots = 0;
    double log_likelihood = 0.0;
    bool at_edge = false;
};

/// Log-likelihood of a record as a function of lambda, with the meter
/// settings of `cfg` (its true_lambda is ignored).
class RecordLikelihood {
  public:
    RecordLikelihood(const MeasurementRecord& rec, const TrialConfig& cfg, bool use_acceptance,
                     const NumericPolicy& policy = {})
        : rec_(rec), cfg_(cfg), use_acceptance_(use_acceptance), policy_(policy) {
        if (rec.scheme == Measurement::photon_number) {
            for (double o : rec.outcomes) {
                const auto n = static_cast<std::size_t>(o);
                if (n >= counts_.size()) counts_.resize(n + 1, 0);
                ++counts_[n];
            }
        }
    }

    double operator()(double lambda) const {
        constexpr double kNegInf = -std::numeric_limits<double>::infinity();
        const auto m = postselect_meter(cfg_.pre, cfg_.post, cfg_.alpha, lambda);
        if (!(m.p_a > policy_.p_min)) return kNegInf;
        double ll = 0.0;
        if (use_acceptance_) {
            const double k = static_cast<double>(rec_.accepted());
            const double rest = static_cast<double>(rec_.shots) - k;
            ll += k * std::log(m.p_a);
            if (rest > 0) ll += m.p_a < 1.0 ? rest * std::log1p(-m.p_a) : kNegInf;
        }
        if (rec_.scheme == Measurement::photon_number) {
            const auto d = pn_distribution(m, policy_);
            for (std::size_t n = 0; n < counts_.size(); ++n) {
                if (counts_[n] == 0) continue;
                if (n >= d.prob.size() || !(d.prob[n] > 0)) return kNegInf;
                ll += static_cast<double>(counts_[n]) * std::log(d.prob[n]);
            }
        } else {
            const auto d = wva_quadrature_distribution(m, HomodynePhase{cfg_.varphi}, policy_);
            for (double x : rec_.outcomes) {
                const double p = d(x);
                if (!(p > 0)) return kNegInf;
                ll += std::log(p);
            }
        }
        return ll;
    }

  private:
    const MeasurementRecord& rec_;
    TrialConfig cfg_;
    bool use_acceptance_;
    NumericPolicy policy_;
    std::vector<std::uint64_t> counts_;
};

/// Grid scan of the log-likelihood over centre +- half_width, then golden
/// section between the neighbours of the best grid point.
inline EstimationResult mle_lambda(const MeasurementRecord& rec, const TrialConfig& cfg, double centre,
                                   const MleOptions& opt = {}, const NumericPolicy& policy = {}) {
    if (rec.outcomes.empty() && !opt.use_acceptance) throw EmptyRecord("record has no accepted outcomes");
    if (rec.shots == 0) throw EmptyRecord("record has no shots");
    if (opt.grid_points < 3) throw InvalidInput("likelihood grid needs at least 3 points");
    const RecordLikelihood ll(rec, cfg, opt.use_acceptance, policy);
    const auto grid = linspace(centre - opt.half_width, centre + opt.half_width, opt.grid_points);
    std::size_t best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = ll(grid[i]);
        if (v > best_ll) {
            best_ll = v;
            best = i;
        }
    }
    const std::size_t a = best == 0 ? 0 : best - 1;
    const std::size_t b = std::min(best + 1, grid.size() - 1);
    double hat = golden_section_max(ll, grid[a], grid[b], opt.tol);
    double hat_ll = ll(hat);
    if (!(hat_ll >= best_ll)) {
        hat = grid[best];
        hat_ll = best_ll;
    }
    const bool at_edge = hat - grid.front() <= opt.tol || grid.back() - hat <= opt.tol;
    if (at_edge && opt.edge == EdgePolicy::error)
        throw WindowTooNarrow("likelihood maximum sits on the search window edge");
    return {hat, rec.accepted(), rec.shots, hat_ll, at_edge};
}

/// Expected information per attempted shot: p_a F_a from the meter, plus
/// p_a'^2 / (p_a (1 - p_a)) from the acceptance count when it is used.
struct ShotInformation {
    double p_a = 0.0;
    double meter = 0.0;
    double acceptance = 0.0;
};

inline ShotInformation shot_information(const TrialConfig& cfg, const NumericPolicy& policy = {}) {
    const auto m = postselect_meter(cfg.pre, cfg.post, cfg.alpha, cfg.true_lambda);
    require_postselection(m.p_a, policy);
    const double f = cfg.scheme == Measurement::photon_number
                         ? fi_photon(m, policy).fisher
                         : fi_quadrature(m, HomodynePhase{cfg.varphi}, policy).fisher;
    const double dp = success_probability_derivative(cfg.pre, cfg.post, m.n_bar(), cfg.true_lambda);
    const double binom = m.p_a < 1.0 ? dp * dp / (m.p_a * (1.0 - m.p_a)) : 0.0;
    return {m.p_a, m.p_a * f, binom};
}

struct CrlbReport {
    std::uint64_t experiments = 0;
    std::uint64_t shots = 0;
    std::uint64_t total_accepted = 0;
    double mean_lambda_hat = 0.0;
    /// Unbiased sample variance; empty with fewer than two experiments.
    std::optional<double> empirical_variance;
    double crlb = 0.0;
    std::optional<double> ratio;
    ShotInformation information;
    bool use_acceptance = true;
    std::vector<EstimationResult> estimates;

    double acceptance_fraction() const {
        return static_cast<double>(total_accepted) / (static_cast<double>(experiments) * static_cast<double>(shots));
    }
};

/// Runs `experiments` independent records (stream = experiment index) and
/// compares the spread of lambda-hat with the Cramer-Rao bound of the
/// likelihood actually maximised: 1 / (N (p_a F_a + F_acc)) with the
/// acceptance term, 1 / (mean accepted * F_a) without it.
inline CrlbReport run_crlb(const TrialConfig& base, std::uint64_t experiments, const MleOptions& opt = {},
                           unsigned threads = 0, const NumericPolicy& policy = {}) {
    if (experiments < 1) throw InvalidInput("experiments must be at least 1");
    CrlbReport rep;
    rep.experiments = experiments;
    rep.shots = base.shots;
    rep.use_acceptance = opt.use_acceptance;
    rep.information = shot_information(base, policy);
    rep.estimates.resize(experiments);
    parallel_for(experiments, resolve_threads(threads), [&](std::size_t e) {
        TrialConfig cfg = base;
        cfg.stream = e;
        const auto rec = simulate_record(cfg, policy);
        rep.estimates[e] = mle_lambda(rec, cfg, base.true_lambda, opt, policy);
    });
    double sum = 0.0;
    for (const auto& r : rep.estimates) {
        sum += r.lambda_hat;
        rep.total_accepted += r.accepted;
    }
    const double n = static_cast<double>(experiments);
    rep.mean_lambda_hat = sum / n;
    const auto& info = rep.information;
    if (opt.use_acceptance) {
        rep.crlb = 1.0 / (static_cast<double>(base.shots) * (info.meter + info.acceptance));
    } else {
        const double mean_accepted = static_cast<double>(rep.total_accepted) / n;
        rep.crlb = 1.0 / (mean_accepted * info.meter / info.p_a);
    }
    if (experiments >= 2) {
        double ss = 0.0;
        for (const auto& r : rep.estimates) ss += (r.lambda_hat - rep.mean_lambda_hat) * (r.lambda_hat - rep.mean_lambda_hat);
        rep.empirical_variance = ss / (n - 1.0);
        rep.ratio = *rep.empirical_variance / rep.crlb;
    }
    return rep;
}

} // namespace wva
