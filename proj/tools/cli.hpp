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

/// The wva-fisher command line: figure tables, point reports and Cramer-Rao
/// runs. Kept in a header so tests can drive it in-process through run().

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wva/errors.hpp"
#include "wva/mc.hpp"
#include "wva/sweep.hpp"
#include "wva/version.hpp"

namespace wva::cli {

using Json = nlohmann::ordered_json;
using Cell = std::optional<double>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    /// Fit summaries; written as '#' lines after the CSV rows.
    std::vector<Json> fits;
};

/// 17 significant digits: enough to round-trip any double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t j = 0; j < t.columns.size(); ++j) out += (j ? "," : "") + t.columns[j];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            if (row[j]) out += format_double(*row[j]);
        }
        out += '\n';
    }
    for (const auto& f : t.fits) out += "# " + f.dump() + '\n';
    return out;
}

inline Table parse_csv(std::string_view text) {
    Table t;
    bool header = true;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            t.fits.push_back(Json::parse(line.substr(2)));
            continue;
        }
        std::vector<std::string> fields;
        std::size_t s = 0;
        for (;;) {
            const std::size_t c = line.find(',', s);
            fields.push_back(line.substr(s, c == std::string::npos ? std::string::npos : c - s));
            if (c == std::string::npos) break;
            s = c + 1;
        }
        if (header) {
            t.columns = fields;
            header = false;
            continue;
        }
        if (fields.size() != t.columns.size()) throw InvalidInput("CSV row width does not match the header");
        std::vector<Cell> row;
        for (const auto& f : fields) {
            if (f.empty()) {
                row.emplace_back();
                continue;
            }
            char* stop = nullptr;
            const double v = std::strtod(f.c_str(), &stop);
            if (*stop != '\0') throw InvalidInput("CSV field is not a number: " + f);
            row.emplace_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Json to_json(const Table& t, const Json& manifest) {
    Json rows = Json::array();
    for (const auto& row : t.rows) {
        Json r = Json::object();
        for (std::size_t j = 0; j < row.size(); ++j) r[t.columns[j]] = row[j] ? Json(*row[j]) : Json(nullptr);
        rows.push_back(std::move(r));
    }
    Json out{{"manifest", manifest}, {"columns", t.columns}, {"rows", std::move(rows)}};
    if (!t.fits.empty()) out["fits"] = t.fits;
    return out;
}

/// Angles: plain numbers or multiples of pi such as "pi", "-pi/2", "3pi/2", "0.5pi".
inline double parse_angle(const std::string& text) {
    const auto p = text.find("pi");
    char* stop = nullptr;
    if (p == std::string::npos) {
        const double v = std::strtod(text.c_str(), &stop);
        if (text.empty() || *stop != '\0' || !std::isfinite(v)) throw InvalidInput("not a number: " + text);
        return v;
    }
    const std::string head = text.substr(0, p), tail = text.substr(p + 2);
    double coef = 1.0;
    if (head == "-") coef = -1.0;
    else if (!head.empty() && head != "+") {
        coef = std::strtod(head.c_str(), &stop);
        if (*stop != '\0') throw InvalidInput("not an angle: " + text);
    }
    double den = 1.0;
    if (!tail.empty()) {
        if (tail[0] != '/') throw InvalidInput("not an angle: " + text);
        den = std::strtod(tail.c_str() + 1, &stop);
        if (tail.size() < 2 || *stop != '\0' || den == 0.0) throw InvalidInput("not an angle: " + text);
    }
    return coef * kPi / den;
}

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::size_t s = 0;
    for (;;) {
        const std::size_t c = text.find(',', s);
        out.push_back(parse_angle(text.substr(s, c == std::string::npos ? std::string::npos : c - s)));
        if (c == std::string::npos) break;
        s = c + 1;
    }
    return out;
}

/// "re" or "re,im".
inline Complex parse_complex(const std::string& text) {
    const auto v = parse_list(text);
    if (v.size() == 1) return {v[0], 0.0};
    if (v.size() == 2) return {v[0], v[1]};
    throw InvalidInput("alpha must be 're' or 're,im': " + text);
}

/// Raw flag values; empty means the command's default.
struct Flags {
    std::string theta_i, theta_f, phi0, alpha, lambda, phi;
    std::optional<double> nbar;
    std::string out, format = "csv";
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::optional<std::size_t> phi_grid;
    // Grid flags.
    std::optional<double> lambda_min, lambda_max, nbar_min, nbar_max, fit_min, fit_max;
    std::optional<std::size_t> lambda_points, theta_f_points, phi_points, nbar_points;
    // crlb.
    std::uint64_t experiments = 200, shots = 20000;
    std::string scheme = "photon";
    bool meter_only = false;
    double window = 0.1;
    std::string edge = "error";
    // replay.
    std::string manifest;
};

struct Resolved {
    Table table;
    Json parameters = Json::object();
    Json grids = Json::object();
};

inline double angle_or(const std::string& s, double fallback) { return s.empty() ? fallback : parse_angle(s); }
inline std::vector<double> list_or(const std::string& s, std::vector<double> fallback) {
    return s.empty() ? fallback : parse_list(s);
}

inline std::vector<double> increasing(std::vector<double> g, const char* what) {
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) throw InvalidInput(std::string(what) + " values must be strictly increasing");
    return g;
}

inline Json grid_json(const std::string& kind, const std::vector<double>& values) {
    return Json{{"kind", kind}, {"points", values.size()}, {"values", values}};
}

/// Pure-meter point from the common flags: n_bar from --nbar, else |alpha|^2,
/// else the default; the phase of alpha sets the meter phase.
inline PointSpec pure_point(const Flags& f, double theta_i, double phi0, double n_bar_default) {
    PointSpec p;
    p.theta_i = angle_or(f.theta_i, theta_i);
    p.phi0 = angle_or(f.phi0, phi0);
    p.alpha = f.alpha.empty() ? Complex{std::sqrt(n_bar_default), 0.0} : parse_complex(f.alpha);
    p.n_bar = f.nbar ? *f.nbar : (f.alpha.empty() ? n_bar_default : std::norm(p.alpha));
    if (!(p.n_bar >= 0)) throw InvalidInput("--nbar must be non-negative");
    return p;
}

inline void echo_point(Json& j, const PointSpec& p) {
    j["theta_i"] = p.theta_i;
    j["phi0"] = p.phi0;
    j["alpha"] = {p.alpha.real(), p.alpha.imag()};
    j["n_bar"] = p.n_bar;
}

/// "opt" or a number; empty means `fallback_opt`.
inline std::optional<double> phase_choice(const std::string& s, bool fallback_opt, double fallback = 0.0) {
    if (s.empty()) return fallback_opt ? std::nullopt : std::optional<double>(fallback);
    if (s == "opt") return std::nullopt;
    return parse_angle(s);
}

inline Cell weighted(const SweepCell& c) { return c.report ? Cell(c.report->weighted) : Cell(); }
inline Cell success(const SweepCell& c) { return c.report ? Cell(c.report->p_a) : Cell(); }

inline SweepSpec make_spec(SweptParameter swept, std::vector<double> grid, const PointSpec& fixed,
                           std::vector<Quantity> q, const Flags& f, std::size_t phase_grid) {
    SweepSpec s;
    s.swept = swept;
    s.grid = std::move(grid);
    s.fixed = fixed;
    s.quantities = std::move(q);
    s.threads = f.threads;
    s.phase_grid = phase_grid;
    return s;
}

inline std::string angle_label(double v) {
    for (const auto& [name, x] : std::vector<std::pair<std::string, double>>{
             {"0", 0.0}, {"pi2", kPi / 2}, {"pi", kPi}, {"3pi2", 3 * kPi / 2}, {"2pi", kTwoPi}})
        if (std::abs(v - x) < 1e-12) return name;
    return format_double(v);
}

inline Resolved cmd_fig2(const Flags& f) {
    Resolved r;
    const auto base = pure_point(f, kPi / 2, kPi, 4.0);
    std::vector<double> grid;
    if (!f.lambda.empty()) {
        grid = increasing(parse_list(f.lambda), "--lambda");
        r.grids["lambda"] = grid_json("explicit", grid);
    } else {
        const double lo = f.lambda_min.value_or(1e-4), hi = f.lambda_max.value_or(1.5);
        const std::size_t n = f.lambda_points.value_or(200);
        if (!(lo > 0 && hi > lo) || n < 1) throw InvalidInput("lambda grid needs 0 < min < max and points >= 1");
        grid = logspace(lo, hi, n);
        r.grids["lambda"] = grid_json("log", grid);
    }
    const auto thetas = list_or(f.theta_f, {3 * kPi / 2, kPi / 2});
    echo_point(r.parameters, base);
    r.parameters["theta_f"] = thetas;
    r.table.columns = {"lambda"};
    std::vector<SweepTable> sweeps;
    for (double tf : thetas) {
        PointSpec p = base;
        p.theta_f = tf;
        sweeps.push_back(run_sweep(make_spec(SweptParameter::lambda, grid, p, {Quantity::pure_qfi}, f, 720)));
        r.table.columns.push_back("pa_qa_tf_" + angle_label(tf));
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<Cell> row{grid[i]};
        for (const auto& s : sweeps) row.push_back(weighted(s.rows[i].cells[0]));
        r.table.rows.push_back(std::move(row));
    }
    return r;
}

inline std::vector<double> theta_grid(const Flags& f, Json& grids) {
    if (!f.theta_f.empty()) {
        auto g = increasing(parse_list(f.theta_f), "--theta-f");
        grids["theta_f"] = grid_json("explicit", g);
        return g;
    }
    const std::size_t n = f.theta_f_points.value_or(720);
    if (n < 1) throw InvalidInput("--theta-f-points must be >= 1");
    auto g = periodic_grid(n);
    grids["theta_f"] = grid_json("periodic", g);
    return g;
}

inline Resolved cmd_fig3(const Flags& f) {
    Resolved r;
    const auto base = pure_point(f, kPi / 2, kPi, 4.0);
    const auto lambdas = list_or(f.lambda, {0.01, 0.05, 0.1, 1.0});
    const auto grid = theta_grid(f, r.grids);
    PointSpec p = base;
    p.varphi = phase_choice(f.phi, true);
    const std::size_t phase_grid = f.phi_grid.value_or(72);
    echo_point(r.parameters, base);
    r.parameters["lambda"] = lambdas;
    r.parameters["phi"] = p.varphi ? Json(*p.varphi) : Json("opt");
    r.parameters["phi_grid"] = phase_grid;
    r.table.columns = {"lambda", "theta_f", "p_a", "pa_fn", "pa_fx", "varphi", "pa_qa", "q_cm"};
    for (double l : lambdas) {
        p.lambda = l;
        const auto t = run_sweep(make_spec(SweptParameter::theta_f, grid, p,
                                           {Quantity::pure_photon, Quantity::pure_quadrature, Quantity::pure_qfi,
                                            Quantity::conventional_qfi},
                                           f, phase_grid));
        for (const auto& row : t.rows) {
            const auto& x = row.cells[1].report;
            r.table.rows.push_back({l, row.value, success(row.cells[2]), weighted(row.cells[0]), weighted(row.cells[1]),
                                    x ? x->meta.varphi : Cell(), weighted(row.cells[2]), weighted(row.cells[3])});
        }
    }
    return r;
}

inline Resolved cmd_fig4(const Flags& f) {
    Resolved r;
    const auto base = pure_point(f, kPi / 2, kPi, 4.0);
    const auto thetas = list_or(f.theta_f, {kPi / 2, kPi, 3 * kPi / 2});
    const auto lambdas = list_or(f.lambda, {0.05, 0.1, 1.0});
    std::vector<double> grid;
    if (!f.phi.empty() && f.phi != "opt") {
        grid = increasing(parse_list(f.phi), "--phi");
        r.grids["varphi"] = grid_json("explicit", grid);
    } else {
        grid = periodic_grid(f.phi_points.value_or(720));
        r.grids["varphi"] = grid_json("periodic", grid);
    }
    echo_point(r.parameters, base);
    r.parameters["theta_f"] = thetas;
    r.parameters["lambda"] = lambdas;
    r.table.columns = {"theta_f", "lambda", "varphi", "p_a", "pa_fx", "pa_qa"};
    for (double tf : thetas) {
        for (double l : lambdas) {
            PointSpec p = base;
            p.theta_f = tf;
            p.lambda = l;
            const auto t = run_sweep(
                make_spec(SweptParameter::varphi, grid, p, {Quantity::pure_quadrature, Quantity::pure_qfi}, f, 720));
            for (const auto& row : t.rows)
                r.table.rows.push_back(
                    {tf, l, row.value, success(row.cells[0]), weighted(row.cells[0]), weighted(row.cells[1])});
        }
    }
    return r;
}

/// Mixture point: alpha is the fixed core amplitude (default 0.1).
inline PointSpec mixed_point(const Flags& f, double n_bar_default) {
    PointSpec p;
    p.theta_i = angle_or(f.theta_i, kPi / 2);
    p.phi0 = angle_or(f.phi0, kPi / 2);
    p.alpha = f.alpha.empty() ? Complex{0.1, 0.0} : parse_complex(f.alpha);
    p.n_bar = f.nbar.value_or(n_bar_default);
    return p;
}

inline Resolved cmd_fig5(const Flags& f) {
    Resolved r;
    PointSpec p = mixed_point(f, 3.0);
    const auto lambdas = list_or(f.lambda, {1e-4, 1e-3, 1e-2});
    const auto grid = theta_grid(f, r.grids);
    echo_point(r.parameters, p);
    r.parameters["lambda"] = lambdas;
    r.parameters["delta"] = solve_delta_for_n_bar(p.alpha, p.n_bar);
    r.table.columns = {"lambda",         "theta_f",     "p_a_mixed", "pa_fn_mixed",
                       "pa_aav_leading", "pa_aav_next", "p_a_pure",  "pa_qa_pure"};
    for (double l : lambdas) {
        p.lambda = l;
        const auto t = run_sweep(make_spec(SweptParameter::theta_f, grid, p,
                                           {Quantity::mixed_photon, Quantity::mixed_aav_leading,
                                            Quantity::mixed_aav_next, Quantity::pure_qfi},
                                           f, 720));
        for (const auto& row : t.rows)
            r.table.rows.push_back({l, row.value, success(row.cells[0]), weighted(row.cells[0]),
                                    weighted(row.cells[1]), weighted(row.cells[2]), success(row.cells[3]),
                                    weighted(row.cells[3])});
    }
    return r;
}

inline Resolved cmd_fig6(const Flags& f) {
    Resolved r;
    PointSpec p = mixed_point(f, 0.0);
    p.theta_f = angle_or(f.theta_f, kPi / 2);
    const auto lambdas = list_or(f.lambda, {1e-3, 1e-2});
    std::vector<double> grid;
    if (f.nbar) throw InvalidInput("fig6 sweeps n_bar; use --nbar-min/--nbar-max/--nbar-points");
    const double lo = f.nbar_min.value_or(1e2), hi = f.nbar_max.value_or(1e4);
    const std::size_t n = f.nbar_points.value_or(25);
    if (!(lo > std::norm(p.alpha) && hi > lo) || n < 1) throw InvalidInput("n_bar grid needs |alpha|^2 < min < max");
    grid = logspace(lo, hi, n);
    r.grids["n_bar"] = grid_json("log", grid);
    const double fit_lo = f.fit_min.value_or(lo), fit_hi = f.fit_max.value_or(hi);
    r.parameters["theta_i"] = p.theta_i;
    r.parameters["theta_f"] = p.theta_f;
    r.parameters["phi0"] = p.phi0;
    r.parameters["alpha"] = {p.alpha.real(), p.alpha.imag()};
    r.parameters["lambda"] = lambdas;
    r.parameters["fit_range"] = {fit_lo, fit_hi};
    r.table.columns = {"lambda", "n_bar", "p_a_mixed", "pa_fn_mixed", "p_a_pure", "pa_fn_pure"};
    for (double l : lambdas) {
        p.lambda = l;
        const auto t =
            run_sweep(make_spec(SweptParameter::n_bar, grid, p, {Quantity::mixed_photon, Quantity::pure_photon}, f, 720));
        std::vector<std::pair<double, double>> mixed, pure, pa;
        for (const auto& row : t.rows) {
            r.table.rows.push_back({l, row.value, success(row.cells[0]), weighted(row.cells[0]), success(row.cells[1]),
                                    weighted(row.cells[1])});
            if (row.value < fit_lo || row.value > fit_hi) continue;
            if (row.cells[0].report) {
                mixed.emplace_back(row.value, row.cells[0].report->weighted);
                pa.emplace_back(row.value, row.cells[0].report->p_a);
            }
            if (row.cells[1].report) pure.emplace_back(row.value, row.cells[1].report->weighted);
        }
        for (const auto& [state, pts] : {std::pair{"mixed", &mixed}, std::pair{"pure", &pure}}) {
            const auto fit = loglog_slope(*pts, fit_lo, fit_hi);
            r.table.fits.push_back(Json{{"fit", "loglog"},
                                        {"lambda", l},
                                        {"state", state},
                                        {"k", fit.slope_k},
                                        {"intercept", fit.intercept},
                                        {"r_squared", fit.r_squared},
                                        {"range", {fit.range_lo, fit.range_hi}},
                                        {"points", fit.points}});
        }
        const auto lin = pa_linear_fit(pa);
        r.table.fits.push_back(Json{{"fit", "pa_linear"},
                                    {"lambda", l},
                                    {"state", "mixed"},
                                    {"d", lin.d},
                                    {"b", lin.b},
                                    {"residual", lin.residual},
                                    {"range", {fit_lo, fit_hi}}});
    }
    return r;
}

inline Resolved cmd_point(const Flags& f) {
    Resolved r;
    PointSpec p = pure_point(f, kPi / 2, kPi, 4.0);
    p.theta_f = angle_or(f.theta_f, 3 * kPi / 2);
    p.lambda = angle_or(f.lambda, 0.1);
    p.varphi = phase_choice(f.phi, true);
    const std::size_t phase_grid = f.phi_grid.value_or(72);
    echo_point(r.parameters, p);
    r.parameters["theta_f"] = p.theta_f;
    r.parameters["lambda"] = p.lambda;
    r.parameters["phi"] = p.varphi ? Json(*p.varphi) : Json("opt");
    r.parameters["phi_grid"] = phase_grid;
    const NumericPolicy policy;
    const auto n = evaluate(p, Quantity::pure_photon, policy, phase_grid);
    const auto x = evaluate(p, Quantity::pure_quadrature, policy, phase_grid);
    const auto q = evaluate(p, Quantity::pure_qfi, policy, phase_grid);
    const auto qcm = evaluate(p, Quantity::conventional_qfi, policy, phase_grid);
    const auto fcm = evaluate(p, Quantity::conventional_quadrature, policy, phase_grid);
    r.table.columns = {"p_a", "fi_n", "pa_fi_n", "fi_x", "pa_fi_x", "varphi", "qfi", "pa_qfi", "q_cm", "f_cm", "varphi_cm"};
    r.table.rows.push_back({q.p_a, n.fisher, n.weighted, x.fisher, x.weighted, x.meta.varphi, q.fisher, q.weighted,
                            qcm.fisher, fcm.fisher, fcm.meta.varphi});
    return r;
}

inline Resolved cmd_crlb(const Flags& f) {
    Resolved r;
    const PointSpec p = pure_point(f, kPi / 2, kPi, 4.0);
    TrialConfig cfg;
    cfg.pre = p.pre();
    cfg.post = {angle_or(f.theta_f, 3 * kPi / 2), 0.0};
    cfg.alpha = p.pure_amplitude();
    cfg.true_lambda = angle_or(f.lambda, 0.1);
    cfg.shots = f.shots;
    cfg.seed = f.seed;
    if (f.scheme == "photon") cfg.scheme = Measurement::photon_number;
    else if (f.scheme == "quadrature") cfg.scheme = Measurement::quadrature;
    else throw InvalidInput("--scheme must be photon or quadrature");
    const auto choice = phase_choice(f.phi, false, 0.0);
    if (cfg.scheme == Measurement::quadrature) {
        cfg.varphi = choice ? *choice
                            : optimize_phase(postselect_meter(cfg.pre, cfg.post, cfg.alpha, cfg.true_lambda), {},
                                             f.phi_grid.value_or(72))
                                  .varphi;
    }
    MleOptions opt;
    opt.half_width = f.window;
    opt.use_acceptance = !f.meter_only;
    if (f.edge == "clamp") opt.edge = EdgePolicy::clamp;
    else if (f.edge != "error") throw InvalidInput("--edge must be error or clamp");
    if (!(f.window > 0)) throw InvalidInput("--window must be positive");
    const auto rep = run_crlb(cfg, f.experiments, opt, f.threads);
    echo_point(r.parameters, p);
    r.parameters["theta_f"] = cfg.post.theta;
    r.parameters["lambda"] = cfg.true_lambda;
    r.parameters["scheme"] = to_string(cfg.scheme);
    r.parameters["varphi"] = cfg.varphi;
    r.parameters["experiments"] = f.experiments;
    r.parameters["shots"] = f.shots;
    r.parameters["window"] = f.window;
    r.parameters["use_acceptance"] = opt.use_acceptance;
    r.parameters["edge"] = f.edge;
    r.table.columns = {"experiments",      "shots",           "true_lambda", "mean_lambda_hat",
                       "empirical_variance", "crlb",          "ratio",       "acceptance_fraction",
                       "p_a",              "meter_information", "acceptance_information", "use_acceptance",
                       "variance_available"};
    r.table.rows.push_back({static_cast<double>(rep.experiments), static_cast<double>(rep.shots), cfg.true_lambda,
                            rep.mean_lambda_hat, rep.empirical_variance, rep.crlb, rep.ratio,
                            rep.acceptance_fraction(), rep.information.p_a, rep.information.meter,
                            opt.use_acceptance ? Cell(rep.information.acceptance) : Cell(0.0),
                            opt.use_acceptance ? 1.0 : 0.0, rep.empirical_variance ? 1.0 : 0.0});
    return r;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void add_common(CLI::App* c, Flags& f) {
    c->add_option("--theta-i", f.theta_i, "Pre-selection polar angle (number or multiple of pi, e.g. pi/2)");
    c->add_option("--theta-f", f.theta_f, "Post-selection polar angle(s), comma separated");
    c->add_option("--phi0", f.phi0, "Relative phase phi_i - phi_f");
    c->add_option("--alpha", f.alpha, "Coherent amplitude 're' or 're,im'");
    c->add_option("--nbar", f.nbar, "Mean photon number");
    c->add_option("--lambda", f.lambda, "Coupling strength(s), comma separated");
    c->add_option("--phi", f.phi, "Local-oscillator phase: value(s) or 'opt'");
    c->add_option("--phi-grid", f.phi_grid, "Phase scan points over [0, 2pi) when --phi opt");
    c->add_option("--out", f.out, "Output path; writes <out>.manifest.json alongside");
    c->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    c->add_option("--seed", f.seed, "Random seed");
    c->add_option("--threads", f.threads, "Worker threads (0: WVA_FISHER_THREADS, then all cores)");
}

inline std::string render(const Table& t, const Json& manifest, const std::string& format) {
    if (format == "json") return to_json(t, manifest).dump(2) + "\n";
    return to_csv(t);
}

/// Runs the CLI on `args` (without the program name). Returns the exit status:
/// 0 success, 1 numeric failure, 2 invalid input.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fisher information of weak-value amplification with coherent meters", "wva-fisher"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Flags f;

    auto* fig2 = app.add_subcommand("fig2", "p_a Q_a versus lambda; columns lambda, pa_qa_tf_<theta_f>...");
    add_common(fig2, f);
    fig2->add_option("--lambda-grid", f.lambda, "Explicit lambda grid (same as --lambda)");
    fig2->add_option("--lambda-min", f.lambda_min, "Log grid start (default 1e-4)");
    fig2->add_option("--lambda-max", f.lambda_max, "Log grid end (default 1.5)");
    fig2->add_option("--lambda-points", f.lambda_points, "Log grid size (default 200)");

    auto* fig3 = app.add_subcommand(
        "fig3", "Weighted FI and QFI versus theta_f; columns lambda, theta_f, p_a, pa_fn, pa_fx, varphi, pa_qa, q_cm");
    add_common(fig3, f);
    fig3->add_option("--theta-f-points", f.theta_f_points, "Periodic theta_f grid size (default 720)");

    auto* fig4 = app.add_subcommand("fig4", "p_a F^(x) versus varphi; columns theta_f, lambda, varphi, p_a, pa_fx, pa_qa");
    add_common(fig4, f);
    fig4->add_option("--phi-points", f.phi_points, "Periodic varphi grid size (default 720)");

    auto* fig5 = app.add_subcommand("fig5",
                                    "Mixed-meter FI versus theta_f; columns lambda, theta_f, p_a_mixed, pa_fn_mixed, "
                                    "pa_aav_leading, pa_aav_next, p_a_pure, pa_qa_pure");
    add_common(fig5, f);
    fig5->add_option("--theta-f-points", f.theta_f_points, "Periodic theta_f grid size (default 720)");

    auto* fig6 = app.add_subcommand(
        "fig6", "FI versus n_bar with power-law and p_a fits; columns lambda, n_bar, p_a_mixed, pa_fn_mixed, "
                "p_a_pure, pa_fn_pure; fits follow as '#' JSON lines");
    add_common(fig6, f);
    fig6->add_option("--nbar-min", f.nbar_min, "Log grid start (default 1e2)");
    fig6->add_option("--nbar-max", f.nbar_max, "Log grid end (default 1e4)");
    fig6->add_option("--nbar-points", f.nbar_points, "Log grid size (default 25)");
    fig6->add_option("--fit-min", f.fit_min, "Fit window start (default: grid start)");
    fig6->add_option("--fit-max", f.fit_max, "Fit window end (default: grid end)");

    auto* crlb = app.add_subcommand("crlb", "Monte-Carlo maximum likelihood versus the Cramer-Rao bound");
    add_common(crlb, f);
    crlb->add_option("--experiments", f.experiments, "Independent experiments (default 200)");
    crlb->add_option("--shots", f.shots, "Attempted shots per experiment (default 20000)");
    crlb->add_option("--scheme", f.scheme, "photon or quadrature")->check(CLI::IsMember({"photon", "quadrature"}));
    crlb->add_flag("--meter-only", f.meter_only, "Leave the acceptance count out of the likelihood");
    crlb->add_option("--window", f.window, "Likelihood search half-width around the true lambda (default 0.1)");
    crlb->add_option("--edge", f.edge, "error or clamp when the maximum sits on the window edge");

    auto* point = app.add_subcommand("point", "Every scheme at one parameter point");
    add_common(point, f);

    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("manifest", f.manifest, "Path to <out>.manifest.json")->required();
    replay->add_option("--out", f.out, "Output path (default: the recorded one)");

    std::vector<std::string> storage{"wva-fisher"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (replay->parsed()) {
            std::ifstream in(f.manifest);
            if (!in) throw InvalidInput("cannot read manifest " + f.manifest);
            const Json m = Json::parse(in);
            auto recorded = m.at("argv").get<std::vector<std::string>>();
            if (!f.out.empty()) {
                std::vector<std::string> filtered;
                for (std::size_t i = 0; i < recorded.size(); ++i) {
                    if (recorded[i] == "--out") {
                        ++i;
                        continue;
                    }
                    if (recorded[i].rfind("--out=", 0) == 0) continue;
                    filtered.push_back(recorded[i]);
                }
                filtered.push_back("--out");
                filtered.push_back(f.out);
                recorded = std::move(filtered);
            }
            return run(recorded, out, err);
        }

        Resolved res;
        std::string command;
        if (fig2->parsed()) command = "fig2", res = cmd_fig2(f);
        else if (fig3->parsed()) command = "fig3", res = cmd_fig3(f);
        else if (fig4->parsed()) command = "fig4", res = cmd_fig4(f);
        else if (fig5->parsed()) command = "fig5", res = cmd_fig5(f);
        else if (fig6->parsed()) command = "fig6", res = cmd_fig6(f);
        else if (crlb->parsed()) command = "crlb", res = cmd_crlb(f);
        else command = "point", res = cmd_point(f);

        Json manifest{{"tool", "wva-fisher"},
                      {"version", kVersion},
                      {"command", command},
                      {"argv", args},
                      {"parameters", res.parameters},
                      {"grids", res.grids},
                      {"seed", f.seed},
                      {"format", f.format},
                      {"columns", res.table.columns}};
        const std::string body = render(res.table, manifest, f.format);
        if (f.out.empty()) {
            out << body;
        } else {
            std::ofstream file(f.out, std::ios::binary);
            if (!file) throw InvalidInput("cannot write " + f.out);
            file << body;
            manifest["timestamp"] = utc_timestamp();
            std::ofstream side(f.out + ".manifest.json", std::ios::binary);
            if (!side) throw InvalidInput("cannot write " + f.out + ".manifest.json");
            side << manifest.dump(2) << '\n';
        }
        return 0;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << '\n';
        return 1;
    }
}

} // namespace wva::cli
