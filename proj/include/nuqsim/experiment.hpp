// Copyright 2026 The nuqsim Authors
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

/**
 * @file
 * Experiment driver: repeated shot-sampled runs of one algorithm, reduced to
 * per-time median and median absolute deviation of the survival probability,
 * next to the exact reference curve. Output is CSV or JSON.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nuqsim/model.hpp"
#include "nuqsim/oracle.hpp"
#include "nuqsim/qas.hpp"
#include "nuqsim/statevector.hpp"
#include "nuqsim/trotter.hpp"

namespace nuqsim {

// ---------------------------------------------------------------------------
// Robust statistics

/// Middle order statistic; mean of the two central ones for even sizes.
inline double median(std::vector<double> xs) {
    if (xs.empty()) {
        throw std::invalid_argument("median of an empty sample");
    }
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
    const double upper = xs[mid];
    if (xs.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

/// median(|x - median(x)|), unscaled.
inline double median_absolute_deviation(const std::vector<double> &xs) {
    const double m = median(xs);
    std::vector<double> dev;
    dev.reserve(xs.size());
    for (double x : xs) {
        dev.push_back(std::abs(x - m));
    }
    return median(std::move(dev));
}

// ---------------------------------------------------------------------------
// Configuration

enum class Algorithm { trotter, cartan, qas, exact };

inline std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::trotter:
        return "trotter";
    case Algorithm::cartan:
        return "cartan";
    case Algorithm::qas:
        return "qas";
    default:
        return "exact";
    }
}

inline Algorithm parse_algorithm(const std::string &s) {
    if (s == "trotter") {
        return Algorithm::trotter;
    }
    if (s == "cartan") {
        return Algorithm::cartan;
    }
    if (s == "qas") {
        return Algorithm::qas;
    }
    if (s == "exact") {
        return Algorithm::exact;
    }
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

struct ScheduleSpec {
    /// constant | profile | table
    std::string kind = "profile";
    std::optional<double> mu0;
    std::optional<double> r_nu;
    std::vector<double> table_t;
    std::vector<double> table_mu;
    /// Source of the table, echoed in JSON output.
    std::string table_path;
};

inline CouplingSchedule make_schedule(const ScheduleSpec &spec) {
    if (spec.kind == "constant") {
        if (!spec.mu0) {
            throw std::invalid_argument("constant schedule needs mu0");
        }
        return CouplingSchedule::constant(*spec.mu0);
    }
    if (spec.kind == "profile") {
        if (!spec.mu0 || !spec.r_nu) {
            throw std::invalid_argument("profile schedule needs both mu0 and r_nu");
        }
        return CouplingSchedule::profile(*spec.mu0, *spec.r_nu);
    }
    if (spec.kind == "table") {
        return CouplingSchedule::tabulated(spec.table_t, spec.table_mu);
    }
    throw std::invalid_argument("unknown schedule kind '" + spec.kind + "'");
}

/// Reads "t,mu" rows; blank lines, '#' comments and a non-numeric header row are skipped.
inline void load_schedule_table(ScheduleSpec &spec, const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open schedule table '" + path + "'");
    }
    spec.table_t.clear();
    spec.table_mu.clear();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double t = 0, mu = 0;
        if (!(row >> t >> mu)) {
            if (spec.table_t.empty() && line_no == 1) {
                continue;
            }
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 't,mu'");
        }
        spec.table_t.push_back(t);
        spec.table_mu.push_back(mu);
    }
    spec.table_path = path;
}

struct RunConfig {
    std::size_t n_neutrinos = 2;
    std::optional<double> theta;
    ScheduleSpec schedule;
    /// 'e' or 'x' per neutrino; empty means all nu_e.
    std::string flavors;
    double t_start = 210.64;
    /// Unset: 270 for the four-plus-neutrino trotter/cartan presets, otherwise 310.
    std::optional<double> t_end;
    double report_dt = 0.2;
    Algorithm algorithm = Algorithm::trotter;
    /// 0 means analytic probabilities, no sampling.
    std::size_t shots = 1024;
    std::size_t n_runs = 50;
    std::uint64_t seed = 12345;
    bool all_qubits = false;
    TrotterPlan::MuPoint mu_point = TrotterPlan::MuPoint::step_end;

    /// QAS settings.
    std::string qas_backend = "hadamard";
    std::size_t qas_moments = 1;
    bool qas_reduce = true;
    std::string qas_integrator = "rk4";
    std::optional<double> qas_dt_classical;
    bool qas_renormalize = true;

    std::size_t dense_cap = default_dense_qubit_cap;

    double resolved_t_end() const {
        if (t_end) {
            return *t_end;
        }
        const bool circuit = algorithm == Algorithm::trotter || algorithm == Algorithm::cartan;
        return (n_neutrinos >= 4 && circuit) ? 270.0 : 310.0;
    }

    std::vector<Flavor> resolved_flavors() const {
        if (flavors.empty()) {
            return std::vector<Flavor>(n_neutrinos, Flavor::electron);
        }
        if (flavors.size() != n_neutrinos) {
            throw std::invalid_argument("flavors must list one of 'e'/'x' per neutrino");
        }
        std::vector<Flavor> out;
        for (char c : flavors) {
            if (c == 'e') {
                out.push_back(Flavor::electron);
            } else if (c == 'x') {
                out.push_back(Flavor::heavy);
            } else {
                throw std::invalid_argument(std::string("invalid flavor '") + c + "', use 'e' or 'x'");
            }
        }
        return out;
    }

    std::vector<std::size_t> tracked_qubits() const {
        std::vector<std::size_t> q{0};
        if (all_qubits) {
            for (std::size_t i = 1; i < n_neutrinos; ++i) {
                q.push_back(i);
            }
        }
        return q;
    }

    void validate() const {
        if (!theta) {
            throw std::invalid_argument("theta is required (mixing angle in radians)");
        }
        validate_model(NeutrinoModel{n_neutrinos, *theta});
        if (!std::isfinite(t_start)) {
            throw std::invalid_argument("t_start must be finite");
        }
        if (!(resolved_t_end() > t_start)) {
            throw std::invalid_argument("t_end must be greater than t_start");
        }
        if (!(report_dt > 0) || !std::isfinite(report_dt)) {
            throw std::invalid_argument("dt must be positive");
        }
        if (n_runs < 1) {
            throw std::invalid_argument("runs must be >= 1");
        }
        if (qas_backend != "exact" && qas_backend != "hadamard") {
            throw std::invalid_argument("qas backend must be 'exact' or 'hadamard'");
        }
        if (qas_integrator != "rk4" && qas_integrator != "euler") {
            throw std::invalid_argument("qas integrator must be 'rk4' or 'euler'");
        }
        if (qas_moments < 1) {
            throw std::invalid_argument("qas moment order must be >= 1");
        }
        const auto sched = make_schedule(schedule);
        const auto [lo, hi] = sched.domain();
        if (t_start < lo || resolved_t_end() > hi) {
            throw std::invalid_argument("simulation window lies outside the mu(t) schedule domain");
        }
        (void)resolved_flavors();
    }
};

// ---------------------------------------------------------------------------
// Results

struct TrajectoryRow {
    double t = 0;
    double p_median = 0;
    double p_mad = 0;
    std::optional<double> p_exact;
    std::string algorithm;
    std::size_t qubit = 0;

    friend bool operator==(const TrajectoryRow &, const TrajectoryRow &) = default;
};

struct TrajectoryRecord {
    std::vector<TrajectoryRow> rows;
    RunConfig config;
    std::vector<std::string> warnings;
    /// Hadamard circuits run by the QAS path before propagation, and during it (always 0).
    std::uint64_t hadamard_tests_before_propagation = 0;
    std::uint64_t hadamard_tests_during_propagation = 0;
};

namespace detail {

/// probs[run][step] reduced to median / MAD per step.
inline void reduce_runs(const std::vector<std::vector<double>> &probs, std::vector<double> &med,
                        std::vector<double> &mad) {
    const std::size_t steps = probs.front().size();
    med.resize(steps);
    mad.resize(steps);
    std::vector<double> column(probs.size());
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t r = 0; r < probs.size(); ++r) {
            column[r] = probs[r][k];
        }
        med[k] = median(column);
        mad[k] = median_absolute_deviation(column);
    }
}

} // namespace detail

/**
 * Runs the configured algorithm. Sampled algorithms repeat n_runs times
 * with per-run seeds derive_seed(seed, run); the noiseless circuit state is
 * shared by all runs, which differ only in their measurement samples.
 */
inline TrajectoryRecord run_experiment(const RunConfig &cfg) {
    cfg.validate();
    const double t_end = cfg.resolved_t_end();
    const auto model = build_model(NeutrinoModel{cfg.n_neutrinos, *cfg.theta});
    const auto mu = make_schedule(cfg.schedule);
    const auto flavors = cfg.resolved_flavors();
    const Statevector psi0 = initial_flavor_state(cfg.n_neutrinos, flavors);
    const auto tracked = cfg.tracked_qubits();
    const auto grid = time_grid(cfg.t_start, t_end, cfg.report_dt);

    TrajectoryRecord rec;
    rec.config = cfg;

    // exact reference, per tracked qubit and time
    std::vector<std::vector<double>> exact(tracked.size());
    const bool have_exact = cfg.n_neutrinos <= cfg.dense_cap;
    if (have_exact) {
        OracleConfig oc;
        oc.dense_cap = cfg.dense_cap;
        const auto ref = evolve_exact(model, mu, psi0, cfg.t_start, t_end, cfg.report_dt, oc);
        for (std::size_t qi = 0; qi < tracked.size(); ++qi) {
            for (const auto &s : ref.states) {
                exact[qi].push_back(s.marginal_probability(tracked[qi], 0));
            }
        }
    } else {
        rec.warnings.push_back("exact reference omitted: " + std::to_string(cfg.n_neutrinos) +
                               " qubits exceed dense cap " + std::to_string(cfg.dense_cap));
        if (cfg.algorithm == Algorithm::exact) {
            throw std::invalid_argument("algorithm=exact needs n <= dense cap");
        }
    }

    // median[qubit][step], mad[qubit][step]
    std::vector<std::vector<double>> med(tracked.size()), mad(tracked.size());

    switch (cfg.algorithm) {
    case Algorithm::exact:
        for (std::size_t qi = 0; qi < tracked.size(); ++qi) {
            med[qi] = exact[qi];
            mad[qi].assign(grid.size(), 0.0);
        }
        break;
    case Algorithm::trotter:
    case Algorithm::cartan: {
        TrotterPlan plan;
        plan.variant = cfg.algorithm == Algorithm::trotter ? TrotterPlan::Variant::brute_force
                                                           : TrotterPlan::Variant::cartan;
        plan.dt = cfg.report_dt;
        plan.mu_point = cfg.mu_point;
        const auto run = evolve(model, plan, mu, psi0, cfg.t_start, t_end);
        const auto &states = run.trajectory.states;
        for (std::size_t qi = 0; qi < tracked.size(); ++qi) {
            if (cfg.shots == 0) {
                for (const auto &s : states) {
                    med[qi].push_back(s.marginal_probability(tracked[qi], 0));
                }
                mad[qi].assign(states.size(), 0.0);
            }
        }
        if (cfg.shots > 0) {
            // probs[qubit][run][step]
            std::vector<std::vector<std::vector<double>>> probs(
                tracked.size(), std::vector<std::vector<double>>(cfg.n_runs, std::vector<double>(states.size())));
            for (std::size_t r = 0; r < cfg.n_runs; ++r) {
                const auto run_seed = derive_seed(cfg.seed, r);
                for (std::size_t k = 0; k < states.size(); ++k) {
                    const auto counts = sample_counts(states[k], cfg.shots, derive_seed(run_seed, k));
                    for (std::size_t qi = 0; qi < tracked.size(); ++qi) {
                        probs[qi][r][k] = count_marginal(counts, tracked[qi], 0);
                    }
                }
            }
            for (std::size_t qi = 0; qi < tracked.size(); ++qi) {
                detail::reduce_runs(probs[qi], med[qi], mad[qi]);
            }
        }
        break;
    }
    case Algorithm::qas: {
        const Circuit prep = flavor_preparation(flavors);
        const auto basis = build_basis(model, psi0, prep, cfg.qas_moments, cfg.qas_reduce);
        AlphaIntegrator integ;
        integ.method = cfg.qas_integrator == "euler" ? AlphaIntegrator::Method::euler : AlphaIntegrator::Method::rk4;
        integ.dt_classical = cfg.qas_dt_classical;
        integ.renormalize = cfg.qas_renormalize;
        const bool sampled = cfg.qas_backend == "hadamard" && cfg.shots > 0;
        const std::size_t runs = sampled ? cfg.n_runs : 1;
        std::vector<std::vector<std::vector<double>>> probs(
            tracked.size(), std::vector<std::vector<double>>(runs, std::vector<double>(grid.size())));
        for (std::size_t r = 0; r < runs; ++r) {
            const OverlapBackend backend =
                cfg.qas_backend == "exact"
                    ? OverlapBackend::exact()
                    : OverlapBackend::hadamard(sampled ? std::optional<std::size_t>(cfg.shots) : std::nullopt,
                                               derive_seed(cfg.seed, r));
            const QasSimulator sim(basis, model, backend, tracked);
            const auto before = hadamard_test_invocations().load();
            rec.hadamard_tests_before_propagation += sim.overlaps().hadamard_tests;
            const auto traj = sim.propagate(mu, cfg.t_start, t_end, cfg.report_dt, integ);
            for (std::size_t qi = 0; qi < tracked.size(); ++qi) {
                for (std::size_t k = 0; k < traj.alphas.size(); ++k) {
                    probs[qi][r][k] = survival_from_overlaps(sim.overlaps(), traj.alphas[k], tracked[qi]);
                }
            }
            rec.hadamard_tests_during_propagation += hadamard_test_invocations().load() - before;
        }
        if (rec.hadamard_tests_during_propagation != 0) {
            throw std::logic_error("Hadamard tests executed after QAS propagation started");
        }
        for (std::size_t qi = 0; qi < tracked.size(); ++qi) {
            detail::reduce_runs(probs[qi], med[qi], mad[qi]);
        }
        break;
    }
    }

    const std::string label = to_string(cfg.algorithm);
    for (std::size_t qi = 0; qi < tracked.size(); ++qi) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            TrajectoryRow row;
            row.t = grid[k];
            row.p_median = med[qi][k];
            row.p_mad = mad[qi][k];
            if (have_exact) {
                row.p_exact = exact[qi][k];
            }
            row.algorithm = label;
            row.qubit = tracked[qi];
            rec.rows.push_back(std::move(row));
        }
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Output

inline constexpr const char *csv_header = "t,p_median,p_mad,p_exact,algorithm,qubit";

inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

inline void write_csv(const std::vector<TrajectoryRow> &rows, std::ostream &out) {
    out << csv_header << '\n';
    for (const auto &r : rows) {
        out << format_number(r.t) << ',' << format_number(r.p_median) << ',' << format_number(r.p_mad) << ','
            << (r.p_exact ? format_number(*r.p_exact) : std::string{}) << ',' << r.algorithm << ',' << r.qubit
            << '\n';
    }
}

inline std::vector<TrajectoryRow> read_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line != csv_header) {
        throw std::runtime_error("missing or unexpected CSV header");
    }
    std::vector<TrajectoryRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            f.emplace_back();
        }
        if (f.size() != 6) {
            throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected 6 fields");
        }
        TrajectoryRow r;
        r.t = std::stod(f[0]);
        r.p_median = std::stod(f[1]);
        r.p_mad = std::stod(f[2]);
        if (!f[3].empty()) {
            r.p_exact = std::stod(f[3]);
        }
        r.algorithm = f[4];
        r.qubit = static_cast<std::size_t>(std::stoul(f[5]));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline nlohmann::ordered_json config_to_json(const RunConfig &c) {
    nlohmann::ordered_json j;
    j["n_neutrinos"] = c.n_neutrinos;
    j["theta"] = c.theta ? nlohmann::ordered_json(*c.theta) : nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json s;
    s["kind"] = c.schedule.kind;
    s["mu0"] = c.schedule.mu0 ? nlohmann::ordered_json(*c.schedule.mu0) : nlohmann::ordered_json(nullptr);
    s["r_nu"] = c.schedule.r_nu ? nlohmann::ordered_json(*c.schedule.r_nu) : nlohmann::ordered_json(nullptr);
    if (c.schedule.kind == "table") {
        s["table_path"] = c.schedule.table_path;
        s["table_t"] = c.schedule.table_t;
        s["table_mu"] = c.schedule.table_mu;
    }
    j["schedule"] = s;
    j["flavors"] = c.flavors.empty() ? std::string(c.n_neutrinos, 'e') : c.flavors;
    j["t_start"] = c.t_start;
    j["t_end"] = c.resolved_t_end();
    j["dt"] = c.report_dt;
    j["algorithm"] = to_string(c.algorithm);
    j["shots"] = c.shots;
    j["runs"] = c.n_runs;
    j["seed"] = c.seed;
    j["all_qubits"] = c.all_qubits;
    j["mu_point"] = c.mu_point == TrotterPlan::MuPoint::step_end ? "step_end" : "midpoint";
    j["qas"] = {{"backend", c.qas_backend},
                {"moments", c.qas_moments},
                {"reduce", c.qas_reduce},
                {"integrator", c.qas_integrator},
                {"dt_classical", c.qas_dt_classical ? nlohmann::ordered_json(*c.qas_dt_classical)
                                                    : nlohmann::ordered_json(c.report_dt / 20.0)},
                {"renormalize", c.qas_renormalize}};
    return j;
}

inline void write_json(const TrajectoryRecord &rec, std::ostream &out) {
    nlohmann::ordered_json j;
    j["config"] = config_to_json(rec.config);
    j["seed"] = rec.config.seed;
    j["columns"] = {"t", "p_median", "p_mad", "p_exact", "algorithm", "qubit"};
    auto rows = nlohmann::ordered_json::array();
    for (const auto &r : rec.rows) {
        nlohmann::ordered_json row;
        row["t"] = r.t;
        row["p_median"] = r.p_median;
        row["p_mad"] = r.p_mad;
        row["p_exact"] = r.p_exact ? nlohmann::ordered_json(*r.p_exact) : nlohmann::ordered_json(nullptr);
        row["algorithm"] = r.algorithm;
        row["qubit"] = r.qubit;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    j["warnings"] = rec.warnings;
    if (rec.config.algorithm == Algorithm::qas) {
        j["hadamard_tests"] = {{"before_propagation", rec.hadamard_tests_before_propagation},
                               {"during_propagation", rec.hadamard_tests_during_propagation}};
    }
    out << j.dump(2) << '\n';
}

} // namespace nuqsim
