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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "nuqsim/nuqsim.hpp"

namespace {

using namespace nuqsim;

// Pinned tolerances and budgets.
constexpr double kCartanTol = 1e-9;
constexpr int kCartanAngles = 100;
constexpr double kSlopeLo = 0.8, kSlopeHi = 1.3;
constexpr double kQasTol = 1e-6;
constexpr double kMadSlack = 0.01;
constexpr double kMadCoverage = 0.95;
constexpr double kVariantTol = 1e-8;
constexpr double kRk4SlopeLo = 3.7, kRk4SlopeHi = 4.3;
constexpr double kOracleDrift = 1e-8;

constexpr double kTheta = 0.195;
constexpr double kMu0 = 5.0;
constexpr double kRnu = 200.0;
constexpr double kStart = 210.64;

struct Outcome {
    bool pass;
    std::string detail;
};

double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
    double mx = 0, my = 0;
    const auto n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

RunConfig preset(std::size_t n, Algorithm a) {
    RunConfig cfg;
    cfg.n_neutrinos = n;
    cfg.theta = kTheta;
    cfg.schedule.kind = "profile";
    cfg.schedule.mu0 = kMu0;
    cfg.schedule.r_nu = kRnu;
    cfg.algorithm = a;
    return cfg;
}

Outcome gate_counts() {
    const auto m = build_model({2, kTheta});
    const auto mu = CouplingSchedule::constant(1.0);
    TrotterPlan plan;
    const Circuit brute = step_circuit(m, plan, 0.0, mu);
    const Circuit block = cartan_pair_block(0.7);
    const bool ok = brute.count_single_qubit() == 19 && brute.count_cnot() == 6 && block.count_cnot() == 3 &&
                    block.count_single_qubit() == 8;
    return {ok, "brute " + std::to_string(brute.count_single_qubit()) + "+" + std::to_string(brute.count_cnot()) +
                    " CNOT, cartan block " + std::to_string(block.count_single_qubit()) + "+" +
                    std::to_string(block.count_cnot()) + " CNOT"};
}

Outcome cartan_equivalence() {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> ang(-2 * std::numbers::pi, 2 * std::numbers::pi);
    const oracle::Mat h = oracle::kron_string("XX") + oracle::kron_string("YY") + oracle::kron_string("ZZ");
    double worst = 0;
    for (int k = 0; k < kCartanAngles; ++k) {
        const double a = ang(rng);
        worst = std::max(worst, oracle::phase_distance(circuit_unitary(cartan_pair_block(a)),
                                                       oracle::propagator(h, a / 2)));
    }
    return {worst < kCartanTol, "max phase-aligned distance " + fmt("%.2e", worst)};
}

Outcome closure_set() {
    const auto m = build_model({2, kTheta});
    const auto res = nested_commutator_closure(m.h_i, m.h_d, 8);
    const std::set<std::string> want{"II", "IX", "IZ", "XI", "XX", "XY", "XZ",
                                     "YX", "YY", "YZ", "ZI", "ZX", "ZY", "ZZ"};
    std::set<std::string> got;
    for (const auto &s : res.strings) {
        got.insert(s.to_string());
    }
    return {got == want, std::to_string(got.size()) + " strings"};
}

Outcome trotter_order() {
    const auto m = build_model({2, kTheta});
    const auto mu = CouplingSchedule::profile(kMu0, kRnu);
    const auto psi0 = initial_flavor_state(2, {Flavor::electron, Flavor::electron});
    const double t1 = kStart + 20.0;
    const auto ref = evolve_exact(m, mu, psi0, kStart, t1, 0.05);
    const std::vector<double> dts{0.4, 0.2, 0.1, 0.05};
    std::vector<double> errs;
    for (double dt : dts) {
        TrotterPlan plan;
        plan.dt = dt;
        const auto run = evolve(m, plan, mu, psi0, kStart, t1);
        errs.push_back((run.trajectory.states.back().to_eigen() - ref.states.back().to_eigen()).norm());
    }
    const double p = loglog_slope(dts, errs);
    return {p >= kSlopeLo && p <= kSlopeHi, "slope " + fmt("%.3f", p)};
}

Outcome qas_exactness() {
    auto exact_cfg = preset(2, Algorithm::exact);
    exact_cfg.t_end = 310.0;
    auto qas_cfg = preset(2, Algorithm::qas);
    qas_cfg.t_end = 310.0;
    qas_cfg.qas_backend = "exact";
    const auto ref = run_experiment(exact_cfg);
    const auto qas = run_experiment(qas_cfg);
    double worst = 0;
    for (std::size_t k = 0; k < ref.rows.size(); ++k) {
        worst = std::max(worst, std::abs(qas.rows[k].p_median - ref.rows[k].p_median));
    }
    const bool ok = worst < kQasTol && ref.rows.size() == qas.rows.size() && ref.rows.back().t == 310.0;
    return {ok, "max |dP| " + fmt("%.2e", worst) + " over " + std::to_string(ref.rows.size()) + " points"};
}

Outcome shot_noise() {
    auto cfg = preset(2, Algorithm::trotter);
    cfg.t_end = 310.0;
    const auto rec = run_experiment(cfg);
    std::size_t inside = 0;
    for (const auto &r : rec.rows) {
        const double p = *r.p_exact;
        if (r.p_mad <= 3 * std::sqrt(p * (1 - p) / 1024.0) + kMadSlack) {
            ++inside;
        }
    }
    const double frac = static_cast<double>(inside) / static_cast<double>(rec.rows.size());
    return {frac >= kMadCoverage, fmt("%.1f%% of points within bound", 100 * frac)};
}

Outcome four_neutrino() {
    auto a = preset(4, Algorithm::trotter);
    auto b = preset(4, Algorithm::cartan);
    a.shots = b.shots = 0;
    a.all_qubits = b.all_qubits = true;
    const auto ra = run_experiment(a);
    const auto rb = run_experiment(b);
    double worst = 0;
    for (std::size_t k = 0; k < ra.rows.size(); ++k) {
        worst = std::max(worst, std::abs(ra.rows[k].p_median - rb.rows[k].p_median));
    }
    const bool ok = worst < kVariantTol && ra.rows.size() == rb.rows.size() && ra.rows.back().t == 270.0;
    return {ok, "max |P_trotter - P_cartan| " + fmt("%.2e", worst)};
}

Outcome oracle_self_check() {
    const auto m = build_model({2, 0.3});
    const double mu0 = 1.2;
    const auto mu = CouplingSchedule::constant(mu0);
    const auto psi0 = initial_flavor_state(2, {Flavor::electron, Flavor::electron});
    const oracle::Vec want = oracle::propagator(nuqsim::to_matrix(m.at(mu0)), 4.0) * psi0.to_eigen();
    const std::vector<double> steps{0.2, 0.1, 0.05, 0.025};
    std::vector<double> errs;
    for (double h : steps) {
        OracleConfig cfg;
        cfg.dt_inner = h;
        cfg.abort_norm_drift = 1.0;
        errs.push_back((evolve_exact(m, mu, psi0, 0, 4, 0.2, cfg).states.back().to_eigen() - want).norm());
    }
    const double p = loglog_slope(steps, errs);
    const auto full = evolve_exact(build_model({2, kTheta}), CouplingSchedule::profile(kMu0, kRnu), psi0, kStart,
                                   310.0, 0.2);
    const bool ok = p >= kRk4SlopeLo && p <= kRk4SlopeHi && full.max_norm_drift < kOracleDrift;
    return {ok, "slope " + fmt("%.3f", p) + ", window norm drift " + fmt("%.2e", full.max_norm_drift)};
}

Outcome one_shot() {
    auto cfg = preset(2, Algorithm::qas);
    cfg.t_end = 230.0;
    cfg.n_runs = 3;
    const auto rec = run_experiment(cfg);

    const auto model = build_model({2, kTheta});
    const std::vector<Flavor> fl{Flavor::electron, Flavor::electron};
    const QasSimulator sim(build_basis(model, initial_flavor_state(2, fl), flavor_preparation(fl), 1, true), model,
                           OverlapBackend::hadamard(1024, 1));
    const auto before = hadamard_test_invocations().load();
    sim.propagate(CouplingSchedule::profile(kMu0, kRnu), kStart, 310.0, 0.2);
    const auto after = hadamard_test_invocations().load();

    const bool ok = rec.hadamard_tests_before_propagation > 0 && rec.hadamard_tests_during_propagation == 0 &&
                    after == before;
    return {ok, std::to_string(rec.hadamard_tests_before_propagation) + " tests before propagation, " +
                    std::to_string(rec.hadamard_tests_during_propagation + (after - before)) + " after"};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char *name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "gate-count fidelity", 1, gate_counts},
        {2, "cartan block equivalence", 1, cartan_equivalence},
        {3, "operator-set closure", 1, closure_set},
        {4, "product-formula error order", 10, trotter_order},
        {5, "qas exact on spanning basis", 30, qas_exactness},
        {6, "shot-noise statistics", 300, shot_noise},
        {7, "four-neutrino run, trotter vs cartan", 600, four_neutrino},
        {8, "oracle self-check", 10, oracle_self_check},
        {9, "one-shot estimation contract", 60, one_shot},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o{false, ""};
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs < c.budget_s;
        const bool pass = o.pass && in_budget;
        failures += pass ? 0 : 1;
        std::printf("%s %d %s: %s (%.2f s, budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_s);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
    return failures == 0 ? 0 : 1;
}
