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

// nuqsim simulate --config run.ini [--algorithm trotter|cartan|qas|exact] ...
//
// Every option may also come from the config file (key = value, keys are the
// long option names, e.g. t-end = 300) or from an environment variable
// NUQSIM_<OPTION>, e.g. NUQSIM_SHOTS=0 or NUQSIM_ALL_QUBITS=true.
// Precedence: flag > env > file.

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nuqsim/experiment.hpp"

namespace {

std::string env_name(std::string opt) {
    std::string out = "NUQSIM_";
    for (char c : opt) {
        out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return out;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Collective neutrino oscillation simulator"};
    app.require_subcommand(1);
    // options live on the root app so a flat config file can set them
    app.add_subcommand("simulate", "Run one experiment and write its trajectory")
        ->fallthrough()
        ->footer("Run options are listed by 'nuqsim --help'.");
    app.set_config("--config", "", "Flat key = value run configuration file");

    nuqsim::RunConfig cfg;
    std::string algorithm = "trotter";
    std::string mu_kind = "profile";
    std::string mu_table;
    std::string out_path = "-";
    std::string format = "csv";
    double theta = 0;
    double mu0 = 0, rnu = 0, t_end = 0, qas_dt = 0;
    bool midpoint = false, no_reduce = false, no_renorm = false;

    // repeated options keep the last value, so flags given after the env block win
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::vector<std::string> env_args;
    auto from_env = [&](const std::string &name) {
        if (const char *v = std::getenv(env_name(name).c_str()); v != nullptr && *v != '\0') {
            env_args.push_back("--" + name + "=" + v);
        }
    };
    auto add = [&](const std::string &name, auto &target, const std::string &help) {
        from_env(name);
        return app.add_option("--" + name, target, help);
    };
    auto add_flag = [&](const std::string &name, bool &target, const std::string &help) {
        from_env(name);
        return app.add_flag("--" + name, target, help);
    };
    add("algorithm", algorithm, "trotter | cartan | qas | exact")
        ->check(CLI::IsMember({"trotter", "cartan", "qas", "exact"}))
        ->capture_default_str();
    add("n", cfg.n_neutrinos, "number of neutrinos (qubits)")->check(CLI::Range(2, 30))->capture_default_str();
    auto *theta_opt = add("theta", theta, "vacuum mixing angle in radians (required)");
    add("mu-kind", mu_kind, "coupling schedule: constant | profile | table")
        ->check(CLI::IsMember({"constant", "profile", "table"}))
        ->capture_default_str();
    auto *mu0_opt = add("mu0", mu0, "coupling scale mu0 (constant, profile)");
    auto *rnu_opt = add("rnu", rnu, "neutrinosphere radius R_nu in 1/omega0 (profile)");
    add("mu-table", mu_table, "CSV of t,mu samples (table)");
    add("flavors", cfg.flavors, "initial flavors, one of e/x per neutrino (default all e)");
    add("t-start", cfg.t_start, "start time in 1/omega0")->capture_default_str();
    auto *t_end_opt = add("t-end", t_end, "end time in 1/omega0 (default 270 for n>=4 trotter/cartan, else 310)");
    add("dt", cfg.report_dt, "time step / reporting interval")->capture_default_str();
    add("shots", cfg.shots, "shots per circuit; 0 = analytic probabilities")->capture_default_str();
    add("runs", cfg.n_runs, "independent sampled runs")->check(CLI::PositiveNumber)->capture_default_str();
    add("seed", cfg.seed, "base RNG seed")->capture_default_str();
    add("out", out_path, "output path, '-' for stdout")->capture_default_str();
    add("format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    add_flag("all-qubits", cfg.all_qubits, "emit every qubit, not only qubit 0");
    add_flag("mu-midpoint", midpoint, "sample mu at the step midpoint instead of the step end");
    add("qas-backend", cfg.qas_backend, "exact | hadamard")
        ->check(CLI::IsMember({"exact", "hadamard"}))
        ->capture_default_str();
    add("qas-moments", cfg.qas_moments, "cumulative moment order K")->capture_default_str();
    add_flag("qas-no-reduce", no_reduce, "keep phase-duplicate basis states");
    add("qas-integrator", cfg.qas_integrator, "rk4 | euler")
        ->check(CLI::IsMember({"rk4", "euler"}))
        ->capture_default_str();
    auto *qas_dt_opt = add("qas-dt", qas_dt, "classical step (default dt/20)");
    add_flag("qas-no-renormalize", no_renorm, "disable per-step alpha renormalization");
    add("dense-cap", cfg.dense_cap, "largest register for dense matrices")->capture_default_str();

    std::vector<const char *> args{argv[0]};
    for (const auto &a : env_args) {
        args.push_back(a.c_str());
    }
    args.insert(args.end(), argv + 1, argv + argc);
    CLI11_PARSE(app, static_cast<int>(args.size()), args.data());

    try {
        cfg.algorithm = nuqsim::parse_algorithm(algorithm);
        if (theta_opt->count() > 0) {
            cfg.theta = theta;
        }
        cfg.schedule.kind = mu_kind;
        if (mu0_opt->count() > 0) {
            cfg.schedule.mu0 = mu0;
        }
        if (rnu_opt->count() > 0) {
            cfg.schedule.r_nu = rnu;
        }
        if (mu_kind == "table") {
            if (mu_table.empty()) {
                throw std::invalid_argument("--mu-kind table needs --mu-table");
            }
            nuqsim::load_schedule_table(cfg.schedule, mu_table);
        }
        if (t_end_opt->count() > 0) {
            cfg.t_end = t_end;
        }
        if (qas_dt_opt->count() > 0) {
            cfg.qas_dt_classical = qas_dt;
        }
        cfg.mu_point = midpoint ? nuqsim::TrotterPlan::MuPoint::midpoint : nuqsim::TrotterPlan::MuPoint::step_end;
        cfg.qas_reduce = !no_reduce;
        cfg.qas_renormalize = !no_renorm;
        cfg.validate();
    } catch (const std::exception &e) {
        std::cerr << "nuqsim: invalid configuration: " << e.what() << '\n';
        return 2;
    }

    try {
        const auto rec = nuqsim::run_experiment(cfg);
        for (const auto &w : rec.warnings) {
            std::cerr << "nuqsim: warning: " << w << '\n';
        }
        std::cerr << "nuqsim: algorithm=" << nuqsim::to_string(cfg.algorithm) << " seed=" << cfg.seed
                  << " rows=" << rec.rows.size() << '\n';
        std::ofstream file;
        std::ostream *out = &std::cout;
        if (out_path != "-") {
            file.open(out_path, std::ios::binary);
            if (!file) {
                std::cerr << "nuqsim: cannot write '" << out_path << "'\n";
                return 1;
            }
            out = &file;
        }
        if (format == "json") {
            nuqsim::write_json(rec, *out);
        } else {
            nuqsim::write_csv(rec.rows, *out);
        }
        out->flush();
        if (!*out) {
            std::cerr << "nuqsim: write failed\n";
            return 1;
        }
    } catch (const std::exception &e) {
        std::cerr << "nuqsim: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
