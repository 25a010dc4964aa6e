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
 * Classical reference propagation of i d/dt psi = H(t) psi with dense
 * matrices: classic RK4, or a product of midpoint matrix exponentials.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nuqsim/model.hpp"
#include "nuqsim/statevector.hpp"

namespace nuqsim {

struct OracleConfig {
    enum class Method { rk4, expm_step };

    Method method = Method::rk4;
    /// Inner step; unset means report_dt / 100.
    std::optional<double> dt_inner;
    std::size_t dense_cap = default_dense_qubit_cap;
    /// RK4 is not norm preserving; drift beyond this aborts the run.
    double abort_norm_drift = 1e-6;
};

/// exp(-i h dt) for Hermitian h, via its eigendecomposition.
inline Eigen::MatrixXcd hermitian_propagator(const Eigen::MatrixXcd &h, double dt) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("eigendecomposition failed");
    }
    const Eigen::VectorXcd phases =
        (eig.eigenvalues().cast<cplx>() * cplx(0.0, -dt)).array().exp().matrix();
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

inline StateTrajectory evolve_exact(const HamiltonianSplit &model, const CouplingSchedule &mu,
                                    const Statevector &state0, double t_start, double t_end,
                                    double report_dt, const OracleConfig &cfg = {}) {
    const std::size_t n = model.n_qubits();
    if (n > cfg.dense_cap) {
        throw std::length_error("oracle limited to " + std::to_string(cfg.dense_cap) + " qubits");
    }
    if (state0.n_qubits() != n) {
        throw std::invalid_argument("initial state width does not match the model");
    }
    const double dt_inner = cfg.dt_inner.value_or(report_dt / 100.0);
    if (!(dt_inner > 0) || dt_inner > report_dt * (1 + 1e-12)) {
        throw std::invalid_argument("dt_inner must lie in (0, report_dt]");
    }

    const Eigen::MatrixXcd h_i = to_matrix(model.h_i, cfg.dense_cap);
    const Eigen::MatrixXcd h_d = to_matrix(model.h_d, cfg.dense_cap);
    auto rhs = [&](double t, const Eigen::VectorXcd &psi) -> Eigen::VectorXcd {
        return cplx(0, -1) * (h_i * psi + mu(t) * (h_d * psi));
    };

    const auto grid = time_grid(t_start, t_end, report_dt);
    StateTrajectory out;
    out.times = grid;
    out.states.reserve(grid.size());
    out.states.push_back(state0);

    Eigen::VectorXcd psi = state0.to_eigen();
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double interval = grid[k] - grid[k - 1];
        const auto steps = static_cast<std::size_t>(std::ceil(interval / dt_inner - 1e-9));
        const double h = interval / static_cast<double>(steps);
        for (std::size_t s = 0; s < steps; ++s) {
            const double t = grid[k - 1] + static_cast<double>(s) * h;
            if (cfg.method == OracleConfig::Method::rk4) {
                const Eigen::VectorXcd k1 = rhs(t, psi);
                const Eigen::VectorXcd k2 = rhs(t + h / 2, psi + (h / 2) * k1);
                const Eigen::VectorXcd k3 = rhs(t + h / 2, psi + (h / 2) * k2);
                const Eigen::VectorXcd k4 = rhs(t + h, psi + h * k3);
                psi += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
            } else {
                psi = hermitian_propagator(h_i + mu(t + h / 2) * h_d, h) * psi;
            }
        }
        const double drift = std::abs(psi.norm() - 1.0);
        out.max_norm_drift = std::max(out.max_norm_drift, drift);
        if (drift > cfg.abort_norm_drift) {
            throw std::runtime_error("oracle norm drift " + std::to_string(drift) + " at t = " +
                                     std::to_string(grid[k]) + "; reduce dt_inner");
        }
        std::vector<cplx> amps(psi.data(), psi.data() + psi.size());
        out.states.push_back(Statevector::from_amplitudes(std::move(amps)));
    }
    return out;
}

} // namespace nuqsim
