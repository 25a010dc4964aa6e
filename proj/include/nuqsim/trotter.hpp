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
 * First-order product formula for H(t) = h_i + mu(t) h_d compiled to
 * circuits. One step over [t, t + dt] is
 *
 *   prod_pairs exp(-i dt mu' h_d^{pair}) * prod_k exp(-i dt h_i^k)
 *
 * with mu' = mu(t + dt), the one-body layer applied first. Gate angles follow
 * RX(a) = exp(-i a X / 2) and RZ(a) = exp(-i a Z / 2).
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nuqsim/model.hpp"
#include "nuqsim/pauli.hpp"
#include "nuqsim/statevector.hpp"

namespace nuqsim {

struct TrotterPlan {
    enum class Variant { brute_force, cartan };
    /// Where mu is sampled inside a step.
    enum class MuPoint { step_end, midpoint };

    Variant variant = Variant::brute_force;
    double dt = 0.2;
    MuPoint mu_point = MuPoint::step_end;
};

inline std::string to_string(TrotterPlan::Variant v) {
    return v == TrotterPlan::Variant::brute_force ? "trotter" : "cartan";
}

namespace detail {

inline double real_coefficient(cplx c) {
    if (std::abs(c.imag()) > 1e-12) {
        throw std::invalid_argument("product formula needs a Hermitian Hamiltonian");
    }
    return c.real();
}

/// exp(-i angle/2 * P_i P_j) for P in {X, Y, Z}, as a CNOT-RZ-CNOT ladder in the P basis.
inline void append_pair_exponential(Circuit &c, std::size_t i, std::size_t j, Pauli p, double angle) {
    if (p == Pauli::Y) {
        c.add(gate::Sdg{i});
        c.add(gate::Sdg{j});
    }
    if (p != Pauli::Z) {
        c.add(gate::H{i});
        c.add(gate::H{j});
    }
    c.add(gate::CNOT{i, j});
    c.add(gate::RZ{j, angle});
    c.add(gate::CNOT{i, j});
    if (p != Pauli::Z) {
        c.add(gate::H{i});
        c.add(gate::H{j});
    }
    if (p == Pauli::Y) {
        c.add(gate::S{i});
        c.add(gate::S{j});
    }
}

/**
 * exp(-(i/2) a (X_i X_j + Y_i Y_j + Z_i Z_j)) up to a global phase, with
 * three CNOTs and eight single-qubit gates.
 */
inline void append_cartan_block(Circuit &c, std::size_t i, std::size_t j, double a) {
    constexpr double quarter_turn = std::numbers::pi / 2;
    c.add(gate::CNOT{i, j});
    c.add(gate::RX{i, a});
    c.add(gate::RZ{j, a});
    c.add(gate::H{i});
    c.add(gate::CNOT{i, j});
    c.add(gate::S{i});
    c.add(gate::RZ{j, -a});
    c.add(gate::H{i});
    c.add(gate::CNOT{i, j});
    // closing layer: RX(-pi/2) on i, RX(+pi/2) on j
    c.add(gate::RX{i, -quarter_turn});
    c.add(gate::RX{j, quarter_turn});
}

} // namespace detail

/// Two-qubit exchange block exp(-(i/2) mu_dt (XX + YY + ZZ)) up to global phase.
inline Circuit cartan_pair_block(double mu_dt) {
    if (!std::isfinite(mu_dt)) {
        throw std::invalid_argument("non-finite block angle");
    }
    Circuit c(2);
    detail::append_cartan_block(c, 0, 1, mu_dt);
    return c;
}

/// exp(-i dt h) for a sum of single-qubit terms, qubit by qubit, X then Y then Z.
inline Circuit one_body_circuit(const PauliSum &h, double dt) {
    const std::size_t n = h.n_qubits();
    for (const auto &[s, c] : h) {
        if (s.weight() > 1) {
            throw std::invalid_argument("one-body layer got multi-qubit term " + s.to_string());
        }
    }
    Circuit out(n);
    for (std::size_t q = 0; q < n; ++q) {
        for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
            const cplx c = h.coefficient(PauliString::single(n, q, p));
            if (c == cplx{}) {
                continue;
            }
            const double angle = 2.0 * detail::real_coefficient(c) * dt;
            switch (p) {
            case Pauli::X:
                out.add(gate::RX{q, angle});
                break;
            case Pauli::Y:
                out.add(gate::Sdg{q});
                out.add(gate::RX{q, angle});
                out.add(gate::S{q});
                break;
            default:
                out.add(gate::RZ{q, angle});
                break;
            }
        }
    }
    return out;
}

/**
 * exp(-i scale h) for a sum of XX/YY/ZZ pair terms. Pairs in lexicographic
 * (i, j) order; inside a pair ZZ, XX, YY for brute force, or one exchange
 * block for the Cartan variant (which needs equal XX, YY, ZZ weights).
 */
inline Circuit two_body_circuit(const PauliSum &h, double scale, TrotterPlan::Variant variant) {
    const std::size_t n = h.n_qubits();
    std::size_t covered = 0;
    Circuit out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double zz = detail::real_coefficient(h.coefficient(PauliString::pair(n, i, j, Pauli::Z)));
            const double xx = detail::real_coefficient(h.coefficient(PauliString::pair(n, i, j, Pauli::X)));
            const double yy = detail::real_coefficient(h.coefficient(PauliString::pair(n, i, j, Pauli::Y)));
            covered += (zz != 0) + (xx != 0) + (yy != 0);
            if (variant == TrotterPlan::Variant::brute_force) {
                for (auto [p, w] : {std::pair{Pauli::Z, zz}, std::pair{Pauli::X, xx}, std::pair{Pauli::Y, yy}}) {
                    if (w != 0) {
                        detail::append_pair_exponential(out, i, j, p, 2.0 * w * scale);
                    }
                }
            } else if (xx != 0 || yy != 0 || zz != 0) {
                if (std::abs(xx - yy) > 1e-14 || std::abs(xx - zz) > 1e-14) {
                    throw std::invalid_argument("Cartan block needs equal XX, YY, ZZ weights on a pair");
                }
                detail::append_cartan_block(out, i, j, 2.0 * xx * scale);
            }
        }
    }
    if (covered != h.size()) {
        throw std::invalid_argument("two-body layer supports only XX, YY, ZZ pair terms");
    }
    return out;
}

inline double coupling_sample_time(const TrotterPlan &plan, double t, double dt) {
    return plan.mu_point == TrotterPlan::MuPoint::step_end ? t + dt : t + dt / 2;
}

/// Circuit for one product-formula step of length `dt` starting at time t.
inline Circuit step_circuit(const HamiltonianSplit &model, const TrotterPlan &plan, double t,
                            const CouplingSchedule &mu, std::optional<double> dt = std::nullopt) {
    const double h = dt.value_or(plan.dt);
    if (!(h >= 0) || !std::isfinite(h)) {
        throw std::invalid_argument("time step must be finite and >= 0");
    }
    const double mu_prime = mu(coupling_sample_time(plan, t, h));
    Circuit c = one_body_circuit(model.h_i, h);
    c.append(two_body_circuit(model.h_d, mu_prime * h, plan.variant));
    return c;
}

struct TrotterRun {
    StateTrajectory trajectory;
    /// Gates and CNOTs a circuit rebuilt from t_start would hold at the last step.
    std::size_t accumulated_gates = 0;
    std::size_t accumulated_cnots = 0;
    std::size_t accumulated_depth = 0;
};

using StateObserver = std::function<void(double t, const Statevector &)>;

/**
 * Applies step circuits from t_start to t_end, carrying the statevector
 * forward. The observer sees the initial state and the state after each
 * step. A trailing partial step is used when the window is not a multiple of
 * plan.dt.
 */
inline TrotterRun evolve(const HamiltonianSplit &model, const TrotterPlan &plan, const CouplingSchedule &mu,
                         const Statevector &state0, double t_start, double t_end,
                         const StateObserver &observer = {}, std::size_t max_steps = 1'000'000) {
    if (!(plan.dt > 0)) {
        throw std::invalid_argument("dt must be positive");
    }
    if (state0.n_qubits() != model.n_qubits()) {
        throw std::invalid_argument("initial state width does not match the model");
    }
    const auto grid = time_grid(t_start, t_end, plan.dt);
    if (grid.size() - 1 > max_steps) {
        throw std::invalid_argument("window needs " + std::to_string(grid.size() - 1) +
                                    " steps, cap is " + std::to_string(max_steps));
    }
    TrotterRun run;
    run.trajectory.times = grid;
    run.trajectory.states.reserve(grid.size());
    Statevector psi = state0;
    run.trajectory.states.push_back(psi);
    if (observer) {
        observer(grid.front(), psi);
    }
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const Circuit c = step_circuit(model, plan, grid[k - 1], mu, grid[k] - grid[k - 1]);
        psi.apply(c);
        run.accumulated_gates += c.size();
        run.accumulated_cnots += c.count_cnot();
        run.accumulated_depth += c.depth();
        run.trajectory.max_norm_drift =
            std::max(run.trajectory.max_norm_drift, std::abs(std::sqrt(psi.norm_squared()) - 1.0));
        run.trajectory.states.push_back(psi);
        if (observer) {
            observer(grid[k], psi);
        }
    }
    return run;
}

} // namespace nuqsim
