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
 * Two-flavor collective neutrino Hamiltonian in the flavor basis,
 *
 *   H(t) = 1/2 sum_i (i+1)(sin(theta) X_i - cos(theta) Z_i)
 *        + mu(t) * 1/2 sum_{i<j} (X_i X_j + Y_i Y_j + Z_i Z_j),
 *
 * split as H(t) = h_i + mu(t) h_d. Times and energies are in units of the
 * reference frequency omega_0 (set to 1). Neutrino i sits in the frequency
 * bin (i+1) omega_0, so qubit 0 is the omega_1 bin.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nuqsim/pauli.hpp"
#include "nuqsim/statevector.hpp"

namespace nuqsim {

namespace schedule {

struct Constant {
    double mu0;
};

/// mu0 * (1 - sqrt(1 - (r_nu / t)^2))^2, defined for t >= r_nu.
struct Profile {
    double mu0;
    double r_nu;
};

/// Piecewise-linear interpolation between (t, mu) samples.
struct Tabulated {
    std::vector<double> t;
    std::vector<double> mu;
};

} // namespace schedule

/// Time-dependent interaction strength mu(t).
class CouplingSchedule {
  public:
    using Kind = std::variant<schedule::Constant, schedule::Profile, schedule::Tabulated>;

    CouplingSchedule(Kind kind) : kind_(std::move(kind)) { validate(); } // NOLINT(implicit)

    static CouplingSchedule constant(double mu0) { return CouplingSchedule(Kind{schedule::Constant{mu0}}); }
    static CouplingSchedule profile(double mu0, double r_nu) { return CouplingSchedule(Kind{schedule::Profile{mu0, r_nu}}); }
    static CouplingSchedule tabulated(std::vector<double> t, std::vector<double> mu) {
        return CouplingSchedule(Kind{schedule::Tabulated{std::move(t), std::move(mu)}});
    }

    const Kind &kind() const noexcept { return kind_; }

    std::string name() const {
        return std::visit(
            [](const auto &k) -> std::string {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, schedule::Constant>) {
                    return "constant";
                } else if constexpr (std::is_same_v<T, schedule::Profile>) {
                    return "profile";
                } else {
                    return "table";
                }
            },
            kind_);
    }

    /// Inclusive domain [lo, hi] on which mu(t) is defined.
    std::pair<double, double> domain() const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return std::visit(
            [&](const auto &k) -> std::pair<double, double> {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, schedule::Constant>) {
                    return {-inf, inf};
                } else if constexpr (std::is_same_v<T, schedule::Profile>) {
                    return {k.r_nu, inf};
                } else {
                    return {k.t.front(), k.t.back()};
                }
            },
            kind_);
    }

    double operator()(double t) const { return mu_at(t); }

    double mu_at(double t) const {
        if (!std::isfinite(t)) {
            throw std::domain_error("mu(t) requested at non-finite time");
        }
        const auto [lo, hi] = domain();
        if (t < lo || t > hi) {
            throw std::domain_error("t = " + std::to_string(t) + " outside " + name() +
                                    " schedule domain [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
        }
        return std::visit(
            [&](const auto &k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, schedule::Constant>) {
                    return k.mu0;
                } else if constexpr (std::is_same_v<T, schedule::Profile>) {
                    const double x = k.r_nu / t;
                    const double g = 1.0 - std::sqrt(std::max(0.0, 1.0 - x * x));
                    return k.mu0 * g * g;
                } else {
                    auto it = std::upper_bound(k.t.begin(), k.t.end(), t);
                    if (it == k.t.end()) {
                        return k.mu.back();
                    }
                    const auto hi_idx = static_cast<std::size_t>(it - k.t.begin());
                    const std::size_t lo_idx = hi_idx - 1;
                    const double w = (t - k.t[lo_idx]) / (k.t[hi_idx] - k.t[lo_idx]);
                    return (1.0 - w) * k.mu[lo_idx] + w * k.mu[hi_idx];
                }
            },
            kind_);
    }

  private:
    void validate() const {
        std::visit(
            [](const auto &k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, schedule::Constant>) {
                    if (!std::isfinite(k.mu0) || k.mu0 < 0) {
                        throw std::invalid_argument("constant mu0 must be finite and >= 0");
                    }
                } else if constexpr (std::is_same_v<T, schedule::Profile>) {
                    if (!std::isfinite(k.mu0) || k.mu0 < 0) {
                        throw std::invalid_argument("profile mu0 must be finite and >= 0");
                    }
                    if (!std::isfinite(k.r_nu) || k.r_nu <= 0) {
                        throw std::invalid_argument("profile r_nu must be finite and > 0");
                    }
                } else {
                    if (k.t.size() < 2 || k.t.size() != k.mu.size()) {
                        throw std::invalid_argument("tabulated schedule needs >= 2 matching (t, mu) samples");
                    }
                    for (std::size_t i = 0; i < k.t.size(); ++i) {
                        if (!std::isfinite(k.t[i]) || !std::isfinite(k.mu[i]) || k.mu[i] < 0) {
                            throw std::invalid_argument("tabulated mu must be finite and >= 0");
                        }
                        if (i > 0 && !(k.t[i] > k.t[i - 1])) {
                            throw std::invalid_argument("tabulated times must be strictly increasing");
                        }
                    }
                }
            },
            kind_);
    }

    Kind kind_;
};

/// H(t) = h_i + mu(t) h_d.
struct HamiltonianSplit {
    PauliSum h_i;
    PauliSum h_d;

    std::size_t n_qubits() const noexcept { return h_i.n_qubits(); }

    PauliSum at(double mu) const { return h_i + h_d * cplx{mu}; }
};

struct NeutrinoModel {
    std::size_t n = 2;
    double theta = 0.0;
};

inline void validate_model(const NeutrinoModel &m) {
    if (m.n < 2) {
        throw std::invalid_argument("need at least two neutrinos");
    }
    if (m.n > 30) {
        throw std::invalid_argument("at most 30 neutrinos are supported");
    }
    if (!std::isfinite(m.theta) || m.theta < 0.0 || m.theta >= std::numbers::pi / 2) {
        throw std::invalid_argument("mixing angle must lie in [0, pi/2)");
    }
}

inline HamiltonianSplit build_model(const NeutrinoModel &m) {
    validate_model(m);
    const double s = std::sin(m.theta);
    const double c = std::cos(m.theta);
    HamiltonianSplit out{PauliSum(m.n), PauliSum(m.n)};
    for (std::size_t i = 0; i < m.n; ++i) {
        const double w = 0.5 * static_cast<double>(i + 1);
        out.h_i.add(w * s, PauliString::single(m.n, i, Pauli::X));
        out.h_i.add(-w * c, PauliString::single(m.n, i, Pauli::Z));
    }
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = i + 1; j < m.n; ++j) {
            for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
                out.h_d.add(0.5, PauliString::pair(m.n, i, j, p));
            }
        }
    }
    return out;
}

enum class Flavor { electron, heavy };

/// nu_e -> |0>, nu_x -> |1> per qubit.
inline Statevector initial_flavor_state(std::size_t n, const std::vector<Flavor> &flavors) {
    if (flavors.size() != n) {
        throw std::invalid_argument("expected " + std::to_string(n) + " flavors, got " +
                                    std::to_string(flavors.size()));
    }
    std::uint64_t index = 0;
    for (std::size_t q = 0; q < n; ++q) {
        if (flavors[q] == Flavor::heavy) {
            index |= std::uint64_t{1} << q;
        }
    }
    return Statevector(n, index);
}

/**
 * Reporting times t_start, t_start + dt, ..., ending exactly at t_end. A
 * trailing partial interval is kept when (t_end - t_start) is not a multiple
 * of dt.
 */
inline std::vector<double> time_grid(double t_start, double t_end, double dt) {
    if (!(dt > 0) || !std::isfinite(dt)) {
        throw std::invalid_argument("time step must be positive and finite");
    }
    if (!(t_end >= t_start)) {
        throw std::invalid_argument("t_end must not precede t_start");
    }
    const double span = (t_end - t_start) / dt;
    const auto whole = static_cast<std::size_t>(std::floor(span + 1e-9));
    std::vector<double> grid;
    grid.reserve(whole + 2);
    for (std::size_t k = 0; k <= whole; ++k) {
        grid.push_back(t_start + static_cast<double>(k) * dt);
    }
    if (span - static_cast<double>(whole) > 1e-9) {
        grid.push_back(t_end);
    } else {
        grid.back() = t_end;
    }
    return grid;
}

struct StateTrajectory {
    std::vector<double> times;
    std::vector<Statevector> states;
    /// Largest | ||psi|| - 1 | seen at any reporting point.
    double max_norm_drift = 0.0;
};

/// Circuit taking |0...0> to the given flavor product state.
inline Circuit flavor_preparation(const std::vector<Flavor> &flavors) {
    Circuit c(flavors.size());
    for (std::size_t q = 0; q < flavors.size(); ++q) {
        if (flavors[q] == Flavor::heavy) {
            c.add(gate::X{q});
        }
    }
    return c;
}

} // namespace nuqsim
