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
 * Dense statevector simulator: gate set, circuits, shot sampling and the
 * ancilla-based Hadamard test.
 *
 * Basis index bit q holds the state of qubit q (qubit 0 is the least
 * significant bit). Bitstrings printed by this module list qubit 0 first.
 */

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "nuqsim/pauli.hpp"

namespace nuqsim {

namespace gate {

struct RX {
    std::size_t qubit;
    double angle;
};
struct RZ {
    std::size_t qubit;
    double angle;
};
struct H {
    std::size_t qubit;
};
struct S {
    std::size_t qubit;
};
struct Sdg {
    std::size_t qubit;
};
struct X {
    std::size_t qubit;
};
struct CNOT {
    std::size_t control;
    std::size_t target;
};
/// Pauli string on qubits [0, string.size()) controlled by `control`.
struct ControlledPauli {
    std::size_t control;
    PauliString string;
};

} // namespace gate

using Gate = std::variant<gate::RX, gate::RZ, gate::H, gate::S, gate::Sdg, gate::X, gate::CNOT,
                          gate::ControlledPauli>;

inline bool is_two_qubit(const Gate &g) {
    return std::holds_alternative<gate::CNOT>(g) || std::holds_alternative<gate::ControlledPauli>(g);
}

class Circuit {
  public:
    explicit Circuit(std::size_t n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits == 0) {
            throw std::invalid_argument("circuit needs at least one qubit");
        }
    }

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    const std::vector<Gate> &gates() const noexcept { return gates_; }
    std::size_t size() const noexcept { return gates_.size(); }

    Circuit &add(Gate g) {
        validate(g);
        gates_.push_back(std::move(g));
        return *this;
    }

    Circuit &append(const Circuit &other) {
        if (other.n_qubits_ > n_qubits_) {
            throw std::invalid_argument("appended circuit is wider than the target");
        }
        for (const auto &g : other.gates_) {
            gates_.push_back(g);
        }
        return *this;
    }

    std::size_t count_cnot() const {
        std::size_t k = 0;
        for (const auto &g : gates_) {
            k += std::holds_alternative<gate::CNOT>(g) ? 1 : 0;
        }
        return k;
    }

    std::size_t count_single_qubit() const {
        std::size_t k = 0;
        for (const auto &g : gates_) {
            k += is_two_qubit(g) ? 0 : 1;
        }
        return k;
    }

    /// Number of layers when every gate is scheduled as early as its qubits allow.
    std::size_t depth() const {
        std::vector<std::size_t> level(n_qubits_, 0);
        std::size_t deepest = 0;
        for (const auto &g : gates_) {
            const auto qs = operands(g);
            std::size_t at = 0;
            for (auto q : qs) {
                at = std::max(at, level[q]);
            }
            for (auto q : qs) {
                level[q] = at + 1;
            }
            deepest = std::max(deepest, at + 1);
        }
        return deepest;
    }

    static std::vector<std::size_t> operands(const Gate &g) {
        return std::visit(
            [](const auto &op) -> std::vector<std::size_t> {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, gate::CNOT>) {
                    return {op.control, op.target};
                } else if constexpr (std::is_same_v<T, gate::ControlledPauli>) {
                    std::vector<std::size_t> qs{op.control};
                    for (std::size_t q = 0; q < op.string.size(); ++q) {
                        if (op.string[q] != Pauli::I) {
                            qs.push_back(q);
                        }
                    }
                    return qs;
                } else {
                    return {op.qubit};
                }
            },
            g);
    }

  private:
    void validate(const Gate &g) const {
        auto check = [this](std::size_t q) {
            if (q >= n_qubits_) {
                throw std::out_of_range("gate operand " + std::to_string(q) + " outside " +
                                        std::to_string(n_qubits_) + "-qubit register");
            }
        };
        auto check_angle = [](double a) {
            if (!std::isfinite(a)) {
                throw std::invalid_argument("non-finite gate angle");
            }
        };
        std::visit(
            [&](const auto &op) {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, gate::CNOT>) {
                    check(op.control);
                    check(op.target);
                    if (op.control == op.target) {
                        throw std::invalid_argument("CNOT control equals target");
                    }
                } else if constexpr (std::is_same_v<T, gate::ControlledPauli>) {
                    check(op.control);
                    if (op.string.size() > n_qubits_ ||
                        (op.control < op.string.size() && op.string[op.control] != Pauli::I)) {
                        throw std::invalid_argument("controlled Pauli overlaps its control qubit");
                    }
                } else {
                    check(op.qubit);
                    if constexpr (std::is_same_v<T, gate::RX> || std::is_same_v<T, gate::RZ>) {
                        check_angle(op.angle);
                    }
                }
            },
            g);
    }

    std::size_t n_qubits_;
    std::vector<Gate> gates_;
};

/// 2x2 matrix of a single-qubit gate, row-major {m00, m01, m10, m11}.
using Mat2 = std::array<cplx, 4>;

inline Mat2 single_qubit_matrix(const Gate &g) {
    using namespace std::complex_literals;
    constexpr double r = std::numbers::sqrt2 / 2.0;
    return std::visit(
        [&](const auto &op) -> Mat2 {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, gate::RX>) {
                const double c = std::cos(op.angle / 2), s = std::sin(op.angle / 2);
                return {c, -1i * s, -1i * s, c};
            } else if constexpr (std::is_same_v<T, gate::RZ>) {
                return {std::exp(-0.5i * op.angle), 0.0, 0.0, std::exp(0.5i * op.angle)};
            } else if constexpr (std::is_same_v<T, gate::H>) {
                return {r, r, r, -r};
            } else if constexpr (std::is_same_v<T, gate::S>) {
                return {1.0, 0.0, 0.0, 1i};
            } else if constexpr (std::is_same_v<T, gate::Sdg>) {
                return {1.0, 0.0, 0.0, -1i};
            } else if constexpr (std::is_same_v<T, gate::X>) {
                return {0.0, 1.0, 1.0, 0.0};
            } else {
                throw std::invalid_argument("not a single-qubit gate");
            }
        },
        g);
}

class Statevector {
  public:
    static constexpr double norm_tolerance = 1e-12;

    /// |0...0> on n qubits.
    explicit Statevector(std::size_t n_qubits) : Statevector(n_qubits, 0) {}

    Statevector(std::size_t n_qubits, std::uint64_t basis_index) : n_qubits_(n_qubits) {
        if (n_qubits == 0 || n_qubits > 30) {
            throw std::invalid_argument("statevector supports 1..30 qubits");
        }
        amps_.assign(std::size_t{1} << n_qubits, cplx{});
        if (basis_index >= amps_.size()) {
            throw std::out_of_range("basis index outside register");
        }
        amps_[basis_index] = 1.0;
    }

    /// Takes amplitudes as given; normalization is checked only where an operation requires it.
    static Statevector from_amplitudes(std::vector<cplx> amps) {
        const std::size_t dim = amps.size();
        if (dim < 2 || !std::has_single_bit(dim)) {
            throw std::invalid_argument("amplitude count must be a power of two >= 2");
        }
        Statevector s(static_cast<std::size_t>(std::countr_zero(dim)));
        s.amps_ = std::move(amps);
        return s;
    }

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t dim() const noexcept { return amps_.size(); }
    std::span<const cplx> amplitudes() const noexcept { return amps_; }
    std::span<cplx> amplitudes() noexcept { return amps_; }
    cplx operator[](std::size_t i) const { return amps_.at(i); }

    double norm_squared() const {
        double acc = 0.0;
        for (const auto &a : amps_) {
            acc += std::norm(a);
        }
        return acc;
    }

    void require_normalized(double tol = 1e-10) const {
        if (std::abs(norm_squared() - 1.0) > tol) {
            throw std::domain_error("statevector is not normalized");
        }
    }

    void apply(const Gate &g) {
        std::visit(
            [&](const auto &op) {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, gate::CNOT>) {
                    apply_cnot(op.control, op.target);
                } else if constexpr (std::is_same_v<T, gate::ControlledPauli>) {
                    apply_pauli(op.string, std::uint64_t{1} << op.control);
                } else {
                    apply_single(op.qubit, single_qubit_matrix(g));
                }
            },
            g);
    }

    void apply(const Circuit &c) {
        if (c.n_qubits() != n_qubits_) {
            throw std::invalid_argument("circuit width " + std::to_string(c.n_qubits()) +
                                        " does not match statevector width " +
                                        std::to_string(n_qubits_));
        }
        for (const auto &g : c.gates()) {
            apply(g);
        }
        for (const auto &a : amps_) {
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
                throw std::domain_error("non-finite amplitude after circuit application");
            }
        }
    }

    /**
     * Applies the Pauli string (acting on qubits [0, p.size())), optionally
     * only on basis states where all bits of `control_mask` are set.
     */
    void apply_pauli(const PauliString &p, std::uint64_t control_mask = 0) {
        if (p.size() > n_qubits_) {
            throw std::invalid_argument("Pauli string wider than register");
        }
        std::vector<cplx> out = amps_;
        for (std::uint64_t b = 0; b < amps_.size(); ++b) {
            if ((b & control_mask) != control_mask) {
                continue;
            }
            auto [phase, target] = p.act_on_basis(b);
            out[target] = phase * amps_[b];
        }
        amps_ = std::move(out);
    }

    double marginal_probability(std::size_t qubit, int outcome) const {
        if (qubit >= n_qubits_) {
            throw std::out_of_range("qubit index outside register");
        }
        if (outcome != 0 && outcome != 1) {
            throw std::invalid_argument("outcome must be 0 or 1");
        }
        const std::uint64_t bit = std::uint64_t{1} << qubit;
        double acc = 0.0;
        for (std::uint64_t b = 0; b < amps_.size(); ++b) {
            if (((b & bit) != 0) == (outcome == 1)) {
                acc += std::norm(amps_[b]);
            }
        }
        return acc;
    }

    std::vector<double> probabilities() const {
        std::vector<double> p(amps_.size());
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            p[i] = std::norm(amps_[i]);
        }
        return p;
    }

    /// <this|other>
    cplx inner(const Statevector &other) const {
        if (other.dim() != dim()) {
            throw std::invalid_argument("inner product dimension mismatch");
        }
        cplx acc{};
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            acc += std::conj(amps_[i]) * other.amps_[i];
        }
        return acc;
    }

    Eigen::VectorXcd to_eigen() const {
        return Eigen::Map<const Eigen::VectorXcd>(amps_.data(), static_cast<Eigen::Index>(amps_.size()));
    }

  private:
    void apply_single(std::size_t q, const Mat2 &m) {
        const std::uint64_t bit = std::uint64_t{1} << q;
        for (std::uint64_t b = 0; b < amps_.size(); ++b) {
            if (b & bit) {
                continue;
            }
            const cplx a0 = amps_[b];
            const cplx a1 = amps_[b | bit];
            amps_[b] = m[0] * a0 + m[1] * a1;
            amps_[b | bit] = m[2] * a0 + m[3] * a1;
        }
    }

    void apply_cnot(std::size_t control, std::size_t target) {
        const std::uint64_t c = std::uint64_t{1} << control;
        const std::uint64_t t = std::uint64_t{1} << target;
        for (std::uint64_t b = 0; b < amps_.size(); ++b) {
            if ((b & c) && !(b & t)) {
                std::swap(amps_[b], amps_[b | t]);
            }
        }
    }

    std::size_t n_qubits_;
    std::vector<cplx> amps_;
};

/// Applies the circuit to a copy of `s`.
inline Statevector apply(const Circuit &c, Statevector s) {
    s.apply(c);
    return s;
}

/// Full unitary of a circuit, column j = circuit applied to |j>.
inline Eigen::MatrixXcd circuit_unitary(const Circuit &c, std::size_t max_qubits = default_dense_qubit_cap) {
    if (c.n_qubits() > max_qubits) {
        throw std::length_error("circuit too wide for a dense unitary");
    }
    const std::size_t dim = std::size_t{1} << c.n_qubits();
    Eigen::MatrixXcd u(dim, dim);
    for (std::size_t j = 0; j < dim; ++j) {
        Statevector s(c.n_qubits(), j);
        s.apply(c);
        u.col(static_cast<Eigen::Index>(j)) = s.to_eigen();
    }
    return u;
}

/// Bitstring with qubit 0 as the first character.
inline std::string basis_label(std::uint64_t index, std::size_t n_qubits) {
    std::string out(n_qubits, '0');
    for (std::size_t q = 0; q < n_qubits; ++q) {
        if ((index >> q) & 1U) {
            out[q] = '1';
        }
    }
    return out;
}

using Counts = std::map<std::string, std::size_t>;

/// Multinomial sample of `shots` measurements in the computational basis.
inline Counts sample_counts(const Statevector &s, std::size_t shots, std::uint64_t rng_seed) {
    if (shots == 0) {
        throw std::invalid_argument("shots must be positive");
    }
    s.require_normalized();
    const auto probs = s.probabilities();
    std::mt19937_64 rng(rng_seed);
    std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
    std::vector<std::size_t> hist(probs.size(), 0);
    for (std::size_t k = 0; k < shots; ++k) {
        ++hist[dist(rng)];
    }
    Counts out;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        if (hist[i] > 0) {
            out[basis_label(i, s.n_qubits())] = hist[i];
        }
    }
    return out;
}

/// Fraction of shots with `qubit` measured as `outcome`.
inline double count_marginal(const Counts &counts, std::size_t qubit, int outcome) {
    std::size_t hit = 0, total = 0;
    const char want = outcome == 0 ? '0' : '1';
    for (const auto &[bits, n] : counts) {
        if (qubit >= bits.size()) {
            throw std::out_of_range("qubit index outside bitstring");
        }
        total += n;
        hit += bits[qubit] == want ? n : 0;
    }
    if (total == 0) {
        throw std::invalid_argument("empty histogram");
    }
    return static_cast<double>(hit) / static_cast<double>(total);
}

/// splitmix64 finalizer over (base, stream); decorrelates per-run and per-circuit seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

enum class Part { real, imag };

/// Process-wide count of Hadamard-test circuits executed.
inline std::atomic<std::uint64_t> &hadamard_test_invocations() {
    static std::atomic<std::uint64_t> count{0};
    return count;
}

/// Shot budget for the Hadamard test; std::nullopt means the analytic P(0) - P(1).
struct HadamardShots {
    std::optional<std::size_t> shots;
    std::uint64_t seed = 0;

    static HadamardShots exact() { return {}; }
    static HadamardShots sampled(std::size_t n, std::uint64_t seed) { return {n, seed}; }
};

/**
 * @brief Hadamard test for Re<psi|U|psi> or Im<psi|U|psi>.
 *
 * The ancilla is appended as the most significant qubit (index
 * prep.n_qubits()). The imaginary part inserts S-dagger on the ancilla right
 * after the first Hadamard. Returns the ancilla bias P(0) - P(1).
 */
inline double hadamard_test(const Circuit &prep, const PauliString &u, Part part,
                            const HadamardShots &mode = HadamardShots::exact()) {
    const std::size_t n = prep.n_qubits();
    if (u.size() != n) {
        throw std::invalid_argument("U must act on exactly the system register");
    }
    hadamard_test_invocations().fetch_add(1, std::memory_order_relaxed);
    const std::size_t ancilla = n;
    Circuit c(n + 1);
    c.append(prep);
    c.add(gate::H{ancilla});
    if (part == Part::imag) {
        c.add(gate::Sdg{ancilla});
    }
    c.add(gate::ControlledPauli{ancilla, u});
    c.add(gate::H{ancilla});

    Statevector s(n + 1);
    s.apply(c);
    if (!mode.shots) {
        return s.marginal_probability(ancilla, 0) - s.marginal_probability(ancilla, 1);
    }
    const auto counts = sample_counts(s, *mode.shots, mode.seed);
    const double p0 = count_marginal(counts, ancilla, 0);
    return 2.0 * p0 - 1.0;
}

} // namespace nuqsim
