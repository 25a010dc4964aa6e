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
 * Symbolic algebra over N-qubit Pauli strings: products, commutators, linear
 * combinations and the nested-commutator closure used to seed ansatz bases.
 */

#pragma once

#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nuqsim {

using cplx = std::complex<double>;

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char to_char(Pauli p) {
    constexpr char table[] = {'I', 'X', 'Y', 'Z'};
    return table[static_cast<std::uint8_t>(p)];
}

inline Pauli pauli_from_char(char c) {
    switch (c) {
    case 'I':
    case 'i':
        return Pauli::I;
    case 'X':
    case 'x':
        return Pauli::X;
    case 'Y':
    case 'y':
        return Pauli::Y;
    case 'Z':
    case 'z':
        return Pauli::Z;
    default:
        throw std::invalid_argument(std::string("invalid Pauli label '") + c + "'");
    }
}

/**
 * @brief Tensor product of single-qubit Paulis, without phase.
 *
 * Position i of the label sequence acts on qubit i. Ordering is lexicographic
 * over labels with I < X < Y < Z.
 */
class PauliString {
  public:
    PauliString() = default;
    explicit PauliString(std::size_t n_qubits) : labels_(n_qubits, Pauli::I) {}
    explicit PauliString(std::vector<Pauli> labels) : labels_(std::move(labels)) {}

    /// Parses "XIZ" style text; character i is qubit i.
    static PauliString parse(std::string_view text) {
        std::vector<Pauli> labels;
        labels.reserve(text.size());
        for (char c : text) {
            labels.push_back(pauli_from_char(c));
        }
        return PauliString(std::move(labels));
    }

    static PauliString single(std::size_t n_qubits, std::size_t qubit, Pauli p) {
        PauliString s(n_qubits);
        s.set(qubit, p);
        return s;
    }

    static PauliString pair(std::size_t n_qubits, std::size_t q0, std::size_t q1, Pauli p) {
        PauliString s(n_qubits);
        s.set(q0, p);
        s.set(q1, p);
        return s;
    }

    std::size_t size() const noexcept { return labels_.size(); }
    Pauli operator[](std::size_t qubit) const { return labels_.at(qubit); }
    void set(std::size_t qubit, Pauli p) { labels_.at(qubit) = p; }
    const std::vector<Pauli> &labels() const noexcept { return labels_; }

    bool is_identity() const noexcept {
        for (Pauli p : labels_) {
            if (p != Pauli::I) {
                return false;
            }
        }
        return true;
    }

    std::size_t weight() const noexcept {
        std::size_t w = 0;
        for (Pauli p : labels_) {
            w += (p != Pauli::I) ? 1 : 0;
        }
        return w;
    }

    std::string to_string() const {
        std::string out;
        out.reserve(labels_.size());
        for (Pauli p : labels_) {
            out.push_back(to_char(p));
        }
        return out;
    }

    /// Bits of qubits whose basis value is flipped (X or Y). Requires size() <= 64.
    std::uint64_t flip_mask() const { return mask_of(Pauli::X) | mask_of(Pauli::Y); }
    /// Bits of qubits that contribute a (-1)^b sign (Y or Z).
    std::uint64_t sign_mask() const { return mask_of(Pauli::Y) | mask_of(Pauli::Z); }
    std::size_t num_y() const noexcept {
        std::size_t k = 0;
        for (Pauli p : labels_) {
            k += (p == Pauli::Y) ? 1 : 0;
        }
        return k;
    }

    /**
     * Action on a computational basis state: P|b> = phase * |b ^ flip_mask()>.
     */
    std::pair<cplx, std::uint64_t> act_on_basis(std::uint64_t basis) const {
        static constexpr cplx i_pow[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        const std::uint64_t flip = flip_mask();
        cplx phase = i_pow[num_y() % 4];
        if (std::popcount(basis & sign_mask()) % 2 == 1) {
            phase = -phase;
        }
        return {phase, basis ^ flip};
    }

    bool commutes_with(const PauliString &other) const {
        check_same_size(other);
        std::size_t anti = 0;
        for (std::size_t q = 0; q < labels_.size(); ++q) {
            const Pauli a = labels_[q];
            const Pauli b = other.labels_[q];
            anti += (a != Pauli::I && b != Pauli::I && a != b) ? 1 : 0;
        }
        return anti % 2 == 0;
    }

    void check_same_size(const PauliString &other) const {
        if (other.size() != size()) {
            throw std::invalid_argument("Pauli string length mismatch: " + std::to_string(size()) +
                                        " vs " + std::to_string(other.size()));
        }
    }

    friend auto operator<=>(const PauliString &, const PauliString &) = default;
    friend bool operator==(const PauliString &, const PauliString &) = default;

  private:
    std::uint64_t mask_of(Pauli p) const {
        if (labels_.size() > 64) {
            throw std::length_error("bit masks need at most 64 qubits");
        }
        std::uint64_t m = 0;
        for (std::size_t q = 0; q < labels_.size(); ++q) {
            if (labels_[q] == p) {
                m |= std::uint64_t{1} << q;
            }
        }
        return m;
    }

    std::vector<Pauli> labels_;
};

struct PauliProduct {
    cplx phase;
    PauliString string;
};

/// a*b = phase * string, phase in {1, -1, i, -i}.
inline PauliProduct multiply(const PauliString &a, const PauliString &b) {
    a.check_same_size(b);
    // exponent of i, accumulated mod 4
    int ipow = 0;
    std::vector<Pauli> out(a.size(), Pauli::I);
    for (std::size_t q = 0; q < a.size(); ++q) {
        const auto x = static_cast<int>(a[q]);
        const auto y = static_cast<int>(b[q]);
        if (x == 0) {
            out[q] = b[q];
        } else if (y == 0) {
            out[q] = a[q];
        } else if (x == y) {
            out[q] = Pauli::I;
        } else {
            // X,Y,Z = 1,2,3; cyclic (x -> y) picks +i, anticyclic picks -i.
            out[q] = static_cast<Pauli>(6 - x - y);
            ipow += ((y - x + 3) % 3 == 1) ? 1 : 3;
        }
    }
    static constexpr cplx i_pow[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return {i_pow[ipow % 4], PauliString(std::move(out))};
}

struct PauliTerm {
    cplx coeff;
    PauliString string;
};

/**
 * @brief Linear combination of Pauli strings in canonical form.
 *
 * Terms are keyed by string (lexicographic order), with no duplicates and no
 * coefficients below the pruning tolerance.
 */
class PauliSum {
  public:
    static constexpr double prune_tolerance = 1e-14;

    PauliSum() = default;
    explicit PauliSum(std::size_t n_qubits) : n_qubits_(n_qubits) {}
    PauliSum(std::size_t n_qubits, std::initializer_list<PauliTerm> terms) : n_qubits_(n_qubits) {
        for (const auto &t : terms) {
            add(t.coeff, t.string);
        }
    }

    static PauliSum from_string(std::string_view text, cplx coeff = 1.0) {
        PauliSum s(text.size());
        s.add(coeff, PauliString::parse(text));
        return s;
    }

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }
    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    std::vector<PauliTerm> terms() const {
        std::vector<PauliTerm> out;
        out.reserve(terms_.size());
        for (const auto &[s, c] : terms_) {
            out.push_back({c, s});
        }
        return out;
    }

    cplx coefficient(const PauliString &s) const {
        auto it = terms_.find(s);
        return it == terms_.end() ? cplx{} : it->second;
    }

    bool contains(const PauliString &s) const { return terms_.contains(s); }

    PauliSum &add(cplx coeff, const PauliString &s) {
        if (s.size() != n_qubits_) {
            throw std::invalid_argument("term acts on " + std::to_string(s.size()) +
                                        " qubits, sum on " + std::to_string(n_qubits_));
        }
        auto [it, inserted] = terms_.try_emplace(s, coeff);
        if (!inserted) {
            it->second += coeff;
        }
        if (std::abs(it->second) < prune_tolerance) {
            terms_.erase(it);
        }
        return *this;
    }

    /// Hermitian iff every coefficient is real (within tol).
    bool is_hermitian(double tol = 1e-12) const {
        for (const auto &[s, c] : terms_) {
            if (std::abs(c.imag()) > tol) {
                return false;
            }
        }
        return true;
    }

    std::set<PauliString> strings() const {
        std::set<PauliString> out;
        for (const auto &[s, c] : terms_) {
            out.insert(s);
        }
        return out;
    }

    std::string to_string() const {
        if (terms_.empty()) {
            return "0";
        }
        std::string out;
        for (const auto &[s, c] : terms_) {
            if (!out.empty()) {
                out += " + ";
            }
            out += "(" + std::to_string(c.real()) + (c.imag() < 0 ? "" : "+") +
                   std::to_string(c.imag()) + "i)" + s.to_string();
        }
        return out;
    }

    PauliSum &operator+=(const PauliSum &o) {
        check_same_size(o);
        for (const auto &[s, c] : o.terms_) {
            add(c, s);
        }
        return *this;
    }
    PauliSum &operator-=(const PauliSum &o) {
        check_same_size(o);
        for (const auto &[s, c] : o.terms_) {
            add(-c, s);
        }
        return *this;
    }
    PauliSum &operator*=(cplx k) {
        PauliSum out(n_qubits_);
        for (const auto &[s, c] : terms_) {
            out.add(c * k, s);
        }
        *this = std::move(out);
        return *this;
    }

    friend PauliSum operator+(PauliSum a, const PauliSum &b) { return a += b; }
    friend PauliSum operator-(PauliSum a, const PauliSum &b) { return a -= b; }
    friend PauliSum operator*(PauliSum a, cplx k) { return a *= k; }
    friend PauliSum operator*(cplx k, PauliSum a) { return a *= k; }

    friend PauliSum operator*(const PauliSum &a, const PauliSum &b) {
        a.check_same_size(b);
        PauliSum out(a.n_qubits_);
        for (const auto &[sa, ca] : a.terms_) {
            for (const auto &[sb, cb] : b.terms_) {
                auto [phase, s] = multiply(sa, sb);
                out.add(phase * ca * cb, s);
            }
        }
        return out;
    }

    friend bool operator==(const PauliSum &, const PauliSum &) = default;

    void check_same_size(const PauliSum &o) const {
        if (o.n_qubits_ != n_qubits_) {
            throw std::invalid_argument("PauliSum register mismatch: " + std::to_string(n_qubits_) +
                                        " vs " + std::to_string(o.n_qubits_));
        }
    }

  private:
    std::size_t n_qubits_ = 0;
    std::map<PauliString, cplx> terms_;
};

/// [a, b] = ab - ba. Only anticommuting string pairs contribute (twice).
inline PauliSum commutator(const PauliSum &a, const PauliSum &b) {
    a.check_same_size(b);
    PauliSum out(a.n_qubits());
    for (const auto &[sa, ca] : a) {
        for (const auto &[sb, cb] : b) {
            if (sa.commutes_with(sb)) {
                continue;
            }
            auto [phase, s] = multiply(sa, sb);
            out.add(2.0 * phase * ca * cb, s);
        }
    }
    return out;
}

inline constexpr std::size_t default_dense_qubit_cap = 12;

/// Dense 2^N x 2^N matrix; basis index bit q is the state of qubit q.
inline Eigen::MatrixXcd to_matrix(const PauliSum &p, std::size_t max_qubits = default_dense_qubit_cap) {
    const std::size_t n = p.n_qubits();
    if (n > max_qubits) {
        throw std::length_error("register of " + std::to_string(n) +
                                " qubits exceeds dense cap of " + std::to_string(max_qubits));
    }
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto &[s, c] : p) {
        for (std::uint64_t col = 0; col < dim; ++col) {
            auto [phase, row] = s.act_on_basis(col);
            m(row, col) += c * phase;
        }
    }
    return m;
}

struct ClosureResult {
    std::set<PauliString> strings;
    /// Number of commutator levels actually evaluated.
    std::size_t depth_evaluated = 0;
    /// Level from which no new string can appear, if reached within max_depth.
    std::optional<std::size_t> fixed_point_depth;
    /// strings.size() after each level, starting at level 0.
    std::vector<std::size_t> size_history;
};

namespace detail {

/// Everything reachable from `seed` by repeated string-level commutation with `gens`.
inline std::set<PauliString> commutation_reach(const std::set<PauliString> &seed,
                                               const std::set<PauliString> &gens,
                                               std::size_t max_strings) {
    std::set<PauliString> seen = seed;
    std::vector<PauliString> frontier(seed.begin(), seed.end());
    while (!frontier.empty()) {
        std::vector<PauliString> next;
        for (const auto &s : frontier) {
            for (const auto &g : gens) {
                if (s.commutes_with(g)) {
                    continue;
                }
                auto prod = multiply(g, s).string;
                if (seen.insert(prod).second) {
                    next.push_back(std::move(prod));
                }
            }
        }
        if (seen.size() > max_strings) {
            break;
        }
        frontier = std::move(next);
    }
    return seen;
}

} // namespace detail

/**
 * @brief Distinct strings (phase stripped, identity included) spanned by
 * h_i, h_d and the nested commutators [h_i, h_d], [h_i, [h_i, h_d]], ...
 *
 * Level k holds the k-fold nested commutator. Evaluation stops early once the
 * collected set is closed under commutation with the strings of h_i starting
 * from the current level's support, i.e. no deeper level can add a string.
 *
 * @throws std::length_error if the set grows beyond max_strings.
 */
inline ClosureResult nested_commutator_closure(const PauliSum &h_i, const PauliSum &h_d,
                                               std::size_t max_depth,
                                               std::size_t max_strings = 1u << 16) {
    h_i.check_same_size(h_d);
    if (max_depth < 1) {
        throw std::invalid_argument("max_depth must be >= 1");
    }
    if (!h_i.is_hermitian() || !h_d.is_hermitian()) {
        throw std::invalid_argument("closure expects Hermitian generators");
    }
    ClosureResult res;
    res.strings.insert(PauliString(h_i.n_qubits()));
    for (const auto &[s, c] : h_i) {
        res.strings.insert(s);
    }
    for (const auto &[s, c] : h_d) {
        res.strings.insert(s);
    }
    res.size_history.push_back(res.strings.size());

    const auto gens = h_i.strings();
    auto is_closed = [&](const PauliSum &level) {
        for (const auto &s : detail::commutation_reach(level.strings(), gens, max_strings)) {
            if (!res.strings.contains(s)) {
                return false;
            }
        }
        return true;
    };

    PauliSum level = h_d;
    if (is_closed(level)) {
        res.fixed_point_depth = 0;
        return res;
    }
    for (std::size_t depth = 1; depth <= max_depth; ++depth) {
        level = commutator(h_i, level);
        for (const auto &[s, c] : level) {
            res.strings.insert(s);
        }
        if (res.strings.size() > max_strings) {
            throw std::length_error("nested commutator closure exceeded " +
                                    std::to_string(max_strings) + " strings");
        }
        res.depth_evaluated = depth;
        res.size_history.push_back(res.strings.size());
        if (is_closed(level)) {
            res.fixed_point_depth = depth;
            break;
        }
    }
    return res;
}

} // namespace nuqsim
