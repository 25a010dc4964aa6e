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
 * Quantum-assisted simulation. The state is expanded as
 * |phi(t)> = sum_i alpha_i(t) P_i |psi0> over Pauli-string generators P_i.
 * The overlap matrices
 *
 *   E_ij   = <psi0| P_i P_j |psi0>
 *   DI_ij  = <psi0| P_i h_i P_j |psi0>
 *   DD_ij  = <psi0| P_i h_d P_j |psi0>
 *
 * are estimated once (Hadamard tests or exact expectation values) and
 * E d(alpha)/dt = -i (DI + mu(t) DD) alpha is then integrated classically.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "nuqsim/model.hpp"
#include "nuqsim/pauli.hpp"
#include "nuqsim/statevector.hpp"

namespace nuqsim {

struct QasBasis {
    std::vector<PauliString> generators;
    /// states[i] = generators[i] |psi0>; states[0] is psi0 itself.
    std::vector<Statevector> states;
    Statevector psi0;
    /// Circuit preparing psi0 from |0...0>, used by the Hadamard-test backend.
    Circuit preparation;
    std::size_t moment_order = 1;

    std::size_t size() const noexcept { return generators.size(); }
};

struct BasisOptions {
    std::size_t closure_depth = 8;
    std::size_t max_basis = 512;
};

namespace detail {

/// Basis index if s is a computational basis state (up to phase).
inline std::optional<std::uint64_t> basis_index_of(const Statevector &s) {
    std::optional<std::uint64_t> found;
    for (std::uint64_t b = 0; b < s.dim(); ++b) {
        if (std::abs(s[b]) > 1e-12) {
            if (found) {
                return std::nullopt;
            }
            found = b;
        }
    }
    return found;
}

} // namespace detail

/**
 * @brief Cumulative K-moment basis from the nested-commutator operator set.
 *
 * The operator set is the closure of h_i and h_d (identity included).
 * Moment k holds products of k operators, phase stripped. With `reduce`,
 * generators whose states agree up to a phase are merged, keeping the
 * lexicographically smallest string; for a computational-basis psi0 the
 * reduced basis is ordered by the resulting basis index.
 */
inline QasBasis build_basis(const HamiltonianSplit &model, const Statevector &psi0, const Circuit &prep,
                            std::size_t moment_order, bool reduce, const BasisOptions &opt = {}) {
    if (moment_order < 1) {
        throw std::invalid_argument("moment order K must be >= 1");
    }
    const std::size_t n = model.n_qubits();
    if (psi0.n_qubits() != n || prep.n_qubits() != n) {
        throw std::invalid_argument("reference state width does not match the model");
    }
    psi0.require_normalized();

    const auto ops = nested_commutator_closure(model.h_i, model.h_d, opt.closure_depth).strings;
    std::set<PauliString> moments{PauliString(n)};
    std::set<PauliString> frontier = moments;
    for (std::size_t k = 1; k <= moment_order; ++k) {
        std::set<PauliString> next;
        for (const auto &m : frontier) {
            for (const auto &p : ops) {
                auto prod = multiply(p, m).string;
                if (!moments.contains(prod)) {
                    next.insert(prod);
                }
            }
        }
        moments.insert(next.begin(), next.end());
        if (!reduce && moments.size() > opt.max_basis) {
            throw std::length_error("QAS basis exceeds cap of " + std::to_string(opt.max_basis));
        }
        frontier = std::move(next);
    }

    QasBasis out{{}, {}, psi0, prep, moment_order};
    auto state_of = [&](const PauliString &p) {
        Statevector s = psi0;
        s.apply_pauli(p);
        return s;
    };
    if (!reduce) {
        for (const auto &p : moments) {
            out.generators.push_back(p);
            out.states.push_back(state_of(p));
        }
        return out;
    }

    // std::set iteration is lexicographic, so the first string kept per state is the smallest.
    std::vector<std::pair<PauliString, Statevector>> kept;
    for (const auto &p : moments) {
        Statevector s = state_of(p);
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const auto &k) {
            return std::abs(std::abs(k.second.inner(s)) - 1.0) < 1e-12;
        });
        if (!duplicate) {
            kept.emplace_back(p, std::move(s));
        }
    }
    const bool computational = std::all_of(kept.begin(), kept.end(), [](const auto &k) {
        return detail::basis_index_of(k.second).has_value();
    });
    if (computational) {
        std::stable_sort(kept.begin(), kept.end(), [](const auto &a, const auto &b) {
            return *detail::basis_index_of(a.second) < *detail::basis_index_of(b.second);
        });
    }
    if (kept.size() > opt.max_basis) {
        throw std::length_error("QAS basis exceeds cap of " + std::to_string(opt.max_basis));
    }
    for (auto &[p, s] : kept) {
        out.generators.push_back(std::move(p));
        out.states.push_back(std::move(s));
    }
    return out;
}

/// How <psi0|Q|psi0> is obtained for each Pauli string Q.
struct OverlapBackend {
    enum class Kind { exact, hadamard };

    Kind kind = Kind::exact;
    /// Shots per Hadamard circuit; nullopt runs the Hadamard test analytically.
    std::optional<std::size_t> shots;
    std::uint64_t seed = 0;

    static OverlapBackend exact() { return {}; }
    static OverlapBackend hadamard(std::optional<std::size_t> shots, std::uint64_t seed) {
        return {Kind::hadamard, shots, seed};
    }
};

struct OverlapMatrices {
    Eigen::MatrixXcd E;
    Eigen::MatrixXcd D_I;
    Eigen::MatrixXcd D_D;
    /// max over E, D_I, D_D of max|A - A^dagger|.
    double hermiticity_error = 0.0;
    /// Distinct expectation values <psi0|Q|psi0> that were measured.
    std::size_t distinct_expectations = 0;
    /// Hadamard circuits executed while estimating these matrices.
    std::size_t hadamard_tests = 0;
    /// qubit -> matrix of <psi_i| (I + Z_qubit)/2 |psi_j>, the nu_e projector.
    std::map<std::size_t, Eigen::MatrixXcd> survival;

    Eigen::MatrixXcd D(double mu) const { return D_I + mu * D_D; }
};

inline double max_antihermitian(const Eigen::MatrixXcd &a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/**
 * Fills E, D_I and D_D. Every matrix element reduces to phase * <psi0|Q|psi0>
 * for one Pauli string Q; each distinct Q is measured once (real and
 * imaginary Hadamard tests) and reused.
 *
 * @throws std::runtime_error when the exact backend yields non-Hermitian matrices.
 */
inline OverlapMatrices estimate_overlaps(const QasBasis &basis, const HamiltonianSplit &model,
                                         const OverlapBackend &backend,
                                         const std::vector<std::size_t> &tracked_qubits = {0}) {
    const std::size_t m = basis.size();
    if (m == 0) {
        throw std::invalid_argument("empty QAS basis");
    }
    const auto tests_before = hadamard_test_invocations().load();
    std::map<PauliString, cplx> cache;
    auto expectation = [&](const PauliString &q) -> cplx {
        if (auto it = cache.find(q); it != cache.end()) {
            return it->second;
        }
        cplx value;
        if (backend.kind == OverlapBackend::Kind::exact) {
            Statevector s = basis.psi0;
            s.apply_pauli(q);
            value = basis.psi0.inner(s);
        } else {
            const auto stream = 2 * static_cast<std::uint64_t>(cache.size());
            const auto mode = [&](std::uint64_t k) {
                return backend.shots ? HadamardShots::sampled(*backend.shots, derive_seed(backend.seed, k))
                                     : HadamardShots::exact();
            };
            value = {hadamard_test(basis.preparation, q, Part::real, mode(stream)),
                     hadamard_test(basis.preparation, q, Part::imag, mode(stream + 1))};
        }
        cache.emplace(q, value);
        return value;
    };
    auto sandwich = [&](const PauliString &a, const PauliString &mid, const PauliString &b) {
        auto left = multiply(a, mid);
        auto full = multiply(left.string, b);
        return left.phase * full.phase * expectation(full.string);
    };

    OverlapMatrices out;
    out.E = Eigen::MatrixXcd::Zero(m, m);
    out.D_I = Eigen::MatrixXcd::Zero(m, m);
    out.D_D = Eigen::MatrixXcd::Zero(m, m);
    const PauliString identity(model.n_qubits());
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const auto &pi = basis.generators[i];
            const auto &pj = basis.generators[j];
            out.E(i, j) = sandwich(pi, identity, pj);
            for (const auto &[u, beta] : model.h_i) {
                out.D_I(i, j) += beta * sandwich(pi, u, pj);
            }
            for (const auto &[v, gamma] : model.h_d) {
                out.D_D(i, j) += gamma * sandwich(pi, v, pj);
            }
        }
    }
    for (std::size_t q : tracked_qubits) {
        if (q >= model.n_qubits()) {
            throw std::out_of_range("tracked qubit outside register");
        }
        const auto z = PauliString::single(model.n_qubits(), q, Pauli::Z);
        Eigen::MatrixXcd proj(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                proj(i, j) = 0.5 * (out.E(i, j) + sandwich(basis.generators[i], z, basis.generators[j]));
            }
        }
        out.survival.emplace(q, std::move(proj));
    }
    out.hermiticity_error =
        std::max({max_antihermitian(out.E), max_antihermitian(out.D_I), max_antihermitian(out.D_D)});
    out.distinct_expectations = cache.size();
    out.hadamard_tests = static_cast<std::size_t>(hadamard_test_invocations().load() - tests_before);
    if (backend.kind == OverlapBackend::Kind::exact && out.hermiticity_error > 1e-10) {
        throw std::runtime_error("exact overlap matrices are not Hermitian (deviation " +
                                 std::to_string(out.hermiticity_error) + ")");
    }
    return out;
}

struct AlphaIntegrator {
    enum class Method { rk4, euler };

    Method method = Method::rk4;
    /// Classical step; unset means report_dt / 20.
    std::optional<double> dt_classical;
    /// Rescale alpha so that alpha^dagger E alpha = 1 after every classical step.
    bool renormalize = true;
    /// Singular values of E below rcond * sigma_max are treated as zero.
    double rcond = 1e-10;
};

struct AlphaTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXcd> alphas;
    /// Largest |alpha^dagger E alpha - 1| before any renormalization.
    double max_norm_drift = 0.0;
    std::size_t renormalizations = 0;
    /// Numerical rank of E used by the pseudo-inverse.
    std::size_t effective_rank = 0;
};

inline double ansatz_norm(const Eigen::MatrixXcd &E, const Eigen::VectorXcd &alpha) {
    return (alpha.adjoint() * E * alpha)(0, 0).real();
}

/**
 * Integrates E d(alpha)/dt = -i (D_I + mu(t) D_D) alpha on the reporting grid,
 * using the SVD pseudo-inverse of E. RK4 samples mu at t, t + h/2, t + h.
 */
inline AlphaTrajectory propagate_alpha(const OverlapMatrices &overlaps, const CouplingSchedule &mu,
                                       const Eigen::VectorXcd &alpha0, double t_start, double t_end,
                                       double report_dt, const AlphaIntegrator &cfg = {}) {
    const auto m = overlaps.E.rows();
    if (alpha0.size() != m) {
        throw std::invalid_argument("alpha0 has the wrong dimension");
    }
    if (std::abs(ansatz_norm(overlaps.E, alpha0) - 1.0) > 1e-8) {
        throw std::invalid_argument("alpha0 must satisfy alpha^dagger E alpha = 1");
    }
    const double dt_classical = cfg.dt_classical.value_or(report_dt / 20.0);
    if (!(dt_classical > 0)) {
        throw std::invalid_argument("dt_classical must be positive");
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(overlaps.E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto &sv = svd.singularValues();
    const double cutoff = cfg.rcond * (sv.size() > 0 ? sv(0) : 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    std::size_t rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > cutoff) {
            inv(k) = 1.0 / sv(k);
            ++rank;
        }
    }
    if (rank == 0) {
        throw std::runtime_error("overlap matrix E is numerically zero");
    }
    const Eigen::MatrixXcd e_pinv = svd.matrixV() * inv.cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
    const Eigen::MatrixXcd a_i = cplx(0, -1) * (e_pinv * overlaps.D_I);
    const Eigen::MatrixXcd a_d = cplx(0, -1) * (e_pinv * overlaps.D_D);
    auto rhs = [&](double t, const Eigen::VectorXcd &a) -> Eigen::VectorXcd {
        return a_i * a + mu(t) * (a_d * a);
    };

    AlphaTrajectory out;
    out.effective_rank = rank;
    out.times = time_grid(t_start, t_end, report_dt);
    out.alphas.reserve(out.times.size());
    out.alphas.push_back(alpha0);

    Eigen::VectorXcd alpha = alpha0;
    for (std::size_t k = 1; k < out.times.size(); ++k) {
        const double interval = out.times[k] - out.times[k - 1];
        const auto steps = static_cast<std::size_t>(std::ceil(interval / dt_classical - 1e-9));
        const double h = interval / static_cast<double>(steps);
        for (std::size_t s = 0; s < steps; ++s) {
            const double t = out.times[k - 1] + static_cast<double>(s) * h;
            if (cfg.method == AlphaIntegrator::Method::rk4) {
                const Eigen::VectorXcd k1 = rhs(t, alpha);
                const Eigen::VectorXcd k2 = rhs(t + h / 2, alpha + (h / 2) * k1);
                const Eigen::VectorXcd k3 = rhs(t + h / 2, alpha + (h / 2) * k2);
                const Eigen::VectorXcd k4 = rhs(t + h, alpha + h * k3);
                alpha += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
            } else {
                alpha += h * rhs(t, alpha);
            }
            if (!alpha.allFinite()) {
                throw std::runtime_error("alpha became non-finite at t = " + std::to_string(t + h));
            }
            const double norm = ansatz_norm(overlaps.E, alpha);
            out.max_norm_drift = std::max(out.max_norm_drift, std::abs(norm - 1.0));
            if (cfg.renormalize && norm > 0) {
                alpha /= std::sqrt(norm);
                ++out.renormalizations;
            }
        }
        out.alphas.push_back(alpha);
    }
    return out;
}

/// |phi> = sum_i alpha_i |psi_i>.
inline Statevector reconstruct_state(const QasBasis &basis, const Eigen::VectorXcd &alpha) {
    if (static_cast<std::size_t>(alpha.size()) != basis.size()) {
        throw std::invalid_argument("alpha has the wrong dimension");
    }
    std::vector<cplx> amps(basis.psi0.dim(), cplx{});
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto src = basis.states[i].amplitudes();
        for (std::size_t b = 0; b < amps.size(); ++b) {
            amps[b] += alpha(static_cast<Eigen::Index>(i)) * src[b];
        }
    }
    return Statevector::from_amplitudes(std::move(amps));
}

inline double survival_from_alpha(const QasBasis &basis, const Eigen::VectorXcd &alpha, std::size_t qubit,
                                  int outcome = 0, double norm_tolerance = 1e-6) {
    const Statevector phi = reconstruct_state(basis, alpha);
    if (std::abs(phi.norm_squared() - 1.0) > norm_tolerance) {
        throw std::domain_error("ansatz state norm " + std::to_string(phi.norm_squared()) +
                                " violates tolerance");
    }
    return phi.marginal_probability(qubit, outcome);
}

/**
 * Survival probability alpha^dagger O alpha / alpha^dagger E alpha from the
 * estimated matrices alone, so sampled runs need no further circuits.
 */
inline double survival_from_overlaps(const OverlapMatrices &overlaps, const Eigen::VectorXcd &alpha,
                                     std::size_t qubit) {
    auto it = overlaps.survival.find(qubit);
    if (it == overlaps.survival.end()) {
        throw std::out_of_range("qubit " + std::to_string(qubit) + " was not tracked during estimation");
    }
    const double num = (alpha.adjoint() * it->second * alpha)(0, 0).real();
    const double den = ansatz_norm(overlaps.E, alpha);
    if (!(den > 0)) {
        throw std::domain_error("ansatz norm is not positive");
    }
    return std::clamp(num / den, 0.0, 1.0);
}

/// alpha0 selecting psi0, i.e. (1, 0, ..., 0).
inline Eigen::VectorXcd reference_alpha(const QasBasis &basis) {
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
    a(0) = 1.0;
    return a;
}

/**
 * @brief One QAS run: overlaps are estimated once, in the constructor, and
 * every later call only integrates the classical equation of motion.
 */
class QasSimulator {
  public:
    QasSimulator(QasBasis basis, const HamiltonianSplit &model, const OverlapBackend &backend,
                 const std::vector<std::size_t> &tracked_qubits = {0})
        : basis_(std::move(basis)), overlaps_(estimate_overlaps(basis_, model, backend, tracked_qubits)) {
        if (!basis_.generators.front().is_identity()) {
            throw std::invalid_argument("first QAS generator must be the identity");
        }
    }

    const QasBasis &basis() const noexcept { return basis_; }
    const OverlapMatrices &overlaps() const noexcept { return overlaps_; }

    AlphaTrajectory propagate(const CouplingSchedule &mu, double t_start, double t_end, double report_dt,
                              const AlphaIntegrator &cfg = {}) const {
        Eigen::VectorXcd alpha0 = reference_alpha(basis_);
        // Sampled E may put E_00 slightly off 1.
        const double n0 = ansatz_norm(overlaps_.E, alpha0);
        if (n0 > 0) {
            alpha0 /= std::sqrt(n0);
        }
        return propagate_alpha(overlaps_, mu, alpha0, t_start, t_end, report_dt, cfg);
    }

  private:
    QasBasis basis_;
    OverlapMatrices overlaps_;
};

} // namespace nuqsim
