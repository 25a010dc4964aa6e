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

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dense_oracle.hpp"
#include "nuqsim/statevector.hpp"

namespace {

using namespace nuqsim;
namespace g = nuqsim::gate;

constexpr double kTight = 1e-12;

oracle::Mat unitary_of(const Gate &gt, std::size_t n) {
    Circuit c(n);
    c.add(gt);
    return circuit_unitary(c);
}

} // namespace

TEST(Gates, RotationsMatchMatrixExponentials) {
    for (double a : {0.0, 0.3, -1.7, std::numbers::pi, 5.0}) {
        const oracle::Mat rx = oracle::propagator(oracle::pauli('X'), a / 2);
        const oracle::Mat rz = oracle::propagator(oracle::pauli('Z'), a / 2);
        EXPECT_LT((unitary_of(g::RX{0, a}, 1) - rx).cwiseAbs().maxCoeff(), kTight);
        EXPECT_LT((unitary_of(g::RZ{0, a}, 1) - rz).cwiseAbs().maxCoeff(), kTight);
    }
}

TEST(Gates, CliffordsAreUnitaryWithExpectedAction) {
    const std::size_t n = 3;
    for (const Gate &gt : {Gate{g::H{1}}, Gate{g::S{2}}, Gate{g::Sdg{0}}, Gate{g::X{1}}, Gate{g::CNOT{2, 0}},
                           Gate{g::RX{1, 0.7}}, Gate{g::RZ{2, -0.4}}}) {
        const oracle::Mat u = unitary_of(gt, n);
        EXPECT_LT((u.adjoint() * u - oracle::Mat::Identity(8, 8)).cwiseAbs().maxCoeff(), kTight);
    }
    Statevector s(1);
    s.apply(g::H{0});
    EXPECT_NEAR(s[0].real(), 1 / std::sqrt(2.0), kTight);
    EXPECT_NEAR(s[1].real(), 1 / std::sqrt(2.0), kTight);

    const oracle::Mat sm = unitary_of(g::S{0}, 1);
    EXPECT_LT(std::abs(sm(1, 1) - cplx(0, 1)), kTight);
    EXPECT_LT((unitary_of(g::Sdg{0}, 1) - sm.adjoint()).cwiseAbs().maxCoeff(), kTight);
}

TEST(Gates, CnotFlipsTargetWhenControlIsSet) {
    // control qubit 0 set -> index 1; target qubit 1 flips -> index 3
    Statevector s(2, 1);
    s.apply(g::CNOT{0, 1});
    EXPECT_NEAR(std::abs(s[3]), 1.0, kTight);
    Statevector t(2, 2);
    t.apply(g::CNOT{0, 1});
    EXPECT_NEAR(std::abs(t[2]), 1.0, kTight);
}

TEST(Gates, ZzLadderIsTheTwoQubitExponential) {
    for (double a : {0.1, 1.3, -2.2}) {
        Circuit c(2);
        c.add(g::CNOT{0, 1}).add(g::RZ{1, a}).add(g::CNOT{0, 1});
        const oracle::Mat want = oracle::propagator(oracle::kron_string("ZZ"), a / 2);
        EXPECT_LT((circuit_unitary(c) - want).cwiseAbs().maxCoeff(), kTight);
    }
}

TEST(Gates, ControlledPauliMatchesBlockMatrix) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = oracle::random_pauli_string(2, rng);
        Circuit c(3);
        c.add(g::ControlledPauli{2, PauliString::parse(s)});
        oracle::Mat want = oracle::Mat::Zero(8, 8);
        want.topLeftCorner(4, 4).setIdentity();
        want.bottomRightCorner(4, 4) = oracle::kron_string(s);
        EXPECT_LT((circuit_unitary(c) - want).cwiseAbs().maxCoeff(), kTight) << s;
    }
}

TEST(Circuit, RejectsBadOperands) {
    Circuit c(2);
    EXPECT_THROW(c.add(g::H{2}), std::out_of_range);
    EXPECT_THROW(c.add(g::CNOT{1, 1}), std::invalid_argument);
    EXPECT_THROW(c.add(g::RX{0, std::numeric_limits<double>::quiet_NaN()}), std::invalid_argument);
    Statevector s(3);
    EXPECT_THROW(s.apply(c), std::invalid_argument);
}

TEST(Circuit, CountsAndDepth) {
    Circuit c(3);
    c.add(g::H{0}).add(g::H{1}).add(g::CNOT{0, 1}).add(g::RZ{2, 0.1}).add(g::CNOT{1, 2});
    EXPECT_EQ(c.count_cnot(), 2u);
    EXPECT_EQ(c.count_single_qubit(), 3u);
    EXPECT_EQ(c.depth(), 3u);
    EXPECT_EQ(Circuit(2).depth(), 0u);
}

TEST(Statevector, NormPreservedOverManyRandomGates) {
    const std::size_t n = 5;
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::size_t> q(0, n - 1);
    std::uniform_int_distribution<int> kind(0, 5);
    std::uniform_real_distribution<double> ang(-4, 4);
    Circuit c(n);
    while (c.size() < 10000) {
        const auto a = q(rng);
        auto b = q(rng);
        switch (kind(rng)) {
        case 0: c.add(g::RX{a, ang(rng)}); break;
        case 1: c.add(g::RZ{a, ang(rng)}); break;
        case 2: c.add(g::H{a}); break;
        case 3: c.add(g::S{a}); break;
        case 4: c.add(g::Sdg{a}); break;
        default:
            if (a != b) {
                c.add(g::CNOT{a, b});
            }
        }
    }
    Statevector s(n);
    s.apply(c);
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-10);
}

TEST(Statevector, MarginalsAndLabels) {
    // (|000> + |101>)/sqrt2 -> qubit 0 and 2 are 0 with prob 1/2, qubit 1 always 0
    const double r = 1 / std::sqrt(2.0);
    auto s = Statevector::from_amplitudes({r, 0, 0, 0, 0, r, 0, 0});
    EXPECT_NEAR(s.marginal_probability(0, 0), 0.5, kTight);
    EXPECT_NEAR(s.marginal_probability(1, 0), 1.0, kTight);
    EXPECT_NEAR(s.marginal_probability(2, 1), 0.5, kTight);
    EXPECT_EQ(basis_label(5, 3), "101");
    EXPECT_EQ(basis_label(1, 3), "100");
    EXPECT_THROW(s.marginal_probability(3, 0), std::out_of_range);
    EXPECT_THROW(Statevector::from_amplitudes({1, 0, 0}), std::invalid_argument);
}

TEST(Sampling, SameSeedSameCounts) {
    Statevector s(3);
    s.apply(g::H{0});
    s.apply(g::RX{2, 1.1});
    EXPECT_EQ(sample_counts(s, 1000, 42), sample_counts(s, 1000, 42));
    EXPECT_NE(sample_counts(s, 1000, 42), sample_counts(s, 1000, 43));
}

TEST(Sampling, FrequenciesWithinFiveSigma) {
    Statevector s(2);
    s.apply(g::RX{0, 1.0});
    s.apply(g::RX{1, 2.5});
    const std::size_t shots = 100000;
    const auto counts = sample_counts(s, shots, 9);
    const auto probs = s.probabilities();
    std::size_t total = 0;
    for (std::uint64_t b = 0; b < 4; ++b) {
        const auto it = counts.find(basis_label(b, 2));
        const double k = it == counts.end() ? 0.0 : static_cast<double>(it->second);
        total += static_cast<std::size_t>(k);
        const double sigma = std::sqrt(shots * probs[b] * (1 - probs[b]));
        EXPECT_LE(std::abs(k - shots * probs[b]), 5 * sigma + 1e-9);
    }
    EXPECT_EQ(total, shots);
    EXPECT_NEAR(count_marginal(counts, 0, 0), s.marginal_probability(0, 0), 0.01);
}

TEST(Sampling, RejectsUnnormalizedStates) {
    auto s = Statevector::from_amplitudes({1, 1});
    EXPECT_THROW(sample_counts(s, 10, 1), std::domain_error);
    EXPECT_THROW(sample_counts(Statevector(1), 0, 1), std::invalid_argument);
}

TEST(Sampling, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(12345, 7), derive_seed(12345, 7));
}

TEST(HadamardTest, ExactModeRecoversExpectationValues) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ang(-3, 3);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 3;
        Circuit prep(n);
        for (int k = 0; k < 12; ++k) {
            const std::size_t q = static_cast<std::size_t>(k) % n;
            prep.add(g::RX{q, ang(rng)}).add(g::RZ{q, ang(rng)});
            if (k % 3 == 2) {
                prep.add(g::CNOT{q, (q + 1) % n});
            }
        }
        const auto u = oracle::random_pauli_string(n, rng);
        const oracle::Vec psi = circuit_unitary(prep).col(0);
        const cplx want = psi.adjoint() * oracle::kron_string(u) * psi;
        const auto pu = PauliString::parse(u);
        EXPECT_NEAR(hadamard_test(prep, pu, Part::real), want.real(), 1e-10) << u;
        EXPECT_NEAR(hadamard_test(prep, pu, Part::imag), want.imag(), 1e-10) << u;
    }
}

TEST(HadamardTest, ImaginaryPartOfNonHermitianOverlap) {
    // <+|Y|+> = 0 but <psi|Y|psi> for psi = RX(a)|0> is -sin(a)
    const double a = 0.8;
    Circuit prep(1);
    prep.add(g::RX{0, a});
    EXPECT_NEAR(hadamard_test(prep, PauliString::parse("Y"), Part::real), -std::sin(a), 1e-12);
    EXPECT_NEAR(hadamard_test(prep, PauliString::parse("Z"), Part::real), std::cos(a), 1e-12);
    EXPECT_NEAR(hadamard_test(prep, PauliString::parse("Z"), Part::imag), 0.0, 1e-12);
}

TEST(HadamardTest, SampledEstimatesConverge) {
    Circuit prep(2);
    prep.add(g::RX{0, 0.9}).add(g::CNOT{0, 1}).add(g::RZ{1, 0.4});
    const auto u = PauliString::parse("YX");
    const double exact = hadamard_test(prep, u, Part::real);
    const std::size_t shots = 4096;
    const double sigma = std::sqrt((1 - exact * exact) / shots);
    int inside = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const double est = hadamard_test(prep, u, Part::real, HadamardShots::sampled(shots, derive_seed(99, t)));
        inside += std::abs(est - exact) <= 2 * sigma ? 1 : 0;
    }
    // two-sigma coverage is about 95 percent; 90 leaves room for the seed draw
    EXPECT_GE(inside, static_cast<int>(0.90 * trials));
}

TEST(HadamardTest, CountsInvocations) {
    Circuit prep(1);
    const auto before = hadamard_test_invocations().load();
    hadamard_test(prep, PauliString::parse("Z"), Part::real);
    hadamard_test(prep, PauliString::parse("Z"), Part::imag);
    EXPECT_EQ(hadamard_test_invocations().load() - before, 2u);
    EXPECT_THROW(hadamard_test(prep, PauliString::parse("ZZ"), Part::real), std::invalid_argument);
}
