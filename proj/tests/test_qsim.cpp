// Copyright 2026 The QRC Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "qrc/error.hpp"
#include "qrc/qsim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace {

using namespace qrc;
using namespace qrc::qsim;

constexpr double kPi = std::numbers::pi;

Circuit random_circuit(std::mt19937_64 &rng, int n, int gates) {
    std::uniform_int_distribution<int> q(0, n - 1);
    std::uniform_real_distribution<double> a(-4 * kPi, 4 * kPi);
    std::bernoulli_distribution is_cnot(n > 1 ? 0.4 : 0.0);
    Circuit c{n, {}};
    for (int g = 0; g < gates; ++g) {
        if (is_cnot(rng)) {
            const int ctl = q(rng);
            int tgt = q(rng);
            while (tgt == ctl) {
                tgt = q(rng);
            }
            c.add(Gate::cnot(ctl, tgt));
        } else {
            c.add(Gate::ry(q(rng), a(rng)));
        }
    }
    return c;
}

double max_diff(const PureState &a, const PureState &b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.dim(); ++k) {
        d = std::max(d, std::abs(a.amps[k] - b.amps[k]));
    }
    return d;
}

double max_diff(const ProbVector &a, const ProbVector &b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        d = std::max(d, std::abs(a[k] - b[k]));
    }
    return d;
}

TEST(ApplyRy, BasicRotations) {
    auto s = PureState::zero(1);
    apply_ry(s, 0, 0.0);
    EXPECT_EQ(s.amps[0], Complex(1.0, 0.0));

    s = PureState::zero(1);
    apply_ry(s, 0, kPi);
    EXPECT_NEAR(std::abs(s.amps[0]), 0.0, 1e-15);
    EXPECT_NEAR(s.amps[1].real(), 1.0, 1e-15);

    s = PureState::zero(1);
    apply_ry(s, 0, kPi / 2);
    const auto p = exact_probabilities(s);
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.5, 1e-15);

    EXPECT_THROW(apply_ry(s, 1, 0.1), ContractViolation);
}

TEST(ApplyRy, FourPiPeriodic) {
    auto a = PureState::zero(2);
    auto b = a;
    apply_ry(a, 1, 0.7);
    apply_ry(b, 1, 0.7 + 4 * kPi);
    EXPECT_LT(max_diff(a, b), 1e-14);
}

TEST(ApplyCnot, TruthTableBigEndian) {
    auto s = PureState::basis(2, 0b10);
    apply_cnot(s, 0, 1);
    EXPECT_EQ(s.amps[0b11], Complex(1.0, 0.0));

    s = PureState::basis(2, 0b00);
    apply_cnot(s, 0, 1);
    EXPECT_EQ(s.amps[0b00], Complex(1.0, 0.0));

    s = PureState::basis(3, 0b001);
    apply_cnot(s, 2, 0);
    EXPECT_EQ(s.amps[0b101], Complex(1.0, 0.0));

    EXPECT_THROW(apply_cnot(s, 1, 1), ContractViolation);
    EXPECT_THROW(apply_cnot(s, 0, 3), ContractViolation);
}

TEST(ApplyCnot, InvolutionOnRandomStates) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
        const int n = 2 + t % 5;
        auto s = run_circuit(random_circuit(rng, n, 40));
        const auto before = s;
        std::uniform_int_distribution<int> q(0, n - 1);
        const int c = q(rng);
        const int tg = (c + 1 + q(rng) % (n - 1)) % n;
        apply_cnot(s, c, tg);
        apply_cnot(s, c, tg);
        EXPECT_LT(max_diff(s, before), 1e-15);
    }
}

TEST(ApplyRy, AdditivityOnRandomStates) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> a(-10.0, 10.0);
    for (int t = 0; t < 50; ++t) {
        const int n = 1 + t % 6;
        const auto base = run_circuit(random_circuit(rng, n, 30));
        const int q = t % n;
        const double t1 = a(rng), t2 = a(rng);
        auto s1 = base;
        apply_ry(s1, q, t1);
        apply_ry(s1, q, t2);
        auto s2 = base;
        apply_ry(s2, q, t1 + t2);
        EXPECT_LT(max_diff(s1, s2), 1e-12);
    }
}

TEST(RunCircuit, UnitarityOverRandomCircuits) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 1000; ++t) {
        const int n = 1 + t % 8;
        const auto s = run_circuit(random_circuit(rng, n, 200));
        EXPECT_LT(std::abs(s.norm_sq() - 1.0), 1e-10);
    }
}

TEST(RunCircuit, EmptyCircuitIsZeroState) {
    const auto s = run_circuit(Circuit{3, {}});
    EXPECT_EQ(s.amps[0], Complex(1.0, 0.0));
    for (std::size_t k = 1; k < s.dim(); ++k) {
        EXPECT_EQ(s.amps[k], Complex(0.0, 0.0));
    }
}

TEST(Pauli, Definitions) {
    auto s = PureState::zero(1);
    apply_x(s, 0);
    EXPECT_EQ(s.amps[1], Complex(1.0, 0.0));
    apply_y(s, 0);  // Y|1> = -i|0>
    EXPECT_NEAR(std::abs(s.amps[0] - Complex(0.0, -1.0)), 0.0, 1e-15);
    apply_z(s, 0);
    EXPECT_NEAR(std::abs(s.amps[0] - Complex(0.0, -1.0)), 0.0, 1e-15);
}

TEST(BuildBlock, TwoQubitLayouts) {
    const std::vector<double> one = {0.3};
    auto f = build_block(2, one);
    EXPECT_EQ(f.gates, (std::vector<Gate>{Gate::ry(0, 0.3), Gate::cnot(0, 1)}));
    EXPECT_EQ(f.end_cursor, 1);

    const std::vector<double> two = {0.3, 0.4};
    f = build_block(2, two);
    EXPECT_EQ(f.gates, (std::vector<Gate>{Gate::ry(0, 0.3), Gate::cnot(0, 1), Gate::ry(1, 0.4), Gate::cnot(1, 0)}));
    EXPECT_EQ(f.end_cursor, 0);
}

TEST(BuildBlock, CountsCursorAndSingleQubit) {
    const std::vector<double> three = {0.1, 0.2, 0.3};
    const auto f = build_block(3, three, 2);
    EXPECT_EQ(f.gates.size(), 6U);
    EXPECT_EQ(f.gates[0], Gate::ry(2, 0.1));
    EXPECT_EQ(f.gates[1], Gate::cnot(2, 1));
    EXPECT_EQ(f.gates[2], Gate::ry(0, 0.2));
    EXPECT_EQ(f.end_cursor, 2);

    const auto single = build_block(1, three);
    EXPECT_EQ(single.gates.size(), 3U);
    for (const auto &g : single.gates) {
        EXPECT_EQ(g.kind, GateKind::RY);
    }
    EXPECT_TRUE(build_block(4, std::span<const double>{}).gates.empty());
}

TEST(ReservoirCircuit, GateCountAndZeroAngles) {
    for (int n = 2; n <= 5; ++n) {
        const std::vector<double> p(std::size_t{1} << n, 0.0), x = {0.0, 0.0, 0.0}, beta(n, 0.0);
        const auto c = build_reservoir_circuit(n, p, x, beta);
        EXPECT_EQ(c.gates.size(), static_cast<std::size_t>(2 * ((1 << n) + 3 + n)));
        const auto probs = exact_probabilities(run_circuit(c));
        EXPECT_NEAR(probs[0], 1.0, 1e-15);
    }
    const std::vector<double> p(4, 0.25), x = {0.5}, beta(3, 0.0);
    EXPECT_THROW(build_reservoir_circuit(2, p, x, beta), ConfigError);
}

TEST(ReservoirCircuit, NineQubitLorenzLoad) {
    std::vector<double> p(512, 1.0 / 512.0), x = {0.2, 0.5, 0.9}, beta(9, 1.0);
    const auto c = build_reservoir_circuit(9, p, x, beta);
    EXPECT_EQ(c.count(GateKind::RY), 512U + 3U + 9U);
}

TEST(ReducedCircuit, SevenQubitLayout) {
    const std::vector<double> p(14, 0.01), x = {0.3, 0.6};
    const auto c = build_reduced_circuit(7, p, x);
    EXPECT_EQ(c.count(GateKind::RY), 16U);
    EXPECT_EQ(c.count(GateKind::CNOT), 16U);
    EXPECT_EQ(c, build_reduced_circuit(7, p, x));
    EXPECT_TRUE(build_reduced_circuit(7, {}, {}).gates.empty());
}

TEST(CircuitText, RoundTrip) {
    std::mt19937_64 rng(4);
    const auto c = random_circuit(rng, 5, 60);
    std::ostringstream os;
    write_circuit(os, c);
    std::istringstream is(os.str());
    EXPECT_EQ(read_circuit(is), c);

    std::istringstream bad("QUBITS 2\nRY 0 0.5\nCNOT 1 1\n");
    EXPECT_THROW(read_circuit(bad, "c.txt"), Error);
}

TEST(ExactProbabilities, Basics) {
    EXPECT_EQ(exact_probabilities(PureState::zero(3))[0], 1.0);
    auto s = PureState::zero(2);
    apply_ry(s, 0, kPi / 2);
    apply_ry(s, 1, kPi / 2);
    for (double v : exact_probabilities(s)) {
        EXPECT_NEAR(v, 0.25, 1e-15);
    }
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
        const auto p = exact_probabilities(run_circuit(random_circuit(rng, 4, 30)));
        double sum = 0.0;
        for (double v : p) {
            sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-10);
    }
}

TEST(SampleShots, BasisStateIsDeterministic) {
    const auto p = sample_shots(PureState::basis(3, 5), 17, 99);
    EXPECT_EQ(p[5], 1.0);
    EXPECT_THROW(sample_shots(PureState::zero(1), 0, 1), ConfigError);
}

TEST(SampleShots, BinomialToleranceAndReproducibility) {
    auto s = PureState::zero(1);
    apply_ry(s, 0, kPi / 2);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = sample_shots(s, 2048, seed);
        EXPECT_LT(std::abs(p[0] - 0.5), 0.05);
        EXPECT_EQ(p, sample_shots(s, 2048, seed));
    }
}

TEST(SampleShots, ErrorScalesAsInverseSqrtShots) {
    std::mt19937_64 rng(6);
    const auto s = run_circuit(random_circuit(rng, 3, 20));
    const auto exact = exact_probabilities(s);
    double e1 = 0.0, e4 = 0.0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        e1 += max_diff(sample_shots(s, 1024, 1000 + t), exact);
        e4 += max_diff(sample_shots(s, 4096, 5000 + t), exact);
    }
    const double ratio = e1 / e4;
    EXPECT_GT(ratio, 1.6);
    EXPECT_LT(ratio, 2.5);
}

TEST(NoisyRun, NoiselessEqualsSampling) {
    std::mt19937_64 rng(7);
    const auto c = random_circuit(rng, 4, 25);
    EXPECT_EQ(noisy_run(c, NoiseConfig{}, 4096, 3), sample_shots(run_circuit(c), 4096, 3));
}

TEST(NoisyRun, FairBitFlip) {
    NoiseConfig noise;
    noise.p_meas = 0.5;
    const std::uint64_t shots = 1 << 16;
    const auto p = noisy_run(Circuit{1, {}}, noise, shots, 8);
    const double tol = 3.0 / (2.0 * std::sqrt(static_cast<double>(shots)));
    EXPECT_NEAR(p[0], 0.5, tol);
    EXPECT_NEAR(p[1], 0.5, tol);
}

TEST(NoisyRun, GateErrorsChangeStatistics) {
    NoiseConfig noise;
    noise.p_gate = 1.0;
    Circuit c{1, {}};
    c.add(Gate::ry(0, 0.0));
    const auto p = noisy_run(c, noise, 1 << 14, 9);
    // X and Y flip |0>, Z does not.
    EXPECT_NEAR(p[1], 2.0 / 3.0, 0.05);
}

TEST(NoisyRun, ValidatesProbabilities) {
    NoiseConfig noise;
    noise.p_gate = 1.5;
    EXPECT_THROW(noisy_run(Circuit{1, {}}, noise, 10, 1), ConfigError);
}

TEST(ReadoutNoise, ExactChannels) {
    std::vector<double> p = {0.0, 0.0, 0.0, 1.0};
    apply_readout_noise(p, 2, 1.0, 0.0);
    EXPECT_NEAR(p[0], 1.0, 1e-15);

    p = {0.0, 0.0, 0.0, 1.0};
    apply_readout_noise(p, 2, 0.0, 1.0);
    EXPECT_NEAR(p[0], 1.0, 1e-15);

    // One qubit in |1>, reset with probability r then flip with probability m.
    p = {0.0, 1.0};
    apply_readout_noise(p, 1, 0.2, 0.1);
    const double p1 = (1.0 - 0.2) * (1.0 - 0.1) + 0.2 * 0.1;
    EXPECT_NEAR(p[1], p1, 1e-15);
    EXPECT_NEAR(p[0], 1.0 - p1, 1e-15);
}

TEST(BlockPartition, Shapes) {
    const auto a = BlockPartition::make(4, 3);
    ASSERT_EQ(a.blocks.size(), 2U);
    EXPECT_EQ(a.blocks[0], (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(a.blocks[1], (std::vector<int>{3}));
    EXPECT_EQ(a.block_of(3), 1);

    const auto b = BlockPartition::make(8, 3);
    EXPECT_EQ(b.blocks.size(), 3U);
    EXPECT_EQ(b.blocks[2], (std::vector<int>{6, 7}));

    EXPECT_EQ(BlockPartition::make(6, 2).blocks.size(), 3U);
    EXPECT_THROW(BlockPartition::make(4, 0), ConfigError);
    EXPECT_THROW(BlockPartition::make(4, 5), ConfigError);
}

// Block-by-block simulation written independently of the library's blocked
// constructor: walk the global cursor, and for values landing in `block`
// apply RY then the in-block CNOT on a register of that block's size.
ProbVector simulate_block(int n, const std::vector<int> &block, const std::vector<double> &angles) {
    const int size = static_cast<int>(block.size());
    auto s = PureState::zero(size);
    for (std::size_t k = 0; k < angles.size(); ++k) {
        const int q = static_cast<int>(k % static_cast<std::size_t>(n));
        const auto it = std::find(block.begin(), block.end(), q);
        if (it == block.end()) {
            continue;
        }
        const int local = static_cast<int>(it - block.begin());
        apply_ry(s, local, angles[k]);
        if (size > 1) {
            apply_cnot(s, local, local == size - 1 ? local - 1 : local + 1);
        }
    }
    return exact_probabilities(s);
}

ProbVector outer(const ProbVector &a, const ProbVector &b) {
    ProbVector out;
    out.reserve(a.size() * b.size());
    for (double x : a) {
        for (double y : b) {
            out.push_back(x * y);
        }
    }
    return out;
}

TEST(BlockedCircuit, MatchesIndependentBlockOracle) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> a(0.0, 4 * kPi);
    for (int n = 1; n <= 6; ++n) {
        for (int p = 1; p <= n; ++p) {
            for (int trial = 0; trial < 5; ++trial) {
                std::vector<double> angles(static_cast<std::size_t>(3 * n + trial));
                for (auto &v : angles) {
                    v = a(rng);
                }
                const auto part = BlockPartition::make(n, p);
                ProbVector want = {1.0};
                for (const auto &b : part.blocks) {
                    want = outer(want, simulate_block(n, b, angles));
                }
                const auto got = run_blocked_circuit(part, angles);
                EXPECT_LT(max_diff(got, want), 1e-12) << "n=" << n << " p=" << p;
                const auto full = exact_probabilities(run_circuit(build_blocked_circuit(part, angles)));
                EXPECT_LT(max_diff(full, want), 1e-12) << "n=" << n << " p=" << p;
            }
        }
    }
}

TEST(BlockedCircuit, FullBlockEqualsReducedCircuit) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 2; n <= 7; ++n) {
        std::vector<double> sel(14), x(2);
        for (auto &v : sel) {
            v = u(rng) / 10.0;
        }
        for (auto &v : x) {
            v = u(rng);
        }
        std::vector<double> angles;
        for (double v : sel) {
            angles.push_back(4 * kPi * v);
        }
        for (double v : x) {
            angles.push_back(4 * kPi * v);
        }
        const auto want = exact_probabilities(run_circuit(build_reduced_circuit(n, sel, x)));
        EXPECT_LT(max_diff(run_blocked_circuit(BlockPartition::make(n, n), angles), want), 1e-12);
    }
}

TEST(BlockedCircuit, SeparableQubitsAreProductOfRotations) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> a(0.0, 4 * kPi);
    const int n = 4;
    std::vector<double> angles(11);
    for (auto &v : angles) {
        v = a(rng);
    }
    // With p = 1 each qubit only sees its own RY chain: P(1) = sin^2(sum / 2).
    std::vector<double> sum(n, 0.0);
    for (std::size_t k = 0; k < angles.size(); ++k) {
        sum[k % n] += angles[k];
    }
    ProbVector want = {1.0};
    for (int q = 0; q < n; ++q) {
        const double s1 = std::pow(std::sin(sum[static_cast<std::size_t>(q)] / 2.0), 2);
        want = outer(want, {1.0 - s1, s1});
    }
    const auto got = run_blocked_circuit(BlockPartition::make(n, 1), angles);
    EXPECT_LT(max_diff(got, want), 1e-12);
    double total = 0.0;
    for (double v : got) {
        total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(TensorProduct, FirstBlockMostSignificant) {
    const std::vector<ProbVector> parts = {{0.25, 0.75}, {0.1, 0.9}};
    const auto t = tensor_product(parts);
    EXPECT_NEAR(t[0b01], 0.25 * 0.9, 1e-15);
    EXPECT_NEAR(t[0b10], 0.75 * 0.1, 1e-15);
}

TEST(GateCost, DoublesWithEachQubit) {
    // Guard against accidental super-linear kernels: one RY sweep on n + 1
    // qubits should cost about twice the sweep on n qubits.
    auto sweep = [](PureState &s) {
        const auto t0 = std::chrono::steady_clock::now();
        for (int q = 0; q < s.n; ++q) {
            apply_ry(s, q, 0.1);
        }
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / s.n;
    };
    // Interleaved so that background load affects both sizes alike.
    auto small = PureState::zero(16);
    auto large = PureState::zero(17);
    double best_small = 1e30, best_large = 1e30;
    for (int rep = 0; rep < 31; ++rep) {
        best_small = std::min(best_small, sweep(small));
        best_large = std::min(best_large, sweep(large));
    }
    const double ratio = best_large / best_small;
    EXPECT_GT(ratio, 1.6) << ratio;
    EXPECT_LT(ratio, 2.6) << ratio;
}

TEST(DeriveSeed, DistinctAndStable) {
    EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
    EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
    EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
}

} // namespace
