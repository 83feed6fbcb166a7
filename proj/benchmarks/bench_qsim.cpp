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
#include "qrc/qsim.hpp"

#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

namespace {

using namespace qrc::qsim;

void BM_ApplyRy(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    auto s = PureState::zero(n);
    int q = 0;
    for (auto _ : state) {
        apply_ry(s, q, 0.3);
        q = (q + 1) % n;
        benchmark::DoNotOptimize(s.amps.data());
    }
    state.SetComplexityN(std::int64_t{1} << n);
}
BENCHMARK(BM_ApplyRy)->DenseRange(4, 20, 4)->Complexity(benchmark::oN);

void BM_ApplyCnot(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    auto s = PureState::zero(n);
    apply_ry(s, 0, 1.0);
    for (auto _ : state) {
        apply_cnot(s, 0, n - 1);
        benchmark::DoNotOptimize(s.amps.data());
    }
    state.SetComplexityN(std::int64_t{1} << n);
}
BENCHMARK(BM_ApplyCnot)->DenseRange(4, 20, 4)->Complexity(benchmark::oN);

// One full reservoir update circuit: 2^n feedback angles, 3 inputs, n betas.
void BM_ReservoirCircuit(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const std::vector<double> p(std::size_t{1} << n, 1.0 / static_cast<double>(std::size_t{1} << n));
    const std::vector<double> x = {0.2, 0.5, 0.7};
    const std::vector<double> beta(static_cast<std::size_t>(n), 0.4);
    for (auto _ : state) {
        const auto c = build_reservoir_circuit(n, p, x, beta);
        benchmark::DoNotOptimize(exact_probabilities(run_circuit(c)));
    }
}
BENCHMARK(BM_ReservoirCircuit)->DenseRange(4, 9, 1)->Unit(benchmark::kMicrosecond);

void BM_ReducedCircuit(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const std::vector<double> p(14, 0.05), x = {0.3, 0.6};
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_probabilities(run_circuit(build_reduced_circuit(n, p, x))));
    }
}
BENCHMARK(BM_ReducedCircuit)->DenseRange(4, 12, 2)->Unit(benchmark::kMicrosecond);

void BM_SampleShots(benchmark::State &state) {
    const auto shots = static_cast<std::uint64_t>(state.range(0));
    auto s = PureState::zero(7);
    for (int q = 0; q < 7; ++q) {
        apply_ry(s, q, 0.9);
    }
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_shots(s, shots, ++seed));
    }
}
BENCHMARK(BM_SampleShots)->RangeMultiplier(8)->Range(1 << 10, 1 << 19)->Unit(benchmark::kMicrosecond);

void BM_NoisyRun(benchmark::State &state) {
    const std::vector<double> p(14, 0.05), x = {0.3, 0.6};
    const auto c = build_reduced_circuit(7, p, x);
    NoiseConfig noise;
    noise.p_gate = 0.1;
    noise.p_meas = 0.05;
    noise.p_reset = 0.03;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(noisy_run(c, noise, 1 << 17, ++seed));
    }
}
BENCHMARK(BM_NoisyRun)->Unit(benchmark::kMillisecond);

void BM_BlockedCircuit(benchmark::State &state) {
    const int n = 12;
    const int p = static_cast<int>(state.range(0));
    const std::vector<double> angles(16, 0.7);
    const auto part = BlockPartition::make(n, p);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_blocked_circuit(part, angles));
    }
}
BENCHMARK(BM_BlockedCircuit)->DenseRange(2, 12, 2)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
