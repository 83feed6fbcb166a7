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
#include "qrc/dynamics.hpp"
#include "qrc/reservoir.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace qrc;

void BM_CrcmStep(benchmark::State &state) {
    const auto cfg = reservoir::CrcConfig::make(static_cast<int>(state.range(0)), 1, 0.12, 0.2, 1.01, 1);
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(cfg.n_res);
    const std::vector<double> x = {0.4};
    for (auto _ : state) {
        psi = reservoir::crcm_step(psi, x, cfg);
        benchmark::DoNotOptimize(psi.data());
    }
}
BENCHMARK(BM_CrcmStep)->RangeMultiplier(2)->Range(128, 1024);

void BM_RidgeFit(benchmark::State &state) {
    reservoir::ReservoirTrace t;
    t.states = Eigen::MatrixXd::Random(state.range(0), 2000);
    t.targets = Eigen::MatrixXd::Random(8, 2000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reservoir::ridge_fit(t, 1e-6).w_out.data());
    }
}
BENCHMARK(BM_RidgeFit)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

void BM_Lorenz8Rk4(benchmark::State &state) {
    const auto rhs = dynamics::lorenz8(dynamics::ConvectionParams::standard());
    std::vector<double> x = {1.0, 0.5, -0.3, 0.2, 2.0, -1.0, 0.4, 0.1};
    for (auto _ : state) {
        dynamics::rk4_step(rhs, x, 0.01);
        benchmark::DoNotOptimize(x.data());
    }
}
BENCHMARK(BM_Lorenz8Rk4);

} // namespace
