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
#include "qrc/experiments.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <unistd.h>

namespace {

using namespace qrc;
using namespace qrc::experiments;
namespace fs = std::filesystem;

RunRecord record(const std::string &variant, double eps, double mse, std::size_t run = 0) {
    RunRecord r;
    r.scenario = "closed_loop_l63";
    r.variant = variant;
    r.params = {{"eps", eps}};
    r.run_index = run;
    r.mse = mse;
    r.diverged = !std::isfinite(mse);
    return r;
}

SweepSpec tiny_closed_loop() {
    auto spec = SweepSpec::defaults(Scenario::ClosedLoopL63);
    spec.grid = {{"eps", {0.1, 0.5}}, {"n", {3}}, {"gamma", {1e-8}}};
    spec.seeds = 3;
    spec.train_steps = 200;
    spec.washout = 20;
    spec.test_steps = 60;
    spec.transient = 100;
    return spec;
}

// Records without wall time, which is the only field allowed to differ.
std::vector<std::string> stable_lines(const std::vector<RunRecord> &records) {
    std::vector<std::string> out;
    for (auto r : records) {
        r.wall_time = 0.0;
        out.push_back(r.to_json().dump());
    }
    return out;
}

fs::path temp_dir(const std::string &name) {
    const auto dir = fs::temp_directory_path() / ("qrc_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TEST(Aggregate, MedianMeanStd) {
    const auto t = aggregate({record("qrcm", 0.1, 1.0), record("qrcm", 0.1, 2.0), record("qrcm", 0.1, 100.0)});
    ASSERT_EQ(t.size(), 1U);
    EXPECT_DOUBLE_EQ(t[0].median, 2.0);
    EXPECT_DOUBLE_EQ(t[0].mean, 103.0 / 3.0);
    const double m = 103.0 / 3.0;
    EXPECT_NEAR(t[0].std, std::sqrt(((1 - m) * (1 - m) + (2 - m) * (2 - m) + (100 - m) * (100 - m)) / 3.0), 1e-12);
    EXPECT_EQ(t[0].count, 3U);
    EXPECT_TRUE(aggregate({}).empty());
}

TEST(Aggregate, EvenCountMedianAndDivergedRuns) {
    const double inf = std::numeric_limits<double>::infinity();
    const auto t = aggregate({record("qrcm", 0.1, 4.0), record("qrcm", 0.1, 1.0), record("qrcm", 0.1, inf),
                              record("qrcm", 0.1, 3.0), record("qrcm", 0.1, 2.0)});
    ASSERT_EQ(t.size(), 1U);
    EXPECT_DOUBLE_EQ(t[0].median, 2.5);
    EXPECT_EQ(t[0].count, 5U);
    EXPECT_EQ(t[0].diverged, 1U);
}

TEST(Aggregate, GroupsSortedByVariantAndParams) {
    const auto t = aggregate({record("qrcm", 0.5, 1.0), record("crcm", 0.1, 1.0), record("qrcm", 0.1, 1.0)});
    ASSERT_EQ(t.size(), 3U);
    EXPECT_EQ(t[0].variant, "crcm");
    EXPECT_EQ(t[1].params.at("eps"), 0.1);
    EXPECT_EQ(t[2].params.at("eps"), 0.5);
    const auto csv = aggregate_csv(t);
    EXPECT_EQ(csv.substr(0, csv.find('\n')).find("variant"), 0U);
    EXPECT_EQ(static_cast<int>(std::count(csv.begin(), csv.end(), '\n')), 4);
}

TEST(RunRecord, JsonRoundTripWithInfinity) {
    auto r = record("qrcm", 0.25, std::numeric_limits<double>::infinity(), 4);
    r.seed = 9;
    r.horizon = 1.5;
    r.metrics = {{"corr_min", 0.5}, {"bad", std::numeric_limits<double>::infinity()}};
    r.error = "diverged at step 3";
    const auto back = RunRecord::from_json(nlohmann::json::parse(r.to_json().dump()));
    EXPECT_TRUE(std::isinf(back.mse));
    EXPECT_TRUE(back.diverged);
    EXPECT_EQ(back.horizon, 1.5);
    EXPECT_TRUE(std::isinf(back.metrics.at("bad")));
    EXPECT_EQ(back.to_json(), r.to_json());
}

TEST(OpCount, SixteenQubitExample) {
    const auto c16 = opcount_estimate(16, 3.0);
    EXPECT_DOUBLE_EQ(c16.quantum, std::ldexp(1.0, 26) * 3.0 * 16.0);
    EXPECT_DOUBLE_EQ(c16.classical, std::ldexp(1.0, 32));
    EXPECT_TRUE(c16.quantum_cheaper);
    EXPECT_FALSE(opcount_estimate(15, 3.0).quantum_cheaper);
    EXPECT_EQ(opcount_crossover(1, 32, 3.0), 16);
    EXPECT_EQ(c16.n_form_true, c16.quantum_cheaper);
    EXPECT_THROW(opcount_estimate(10, 0.0), ConfigError);
}

TEST(OpCount, TwoFormsAgreeAndCrossoverIsMonotone) {
    for (double xi : {1.0, 2.0, 3.0, 5.0}) {
        for (int n = 1; n <= 40; ++n) {
            const auto c = opcount_estimate(n, xi);
            EXPECT_NEAR(c.quantum / c.classical, c.n_form_lhs / c.n_form_rhs, 1e-12);
        }
        const auto n0 = opcount_crossover(1, 40, xi);
        ASSERT_TRUE(n0.has_value());
        for (int n = *n0; n <= 40; ++n) {
            EXPECT_TRUE(opcount_estimate(n, xi).quantum_cheaper);
        }
    }
}

TEST(Fnv1a, ReferenceVectors) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Normalization, SeriesRoundTrip) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 10.0);
    TimeSeries s;
    s.dt = 0.1;
    s.labels = {"x", "y"};
    s.data.resize(50, 2);
    for (Eigen::Index i = 0; i < s.data.size(); ++i) {
        s.data.data()[i] = g(rng);
    }
    const auto norm = reservoir::Normalization::fit(s.data);
    const auto n = normalize_series(s, norm);
    EXPECT_NEAR(n.data.minCoeff(), 0.0, 1e-15);
    EXPECT_NEAR(n.data.maxCoeff(), 1.0, 1e-15);
    EXPECT_LT((denormalize_series(n, norm).data - s.data).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Scenarios, NamesRoundTrip) {
    for (const auto &name : scenario_names()) {
        EXPECT_EQ(scenario_name(parse_scenario(name)), name);
        const auto spec = SweepSpec::defaults(parse_scenario(name));
        EXPECT_NO_THROW(spec.validate()) << name;
    }
    EXPECT_THROW(parse_scenario("nope"), ConfigError);
}

TEST(SweepSpec, RejectsForeignAndEmptyGrids) {
    auto spec = tiny_closed_loop();
    spec.grid["p"] = {2};
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = tiny_closed_loop();
    spec.grid["n"] = {};
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = tiny_closed_loop();
    spec.grid["eps"] = {1.5};
    EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Sweep, DeterministicAndParallelEqual) {
    const auto spec = tiny_closed_loop();
    const auto a = run_sweep(spec);
    const auto b = run_sweep(spec);
    ASSERT_EQ(a.records.size(), 6U);
    EXPECT_EQ(stable_lines(a.records), stable_lines(b.records));
    SweepOptions par;
    par.jobs = 3;
    EXPECT_EQ(stable_lines(run_sweep(spec, par).records), stable_lines(a.records));
    for (const auto &r : a.records) {
        EXPECT_EQ(r.seed, spec.base_seed + r.run_index);
        EXPECT_TRUE(r.horizon.has_value());
    }
    ASSERT_EQ(a.table.size(), 2U);
}

TEST(Sweep, ResumeSkipsFinishedTasks) {
    const auto dir = temp_dir("resume");
    const auto spec = tiny_closed_loop();
    SweepOptions opts;
    opts.records_path = dir / "records.ndjson";
    const auto full = run_sweep(spec, opts);

    // Keep the first two records, as if the sweep had been interrupted.
    std::ifstream in(opts.records_path);
    std::string l1, l2;
    std::getline(in, l1);
    std::getline(in, l2);
    in.close();
    std::ofstream(opts.records_path) << l1 << '\n' << l2 << '\n' << "{\"truncated";

    opts.resume = true;
    const auto resumed = run_sweep(spec, opts);
    EXPECT_EQ(resumed.skipped, 2U);
    EXPECT_EQ(stable_lines(resumed.records), stable_lines(full.records));
    fs::remove_all(dir);
}

TEST(Sweep, ImpossibleBlockCellsAreFlagged) {
    auto spec = SweepSpec::defaults(Scenario::PblockL8);
    spec.grid = {{"n", {3}}, {"p", {2, 4}}, {"eps", {0.2}}};
    spec.seeds = 1;
    spec.train_steps = 150;
    spec.washout = 10;
    spec.test_steps = 50;
    spec.transient = 100;
    const auto res = run_sweep(spec);
    EXPECT_EQ(res.records.size(), 1U);
    ASSERT_EQ(res.table.size(), 2U);
    EXPECT_FALSE(res.table[0].impossible);
    EXPECT_TRUE(res.table[1].impossible);
    EXPECT_NE(aggregate_csv(res.table).find("impossible"), std::string::npos);
}

} // namespace
