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
#pragma once

#include "qrc/dynamics.hpp"
#include "qrc/reservoir.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace qrc::experiments {

enum class Scenario {
    ClosedLoopL63,
    OpenLoopL8,
    ReducedNoisyL8,
    PblockL8,
    BenchmarkLeakrate,
    CrcmRegularization,
};

const std::vector<std::string> &scenario_names();
std::string scenario_name(Scenario s);
/// Throws ConfigError listing the valid names.
Scenario parse_scenario(const std::string &name);

/// Parameter grid: name -> values. Ordered so that cell enumeration and
/// hashing are canonical.
using Grid = std::map<std::string, std::vector<double>>;

struct SweepSpec {
    Scenario scenario = Scenario::ClosedLoopL63;
    Grid grid;
    std::size_t seeds = 1;
    std::uint64_t base_seed = 1;
    std::uint64_t data_seed = 7;  ///< initial condition of the ground-truth trajectory
    std::size_t train_steps = 2000;
    std::size_t washout = 50;
    std::size_t test_steps = 1000;
    std::size_t transient = 1000;
    double dt = 0.02;
    /// 0 = exact probabilities; for reduced_noisy_l8 0 selects K = 2^(10+n).
    std::uint64_t shots = 0;
    double input_scale = std::numbers::pi;
    double lyapunov = 0.9056;
    double horizon_threshold = 0.3;
    double crc_eps = 0.12;
    double crc_density = 0.2;
    double crc_spectral_radius = 1.01;
    /// Ridge parameter of scenarios without a gamma axis. A tiny positive
    /// value keeps the solve well posed for low-rank reduced-circuit states.
    double ridge_gamma = 1e-10;
    int n_selected = 14;
    std::size_t max_trajectories = 256;

    /// Paper-scale defaults for each scenario.
    static SweepSpec defaults(Scenario s);
    /// Grid names accepted by `scenario`.
    static std::vector<std::string> grid_keys(Scenario s);

    void validate() const;
    /// Settings shared by every task. The grid and seed count are left out;
    /// each task hashes its own cell, so a widened sweep reuses finished runs.
    [[nodiscard]] nlohmann::json identity() const;
};

struct RunRecord {
    std::string scenario;
    std::string variant;
    std::map<std::string, double> params;
    std::size_t run_index = 0;
    std::uint64_t seed = 0;
    double mse = 0.0;  ///< +inf when the run diverged
    std::optional<double> horizon;  ///< Lyapunov times, closed loop only
    bool diverged = false;
    std::string error;
    std::map<std::string, double> metrics;
    double wall_time = 0.0;
    std::string config_hash;
    std::string code_version;

    [[nodiscard]] nlohmann::json to_json() const;
    static RunRecord from_json(const nlohmann::json &j);
};

/// Statistics of one group. Non-finite values (diverged runs) are excluded
/// from mean/median/std and counted in `diverged`.
struct AggregateStats {
    std::string variant;
    std::map<std::string, double> params;
    std::string metric = "mse";
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0;  ///< population standard deviation
    std::size_t count = 0;
    std::size_t diverged = 0;
    bool impossible = false;
};

/// Groups by (variant, params) in ascending key order. `metric` is "mse",
/// "horizon" or a key of RunRecord::metrics.
std::vector<AggregateStats> aggregate(const std::vector<RunRecord> &records, const std::string &metric = "mse");

/// Aggregate CSV: variant, union of parameter names, metric, count,
/// diverged, mean, median, std, flag.
std::string aggregate_csv(const std::vector<AggregateStats> &table);

struct SweepOptions {
    unsigned jobs = 1;
    /// NDJSON record file; completed (parameters, seed) pairs found here are
    /// skipped. Empty = keep records in memory only.
    std::filesystem::path records_path;
    bool resume = false;
    /// Called after each finished task with (done, total).
    std::function<void(std::size_t, std::size_t)> progress;
};

struct SweepResult {
    std::vector<RunRecord> records;  ///< canonical order
    std::vector<AggregateStats> table;
    std::size_t skipped = 0;  ///< tasks restored from the record file
};

/// Runs every (cell, seed) task of `spec`, seeds base_seed + run_index.
SweepResult run_sweep(const SweepSpec &spec, const SweepOptions &opts = {});

/// Scenario entry points; each checks spec.scenario.
std::vector<AggregateStats> sweep_eps_qubits(const SweepSpec &spec, const SweepOptions &opts = {});
std::vector<AggregateStats> sweep_crcm_regularization(const SweepSpec &spec, const SweepOptions &opts = {});
std::vector<AggregateStats> sweep_pblocks(const SweepSpec &spec, const SweepOptions &opts = {});
std::vector<RunRecord> run_reduced_noisy(const SweepSpec &spec, const SweepOptions &opts = {});
std::vector<RunRecord> benchmark_leakrate(const SweepSpec &spec, const SweepOptions &opts = {});

/// Aligned reconstruction of one reduced_noisy_l8 environment, for plotting.
struct Reconstruction {
    TimeSeries truth;
    TimeSeries exact;
    TimeSeries sampled;
    TimeSeries noisy;
};
Reconstruction reduced_noisy_series(const SweepSpec &spec, std::size_t run_index);

struct OpCount {
    int n = 0;
    double xi = 0.0;
    double quantum = 0.0;    ///< 2^(10+n) xi n
    double classical = 0.0;  ///< N_res^2
    bool quantum_cheaper = false;
    double n_form_lhs = 0.0;  ///< 2^10 xi N log2 N with N = 2^n
    double n_form_rhs = 0.0;  ///< N^2
    bool n_form_true = false;
};

/// `n_res_classical` = 0 uses the matching classical size 2^n.
OpCount opcount_estimate(int n, double xi, double n_res_classical = 0.0);
/// Smallest n in [n_min, n_max] where the inequality holds.
std::optional<int> opcount_crossover(int n_min, int n_max, double xi);

/// Min-max maps every column to [0, 1] with the extremes of `fit_rows`.
TimeSeries normalize_series(const TimeSeries &series, const reservoir::Normalization &norm);
TimeSeries denormalize_series(const TimeSeries &series, const reservoir::Normalization &norm);

/// FNV-1a 64 of a string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string &text);
std::string code_version();

} // namespace qrc::experiments
