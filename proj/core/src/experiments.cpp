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
#include "qrc/experiments.hpp"

#include "qrc/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#ifndef QRC_VERSION
#define QRC_VERSION "unknown"
#endif

namespace qrc::experiments {

namespace {

using nlohmann::json;
using reservoir::Normalization;

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::pair<Scenario, std::string>> &scenario_table() {
    static const std::vector<std::pair<Scenario, std::string>> table = {
        {Scenario::ClosedLoopL63, "closed_loop_l63"},       {Scenario::OpenLoopL8, "open_loop_l8"},
        {Scenario::ReducedNoisyL8, "reduced_noisy_l8"},     {Scenario::PblockL8, "pblock_l8"},
        {Scenario::BenchmarkLeakrate, "benchmark_leakrate"}, {Scenario::CrcmRegularization, "crcm_regularization"},
    };
    return table;
}

std::vector<double> range(double lo, double hi) {
    std::vector<double> out;
    for (double v = lo; v <= hi; v += 1.0) {
        out.push_back(v);
    }
    return out;
}

Normalization identity_norm(std::size_t dims) {
    return {std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)};
}

int as_int(double v, const char *what, double max = 20.0) {
    if (v != std::floor(v) || v < 1.0 || v > max) {
        throw ConfigError(std::string("grid value for ") + what + " must be an integer in [1, " +
                          std::to_string(static_cast<long long>(max)) + "]");
    }
    return static_cast<int>(v);
}

// Training rows [0, train_steps] and test rows after them, normalized with
// the training extremes.
struct Dataset {
    TimeSeries raw;
    TimeSeries norm_series;
    Normalization norm;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;

    [[nodiscard]] TimeSeries train() const { return norm_series.slice(0, static_cast<Eigen::Index>(train_rows)); }
    [[nodiscard]] TimeSeries test() const {
        return norm_series.slice(static_cast<Eigen::Index>(train_rows), static_cast<Eigen::Index>(test_rows));
    }
};

Dataset make_dataset(TimeSeries raw, const SweepSpec &spec) {
    Dataset d;
    d.train_rows = spec.train_steps + 1;
    d.test_rows = spec.test_steps;
    if (static_cast<std::size_t>(raw.steps()) < d.train_rows + d.test_rows) {
        throw ContractViolation("dataset shorter than train + test window");
    }
    d.norm = Normalization::fit(raw.slice(0, static_cast<Eigen::Index>(d.train_rows)).data);
    d.norm_series = normalize_series(raw, d.norm);
    d.raw = std::move(raw);
    return d;
}

Dataset lorenz_dataset(dynamics::Model model, const SweepSpec &spec) {
    dynamics::TrajectoryOptions opts;
    opts.dt = spec.dt;
    opts.steps = spec.train_steps + spec.test_steps;
    opts.transient = spec.transient;
    opts.seed = spec.data_seed;
    return make_dataset(dynamics::lorenz_trajectory(model, dynamics::ConvectionParams::standard(), opts), spec);
}

Dataset narma_dataset(const SweepSpec &spec) {
    const std::size_t rows = spec.train_steps + 1 + spec.test_steps;
    const auto s = dynamics::narma2_series({}, rows);
    TimeSeries ts;
    ts.dt = 1.0;
    ts.labels = {"u", "y"};
    ts.data.resize(static_cast<Eigen::Index>(rows), 2);
    for (std::size_t k = 0; k < rows; ++k) {
        ts.data(static_cast<Eigen::Index>(k), 0) = s.u[k];
        ts.data(static_cast<Eigen::Index>(k), 1) = s.y[k];
    }
    return make_dataset(std::move(ts), spec);
}

Dataset mackey_glass_dataset(const SweepSpec &spec) {
    return make_dataset(dynamics::mackey_glass_series({}, spec.train_steps + 1 + spec.test_steps), spec);
}

reservoir::QrcConfig make_qrc(const SweepSpec &spec, int n, double eps, std::uint64_t seed, std::size_t n_in,
                              bool reduced) {
    auto cfg = reduced ? reservoir::QrcConfig::make_reduced(n, eps, seed, spec.n_selected)
                       : reservoir::QrcConfig::make(n, eps, seed);
    cfg.input_scale = spec.input_scale;
    cfg.normalization = identity_norm(n_in);
    cfg.shots = spec.shots;
    cfg.noise.max_trajectories = spec.max_trajectories;
    return cfg;
}

struct Fit {
    TimeSeries prediction;
    double mse = kInf;
};

Fit open_loop(const reservoir::Reservoir &model, const Dataset &data, const std::vector<int> &inputs,
              std::size_t washout, double gamma) {
    const auto trace = reservoir::collect_trace(model, data.train(), washout, inputs);
    const auto w = reservoir::ridge_fit(trace, gamma);
    const auto test = data.test();
    Fit fit;
    fit.prediction = reservoir::open_loop_reconstruct(model, w, trace.end_state, test.columns(inputs), test.labels);
    fit.mse = reservoir::mse(fit.prediction.data, test.data);
    return fit;
}

double pearson(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
    const Eigen::VectorXd da = a.array() - a.mean();
    const Eigen::VectorXd db = b.array() - b.mean();
    const double den = std::sqrt(da.squaredNorm() * db.squaredNorm());
    return den > 0.0 ? da.dot(db) / den : 0.0;
}

void add_correlations(RunRecord &rec, const TimeSeries &pred, const TimeSeries &truth) {
    double lo = 1.0;
    for (Eigen::Index k = 0; k < truth.dof(); ++k) {
        const double c = pearson(pred.data.col(k), truth.data.col(k));
        rec.metrics["corr_" + truth.labels[static_cast<std::size_t>(k)]] = c;
        lo = std::min(lo, c);
    }
    rec.metrics["corr_min"] = lo;
}

std::vector<int> label_columns(const TimeSeries &ts, const std::vector<std::string> &labels) {
    std::vector<int> cols;
    for (const auto &l : labels) {
        const int c = ts.column_of(l);
        if (c < 0) {
            throw ContractViolation("missing column " + l);
        }
        cols.push_back(c);
    }
    return cols;
}

std::vector<int> all_columns(const TimeSeries &ts) {
    std::vector<int> cols(static_cast<std::size_t>(ts.dof()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
        cols[i] = static_cast<int>(i);
    }
    return cols;
}

struct Task {
    std::string variant;
    std::map<std::string, double> params;
    std::size_t run_index = 0;
    std::string hash;
};

// Cartesian product of the named grid axes, in the given key order.
std::vector<std::map<std::string, double>> cells(const Grid &grid, const std::vector<std::string> &keys) {
    std::vector<std::map<std::string, double>> out(1);
    for (const auto &key : keys) {
        std::vector<std::map<std::string, double>> next;
        for (const auto &cell : out) {
            for (double v : grid.at(key)) {
                auto c = cell;
                c[key] = v;
                next.push_back(std::move(c));
            }
        }
        out = std::move(next);
    }
    return out;
}

struct Context {
    const SweepSpec &spec;
    std::optional<Dataset> lorenz;
    std::optional<Dataset> narma;
    std::optional<Dataset> mackey;
};

RunRecord base_record(const SweepSpec &spec, const Task &task, const std::string &variant) {
    RunRecord r;
    r.scenario = scenario_name(spec.scenario);
    r.variant = variant;
    r.params = task.params;
    r.run_index = task.run_index;
    r.seed = spec.base_seed + task.run_index;
    r.config_hash = task.hash;
    r.code_version = code_version();
    return r;
}

void mark_failed(RunRecord &r, const std::exception &e, bool diverged) {
    r.mse = kInf;
    r.diverged = diverged;
    r.error = e.what();
}

std::vector<RunRecord> run_closed_loop(const Context &ctx, const Task &task) {
    const auto &spec = ctx.spec;
    const auto &data = *ctx.lorenz;
    auto rec = base_record(spec, task, task.variant);
    const int n = as_int(task.params.at("n"), "n");
    const auto cols = all_columns(data.raw);
    try {
        reservoir::QuantumReservoir model(
            make_qrc(spec, n, task.params.at("eps"), rec.seed, cols.size(), false));
        const auto trace = reservoir::collect_trace(model, data.train(), spec.washout, cols);
        const auto w = reservoir::ridge_fit(trace, task.params.at("gamma"));
        const auto test = data.test();
        const auto pred = reservoir::closed_loop_predict(model, w, trace.end_state, spec.test_steps, spec.dt);
        rec.mse = reservoir::mse(pred.data, test.data);
        const auto raw_pred = denormalize_series(pred, data.norm);
        const auto raw_test = denormalize_series(test, data.norm);
        const auto steps = reservoir::prediction_horizon(raw_pred.data, raw_test.data, spec.horizon_threshold);
        rec.horizon = static_cast<double>(steps) * spec.dt * spec.lyapunov;
        if (!std::isfinite(rec.mse)) {
            rec.mse = kInf;
            rec.diverged = true;
        }
    } catch (const DivergedError &e) {
        mark_failed(rec, e, true);
    } catch (const SingularSystemError &e) {
        mark_failed(rec, e, false);
    }
    return {rec};
}

std::vector<RunRecord> run_open_loop(const Context &ctx, const Task &task) {
    const auto &spec = ctx.spec;
    const auto &data = *ctx.lorenz;
    auto rec = base_record(spec, task, task.variant);
    const auto inputs = label_columns(data.raw, {"A4"});
    try {
        reservoir::QuantumReservoir model(make_qrc(spec, as_int(task.params.at("n"), "n"), task.params.at("eps"),
                                                   rec.seed, inputs.size(), false));
        const auto fit = open_loop(model, data, inputs, spec.washout, task.params.at("gamma"));
        rec.mse = fit.mse;
        add_correlations(rec, fit.prediction, data.test());
    } catch (const SingularSystemError &e) {
        mark_failed(rec, e, false);
    }
    return {rec};
}

std::vector<RunRecord> run_regularization(const Context &ctx, const Task &task) {
    const auto &spec = ctx.spec;
    const auto &data = *ctx.lorenz;
    const auto inputs = label_columns(data.raw, {"A4"});
    const std::uint64_t seed = spec.base_seed + task.run_index;
    std::unique_ptr<reservoir::Reservoir> model;
    if (task.variant == "crcm") {
        model = std::make_unique<reservoir::ClassicalReservoir>(
            reservoir::CrcConfig::make(as_int(task.params.at("n_res"), "n_res", 1 << 16),
                                       static_cast<int>(inputs.size()), spec.crc_eps, spec.crc_density,
                                       spec.crc_spectral_radius, seed));
    } else {
        model = std::make_unique<reservoir::QuantumReservoir>(make_qrc(
            spec, as_int(task.params.at("n"), "n"), task.params.at("eps"), seed, inputs.size(), false));
    }
    const auto trace = reservoir::collect_trace(*model, data.train(), spec.washout, inputs);
    const auto test = data.test();
    std::vector<RunRecord> out;
    for (double gamma : spec.grid.at("gamma")) {
        auto rec = base_record(spec, task, task.variant);
        rec.params["gamma"] = gamma;
        try {
            const auto w = reservoir::ridge_fit(trace, gamma);
            const auto pred = reservoir::open_loop_reconstruct(*model, w, trace.end_state, test.columns(inputs));
            rec.mse = reservoir::mse(pred.data, test.data);
        } catch (const SingularSystemError &e) {
            mark_failed(rec, e, false);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<RunRecord> run_pblock(const Context &ctx, const Task &task) {
    const auto &spec = ctx.spec;
    const auto &data = *ctx.lorenz;
    auto rec = base_record(spec, task, task.variant);
    const auto inputs = label_columns(data.raw, {"A4", "B3"});
    try {
        auto cfg = make_qrc(spec, as_int(task.params.at("n"), "n"), task.params.at("eps"), rec.seed, inputs.size(),
                            true);
        cfg.block_size = as_int(task.params.at("p"), "p");
        reservoir::QuantumReservoir model(std::move(cfg));
        rec.mse = open_loop(model, data, inputs, spec.washout, spec.ridge_gamma).mse;
    } catch (const SingularSystemError &e) {
        mark_failed(rec, e, false);
    }
    return {rec};
}

std::uint64_t noisy_shots(const SweepSpec &spec, int n) {
    return spec.shots > 0 ? spec.shots : (std::uint64_t{1} << (10 + n));
}

// The three environments of the reduced-circuit comparison, in the order
// exact, sampled, noisy.
std::vector<reservoir::QrcConfig> noisy_environments(const SweepSpec &spec, const std::map<std::string, double> &params,
                                                     std::uint64_t seed, std::size_t n_in) {
    const int n = as_int(params.at("n"), "n");
    auto exact = make_qrc(spec, n, params.at("eps"), seed, n_in, true);
    exact.shots = 0;
    auto sampled = exact;
    sampled.shots = noisy_shots(spec, n);
    auto noisy = sampled;
    noisy.noise.p_gate = params.at("p_gate");
    noisy.noise.p_meas = params.at("p_meas");
    noisy.noise.p_reset = params.at("p_reset");
    return {exact, sampled, noisy};
}

const std::vector<std::string> kNoiseVariants = {"exact", "sampled", "noisy"};

std::vector<RunRecord> run_reduced_noisy_task(const Context &ctx, const Task &task) {
    const auto &spec = ctx.spec;
    const auto &data = *ctx.lorenz;
    const auto inputs = label_columns(data.raw, {"A4", "B3"});
    const auto envs = noisy_environments(spec, task.params, spec.base_seed + task.run_index, inputs.size());
    std::vector<RunRecord> out;
    for (std::size_t e = 0; e < envs.size(); ++e) {
        auto rec = base_record(spec, task, kNoiseVariants[e]);
        rec.metrics["shots"] = static_cast<double>(envs[e].shots);
        try {
            reservoir::QuantumReservoir model(envs[e]);
            const auto fit = open_loop(model, data, inputs, spec.washout, spec.ridge_gamma);
            rec.mse = fit.mse;
            add_correlations(rec, fit.prediction, data.test());
        } catch (const SingularSystemError &ex) {
            mark_failed(rec, ex, false);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<RunRecord> run_benchmark(const Context &ctx, const Task &task) {
    const auto &spec = ctx.spec;
    const bool narma = task.variant == "narma2";
    const auto &data = narma ? *ctx.narma : *ctx.mackey;
    auto rec = base_record(spec, task, task.variant);
    // NARMA-2 maps u_k to y_(k+1); Mackey-Glass predicts its own next value.
    const std::vector<int> inputs = {0};
    const std::vector<int> targets = {narma ? 1 : 0};
    try {
        reservoir::QuantumReservoir model(make_qrc(spec, as_int(task.params.at("n"), "n"), task.params.at("eps"),
                                                   rec.seed, inputs.size(), false));
        const auto trace = reservoir::collect_trace(model, data.train(), spec.washout, inputs, targets);
        const auto w = reservoir::ridge_fit(trace, spec.ridge_gamma);
        const auto test = data.test();
        const auto pred = reservoir::open_loop_reconstruct(model, w, trace.end_state, test.columns(inputs));
        const auto truth = test.columns(targets);
        rec.mse = reservoir::mse(pred.data, truth.data);
        const Eigen::VectorXd col = truth.data.col(0);
        const double var = (col.array() - col.mean()).square().mean();
        rec.metrics["nrmse"] = var > 0.0 ? std::sqrt(rec.mse / var) : kInf;
    } catch (const SingularSystemError &e) {
        mark_failed(rec, e, false);
    }
    return {rec};
}

std::vector<Task> enumerate_tasks(const SweepSpec &spec) {
    std::vector<std::pair<std::string, std::map<std::string, double>>> cell_list;
    const auto &g = spec.grid;
    switch (spec.scenario) {
    case Scenario::ClosedLoopL63:
    case Scenario::OpenLoopL8:
        for (auto &c : cells(g, {"eps", "n", "gamma"})) {
            cell_list.emplace_back("qrcm", std::move(c));
        }
        break;
    case Scenario::CrcmRegularization:
        for (double n_res : g.at("n_res")) {
            cell_list.push_back({"crcm", {{"n_res", n_res}}});
        }
        for (auto &c : cells(g, {"qrcm_n", "qrcm_eps"})) {
            cell_list.push_back({"qrcm", {{"n", c.at("qrcm_n")}, {"eps", c.at("qrcm_eps")}}});
        }
        break;
    case Scenario::PblockL8:
        for (auto &c : cells(g, {"n", "p", "eps"})) {
            if (c.at("p") <= c.at("n")) {
                cell_list.emplace_back("qrcm", std::move(c));
            }
        }
        break;
    case Scenario::ReducedNoisyL8:
        for (auto &c : cells(g, {"n", "eps", "p_gate", "p_meas", "p_reset"})) {
            cell_list.emplace_back("reduced", std::move(c));
        }
        break;
    case Scenario::BenchmarkLeakrate:
        for (double eps : g.at("eps")) {
            for (double n : g.at("n_narma")) {
                cell_list.push_back({"narma2", {{"eps", eps}, {"n", n}}});
            }
            for (double n : g.at("n_mg")) {
                cell_list.push_back({"mackey_glass", {{"eps", eps}, {"n", n}}});
            }
        }
        break;
    }
    std::string identity = spec.identity().dump();
    if (spec.scenario == Scenario::CrcmRegularization) {
        // Every task of the regularization study fits the whole gamma list.
        identity += json(g.at("gamma")).dump();
    }
    std::vector<Task> tasks;
    for (const auto &[variant, params] : cell_list) {
        for (std::size_t i = 0; i < spec.seeds; ++i) {
            Task t{variant, params, i, {}};
            t.hash = fnv1a_hex(identity + "|" + variant + "|" + json(params).dump() + "|" + std::to_string(i));
            tasks.push_back(std::move(t));
        }
    }
    return tasks;
}

std::vector<RunRecord> run_task(const Context &ctx, const Task &task) {
    switch (ctx.spec.scenario) {
    case Scenario::ClosedLoopL63: return run_closed_loop(ctx, task);
    case Scenario::OpenLoopL8: return run_open_loop(ctx, task);
    case Scenario::CrcmRegularization: return run_regularization(ctx, task);
    case Scenario::PblockL8: return run_pblock(ctx, task);
    case Scenario::ReducedNoisyL8: return run_reduced_noisy_task(ctx, task);
    case Scenario::BenchmarkLeakrate: return run_benchmark(ctx, task);
    }
    throw ContractViolation("unhandled scenario");
}

Context make_context(const SweepSpec &spec) {
    Context ctx{spec, std::nullopt, std::nullopt, std::nullopt};
    switch (spec.scenario) {
    case Scenario::ClosedLoopL63: ctx.lorenz = lorenz_dataset(dynamics::Model::L63, spec); break;
    case Scenario::BenchmarkLeakrate:
        ctx.narma = narma_dataset(spec);
        ctx.mackey = mackey_glass_dataset(spec);
        break;
    default: ctx.lorenz = lorenz_dataset(dynamics::Model::L8, spec); break;
    }
    return ctx;
}

bool record_less(const RunRecord &a, const RunRecord &b) {
    return std::tie(a.variant, a.params, a.run_index) < std::tie(b.variant, b.params, b.run_index);
}

std::vector<RunRecord> load_records(const std::filesystem::path &path) {
    std::vector<RunRecord> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        // A sweep killed mid-write can leave a truncated last line.
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            continue;
        }
        out.push_back(RunRecord::from_json(j));
    }
    return out;
}

void add_impossible_cells(const SweepSpec &spec, std::vector<AggregateStats> &table) {
    if (spec.scenario != Scenario::PblockL8) {
        return;
    }
    for (const auto &c : cells(spec.grid, {"n", "p", "eps"})) {
        if (c.at("p") > c.at("n")) {
            AggregateStats row;
            row.variant = "qrcm";
            row.params = c;
            row.mean = row.median = row.std = std::numeric_limits<double>::quiet_NaN();
            row.impossible = true;
            table.push_back(std::move(row));
        }
    }
    std::stable_sort(table.begin(), table.end(), [](const AggregateStats &a, const AggregateStats &b) {
        return std::tie(a.variant, a.params) < std::tie(b.variant, b.params);
    });
}

std::string fmt(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return format_double(v);
}

void require_scenario(const SweepSpec &spec, Scenario s) {
    if (spec.scenario != s) {
        throw ConfigError("spec scenario is " + scenario_name(spec.scenario) + ", expected " + scenario_name(s));
    }
}

} // namespace

const std::vector<std::string> &scenario_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto &[s, name] : scenario_table()) {
            v.push_back(name);
        }
        return v;
    }();
    return names;
}

std::string scenario_name(Scenario s) {
    for (const auto &[sc, name] : scenario_table()) {
        if (sc == s) {
            return name;
        }
    }
    throw ContractViolation("unknown scenario enum");
}

Scenario parse_scenario(const std::string &name) {
    for (const auto &[sc, n] : scenario_table()) {
        if (n == name) {
            return sc;
        }
    }
    std::string valid;
    for (const auto &n : scenario_names()) {
        valid += (valid.empty() ? "" : ", ") + n;
    }
    throw ConfigError("unknown scenario '" + name + "' (valid: " + valid + ")");
}

SweepSpec SweepSpec::defaults(Scenario s) {
    SweepSpec spec;
    spec.scenario = s;
    switch (s) {
    case Scenario::ClosedLoopL63:
        spec.grid = {{"eps", {0.01, 0.025, 0.05, 0.1, 0.2}}, {"n", {4, 5, 6, 7}}, {"gamma", {0.0}}};
        spec.seeds = 50;
        break;
    case Scenario::OpenLoopL8:
        spec.grid = {{"eps", {0.05}}, {"n", {7}}, {"gamma", {1e-10}}};
        spec.seeds = 30;
        spec.test_steps = 2000;
        spec.dt = 0.01;
        break;
    case Scenario::CrcmRegularization:
        spec.grid = {{"gamma", {1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0}},
                     {"n_res", {128, 256, 512, 1024}},
                     {"qrcm_n", {7}},
                     {"qrcm_eps", {0.05}}};
        spec.seeds = 30;
        spec.test_steps = 2000;
        spec.dt = 0.01;
        break;
    case Scenario::PblockL8:
        spec.grid = {{"n", range(3, 8)}, {"p", range(2, 8)}, {"eps", {0.2}}};
        spec.seeds = 100;
        spec.test_steps = 2000;
        spec.dt = 0.01;
        break;
    case Scenario::ReducedNoisyL8:
        spec.grid = {{"n", {7}}, {"eps", {0.2}}, {"p_gate", {0.1}}, {"p_meas", {0.05}}, {"p_reset", {0.03}}};
        spec.seeds = 10;
        spec.test_steps = 2000;
        spec.dt = 0.01;
        break;
    case Scenario::BenchmarkLeakrate:
        spec.grid = {{"eps", {0.2, 1.0}}, {"n_narma", {4}}, {"n_mg", {5}}};
        spec.seeds = 10;
        spec.train_steps = 500;
        spec.washout = 100;
        spec.test_steps = 500;
        spec.transient = 0;
        spec.dt = 1.0;
        // Scalar inputs in [0, 1] spread over a full cos^2 half period.
        spec.input_scale = 2.0 * std::numbers::pi;
        break;
    }
    return spec;
}

std::vector<std::string> SweepSpec::grid_keys(Scenario s) {
    switch (s) {
    case Scenario::ClosedLoopL63:
    case Scenario::OpenLoopL8: return {"eps", "gamma", "n"};
    case Scenario::CrcmRegularization: return {"gamma", "n_res", "qrcm_eps", "qrcm_n"};
    case Scenario::PblockL8: return {"eps", "n", "p"};
    case Scenario::ReducedNoisyL8: return {"eps", "n", "p_gate", "p_meas", "p_reset"};
    case Scenario::BenchmarkLeakrate: return {"eps", "n_mg", "n_narma"};
    }
    return {};
}

void SweepSpec::validate() const {
    if (seeds < 1) {
        throw ConfigError("sweep needs at least one seed");
    }
    const auto keys = grid_keys(scenario);
    for (const auto &[name, values] : grid) {
        if (std::find(keys.begin(), keys.end(), name) == keys.end()) {
            throw ConfigError("grid key '" + name + "' is not used by " + scenario_name(scenario));
        }
        for (double v : values) {
            if (!std::isfinite(v)) {
                throw ConfigError("grid '" + name + "' has a non-finite value");
            }
        }
    }
    for (const auto &k : keys) {
        const auto it = grid.find(k);
        // The QRCM reference line of the regularization study is optional.
        const bool optional = scenario == Scenario::CrcmRegularization && (k == "qrcm_n" || k == "qrcm_eps");
        if (it == grid.end() || (it->second.empty() && !optional)) {
            throw ConfigError("grid '" + k + "' must be non-empty for " + scenario_name(scenario));
        }
    }
    for (const auto &k : {"eps", "qrcm_eps"}) {
        if (grid.count(k) != 0U) {
            for (double v : grid.at(k)) {
                if (!(v >= 0.0 && v <= 1.0)) {
                    throw ConfigError(std::string("grid '") + k + "' values must lie in [0, 1]");
                }
            }
        }
    }
    if (grid.count("gamma") != 0U) {
        for (double v : grid.at("gamma")) {
            if (v < 0.0) {
                throw ConfigError("ridge gamma must be >= 0");
            }
        }
    }
    if (washout >= train_steps) {
        throw ConfigError("washout must be smaller than train_steps");
    }
    if (test_steps < 1) {
        throw ConfigError("test_steps must be >= 1");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("dt must be positive");
    }
    if (!(lyapunov > 0.0) || !(horizon_threshold > 0.0)) {
        throw ConfigError("lyapunov and horizon_threshold must be positive");
    }
    if (!(input_scale > 0.0)) {
        throw ConfigError("input_scale must be positive");
    }
    if (!(ridge_gamma >= 0.0)) {
        throw ConfigError("ridge_gamma must be >= 0");
    }
    if (n_selected < 1) {
        throw ConfigError("n_selected must be >= 1");
    }
}

json SweepSpec::identity() const {
    json j;
    j["scenario"] = scenario_name(scenario);
    j["base_seed"] = base_seed;
    j["data_seed"] = data_seed;
    j["train_steps"] = train_steps;
    j["washout"] = washout;
    j["test_steps"] = test_steps;
    j["transient"] = transient;
    j["dt"] = dt;
    j["shots"] = shots;
    j["input_scale"] = input_scale;
    j["lyapunov"] = lyapunov;
    j["horizon_threshold"] = horizon_threshold;
    j["crc_eps"] = crc_eps;
    j["crc_density"] = crc_density;
    j["crc_spectral_radius"] = crc_spectral_radius;
    j["ridge_gamma"] = ridge_gamma;
    j["n_selected"] = n_selected;
    j["max_trajectories"] = max_trajectories;
    return j;
}

json RunRecord::to_json() const {
    json j;
    j["scenario"] = scenario;
    j["variant"] = variant;
    j["params"] = params;
    j["run_index"] = run_index;
    j["seed"] = seed;
    j["mse"] = std::isfinite(mse) ? json(mse) : json(nullptr);
    j["horizon"] = horizon ? json(*horizon) : json(nullptr);
    j["diverged"] = diverged;
    if (!error.empty()) {
        j["error"] = error;
    }
    json m = json::object();
    for (const auto &[k, v] : metrics) {
        m[k] = std::isfinite(v) ? json(v) : json(nullptr);
    }
    j["metrics"] = m;
    j["wall_time"] = wall_time;
    j["config_hash"] = config_hash;
    j["code_version"] = code_version;
    return j;
}

RunRecord RunRecord::from_json(const json &j) {
    RunRecord r;
    r.scenario = j.at("scenario").get<std::string>();
    r.variant = j.at("variant").get<std::string>();
    r.params = j.at("params").get<std::map<std::string, double>>();
    r.run_index = j.at("run_index").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.mse = j.at("mse").is_null() ? kInf : j.at("mse").get<double>();
    if (!j.at("horizon").is_null()) {
        r.horizon = j.at("horizon").get<double>();
    }
    r.diverged = j.at("diverged").get<bool>();
    r.error = j.value("error", std::string{});
    for (const auto &[k, v] : j.at("metrics").items()) {
        r.metrics[k] = v.is_null() ? kInf : v.get<double>();
    }
    r.wall_time = j.at("wall_time").get<double>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.code_version = j.at("code_version").get<std::string>();
    return r;
}

std::vector<AggregateStats> aggregate(const std::vector<RunRecord> &records, const std::string &metric) {
    std::map<std::pair<std::string, std::map<std::string, double>>, std::vector<double>> groups;
    std::map<std::pair<std::string, std::map<std::string, double>>, std::size_t> diverged;
    for (const auto &r : records) {
        const auto key = std::make_pair(r.variant, r.params);
        double v = kInf;
        if (metric == "mse") {
            v = r.mse;
        } else if (metric == "horizon") {
            v = r.horizon.value_or(std::numeric_limits<double>::quiet_NaN());
        } else {
            const auto it = r.metrics.find(metric);
            v = it == r.metrics.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
        }
        auto &vals = groups[key];
        auto &div = diverged[key];
        if (std::isfinite(v) && !r.diverged) {
            vals.push_back(v);
        } else {
            ++div;
        }
    }
    std::vector<AggregateStats> table;
    for (auto &[key, vals] : groups) {
        AggregateStats s;
        s.variant = key.first;
        s.params = key.second;
        s.metric = metric;
        s.diverged = diverged[key];
        s.count = vals.size() + s.diverged;
        if (vals.empty()) {
            s.mean = s.median = s.std = std::numeric_limits<double>::quiet_NaN();
        } else {
            std::sort(vals.begin(), vals.end());
            const auto n = vals.size();
            s.median = n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
            double sum = 0.0;
            for (double v : vals) {
                sum += v;
            }
            s.mean = sum / static_cast<double>(n);
            double ss = 0.0;
            for (double v : vals) {
                ss += (v - s.mean) * (v - s.mean);
            }
            s.std = std::sqrt(ss / static_cast<double>(n));
        }
        table.push_back(std::move(s));
    }
    return table;
}

std::string aggregate_csv(const std::vector<AggregateStats> &table) {
    std::set<std::string> names;
    for (const auto &row : table) {
        for (const auto &[k, v] : row.params) {
            names.insert(k);
        }
    }
    std::ostringstream os;
    os << "variant";
    for (const auto &n : names) {
        os << ',' << n;
    }
    os << ",metric,count,diverged,mean,median,std,flag\n";
    for (const auto &row : table) {
        os << row.variant;
        for (const auto &n : names) {
            os << ',';
            const auto it = row.params.find(n);
            if (it != row.params.end()) {
                os << fmt(it->second);
            }
        }
        os << ',' << row.metric << ',' << row.count << ',' << row.diverged << ',' << fmt(row.mean) << ','
           << fmt(row.median) << ',' << fmt(row.std) << ',' << (row.impossible ? "impossible" : "") << '\n';
    }
    return os.str();
}

SweepResult run_sweep(const SweepSpec &spec, const SweepOptions &opts) {
    spec.validate();
    const auto tasks = enumerate_tasks(spec);
    std::map<std::string, std::size_t> by_hash;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        by_hash[tasks[i].hash] = i;
    }

    std::vector<std::vector<RunRecord>> results(tasks.size());
    std::vector<char> done(tasks.size(), 0);
    SweepResult out;
    if (opts.resume && !opts.records_path.empty() && std::filesystem::exists(opts.records_path)) {
        for (auto &r : load_records(opts.records_path)) {
            const auto it = by_hash.find(r.config_hash);
            if (it != by_hash.end()) {
                results[it->second].push_back(std::move(r));
            }
        }
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            // Records of one task are appended together, so any record
            // marks the task complete.
            done[i] = results[i].empty() ? 0 : 1;
            out.skipped += done[i];
        }
    }

    std::ofstream sink;
    if (!opts.records_path.empty()) {
        if (!opts.records_path.parent_path().empty()) {
            std::filesystem::create_directories(opts.records_path.parent_path());
        }
        // Rewrite the restored records so that stale lines from another spec
        // do not survive.
        std::ostringstream restored;
        for (const auto &rs : results) {
            for (const auto &r : rs) {
                restored << r.to_json().dump() << '\n';
            }
        }
        write_file_atomic(opts.records_path, restored.str());
        sink.open(opts.records_path, std::ios::app);
        if (!sink) {
            throw Error("cannot open record file " + opts.records_path.string());
        }
    }

    std::size_t pending = 0;
    for (char d : done) {
        pending += d == 0 ? 1 : 0;
    }
    if (pending > 0) {
        const auto ctx = make_context(spec);
        std::atomic<std::size_t> next{0};
        std::atomic<std::size_t> finished{out.skipped};
        std::mutex sink_mutex;
        std::exception_ptr failure;
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) {
                    return;
                }
                if (done[i] != 0) {
                    continue;
                }
                {
                    std::lock_guard lock(sink_mutex);
                    if (failure) {
                        return;
                    }
                }
                try {
                    const auto t0 = std::chrono::steady_clock::now();
                    auto recs = run_task(ctx, tasks[i]);
                    const double wall =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                    for (auto &r : recs) {
                        r.wall_time = wall;
                    }
                    std::lock_guard lock(sink_mutex);
                    if (sink.is_open()) {
                        std::string block;
                        for (const auto &r : recs) {
                            block += r.to_json().dump() + "\n";
                        }
                        sink << block << std::flush;
                    }
                    results[i] = std::move(recs);
                    const auto count = ++finished;
                    if (opts.progress) {
                        opts.progress(count, tasks.size());
                    }
                } catch (...) {
                    std::lock_guard lock(sink_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    return;
                }
            }
        };
        const unsigned jobs = std::max(1U, std::min<unsigned>(opts.jobs, static_cast<unsigned>(pending)));
        std::vector<std::thread> pool;
        for (unsigned j = 1; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
        worker();
        for (auto &t : pool) {
            t.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }
    if (sink.is_open()) {
        sink.close();
    }

    for (auto &rs : results) {
        for (auto &r : rs) {
            out.records.push_back(std::move(r));
        }
    }
    std::sort(out.records.begin(), out.records.end(), record_less);
    if (!opts.records_path.empty()) {
        std::ostringstream canon;
        for (const auto &r : out.records) {
            canon << r.to_json().dump() << '\n';
        }
        write_file_atomic(opts.records_path, canon.str());
    }
    out.table = aggregate(out.records);
    add_impossible_cells(spec, out.table);
    return out;
}

std::vector<AggregateStats> sweep_eps_qubits(const SweepSpec &spec, const SweepOptions &opts) {
    require_scenario(spec, Scenario::ClosedLoopL63);
    return run_sweep(spec, opts).table;
}

std::vector<AggregateStats> sweep_crcm_regularization(const SweepSpec &spec, const SweepOptions &opts) {
    require_scenario(spec, Scenario::CrcmRegularization);
    return run_sweep(spec, opts).table;
}

std::vector<AggregateStats> sweep_pblocks(const SweepSpec &spec, const SweepOptions &opts) {
    require_scenario(spec, Scenario::PblockL8);
    return run_sweep(spec, opts).table;
}

std::vector<RunRecord> run_reduced_noisy(const SweepSpec &spec, const SweepOptions &opts) {
    require_scenario(spec, Scenario::ReducedNoisyL8);
    return run_sweep(spec, opts).records;
}

std::vector<RunRecord> benchmark_leakrate(const SweepSpec &spec, const SweepOptions &opts) {
    require_scenario(spec, Scenario::BenchmarkLeakrate);
    return run_sweep(spec, opts).records;
}

Reconstruction reduced_noisy_series(const SweepSpec &spec, std::size_t run_index) {
    require_scenario(spec, Scenario::ReducedNoisyL8);
    spec.validate();
    const auto data = lorenz_dataset(dynamics::Model::L8, spec);
    const auto inputs = label_columns(data.raw, {"A4", "B3"});
    std::map<std::string, double> params;
    for (const auto &[k, v] : spec.grid) {
        params[k] = v.front();
    }
    const auto envs = noisy_environments(spec, params, spec.base_seed + run_index, inputs.size());
    Reconstruction rec;
    rec.truth = denormalize_series(data.test(), data.norm);
    TimeSeries *slots[] = {&rec.exact, &rec.sampled, &rec.noisy};
    for (std::size_t e = 0; e < envs.size(); ++e) {
        reservoir::QuantumReservoir model(envs[e]);
        auto pred = open_loop(model, data, inputs, spec.washout, spec.ridge_gamma).prediction;
        pred.dt = spec.dt;
        pred.tau0 = rec.truth.tau0;
        *slots[e] = denormalize_series(pred, data.norm);
    }
    return rec;
}

OpCount opcount_estimate(int n, double xi, double n_res_classical) {
    if (n < 1 || n > 60) {
        throw ConfigError("opcount: n must lie in [1, 60]");
    }
    if (!(xi > 0.0)) {
        throw ConfigError("opcount: xi must be positive");
    }
    OpCount c;
    c.n = n;
    c.xi = xi;
    const double dim = std::ldexp(1.0, n);
    const double n_res = n_res_classical > 0.0 ? n_res_classical : dim;
    c.quantum = std::ldexp(1.0, 10 + n) * xi * n;
    c.classical = n_res * n_res;
    c.quantum_cheaper = c.quantum < c.classical;
    c.n_form_lhs = std::ldexp(1.0, 10) * xi * dim * std::log2(dim);
    c.n_form_rhs = dim * dim;
    c.n_form_true = c.n_form_lhs < c.n_form_rhs;
    return c;
}

std::optional<int> opcount_crossover(int n_min, int n_max, double xi) {
    for (int n = n_min; n <= n_max; ++n) {
        if (opcount_estimate(n, xi).quantum_cheaper) {
            return n;
        }
    }
    return std::nullopt;
}

TimeSeries normalize_series(const TimeSeries &series, const Normalization &norm) {
    norm.validate();
    detail::require(norm.size() == static_cast<std::size_t>(series.dof()), "normalize_series: width mismatch");
    TimeSeries out = series;
    for (Eigen::Index k = 0; k < series.dof(); ++k) {
        const double lo = norm.min[static_cast<std::size_t>(k)];
        const double span = norm.max[static_cast<std::size_t>(k)] - lo;
        out.data.col(k) = (series.data.col(k).array() - lo) / span;
    }
    return out;
}

TimeSeries denormalize_series(const TimeSeries &series, const Normalization &norm) {
    norm.validate();
    detail::require(norm.size() == static_cast<std::size_t>(series.dof()), "denormalize_series: width mismatch");
    TimeSeries out = series;
    for (Eigen::Index k = 0; k < series.dof(); ++k) {
        const double lo = norm.min[static_cast<std::size_t>(k)];
        const double span = norm.max[static_cast<std::size_t>(k)] - lo;
        out.data.col(k) = series.data.col(k).array() * span + lo;
    }
    return out;
}

std::string fnv1a_hex(const std::string &text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string code_version() { return QRC_VERSION; }

} // namespace qrc::experiments
