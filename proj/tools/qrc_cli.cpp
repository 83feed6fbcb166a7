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
#include "qrc/config.hpp"
#include "qrc/dynamics.hpp"
#include "qrc/error.hpp"
#include "qrc/experiments.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/timeseries.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Raised for problems the user can fix by changing the invocation.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Options shared by every command: a config file, key overrides and the
/// worker cap.
struct Common {
    std::string config_path;
    std::vector<std::string> assignments;
    unsigned jobs = 1;
};

/// Command-line shortcuts that map onto config keys. Only the ones given on
/// the command line are applied.
struct Shortcuts {
    std::vector<std::pair<std::string, std::string>> values;

    void add(CLI::App *cmd, const std::string &flag, const std::string &key, const std::string &help) {
        auto *slot = &storage.emplace_back();
        keys.push_back(key);
        cmd->add_option(flag, *slot, help + " (" + key + ")");
        flags.push_back(cmd->get_option(flag.substr(0, flag.find(','))));
    }

    void collect() {
        for (std::size_t i = 0; i < flags.size(); ++i) {
            if (flags[i]->count() > 0) {
                values.emplace_back(keys[i], storage[i]);
            }
        }
    }

  private:
    std::deque<std::string> storage;
    std::vector<std::string> keys;
    std::vector<CLI::Option *> flags;
};

/// Defaults, then the config file, then QRC_SEED, then command-line values.
qrc::config::RunConfig build_config(const Common &common, const Shortcuts &shortcuts) {
    auto cfg = common.config_path.empty() ? qrc::config::RunConfig{} : qrc::config::RunConfig::load(common.config_path);
    qrc::config::apply_seed_env(cfg);
    for (const auto &[k, v] : shortcuts.values) {
        cfg.set(k, v);
    }
    for (const auto &a : common.assignments) {
        cfg.set_assignment(a);
    }
    const auto &names = qrc::experiments::scenario_names();
    const auto scenario = cfg.get("sweep.scenario");
    if (scenario != "opcount" && std::find(names.begin(), names.end(), scenario) == names.end()) {
        std::string valid;
        for (const auto &n : names) {
            valid += n + ", ";
        }
        throw UsageError("unknown scenario '" + scenario + "' (valid: " + valid + "opcount)");
    }
    cfg.validate();
    return cfg;
}

void require_file(const std::string &path, const std::string &what) {
    if (path.empty()) {
        throw UsageError(what + " is required");
    }
    if (!fs::is_regular_file(path)) {
        throw UsageError(what + " not found: " + path);
    }
}

std::string to_text(const qrc::TimeSeries &s) {
    std::ostringstream os;
    qrc::write_csv(os, s);
    return os.str();
}

void write_json(const fs::path &path, const json &j) { qrc::write_file_atomic(path, j.dump(2) + "\n"); }

std::string fmt(double v) { return qrc::format_double(v); }

qrc::TimeSeries generate_series(const qrc::config::RunConfig &cfg) {
    const auto model = qrc::dynamics::parse_model(cfg.get("dynamics.model"));
    const auto opts = qrc::config::trajectory_options(cfg);
    switch (model) {
    case qrc::dynamics::Model::L63:
    case qrc::dynamics::Model::L8:
        return qrc::dynamics::lorenz_trajectory(model, qrc::config::convection_params(cfg), opts);
    case qrc::dynamics::Model::Narma2: {
        const auto s = qrc::dynamics::narma2_series({}, opts.steps + 1);
        qrc::TimeSeries ts;
        ts.dt = 1.0;
        ts.labels = {"u", "y"};
        ts.data.resize(static_cast<Eigen::Index>(s.u.size()), 2);
        for (std::size_t k = 0; k < s.u.size(); ++k) {
            ts.data(static_cast<Eigen::Index>(k), 0) = s.u[k];
            ts.data(static_cast<Eigen::Index>(k), 1) = s.y[k];
        }
        return ts;
    }
    case qrc::dynamics::Model::MackeyGlass:
        return qrc::dynamics::mackey_glass_series(qrc::config::mackey_glass_config(cfg), opts.steps + 1);
    }
    throw qrc::ContractViolation("unhandled model");
}

int cmd_generate(const qrc::config::RunConfig &cfg, const std::string &out_arg) {
    const auto series = generate_series(cfg);
    const fs::path out = out_arg.empty() ? fs::path(cfg.get("dynamics.model") + ".csv") : fs::path(out_arg);
    qrc::write_file_atomic(out, to_text(series));

    json meta;
    meta["model"] = cfg.get("dynamics.model");
    meta["rows"] = series.steps();
    meta["columns"] = series.labels;
    meta["dt"] = series.dt;
    meta["steps"] = cfg.count("dynamics.steps");
    meta["transient"] = cfg.count("dynamics.transient");
    meta["seed"] = cfg.count("dynamics.seed");
    json params;
    for (const auto &s : qrc::config::key_specs()) {
        if (s.key.rfind("dynamics.", 0) == 0 && s.key.find("lyapunov") == std::string::npos) {
            params[s.key.substr(9)] = cfg.get(s.key);
        }
    }
    meta["params"] = params;
    meta["code_version"] = qrc::experiments::code_version();
    write_json(fs::path(out.string() + ".json"), meta);
    std::cout << "wrote " << out.string() << " (" << series.steps() << " rows, " << series.dof() << " dof)\n";
    return 0;
}

std::vector<int> resolve_columns(const qrc::TimeSeries &data, const std::vector<std::string> &labels) {
    std::vector<int> cols;
    if (labels.empty()) {
        for (int j = 0; j < data.dof(); ++j) {
            cols.push_back(j);
        }
        return cols;
    }
    for (const auto &l : labels) {
        const int c = data.column_of(l);
        if (c < 0) {
            std::string have;
            for (const auto &h : data.labels) {
                have += (have.empty() ? "" : ", ") + h;
            }
            throw qrc::ConfigError("training.inputs: no column '" + l + "' (columns: " + have + ")");
        }
        cols.push_back(c);
    }
    return cols;
}

int cmd_train(const qrc::config::RunConfig &cfg, const std::string &data_path, const std::string &out_arg) {
    require_file(data_path, "--data");
    const auto raw = qrc::read_csv(fs::path(data_path));
    const auto cols = resolve_columns(raw, cfg.strings("training.inputs"));
    const auto scenario = cfg.get("training.scenario");
    if (scenario == "closed_loop" && static_cast<Eigen::Index>(cols.size()) != raw.dof()) {
        throw qrc::ConfigError("closed_loop training feeds predictions back, so training.inputs must be empty "
                               "(all columns)");
    }
    auto train_steps = static_cast<Eigen::Index>(cfg.count("training.train_steps"));
    if (train_steps == 0) {
        train_steps = raw.steps() - 1;
    }
    if (train_steps + 1 > raw.steps()) {
        throw qrc::ConfigError("training.train_steps = " + std::to_string(train_steps) + " needs " +
                               std::to_string(train_steps + 1) + " rows, " + data_path + " has " +
                               std::to_string(raw.steps()));
    }
    const auto washout = cfg.count("training.washout");
    if (washout + 1 > static_cast<std::size_t>(train_steps)) {
        throw qrc::ConfigError("training.washout leaves no training columns");
    }

    qrc::reservoir::TrainedModel m;
    m.kind = cfg.get("model.kind");
    m.scenario = scenario;
    m.input_columns = cols;
    m.labels = raw.labels;
    m.dt = raw.dt;
    m.train_rows = static_cast<std::size_t>(train_steps + 1);
    auto train = raw.slice(0, train_steps + 1);
    if (cfg.flag("training.normalize")) {
        m.data_normalization = qrc::reservoir::Normalization::fit(train.data);
        train = qrc::experiments::normalize_series(train, *m.data_normalization);
    }
    if (m.kind == "qrcm") {
        auto q = qrc::config::qrc_config(cfg, cols.size());
        if (!m.data_normalization) {
            q.normalization = qrc::reservoir::Normalization::fit(train.columns(cols).data);
        }
        q.validate();
        m.qrc = q;
    } else {
        m.crc = qrc::config::crc_config(cfg, cols.size());
    }
    const auto reservoir = m.make_reservoir();
    const auto trace = qrc::reservoir::collect_trace(*reservoir, train, washout, cols);
    const double gamma = cfg.number("training.gamma");
    try {
        m.weights = qrc::reservoir::ridge_fit(trace, gamma);
    } catch (const qrc::SingularSystemError &e) {
        std::cerr << "qrc: " << e.what() << "\n"
                  << "advice: the ridge system is singular at training.gamma = " << fmt(gamma)
                  << "; rerun with a small positive value, e.g. --set training.gamma=1e-8\n";
        return kExitRuntime;
    }
    m.end_state = trace.end_state;
    m.train_mse = (m.weights.w_out * trace.states - trace.targets).colwise().squaredNorm().mean();

    const fs::path out = out_arg.empty() ? fs::path("model.json") : fs::path(out_arg);
    write_json(out, qrc::reservoir::to_json(m));
    std::cout << "wrote " << out.string() << " (" << m.kind << ", " << scenario << ", "
              << trace.states.cols() << " training columns, state dim " << trace.states.rows() << ")\n"
              << "training mse" << (m.data_normalization ? " (normalized units)" : "") << ": " << fmt(m.train_mse)
              << "\n";
    return 0;
}

qrc::reservoir::TrainedModel load_model(const std::string &path) {
    require_file(path, "--model");
    std::ifstream in(path);
    const auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw qrc::ConfigError(path + ": not a JSON model file");
    }
    try {
        return qrc::reservoir::model_from_json(j);
    } catch (const qrc::Error &e) {
        throw qrc::ConfigError(path + ": " + e.what());
    }
}

/// Rows of `data` starting at `first`, in model units.
qrc::TimeSeries continuation(const qrc::TimeSeries &data, const qrc::reservoir::TrainedModel &m, Eigen::Index first,
                             Eigen::Index max_rows) {
    if (data.labels != m.labels) {
        throw qrc::ConfigError("data columns do not match the columns the model was trained on");
    }
    if (first >= data.steps()) {
        throw qrc::ConfigError("data has " + std::to_string(data.steps()) + " rows; nothing after row " +
                               std::to_string(first));
    }
    auto s = data.slice(first, std::min(max_rows, data.steps() - first));
    return m.data_normalization ? qrc::experiments::normalize_series(s, *m.data_normalization) : s;
}

qrc::TimeSeries to_data_units(const qrc::TimeSeries &s, const qrc::reservoir::TrainedModel &m) {
    return m.data_normalization ? qrc::experiments::denormalize_series(s, *m.data_normalization) : s;
}

Eigen::Index first_row(long from_row, const qrc::reservoir::TrainedModel &m) {
    return from_row >= 0 ? static_cast<Eigen::Index>(from_row) : static_cast<Eigen::Index>(m.train_rows);
}

int cmd_predict(const qrc::config::RunConfig &cfg, const std::string &model_path, const std::string &data_path,
                long from_row, const std::string &out_arg) {
    const auto m = load_model(model_path);
    if (m.scenario != "closed_loop") {
        throw UsageError(model_path + " is an open_loop model; use `qrc reconstruct` for it");
    }
    if (!data_path.empty()) {
        require_file(data_path, "--data");
    }
    const auto reservoir = m.make_reservoir();
    const auto steps = cfg.count("predict.steps");
    auto pred = qrc::reservoir::closed_loop_predict(*reservoir, m.weights, m.end_state, steps, m.dt, m.labels);
    pred.tau0 = m.dt * static_cast<double>(m.train_rows);

    std::optional<qrc::TimeSeries> truth;
    if (!data_path.empty()) {
        const auto data = qrc::read_csv(fs::path(data_path));
        const auto first = first_row(from_row, m);
        truth = continuation(data, m, first, static_cast<Eigen::Index>(steps));
        pred.tau0 = data.tau(first);
    }
    const auto pred_out = to_data_units(pred, m);
    const fs::path out = out_arg.empty() ? fs::path("prediction.csv") : fs::path(out_arg);
    qrc::write_file_atomic(out, to_text(pred_out));
    std::cout << "wrote " << out.string() << " (" << pred.steps() << " steps)\n";
    if (!truth) {
        return 0;
    }
    const auto rows = truth->steps();
    const Eigen::MatrixXd p = pred.data.topRows(rows);
    std::cout << "compared rows: " << rows << "\n"
              << "mse" << (m.data_normalization ? " (normalized units)" : "") << ": "
              << fmt(qrc::reservoir::mse(p, truth->data)) << "\n";
    const Eigen::MatrixXd p_raw = pred_out.data.topRows(rows);
    const auto truth_raw = to_data_units(*truth, m);
    const auto h = qrc::reservoir::prediction_horizon(p_raw, truth_raw.data, cfg.number("predict.threshold"));
    std::cout << "horizon: " << h << " steps";
    const double lyap = cfg.number("predict.lyapunov");
    if (lyap > 0.0) {
        std::cout << " = " << fmt(static_cast<double>(h) * m.dt * lyap) << " Lyapunov times";
    }
    std::cout << "\n";
    return 0;
}

int cmd_reconstruct(const std::string &model_path, const std::string &data_path, long from_row,
                    const std::string &out_arg) {
    const auto m = load_model(model_path);
    if (m.scenario != "open_loop") {
        throw UsageError(model_path + " is a closed_loop model; use `qrc predict` for it");
    }
    require_file(data_path, "--data");
    const auto data = qrc::read_csv(fs::path(data_path));
    const auto first = first_row(from_row, m);
    const auto test = continuation(data, m, first, data.steps());
    const auto reservoir = m.make_reservoir();
    auto rec = qrc::reservoir::open_loop_reconstruct(*reservoir, m.weights, m.end_state, test.columns(m.input_columns),
                                                     m.labels);
    const fs::path out = out_arg.empty() ? fs::path("reconstruction.csv") : fs::path(out_arg);
    qrc::write_file_atomic(out, to_text(to_data_units(rec, m)));
    std::cout << "wrote " << out.string() << " (" << rec.steps() << " steps)\n"
              << "mse" << (m.data_normalization ? " (normalized units)" : "") << ": "
              << fmt(qrc::reservoir::mse(rec.data, test.data)) << "\n";
    for (Eigen::Index j = 0; j < rec.dof(); ++j) {
        const Eigen::VectorXd a = rec.data.col(j).array() - rec.data.col(j).mean();
        const Eigen::VectorXd b = test.data.col(j).array() - test.data.col(j).mean();
        const double den = a.norm() * b.norm();
        std::cout << "  " << m.labels[static_cast<std::size_t>(j)] << ": mse "
                  << fmt((rec.data.col(j) - test.data.col(j)).squaredNorm() / static_cast<double>(rec.steps()))
                  << ", corr " << (den > 0.0 ? fmt(a.dot(b) / den) : std::string("nan")) << "\n";
    }
    return 0;
}

std::string param_text(const std::map<std::string, double> &params) {
    std::string s;
    for (const auto &[k, v] : params) {
        s += (s.empty() ? "" : " ") + k + "=" + fmt(v);
    }
    return s;
}

void print_table(const std::vector<qrc::experiments::AggregateStats> &table) {
    std::size_t w = 6;
    for (const auto &row : table) {
        w = std::max(w, row.variant.size() + 1 + param_text(row.params).size());
    }
    std::cout << std::left << std::setw(static_cast<int>(w)) << "cell" << "  " << std::setw(7) << "count"
              << std::setw(9) << "diverged" << std::setw(14) << "median" << std::setw(14) << "mean"
              << "std\n";
    for (const auto &row : table) {
        std::cout << std::left << std::setw(static_cast<int>(w)) << (row.variant + " " + param_text(row.params))
                  << "  ";
        if (row.impossible) {
            std::cout << "impossible (p > n)\n";
            continue;
        }
        std::ostringstream med, mean, sd;
        med << std::setprecision(6) << row.median;
        mean << std::setprecision(6) << row.mean;
        sd << std::setprecision(6) << row.std;
        std::cout << std::setw(7) << row.count << std::setw(9) << row.diverged << std::setw(14) << med.str()
                  << std::setw(14) << mean.str() << sd.str() << "\n";
    }
}

int cmd_opcount(const qrc::config::RunConfig &cfg, const fs::path &out_dir) {
    const double xi = cfg.number("sweep.xi");
    const auto ns = cfg.numbers("sweep.opcount_n");
    if (ns.empty()) {
        throw qrc::ConfigError("sweep.opcount_n is empty");
    }
    std::ostringstream csv;
    csv << "n,xi,quantum,classical,quantum_cheaper,n_form_lhs,n_form_rhs,n_form_true\n";
    std::optional<int> first;
    for (double nd : ns) {
        const int n = static_cast<int>(nd);
        if (n < 1 || n > 64) {
            throw qrc::ConfigError("sweep.opcount_n entries must lie in [1, 64]");
        }
        const auto c = qrc::experiments::opcount_estimate(n, xi);
        csv << c.n << ',' << fmt(c.xi) << ',' << fmt(c.quantum) << ',' << fmt(c.classical) << ','
            << (c.quantum_cheaper ? "true" : "false") << ',' << fmt(c.n_form_lhs) << ',' << fmt(c.n_form_rhs) << ','
            << (c.n_form_true ? "true" : "false") << '\n';
        if (c.quantum_cheaper && !first) {
            first = n;
        }
    }
    fs::create_directories(out_dir);
    qrc::write_file_atomic(out_dir / "opcount.csv", csv.str());
    std::cout << "wrote " << (out_dir / "opcount.csv").string() << "\n";
    if (first) {
        std::cout << "crossover: 2^(10+n) xi n < 2^(2n) first holds at n = " << *first << " (xi = " << fmt(xi) << ")\n";
    } else {
        std::cout << "crossover: inequality false for every scanned n (xi = " << fmt(xi) << ")\n";
    }
    return 0;
}

int cmd_sweep(const qrc::config::RunConfig &cfg, const Common &common, const std::string &out_arg, bool resume,
              bool series) {
    const auto scenario = cfg.get("sweep.scenario");
    const fs::path out_dir = out_arg.empty() ? fs::path("sweep-" + scenario) : fs::path(out_arg);
    if (scenario == "opcount") {
        return cmd_opcount(cfg, out_dir);
    }
    const auto spec = qrc::config::sweep_spec(cfg);
    fs::create_directories(out_dir);
    qrc::write_file_atomic(out_dir / "config.ini", cfg.dump());

    qrc::experiments::SweepOptions opts;
    opts.jobs = std::max(1U, common.jobs);
    opts.records_path = out_dir / "records.ndjson";
    opts.resume = resume;
    if (isatty(STDERR_FILENO) != 0) {
        opts.progress = [](std::size_t done, std::size_t total) {
            std::cerr << "\r" << done << "/" << total << " runs" << (done == total ? "\n" : "") << std::flush;
        };
    }
    const auto result = qrc::experiments::run_sweep(spec, opts);
    qrc::write_file_atomic(out_dir / "aggregate.csv", qrc::experiments::aggregate_csv(result.table));

    std::set<std::string> metrics;
    bool horizon = false;
    for (const auto &r : result.records) {
        horizon = horizon || r.horizon.has_value();
        for (const auto &[k, v] : r.metrics) {
            metrics.insert(k);
        }
    }
    if (horizon) {
        metrics.insert("horizon");
    }
    for (const auto &k : metrics) {
        qrc::write_file_atomic(out_dir / ("aggregate_" + k + ".csv"),
                               qrc::experiments::aggregate_csv(qrc::experiments::aggregate(result.records, k)));
    }
    if (series && spec.scenario == qrc::experiments::Scenario::ReducedNoisyL8) {
        const auto rec = qrc::experiments::reduced_noisy_series(spec, 0);
        qrc::TimeSeries all = rec.truth;
        const auto n = rec.truth.dof();
        all.data.conservativeResize(Eigen::NoChange, 4 * n);
        all.data.middleCols(n, n) = rec.exact.data;
        all.data.middleCols(2 * n, n) = rec.sampled.data;
        all.data.rightCols(n) = rec.noisy.data;
        std::vector<std::string> labels;
        for (const auto *prefix : {"truth_", "exact_", "sampled_", "noisy_"}) {
            for (const auto &l : rec.truth.labels) {
                labels.push_back(prefix + l);
            }
        }
        all.labels = labels;
        qrc::write_file_atomic(out_dir / "series_run0.csv", to_text(all));
    }

    std::cout << "scenario " << scenario << ": " << result.records.size() << " runs (" << result.skipped
              << " restored), records in " << opts.records_path.string() << "\n\n";
    std::cout << "mse\n";
    print_table(result.table);
    if (horizon) {
        std::cout << "\nhorizon (Lyapunov times)\n";
        print_table(qrc::experiments::aggregate(result.records, "horizon"));
    }
    return 0;
}

int cmd_lyapunov(const qrc::config::RunConfig &cfg, bool as_json) {
    const auto model = qrc::dynamics::parse_model(cfg.get("dynamics.model"));
    if (model != qrc::dynamics::Model::L63 && model != qrc::dynamics::Model::L8) {
        throw qrc::ConfigError("lyapunov needs dynamics.model = l63 or l8");
    }
    const auto params = qrc::config::convection_params(cfg);
    const auto rhs = model == qrc::dynamics::Model::L63 ? qrc::dynamics::lorenz63(params) : qrc::dynamics::lorenz8(params);
    auto traj_opts = qrc::config::trajectory_options(cfg);
    traj_opts.steps = 1;
    const auto start = qrc::dynamics::lorenz_trajectory(model, params, traj_opts);
    qrc::dynamics::LyapunovOptions o;
    o.dt = traj_opts.dt;
    o.total_steps = cfg.count("dynamics.lyapunov_steps");
    o.transient_steps = cfg.count("dynamics.lyapunov_transient");
    o.renorm_interval = cfg.count("dynamics.lyapunov_renorm");
    o.perturbation = cfg.number("dynamics.lyapunov_perturbation");
    const Eigen::VectorXd x0 = start.data.row(0).transpose();
    const auto r = qrc::dynamics::largest_lyapunov(rhs, std::span<const double>(x0.data(), static_cast<std::size_t>(x0.size())), o);
    if (as_json) {
        json j{{"model", cfg.get("dynamics.model")}, {"lambda1", r.lambda1},   {"lyapunov_time", 1.0 / r.lambda1},
               {"dt", o.dt},                        {"steps", o.total_steps}, {"transient", r.transient_steps},
               {"renorm_interval", r.renorm_interval}, {"seed", traj_opts.seed}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "lambda1 = " << fmt(r.lambda1) << "\nlyapunov time = " << fmt(1.0 / r.lambda1) << "\n";
    }
    return 0;
}

int run(int argc, char **argv) {
    CLI::App app{"Hybrid quantum-classical reservoir computing for Lorenz-type convection models."};
    app.require_subcommand(1);
    app.footer("Config keys (section.key = default):\n" + qrc::config::reference_text() +
               "\nQRC_SEED overrides sweep.base_seed, model.seed and dynamics.seed.\n"
               "Exit codes: 0 success, 1 runtime error, 2 usage or validation error.");

    Common common;
    auto add_common = [&](CLI::App *cmd) {
        cmd->add_option("-c,--config", common.config_path, "INI config file");
        cmd->add_option("--set", common.assignments, "override a config key, key=value (repeatable)");
    };

    Shortcuts sc;
    std::string out;
    std::string data;
    std::string model_path;
    long from_row = -1;

    auto *gen = app.add_subcommand("generate", "integrate a model and write a CSV plus a JSON sidecar");
    add_common(gen);
    sc.add(gen, "--model", "dynamics.model", "l63 | l8 | narma2 | mackey_glass");
    sc.add(gen, "--steps", "dynamics.steps", "recorded steps");
    sc.add(gen, "--dt", "dynamics.dt", "RK4 step");
    sc.add(gen, "--transient", "dynamics.transient", "discarded steps");
    sc.add(gen, "--seed", "dynamics.seed", "initial-condition seed");
    gen->add_option("-o,--out", out, "output CSV (default <model>.csv)");

    auto *train = app.add_subcommand("train", "train a QRCM or CRCM readout on a CSV series");
    add_common(train);
    train->add_option("--data", data, "training CSV")->required();
    sc.add(train, "--kind", "model.kind", "qrcm | crcm");
    sc.add(train, "--scenario", "training.scenario", "closed_loop | open_loop");
    sc.add(train, "--inputs", "training.inputs", "input column labels");
    sc.add(train, "--gamma", "training.gamma", "ridge parameter");
    sc.add(train, "--n", "model.n", "qubits");
    sc.add(train, "--eps", "model.eps", "leaking rate");
    train->add_option("-o,--out", out, "model file (default model.json)");

    auto *pred = app.add_subcommand("predict", "closed-loop prediction from a trained model");
    add_common(pred);
    pred->add_option("--model", model_path, "trained model JSON")->required();
    pred->add_option("--data", data, "ground-truth CSV for MSE and horizon");
    pred->add_option("--from-row", from_row, "first ground-truth row (default: row after training)");
    sc.add(pred, "--steps", "predict.steps", "prediction steps");
    sc.add(pred, "--lyapunov", "predict.lyapunov", "largest Lyapunov exponent for horizon units");
    sc.add(pred, "--threshold", "predict.threshold", "horizon error threshold");
    pred->add_option("-o,--out", out, "output CSV (default prediction.csv)");

    auto *recon = app.add_subcommand("reconstruct", "open-loop reconstruction from continually available inputs");
    add_common(recon);
    recon->add_option("--model", model_path, "trained model JSON")->required();
    recon->add_option("--data", data, "CSV holding the input columns and the ground truth")->required();
    recon->add_option("--from-row", from_row, "first row to reconstruct (default: row after training)");
    recon->add_option("-o,--out", out, "output CSV (default reconstruction.csv)");

    bool resume = false;
    bool series = false;
    auto *sweep = app.add_subcommand("sweep", "run a scenario grid over seeds; NDJSON records and CSV aggregates");
    add_common(sweep);
    sc.add(sweep, "--scenario", "sweep.scenario", "scenario name");
    sc.add(sweep, "--seeds", "sweep.seeds", "realizations per cell");
    sc.add(sweep, "--xi", "sweep.xi", "opcount gate factor");
    std::string n_range;
    sweep->add_option("--n", n_range, "qubit list or range, e.g. 4,6 or 1..32 (grid.n; sweep.opcount_n for opcount)");
    sweep->add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
    sweep->add_flag("--resume", resume, "skip runs already present in the record file");
    sweep->add_flag("--series", series, "reduced_noisy_l8: also write the run-0 reconstructions");
    sweep->add_option("-o,--out", out, "output directory (default sweep-<scenario>)");

    bool as_json = false;
    auto *lyap = app.add_subcommand("lyapunov", "largest Lyapunov exponent of l63 or l8");
    add_common(lyap);
    sc.add(lyap, "--model", "dynamics.model", "l63 | l8");
    sc.add(lyap, "--dt", "dynamics.dt", "RK4 step");
    sc.add(lyap, "--steps", "dynamics.lyapunov_steps", "steps after the transient");
    sc.add(lyap, "--seed", "dynamics.seed", "initial-condition seed");
    lyap->add_flag("--json", as_json, "print JSON");

    auto *conf = app.add_subcommand("config", "print the effective config as a commented INI file");
    add_common(conf);
    conf->add_option("-o,--out", out, "write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    sc.collect();
    if (sweep->parsed() && !n_range.empty()) {
        const bool opcount = std::any_of(sc.values.begin(), sc.values.end(), [](const auto &kv) {
            return kv.first == "sweep.scenario" && kv.second == "opcount";
        });
        sc.values.emplace_back(opcount ? "sweep.opcount_n" : "grid.n", n_range);
    }
    const auto cfg = build_config(common, sc);

    if (gen->parsed()) {
        return cmd_generate(cfg, out);
    }
    if (train->parsed()) {
        return cmd_train(cfg, data, out);
    }
    if (pred->parsed()) {
        return cmd_predict(cfg, model_path, data, from_row, out);
    }
    if (recon->parsed()) {
        return cmd_reconstruct(model_path, data, from_row, out);
    }
    if (sweep->parsed()) {
        return cmd_sweep(cfg, common, out, resume, series);
    }
    if (lyap->parsed()) {
        return cmd_lyapunov(cfg, as_json);
    }
    if (out.empty()) {
        std::cout << cfg.dump();
    } else {
        qrc::write_file_atomic(out, cfg.dump());
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError &e) {
        std::cerr << "qrc: " << e.what() << "\n";
        return kExitUsage;
    } catch (const qrc::ConfigError &e) {
        std::cerr << "qrc: " << e.what() << "\n";
        return kExitUsage;
    } catch (const qrc::ParseError &e) {
        std::cerr << "qrc: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "qrc: " << e.what() << "\n";
        return kExitRuntime;
    }
}
