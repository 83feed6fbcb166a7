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
#include "qrc/reservoir.hpp"

#include "qrc/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace qrc::reservoir {

Normalization Normalization::fit(const Eigen::MatrixXd &data) {
    Normalization norm;
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        norm.min.push_back(data.col(j).minCoeff());
        norm.max.push_back(data.col(j).maxCoeff());
    }
    return norm;
}

void Normalization::validate() const {
    if (min.size() != max.size()) {
        throw ConfigError("normalization: min/max length mismatch");
    }
    for (std::size_t i = 0; i < min.size(); ++i) {
        if (!(max[i] > min[i])) {
            throw ConfigError("normalization: degenerate range for component " + std::to_string(i));
        }
    }
}

std::vector<double> normalize_inputs(std::span<const double> x, const Normalization &norm) {
    if (x.size() != norm.size()) {
        throw ContractViolation("normalize_inputs: expected " + std::to_string(norm.size()) + " components, got " +
                                std::to_string(x.size()));
    }
    norm.validate();
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::clamp((x[i] - norm.min[i]) / (norm.max[i] - norm.min[i]), 0.0, 1.0);
    }
    return out;
}

QrcConfig QrcConfig::make(int n, double eps, std::uint64_t seed) {
    QrcConfig cfg;
    cfg.n = n;
    cfg.eps = eps;
    cfg.seed = seed;
    std::mt19937_64 rng(qsim::derive_seed(seed, 0xbe7a));
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    cfg.beta.resize(static_cast<std::size_t>(n));
    for (auto &b : cfg.beta) {
        b = angle(rng);
    }
    return cfg;
}

QrcConfig QrcConfig::make_reduced(int n, double eps, std::uint64_t seed, int n_selected) {
    auto cfg = make(n, eps, seed);
    cfg.reduced = true;
    const int dim = 1 << n;
    std::vector<int> all(static_cast<std::size_t>(dim));
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(qsim::derive_seed(seed, 0x5e1ec7));
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(static_cast<std::size_t>(std::min(n_selected, dim)));
    std::sort(all.begin(), all.end());
    cfg.selected_indices = std::move(all);
    return cfg;
}

void QrcConfig::validate() const {
    if (n < 1 || n > 20) {
        throw ConfigError("qrcm: qubit count must lie in [1, 20]");
    }
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw ConfigError("qrcm: leaking rate must lie in [0, 1]");
    }
    if (beta.size() != static_cast<std::size_t>(n)) {
        throw ConfigError("qrcm: beta must hold one angle per qubit");
    }
    const int dim = 1 << n;
    std::vector<int> sorted(selected_indices);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ConfigError("qrcm: selected indices must be distinct");
    }
    for (int k : sorted) {
        if (k < 0 || k >= dim) {
            throw ConfigError("qrcm: selected index out of range");
        }
    }
    if (block_size < 0 || block_size > n) {
        throw ConfigError("qrcm: block size must lie in [0, n]");
    }
    if (block_size > 0 && block_size < n && !reduced) {
        throw ConfigError("qrcm: block decomposition requires the reduced circuit");
    }
    if (!noise.is_noiseless() && shots == 0) {
        throw ConfigError("qrcm: noise simulation requires shots > 0");
    }
    noise.validate();
    normalization.validate();
}

QrcState QrcState::initial(int n) {
    QrcState s;
    s.p.assign(std::size_t{1} << n, 0.0);
    s.p[0] = 1.0;
    return s;
}

QrcState qrcm_step(const QrcState &state, std::span<const double> x_raw, const QrcConfig &cfg) {
    const std::size_t dim = std::size_t{1} << cfg.n;
    if (state.p.size() != dim) {
        throw ContractViolation("qrcm_step: probability vector has the wrong length");
    }
    const auto x = normalize_inputs(x_raw, cfg.normalization);
    const std::uint64_t step_seed = qsim::derive_seed(cfg.seed, state.step);

    qsim::ProbVector fresh;
    if (cfg.reduced) {
        std::vector<double> selected;
        selected.reserve(cfg.selected_indices.size());
        for (int k : cfg.selected_indices) {
            selected.push_back(state.p[static_cast<std::size_t>(k)]);
        }
        if (cfg.block_size > 0 && cfg.block_size < cfg.n) {
            std::vector<double> angles;
            angles.reserve(selected.size() + x.size());
            for (double v : selected) {
                angles.push_back(cfg.input_scale * v);
            }
            for (double v : x) {
                angles.push_back(cfg.input_scale * v);
            }
            fresh = qsim::run_blocked_circuit(qsim::BlockPartition::make(cfg.n, cfg.block_size), angles);
            if (cfg.shots > 0) {
                fresh = qsim::sample_distribution(fresh, cfg.shots, step_seed);
            }
        } else {
            const auto circuit = qsim::build_reduced_circuit(cfg.n, selected, x, cfg.input_scale);
            fresh = cfg.shots == 0 ? qsim::exact_probabilities(qsim::run_circuit(circuit))
                                   : qsim::noisy_run(circuit, cfg.noise, cfg.shots, step_seed);
        }
    } else {
        const auto circuit = qsim::build_reservoir_circuit(cfg.n, state.p, x, cfg.beta, cfg.input_scale);
        fresh = cfg.shots == 0 ? qsim::exact_probabilities(qsim::run_circuit(circuit))
                               : qsim::noisy_run(circuit, cfg.noise, cfg.shots, step_seed);
    }

    QrcState next;
    next.step = state.step + 1;
    next.p.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        next.p[k] = (1.0 - cfg.eps) * state.p[k] + cfg.eps * fresh[k];
    }
    return next;
}

CrcConfig CrcConfig::make(int n_res, int n_in, double eps, double density, double spectral_radius_target,
                          std::uint64_t seed) {
    if (n_res < 1 || n_in < 1) {
        throw ConfigError("crcm: reservoir and input dimensions must be positive");
    }
    if (!(density > 0.0 && density <= 1.0)) {
        throw ConfigError("crcm: density must lie in (0, 1]");
    }
    if (!(spectral_radius_target > 0.0)) {
        throw ConfigError("crcm: spectral radius must be positive");
    }
    CrcConfig cfg;
    cfg.n_res = n_res;
    cfg.n_in = n_in;
    cfg.eps = eps;
    cfg.density = density;
    cfg.spectral_radius = spectral_radius_target;
    cfg.seed = seed;

    std::mt19937_64 rng(qsim::derive_seed(seed, 0xc1a55));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    cfg.w_in.resize(n_res, n_in);
    for (Eigen::Index i = 0; i < cfg.w_in.rows(); ++i) {
        for (Eigen::Index j = 0; j < cfg.w_in.cols(); ++j) {
            cfg.w_in(i, j) = uni(rng);
        }
    }

    const std::size_t cells = static_cast<std::size_t>(n_res) * static_cast<std::size_t>(n_res);
    const auto nnz = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(density * static_cast<double>(cells))));
    std::vector<std::size_t> positions(cells);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    // Partial Fisher-Yates: the first nnz entries are a uniform random subset.
    for (std::size_t i = 0; i < nnz; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, cells - 1);
        std::swap(positions[i], positions[pick(rng)]);
    }
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n_res, n_res);
    for (std::size_t i = 0; i < nnz; ++i) {
        dense(static_cast<Eigen::Index>(positions[i] / static_cast<std::size_t>(n_res)),
              static_cast<Eigen::Index>(positions[i] % static_cast<std::size_t>(n_res))) = uni(rng);
    }
    const double rho = reservoir::spectral_radius(dense);
    if (!(rho > 0.0)) {
        throw NumericRangeError("crcm: reservoir matrix has zero spectral radius; increase density");
    }
    dense *= spectral_radius_target / rho;
    cfg.w_r = dense.sparseView();
    return cfg;
}

void CrcConfig::validate() const {
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw ConfigError("crcm: leaking rate must lie in [0, 1]");
    }
    if (w_in.rows() != n_res || w_in.cols() != n_in || w_r.rows() != n_res || w_r.cols() != n_res) {
        throw ConfigError("crcm: weight matrices do not match the configured dimensions");
    }
}

double spectral_radius(const Eigen::MatrixXd &m) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    if (solver.info() != Eigen::Success) {
        throw NumericRangeError("spectral_radius: eigensolver did not converge");
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::VectorXd crcm_step(const Eigen::VectorXd &psi, std::span<const double> x, const CrcConfig &cfg) {
    if (psi.size() != cfg.n_res || x.size() != static_cast<std::size_t>(cfg.n_in)) {
        throw ContractViolation("crcm_step: dimension mismatch");
    }
    const Eigen::Map<const Eigen::VectorXd> input(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::VectorXd pre = cfg.w_in * input;
    pre.noalias() += cfg.w_r * psi;
    return (1.0 - cfg.eps) * psi + cfg.eps * pre.array().tanh().matrix();
}

QuantumReservoir::QuantumReservoir(QrcConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

Eigen::Index QuantumReservoir::state_dim() const { return Eigen::Index{1} << cfg_.n; }

Eigen::Index QuantumReservoir::input_dim() const { return static_cast<Eigen::Index>(cfg_.normalization.size()); }

ReservoirState QuantumReservoir::initial_state() const {
    const auto s = QrcState::initial(cfg_.n);
    return {Eigen::Map<const Eigen::VectorXd>(s.p.data(), state_dim()), 0};
}

void QuantumReservoir::advance(ReservoirState &state, std::span<const double> x) const {
    QrcState s{qsim::ProbVector(state.v.data(), state.v.data() + state.v.size()), state.step};
    auto next = qrcm_step(s, x, cfg_);
    state.v = Eigen::Map<const Eigen::VectorXd>(next.p.data(), state_dim());
    state.step = next.step;
}

ClassicalReservoir::ClassicalReservoir(CrcConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

ReservoirState ClassicalReservoir::initial_state() const { return {Eigen::VectorXd::Zero(cfg_.n_res), 0}; }

void ClassicalReservoir::advance(ReservoirState &state, std::span<const double> x) const {
    state.v = crcm_step(state.v, x, cfg_);
    ++state.step;
}

namespace {

std::vector<double> pick(const Eigen::MatrixXd &data, Eigen::Index row, const std::vector<int> &cols) {
    std::vector<double> out(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out[j] = data(row, cols[j]);
    }
    return out;
}

std::vector<int> all_columns(Eigen::Index n) {
    std::vector<int> cols(static_cast<std::size_t>(n));
    std::iota(cols.begin(), cols.end(), 0);
    return cols;
}

} // namespace

ReservoirTrace collect_trace(const Reservoir &model, const TimeSeries &series, std::size_t washout,
                             const std::vector<int> &input_cols, const std::vector<int> &target_cols) {
    const auto rows = static_cast<std::size_t>(series.steps());
    if (rows < washout + 2) {
        throw ConfigError("collect_trace: series of " + std::to_string(rows) + " rows is too short for washout " +
                          std::to_string(washout));
    }
    if (static_cast<Eigen::Index>(input_cols.size()) != model.input_dim()) {
        throw ConfigError("collect_trace: input column count does not match the reservoir input dimension");
    }
    for (int c : input_cols) {
        if (c < 0 || c >= series.dof()) {
            throw ConfigError("collect_trace: input column " + std::to_string(c) + " missing from series");
        }
    }
    const auto targets = target_cols.empty() ? all_columns(series.dof()) : target_cols;
    const auto cols = static_cast<Eigen::Index>(rows - 1 - washout);
    ReservoirTrace trace;
    trace.states.resize(model.state_dim(), cols);
    trace.targets.resize(static_cast<Eigen::Index>(targets.size()), cols);
    auto state = model.initial_state();
    for (std::size_t t = 0; t + 1 < rows; ++t) {
        model.advance(state, pick(series.data, static_cast<Eigen::Index>(t), input_cols));
        if (t >= washout) {
            const auto c = static_cast<Eigen::Index>(t - washout);
            trace.states.col(c) = state.v;
            for (std::size_t j = 0; j < targets.size(); ++j) {
                trace.targets(static_cast<Eigen::Index>(j), c) = series.data(static_cast<Eigen::Index>(t + 1), targets[j]);
            }
        }
    }
    model.advance(state, pick(series.data, static_cast<Eigen::Index>(rows - 1), input_cols));
    trace.end_state = std::move(state);
    return trace;
}

OutputWeights ridge_fit(const ReservoirTrace &trace, double gamma) {
    if (!(gamma >= 0.0)) {
        throw ConfigError("ridge_fit: gamma must be >= 0");
    }
    const auto &R = trace.states;
    const auto &U = trace.targets;
    if (R.cols() != U.cols() || R.cols() == 0) {
        throw ContractViolation("ridge_fit: states and targets must have the same, non-zero column count");
    }
    OutputWeights out;
    out.ridge_gamma = gamma;
    if (gamma > 0.0) {
        Eigen::MatrixXd gram = R * R.transpose();
        gram.diagonal().array() += gamma;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success) {
            throw SingularSystemError("ridge_fit: factorisation failed; increase ridge_gamma");
        }
        out.w_out = ldlt.solve(R * U.transpose()).transpose();
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(R.transpose());
        if (qr.rank() < R.rows()) {
            throw SingularSystemError("ridge_fit: reservoir states are rank deficient (rank " +
                                      std::to_string(qr.rank()) + " < " + std::to_string(R.rows()) +
                                      "); use ridge_gamma > 0");
        }
        out.w_out = qr.solve(U.transpose()).transpose();
    }
    if (!out.w_out.allFinite()) {
        throw SingularSystemError("ridge_fit: non-finite weights; increase ridge_gamma");
    }
    return out;
}

double ridge_cost(const ReservoirTrace &trace, const Eigen::MatrixXd &w_out, double gamma) {
    return (w_out * trace.states - trace.targets).squaredNorm() + gamma * w_out.squaredNorm();
}

Eigen::VectorXd readout(const OutputWeights &w, const Eigen::VectorXd &state) {
    if (w.w_out.cols() != state.size()) {
        throw ContractViolation("readout: weight columns do not match the state dimension");
    }
    return w.w_out * state;
}

namespace {

std::vector<std::string> default_labels(std::vector<std::string> labels, Eigen::Index n) {
    if (static_cast<Eigen::Index>(labels.size()) == n) {
        return labels;
    }
    labels.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
        labels.push_back("x" + std::to_string(i + 1));
    }
    return labels;
}

} // namespace

TimeSeries closed_loop_predict(const Reservoir &model, const OutputWeights &w, ReservoirState state,
                               std::size_t steps, double dt, std::vector<std::string> labels) {
    if (w.w_out.rows() != model.input_dim()) {
        throw ContractViolation("closed_loop_predict: readout dimension must equal the input dimension");
    }
    TimeSeries out;
    out.dt = dt;
    out.labels = default_labels(std::move(labels), w.w_out.rows());
    out.data.resize(static_cast<Eigen::Index>(steps), w.w_out.rows());
    for (std::size_t t = 0; t < steps; ++t) {
        const Eigen::VectorXd y = readout(w, state.v);
        if (!y.allFinite()) {
            throw DivergedError("closed_loop_predict: prediction diverged", t);
        }
        out.data.row(static_cast<Eigen::Index>(t)) = y.transpose();
        model.advance(state, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
    }
    return out;
}

TimeSeries open_loop_reconstruct(const Reservoir &model, const OutputWeights &w, ReservoirState state,
                                 const TimeSeries &inputs, std::vector<std::string> labels) {
    if (inputs.dof() != model.input_dim()) {
        throw ConfigError("open_loop_reconstruct: expected " + std::to_string(model.input_dim()) +
                          " input columns, got " + std::to_string(inputs.dof()));
    }
    TimeSeries out;
    out.dt = inputs.dt;
    out.tau0 = inputs.tau0;
    out.labels = default_labels(std::move(labels), w.w_out.rows());
    out.data.resize(inputs.steps(), w.w_out.rows());
    std::vector<double> row(static_cast<std::size_t>(inputs.dof()));
    for (Eigen::Index t = 0; t < inputs.steps(); ++t) {
        out.data.row(t) = readout(w, state.v).transpose();
        for (Eigen::Index j = 0; j < inputs.dof(); ++j) {
            row[static_cast<std::size_t>(j)] = inputs.data(t, j);
        }
        model.advance(state, row);
    }
    return out;
}

double mse(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols() || pred.rows() == 0) {
        throw ContractViolation("mse: shape mismatch");
    }
    return (pred - target).rowwise().squaredNorm().mean();
}

double mse(const TimeSeries &pred, const TimeSeries &target) { return mse(pred.data, target.data); }

std::size_t prediction_horizon(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &target, double threshold) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw ContractViolation("prediction_horizon: shape mismatch");
    }
    const double scale = target.rowwise().norm().mean();
    for (Eigen::Index t = 0; t < pred.rows(); ++t) {
        const double err = (pred.row(t) - target.row(t)).norm();
        if (!(err <= threshold * scale)) {
            return static_cast<std::size_t>(t);
        }
    }
    return static_cast<std::size_t>(pred.rows());
}

std::unique_ptr<Reservoir> TrainedModel::make_reservoir() const {
    if (kind == "qrcm" && qrc) {
        return std::make_unique<QuantumReservoir>(*qrc);
    }
    if (kind == "crcm" && crc) {
        return std::make_unique<ClassicalReservoir>(*crc);
    }
    throw ConfigError("model: unknown kind '" + kind + "' or missing configuration");
}

nlohmann::json to_json(const TrainedModel &m) {
    using nlohmann::json;
    json j;
    j["format_version"] = TrainedModel::kFormatVersion;
    j["kind"] = m.kind;
    j["scenario"] = m.scenario;
    j["input_columns"] = m.input_columns;
    j["labels"] = m.labels;
    j["dt"] = m.dt;
    j["train_rows"] = m.train_rows;
    j["train_mse"] = m.train_mse;
    if (m.qrc) {
        const auto &c = *m.qrc;
        j["qrcm"] = {{"n", c.n},
                     {"eps", c.eps},
                     {"shots", c.shots},
                     {"beta", c.beta},
                     {"seed", c.seed},
                     {"reduced", c.reduced},
                     {"selected_indices", c.selected_indices},
                     {"input_scale", c.input_scale},
                     {"normalization", {{"min", c.normalization.min}, {"max", c.normalization.max}}},
                     {"noise",
                      {{"p_gate", c.noise.p_gate},
                       {"p_meas", c.noise.p_meas},
                       {"p_reset", c.noise.p_reset},
                       {"max_trajectories", c.noise.max_trajectories}}},
                     {"block_size", c.block_size}};
    }
    if (m.crc) {
        const auto &c = *m.crc;
        j["crcm"] = {{"n_res", c.n_res},     {"n_in", c.n_in},
                     {"eps", c.eps},         {"density", c.density},
                     {"spectral_radius", c.spectral_radius}, {"seed", c.seed}};
    }
    const auto &w = m.weights.w_out;
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            flat.push_back(w(r, c));
        }
    }
    j["w_out"] = {{"rows", w.rows()}, {"cols", w.cols()}, {"row_major", flat}, {"ridge_gamma", m.weights.ridge_gamma}};
    if (m.data_normalization) {
        j["data_normalization"] = {{"min", m.data_normalization->min}, {"max", m.data_normalization->max}};
    }
    j["end_state"] = {{"step", m.end_state.step},
                      {"values", std::vector<double>(m.end_state.v.data(), m.end_state.v.data() + m.end_state.v.size())}};
    return j;
}

TrainedModel model_from_json(const nlohmann::json &j) {
    try {
        if (j.at("format_version").get<int>() != TrainedModel::kFormatVersion) {
            throw ConfigError("model: unsupported format_version");
        }
        TrainedModel m;
        m.kind = j.at("kind").get<std::string>();
        m.scenario = j.at("scenario").get<std::string>();
        m.input_columns = j.at("input_columns").get<std::vector<int>>();
        m.labels = j.at("labels").get<std::vector<std::string>>();
        m.dt = j.at("dt").get<double>();
        m.train_rows = j.at("train_rows").get<std::size_t>();
        m.train_mse = j.at("train_mse").get<double>();
        if (j.contains("qrcm")) {
            const auto &q = j.at("qrcm");
            QrcConfig c;
            c.n = q.at("n");
            c.eps = q.at("eps");
            c.shots = q.at("shots");
            c.beta = q.at("beta").get<std::vector<double>>();
            c.seed = q.at("seed");
            c.reduced = q.at("reduced");
            c.selected_indices = q.at("selected_indices").get<std::vector<int>>();
            c.input_scale = q.at("input_scale");
            c.normalization.min = q.at("normalization").at("min").get<std::vector<double>>();
            c.normalization.max = q.at("normalization").at("max").get<std::vector<double>>();
            c.noise.p_gate = q.at("noise").at("p_gate");
            c.noise.p_meas = q.at("noise").at("p_meas");
            c.noise.p_reset = q.at("noise").at("p_reset");
            c.noise.max_trajectories = q.at("noise").at("max_trajectories");
            c.block_size = q.at("block_size");
            m.qrc = std::move(c);
        }
        if (j.contains("crcm")) {
            const auto &c = j.at("crcm");
            m.crc = CrcConfig::make(c.at("n_res"), c.at("n_in"), c.at("eps"), c.at("density"), c.at("spectral_radius"),
                                    c.at("seed"));
        }
        const auto &w = j.at("w_out");
        const auto rows = w.at("rows").get<Eigen::Index>();
        const auto cols = w.at("cols").get<Eigen::Index>();
        const auto flat = w.at("row_major").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
            throw ConfigError("model: w_out size does not match rows x cols");
        }
        m.weights.w_out.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                m.weights.w_out(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
            }
        }
        m.weights.ridge_gamma = w.at("ridge_gamma");
        if (j.contains("data_normalization")) {
            Normalization dn;
            dn.min = j.at("data_normalization").at("min").get<std::vector<double>>();
            dn.max = j.at("data_normalization").at("max").get<std::vector<double>>();
            dn.validate();
            m.data_normalization = std::move(dn);
        }
        const auto values = j.at("end_state").at("values").get<std::vector<double>>();
        m.end_state.v = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
        m.end_state.step = j.at("end_state").at("step");
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("model: malformed JSON: ") + e.what());
    }
}

} // namespace qrc::reservoir
