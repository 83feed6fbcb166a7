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

#include "qrc/qsim.hpp"
#include "qrc/timeseries.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qrc::reservoir {

/// Per-component (min, max) ranges used to map raw inputs onto [0, 1].
struct Normalization {
    std::vector<double> min;
    std::vector<double> max;

    /// Column-wise extremes of `data` (rows are time steps).
    static Normalization fit(const Eigen::MatrixXd &data);
    [[nodiscard]] std::size_t size() const { return min.size(); }
    void validate() const;
};

/// (x - min) / (max - min), clamped to [0, 1]. Throws ConfigError on a
/// degenerate range.
std::vector<double> normalize_inputs(std::span<const double> x, const Normalization &norm);

struct QrcConfig {
    int n = 9;
    double eps = 0.05;
    std::uint64_t shots = 0;  ///< 0 = exact probabilities
    std::vector<double> beta;
    std::uint64_t seed = 1;
    bool reduced = false;
    std::vector<int> selected_indices;  ///< probability components fed back in reduced mode
    double input_scale = 4.0 * std::numbers::pi;
    Normalization normalization;
    qsim::NoiseConfig noise;
    int block_size = 0;  ///< reduced mode only; 0 or n = fully entangled

    /// beta drawn uniformly from [0, 2 pi) with `seed`.
    static QrcConfig make(int n, double eps, std::uint64_t seed);
    /// Reduced one-block circuit; `n_selected` distinct random probability
    /// indices are drawn with `seed` (capped at 2^n).
    static QrcConfig make_reduced(int n, double eps, std::uint64_t seed, int n_selected = 14);

    void validate() const;
};

/// The probability vector is the only memory between steps; the register is
/// re-prepared from |0...0> every step.
struct QrcState {
    qsim::ProbVector p;
    std::uint64_t step = 0;  ///< drives per-step sampling seeds

    /// Measurement distribution of |0...0>.
    static QrcState initial(int n);
};

/// One update p <- (1 - eps) p + eps p~, where p~ is the (exact, sampled or
/// noisy) outcome distribution of the reservoir circuit for input x_raw.
QrcState qrcm_step(const QrcState &state, std::span<const double> x_raw, const QrcConfig &cfg);

struct CrcConfig {
    int n_res = 512;
    int n_in = 3;
    double eps = 0.12;
    double density = 0.2;
    double spectral_radius = 1.01;
    std::uint64_t seed = 1;
    Eigen::MatrixXd w_in;
    Eigen::SparseMatrix<double, Eigen::RowMajor> w_r;

    /// W_in ~ U[-1, 1]; round(density * n_res^2) nonzeros of W_r ~ U[-1, 1],
    /// then W_r rescaled to the requested spectral radius.
    static CrcConfig make(int n_res, int n_in, double eps, double density, double spectral_radius,
                          std::uint64_t seed);
    void validate() const;
};

/// Largest eigenvalue modulus (dense nonsymmetric eigensolver).
double spectral_radius(const Eigen::MatrixXd &m);

/// psi <- (1 - eps) psi + eps tanh(W_in x + W_r psi).
Eigen::VectorXd crcm_step(const Eigen::VectorXd &psi, std::span<const double> x, const CrcConfig &cfg);

/// Reservoir state in a model-independent form.
struct ReservoirState {
    Eigen::VectorXd v;
    std::uint64_t step = 0;
};

/// Common interface of the quantum and classical reservoirs used by the
/// training and prediction drivers.
class Reservoir {
  public:
    virtual ~Reservoir() = default;
    [[nodiscard]] virtual Eigen::Index state_dim() const = 0;
    [[nodiscard]] virtual Eigen::Index input_dim() const = 0;
    [[nodiscard]] virtual ReservoirState initial_state() const = 0;
    virtual void advance(ReservoirState &state, std::span<const double> x) const = 0;
    [[nodiscard]] virtual std::string kind() const = 0;
};

class QuantumReservoir final : public Reservoir {
  public:
    explicit QuantumReservoir(QrcConfig cfg);
    [[nodiscard]] Eigen::Index state_dim() const override;
    [[nodiscard]] Eigen::Index input_dim() const override;
    [[nodiscard]] ReservoirState initial_state() const override;
    void advance(ReservoirState &state, std::span<const double> x) const override;
    [[nodiscard]] std::string kind() const override { return "qrcm"; }
    [[nodiscard]] const QrcConfig &config() const { return cfg_; }

  private:
    QrcConfig cfg_;
};

class ClassicalReservoir final : public Reservoir {
  public:
    explicit ClassicalReservoir(CrcConfig cfg);
    [[nodiscard]] Eigen::Index state_dim() const override { return cfg_.n_res; }
    [[nodiscard]] Eigen::Index input_dim() const override { return cfg_.n_in; }
    [[nodiscard]] ReservoirState initial_state() const override;
    void advance(ReservoirState &state, std::span<const double> x) const override;
    [[nodiscard]] std::string kind() const override { return "crcm"; }
    [[nodiscard]] const CrcConfig &config() const { return cfg_; }

  private:
    CrcConfig cfg_;
};

/// Teacher-forced reservoir states (one column per retained step) and the
/// aligned targets.
struct ReservoirTrace {
    Eigen::MatrixXd states;
    Eigen::MatrixXd targets;
    /// State after consuming every row of the driving series; the readout of
    /// this state predicts the row following the series.
    ReservoirState end_state;
};

/// Feeds row t (restricted to input_cols) and pairs the resulting state with
/// row t + 1 (restricted to target_cols; empty = all columns). A series of L
/// rows gives L - 1 - washout columns.
ReservoirTrace collect_trace(const Reservoir &model, const TimeSeries &series, std::size_t washout,
                             const std::vector<int> &input_cols, const std::vector<int> &target_cols = {});

struct OutputWeights {
    Eigen::MatrixXd w_out;
    double ridge_gamma = 0.0;
};

/// Closed-form minimiser of sum_t |W r_t - u_t|^2 + gamma ||W||_F^2,
/// W = U R^T (R R^T + gamma I)^-1. gamma = 0 uses a rank-revealing QR and
/// throws SingularSystemError if R is rank deficient.
OutputWeights ridge_fit(const ReservoirTrace &trace, double gamma);

/// The cost minimised by ridge_fit.
double ridge_cost(const ReservoirTrace &trace, const Eigen::MatrixXd &w_out, double gamma);

Eigen::VectorXd readout(const OutputWeights &w, const Eigen::VectorXd &state);

/// Autonomous prediction: emit readout(state), feed it back as the next input.
/// Row t of the result predicts the t-th row after the training series.
TimeSeries closed_loop_predict(const Reservoir &model, const OutputWeights &w, ReservoirState state,
                               std::size_t steps, double dt = 1.0, std::vector<std::string> labels = {});

/// One-step reconstruction: emit readout(state), then advance with the true
/// input row t. The output has inputs.steps() rows.
TimeSeries open_loop_reconstruct(const Reservoir &model, const OutputWeights &w, ReservoirState state,
                                 const TimeSeries &inputs, std::vector<std::string> labels = {});

/// Mean over time of the squared Euclidean error.
double mse(const TimeSeries &pred, const TimeSeries &target);
double mse(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &target);

/// Number of leading steps for which |x - x_tg| / mean_t |x_tg| stays <= threshold.
std::size_t prediction_horizon(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &target,
                               double threshold = 0.3);

/// Serializable trained model.
struct TrainedModel {
    static constexpr int kFormatVersion = 1;
    std::string kind;      ///< "qrcm" | "crcm"
    std::string scenario;  ///< "closed_loop" | "open_loop"
    std::vector<int> input_columns;
    std::vector<std::string> labels;
    std::optional<QrcConfig> qrc;
    std::optional<CrcConfig> crc;
    OutputWeights weights;
    ReservoirState end_state;
    double dt = 0.0;
    std::size_t train_rows = 0;
    double train_mse = 0.0;
    /// Column ranges of the training series when it was min-max normalized
    /// before training. Inputs are mapped through it and readouts mapped back.
    std::optional<Normalization> data_normalization;

    [[nodiscard]] std::unique_ptr<Reservoir> make_reservoir() const;
};

nlohmann::json to_json(const TrainedModel &model);
TrainedModel model_from_json(const nlohmann::json &j);

} // namespace qrc::reservoir
