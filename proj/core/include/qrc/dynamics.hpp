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

#include "qrc/timeseries.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qrc::dynamics {

/// Coefficient table for the 8-mode model. AsPrinted follows the published
/// equations term by term; on that table every mode outside the Lorenz-63
/// subspace decays to zero. Corrected flips the signs of A1A3 in dA2,
/// A4B3 in dB1 and r A3 in dB3, and replaces A2B3 by A2B1 in dB3, which
/// restores conservation of the temperature variance.
enum class L8Form { Corrected, AsPrinted };

/// Parameters of the Lorenz-type Galerkin models. Construct through
/// from_aspect() or from_b() so that the derived quantities stay consistent.
struct ConvectionParams {
    double sigma = 10.0;
    double r = 28.0;
    double b = 8.0 / 3.0;
    double gamma_aspect = 0.0;  ///< aspect ratio length/height
    double alpha = 0.0;         ///< horizontal wavenumber 2 pi / gamma_aspect
    double beta = 0.0;          ///< vertical wavenumber pi
    double rayleigh = 0.0;
    double rayleigh_crit = 0.0;
    L8Form l8_form = L8Form::Corrected;

    static ConvectionParams from_aspect(double sigma, double r, double gamma_aspect);
    /// Inverts b = 4 G^2 / (4 + G^2) for the aspect ratio. Requires 0 < b < 4.
    static ConvectionParams from_b(double sigma, double r, double b);
    /// sigma = 10, r = 28, b = 8/3.
    static ConvectionParams standard() { return from_b(10.0, 28.0, 8.0 / 3.0); }

    void validate() const;
};

/// Mode amplitudes of a Galerkin model: stream function (A) and temperature (B).
struct ModeState {
    std::vector<double> a;
    std::vector<double> bm;
    double tau = 0.0;

    static ModeState l63(double a1, double b1, double b2) { return {{a1}, {b1, b2}, 0.0}; }
    static ModeState zeros(int n, int m) {
        return {std::vector<double>(n, 0.0), std::vector<double>(m, 0.0), 0.0};
    }
    static ModeState from_flat(std::span<const double> flat, int n, int m, double tau = 0.0);

    [[nodiscard]] std::vector<double> flat() const;
    [[nodiscard]] std::size_t size() const { return a.size() + bm.size(); }
};

ModeState lorenz8_rhs(const ModeState &state, const ConvectionParams &params);
ModeState lorenz63_rhs(const ModeState &state, const ConvectionParams &params);

/// dx/dtau = f(x); writes f into `out` (same length as x).
using Rhs = std::function<void(std::span<const double> x, std::span<double> out)>;

/// Flat-vector right-hand sides for the integrators.
Rhs lorenz63(const ConvectionParams &params);
Rhs lorenz8(const ConvectionParams &params);

/// One classical RK4 step in place.
void rk4_step(const Rhs &rhs, std::span<double> x, double dt);

/// Fixed-step RK4. The output has steps + 1 rows, the first being x0.
/// Throws DivergedError if a non-finite value appears.
TimeSeries rk4_integrate(const Rhs &rhs, std::span<const double> x0, double dt, std::size_t steps,
                         std::vector<std::string> labels = {});

struct LyapunovOptions {
    double dt = 0.02;
    std::size_t transient_steps = 10'000;
    std::size_t total_steps = 200'000;
    std::size_t renorm_interval = 10;
    double perturbation = 1e-8;
};

struct LyapunovResult {
    double lambda1 = 0.0;
    std::size_t transient_steps = 0;
    std::size_t renorm_interval = 0;
};

/// Largest Lyapunov exponent by the two-trajectory (Benettin) method, per unit
/// of the rhs time variable. total_steps counts post-transient steps.
LyapunovResult largest_lyapunov(const Rhs &rhs, std::span<const double> x0, const LyapunovOptions &opts = {});

/// Physical fields on a uniform (nx x nz) grid over [0, Gamma] x [0, 1].
/// Matrices are indexed (ix, iz).
struct FieldSnapshot {
    int nx = 0;
    int nz = 0;
    double gamma_aspect = 0.0;
    Eigen::MatrixXd zeta;
    Eigen::MatrixXd theta;
    Eigen::MatrixXd temp_total;
    Eigen::MatrixXd ux;
    Eigen::MatrixXd uz;
    Eigen::MatrixXd vorticity;  ///< -laplacian(zeta)
    double c_zeta = 0.0;
    double c_theta = 0.0;

    [[nodiscard]] double x(int ix) const { return gamma_aspect * ix / (nx - 1); }
    [[nodiscard]] double z(int iz) const { return static_cast<double>(iz) / (nz - 1); }
};

/// Analytic values of the stream function expansion and its derivatives at a point.
struct StreamPoint {
    double zeta = 0.0;
    double d_x = 0.0;
    double d_z = 0.0;
    double laplacian = 0.0;
};

StreamPoint stream_at(const ModeState &state, const ConvectionParams &params, double x, double z);
double theta_at(const ModeState &state, const ConvectionParams &params, double x, double z);

/// Accepts the 8-mode state or the L63 state (missing amplitudes are zero).
FieldSnapshot reconstruct_fields(const ModeState &state, const ConvectionParams &params, int nx = 128, int nz = 64);

struct EnergyVorticity {
    double energy = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;
    double vorticity = 0.0;
};

/// Trapezoidal area averages: E = <(grad zeta)^2 - z theta> / 2, Omega = <omega>.
EnergyVorticity energy_vorticity(const FieldSnapshot &snapshot);

void write_field_csv(const std::filesystem::path &path, const FieldSnapshot &snap, const Eigen::MatrixXd &field);

struct NarmaConfig {
    double period = 100.0;
    double alpha_n = 2.11 / 100.0;
    double beta_n = 3.73 / 100.0;
    double gamma_n = 4.11 / 100.0;
    double y0 = 0.19;
    double y1 = 0.19;
};

struct NarmaSeries {
    std::vector<double> u;
    std::vector<double> y;
};

NarmaSeries narma2_series(const NarmaConfig &cfg, std::size_t steps);

struct MackeyGlassConfig {
    double alpha_m = 1.0;
    double beta_m = 2.0;
    double gamma_m = 1.0;
    double delay = 2.0;
    double exponent = 10.0;
    double dt = 0.1;
    double history = 0.5;
    double x0 = 0.5;
};

/// Fixed-step RK4 with the delayed term read from a ring buffer and held
/// constant over each step. Output has `steps` rows, the first being x0.
TimeSeries mackey_glass_series(const MackeyGlassConfig &cfg, std::size_t steps);

/// Supported generators.
enum class Model { L63, L8, Narma2, MackeyGlass };

Model parse_model(const std::string &name);
std::string model_name(Model model);

struct TrajectoryOptions {
    double dt = 0.02;
    std::size_t steps = 4000;
    std::size_t transient = 1000;
    std::uint64_t seed = 1;
};

/// Random initial condition in [-1, 1]^dof, a discarded transient, then
/// `steps` RK4 steps (steps + 1 rows, tau starting at 0).
TimeSeries lorenz_trajectory(Model model, const ConvectionParams &params, const TrajectoryOptions &opts);

} // namespace qrc::dynamics
