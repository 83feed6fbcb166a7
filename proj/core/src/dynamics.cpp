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

#include "qrc/error.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace qrc::dynamics {

using std::numbers::pi;
using std::numbers::sqrt2;

ConvectionParams ConvectionParams::from_aspect(double sigma, double r, double gamma_aspect) {
    if (!(gamma_aspect > 0.0)) {
        throw ConfigError("aspect ratio must be positive");
    }
    ConvectionParams p;
    p.sigma = sigma;
    p.r = r;
    p.gamma_aspect = gamma_aspect;
    p.alpha = 2.0 * pi / gamma_aspect;
    p.beta = pi;
    const double a2 = p.alpha * p.alpha;
    const double k2 = a2 + p.beta * p.beta;
    p.b = 4.0 * p.beta * p.beta / k2;
    p.rayleigh_crit = k2 * k2 * k2 / a2;
    p.rayleigh = r * p.rayleigh_crit;
    return p;
}

ConvectionParams ConvectionParams::from_b(double sigma, double r, double b) {
    if (!(b > 0.0 && b < 4.0)) {
        throw ConfigError("b must lie in (0, 4)");
    }
    auto p = from_aspect(sigma, r, std::sqrt(4.0 * b / (4.0 - b)));
    p.b = b;
    return p;
}

void ConvectionParams::validate() const {
    if (!(gamma_aspect > 0.0) || !(alpha > 0.0) || !(beta > 0.0)) {
        throw ConfigError("convection parameters not initialised (use from_aspect or from_b)");
    }
    const double a2 = alpha * alpha;
    const double k2 = a2 + beta * beta;
    if (std::abs(b - 4.0 * beta * beta / k2) > 1e-12 * b) {
        throw ConfigError("b inconsistent with the wavenumbers");
    }
    if (std::abs(rayleigh_crit - k2 * k2 * k2 / a2) > 1e-12 * rayleigh_crit) {
        throw ConfigError("critical Rayleigh number inconsistent with the wavenumbers");
    }
}

ModeState ModeState::from_flat(std::span<const double> flat, int n, int m, double tau) {
    detail::require(flat.size() == static_cast<std::size_t>(n + m), "ModeState::from_flat size mismatch");
    ModeState s;
    s.a.assign(flat.begin(), flat.begin() + n);
    s.bm.assign(flat.begin() + n, flat.end());
    s.tau = tau;
    return s;
}

std::vector<double> ModeState::flat() const {
    std::vector<double> out(a);
    out.insert(out.end(), bm.begin(), bm.end());
    return out;
}

namespace {

struct L8Coefficients {
    double a1_23, a1_34;
    double a2_lin, a2_13;
    double a3_lin, a3_b3, a3_12, a3_14;
    double a4_lin, a4_13;
    double b2_lin;
    double b3_lin;
    double b4_lin, b4_33;
    double b1_43, b3_r;
    bool printed;

    explicit L8Coefficients(const ConvectionParams &p) {
        const double a2 = p.alpha * p.alpha;
        const double s2 = p.beta * p.beta;
        const double k1 = a2 + s2;
        const double k2 = a2 + 4.0 * s2;
        a1_23 = -(3.0 * s2 + a2) / (sqrt2 * k1);
        a1_34 = (3.0 * a2 - 15.0 * s2) / (sqrt2 * k1);
        a2_lin = -p.sigma * p.b / 4.0;
        a2_13 = -3.0 / (2.0 * sqrt2);
        a3_lin = -p.sigma * k2 / k1;
        a3_b3 = -p.sigma * k1 / (sqrt2 * k2);
        a3_12 = a2 / (sqrt2 * k1);
        a3_14 = (24.0 * s2 - 3.0 * a2) / (sqrt2 * k2);
        a4_lin = -9.0 * p.sigma * p.b / 4.0;
        a4_13 = -1.0 / (2.0 * sqrt2);
        b2_lin = -p.b;
        b3_lin = -k2 / k1;
        b4_lin = -4.0 * p.b;
        b4_33 = 3.0 * sqrt2 / 4.0;
        printed = p.l8_form == L8Form::AsPrinted;
        b1_43 = 1.5;
        b3_r = sqrt2 * p.r;
        if (!printed) {
            a2_13 = -a2_13;
            b1_43 = -b1_43;
            b3_r = -b3_r;
        }
    }
};

void l8_eval(const L8Coefficients &c, const ConvectionParams &p, std::span<const double> x, std::span<double> f) {
    const double A1 = x[0], A2 = x[1], A3 = x[2], A4 = x[3];
    const double B1 = x[4], B2 = x[5], B3 = x[6], B4 = x[7];
    f[0] = p.sigma * (B1 - A1) + c.a1_23 * A2 * A3 + c.a1_34 * A3 * A4;
    f[1] = c.a2_lin * A2 + c.a2_13 * A1 * A3;
    f[2] = c.a3_lin * A3 + c.a3_b3 * B3 + c.a3_12 * A1 * A2 + c.a3_14 * A1 * A4;
    f[3] = c.a4_lin * A4 + c.a4_13 * A1 * A3;
    f[4] = -B1 + p.r * A1 + A1 * B2 + 0.5 * A2 * B3 + c.b1_43 * A4 * B3;
    f[5] = c.b2_lin * B2 - A1 * B1;
    f[6] = c.b3_lin * B3 - A2 * (c.printed ? B3 : B1) + c.b3_r * A3 + 3.0 * A4 * B1 - 2.0 * sqrt2 * A3 * B4;
    f[7] = c.b4_lin * B4 + c.b4_33 * A3 * B3;
}

void l63_eval(const ConvectionParams &p, std::span<const double> x, std::span<double> f) {
    const double A1 = x[0], B1 = x[1], B2 = x[2];
    f[0] = p.sigma * (B1 - A1);
    f[1] = -B1 + p.r * A1 + A1 * B2;
    f[2] = -p.b * B2 - A1 * B1;
}

} // namespace

ModeState lorenz8_rhs(const ModeState &state, const ConvectionParams &params) {
    if (state.a.size() != 4 || state.bm.size() != 4) {
        throw ContractViolation("lorenz8_rhs: expected N = M = 4");
    }
    const auto x = state.flat();
    std::vector<double> f(8);
    l8_eval(L8Coefficients(params), params, x, f);
    return ModeState::from_flat(f, 4, 4, state.tau);
}

ModeState lorenz63_rhs(const ModeState &state, const ConvectionParams &params) {
    if (state.a.size() != 1 || state.bm.size() != 2) {
        throw ContractViolation("lorenz63_rhs: expected N = 1, M = 2");
    }
    const auto x = state.flat();
    std::vector<double> f(3);
    l63_eval(params, x, f);
    return ModeState::from_flat(f, 1, 2, state.tau);
}

Rhs lorenz63(const ConvectionParams &params) {
    return [params](std::span<const double> x, std::span<double> f) {
        detail::require(x.size() == 3 && f.size() == 3, "lorenz63: expected 3 components");
        l63_eval(params, x, f);
    };
}

Rhs lorenz8(const ConvectionParams &params) {
    return [params, c = L8Coefficients(params)](std::span<const double> x, std::span<double> f) {
        detail::require(x.size() == 8 && f.size() == 8, "lorenz8: expected 8 components");
        l8_eval(c, params, x, f);
    };
}

void rk4_step(const Rhs &rhs, std::span<double> x, double dt) {
    const auto n = x.size();
    // Small fixed-size scratch; the models here have at most 8 components.
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    rhs(x, k1);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = x[i] + dt * k3[i];
    }
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

TimeSeries rk4_integrate(const Rhs &rhs, std::span<const double> x0, double dt, std::size_t steps,
                         std::vector<std::string> labels) {
    if (!(dt > 0.0)) {
        throw ConfigError("rk4_integrate: dt must be positive");
    }
    if (steps < 1) {
        throw ConfigError("rk4_integrate: steps must be >= 1");
    }
    const auto n = static_cast<Eigen::Index>(x0.size());
    TimeSeries out;
    out.dt = dt;
    out.labels = labels.empty() ? std::vector<std::string>{} : std::move(labels);
    if (out.labels.empty()) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out.labels.push_back("x" + std::to_string(i + 1));
        }
    }
    out.data.resize(static_cast<Eigen::Index>(steps) + 1, n);
    std::vector<double> x(x0.begin(), x0.end());
    out.data.row(0) = Eigen::Map<const Eigen::RowVectorXd>(x.data(), n);
    for (std::size_t s = 1; s <= steps; ++s) {
        rk4_step(rhs, x, dt);
        for (double v : x) {
            if (!std::isfinite(v)) {
                throw DivergedError("rk4_integrate: trajectory diverged", s);
            }
        }
        out.data.row(static_cast<Eigen::Index>(s)) = Eigen::Map<const Eigen::RowVectorXd>(x.data(), n);
    }
    return out;
}

LyapunovResult largest_lyapunov(const Rhs &rhs, std::span<const double> x0, const LyapunovOptions &opts) {
    if (!(opts.dt > 0.0) || opts.renorm_interval == 0 || opts.total_steps < opts.renorm_interval ||
        !(opts.perturbation > 0.0)) {
        throw ConfigError("largest_lyapunov: invalid options");
    }
    const auto n = x0.size();
    std::vector<double> ref(x0.begin(), x0.end());
    for (std::size_t s = 0; s < opts.transient_steps; ++s) {
        rk4_step(rhs, ref, opts.dt);
    }
    const double d0 = opts.perturbation;
    std::vector<double> pert(ref);
    const double unit = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto &v : pert) {
        v += d0 * unit;
    }
    double log_sum = 0.0;
    std::size_t renorms = 0;
    for (std::size_t s = 1; s <= opts.total_steps; ++s) {
        rk4_step(rhs, ref, opts.dt);
        rk4_step(rhs, pert, opts.dt);
        if (s % opts.renorm_interval != 0) {
            continue;
        }
        double d2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = pert[i] - ref[i];
            d2 += diff * diff;
        }
        const double d = std::sqrt(d2);
        if (!(d > 0.0) || !std::isfinite(d) || d < 1e-280 || d > 1e280) {
            throw NumericRangeError("largest_lyapunov: separation out of range at step " + std::to_string(s) +
                                    "; decrease renorm_interval");
        }
        log_sum += std::log(d / d0);
        ++renorms;
        const double scale = d0 / d;
        for (std::size_t i = 0; i < n; ++i) {
            pert[i] = ref[i] + (pert[i] - ref[i]) * scale;
        }
    }
    LyapunovResult result;
    result.lambda1 = log_sum / (static_cast<double>(renorms * opts.renorm_interval) * opts.dt);
    result.transient_steps = opts.transient_steps;
    result.renorm_interval = opts.renorm_interval;
    return result;
}

namespace {

std::array<double, 8> padded_modes(const ModeState &s) {
    const bool l8 = s.a.size() == 4 && s.bm.size() == 4;
    const bool l63 = s.a.size() == 1 && s.bm.size() == 2;
    detail::require(l8 || l63, "field reconstruction expects an L63 or 8-mode state");
    if (l8) {
        return {s.a[0], s.a[1], s.a[2], s.a[3], s.bm[0], s.bm[1], s.bm[2], s.bm[3]};
    }
    return {s.a[0], 0.0, 0.0, 0.0, s.bm[0], s.bm[1], 0.0, 0.0};
}

double c_zeta_of(const ConvectionParams &p) {
    return sqrt2 * (p.alpha * p.alpha + p.beta * p.beta) / (p.alpha * p.beta);
}

double c_theta_of(const ConvectionParams &p) {
    const double k2 = p.alpha * p.alpha + p.beta * p.beta;
    return k2 * k2 * k2 / (p.alpha * p.alpha * p.beta * p.rayleigh);
}

StreamPoint stream_modes(const std::array<double, 8> &m, const ConvectionParams &p, double x, double z) {
    const double al = p.alpha, be = p.beta;
    const double sx = std::sin(al * x), cx = std::cos(al * x);
    const double s1 = std::sin(be * z), c1 = std::cos(be * z);
    const double s2 = std::sin(2 * be * z), c2 = std::cos(2 * be * z);
    const double s3 = std::sin(3 * be * z), c3 = std::cos(3 * be * z);
    const double cz = c_zeta_of(p);
    StreamPoint out;
    out.zeta = cz * (m[0] * sx * s1 + m[1] * s1 + m[2] * cx * s2 + m[3] * s3);
    out.d_x = cz * (m[0] * al * cx * s1 - m[2] * al * sx * s2);
    out.d_z = cz * (m[0] * be * sx * c1 + m[1] * be * c1 + m[2] * 2 * be * cx * c2 + m[3] * 3 * be * c3);
    out.laplacian = -cz * ((al * al + be * be) * m[0] * sx * s1 + be * be * m[1] * s1 +
                           (al * al + 4 * be * be) * m[2] * cx * s2 + 9 * be * be * m[3] * s3);
    return out;
}

double theta_modes(const std::array<double, 8> &m, const ConvectionParams &p, double x, double z) {
    const double al = p.alpha, be = p.beta;
    return c_theta_of(p) * (sqrt2 * m[4] * std::cos(al * x) * std::sin(be * z) + m[5] * std::sin(2 * be * z) +
                            m[6] * std::sin(al * x) * std::sin(2 * be * z) + m[7] * std::sin(4 * be * z));
}

} // namespace

StreamPoint stream_at(const ModeState &state, const ConvectionParams &params, double x, double z) {
    return stream_modes(padded_modes(state), params, x, z);
}

double theta_at(const ModeState &state, const ConvectionParams &params, double x, double z) {
    return theta_modes(padded_modes(state), params, x, z);
}

FieldSnapshot reconstruct_fields(const ModeState &state, const ConvectionParams &params, int nx, int nz) {
    if (nx < 2 || nz < 2) {
        throw ConfigError("reconstruct_fields: grid needs at least 2 points per direction");
    }
    const auto modes = padded_modes(state);
    FieldSnapshot snap;
    snap.nx = nx;
    snap.nz = nz;
    snap.gamma_aspect = params.gamma_aspect;
    snap.c_zeta = c_zeta_of(params);
    snap.c_theta = c_theta_of(params);
    for (auto *m : {&snap.zeta, &snap.theta, &snap.temp_total, &snap.ux, &snap.uz, &snap.vorticity}) {
        m->resize(nx, nz);
    }
    for (int ix = 0; ix < nx; ++ix) {
        const double x = snap.x(ix);
        for (int iz = 0; iz < nz; ++iz) {
            const double z = snap.z(iz);
            const auto sp = stream_modes(modes, params, x, z);
            // sin(k pi z) at the walls is only ~1e-16; pin the boundary rows exactly.
            const bool wall = iz == 0 || iz == nz - 1;
            snap.zeta(ix, iz) = wall ? 0.0 : sp.zeta;
            snap.theta(ix, iz) = wall ? 0.0 : theta_modes(modes, params, x, z);
            snap.temp_total(ix, iz) = 1.0 - z + snap.theta(ix, iz);
            snap.ux(ix, iz) = -sp.d_z;
            snap.uz(ix, iz) = wall ? 0.0 : sp.d_x;
            snap.vorticity(ix, iz) = wall ? 0.0 : -sp.laplacian;
        }
    }
    return snap;
}

EnergyVorticity energy_vorticity(const FieldSnapshot &snap) {
    detail::require(snap.nx >= 2 && snap.nz >= 2 && snap.zeta.rows() == snap.nx && snap.zeta.cols() == snap.nz,
                    "energy_vorticity: invalid snapshot");
    const double hx = snap.gamma_aspect / (snap.nx - 1);
    const double hz = 1.0 / (snap.nz - 1);
    const double area = snap.gamma_aspect;
    double kin = 0.0, pot = 0.0, vort = 0.0;
    for (int ix = 0; ix < snap.nx; ++ix) {
        const double wx = (ix == 0 || ix == snap.nx - 1) ? 0.5 : 1.0;
        for (int iz = 0; iz < snap.nz; ++iz) {
            const double w = wx * ((iz == 0 || iz == snap.nz - 1) ? 0.5 : 1.0) * hx * hz;
            const double u = snap.ux(ix, iz), v = snap.uz(ix, iz);
            kin += w * (u * u + v * v);
            pot += w * snap.z(iz) * snap.theta(ix, iz);
            vort += w * snap.vorticity(ix, iz);
        }
    }
    EnergyVorticity out;
    out.kinetic = kin / (2.0 * area);
    out.potential = -pot / (2.0 * area);
    out.energy = out.kinetic + out.potential;
    out.vorticity = vort / area;
    return out;
}

void write_field_csv(const std::filesystem::path &path, const FieldSnapshot &snap, const Eigen::MatrixXd &field) {
    std::ostringstream os;
    os << "x,z,value\n";
    for (int ix = 0; ix < snap.nx; ++ix) {
        for (int iz = 0; iz < snap.nz; ++iz) {
            os << format_double(snap.x(ix)) << ',' << format_double(snap.z(iz)) << ','
               << format_double(field(ix, iz)) << '\n';
        }
    }
    write_file_atomic(path, os.str());
}

NarmaSeries narma2_series(const NarmaConfig &cfg, std::size_t steps) {
    if (steps < 2) {
        throw ConfigError("narma2_series: steps must be >= 2");
    }
    NarmaSeries out;
    out.u.resize(steps);
    out.y.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const double kk = static_cast<double>(k);
        out.u[k] = 0.1 * (std::sin(2 * pi * cfg.alpha_n * kk) * std::sin(2 * pi * cfg.beta_n * kk) *
                              std::sin(2 * pi * cfg.gamma_n * kk) +
                          1.0);
    }
    out.y[0] = cfg.y0;
    out.y[1] = cfg.y1;
    for (std::size_t k = 1; k + 1 < steps; ++k) {
        const double u = out.u[k];
        out.y[k + 1] = 0.4 * out.y[k] + 0.4 * out.y[k] * out.y[k - 1] + 0.6 * u * u * u + 0.1;
    }
    return out;
}

TimeSeries mackey_glass_series(const MackeyGlassConfig &cfg, std::size_t steps) {
    if (!(cfg.dt > 0.0) || !(cfg.delay > 0.0)) {
        throw ConfigError("mackey_glass_series: dt and delay must be positive");
    }
    const double ratio = cfg.delay / cfg.dt;
    const auto lag = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(lag)) > 1e-9 * ratio || lag == 0) {
        throw ConfigError("mackey_glass_series: delay / dt must be an integer");
    }
    const double an = std::pow(cfg.alpha_m, cfg.exponent);
    std::vector<double> ring(lag, cfg.history);
    TimeSeries out;
    out.dt = cfg.dt;
    out.labels = {"x"};
    out.data.resize(static_cast<Eigen::Index>(steps), 1);
    double x = cfg.x0;
    for (std::size_t k = 0; k < steps; ++k) {
        out.data(static_cast<Eigen::Index>(k), 0) = x;
        const double delayed = ring[k % lag];
        const double drive = cfg.beta_m * an * delayed / (an + std::pow(delayed, cfg.exponent));
        auto f = [&](double v) { return drive - cfg.gamma_m * v; };
        const double k1 = f(x);
        const double k2 = f(x + 0.5 * cfg.dt * k1);
        const double k3 = f(x + 0.5 * cfg.dt * k2);
        const double k4 = f(x + cfg.dt * k3);
        ring[k % lag] = x;
        x += cfg.dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!std::isfinite(x)) {
            throw DivergedError("mackey_glass_series: diverged", k + 1);
        }
    }
    return out;
}

Model parse_model(const std::string &name) {
    if (name == "l63") return Model::L63;
    if (name == "l8") return Model::L8;
    if (name == "narma2") return Model::Narma2;
    if (name == "mackey_glass") return Model::MackeyGlass;
    throw ConfigError("unknown model '" + name + "' (expected l63 | l8 | narma2 | mackey_glass)");
}

std::string model_name(Model model) {
    switch (model) {
    case Model::L63: return "l63";
    case Model::L8: return "l8";
    case Model::Narma2: return "narma2";
    case Model::MackeyGlass: return "mackey_glass";
    }
    return "?";
}

TimeSeries lorenz_trajectory(Model model, const ConvectionParams &params, const TrajectoryOptions &opts) {
    detail::require(model == Model::L63 || model == Model::L8, "lorenz_trajectory: model must be l63 or l8");
    const bool l8 = model == Model::L8;
    const Rhs rhs = l8 ? lorenz8(params) : lorenz63(params);
    const std::size_t dof = l8 ? 8 : 3;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> x(dof);
    for (auto &v : x) {
        v = uni(rng);
    }
    for (std::size_t s = 0; s < opts.transient; ++s) {
        rk4_step(rhs, x, opts.dt);
    }
    return rk4_integrate(rhs, x, opts.dt, opts.steps, l8 ? mode_labels(4, 4) : mode_labels(1, 2));
}

} // namespace qrc::dynamics
