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
#include "qrc/timeseries.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace {

using namespace qrc;
using namespace qrc::dynamics;

const double kSqrt2 = std::numbers::sqrt2;
const double kPi = std::numbers::pi;

ConvectionParams printed() {
    auto p = ConvectionParams::standard();
    p.l8_form = L8Form::AsPrinted;
    return p;
}

ModeState ones() { return {{1, 1, 1, 1}, {1, 1, 1, 1}, 0.0}; }

std::vector<double> rhs_flat(const ModeState &s, const ConvectionParams &p) { return lorenz8_rhs(s, p).flat(); }

// The eight equations typed in from the appendix, written against a^2 and b^2
// directly rather than through the library's coefficient cache.
std::vector<double> appendix_rhs(const std::vector<double> &x, double sigma, double r, double a2, double b2,
                                 bool corrected) {
    const double A1 = x[0], A2 = x[1], A3 = x[2], A4 = x[3];
    const double B1 = x[4], B2 = x[5], B3 = x[6], B4 = x[7];
    const double s = a2 + b2;
    const double b = 4.0 * b2 / s;
    const double k4 = (a2 + 4.0 * b2) / s;
    std::vector<double> f(8);
    f[0] = sigma * (B1 - A1) - (3.0 * b2 + a2) / (kSqrt2 * s) * A2 * A3 +
           (3.0 * a2 - 15.0 * b2) / (kSqrt2 * s) * A3 * A4;
    f[1] = -sigma * b / 4.0 * A2 + (corrected ? 1.0 : -1.0) * 3.0 / (2.0 * kSqrt2) * A1 * A3;
    f[2] = -sigma * k4 * A3 - sigma * s / (kSqrt2 * (4.0 * b2 + a2)) * B3 + a2 / (kSqrt2 * s) * A1 * A2 +
           (24.0 * b2 - 3.0 * a2) / (kSqrt2 * (4.0 * b2 + a2)) * A1 * A4;
    f[3] = -9.0 * sigma * b / 4.0 * A4 - 1.0 / (2.0 * kSqrt2) * A1 * A3;
    f[4] = -B1 + r * A1 + A1 * B2 + 0.5 * A2 * B3 + (corrected ? -1.5 : 1.5) * A4 * B3;
    f[5] = -b * B2 - A1 * B1;
    f[6] = -k4 * B3 - A2 * (corrected ? B1 : B3) + (corrected ? -1.0 : 1.0) * kSqrt2 * r * A3 + 3.0 * A4 * B1 -
           2.0 * kSqrt2 * A3 * B4;
    f[7] = -4.0 * b * B4 + 3.0 * kSqrt2 / 4.0 * A3 * B3;
    return f;
}

std::vector<double> random_state(std::mt19937_64 &rng, std::size_t n, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> x(n);
    for (auto &v : x) {
        v = u(rng);
    }
    return x;
}

TEST(Lorenz8Rhs, OriginIsFixedPoint) {
    for (const auto &p : {ConvectionParams::standard(), printed()}) {
        for (double v : rhs_flat(ModeState::zeros(4, 4), p)) {
            EXPECT_EQ(v, 0.0);
        }
    }
}

TEST(Lorenz8Rhs, PrintedTableAtUnitState) {
    // alpha^2 = pi^2 / 2, beta^2 = pi^2 for b = 8/3, evaluated term by term.
    const double sigma = 10.0, r = 28.0, b = 8.0 / 3.0;
    const std::vector<double> expected = {
        -3.5 / (1.5 * kSqrt2) - 9.0 / kSqrt2,
        -sigma * b / 4.0 - 3.0 / (2.0 * kSqrt2),
        -3.0 * sigma - sigma / (3.0 * kSqrt2) + 1.0 / (3.0 * kSqrt2) + 5.0 / kSqrt2,
        -9.0 * sigma * b / 4.0 - 1.0 / (2.0 * kSqrt2),
        r + 2.0,
        -b - 1.0,
        -3.0 - 1.0 + kSqrt2 * r + 3.0 - 2.0 * kSqrt2,
        -4.0 * b + 3.0 * kSqrt2 / 4.0,
    };
    const auto got = rhs_flat(ones(), printed());
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_NEAR(got[i], expected[i], 1e-12) << "component " << i;
    }
}

TEST(Lorenz8Rhs, CorrectedTableAtUnitState) {
    const double sigma = 10.0, r = 28.0, b = 8.0 / 3.0;
    const std::vector<double> expected = {
        -3.5 / (1.5 * kSqrt2) - 9.0 / kSqrt2,
        -sigma * b / 4.0 + 3.0 / (2.0 * kSqrt2),
        -3.0 * sigma - sigma / (3.0 * kSqrt2) + 1.0 / (3.0 * kSqrt2) + 5.0 / kSqrt2,
        -9.0 * sigma * b / 4.0 - 1.0 / (2.0 * kSqrt2),
        r - 1.0,
        -b - 1.0,
        -3.0 - 1.0 - kSqrt2 * r + 3.0 - 2.0 * kSqrt2,
        -4.0 * b + 3.0 * kSqrt2 / 4.0,
    };
    const auto got = rhs_flat(ones(), ConvectionParams::standard());
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_NEAR(got[i], expected[i], 1e-12) << "component " << i;
    }
}

TEST(Lorenz8Rhs, MatchesAppendixFormulasAtRandomStates) {
    std::mt19937_64 rng(3);
    for (bool corrected : {false, true}) {
        auto p = corrected ? ConvectionParams::standard() : printed();
        for (int t = 0; t < 200; ++t) {
            const auto x = random_state(rng, 8, 20.0);
            const auto want = appendix_rhs(x, 10.0, 28.0, kPi * kPi / 2.0, kPi * kPi, corrected);
            const auto got = rhs_flat(ModeState::from_flat(x, 4, 4), p);
            for (std::size_t i = 0; i < 8; ++i) {
                EXPECT_NEAR(got[i], want[i], 1e-11 * (1.0 + std::abs(want[i])));
            }
        }
    }
}

TEST(Lorenz8Rhs, ReducesToLorenz63OnSubspace) {
    std::mt19937_64 rng(11);
    const auto p = ConvectionParams::standard();
    for (int t = 0; t < 1000; ++t) {
        const auto x = random_state(rng, 3, 30.0);
        ModeState s8 = ModeState::zeros(4, 4);
        s8.a[0] = x[0];
        s8.bm[0] = x[1];
        s8.bm[1] = x[2];
        const auto d8 = lorenz8_rhs(s8, p);
        const auto d3 = lorenz63_rhs(ModeState::l63(x[0], x[1], x[2]), p);
        EXPECT_LT(std::abs(d8.a[0] - d3.a[0]), 1e-14);
        EXPECT_LT(std::abs(d8.bm[0] - d3.bm[0]), 1e-14);
        EXPECT_LT(std::abs(d8.bm[1] - d3.bm[1]), 1e-14);
        for (int i : {1, 2, 3}) {
            EXPECT_EQ(d8.a[static_cast<std::size_t>(i)], 0.0);
        }
        EXPECT_EQ(d8.bm[2], 0.0);
        EXPECT_EQ(d8.bm[3], 0.0);
    }
}

TEST(Lorenz8Rhs, WrongDimensionIsContractViolation) {
    EXPECT_THROW(lorenz8_rhs(ModeState::l63(1, 2, 3), ConvectionParams::standard()), ContractViolation);
    EXPECT_THROW(lorenz63_rhs(ModeState::zeros(4, 4), ConvectionParams::standard()), ContractViolation);
}

TEST(Lorenz63Rhs, FixedPoints) {
    const auto p = ConvectionParams::standard();
    const auto zero = lorenz63_rhs(ModeState::l63(0, 0, 0), p).flat();
    for (double v : zero) {
        EXPECT_EQ(v, 0.0);
    }
    const double c = std::sqrt(72.0);
    for (double sign : {1.0, -1.0}) {
        const auto d = lorenz63_rhs(ModeState::l63(sign * c, sign * c, -27.0), p).flat();
        for (double v : d) {
            EXPECT_LT(std::abs(v), 1e-10);
        }
    }
}

TEST(Lorenz63Rhs, Definition) {
    const auto p = ConvectionParams::standard();
    const auto d = lorenz63_rhs(ModeState::l63(1.0, 2.0, 3.0), p).flat();
    EXPECT_DOUBLE_EQ(d[0], 10.0 * (2.0 - 1.0));
    EXPECT_DOUBLE_EQ(d[1], -2.0 + 28.0 * 1.0 + 1.0 * 3.0);
    EXPECT_DOUBLE_EQ(d[2], -8.0 / 3.0 * 3.0 - 1.0 * 2.0);
}

TEST(ConvectionParams, CriticalAspectRatio) {
    const auto p = ConvectionParams::standard();
    EXPECT_NEAR(p.gamma_aspect, 2.0 * kSqrt2, 1e-12);
    EXPECT_NEAR(p.alpha * p.alpha, kPi * kPi / 2.0, 1e-12);
    EXPECT_NEAR(p.beta, kPi, 1e-15);
    EXPECT_NEAR(p.rayleigh_crit, 27.0 * std::pow(kPi, 4) / 4.0, 1e-9);
    EXPECT_THROW(ConvectionParams::from_b(10.0, 28.0, 4.5), ConfigError);
}

TEST(Rk4, LinearDecayMatchesTaylorPolynomial) {
    const Rhs decay = [](std::span<const double> x, std::span<double> f) { f[0] = -x[0]; };
    for (double h : {0.1, 0.3, 1.0}) {
        std::vector<double> x = {1.0};
        rk4_step(decay, x, h);
        EXPECT_NEAR(x[0], 1.0 - h + h * h / 2.0 - h * h * h / 6.0 + h * h * h * h / 24.0, 1e-15);
    }
}

TEST(Rk4, OutputShapeAndFirstRow) {
    const std::vector<double> x0 = {1.0, 1.0, 1.0};
    const auto ts = rk4_integrate(lorenz63(ConvectionParams::standard()), x0, 0.01, 25);
    EXPECT_EQ(ts.steps(), 26);
    EXPECT_EQ(ts.dof(), 3);
    EXPECT_EQ(ts.data(0, 1), 1.0);
    EXPECT_THROW(rk4_integrate(lorenz63(ConvectionParams::standard()), x0, 0.0, 10), ConfigError);
}

TEST(Rk4, FourthOrderConvergenceOnLorenz63) {
    const auto rhs = lorenz63(ConvectionParams::standard());
    const std::vector<double> x0 = {1.0, 1.0, 20.0};
    const double t_end = 0.2;
    auto final_state = [&](double dt) {
        const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
        const auto ts = rk4_integrate(rhs, x0, dt, steps);
        return Eigen::VectorXd(ts.data.row(ts.steps() - 1).transpose());
    };
    const auto ref = final_state(0.004 / 100.0);
    const double e1 = (final_state(0.004) - ref).norm();
    const double e2 = (final_state(0.002) - ref).norm();
    const double order = std::log2(e1 / e2);
    EXPECT_GE(order, 3.9);
    EXPECT_LE(order, 4.3);
}

TEST(Rk4, Lorenz63StaysBounded) {
    const std::vector<double> x0 = {1.0, 1.0, 1.0};
    const auto ts = rk4_integrate(lorenz63(ConvectionParams::standard()), x0, 0.02, 100000);
    EXPECT_LT(ts.data.cwiseAbs().maxCoeff(), 60.0);
}

TEST(Rk4, DivergenceNamesTheStep) {
    const Rhs blowup = [](std::span<const double> x, std::span<double> f) { f[0] = x[0] * x[0]; };
    const std::vector<double> x0 = {1.0};
    try {
        (void)rk4_integrate(blowup, x0, 0.5, 100);
        FAIL() << "expected DivergedError";
    } catch (const DivergedError &e) {
        EXPECT_GT(e.step(), 0U);
        EXPECT_LE(e.step(), 100U);
    }
}

TEST(Lyapunov, StableLinearSystem) {
    const Rhs decay = [](std::span<const double> x, std::span<double> f) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            f[i] = -x[i];
        }
    };
    const std::vector<double> x0 = {1.0, -0.5};
    LyapunovOptions o;
    o.dt = 0.01;
    o.transient_steps = 100;
    o.total_steps = 20000;
    EXPECT_NEAR(largest_lyapunov(decay, x0, o).lambda1, -1.0, 0.01);
}

TEST(Lyapunov, Lorenz63AcrossInitialConditions) {
    const auto p = ConvectionParams::standard();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto start = lorenz_trajectory(Model::L63, p, {0.02, 1, 1000, seed});
        std::vector<double> x(3);
        for (int j = 0; j < 3; ++j) {
            x[static_cast<std::size_t>(j)] = start.data(0, j);
        }
        EXPECT_NEAR(largest_lyapunov(lorenz63(p), x).lambda1, 0.9056, 0.02) << "seed " << seed;
    }
}

TEST(Lyapunov, EightModeAcrossInitialConditions) {
    const auto p = ConvectionParams::standard();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto start = lorenz_trajectory(Model::L8, p, {0.02, 1, 1000, seed});
        std::vector<double> x(8);
        for (int j = 0; j < 8; ++j) {
            x[static_cast<std::size_t>(j)] = start.data(0, j);
        }
        EXPECT_NEAR(largest_lyapunov(lorenz8(p), x).lambda1, 0.825, 0.03) << "seed " << seed;
    }
}

TEST(Lyapunov, RenormIntervalTooLongIsRangeError) {
    const Rhs grow = [](std::span<const double> x, std::span<double> f) { f[0] = 50.0 * x[0]; };
    const std::vector<double> x0 = {1.0};
    LyapunovOptions o;
    o.dt = 0.1;
    o.transient_steps = 0;
    o.total_steps = 2000;
    o.renorm_interval = 1000;
    EXPECT_THROW(largest_lyapunov(grow, x0, o), NumericRangeError);
}

TEST(Trajectory, DeterministicAndShaped) {
    const auto p = ConvectionParams::standard();
    const TrajectoryOptions o{0.02, 400, 100, 9};
    const auto a = lorenz_trajectory(Model::L8, p, o);
    const auto b = lorenz_trajectory(Model::L8, p, o);
    EXPECT_EQ(a.steps(), 401);
    EXPECT_EQ(a.dof(), 8);
    EXPECT_TRUE(a.data == b.data);
    EXPECT_EQ(a.labels, (std::vector<std::string>{"A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4"}));
    const auto c = lorenz_trajectory(Model::L63, p, {0.02, 10, 0, 9});
    EXPECT_EQ(c.labels, (std::vector<std::string>{"A1", "B1", "B2"}));
}

TEST(Fields, ZeroStateIsConductionProfile) {
    const auto p = ConvectionParams::standard();
    const auto snap = reconstruct_fields(ModeState::zeros(4, 4), p, 16, 9);
    EXPECT_EQ(snap.zeta.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(snap.theta.cwiseAbs().maxCoeff(), 0.0);
    for (int iz = 0; iz < snap.nz; ++iz) {
        EXPECT_NEAR(snap.temp_total(3, iz), 1.0 - snap.z(iz), 1e-15);
    }
    const auto ev = energy_vorticity(snap);
    EXPECT_EQ(ev.energy, 0.0);
    EXPECT_EQ(ev.vorticity, 0.0);
    EXPECT_THROW(reconstruct_fields(ModeState::zeros(4, 4), p, 1, 9), ConfigError);
}

TEST(Fields, VanishAtPlates) {
    std::mt19937_64 rng(5);
    const auto p = ConvectionParams::standard();
    const auto x = random_state(rng, 8, 10.0);
    const auto snap = reconstruct_fields(ModeState::from_flat(x, 4, 4), p, 33, 17);
    for (int ix = 0; ix < snap.nx; ++ix) {
        EXPECT_NEAR(snap.zeta(ix, 0), 0.0, 1e-12);
        EXPECT_NEAR(snap.zeta(ix, snap.nz - 1), 0.0, 1e-12);
        EXPECT_NEAR(snap.theta(ix, 0), 0.0, 1e-12);
        EXPECT_NEAR(snap.theta(ix, snap.nz - 1), 0.0, 1e-12);
    }
}

TEST(Fields, VelocityIsDivergenceFree) {
    // u_x = -d_z zeta and u_z = d_x zeta, so du_x/dx + du_z/dz is the
    // difference of the two mixed partials. Central differences of the
    // analytic first derivatives agree to O(h^2).
    std::mt19937_64 rng(6);
    const auto p = ConvectionParams::standard();
    const auto s = ModeState::from_flat(random_state(rng, 8, 10.0), 4, 4);
    const double h = 1e-5;
    std::uniform_real_distribution<double> ux(0.1, p.gamma_aspect - 0.1), uz(0.1, 0.9);
    for (int t = 0; t < 50; ++t) {
        const double x = ux(rng), z = uz(rng);
        const double dux_dx = -(stream_at(s, p, x + h, z).d_z - stream_at(s, p, x - h, z).d_z) / (2 * h);
        const double duz_dz = (stream_at(s, p, x, z + h).d_x - stream_at(s, p, x, z - h).d_x) / (2 * h);
        const double scale = std::abs(dux_dx) + 1.0;
        EXPECT_LT(std::abs(dux_dx + duz_dz), 1e-6 * scale);
    }
}

TEST(Fields, LaplacianMatchesFiniteDifferences) {
    std::mt19937_64 rng(7);
    const auto p = ConvectionParams::standard();
    const auto s = ModeState::from_flat(random_state(rng, 8, 5.0), 4, 4);
    const double h = 1e-4, x = 0.7, z = 0.3;
    const auto c = stream_at(s, p, x, z);
    const double lap = (stream_at(s, p, x + h, z).zeta + stream_at(s, p, x - h, z).zeta +
                        stream_at(s, p, x, z + h).zeta + stream_at(s, p, x, z - h).zeta - 4.0 * c.zeta) /
                       (h * h);
    EXPECT_NEAR(c.laplacian, lap, 1e-4 * (std::abs(lap) + 1.0));
}

TEST(Fields, EnergyScalingAndVorticityOfPureMode) {
    const auto p = ConvectionParams::standard();
    ModeState s = ModeState::zeros(4, 4);
    s.a = {0.7, -0.2, 0.4, 0.1};
    ModeState s2 = s;
    for (auto &v : s2.a) {
        v *= 2.0;
    }
    const auto e1 = energy_vorticity(reconstruct_fields(s, p));
    const auto e2 = energy_vorticity(reconstruct_fields(s2, p));
    EXPECT_NEAR(e2.kinetic, 4.0 * e1.kinetic, 1e-12 * std::abs(e2.kinetic));

    ModeState pure = ModeState::zeros(4, 4);
    pure.a[0] = 3.0;
    EXPECT_NEAR(energy_vorticity(reconstruct_fields(pure, p)).vorticity, 0.0, 1e-10);
}

TEST(Narma2, Formula) {
    const NarmaConfig cfg;
    const auto s = narma2_series(cfg, 500);
    EXPECT_DOUBLE_EQ(s.u[0], 0.1);
    const double u1 = 0.1 * (std::sin(2 * kPi * cfg.alpha_n) * std::sin(2 * kPi * cfg.beta_n) *
                                 std::sin(2 * kPi * cfg.gamma_n) +
                             1.0);
    EXPECT_NEAR(s.u[1], u1, 1e-16);
    EXPECT_NEAR(s.y[2], 0.4 * 0.19 + 0.4 * 0.19 * 0.19 + 0.6 * u1 * u1 * u1 + 0.1, 1e-15);
    for (double u : s.u) {
        EXPECT_GE(u, 0.0);
        EXPECT_LE(u, 0.2);
    }
    EXPECT_THROW(narma2_series(cfg, 1), ConfigError);
}

TEST(MackeyGlass, EquilibriaAndBounds) {
    MackeyGlassConfig one;
    one.history = 1.0;
    one.x0 = 1.0;
    const auto a = mackey_glass_series(one, 300);
    EXPECT_LT((a.data.array() - 1.0).abs().maxCoeff(), 1e-14);

    MackeyGlassConfig zero;
    zero.history = 0.0;
    zero.x0 = 0.0;
    EXPECT_EQ(mackey_glass_series(zero, 300).data.cwiseAbs().maxCoeff(), 0.0);

    const auto c = mackey_glass_series({}, 1000);
    EXPECT_GT(c.data.minCoeff(), 0.0);
    EXPECT_LT(c.data.maxCoeff(), 2.0);

    MackeyGlassConfig bad;
    bad.dt = 0.3;
    EXPECT_THROW(mackey_glass_series(bad, 10), ConfigError);
}

TEST(TimeSeriesCsv, RoundTripIsExact) {
    const auto ts = lorenz_trajectory(Model::L8, ConvectionParams::standard(), {0.02, 50, 10, 4});
    std::ostringstream os;
    write_csv(os, ts);
    std::istringstream is(os.str());
    const auto back = read_csv(is);
    EXPECT_TRUE(back.data == ts.data);
    EXPECT_EQ(back.labels, ts.labels);
    EXPECT_DOUBLE_EQ(back.dt, ts.dt);
}

TEST(TimeSeriesCsv, TruncatedRowNamesItsLine) {
    std::istringstream is("tau,A1,B1,B2\n0,1,2,3\n0.02,1,2,3\n0.04,1,2\n");
    try {
        (void)read_csv(is, "x.csv");
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 4U);
        EXPECT_NE(std::string(e.what()).find("x.csv:4"), std::string::npos);
    }
}

} // namespace
