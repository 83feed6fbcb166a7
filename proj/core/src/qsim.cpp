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
#include "qrc/qsim.hpp"

#include "qrc/error.hpp"
#include "qrc/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace qrc::qsim {

PureState PureState::zero(int n) { return basis(n, 0); }

PureState PureState::basis(int n, std::size_t k) {
    if (n < 1 || n > 30) {
        throw ContractViolation("PureState: qubit count must lie in [1, 30]");
    }
    PureState s;
    s.n = n;
    s.amps.assign(std::size_t{1} << n, Complex{0.0, 0.0});
    detail::require(k < s.amps.size(), "PureState::basis index out of range");
    s.amps[k] = 1.0;
    return s;
}

double PureState::norm_sq() const {
    double acc = 0.0;
    for (const auto &a : amps) {
        acc += std::norm(a);
    }
    return acc;
}

namespace {

void check_qubit(const PureState &s, int q) {
    if (q < 0 || q >= s.n) {
        throw ContractViolation("qubit index " + std::to_string(q) + " out of range for " + std::to_string(s.n) +
                                " qubits");
    }
}

// Visits every index with the masked bit clear.
template <typename F>
void for_each_pair(std::size_t dim, std::size_t mask, F &&f) {
    for (std::size_t base = 0; base < dim; base += 2 * mask) {
        for (std::size_t i = base; i < base + mask; ++i) {
            f(i, i | mask);
        }
    }
}

} // namespace

void apply_ry(PureState &state, int qubit, double angle) {
    check_qubit(state, qubit);
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    auto *a = state.amps.data();
    for_each_pair(state.dim(), qubit_mask(state.n, qubit), [&](std::size_t i0, std::size_t i1) {
        const Complex a0 = a[i0];
        const Complex a1 = a[i1];
        a[i0] = c * a0 - s * a1;
        a[i1] = s * a0 + c * a1;
    });
}

void apply_cnot(PureState &state, int control, int target) {
    check_qubit(state, control);
    check_qubit(state, target);
    if (control == target) {
        throw ContractViolation("CNOT control and target must differ");
    }
    const std::size_t cm = qubit_mask(state.n, control);
    auto *a = state.amps.data();
    for_each_pair(state.dim(), qubit_mask(state.n, target), [&](std::size_t i0, std::size_t i1) {
        if (i0 & cm) {
            std::swap(a[i0], a[i1]);
        }
    });
}

void apply_x(PureState &state, int qubit) {
    check_qubit(state, qubit);
    auto *a = state.amps.data();
    for_each_pair(state.dim(), qubit_mask(state.n, qubit), [&](std::size_t i0, std::size_t i1) {
        std::swap(a[i0], a[i1]);
    });
}

void apply_y(PureState &state, int qubit) {
    check_qubit(state, qubit);
    const Complex i{0.0, 1.0};
    auto *a = state.amps.data();
    for_each_pair(state.dim(), qubit_mask(state.n, qubit), [&](std::size_t i0, std::size_t i1) {
        const Complex a0 = a[i0];
        a[i0] = -i * a[i1];
        a[i1] = i * a0;
    });
}

void apply_z(PureState &state, int qubit) {
    check_qubit(state, qubit);
    auto *a = state.amps.data();
    for_each_pair(state.dim(), qubit_mask(state.n, qubit), [&](std::size_t, std::size_t i1) { a[i1] = -a[i1]; });
}

void Circuit::add(const Gate &gate) {
    const auto bad = [this](int q) { return q < 0 || q >= n; };
    if (bad(gate.q0) || (gate.kind == GateKind::CNOT && (bad(gate.q1) || gate.q0 == gate.q1))) {
        throw ContractViolation("invalid gate for a " + std::to_string(n) + "-qubit circuit");
    }
    gates.push_back(gate);
}

void Circuit::append(std::span<const Gate> more) {
    for (const auto &g : more) {
        add(g);
    }
}

void Circuit::validate() const {
    Circuit probe{n, {}};
    probe.append(gates);
}

std::size_t Circuit::count(GateKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(gates.begin(), gates.end(), [kind](const Gate &g) { return g.kind == kind; }));
}

void write_circuit(std::ostream &os, const Circuit &circuit) {
    os << "QUBITS " << circuit.n << '\n';
    for (const auto &g : circuit.gates) {
        if (g.kind == GateKind::RY) {
            os << "RY " << g.q0 << ' ' << format_double(g.angle) << '\n';
        } else {
            os << "CNOT " << g.q0 << ' ' << g.q1 << '\n';
        }
    }
}

Circuit read_circuit(std::istream &is, const std::string &source) {
    std::string line;
    std::size_t lineno = 0;
    Circuit c;
    bool have_header = false;
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string op;
        if (!(ls >> op)) {
            continue;
        }
        if (!have_header) {
            if (op != "QUBITS" || !(ls >> c.n) || c.n < 1) {
                throw ParseError(source, lineno, "expected 'QUBITS n'");
            }
            have_header = true;
            continue;
        }
        Gate g;
        if (op == "RY") {
            g.kind = GateKind::RY;
            if (!(ls >> g.q0 >> g.angle)) {
                throw ParseError(source, lineno, "expected 'RY qubit angle'");
            }
        } else if (op == "CNOT") {
            g.kind = GateKind::CNOT;
            if (!(ls >> g.q0 >> g.q1)) {
                throw ParseError(source, lineno, "expected 'CNOT control target'");
            }
        } else {
            throw ParseError(source, lineno, "unknown gate '" + op + "'");
        }
        try {
            c.add(g);
        } catch (const ContractViolation &e) {
            throw ParseError(source, lineno, e.what());
        }
    }
    if (!have_header) {
        throw ParseError(source, lineno, "missing 'QUBITS n' header");
    }
    return c;
}

BlockFragment build_block(int n, std::span<const double> angles, int start_cursor) {
    if (n < 1 || start_cursor < 0 || start_cursor >= n) {
        throw ContractViolation("build_block: invalid qubit count or cursor");
    }
    BlockFragment out;
    out.gates.reserve(2 * angles.size());
    int cursor = start_cursor;
    for (double angle : angles) {
        out.gates.push_back(Gate::ry(cursor, angle));
        if (n > 1) {
            out.gates.push_back(Gate::cnot(cursor, cursor == n - 1 ? cursor - 1 : cursor + 1));
        }
        cursor = (cursor + 1) % n;
    }
    out.end_cursor = cursor;
    return out;
}

namespace {

std::vector<double> scaled(std::span<const double> values, double scale) {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [scale](double v) { return scale * v; });
    return out;
}

} // namespace

Circuit build_reservoir_circuit(int n, std::span<const double> p_prev, std::span<const double> x_in,
                                std::span<const double> beta, double scale) {
    if (beta.size() != static_cast<std::size_t>(n)) {
        throw ConfigError("build_reservoir_circuit: beta must hold one angle per qubit");
    }
    Circuit c{n, {}};
    auto first = build_block(n, scaled(p_prev, scale), 0);
    auto second = build_block(n, scaled(x_in, scale), first.end_cursor);
    auto third = build_block(n, beta, second.end_cursor);
    c.gates.reserve(first.gates.size() + second.gates.size() + third.gates.size());
    for (auto *frag : {&first, &second, &third}) {
        c.gates.insert(c.gates.end(), frag->gates.begin(), frag->gates.end());
    }
    return c;
}

Circuit build_reduced_circuit(int n, std::span<const double> p_selected, std::span<const double> x_in,
                              double scale) {
    std::vector<double> values(p_selected.begin(), p_selected.end());
    values.insert(values.end(), x_in.begin(), x_in.end());
    auto frag = build_block(n, scaled(values, scale), 0);
    return Circuit{n, std::move(frag.gates)};
}

namespace {

void apply_gate(PureState &state, const Gate &g) {
    if (g.kind == GateKind::RY) {
        apply_ry(state, g.q0, g.angle);
    } else {
        apply_cnot(state, g.q0, g.q1);
    }
}

} // namespace

PureState run_circuit(const Circuit &circuit) {
    auto state = PureState::zero(circuit.n);
    for (const auto &g : circuit.gates) {
        apply_gate(state, g);
    }
    return state;
}

ProbVector exact_probabilities(const PureState &state) {
    ProbVector p(state.dim());
    std::transform(state.amps.begin(), state.amps.end(), p.begin(), [](const Complex &a) { return std::norm(a); });
    return p;
}

void validate_probabilities(std::span<const double> p, double tol) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= -tol && v <= 1.0 + tol)) {
            throw ContractViolation("probability entry outside [0, 1]");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
        throw ContractViolation("probabilities do not sum to 1");
    }
}

namespace {

// Multinomial counts by sequential conditional binomials.
void accumulate_counts(std::span<const double> probs, std::uint64_t shots, std::mt19937_64 &rng,
                       std::vector<std::uint64_t> &counts) {
    std::uint64_t remaining = shots;
    double mass = 1.0;
    for (std::size_t k = 0; k < probs.size() && remaining > 0; ++k) {
        if (k + 1 == probs.size()) {
            counts[k] += remaining;
            break;
        }
        const double q = mass > 0.0 ? std::clamp(probs[k] / mass, 0.0, 1.0) : 1.0;
        mass -= probs[k];
        if (q <= 0.0) {
            continue;
        }
        std::uint64_t c = remaining;
        if (q < 1.0) {
            std::binomial_distribution<std::uint64_t> bin(remaining, q);
            c = bin(rng);
        }
        counts[k] += c;
        remaining -= c;
    }
}

} // namespace

ProbVector sample_distribution(std::span<const double> probs, std::uint64_t shots, std::uint64_t seed) {
    if (shots == 0) {
        throw ConfigError("sample_shots: shot count must be >= 1");
    }
    std::mt19937_64 rng(derive_seed(seed, 0));
    std::vector<std::uint64_t> counts(probs.size(), 0);
    accumulate_counts(probs, shots, rng, counts);
    ProbVector freq(probs.size());
    for (std::size_t k = 0; k < probs.size(); ++k) {
        freq[k] = static_cast<double>(counts[k]) / static_cast<double>(shots);
    }
    return freq;
}

ProbVector sample_shots(const PureState &state, std::uint64_t shots, std::uint64_t seed) {
    return sample_distribution(exact_probabilities(state), shots, seed);
}

void NoiseConfig::validate() const {
    for (double p : {p_gate, p_meas, p_reset}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError("noise probabilities must lie in [0, 1]");
        }
    }
}

void apply_readout_noise(std::vector<double> &probs, int n, double p_reset, double p_meas) {
    const std::size_t dim = probs.size();
    for (int q = 0; q < n; ++q) {
        const std::size_t m = qubit_mask(n, q);
        if (p_reset > 0.0) {
            for_each_pair(dim, m, [&](std::size_t i0, std::size_t i1) {
                const double moved = p_reset * probs[i1];
                probs[i0] += moved;
                probs[i1] -= moved;
            });
        }
        if (p_meas > 0.0) {
            for_each_pair(dim, m, [&](std::size_t i0, std::size_t i1) {
                const double a = probs[i0], b = probs[i1];
                probs[i0] = (1.0 - p_meas) * a + p_meas * b;
                probs[i1] = (1.0 - p_meas) * b + p_meas * a;
            });
        }
    }
}

ProbVector noisy_run(const Circuit &circuit, const NoiseConfig &noise, std::uint64_t shots, std::uint64_t seed) {
    noise.validate();
    if (shots == 0) {
        throw ConfigError("noisy_run: shot count must be >= 1");
    }
    if (noise.is_noiseless()) {
        return sample_shots(run_circuit(circuit), shots, seed);
    }
    std::uint64_t trajectories = 1;
    if (noise.p_gate > 0.0) {
        trajectories = noise.max_trajectories == 0 ? shots : std::min(shots, noise.max_trajectories);
    }
    const std::uint64_t base = shots / trajectories;
    const std::uint64_t extra = shots % trajectories;
    std::vector<std::uint64_t> counts(std::size_t{1} << circuit.n, 0);
    for (std::uint64_t j = 0; j < trajectories; ++j) {
        std::mt19937_64 rng(derive_seed(seed, 2 * j + 1));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::uniform_int_distribution<int> pauli(0, 2);
        auto state = PureState::zero(circuit.n);
        for (const auto &g : circuit.gates) {
            apply_gate(state, g);
            if (noise.p_gate > 0.0 && uni(rng) < noise.p_gate) {
                switch (pauli(rng)) {
                case 0: apply_x(state, g.target()); break;
                case 1: apply_y(state, g.target()); break;
                default: apply_z(state, g.target()); break;
                }
            }
        }
        auto probs = exact_probabilities(state);
        apply_readout_noise(probs, circuit.n, noise.p_reset, noise.p_meas);
        accumulate_counts(probs, base + (j < extra ? 1 : 0), rng, counts);
    }
    ProbVector freq(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        freq[k] = static_cast<double>(counts[k]) / static_cast<double>(shots);
    }
    return freq;
}

BlockPartition BlockPartition::make(int n, int p) {
    if (n < 1 || p < 1 || p > n) {
        throw ConfigError("block partition needs 1 <= p <= n");
    }
    BlockPartition part;
    part.n = n;
    part.p = p;
    for (int start = 0; start < n; start += p) {
        std::vector<int> block;
        for (int q = start; q < std::min(n, start + p); ++q) {
            block.push_back(q);
        }
        part.blocks.push_back(std::move(block));
    }
    return part;
}

void BlockPartition::validate() const {
    if (n < 1 || p < 1 || p > n) {
        throw ConfigError("invalid block partition");
    }
    int expect = 0;
    for (const auto &block : blocks) {
        if (block.empty() || static_cast<int>(block.size()) > p) {
            throw ConfigError("invalid block partition");
        }
        for (int q : block) {
            if (q != expect++) {
                throw ConfigError("block partition must be contiguous and ascending");
            }
        }
    }
    if (expect != n) {
        throw ConfigError("block partition does not cover all qubits");
    }
}

int BlockPartition::block_of(int q) const {
    detail::require(q >= 0 && q < n, "BlockPartition::block_of out of range");
    return q / p;
}

namespace {

// Gates of the blocked constructor in global qubit indices.
std::vector<Gate> blocked_gates(const BlockPartition &part, std::span<const double> angles) {
    std::vector<Gate> gates;
    gates.reserve(2 * angles.size());
    int cursor = 0;
    for (double angle : angles) {
        gates.push_back(Gate::ry(cursor, angle));
        const auto &block = part.blocks[static_cast<std::size_t>(part.block_of(cursor))];
        if (block.size() > 1) {
            gates.push_back(Gate::cnot(cursor, cursor == block.back() ? cursor - 1 : cursor + 1));
        }
        cursor = (cursor + 1) % part.n;
    }
    return gates;
}

} // namespace

Circuit build_blocked_circuit(const BlockPartition &partition, std::span<const double> angles) {
    partition.validate();
    Circuit c{partition.n, {}};
    c.append(blocked_gates(partition, angles));
    return c;
}

ProbVector run_blocked_circuit(const BlockPartition &partition, std::span<const double> angles) {
    partition.validate();
    const auto gates = blocked_gates(partition, angles);
    std::vector<PureState> registers;
    for (const auto &block : partition.blocks) {
        registers.push_back(PureState::zero(static_cast<int>(block.size())));
    }
    for (const auto &g : gates) {
        const auto b = static_cast<std::size_t>(partition.block_of(g.q0));
        const int offset = partition.blocks[b].front();
        if (g.kind == GateKind::RY) {
            apply_ry(registers[b], g.q0 - offset, g.angle);
        } else {
            apply_cnot(registers[b], g.q0 - offset, g.q1 - offset);
        }
    }
    std::vector<ProbVector> parts;
    parts.reserve(registers.size());
    for (const auto &r : registers) {
        parts.push_back(exact_probabilities(r));
    }
    return tensor_product(parts);
}

ProbVector tensor_product(std::span<const ProbVector> parts) {
    ProbVector out{1.0};
    for (const auto &part : parts) {
        ProbVector next(out.size() * part.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            for (std::size_t j = 0; j < part.size(); ++j) {
                next[i * part.size() + j] = out[i] * part[j];
            }
        }
        out = std::move(next);
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace qrc::qsim
