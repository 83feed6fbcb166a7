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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

/// Exact statevector simulation of RY/CNOT reservoir circuits.
///
/// Basis ordering is big-endian: in basis index k, qubit 0 is the most
/// significant bit, so qubit q corresponds to bit (n - 1 - q).
namespace qrc::qsim {

using Complex = std::complex<double>;

struct PureState {
    int n = 0;
    std::vector<Complex> amps;

    /// |0...0> on n qubits.
    static PureState zero(int n);
    /// Basis state |k>.
    static PureState basis(int n, std::size_t k);

    [[nodiscard]] std::size_t dim() const { return amps.size(); }
    [[nodiscard]] double norm_sq() const;
};

/// Bit mask of qubit q in an n-qubit basis index.
constexpr std::size_t qubit_mask(int n, int q) { return std::size_t{1} << (n - 1 - q); }

void apply_ry(PureState &state, int qubit, double angle);
void apply_cnot(PureState &state, int control, int target);
void apply_x(PureState &state, int qubit);
void apply_y(PureState &state, int qubit);
void apply_z(PureState &state, int qubit);

enum class GateKind { RY, CNOT };

struct Gate {
    GateKind kind = GateKind::RY;
    int q0 = 0;          ///< RY target, or CNOT control
    int q1 = -1;         ///< CNOT target
    double angle = 0.0;  ///< radians, RY only

    static Gate ry(int qubit, double angle) { return {GateKind::RY, qubit, -1, angle}; }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, control, target, 0.0}; }

    /// Qubit the gate acts on non-trivially (RY target, CNOT target).
    [[nodiscard]] int target() const { return kind == GateKind::RY ? q0 : q1; }

    bool operator==(const Gate &) const = default;
};

struct Circuit {
    int n = 0;
    std::vector<Gate> gates;

    /// Validates indices against n; throws ContractViolation.
    void add(const Gate &gate);
    void append(std::span<const Gate> more);
    void validate() const;

    [[nodiscard]] std::size_t count(GateKind kind) const;
    bool operator==(const Circuit &) const = default;
};

/// Text form: header `QUBITS n`, then one gate per line (`RY q theta` or `CNOT c t`).
void write_circuit(std::ostream &os, const Circuit &circuit);
Circuit read_circuit(std::istream &is, const std::string &source = "<stream>");

struct BlockFragment {
    std::vector<Gate> gates;
    int end_cursor = 0;
};

/// One RY per angle on the cursor qubit, each followed by a CNOT to the next
/// qubit (or to the previous one on the last qubit). The cursor wraps to 0
/// after n - 1; end_cursor lets consecutive blocks continue the cycle.
/// On a single qubit only rotations are emitted.
BlockFragment build_block(int n, std::span<const double> angles, int start_cursor = 0);

/// Full reservoir update circuit: blocks loading scale * p_prev, then
/// scale * x_in, then the fixed angles beta, with the cursor threaded through.
Circuit build_reservoir_circuit(int n, std::span<const double> p_prev, std::span<const double> x_in,
                                std::span<const double> beta, double scale = 4.0 * std::numbers::pi);

/// Single block loading scale * [p_selected, x_in]; no beta block.
Circuit build_reduced_circuit(int n, std::span<const double> p_selected, std::span<const double> x_in,
                              double scale = 4.0 * std::numbers::pi);

/// Applies the gates in order to |0...0>.
PureState run_circuit(const Circuit &circuit);

using ProbVector = std::vector<double>;

ProbVector exact_probabilities(const PureState &state);

/// Throws ContractViolation unless entries lie in [0, 1] and sum to 1 within tol.
void validate_probabilities(std::span<const double> p, double tol = 1e-10);

/// Empirical frequencies of `shots` projective measurements (multinomial draw
/// from the exact distribution). Deterministic in seed.
ProbVector sample_shots(const PureState &state, std::uint64_t shots, std::uint64_t seed);
/// Same, starting from a probability vector.
ProbVector sample_distribution(std::span<const double> probs, std::uint64_t shots, std::uint64_t seed);

struct NoiseConfig {
    double p_gate = 0.0;   ///< random Pauli on the gate's target qubit after each gate
    double p_meas = 0.0;   ///< independent classical bit flip per measured qubit
    double p_reset = 0.0;  ///< per-qubit reset to |0> once per shot, before measurement
    /// Upper bound on the number of distinct gate-error trajectories per
    /// execution; shots are split evenly across them. 0 means one per shot.
    std::uint64_t max_trajectories = 256;

    void validate() const;
    [[nodiscard]] bool is_noiseless() const { return p_gate == 0.0 && p_meas == 0.0 && p_reset == 0.0; }
};

/// Applies the reset and readout channels to a distribution in place.
void apply_readout_noise(std::vector<double> &probs, int n, double p_reset, double p_meas);

/// Shot-sampled outcome frequencies under the noise model. With all noise
/// probabilities zero this equals sample_shots(run_circuit(c), shots, seed).
ProbVector noisy_run(const Circuit &circuit, const NoiseConfig &noise, std::uint64_t shots, std::uint64_t seed);

/// Contiguous qubit blocks of size p, plus a trailing remainder block.
struct BlockPartition {
    int n = 0;
    int p = 0;
    std::vector<std::vector<int>> blocks;

    static BlockPartition make(int n, int p);
    void validate() const;
    /// Index of the block containing qubit q.
    [[nodiscard]] int block_of(int q) const;
};

/// Same cursor cycle as build_block over all n qubits, with each CNOT kept
/// inside the cursor's block. The result is an n-qubit circuit.
Circuit build_blocked_circuit(const BlockPartition &partition, std::span<const double> angles);

/// Runs the blocked constructor with each block simulated on its own register
/// and returns the tensor product of the block distributions.
ProbVector run_blocked_circuit(const BlockPartition &partition, std::span<const double> angles);

/// Outer product of block distributions, first block most significant.
ProbVector tensor_product(std::span<const ProbVector> parts);

/// Derives a per-use seed from a base seed and a counter (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter);

} // namespace qrc::qsim
