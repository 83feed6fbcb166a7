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
#include "qrc/experiments.hpp"
#include "qrc/reservoir.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace qrc::config {

struct KeySpec {
    std::string key;  ///< dotted path, section.name
    std::string default_value;
    std::string help;
};

/// Every accepted key in file order.
const std::vector<KeySpec> &key_specs();

/// Flat key/value view of an INI file. Values stay strings until a typed
/// getter converts them, so that a dumped file reproduces the input exactly.
class RunConfig {
  public:
    RunConfig();

    /// Sections and `key = value` lines; `;` and `#` start comments. Unknown
    /// sections or keys raise ConfigError naming the source and line.
    static RunConfig parse(std::istream &in, const std::string &source = "<config>");
    static RunConfig load(const std::filesystem::path &path);

    /// Throws ConfigError for an unknown key.
    void set(const std::string &key, const std::string &value);
    /// Applies `key=value`.
    void set_assignment(const std::string &assignment);
    [[nodiscard]] const std::string &get(const std::string &key) const;
    [[nodiscard]] bool is_auto(const std::string &key) const;

    [[nodiscard]] double number(const std::string &key) const;
    [[nodiscard]] std::int64_t integer(const std::string &key) const;
    [[nodiscard]] std::uint64_t count(const std::string &key) const;
    [[nodiscard]] bool flag(const std::string &key) const;
    [[nodiscard]] std::vector<double> numbers(const std::string &key) const;
    [[nodiscard]] std::vector<std::string> strings(const std::string &key) const;

    /// INI text with every key, documented; parse(dump()) == *this.
    [[nodiscard]] std::string dump() const;

    /// Type and range checks for every key.
    void validate() const;

    bool operator==(const RunConfig &other) const { return values_ == other.values_; }

  private:
    std::map<std::string, std::string> values_;
};

/// `key = default  help` lines for --help.
std::string reference_text();

/// Parses "1..32" or "1,2,4" style integer lists.
std::vector<double> parse_list(const std::string &text, const std::string &key);

dynamics::ConvectionParams convection_params(const RunConfig &cfg);
dynamics::TrajectoryOptions trajectory_options(const RunConfig &cfg);
dynamics::MackeyGlassConfig mackey_glass_config(const RunConfig &cfg);

/// Reservoir configs for `n_in` input columns. The data handed to them is
/// already normalized when training.normalize is set, so the QRCM input map
/// is then the identity.
reservoir::QrcConfig qrc_config(const RunConfig &cfg, std::size_t n_in);
reservoir::CrcConfig crc_config(const RunConfig &cfg, std::size_t n_in);

/// Scenario defaults overridden by every sweep.* and grid.* key not set to
/// `auto`.
experiments::SweepSpec sweep_spec(const RunConfig &cfg);

/// Replaces the base seeds with QRC_SEED when that variable is set.
void apply_seed_env(RunConfig &cfg);

} // namespace qrc::config
