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

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace qrc {

/// Uniformly sampled multivariate series. Row i holds the state at
/// tau0 + i * dt.
struct TimeSeries {
    double dt = 0.0;
    double tau0 = 0.0;
    std::vector<std::string> labels;
    Eigen::MatrixXd data;

    [[nodiscard]] Eigen::Index steps() const { return data.rows(); }
    [[nodiscard]] Eigen::Index dof() const { return data.cols(); }
    [[nodiscard]] double tau(Eigen::Index row) const { return tau0 + static_cast<double>(row) * dt; }

    /// Rows [first, first + count).
    [[nodiscard]] TimeSeries slice(Eigen::Index first, Eigen::Index count) const;
    /// Keeps only the given columns, in the given order.
    [[nodiscard]] TimeSeries columns(const std::vector<int> &cols) const;
    /// Column index of a label, or -1.
    [[nodiscard]] int column_of(const std::string &label) const;

    /// Throws if dt <= 0, labels and columns disagree, or any entry is non-finite.
    void validate() const;
};

/// Default labels: A1..AN followed by B1..BM.
std::vector<std::string> mode_labels(int n_stream, int n_temp);

/// CSV with header `tau,<labels...>`; values use the shortest exact round-trip form.
void write_csv(std::ostream &os, const TimeSeries &series);
void write_csv(const std::filesystem::path &path, const TimeSeries &series);

/// Inverse of write_csv. dt is recovered from the first two tau values.
/// Malformed rows raise ParseError naming the line.
TimeSeries read_csv(std::istream &is, const std::string &source = "<stream>");
TimeSeries read_csv(const std::filesystem::path &path);

/// Writes to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path &path, const std::string &contents);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

} // namespace qrc
