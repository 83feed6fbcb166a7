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
#include "qrc/timeseries.hpp"

#include "qrc/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace qrc {

TimeSeries TimeSeries::slice(Eigen::Index first, Eigen::Index count) const {
    detail::require(first >= 0 && count >= 0 && first + count <= steps(), "TimeSeries::slice out of range");
    TimeSeries out;
    out.dt = dt;
    out.tau0 = tau(first);
    out.labels = labels;
    out.data = data.middleRows(first, count);
    return out;
}

TimeSeries TimeSeries::columns(const std::vector<int> &cols) const {
    TimeSeries out;
    out.dt = dt;
    out.tau0 = tau0;
    out.data.resize(steps(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        detail::require(cols[j] >= 0 && cols[j] < dof(), "TimeSeries::columns index out of range");
        out.data.col(static_cast<Eigen::Index>(j)) = data.col(cols[j]);
        out.labels.push_back(static_cast<std::size_t>(cols[j]) < labels.size() ? labels[cols[j]]
                                                                              : "x" + std::to_string(cols[j]));
    }
    return out;
}

int TimeSeries::column_of(const std::string &label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

void TimeSeries::validate() const {
    if (!(dt > 0.0)) {
        throw ContractViolation("TimeSeries: dt must be positive");
    }
    if (static_cast<Eigen::Index>(labels.size()) != dof()) {
        throw ContractViolation("TimeSeries: label count does not match column count");
    }
    if (!data.allFinite()) {
        throw ContractViolation("TimeSeries: non-finite entry");
    }
}

std::vector<std::string> mode_labels(int n_stream, int n_temp) {
    std::vector<std::string> labels;
    for (int i = 1; i <= n_stream; ++i) {
        labels.push_back("A" + std::to_string(i));
    }
    for (int k = 1; k <= n_temp; ++k) {
        labels.push_back("B" + std::to_string(k));
    }
    return labels;
}

std::string format_double(double value) {
    // Shortest representation that parses back to the same double.
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return {buf, res.ptr};
}

void write_csv(std::ostream &os, const TimeSeries &series) {
    os << "tau";
    for (const auto &label : series.labels) {
        os << ',' << label;
    }
    os << '\n';
    for (Eigen::Index i = 0; i < series.steps(); ++i) {
        os << format_double(series.tau(i));
        for (Eigen::Index j = 0; j < series.dof(); ++j) {
            os << ',' << format_double(series.data(i, j));
        }
        os << '\n';
    }
}

void write_file_atomic(const std::filesystem::path &path, const std::string &contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot open " + tmp.string() + " for writing");
        }
        out << contents;
        if (!out) {
            throw Error("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

void write_csv(const std::filesystem::path &path, const TimeSeries &series) {
    std::ostringstream os;
    write_csv(os, series);
    write_file_atomic(path, os.str());
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

double parse_number(std::string_view field, const std::string &source, std::size_t line) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
        field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
        field.remove_suffix(1);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError(source, line, "not a number: '" + std::string(field) + "'");
    }
    return value;
}

} // namespace

TimeSeries read_csv(std::istream &is, const std::string &source) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line)) {
        throw ParseError(source, 1, "empty file");
    }
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    auto header = split(line, ',');
    if (header.size() < 2 || header.front() != "tau") {
        throw ParseError(source, lineno, "expected header 'tau,<columns...>'");
    }
    TimeSeries out;
    for (std::size_t j = 1; j < header.size(); ++j) {
        out.labels.emplace_back(header[j]);
    }
    const auto cols = header.size();
    std::vector<double> taus;
    std::vector<double> values;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") {
            continue;
        }
        auto fields = split(line, ',');
        if (fields.size() != cols) {
            throw ParseError(source, lineno,
                             "expected " + std::to_string(cols) + " fields, found " + std::to_string(fields.size()));
        }
        taus.push_back(parse_number(fields[0], source, lineno));
        for (std::size_t j = 1; j < cols; ++j) {
            values.push_back(parse_number(fields[j], source, lineno));
        }
    }
    if (taus.size() < 2) {
        throw ParseError(source, lineno, "need at least two data rows");
    }
    const auto rows = static_cast<Eigen::Index>(taus.size());
    out.data = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), rows, static_cast<Eigen::Index>(cols - 1));
    out.tau0 = taus.front();
    out.dt = taus[1] - taus[0];
    if (!(out.dt > 0.0)) {
        throw ParseError(source, 3, "tau column must be increasing");
    }
    return out;
}

TimeSeries read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return read_csv(in, path.string());
}

} // namespace qrc
