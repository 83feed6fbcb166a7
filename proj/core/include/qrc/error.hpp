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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qrc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (bad index, dimension mismatch).
class ContractViolation : public Error {
  public:
    using Error::Error;
};

/// Invalid configuration value (detected before any computation starts).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A trajectory or prediction produced NaN/Inf.
class DivergedError : public Error {
  public:
    DivergedError(const std::string &what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

  private:
    std::size_t step_;
};

/// A quantity left the representable range (Lyapunov separation, ...).
class NumericRangeError : public Error {
  public:
    using Error::Error;
};

/// The ridge normal equations are numerically singular.
class SingularSystemError : public Error {
  public:
    using Error::Error;
};

/// Malformed input file. The message carries the path and line number.
class ParseError : public Error {
  public:
    ParseError(const std::string &source, std::size_t line, const std::string &msg)
        : Error(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

namespace detail {
inline void require(bool cond, const char *msg) {
    if (!cond) {
        throw ContractViolation(msg);
    }
}
} // namespace detail

} // namespace qrc
