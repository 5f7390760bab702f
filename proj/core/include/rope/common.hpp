// Copyright 2026 The rope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rope {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Invalid user input: dimensions, ranges, malformed files. Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An estimator could not produce a result (non-convergence, singular system).
/// Carries free-form diagnostics lines. Maps to CLI exit code 3.
class EstimatorError : public std::runtime_error {
public:
    explicit EstimatorError(const std::string& what, std::vector<std::string> diagnostics = {})
        : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

/// Thrown when states have no logged transitions. Lists the offending states.
class UncoveredStatesError : public InputError {
public:
    explicit UncoveredStatesError(std::vector<int> states);
    const std::vector<int>& states() const noexcept { return states_; }

private:
    std::vector<int> states_;
};

/// A violated internal invariant; indicates a bug, never bad input.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace rope
