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

#include "rope/adversarial.hpp"
#include "rope/batch_rl.hpp"
#include "rope/environments.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

namespace rope {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
    std::string env = "mrp";
    std::string behavior = "default";  ///< default | uniform | q<k>, e.g. q5
    double epsilon = 0.3;
    double gamma = 0.95;
    double alpha = 0.05;
    std::vector<int> episodes{300};    ///< J grid
    std::vector<int> horizons{300};    ///< T grid (per trajectory)
    std::vector<long> totals{};        ///< adversarial study: total transitions per dataset
    bool paired = false;               ///< zip the J and T grids instead of crossing them
    int trials = 1;
    std::uint64_t seed = 7;
    std::string radii = "formula";     ///< formula | fixed
    std::vector<double> fixed_rho{};   ///< one entry per state, or a single uniform value
    double rho_scale = 1.0;            ///< multiplier on formula radii
    bool corrected = true;
    double value_bound = 0.0;          ///< nonpositive means 2 r_max / (1 - gamma)
    bool missing_bound = false;
    bool project = true;
    int tune_grid = 400;               ///< grid points on [0, diam] for tune-rho
    int threads = 0;                   ///< 0 means hardware concurrency

    /// Throws InputError on empty grids, nonpositive sizes or unknown names.
    void validate() const;
};

/// Rows of string cells sorted by an integer key before writing.
class ResultTable {
public:
    ResultTable(std::string experiment, std::vector<std::string> columns);

    void add_row(std::vector<long long> key, std::vector<std::string> cells);
    void sort();

    const std::string& experiment() const noexcept { return experiment_; }
    const std::vector<std::string>& columns() const noexcept { return columns_; }
    std::size_t size() const noexcept { return rows_.size(); }
    const std::vector<std::string>& row(std::size_t i) const { return rows_[i].cells; }
    /// Cell by column name.
    const std::string& cell(std::size_t i, const std::string& column) const;
    double number(std::size_t i, const std::string& column) const;

    void write_csv(std::ostream& out) const;

private:
    struct Row {
        std::vector<long long> key;
        std::vector<std::string> cells;
    };
    std::string experiment_;
    std::vector<std::string> columns_;
    std::vector<Row> rows_;
};

/// Writes `table` as CSV to `path` and the config sidecar to `path` + ".json".
void write_results(const ResultTable& table, const ExperimentConfig& cfg, const std::filesystem::path& path);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Results must be
/// written by index; the call is deterministic as long as body(i) is.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

Policy make_behavior(const ExperimentConfig& cfg, EnvId env, const FiniteMdp& mdp);
IterationOptions iteration_options(const ExperimentConfig& cfg);

/// cfg.fixed_rho as a per-state vector; a single entry is broadcast.
Vector fixed_radius_vector(const ExperimentConfig& cfg, int n_states);

/// Grid cells (J, T) after crossing or zipping.
std::vector<std::pair<int, int>> grid_cells(const ExperimentConfig& cfg);

/// Per trial: L, U, plug-in value, correction and CI, normalized by the exact R_pi.
ResultTable run_ci_sweep(const ExperimentConfig& cfg);
/// Per grid cell: coverage and miss rate of the CI over cfg.trials datasets.
ResultTable run_coverage(const ExperimentConfig& cfg);
/// Data from the perturbed environment, L_hat(rho) / L_adv(rho) with asymptotic error bars across totals.
ResultTable run_adversarial(const ExperimentConfig& cfg);
/// Robust versus plug-in policy optimization: relative gaps and the lower-bound check.
ResultTable run_batch_compare(const ExperimentConfig& cfg);

struct TunedRadius {
    double rho = 0.0;
    int grid_index = 0;
    double adversarial_value = 0.0;  ///< L_adv(rho) from exact data-environment conditionals
    double future_value = 0.0;       ///< R_pi in the deployment environment
};

/// Smallest positive uniform radius on the grid k * diam / cfg.tune_grid (k >= 1) whose population
/// adversarial value in `data_env` does not exceed R_pi in `future_env`.
/// Bisection relies on L_adv being nonincreasing in rho. Throws EstimatorError
/// when even rho = diam is not enough.
TunedRadius tune_adversarial_radius(const FiniteMdp& future_env, const FiniteMdp& data_env, const Policy& target,
                                    const Policy& behavior, const ExperimentConfig& cfg);

/// Radii for the adversarial study: cfg.fixed_rho if given, else tuned.
Vector adversarial_radii(const ExperimentConfig& cfg);

} // namespace rope
