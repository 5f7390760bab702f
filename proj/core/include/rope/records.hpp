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

#include "rope/experiments.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace rope {

/// Overrides fields of `base` from a JSON object whose keys are the
/// ExperimentConfig field names. Unknown keys are an InputError.
ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
std::string config_to_json(const ExperimentConfig& cfg);

/// Per-state radius file: a JSON object {"<state index>": rho, ...} covering every state.
Vector load_radii(const std::filesystem::path& path, int n_states);
void save_radii(const std::filesystem::path& path, const Vector& rho);

/// Modeling choices that every output carries.
std::vector<std::string> modeling_notes(const std::string& env);

/// Sidecar for a result table: experiment name, config, version, notes.
std::string sidecar_json(const std::string& experiment, const ExperimentConfig& cfg, std::size_t rows);

struct OpeRecord {
    std::string env;
    RobustEstimate lower;
    RobustEstimate upper;
    std::optional<double> plug_in;
    std::optional<double> true_value;
    ConfidenceInterval ci;
    RadiusSchedule schedule;
};

struct AdversarialRecord {
    std::string env;
    AdversarialEstimate estimate;
    Vector rho;
    std::optional<double> reference;  ///< L_adv(rho) from exact conditionals
};

struct BatchRecord {
    std::string env;
    BatchResult robust;
    std::optional<BatchResult> saa;
    RadiusSchedule schedule;
    double optimal_value = 0.0;
    double robust_policy_value = 0.0;
    std::optional<double> saa_policy_value;
    double correction = 0.0;
};

std::string to_json(const OpeRecord& record);
std::string to_json(const AdversarialRecord& record);
std::string to_json(const BatchRecord& record);

} // namespace rope
