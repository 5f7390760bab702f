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

#include "rope/mdp.hpp"

#include <string>

namespace rope {

/// Machine replacement: states S1..S8 = 0..7, R1 = 8, R2 = 9; actions Repair = 0,
/// DoNothing = 1. Repair at R1/R2 copies the DoNothing rows. d0 uniform over all states.
FiniteMdp machine_replacement(double discount = 0.95);

/// Healthcare management: states 1..6 = 0..5 (5 is the absorbing mortality state),
/// actions a1..a3 = 0..2. d0 uniform over states 1..5.
FiniteMdp healthcare_management(double discount = 0.95);

enum class EnvId { kMachineReplacement, kHealthcare };

EnvId parse_env(const std::string& name);
const char* env_name(EnvId id) noexcept;
FiniteMdp make_env(EnvId id, double discount = 0.95);

/// Data-collection variants: MRP with (p, q) = (0.3, 0.7) for every DoNothing
/// stay/advance pair; HMP with (p1 + 0.05, p2, p3 - 0.05) for every action and
/// state 6 sent to state 5 with probability 0.05 under a3.
FiniteMdp perturbed_variant(EnvId id, double discount = 0.95);

/// Environment-specific default behavior policy: uniform for MRP,
/// q_iteration_policy(5 sweeps, epsilon) for HMP.
Policy default_behavior(EnvId id, const FiniteMdp& mdp, double epsilon = 0.3);

} // namespace rope
