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

#include "rope/common.hpp"

#include <filesystem>
#include <string>

namespace rope {

/**
 * Ground metric on the action x next-state space A x S.
 *
 * Points are indexed z = a * n_states + s'. The table is dense, symmetric, zero on
 * the diagonal, strictly positive off it, and satisfies the triangle inequality;
 * construction verifies all of this (exhaustively up to 64 points, on a
 * deterministic sample of triples above that).
 */
class CostMetric {
public:
    enum class Kind { kDefault, kCustom };

    /// c((a,s),(a',s')) = (|s - s'| + |a - a'|) / (|S| + |A|).
    static CostMetric standard(int n_actions, int n_states);
    /// Custom table, validated.
    static CostMetric from_table(int n_actions, int n_states, Matrix table);

    int n_actions() const noexcept { return n_actions_; }
    int n_states() const noexcept { return n_states_; }
    int n_points() const noexcept { return n_actions_ * n_states_; }
    int point(int action, int next_state) const noexcept { return action * n_states_ + next_state; }
    int action_of(int z) const noexcept { return z / n_states_; }
    int state_of(int z) const noexcept { return z % n_states_; }

    double operator()(int z1, int z2) const { return table_(z1, z2); }
    const Matrix& table() const noexcept { return table_; }
    double diameter() const noexcept { return diameter_; }
    Kind kind() const noexcept { return kind_; }

private:
    CostMetric(int n_actions, int n_states, Matrix table, Kind kind);

    int n_actions_;
    int n_states_;
    Matrix table_;
    double diameter_;
    Kind kind_;
};

/// Line-record cost file:
///   #rope-cost v1 n_actions=<A> n_states=<S>
///   a,s,a2,s2,cost      (one record per ordered pair, all pairs present)
CostMetric load_cost_table(const std::filesystem::path& path);
void save_cost_table(const CostMetric& cost, const std::filesystem::path& path);

} // namespace rope
