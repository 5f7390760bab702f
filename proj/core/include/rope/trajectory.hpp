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

#include <cstdint>
#include <filesystem>
#include <string>

namespace rope {

struct Transition {
    int state;
    int action;
    double reward;
    int next_state;

    bool operator==(const Transition&) const = default;
};

using Trajectory = std::vector<Transition>;

struct DatasetMeta {
    std::string env = "custom";
    std::uint64_t seed = 0;
    int episodes = 0;  ///< J
    int horizon = 0;   ///< T per trajectory
    int n_states = 0;
    int n_actions = 0;

    bool operator==(const DatasetMeta&) const = default;
};

/// Logged trajectories D = {(s_t, a_t, r_t, s_{t+1})}.
struct Dataset {
    DatasetMeta meta;
    std::vector<Trajectory> trajectories;

    std::size_t total_transitions() const;
    /// Checks index ranges and s_{t+1} == s_{t+1} continuity; throws InputError.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

/// J independent length-T rollouts of `behavior` in `mdp`. Trajectory j draws
/// from its own stream seeded with derive_seed(seed, j), so the result is a pure
/// function of the arguments and trajectories could be generated in any order.
Dataset simulate(const FiniteMdp& mdp, const Policy& behavior, int episodes, int horizon,
                 std::uint64_t seed, const std::string& env_id = "custom");

/// Concatenated single trajectory of length T (one stream), used for the
/// changing-environment study.
Dataset simulate_single(const FiniteMdp& mdp, const Policy& behavior, int horizon, std::uint64_t seed,
                        const std::string& env_id = "custom");

/// Line-oriented text format:
///   #rope-dataset v1 env=<id> seed=<u64> episodes=<J> horizon=<T> n_states=<S> n_actions=<A>
///   traj,t,s,a,r,s_next
///   0,0,3,1,20,4
/// Floats use the shortest round-trip decimal representation.
void write_dataset(std::ostream& out, const Dataset& ds);
Dataset read_dataset(std::istream& in);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);
/// Strict parse of a full token; throws InputError.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

} // namespace rope
