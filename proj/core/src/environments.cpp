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

#include "rope/environments.hpp"

#include <algorithm>

namespace rope {

namespace {

constexpr int kMrpStates = 10;
constexpr int kR1 = 8;
constexpr int kR2 = 9;
constexpr int kRepair = 0;
constexpr int kDoNothing = 1;

FiniteMdp build_mrp(double stay, double advance, double discount) {
    const int ns = kMrpStates;
    const int na = 2;
    std::vector<double> p(static_cast<std::size_t>(ns * na * ns), 0.0);
    auto at = [&](int s, int a, int t) -> double& { return p[static_cast<std::size_t>((s * na + a) * ns + t)]; };
    for (int i = 0; i < 7; ++i) {
        at(i, kDoNothing, i) = stay;
        at(i, kDoNothing, i + 1) = advance;
    }
    at(7, kDoNothing, 7) = 1.0;
    at(kR1, kDoNothing, kR1) = 1.0;
    at(kR2, kDoNothing, kR2) = stay;
    at(kR2, kDoNothing, 0) = advance;
    for (int i = 0; i < 8; ++i) {
        at(i, kRepair, kR1) += 0.1;
        at(i, kRepair, kR2) += 0.6;
        at(i, kRepair, std::min(i + 1, 7)) += 0.3;
    }
    for (int r : {kR1, kR2})
        for (int t = 0; t < ns; ++t) at(r, kRepair, t) = at(r, kDoNothing, t);

    Matrix rewards(ns, na);
    for (int i = 0; i < 7; ++i) rewards.row(i).setConstant(20.0);
    rewards.row(7).setConstant(0.0);
    rewards.row(kR1).setConstant(18.0);
    rewards.row(kR2).setConstant(10.0);
    return {ns, na, std::move(p), std::move(rewards), discount, Vector::Constant(ns, 1.0 / ns)};
}

constexpr int kHmpStates = 6;
constexpr int kDead = 5;

/// rows[a] = {stay, up, down}
FiniteMdp build_hmp(const double (&rows)[3][3], bool leak_from_dead, double discount) {
    const int ns = kHmpStates;
    const int na = 3;
    std::vector<double> p(static_cast<std::size_t>(ns * na * ns), 0.0);
    auto at = [&](int s, int a, int t) -> double& { return p[static_cast<std::size_t>((s * na + a) * ns + t)]; };
    for (int i = 0; i < kDead; ++i) {
        for (int a = 0; a < na; ++a) {
            at(i, a, i) += rows[a][0];
            at(i, a, i + 1) += rows[a][1];
            at(i, a, std::max(0, i - 1)) += rows[a][2];
        }
    }
    for (int a = 0; a < na; ++a) at(kDead, a, kDead) = 1.0;
    if (leak_from_dead) {
        at(kDead, 2, kDead - 1) = 0.05;
        at(kDead, 2, kDead) = 0.95;
    }
    Matrix rewards(ns, na);
    for (int i = 0; i < kDead; ++i) rewards.row(i) << 10.0, 6.0, 2.0;
    rewards.row(kDead).setZero();
    Vector d0 = Vector::Constant(ns, 1.0 / kDead);
    d0(kDead) = 0.0;
    return {ns, na, std::move(p), std::move(rewards), discount, std::move(d0)};
}

constexpr double kHmpRows[3][3] = {{0.4, 0.3, 0.3}, {0.4, 0.2, 0.4}, {0.4, 0.1, 0.5}};
constexpr double kHmpPerturbed[3][3] = {{0.45, 0.3, 0.25}, {0.45, 0.2, 0.35}, {0.45, 0.1, 0.45}};

} // namespace

FiniteMdp machine_replacement(double discount) { return build_mrp(0.2, 0.8, discount); }

FiniteMdp healthcare_management(double discount) { return build_hmp(kHmpRows, false, discount); }

EnvId parse_env(const std::string& name) {
    if (name == "mrp" || name == "machine-replacement") return EnvId::kMachineReplacement;
    if (name == "hmp" || name == "healthcare") return EnvId::kHealthcare;
    throw InputError("unknown environment '" + name + "' (expected mrp or hmp)");
}

const char* env_name(EnvId id) noexcept { return id == EnvId::kMachineReplacement ? "mrp" : "hmp"; }

FiniteMdp make_env(EnvId id, double discount) {
    return id == EnvId::kMachineReplacement ? machine_replacement(discount) : healthcare_management(discount);
}

FiniteMdp perturbed_variant(EnvId id, double discount) {
    if (id == EnvId::kMachineReplacement) return build_mrp(0.3, 0.7, discount);
    return build_hmp(kHmpPerturbed, true, discount);
}

Policy default_behavior(EnvId id, const FiniteMdp& mdp, double epsilon) {
    if (id == EnvId::kMachineReplacement) return Policy::uniform(mdp.n_states(), mdp.n_actions());
    return q_iteration_policy(mdp, 5, epsilon);
}

} // namespace rope
