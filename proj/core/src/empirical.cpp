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

#include "rope/empirical.hpp"

#include <sstream>

namespace rope {

EmpiricalConditional::EmpiricalConditional(int n_states, int n_actions, std::vector<StateConditional> states)
    : n_states_(n_states), n_actions_(n_actions), states_(std::move(states)), total_(0.0) {
    if (static_cast<int>(states_.size()) != n_states_) throw InputError("one conditional per state required");
    for (auto& st : states_) {
        double sum = 0.0;
        for (const auto& atom : st.atoms) {
            if (atom.action < 0 || atom.action >= n_actions_ || atom.next_state < 0 ||
                atom.next_state >= n_states_)
                throw InputError("atom index out of range");
            if (!(atom.count > 0.0)) throw InputError("atom counts must be positive");
            sum += atom.count;
        }
        st.n = sum;
        total_ += sum;
    }
}

std::vector<int> EmpiricalConditional::uncovered_states() const {
    std::vector<int> out;
    for (int s = 0; s < n_states_; ++s)
        if (!state(s).covered()) out.push_back(s);
    return out;
}

void EmpiricalConditional::require_coverage() const {
    auto missing = uncovered_states();
    if (!missing.empty()) throw UncoveredStatesError(std::move(missing));
}

Matrix EmpiricalConditional::action_frequencies() const {
    Matrix freq = Matrix::Zero(n_states_, n_actions_);
    for (int s = 0; s < n_states_; ++s) {
        const auto& st = state(s);
        for (std::size_t i = 0; i < st.atoms.size(); ++i) freq(s, st.atoms[i].action) += st.weight(i);
    }
    return freq;
}

Matrix EmpiricalConditional::dense() const {
    Matrix out = Matrix::Zero(n_states_, n_actions_ * n_states_);
    for (int s = 0; s < n_states_; ++s) {
        const auto& st = state(s);
        for (std::size_t i = 0; i < st.atoms.size(); ++i)
            out(s, st.atoms[i].action * n_states_ + st.atoms[i].next_state) = st.weight(i);
    }
    return out;
}

EmpiricalConditional build_empirical(const Dataset& ds, int n_states, int n_actions, MissingStateMode missing) {
    if (n_states < 1 || n_actions < 1) throw InputError("dimensions must be positive");
    const auto n_points = static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions);
    std::vector<std::vector<long long>> tally(static_cast<std::size_t>(n_states));
    for (const auto& tr : ds.trajectories) {
        for (const auto& x : tr) {
            if (x.state < 0 || x.state >= n_states || x.action < 0 || x.action >= n_actions ||
                x.next_state < 0 || x.next_state >= n_states)
                throw InputError("dataset index out of range for the given dimensions");
            auto& row = tally[static_cast<std::size_t>(x.state)];
            if (row.empty()) row.assign(n_points, 0);
            ++row[static_cast<std::size_t>(x.action * n_states + x.next_state)];
        }
    }
    std::vector<StateConditional> states(static_cast<std::size_t>(n_states));
    for (int s = 0; s < n_states; ++s) {
        const auto& row = tally[static_cast<std::size_t>(s)];
        if (row.empty()) continue;
        for (std::size_t z = 0; z < n_points; ++z)
            if (row[z] > 0)
                states[static_cast<std::size_t>(s)].atoms.push_back(
                    {static_cast<int>(z) / n_states, static_cast<int>(z) % n_states, static_cast<double>(row[z])});
    }
    EmpiricalConditional emp(n_states, n_actions, std::move(states));
    if (missing == MissingStateMode::kError) emp.require_coverage();
    return emp;
}

EmpiricalConditional population_conditional(const FiniteMdp& mdp, const Policy& behavior) {
    const Vector db = exact_average_visitation(mdp, behavior);
    const int ns = mdp.n_states();
    std::vector<StateConditional> states(static_cast<std::size_t>(ns));
    for (int s = 0; s < ns; ++s) {
        if (!(db(s) > 0.0)) continue;
        for (int a = 0; a < mdp.n_actions(); ++a) {
            const double pa = behavior.prob(s, a);
            if (pa == 0.0) continue;
            for (int t = 0; t < ns; ++t) {
                const double p = mdp.transition(s, a, t);
                if (p > 0.0) states[static_cast<std::size_t>(s)].atoms.push_back({a, t, db(s) * pa * p});
            }
        }
    }
    return EmpiricalConditional(ns, mdp.n_actions(), std::move(states));
}

PlugInTransition plug_in_transition(const EmpiricalConditional& emp, const ImportanceRatio& ratio) {
    const int ns = emp.n_states();
    if (ratio.beta.rows() != ns || ratio.beta.cols() != emp.n_actions())
        throw InputError("importance ratio dimensions do not match the empirical model");
    PlugInTransition out{Matrix::Zero(ns, ns), Vector::Zero(ns)};
    for (int s = 0; s < ns; ++s) {
        const auto& st = emp.state(s);
        for (std::size_t i = 0; i < st.atoms.size(); ++i) {
            const auto& atom = st.atoms[i];
            const double m = st.weight(i) * ratio.beta(s, atom.action);
            out.p(s, atom.next_state) += m;
            out.row_sums(s) += m;
        }
    }
    return out;
}

double spectral_radius(const Matrix& p) {
    if (p.rows() == 0) return 0.0;
    return Eigen::EigenSolver<Matrix>(p, false).eigenvalues().cwiseAbs().maxCoeff();
}

Vector solve_discounted(const Matrix& p, const Vector& rhs, double discount, const char* what) {
    const double max_row = p.rowwise().sum().maxCoeff();
    if (discount * max_row >= 1.0) {
        // The row-sum test is only sufficient; fall back to the spectral radius,
        // which is what the Neumann series (I - gamma P)^{-1} = sum (gamma P)^k needs.
        const double radius = spectral_radius(p);
        if (discount * radius >= 1.0 - 1e-12) {
            std::ostringstream os;
            os << what << ": gamma * max row sum = " << discount * max_row << " and gamma * spectral radius = "
               << discount * radius << " >= 1, the plug-in system is not invertible; "
               << "collect more data or use the robust estimator";
            throw EstimatorError(os.str());
        }
    }
    const auto n = p.rows();
    return Eigen::PartialPivLU<Matrix>(Matrix::Identity(n, n) - discount * p).solve(rhs);
}

double plug_in_value(const EmpiricalConditional& emp, const ImportanceRatio& ratio, const Vector& target_rewards,
                     const Vector& initial_dist, double discount) {
    emp.require_coverage();
    const auto plug = plug_in_transition(emp, ratio);
    const Vector v = solve_discounted(plug.p, target_rewards, discount, "plug-in value");
    return (1.0 - discount) * initial_dist.dot(v);
}

} // namespace rope
