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

#include "rope/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rope {

namespace {

constexpr double kProbTol = 1e-12;

void check_probability_vector(std::span<const double> p, const std::string& what) {
    double sum = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InputError(what + " has a negative or non-finite entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > kProbTol) {
        std::ostringstream os;
        os << what << " sums to " << sum << ", expected 1";
        throw InputError(os.str());
    }
}

} // namespace

UncoveredStatesError::UncoveredStatesError(std::vector<int> states)
    : InputError([&] {
          std::ostringstream os;
          os << "uncovered states (no logged transitions):";
          for (int s : states) os << ' ' << s;
          return os.str();
      }()),
      states_(std::move(states)) {}

FiniteMdp::FiniteMdp(int n_states, int n_actions, std::vector<double> transitions, Matrix rewards,
                     double discount, Vector initial_dist)
    : n_states_(n_states), n_actions_(n_actions), transitions_(std::move(transitions)),
      rewards_(std::move(rewards)), discount_(discount), initial_dist_(std::move(initial_dist)) {
    if (n_states_ < 1 || n_actions_ < 1) throw InputError("MDP needs at least one state and one action");
    if (transitions_.size() != static_cast<std::size_t>(n_states_) * n_actions_ * n_states_)
        throw InputError("transition tensor has the wrong size");
    if (rewards_.rows() != n_states_ || rewards_.cols() != n_actions_)
        throw InputError("reward table has the wrong shape");
    if (initial_dist_.size() != n_states_) throw InputError("initial distribution has the wrong size");
    if (!(discount_ > 0.0 && discount_ < 1.0)) throw InputError("discount must lie in (0, 1)");
    for (int s = 0; s < n_states_; ++s) {
        for (int a = 0; a < n_actions_; ++a) {
            std::ostringstream os;
            os << "transition row (s=" << s << ", a=" << a << ")";
            check_probability_vector(transition_row(s, a), os.str());
            if (!(rewards_(s, a) >= 0.0) || !std::isfinite(rewards_(s, a)))
                throw InputError("rewards must be finite and nonnegative");
        }
    }
    check_probability_vector({initial_dist_.data(), static_cast<std::size_t>(n_states_)},
                             "initial distribution");
}

FiniteMdp FiniteMdp::with_discount(double discount) const {
    return FiniteMdp(n_states_, n_actions_, transitions_, rewards_, discount, initial_dist_);
}

FiniteMdp FiniteMdp::with_initial_dist(Vector initial_dist) const {
    return FiniteMdp(n_states_, n_actions_, transitions_, rewards_, discount_, std::move(initial_dist));
}

Policy::Policy(Matrix probs) : probs_(std::move(probs)), deterministic_(true) {
    if (probs_.rows() < 1 || probs_.cols() < 1) throw InputError("policy table is empty");
    for (int s = 0; s < probs_.rows(); ++s) {
        std::vector<double> row(probs_.cols());
        int ones = 0;
        for (int a = 0; a < probs_.cols(); ++a) {
            row[a] = probs_(s, a);
            if (row[a] == 1.0) ++ones;
        }
        check_probability_vector(row, "policy row " + std::to_string(s));
        if (ones != 1) deterministic_ = false;
    }
}

Policy Policy::uniform(int n_states, int n_actions) {
    return Policy(Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

Policy Policy::deterministic(const std::vector<int>& actions, int n_actions) {
    Matrix probs = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] < 0 || actions[s] >= n_actions) throw InputError("action index out of range");
        probs(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
    }
    return Policy(std::move(probs));
}

int Policy::action(int s) const {
    if (!deterministic_) throw InputError("policy is not deterministic");
    for (int a = 0; a < n_actions(); ++a)
        if (probs_(s, a) == 1.0) return a;
    throw InternalError("deterministic row without a unit entry");
}

int argmax_lowest(std::span<const double> values) {
    int best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    return best;
}

namespace {

void check_policy_shape(const FiniteMdp& mdp, const Policy& policy) {
    if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions())
        throw InputError("policy dimensions do not match the MDP");
}

} // namespace

Matrix policy_transition_matrix(const FiniteMdp& mdp, const Policy& policy) {
    check_policy_shape(mdp, policy);
    const int ns = mdp.n_states();
    Matrix p = Matrix::Zero(ns, ns);
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < mdp.n_actions(); ++a) {
            const double pa = policy.prob(s, a);
            if (pa == 0.0) continue;
            for (int t = 0; t < ns; ++t) p(s, t) += pa * mdp.transition(s, a, t);
        }
    return p;
}

Vector policy_rewards(const FiniteMdp& mdp, const Policy& policy) {
    check_policy_shape(mdp, policy);
    return mdp.rewards().cwiseProduct(policy.probs()).rowwise().sum();
}

VisitationDistribution exact_average_visitation(const FiniteMdp& mdp, const Policy& policy) {
    const Matrix p = policy_transition_matrix(mdp, policy);
    const int ns = mdp.n_states();
    const double g = mdp.discount();
    const Matrix lhs = Matrix::Identity(ns, ns) - g * p.transpose();
    Eigen::PartialPivLU<Matrix> lu(lhs);
    Vector d = lu.solve((1.0 - g) * mdp.initial_dist());
    if (!d.allFinite()) throw InternalError("visitation solve produced non-finite values");
    // Round-off can leave tiny negatives on unreachable states.
    for (int s = 0; s < ns; ++s)
        if (d(s) < 0.0 && d(s) > -1e-14) d(s) = 0.0;
    return d;
}

Vector exact_value_function(const FiniteMdp& mdp, const Policy& policy) {
    const Matrix p = policy_transition_matrix(mdp, policy);
    const int ns = mdp.n_states();
    const Matrix lhs = Matrix::Identity(ns, ns) - mdp.discount() * p;
    return Eigen::PartialPivLU<Matrix>(lhs).solve(policy_rewards(mdp, policy));
}

double exact_policy_value(const FiniteMdp& mdp, const Policy& policy) {
    const Vector d = exact_average_visitation(mdp, policy);
    const Vector r = policy_rewards(mdp, policy);
    return d.dot(r);
}

namespace {

Matrix q_backup(const FiniteMdp& mdp, const Vector& v) {
    const int ns = mdp.n_states();
    const int na = mdp.n_actions();
    Matrix q(ns, na);
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a) {
            double acc = 0.0;
            const auto row = mdp.transition_row(s, a);
            for (int t = 0; t < ns; ++t) acc += row[static_cast<std::size_t>(t)] * v(t);
            q(s, a) = mdp.reward(s, a) + mdp.discount() * acc;
        }
    return q;
}

std::vector<int> greedy_actions(const Matrix& q) {
    std::vector<int> actions(static_cast<std::size_t>(q.rows()));
    std::vector<double> row(static_cast<std::size_t>(q.cols()));
    for (int s = 0; s < q.rows(); ++s) {
        for (int a = 0; a < q.cols(); ++a) row[static_cast<std::size_t>(a)] = q(s, a);
        actions[static_cast<std::size_t>(s)] = argmax_lowest(row);
    }
    return actions;
}

} // namespace

OptimalPolicyResult optimal_policy(const FiniteMdp& mdp, double tol, long max_iterations) {
    if (!(tol > 0.0)) throw InputError("tolerance must be positive");
    Vector v = Vector::Zero(mdp.n_states());
    for (long it = 1; it <= max_iterations; ++it) {
        const Matrix q = q_backup(mdp, v);
        const Vector next = q.rowwise().maxCoeff();
        const double change = (next - v).cwiseAbs().maxCoeff();
        v = next;
        if (change < tol) {
            // Greedy extraction from a fresh backup of the converged values.
            Policy pi = Policy::deterministic(greedy_actions(q_backup(mdp, v)), mdp.n_actions());
            const double value = exact_policy_value(mdp, pi);
            return {std::move(pi), value, std::move(v), it};
        }
    }
    throw EstimatorError("value iteration did not converge within the iteration cap");
}

Policy q_iteration_policy(const FiniteMdp& mdp, int sweeps, double epsilon) {
    if (sweeps < 0) throw InputError("number of sweeps must be nonnegative");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("epsilon must lie in [0, 1]");
    const int na = mdp.n_actions();
    Matrix q = Matrix::Zero(mdp.n_states(), na);
    for (int k = 0; k < sweeps; ++k) q = q_backup(mdp, q.rowwise().maxCoeff());
    const auto greedy = greedy_actions(q);
    Matrix probs = Matrix::Constant(mdp.n_states(), na, epsilon / na);
    for (int s = 0; s < mdp.n_states(); ++s) probs(s, greedy[static_cast<std::size_t>(s)]) += 1.0 - epsilon;
    return Policy(std::move(probs));
}

ImportanceRatio importance_ratios(const Policy& target, const Policy& behavior) {
    if (target.n_states() != behavior.n_states() || target.n_actions() != behavior.n_actions())
        throw InputError("target and behavior policies have different dimensions");
    const int ns = target.n_states();
    const int na = target.n_actions();
    ImportanceRatio out{Matrix::Zero(ns, na), Vector::Zero(ns)};
    std::ostringstream bad;
    bool violated = false;
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < na; ++a) {
            const double pt = target.prob(s, a);
            const double pb = behavior.prob(s, a);
            if (pb > 0.0) {
                out.beta(s, a) = pt / pb;
            } else if (pt > 0.0) {
                violated = true;
                bad << " (" << s << "," << a << ")";
            }
        }
        out.span(s) = out.beta.row(s).maxCoeff() - out.beta.row(s).minCoeff();
    }
    if (violated)
        throw InputError("behavior policy does not cover the target policy at (s,a):" + bad.str());
    return out;
}

Vector marginal_importance_weights(const FiniteMdp& mdp, const Policy& target, const Policy& behavior) {
    const Vector dt = exact_average_visitation(mdp, target);
    const Vector db = exact_average_visitation(mdp, behavior);
    Vector w(mdp.n_states());
    for (int s = 0; s < mdp.n_states(); ++s) {
        if (!(db(s) > 0.0))
            throw InputError("behavior visitation is zero at state " + std::to_string(s));
        w(s) = dt(s) / db(s);
    }
    return w;
}

double stationarity_residual(const FiniteMdp& mdp, const Policy& target, const Policy& behavior) {
    const ImportanceRatio ratio = importance_ratios(target, behavior);
    const Vector db = exact_average_visitation(mdp, behavior);
    const Vector w = marginal_importance_weights(mdp, target, behavior);
    const int ns = mdp.n_states();
    const double g = mdp.discount();
    double worst = 0.0;
    for (int t = 0; t < ns; ++t) {
        double rhs = (1.0 - g) * mdp.initial_dist()(t);
        for (int s = 0; s < ns; ++s)
            for (int a = 0; a < mdp.n_actions(); ++a) {
                const double dsas = db(s) * behavior.prob(s, a) * mdp.transition(s, a, t);
                rhs += g * dsas * ratio.beta(s, a) * w(s);
            }
        worst = std::max(worst, std::abs(w(t) * db(t) - rhs));
    }
    return worst;
}

} // namespace rope
