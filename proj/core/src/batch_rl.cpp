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

#include "rope/batch_rl.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rope {

BatchProblem make_batch_problem(const FiniteMdp& mdp, const Policy& behavior, EmpiricalConditional emp,
                                std::optional<CostMetric> cost) {
    if (emp.n_states() != mdp.n_states() || emp.n_actions() != mdp.n_actions())
        throw InputError("empirical model dimensions do not match the MDP");
    if (behavior.n_states() != mdp.n_states() || behavior.n_actions() != mdp.n_actions())
        throw InputError("behavior policy dimensions do not match the MDP");
    CostMetric c = cost ? std::move(*cost) : CostMetric::standard(mdp.n_actions(), mdp.n_states());
    return {std::move(emp), behavior, mdp.rewards(), mdp.initial_dist(), mdp.discount(), std::move(c)};
}

namespace {

/// f(a, s') = v(s') / pi_b(a'|s) if a = a', else 0.
void action_integrand(const BatchProblem& problem, int s, int chosen, const Vector& v, std::vector<double>& f) {
    const int ns = problem.emp.n_states();
    std::fill(f.begin(), f.end(), 0.0);
    const double pb = problem.behavior.prob(s, chosen);
    if (pb <= 0.0) return;
    for (int sp = 0; sp < ns; ++sp) f[static_cast<std::size_t>(chosen * ns + sp)] = v(sp) / pb;
}

double resolve_bound(const BatchProblem& problem, const IterationOptions& options) {
    if (options.value_bound > 0.0) return options.value_bound;
    const double rmax = problem.rewards.maxCoeff();
    return rmax > 0.0 ? default_value_bound(problem.rewards, problem.discount) : 1.0;
}

} // namespace

PolicyContraction policy_contraction(const BatchProblem& problem, const RadiusSchedule& schedule,
                                     const Vector& epsilon) {
    const int ns = problem.emp.n_states();
    const int na = problem.emp.n_actions();
    const double g = problem.discount;
    const double limit = (1.0 - g) / (2.0 * g);
    PolicyContraction out;
    out.lipschitz = Matrix::Zero(ns, na);
    out.margin = Matrix::Zero(ns, na);
    out.pass = true;
    std::vector<double> f(static_cast<std::size_t>(na * ns));
    for (int s = 0; s < ns; ++s) {
        const double eps = epsilon.size() ? epsilon(s) : (1.0 - g) / (4.0 * g);
        const bool covered = problem.emp.state(s).covered();
        for (int chosen = 0; chosen < na; ++chosen) {
            if (covered) {
                for (int a = 0; a < na; ++a) {
                    const double pb = problem.behavior.prob(s, a);
                    const double beta = (a == chosen && pb > 0.0) ? 1.0 / pb : 0.0;
                    for (int sp = 0; sp < ns; ++sp) f[static_cast<std::size_t>(a * ns + sp)] = beta;
                }
                out.lipschitz(s, chosen) = lipschitz_norm(f, atom_set(problem.emp, s, problem.cost), problem.cost);
            }
            out.margin(s, chosen) = limit - eps - schedule.rho(s) * out.lipschitz(s, chosen);
            if (out.margin(s, chosen) < 0.0) out.pass = false;
        }
    }
    return out;
}

Vector robust_policy_operator(const BatchProblem& problem, const RadiusSchedule& schedule, const Vector& v,
                              const IterationOptions& options, std::vector<int>* greedy) {
    const int ns = problem.emp.n_states();
    const int na = problem.emp.n_actions();
    if (v.size() != ns || schedule.rho.size() != ns) throw InputError("value or radius vector has wrong size");
    std::vector<double> f(static_cast<std::size_t>(na * ns));
    std::vector<double> q(static_cast<std::size_t>(na));
    Vector out(ns);
    if (greedy) greedy->assign(static_cast<std::size_t>(ns), 0);
    for (int s = 0; s < ns; ++s) {
        const bool covered = problem.emp.state(s).covered();
        if (!covered && options.missing == MissingStateMode::kError) throw UncoveredStatesError({s});
        AtomSet atoms;
        if (covered) atoms = atom_set(problem.emp, s, problem.cost);
        for (int chosen = 0; chosen < na; ++chosen) {
            double inner = 0.0;
            if (covered) {
                action_integrand(problem, s, chosen, v, f);
                inner = robust_inner(f, atoms, schedule.rho(s), problem.cost).value;
            }
            q[static_cast<std::size_t>(chosen)] = problem.rewards(s, chosen) + problem.discount * inner;
        }
        const int best = argmax_lowest(q);
        out(s) = q[static_cast<std::size_t>(best)];
        if (greedy) (*greedy)[static_cast<std::size_t>(s)] = best;
    }
    return out;
}

BatchResult robust_policy_optimization(const BatchProblem& problem, const RadiusSchedule& schedule,
                                       const IterationOptions& options) {
    if (!(options.tol > 0.0)) throw InputError("tolerance must be positive");
    const int ns = problem.emp.n_states();
    const double m = resolve_bound(problem, options);
    BatchResult out{Policy::uniform(ns, problem.emp.n_actions()), Vector::Zero(ns), 0.0, 0, 0.0, false,
                    policy_contraction(problem, schedule), {}};
    if (!out.contraction.pass) out.warnings.push_back("contraction condition fails for some state and action");

    Vector v = Vector::Zero(ns);
    std::vector<int> greedy;
    for (long it = 1; it <= options.max_iterations; ++it) {
        Vector next = robust_policy_operator(problem, schedule, v, options, &greedy);
        if (!next.allFinite())
            throw EstimatorError("policy optimization produced non-finite values at sweep " + std::to_string(it));
        if (next.cwiseAbs().maxCoeff() > m) {
            if (options.bounds == BoundHandling::kProject) {
                next = next.cwiseMax(-m).cwiseMin(m);
                out.projected = true;
            }
        }
        const double diff = (next - v).cwiseAbs().maxCoeff();
        v = std::move(next);
        out.iterations = it;
        out.residual = diff;
        if (diff < options.tol) {
            robust_policy_operator(problem, schedule, v, options, &greedy);
            out.policy = Policy::deterministic(greedy, problem.emp.n_actions());
            out.value = (1.0 - problem.discount) * problem.initial_dist.dot(v);
            out.v = std::move(v);
            if (out.projected) out.warnings.push_back("iterates were projected onto the value box");
            return out;
        }
    }
    std::ostringstream os;
    os << "policy optimization did not converge within " << options.max_iterations << " sweeps (last change "
       << out.residual << ")";
    throw EstimatorError(os.str());
}

RadiusSchedule batch_radius(const EmpiricalConditional& emp, double alpha, double value_bound, double diam,
                            int n_actions, MissingStateMode missing) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    if (n_actions < 1) throw InputError("need at least one action");
    if (!(value_bound > 0.0)) throw InputError("value bound M must be positive");
    if (!(diam > 0.0)) throw InputError("cost diameter must be positive");
    if (missing == MissingStateMode::kError) emp.require_coverage();
    const int ns = emp.n_states();
    RadiusSchedule out;
    out.rho = Vector::Zero(ns);
    out.tau = Vector::Zero(ns);
    out.counts = Vector::Zero(ns);
    out.base_tau = std::log(ns / alpha);
    out.alpha = alpha;
    out.value_bound = value_bound;
    out.diam = diam;
    out.mode = RadiusMode::kAsymptotic;
    for (int s = 0; s < ns; ++s) {
        const double n = emp.count(s);
        out.counts(s) = n;
        if (n <= 0.0) continue;
        out.tau(s) = out.base_tau + std::log(2.0 * n_actions * n * value_bound);
        if (out.tau(s) < 0.0) throw InputError("negative tau_s at state " + std::to_string(s));
        out.rho(s) = std::sqrt(2.0 * out.tau(s) / n) * diam;
    }
    return out;
}

namespace {

/// Largest spectral radius of gamma P_a over deterministic selections a(s), where
/// P_a(s, s') = mu_hat(a(s), s'|s) / pi_b(a(s)|s). Rows vary independently, so this
/// also bounds the joint spectral radius of the family. Returns nullopt when the
/// enumeration would be too large.
std::optional<double> max_selection_radius(const BatchProblem& problem) {
    const int ns = problem.emp.n_states();
    const int na = problem.emp.n_actions();
    constexpr double kMaxSelections = 1 << 20;
    if (std::pow(static_cast<double>(na), ns) > kMaxSelections) return std::nullopt;
    std::vector<Matrix> rows(static_cast<std::size_t>(na), Matrix::Zero(ns, ns));
    for (int s = 0; s < ns; ++s) {
        const auto& st = problem.emp.state(s);
        for (std::size_t i = 0; i < st.atoms.size(); ++i) {
            const double pb = problem.behavior.prob(s, st.atoms[i].action);
            if (pb > 0.0) rows[static_cast<std::size_t>(st.atoms[i].action)](s, st.atoms[i].next_state) += st.weight(i) / pb;
        }
    }
    std::vector<int> pick(static_cast<std::size_t>(ns), 0);
    Matrix p(ns, ns);
    double best = 0.0;
    while (true) {
        for (int s = 0; s < ns; ++s) p.row(s) = rows[static_cast<std::size_t>(pick[static_cast<std::size_t>(s)])].row(s);
        best = std::max(best, problem.discount * spectral_radius(p));
        int s = 0;
        while (s < ns && ++pick[static_cast<std::size_t>(s)] == na) pick[static_cast<std::size_t>(s++)] = 0;
        if (s == ns) break;
    }
    return best;
}

} // namespace

BatchResult saa_policy_optimization(const BatchProblem& problem, const IterationOptions& options) {
    const Matrix freq = problem.emp.action_frequencies();
    std::vector<std::string> diag;
    for (int s = 0; s < problem.emp.n_states(); ++s) {
        for (int a = 0; a < problem.emp.n_actions(); ++a) {
            const double pb = problem.behavior.prob(s, a);
            if (pb <= 0.0) continue;
            const double row = problem.discount * freq(s, a) / pb;
            if (row >= 1.0) {
                std::ostringstream os;
                os << "state " << s << " action " << a << ": gamma * mu_hat(a|s) / pi_b(a|s) = " << row;
                diag.push_back(os.str());
            }
        }
    }
    if (!diag.empty()) {
        // The row-sum test is only sufficient. Iterates still converge when every
        // action selection yields gamma P with spectral radius below one.
        const auto radius = max_selection_radius(problem);
        if (!radius || *radius >= 1.0 - 1e-12) {
            std::ostringstream os;
            if (radius) os << "largest gamma * spectral radius over action selections = " << *radius;
            else os << "too many action selections to check the spectral radius";
            diag.push_back(os.str());
            throw EstimatorError("plug-in optimization is not contractive", std::move(diag));
        }
    }
    return robust_policy_optimization(problem, uniform_radii(problem.emp.n_states(), 0.0, problem.cost.diameter()),
                                      options);
}

double relative_gap(double optimal_value, double policy_value) {
    if (optimal_value == 0.0) throw InputError("relative gap is undefined when the optimal value is zero");
    return 100.0 * (optimal_value - policy_value) / std::abs(optimal_value);
}

double relative_gap(const FiniteMdp& mdp, const Policy& policy) {
    return relative_gap(optimal_policy(mdp).value, exact_policy_value(mdp, policy));
}

} // namespace rope
