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

#include "rope/robust_eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rope {

const char* to_string(RadiusMode mode) noexcept {
    switch (mode) {
    case RadiusMode::kNonasymptotic: return "nonasymptotic";
    case RadiusMode::kAsymptotic: return "asymptotic";
    case RadiusMode::kFixed: return "fixed";
    }
    return "unknown";
}

double default_value_bound(const Matrix& rewards, double discount) {
    return 2.0 * rewards.maxCoeff() / (1.0 - discount);
}

namespace {

RadiusSchedule log_schedule(const EmpiricalConditional& emp, double base_tau, double per_state_factor,
                            double alpha, double value_bound, double diam, RadiusMode mode,
                            MissingStateMode missing) {
    if (!(value_bound > 0.0)) throw InputError("value bound M must be positive");
    if (!(diam > 0.0)) throw InputError("cost diameter must be positive");
    if (missing == MissingStateMode::kError) emp.require_coverage();
    const int ns = emp.n_states();
    RadiusSchedule out;
    out.rho = Vector::Zero(ns);
    out.tau = Vector::Zero(ns);
    out.counts = Vector::Zero(ns);
    out.base_tau = base_tau;
    out.alpha = alpha;
    out.value_bound = value_bound;
    out.diam = diam;
    out.mode = mode;
    for (int s = 0; s < ns; ++s) {
        const double n = emp.count(s);
        out.counts(s) = n;
        if (n <= 0.0) continue;
        const double tau_s = base_tau + std::log(per_state_factor * n * value_bound);
        if (tau_s < 0.0) {
            std::ostringstream os;
            os << "negative tau_s = " << tau_s << " at state " << s;
            throw InputError(os.str());
        }
        out.tau(s) = tau_s;
        out.rho(s) = std::sqrt(2.0 * tau_s / n) * diam;
    }
    return out;
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
}

} // namespace

RadiusSchedule radius_for_ci(const EmpiricalConditional& emp, double alpha, double value_bound, double diam,
                             MissingStateMode missing) {
    check_alpha(alpha);
    const double tau = std::log(2.0 * emp.n_states() / alpha);
    return log_schedule(emp, tau, 2.0, alpha, value_bound, diam, RadiusMode::kAsymptotic, missing);
}

Vector recompute_radii(const RadiusSchedule& schedule) {
    Vector rho = Vector::Zero(schedule.tau.size());
    for (Eigen::Index s = 0; s < rho.size(); ++s)
        if (schedule.counts(s) > 0.0) rho(s) = std::sqrt(2.0 * schedule.tau(s) / schedule.counts(s)) * schedule.diam;
    return rho;
}

RadiusSchedule fixed_radii(Vector rho, double diam) {
    for (Eigen::Index s = 0; s < rho.size(); ++s)
        if (!(rho(s) >= 0.0) || !std::isfinite(rho(s))) throw InputError("radii must be finite and nonnegative");
    RadiusSchedule out;
    out.tau = Vector::Zero(rho.size());
    out.counts = Vector::Zero(rho.size());
    out.rho = std::move(rho);
    out.diam = diam;
    out.mode = RadiusMode::kFixed;
    return out;
}

RadiusSchedule uniform_radii(int n_states, double rho, double diam) {
    return fixed_radii(Vector::Constant(n_states, rho), diam);
}

EvaluationProblem make_problem(const FiniteMdp& mdp, const Policy& target, const Policy& behavior,
                               EmpiricalConditional emp, std::optional<CostMetric> cost) {
    if (emp.n_states() != mdp.n_states() || emp.n_actions() != mdp.n_actions())
        throw InputError("empirical model dimensions do not match the MDP");
    CostMetric c = cost ? std::move(*cost) : CostMetric::standard(mdp.n_actions(), mdp.n_states());
    return {std::move(emp), importance_ratios(target, behavior), policy_rewards(mdp, target), mdp.initial_dist(),
            mdp.discount(), std::move(c)};
}

Vector bellman_operator(const EvaluationProblem& problem, const RadiusSchedule& schedule, const Vector& v,
                        Direction direction, const IterationOptions& options, Vector* lambda) {
    const int ns = problem.emp.n_states();
    const int na = problem.emp.n_actions();
    if (v.size() != ns || schedule.rho.size() != ns) throw InputError("value or radius vector has wrong size");
    const double bound = options.value_bound > 0.0 ? options.value_bound : kInf;
    std::vector<double> f(static_cast<std::size_t>(na * ns));
    Vector out(ns);
    if (lambda) lambda->setConstant(ns, kInf);
    for (int s = 0; s < ns; ++s) {
        const auto& st = problem.emp.state(s);
        double inner = 0.0;
        if (!st.covered()) {
            if (options.missing == MissingStateMode::kError) throw UncoveredStatesError({s});
            if (direction == Direction::kOptimistic) {
                if (!std::isfinite(bound)) throw InputError("bound mode for uncovered states needs a value bound");
                inner = bound;
            }
        } else {
            for (int a = 0; a < na; ++a)
                for (int sp = 0; sp < ns; ++sp)
                    f[static_cast<std::size_t>(a * ns + sp)] = v(sp) * problem.ratio.beta(s, a);
            const AtomSet atoms = atom_set(problem.emp, s, problem.cost);
            const InnerSolution sol = direction == Direction::kRobust
                                          ? robust_inner(f, atoms, schedule.rho(s), problem.cost)
                                          : optimistic_inner(f, atoms, schedule.rho(s), problem.cost);
            inner = sol.value;
            if (lambda) (*lambda)(s) = sol.lambda;
        }
        out(s) = problem.target_rewards(s) + problem.discount * inner;
    }
    return out;
}

RobustEstimate value_iteration(const EvaluationProblem& problem, const RadiusSchedule& schedule,
                               Direction direction, const IterationOptions& options) {
    if (!(options.tol > 0.0)) throw InputError("tolerance must be positive");
    if (options.max_iterations < 1) throw InputError("iteration cap must be at least 1");
    const int ns = problem.emp.n_states();
    IterationOptions opts = options;
    if (!(opts.value_bound > 0.0)) {
        const double rmax = problem.target_rewards.size() ? problem.target_rewards.maxCoeff() : 0.0;
        opts.value_bound = rmax > 0.0 ? 2.0 * rmax / (1.0 - problem.discount) : 1.0;
    }
    const double m = opts.value_bound;

    RobustEstimate est;
    est.direction = direction;
    est.value_bound = m;
    est.lambda = Vector::Constant(ns, kInf);
    est.contraction =
        contraction_diagnostics(problem.ratio, problem.emp, schedule, problem.discount, problem.cost);

    Vector v = Vector::Zero(ns);
    bool warned = false;
    for (long it = 1; it <= opts.max_iterations; ++it) {
        Vector next = bellman_operator(problem, schedule, v, direction, opts, &est.lambda);
        if (!next.allFinite()) {
            throw EstimatorError("value iteration produced non-finite values at sweep " + std::to_string(it));
        }
        if (next.cwiseAbs().maxCoeff() > m) {
            if (opts.bounds == BoundHandling::kProject) {
                next = next.cwiseMax(-m).cwiseMin(m);
                est.projected = true;
            } else if (!warned) {
                std::ostringstream os;
                os << "iterate left the box |v| <= " << m << " at sweep " << it;
                est.warnings.push_back(os.str());
                warned = true;
            }
        }
        const double diff = (next - v).cwiseAbs().maxCoeff();
        v = std::move(next);
        est.iterations = it;
        est.residual = diff;
        if (diff < opts.tol) {
            est.bound = (1.0 - problem.discount) * problem.initial_dist.dot(v);
            est.v = std::move(v);
            if (est.projected) est.warnings.push_back("iterates were projected onto the value box");
            if (!est.contraction.pass) est.warnings.push_back("contraction condition fails at some state");
            return est;
        }
    }
    std::vector<std::string> diag;
    for (std::size_t s = 0; s < est.contraction.states.size(); ++s) {
        const auto& c = est.contraction.states[s];
        std::ostringstream os;
        os << "state " << s << ": lipschitz=" << c.lipschitz << " margin=" << c.margin
           << (c.pass ? " pass" : " FAIL");
        diag.push_back(os.str());
    }
    std::ostringstream os;
    os << "value iteration did not converge within " << opts.max_iterations << " sweeps (last change "
       << est.residual << ")";
    throw EstimatorError(os.str(), std::move(diag));
}

RobustEstimate robust_value_iteration(const EvaluationProblem& problem, const RadiusSchedule& schedule,
                                      const IterationOptions& options) {
    return value_iteration(problem, schedule, Direction::kRobust, options);
}

RobustEstimate optimistic_value_iteration(const EvaluationProblem& problem, const RadiusSchedule& schedule,
                                          const IterationOptions& options) {
    return value_iteration(problem, schedule, Direction::kOptimistic, options);
}

ContractionReport contraction_diagnostics(const ImportanceRatio& ratio, const EmpiricalConditional& emp,
                                          const RadiusSchedule& schedule, double discount,
                                          const CostMetric& cost, const Vector& epsilon, double tau_report) {
    const int ns = emp.n_states();
    const int na = emp.n_actions();
    const double limit = (1.0 - discount) / (2.0 * discount);
    const double default_eps = (1.0 - discount) / (4.0 * discount);
    ContractionReport out;
    out.states.resize(static_cast<std::size_t>(ns));
    out.pass = true;
    out.min_ratio = kInf;
    std::vector<double> f(static_cast<std::size_t>(na * ns));
    for (int s = 0; s < ns; ++s) {
        auto& st = out.states[static_cast<std::size_t>(s)];
        st.epsilon = epsilon.size() ? epsilon(s) : default_eps;
        if (emp.state(s).covered()) {
            for (int a = 0; a < na; ++a)
                for (int sp = 0; sp < ns; ++sp) f[static_cast<std::size_t>(a * ns + sp)] = ratio.beta(s, a);
            st.lipschitz = lipschitz_norm(f, atom_set(emp, s, cost), cost);
        }
        st.margin = limit - st.epsilon - schedule.rho(s) * st.lipschitz;
        st.pass = st.margin >= 0.0;
        out.pass = out.pass && st.pass;
        const double span = ratio.span(s);
        if (span > 0.0) out.min_ratio = std::min(out.min_ratio, emp.count(s) / (span * span));
    }
    out.required_ratio = discount * discount / ((1.0 - discount) * (1.0 - discount)) * std::log(ns / tau_report);
    out.sample_size_ok = out.min_ratio >= out.required_ratio;
    return out;
}

double correction_term(const EmpiricalConditional& emp, const ImportanceRatio& ratio, double discount,
                       const Vector& initial_dist) {
    emp.require_coverage();
    const PlugInTransition pt = plug_in_transition(emp, ratio);
    Vector eps(emp.n_states());
    for (int s = 0; s < emp.n_states(); ++s) eps(s) = 6.0 / emp.count(s);
    return initial_dist.dot(solve_discounted(pt.p, eps, discount, "correction term"));
}

ConfidenceInterval confidence_interval(double lower, double upper, double correction, double alpha,
                                       bool corrected) {
    if (lower > upper + 1e-9) {
        std::ostringstream os;
        os << "lower bound " << lower << " exceeds upper bound " << upper;
        throw InternalError(os.str());
    }
    ConfidenceInterval ci;
    ci.correction = correction;
    ci.nominal_level = 1.0 - alpha;
    ci.corrected = corrected;
    ci.lower = corrected ? lower - correction : lower;
    ci.upper = corrected ? upper + correction : upper;
    return ci;
}

double interval_length_bound(const EmpiricalConditional& emp, const ImportanceRatio& ratio,
                             const RadiusSchedule& schedule, double discount, double value_bound,
                             const Vector& initial_dist, const CostMetric& cost) {
    emp.require_coverage();
    const int ns = emp.n_states();
    const int np = cost.n_points();
    Vector eps = Vector::Zero(ns);
    for (int s = 0; s < ns; ++s) {
        if (schedule.rho(s) == 0.0 || value_bound == 0.0) continue;
        double best = 0.0;
        for (const auto& atom : emp.state(s).atoms) {
            const int z = cost.point(atom.action, atom.next_state);
            const double bz = ratio.beta(s, atom.action);
            for (int y = 0; y < np; ++y) {
                if (y == z) continue;
                const double by = ratio.beta(s, cost.action_of(y));
                const double num = cost.state_of(y) != atom.next_state ? (by + bz) : std::abs(by - bz);
                best = std::max(best, num * value_bound / cost(y, z));
            }
        }
        eps(s) = discount * schedule.rho(s) * best;
    }
    const PlugInTransition pt = plug_in_transition(emp, ratio);
    return 2.0 * initial_dist.dot(solve_discounted(pt.p, eps, discount, "interval length bound"));
}

} // namespace rope
