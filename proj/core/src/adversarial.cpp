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

#include "rope/adversarial.hpp"

#include "rope/stats.hpp"

#include <cmath>
#include <sstream>

namespace rope {

RobustEstimate adversarial_estimate(const EvaluationProblem& problem, const Vector& rho,
                                    const IterationOptions& options) {
    const RadiusSchedule schedule = fixed_radii(rho, problem.cost.diameter());
    RobustEstimate est = robust_value_iteration(problem, schedule, options);
    const double limit = (1.0 - problem.discount) / problem.discount;
    for (std::size_t s = 0; s < est.contraction.states.size(); ++s) {
        const double lhs = rho(static_cast<Eigen::Index>(s)) * est.contraction.states[s].lipschitz;
        if (lhs >= limit) {
            std::ostringstream os;
            os << "state " << s << ": rho * ||beta||_Lip = " << lhs << " is not below " << limit;
            est.warnings.push_back(os.str());
        }
    }
    return est;
}

std::vector<Vector> worst_case_conditionals(const EvaluationProblem& problem, const Vector& rho, const Vector& v) {
    const int ns = problem.emp.n_states();
    const int na = problem.emp.n_actions();
    problem.emp.require_coverage();
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(ns));
    std::vector<double> f(static_cast<std::size_t>(na * ns));
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < na; ++a)
            for (int sp = 0; sp < ns; ++sp) f[static_cast<std::size_t>(a * ns + sp)] = v(sp) * problem.ratio.beta(s, a);
        out.push_back(worst_case_distribution(f, atom_set(problem.emp, s, problem.cost), rho(s), problem.cost).mu);
    }
    return out;
}

double asymptotic_variance(const EvaluationProblem& problem, const std::vector<Vector>& mu_star) {
    const int ns = problem.emp.n_states();
    const int na = problem.emp.n_actions();
    const double g = problem.discount;
    problem.emp.require_coverage();
    if (mu_star.size() != static_cast<std::size_t>(ns)) throw InputError("need one worst-case conditional per state");

    Matrix p = Matrix::Zero(ns, ns);
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a)
            for (int sp = 0; sp < ns; ++sp) p(s, sp) += problem.ratio.beta(s, a) * mu_star[static_cast<std::size_t>(s)](a * ns + sp);
    const Vector w = solve_discounted(p, problem.target_rewards, g, "worst-case transition");
    const Matrix lhs = Matrix::Identity(ns, ns) - g * p.transpose();
    const Vector u = lhs.partialPivLu().solve(problem.initial_dist);

    double sigma2 = 0.0;
    for (int s = 0; s < ns; ++s) {
        const auto& st = problem.emp.state(s);
        double first = 0.0;
        double second = 0.0;
        for (std::size_t i = 0; i < st.atoms.size(); ++i) {
            const double y =
                g * (1.0 - g) * u(s) * w(st.atoms[i].next_state) * problem.ratio.beta(s, st.atoms[i].action);
            first += st.weight(i) * y;
            second += st.weight(i) * y * y;
        }
        const double freq = st.n / problem.emp.total();
        sigma2 += (second - first * first) / freq;
    }
    if (sigma2 < -1e-9) throw InternalError("negative asymptotic variance");
    return std::max(sigma2, 0.0);
}

ConfidenceInterval adversarial_ci(double value, double sigma2, double total, double alpha) {
    if (!(total >= 1.0)) throw InputError("sample size must be at least 1");
    if (!(sigma2 >= 0.0)) throw InputError("variance must be nonnegative");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(sigma2 / total);
    ConfidenceInterval ci;
    ci.lower = value - half;
    ci.upper = value + half;
    ci.nominal_level = 1.0 - alpha;
    return ci;
}

AdversarialEstimate adversarial_analysis(const EvaluationProblem& problem, const Vector& rho, double alpha,
                                         const IterationOptions& options) {
    AdversarialEstimate out;
    out.estimate = adversarial_estimate(problem, rho, options);
    out.total = problem.emp.total();
    out.sigma2 = asymptotic_variance(problem, worst_case_conditionals(problem, rho, out.estimate.v));
    out.ci = adversarial_ci(out.estimate.bound, out.sigma2, out.total, alpha);
    return out;
}

} // namespace rope
