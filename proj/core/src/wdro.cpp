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

#include "rope/wdro.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rope {

AtomSet atom_set(const EmpiricalConditional& emp, int s, const CostMetric& cost) {
    if (cost.n_states() != emp.n_states() || cost.n_actions() != emp.n_actions())
        throw InputError("cost metric dimensions do not match the empirical model");
    const auto& st = emp.state(s);
    AtomSet out;
    out.reserve(st.atoms.size());
    for (std::size_t i = 0; i < st.atoms.size(); ++i)
        out.push_back({cost.point(st.atoms[i].action, st.atoms[i].next_state), st.weight(i)});
    return out;
}

double global_slope(std::span<const double> f, int z, const CostMetric& cost) {
    const int n = cost.n_points();
    if (n < 2) throw InputError("global slope needs at least two points");
    double best = -kInf;
    for (int y = 0; y < n; ++y) {
        if (y == z) continue;
        best = std::max(best, (f[static_cast<std::size_t>(y)] - f[static_cast<std::size_t>(z)]) / cost(y, z));
    }
    return best;
}

double lipschitz_norm(std::span<const double> f, std::span<const int> support, const CostMetric& cost) {
    if (support.empty()) throw InputError("Lipschitz norm needs a nonempty support");
    double best = -kInf;
    for (int z : support) best = std::max(best, global_slope(f, z, cost));
    return best;
}

double lipschitz_norm(std::span<const double> f, const AtomSet& atoms, const CostMetric& cost) {
    std::vector<int> support;
    support.reserve(atoms.size());
    for (const auto& a : atoms) support.push_back(a.point);
    return lipschitz_norm(f, support, cost);
}

double atom_mean(std::span<const double> f, const AtomSet& atoms) {
    double m = 0.0;
    for (const auto& a : atoms) m += a.weight * f[static_cast<std::size_t>(a.point)];
    return m;
}

double robust_dual_objective(std::span<const double> f, const AtomSet& atoms, double rho, double lambda,
                             const CostMetric& cost) {
    const int n = cost.n_points();
    double acc = -lambda * rho;
    for (const auto& atom : atoms) {
        double best = kInf;
        for (int z = 0; z < n; ++z)
            best = std::min(best, f[static_cast<std::size_t>(z)] + lambda * cost(z, atom.point));
        acc += atom.weight * best;
    }
    return acc;
}

namespace {

struct Piece {
    double start;  ///< lambda at which this line becomes the minimizer
    int point;
    double slope;  ///< c(point, origin)
};

/// Lower envelope over lambda >= 0 of lambda -> f(z) + lambda c(z, origin).
void lower_envelope(std::span<const double> f, int origin, const CostMetric& cost, std::vector<Piece>& out) {
    const int n = cost.n_points();
    int cur = 0;
    for (int z = 1; z < n; ++z) {
        const double fz = f[static_cast<std::size_t>(z)];
        const double fc = f[static_cast<std::size_t>(cur)];
        if (fz < fc || (fz == fc && cost(z, origin) < cost(cur, origin))) cur = z;
    }
    double lambda = 0.0;
    out.push_back({0.0, cur, cost(cur, origin)});
    while (true) {
        const double c_cur = cost(cur, origin);
        if (c_cur == 0.0) break;
        int next = -1;
        double best_cross = kInf;
        double best_slope = kInf;
        for (int z = 0; z < n; ++z) {
            const double c_z = cost(z, origin);
            if (c_z >= c_cur) continue;
            const double cross =
                (f[static_cast<std::size_t>(z)] - f[static_cast<std::size_t>(cur)]) / (c_cur - c_z);
            if (cross < best_cross || (cross == best_cross && c_z < best_slope)) {
                best_cross = cross;
                best_slope = c_z;
                next = z;
            }
        }
        if (next < 0) break;
        lambda = std::max(lambda, best_cross);
        cur = next;
        out.push_back({lambda, cur, best_slope});
    }
}

struct Kink {
    double lambda;
    int atom;
    int piece;  ///< index (within the atom's envelope) of the piece starting here
};

struct SweepResult {
    double lambda;
    Vector mu;
    double plan_cost;
};

SweepResult sweep(std::span<const double> f, const AtomSet& atoms, double rho, const CostMetric& cost) {
    const auto m = atoms.size();
    std::vector<Piece> pieces;
    std::vector<std::size_t> offset(m + 1, 0);
    pieces.reserve(m * 4);
    for (std::size_t i = 0; i < m; ++i) {
        offset[i] = pieces.size();
        lower_envelope(f, atoms[i].point, cost, pieces);
    }
    offset[m] = pieces.size();

    // Right derivative of the dual objective at lambda = 0 (plus rho).
    double slope = 0.0;
    for (std::size_t i = 0; i < m; ++i) slope += atoms[i].weight * pieces[offset[i]].slope;

    SweepResult out{0.0, Vector::Zero(cost.n_points()), 0.0};
    std::vector<std::size_t> cur(m, 0);  // active piece per atom, relative index

    if (slope <= rho) {
        for (std::size_t i = 0; i < m; ++i) {
            const Piece& p = pieces[offset[i]];
            out.mu(p.point) += atoms[i].weight;
            out.plan_cost += atoms[i].weight * p.slope;
        }
        return out;
    }

    std::vector<Kink> kinks;
    kinks.reserve(pieces.size());
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = offset[i] + 1; k < offset[i + 1]; ++k)
            kinks.push_back({pieces[k].start, static_cast<int>(i), static_cast<int>(k - offset[i])});
    std::sort(kinks.begin(), kinks.end(), [](const Kink& a, const Kink& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        if (a.atom != b.atom) return a.atom < b.atom;
        return a.piece < b.piece;
    });

    std::size_t idx = 0;
    while (idx < kinks.size()) {
        const double g0 = kinks[idx].lambda;
        const double group_tol = 1e-12 * std::max(1.0, std::abs(g0));
        std::size_t end = idx;
        std::vector<std::size_t> left;  // piece before the group, per touched atom
        std::vector<int> touched;
        double after = slope;
        for (; end < kinks.size() && kinks[end].lambda <= g0 + group_tol; ++end) {
            const auto i = static_cast<std::size_t>(kinks[end].atom);
            const auto k = static_cast<std::size_t>(kinks[end].piece);
            if (std::find(touched.begin(), touched.end(), kinks[end].atom) == touched.end()) {
                touched.push_back(kinks[end].atom);
                left.push_back(cur[i]);
            }
            after -= atoms[i].weight * (pieces[offset[i] + cur[i]].slope - pieces[offset[i] + k].slope);
            cur[i] = k;
        }
        if (after <= rho) {
            out.lambda = g0;
            std::vector<std::size_t> left_of(m, 0);
            std::vector<char> in_group(m, 0);
            for (std::size_t t = 0; t < touched.size(); ++t) {
                const auto i = static_cast<std::size_t>(touched[t]);
                in_group[i] = 1;
                left_of[i] = left[t];
            }
            double extra = rho - after;
            for (std::size_t i = 0; i < m; ++i) {
                const Piece& right = pieces[offset[i] + cur[i]];
                const double w = atoms[i].weight;
                if (!in_group[i]) {
                    out.mu(right.point) += w;
                    out.plan_cost += w * right.slope;
                    continue;
                }
                const Piece& lft = pieces[offset[i] + left_of[i]];
                const double delta = w * (lft.slope - right.slope);
                double theta = 0.0;
                if (delta > 0.0 && extra > 0.0) theta = std::min(1.0, extra / delta);
                extra -= theta * delta;
                out.mu(lft.point) += theta * w;
                out.mu(right.point) += (1.0 - theta) * w;
                out.plan_cost += w * (theta * lft.slope + (1.0 - theta) * right.slope);
            }
            return out;
        }
        slope = after;
        idx = end;
    }
    throw InternalError("dual sweep ended without reaching a nonpositive slope");
}

void check_inner_inputs(std::span<const double> f, const AtomSet& atoms, double rho, const CostMetric& cost) {
    if (!(rho >= 0.0)) throw InputError("Wasserstein radius must be nonnegative");
    if (atoms.empty()) throw InputError("inner problem needs at least one atom");
    if (f.size() != static_cast<std::size_t>(cost.n_points()))
        throw InputError("function table size does not match the cost metric");
}

WorstCase solve_worst_case(std::span<const double> f, const AtomSet& atoms, double rho, const CostMetric& cost) {
    check_inner_inputs(f, atoms, rho, cost);
    if (rho == 0.0) {
        WorstCase wc{Vector::Zero(cost.n_points()), 0.0, atom_mean(f, atoms), kInf};
        for (const auto& a : atoms) wc.mu(a.point) += a.weight;
        return wc;
    }
    SweepResult sw = sweep(f, atoms, rho, cost);
    const double dual = robust_dual_objective(f, atoms, rho, sw.lambda, cost);
    double primal = 0.0;
    for (int z = 0; z < cost.n_points(); ++z) primal += sw.mu(z) * f[static_cast<std::size_t>(z)];
    if (std::abs(primal - dual) > 1e-9 * (1.0 + std::abs(dual))) {
        std::ostringstream os;
        os << "primal recovery gap " << primal - dual << " at lambda " << sw.lambda;
        throw InternalError(os.str());
    }
    return {std::move(sw.mu), sw.plan_cost, dual, sw.lambda};
}

std::vector<double> negated(std::span<const double> f) {
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = -f[i];
    return out;
}

} // namespace

InnerSolution robust_inner(std::span<const double> f, const AtomSet& atoms, double rho, const CostMetric& cost) {
    check_inner_inputs(f, atoms, rho, cost);
    if (rho == 0.0) return {atom_mean(f, atoms), kInf};
    const SweepResult sw = sweep(f, atoms, rho, cost);
    return {robust_dual_objective(f, atoms, rho, sw.lambda, cost), sw.lambda};
}

InnerSolution optimistic_inner(std::span<const double> f, const AtomSet& atoms, double rho,
                               const CostMetric& cost) {
    const auto neg = negated(f);
    const InnerSolution r = robust_inner(neg, atoms, rho, cost);
    return {-r.value, r.lambda};
}

WorstCase worst_case_distribution(std::span<const double> f, const AtomSet& atoms, double rho,
                                  const CostMetric& cost) {
    return solve_worst_case(f, atoms, rho, cost);
}

WorstCase best_case_distribution(std::span<const double> f, const AtomSet& atoms, double rho,
                                 const CostMetric& cost) {
    const auto neg = negated(f);
    WorstCase wc = solve_worst_case(neg, atoms, rho, cost);
    wc.value = -wc.value;
    return wc;
}

double regularizer_value(std::span<const double> f, const AtomSet& atoms, double rho, const CostMetric& cost) {
    return optimistic_inner(f, atoms, rho, cost).value - atom_mean(f, atoms);
}

} // namespace rope
