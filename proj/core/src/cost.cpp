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

#include "rope/cost.hpp"

#include "rope/rng.hpp"
#include "rope/trajectory.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rope {

namespace {

constexpr double kMetricTol = 1e-12;

void check_triangle(const Matrix& c, int i, int j, int k) {
    if (c(i, k) > c(i, j) + c(j, k) + kMetricTol) {
        std::ostringstream os;
        os << "cost table violates the triangle inequality at (" << i << "," << j << "," << k << ")";
        throw InputError(os.str());
    }
}

} // namespace

CostMetric::CostMetric(int n_actions, int n_states, Matrix table, Kind kind)
    : n_actions_(n_actions), n_states_(n_states), table_(std::move(table)), diameter_(0.0), kind_(kind) {
    if (n_actions_ < 1 || n_states_ < 1) throw InputError("cost metric needs positive dimensions");
    const int n = n_points();
    if (table_.rows() != n || table_.cols() != n) throw InputError("cost table has the wrong shape");
    for (int i = 0; i < n; ++i) {
        if (table_(i, i) != 0.0) throw InputError("cost table must be zero on the diagonal");
        for (int j = 0; j < n; ++j) {
            if (!std::isfinite(table_(i, j))) throw InputError("cost table has non-finite entries");
            if (i != j && !(table_(i, j) > 0.0)) throw InputError("cost table must be positive off the diagonal");
            if (std::abs(table_(i, j) - table_(j, i)) > kMetricTol) throw InputError("cost table must be symmetric");
            diameter_ = std::max(diameter_, table_(i, j));
        }
    }
    if (n <= 64) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) check_triangle(table_, i, j, k);
    } else {
        Rng rng(0x5eedc057ULL);
        for (int trial = 0; trial < 200'000; ++trial) {
            const auto pick = [&] { return static_cast<int>(rng.uniform() * n); };
            check_triangle(table_, pick(), pick(), pick());
        }
    }
}

CostMetric CostMetric::standard(int n_actions, int n_states) {
    const int n = n_actions * n_states;
    if (n_actions < 1 || n_states < 1) throw InputError("cost metric needs positive dimensions");
    Matrix c(n, n);
    const double scale = static_cast<double>(n_states + n_actions);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int da = std::abs(i / n_states - j / n_states);
            const int ds = std::abs(i % n_states - j % n_states);
            c(i, j) = static_cast<double>(da + ds) / scale;
        }
    return CostMetric(n_actions, n_states, std::move(c), Kind::kDefault);
}

CostMetric CostMetric::from_table(int n_actions, int n_states, Matrix table) {
    return CostMetric(n_actions, n_states, std::move(table), Kind::kCustom);
}

CostMetric load_cost_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open cost table '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("#rope-cost v1", 0) != 0)
        throw InputError("cost table line 1: missing '#rope-cost v1' header");
    int na = 0, ns = 0;
    {
        std::istringstream hs(line.substr(std::string("#rope-cost v1").size()));
        std::string field;
        while (hs >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) throw InputError("cost table line 1: malformed header field");
            const auto key = field.substr(0, eq);
            const auto val = std::string_view(field).substr(eq + 1);
            if (key == "n_actions") na = static_cast<int>(parse_int(val));
            else if (key == "n_states") ns = static_cast<int>(parse_int(val));
            else throw InputError("cost table line 1: unknown field '" + key + "'");
        }
    }
    if (na < 1 || ns < 1) throw InputError("cost table header must declare positive n_actions and n_states");
    const int n = na * ns;
    Matrix table = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string_view> f;
        std::string_view rest(line);
        while (true) {
            const auto pos = rest.find(',');
            f.push_back(rest.substr(0, pos));
            if (pos == std::string_view::npos) break;
            rest.remove_prefix(pos + 1);
        }
        const auto where = "cost table line " + std::to_string(line_no) + ": ";
        if (f.size() != 5) throw InputError(where + "expected a,s,a2,s2,cost");
        try {
            const auto a1 = parse_int(f[0]), s1 = parse_int(f[1]), a2 = parse_int(f[2]), s2 = parse_int(f[3]);
            if (a1 < 0 || a1 >= na || a2 < 0 || a2 >= na || s1 < 0 || s1 >= ns || s2 < 0 || s2 >= ns)
                throw InputError("index out of declared range");
            table(static_cast<Eigen::Index>(a1 * ns + s1), static_cast<Eigen::Index>(a2 * ns + s2)) =
                parse_double(f[4]);
        } catch (const InputError& e) {
            throw InputError(where + e.what());
        }
    }
    if (table.hasNaN()) throw InputError("cost table does not cover every pair of points");
    return CostMetric::from_table(na, ns, std::move(table));
}

void save_cost_table(const CostMetric& cost, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    out << "#rope-cost v1 n_actions=" << cost.n_actions() << " n_states=" << cost.n_states() << '\n';
    for (int i = 0; i < cost.n_points(); ++i)
        for (int j = 0; j < cost.n_points(); ++j)
            out << cost.action_of(i) << ',' << cost.state_of(i) << ',' << cost.action_of(j) << ','
                << cost.state_of(j) << ',' << format_double(cost(i, j)) << '\n';
}

} // namespace rope
