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

#include "rope/trajectory.hpp"

#include "rope/rng.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace rope {

std::size_t Dataset::total_transitions() const {
    std::size_t n = 0;
    for (const auto& tr : trajectories) n += tr.size();
    return n;
}

void Dataset::validate() const {
    for (std::size_t j = 0; j < trajectories.size(); ++j) {
        const auto& tr = trajectories[j];
        for (std::size_t t = 0; t < tr.size(); ++t) {
            const auto& x = tr[t];
            if (x.state < 0 || x.state >= meta.n_states || x.next_state < 0 ||
                x.next_state >= meta.n_states || x.action < 0 || x.action >= meta.n_actions) {
                std::ostringstream os;
                os << "trajectory " << j << " step " << t << ": index out of declared range";
                throw InputError(os.str());
            }
            if (t + 1 < tr.size() && tr[t + 1].state != x.next_state) {
                std::ostringstream os;
                os << "trajectory " << j << " step " << t << ": next state " << x.next_state
                   << " does not match following state " << tr[t + 1].state;
                throw InputError(os.str());
            }
        }
    }
}

namespace {

Trajectory rollout(const FiniteMdp& mdp, const Policy& behavior, int horizon, Rng& rng) {
    Trajectory tr;
    tr.reserve(static_cast<std::size_t>(horizon));
    const Vector& d0 = mdp.initial_dist();
    int s = rng.categorical({d0.data(), static_cast<std::size_t>(d0.size())});
    std::vector<double> pi_row(static_cast<std::size_t>(mdp.n_actions()));
    for (int t = 0; t < horizon; ++t) {
        for (int a = 0; a < mdp.n_actions(); ++a) pi_row[static_cast<std::size_t>(a)] = behavior.prob(s, a);
        const int a = rng.categorical(pi_row);
        const int next = rng.categorical(mdp.transition_row(s, a));
        tr.push_back({s, a, mdp.reward(s, a), next});
        s = next;
    }
    return tr;
}

void check_simulation_inputs(const FiniteMdp& mdp, const Policy& behavior, int episodes, int horizon) {
    if (episodes < 1) throw InputError("number of episodes must be at least 1");
    if (horizon < 1) throw InputError("horizon must be at least 1");
    if (behavior.n_states() != mdp.n_states() || behavior.n_actions() != mdp.n_actions())
        throw InputError("behavior policy dimensions do not match the MDP");
}

} // namespace

Dataset simulate(const FiniteMdp& mdp, const Policy& behavior, int episodes, int horizon,
                 std::uint64_t seed, const std::string& env_id) {
    check_simulation_inputs(mdp, behavior, episodes, horizon);
    Dataset ds;
    ds.meta = {env_id, seed, episodes, horizon, mdp.n_states(), mdp.n_actions()};
    ds.trajectories.reserve(static_cast<std::size_t>(episodes));
    for (int j = 0; j < episodes; ++j) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
        ds.trajectories.push_back(rollout(mdp, behavior, horizon, rng));
    }
    return ds;
}

Dataset simulate_single(const FiniteMdp& mdp, const Policy& behavior, int horizon, std::uint64_t seed,
                        const std::string& env_id) {
    return simulate(mdp, behavior, 1, horizon, seed, env_id);
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
    double x = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), x);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw InputError("malformed number '" + std::string(token) + "'");
    return x;
}

long long parse_int(std::string_view token) {
    long long x = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), x);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw InputError("malformed integer '" + std::string(token) + "'");
    return x;
}

namespace {

constexpr std::string_view kMagic = "#rope-dataset v1";
constexpr std::string_view kColumns = "traj,t,s,a,r,s_next";

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& msg) {
    throw InputError("dataset line " + std::to_string(line_no) + ": " + msg);
}

} // namespace

void write_dataset(std::ostream& out, const Dataset& ds) {
    const auto& m = ds.meta;
    out << kMagic << " env=" << m.env << " seed=" << m.seed << " episodes=" << m.episodes
        << " horizon=" << m.horizon << " n_states=" << m.n_states << " n_actions=" << m.n_actions << '\n';
    out << kColumns << '\n';
    for (std::size_t j = 0; j < ds.trajectories.size(); ++j) {
        const auto& tr = ds.trajectories[j];
        for (std::size_t t = 0; t < tr.size(); ++t) {
            const auto& x = tr[t];
            out << j << ',' << t << ',' << x.state << ',' << x.action << ',' << format_double(x.reward) << ','
                << x.next_state << '\n';
        }
    }
}

Dataset read_dataset(std::istream& in) {
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw InputError("dataset is empty");
    ++line_no;
    if (line.rfind(kMagic, 0) != 0) fail_line(line_no, "missing '#rope-dataset v1' header");
    bool seen_states = false, seen_actions = false;
    for (auto field : split(std::string_view(line).substr(kMagic.size()), ' ')) {
        if (field.empty()) continue;
        const auto eq = field.find('=');
        if (eq == std::string_view::npos) fail_line(line_no, "malformed header field");
        const auto key = field.substr(0, eq);
        const auto val = field.substr(eq + 1);
        if (key == "env") ds.meta.env = std::string(val);
        else if (key == "seed") {
            std::uint64_t seed = 0;
            const auto res = std::from_chars(val.data(), val.data() + val.size(), seed);
            if (res.ec != std::errc() || res.ptr != val.data() + val.size()) fail_line(line_no, "bad seed");
            ds.meta.seed = seed;
        } else if (key == "episodes") ds.meta.episodes = static_cast<int>(parse_int(val));
        else if (key == "horizon") ds.meta.horizon = static_cast<int>(parse_int(val));
        else if (key == "n_states") { ds.meta.n_states = static_cast<int>(parse_int(val)); seen_states = true; }
        else if (key == "n_actions") { ds.meta.n_actions = static_cast<int>(parse_int(val)); seen_actions = true; }
        else fail_line(line_no, "unknown header field '" + std::string(key) + "'");
    }
    if (!seen_states || !seen_actions) fail_line(line_no, "header must declare n_states and n_actions");

    if (!std::getline(in, line)) throw InputError("dataset is missing the column record");
    ++line_no;
    if (line != kColumns) fail_line(line_no, "expected column record '" + std::string(kColumns) + "'");

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 6) fail_line(line_no, "expected 6 fields");
        long long traj = 0, t = 0;
        Transition x{};
        try {
            traj = parse_int(f[0]);
            t = parse_int(f[1]);
            x.state = static_cast<int>(parse_int(f[2]));
            x.action = static_cast<int>(parse_int(f[3]));
            x.reward = parse_double(f[4]);
            x.next_state = static_cast<int>(parse_int(f[5]));
        } catch (const InputError& e) {
            fail_line(line_no, e.what());
        }
        if (x.state < 0 || x.state >= ds.meta.n_states || x.next_state < 0 ||
            x.next_state >= ds.meta.n_states || x.action < 0 || x.action >= ds.meta.n_actions)
            fail_line(line_no, "index out of declared range");
        if (traj < 0 || traj > static_cast<long long>(ds.trajectories.size()))
            fail_line(line_no, "trajectory index out of order");
        if (traj == static_cast<long long>(ds.trajectories.size())) ds.trajectories.emplace_back();
        auto& tr = ds.trajectories[static_cast<std::size_t>(traj)];
        if (t != static_cast<long long>(tr.size())) fail_line(line_no, "step index out of order");
        if (!tr.empty() && tr.back().next_state != x.state)
            fail_line(line_no, "state does not continue the previous transition");
        tr.push_back(x);
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    write_dataset(out, ds);
    if (!out) throw InputError("write to '" + path.string() + "' failed");
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "' for reading");
    return read_dataset(in);
}

} // namespace rope
