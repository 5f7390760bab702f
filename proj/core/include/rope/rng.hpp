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

#include <cstdint>
#include <random>
#include <span>

namespace rope {

/// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for the j-th independent stream of a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(seed ^ splitmix64(stream));
}

/**
 * Platform-stable random source: std::mt19937_64 (sequence fixed by the C++
 * standard) with a hand-rolled 53-bit uniform conversion and inverse-CDF
 * categorical sampling over ascending indices. std distributions are avoided
 * because their output is implementation-defined.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Single uniform draw, first index whose running sum exceeds it.
    /// Falls back to the last index with positive mass on round-off.
    int categorical(std::span<const double> probs) {
        const double u = uniform();
        double acc = 0.0;
        int last_positive = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] <= 0.0) continue;
            last_positive = static_cast<int>(i);
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return last_positive;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace rope
