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

#include "rope/common.hpp"
#include "rope/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace rope {
namespace {

TEST(NormalQuantile, KnownValues) {
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_quantile(0.95), 1.6448536269514722, 1e-12);
    EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
    EXPECT_NEAR(normal_quantile(0.025), -1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-9);
}

TEST(NormalQuantile, InvertsErfc) {
    for (double p = 0.001; p < 1.0; p += 0.0137) {
        const double z = normal_quantile(p);
        EXPECT_NEAR(0.5 * std::erfc(-z / std::sqrt(2.0)), p, 1e-14);
    }
}

TEST(NormalQuantile, RejectsOutOfRange) {
    EXPECT_THROW(normal_quantile(0.0), InputError);
    EXPECT_THROW(normal_quantile(1.0), InputError);
    EXPECT_THROW(normal_quantile(std::nan("")), InputError);
}

TEST(Summary, MeanAndStddev) {
    const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
    EXPECT_DOUBLE_EQ(mean(xs), 5.0);
    EXPECT_NEAR(sample_stddev(xs), std::sqrt(32.0 / 7.0), 1e-14);
    EXPECT_DOUBLE_EQ(sample_stddev(std::vector<double>{3.0}), 0.0);
}

} // namespace
} // namespace rope
