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

#include <span>

namespace rope {

/// Standard normal quantile. Acklam's rational approximation refined by one
/// Halley step against std::erfc; absolute error below 1e-9 for p in [1e-12, 1 - 1e-12].
double normal_quantile(double p);

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_stddev(std::span<const double> xs);

} // namespace rope
