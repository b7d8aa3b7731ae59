/*******************************************************************************
* Copyright 2026 The LCN Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#ifndef LCN_SUITES_HPP
#define LCN_SUITES_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lcn/tensor.hpp"

namespace lcn {

// Outcome of one randomized property suite. Trial t uses seed `seed + t`;
// a failure is reproduced with --seed <failing_seed> --trials 1.
struct SuiteResult {
    std::string name;
    std::size_t trials = 0;
    std::size_t failures = 0;
    std::size_t rejected = 0;     // degenerate inputs, neither pass nor fail
    double tolerance = 0.0;
    double worst_error = 0.0;
    std::uint64_t worst_seed = 0;
    std::string worst_case;
    std::uint64_t failing_seed = 0;
    std::string failing_case;

    bool passed() const { return failures == 0; }
};

// Fixed tolerances for every suite.
inline constexpr double kOracleTolerance = 1e-9;
inline constexpr double kReductionTolerance = 1e-12;
inline constexpr double kGradientTolerance = 1e-4;
inline constexpr double kGradientStep = 1e-4;
inline constexpr double kAdjointTolerance = 1e-10;
inline constexpr double kShiftTolerance = 1e-12;
inline constexpr std::size_t kShiftPixels = 16;

// lcn_forward vs lcn_naive over random shapes, windows, groups and modes.
SuiteResult run_lcn_oracle_suite(std::size_t trials, std::uint64_t seed);
// gn / in / ln / bn / lrn fast paths vs their direct evaluations.
SuiteResult run_family_oracle_suite(std::size_t trials, std::uint64_t seed);
// Whole-extent tiled LCN vs GN, LN and IN.
SuiteResult run_reduction_suite(std::size_t trials, std::uint64_t seed);
// Central differences for lcn and every reference op, each trial.
SuiteResult run_gradient_suite(std::size_t trials, std::uint64_t seed);
// <J u, v> = <u, J^T v>, cycling through the ops.
SuiteResult run_adjoint_suite(std::size_t trials, std::uint64_t seed);
// Sliding-mode outputs agree between two overlapping horizontal crops.
SuiteResult run_shift_suite(std::size_t trials, std::uint64_t seed);

// Columns [start, start + width) of every row.
Tensor4 crop_width(const Tensor4 &x, std::size_t start, std::size_t width);

// Normwise relative error max|a - b| / max|b| (absolute if b is all zero).
double max_rel_error(const Tensor4 &a, const Tensor4 &b);

} // namespace lcn

#endif
