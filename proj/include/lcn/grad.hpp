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

#ifndef LCN_GRAD_HPP
#define LCN_GRAD_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lcn/norms.hpp"

namespace lcn {

struct GradBundle {
    Tensor4 grad_x;
    std::vector<double> grad_gamma;
    std::vector<double> grad_beta;
};

// Exact adjoint of lcn_forward, statistics differentiated through. Every
// x_j collects from all windows that contain it, found with the inverse
// (anchor) plan of each axis, so the cost does not depend on p or q.
GradBundle lcn_backward(const Tensor4 &grad_y, const Tensor4 &x, const LcnConfig &cfg,
        const AffineParams &params, const NormStats &stats);

enum class RefOp { gn, in, ln, bn };

struct RefConfig {
    std::size_t groups = 1;  // gn only
    double eps = 1e-5;
    bool training = true;    // bn only; eval treats the statistics as constants
};

GradBundle reference_backward(RefOp op, const Tensor4 &grad_y, const Tensor4 &x,
        const RefConfig &config, const AffineParams &params, const NormStats &stats);

// Uniform front end over every differentiable op, for the checkers.
enum class NormOp { lcn, gn, in, ln, bn };

struct OpConfig {
    NormOp op = NormOp::lcn;
    LcnConfig lcn {};
    RefConfig ref {};
};

const char *op_name(NormOp op);
NormResult<double> forward(const OpConfig &config, const Tensor4 &x, const AffineParams &params);
GradBundle backward(const OpConfig &config, const Tensor4 &grad_y, const Tensor4 &x,
        const AffineParams &params, const NormStats &stats);

// Below this pooled variance the input is rejected by the checkers.
inline constexpr double kDegenerateVariance = 1e-6;

struct FdReport {
    double max_abs_x = 0, max_rel_x = 0;
    double max_abs_gamma = 0, max_rel_gamma = 0;
    double max_abs_beta = 0, max_rel_beta = 0;
    std::size_t worst_index = 0;  // flat index of the worst grad_x entry

    double max_rel() const;
    double max_abs() const;
};

// Compares the analytic gradients of L = sum_i w_i * y_i (w drawn from
// `seed`) against central differences with the given step. Relative errors
// are normwise: max |analytic - numeric| / max |numeric|.
FdReport finite_diff_check(const OpConfig &config, const Tensor4 &x, const AffineParams &params,
        double step, std::uint64_t seed);

struct AdjointReport {
    double forward_side = 0;   // <J u, v>, J u by extrapolated finite differences
    double backward_side = 0;  // <u, J^T v>, J^T v by the backward pass
    double rel_error = 0;      // |difference| / (|u| |J^T v|)
};

// J u comes from Richardson-extrapolated central differences (steps t, t/2,
// t/4) of the two-pass reference forward, with t = step * min pooled sigma.
AdjointReport adjoint_check(const OpConfig &config, const Tensor4 &x,
        const AffineParams &params, std::uint64_t seed, double step = 1e-2);

// Small normal noise on top of a ramp along every axis, so no pool of two
// or more elements is close to constant.
Tensor4 ramp_input(Dims dims, std::uint64_t seed);

} // namespace lcn

#endif
