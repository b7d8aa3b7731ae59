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

#ifndef LCN_NORMS_HPP
#define LCN_NORMS_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lcn/integral.hpp"
#include "lcn/tensor.hpp"

namespace lcn {

struct LcnConfig {
    std::size_t c_group = 2;     // channels per group
    std::size_t p = 227;         // window height
    std::size_t q = 227;         // window width
    WindowMode mode = WindowMode::sliding;
    Boundary boundary = Boundary::replicate;
    double eps = 1e-5;
};

// Per-channel scale and shift applied after normalization.
struct AffineParams {
    std::vector<double> gamma;
    std::vector<double> beta;

    static AffineParams identity(std::size_t channels) {
        return {std::vector<double>(channels, 1.0), std::vector<double>(channels, 0.0)};
    }
};

// Statistics saved by a forward pass, one entry per input position.
// var is the clamped (>= 0) variance before eps is added; n_map is the
// number of elements each statistic pooled over.
struct NormStats {
    Tensor4 mean;
    Tensor4 var;
    Tensor<std::int64_t> n_map;
};

template <typename T>
struct NormResult {
    Tensor<T> y;
    NormStats stats;
};

struct LrnConfig {
    std::size_t window = 9;  // odd side of the Gaussian weighting window
    double sigma_g = 2.0;    // std of the weighting window, in pixels
};

// Batch-norm running statistics, updated in place by training-mode calls.
// Empty vectors are initialized to mean 0 / var 1 on first use.
struct RunningStats {
    std::vector<double> mean;
    std::vector<double> var;
    double momentum = 0.1;
};

void validate(const LcnConfig &cfg, const Dims &dims);
void validate(const AffineParams &params, std::size_t channels);

// Local context normalization: statistics over a p x q spatial window and a
// c_group channel group around every position, from two summed-area tables.
template <typename T>
NormResult<T> lcn_forward(const Tensor<T> &x, const LcnConfig &cfg, const AffineParams &params);

template <typename T>
NormResult<T> gn_forward(const Tensor<T> &x, std::size_t groups, double eps,
        const AffineParams &params);

template <typename T>
NormResult<T> in_forward(const Tensor<T> &x, double eps, const AffineParams &params);

template <typename T>
NormResult<T> ln_forward(const Tensor<T> &x, double eps, const AffineParams &params);

// training: per-channel batch statistics over (B, H, W); `running`, when
// given, is updated. Otherwise normalizes with `running`, which must exist.
template <typename T>
NormResult<T> bn_forward(const Tensor<T> &x, double eps, const AffineParams &params,
        RunningStats *running, bool training);

// Gaussian-weighted local response normalization with a cross-channel
// divisor floored at the per-sample mean of that divisor. Borders clamp.
template <typename T>
Tensor<T> lrn_forward(const Tensor<T> &x, const LrnConfig &cfg);

template <typename T>
Tensor<T> affine(const Tensor<T> &xhat, const AffineParams &params);

// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(std::size_t window, double sigma);

} // namespace lcn

#endif
