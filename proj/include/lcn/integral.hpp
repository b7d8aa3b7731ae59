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

#ifndef LCN_INTEGRAL_HPP
#define LCN_INTEGRAL_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lcn/tensor.hpp"

namespace lcn {

enum class WindowMode { sliding, tiled };
enum class Boundary { replicate };

// Half-open index range [lo, hi).
struct Span {
    std::size_t lo = 0, hi = 0;
    std::size_t size() const { return hi - lo; }
    bool operator==(const Span &) const = default;
};

// Window covering anchor `pos` along an axis of length `extent`.
//   sliding: centered box of `size`, shifted (never shrunk) to lie inside
//            [0, extent); the whole axis when size >= extent.
//   tiled:   the floor-partition tile containing pos; edge tiles may be short.
// This is the single definition of window membership: the fast path, the
// backward pass and the naive oracle all call it.
Span window_range(std::size_t extent, std::size_t pos, std::size_t size, WindowMode mode);

// Partitioned channel group containing channel c.
Span group_range(std::size_t c, std::size_t c_group);

struct Extent3 {
    std::size_t c = 0, h = 0, w = 0;
    std::size_t count() const { return c * h * w; }
    bool operator==(const Extent3 &) const = default;
};

// Range lookup table for one axis: entry i is the range used by position i.
struct AxisPlan {
    std::vector<Span> ranges;
};

AxisPlan window_plan(std::size_t extent, std::size_t size, WindowMode mode);
AxisPlan group_plan(std::size_t channels, std::size_t c_group);
// For every coordinate j, the contiguous range of anchors whose window
// (per `windows`) contains j. Requires lo/hi monotone in the anchor, which
// holds for every plan built above.
AxisPlan anchor_plan(const AxisPlan &windows);

// 3-D summed-area table over one (C, H, W) slice with zero leading planes:
// at(c, h, w) is the sum of the source over [0,c) x [0,h) x [0,w).
//
// The table is kept as an unevaluated sum table + residual (double-double):
// the residual holds the rounding error of every prefix, so corner
// differences of large prefixes stay accurate to the size of the box.
class Integral3 {
public:
    Integral3() = default;
    Integral3(Extent3 dims, std::vector<double> table, std::vector<double> residual);

    const Extent3 &dims() const { return dims_; }
    std::size_t offset(std::size_t c, std::size_t h, std::size_t w) const {
        return (c * (dims_.h + 1) + h) * (dims_.w + 1) + w;
    }
    double at(std::size_t c, std::size_t h, std::size_t w) const {
        return table_[offset(c, h, w)] + residual_[offset(c, h, w)];
    }
    std::span<const double> table() const { return table_; }
    std::span<const double> residual() const { return residual_; }

private:
    Extent3 dims_ {};
    std::vector<double> table_;
    std::vector<double> residual_;
};

// Table of sample `sample` of x, or of its elementwise square. `shift` is
// subtracted from every source element first (before squaring); callers use
// it to center the data and keep the tables small. Accumulates in real64.
template <typename T>
Integral3 build_integral(const Tensor<T> &x, std::size_t sample, bool squared,
        double shift = 0.0);

Integral3 build_integral(std::span<const double> source, Extent3 dims,
        bool squared = false, double shift = 0.0);

// Sum over [c0,c1) x [h0,h1) x [w0,w1) by 8-corner inclusion-exclusion.
double box_sum(const Integral3 &ii, std::size_t c0, std::size_t c1, std::size_t h0,
        std::size_t h1, std::size_t w0, std::size_t w1);

// Box sum at every (c, h, w) with the ranges taken from per-axis plans.
std::vector<double> box_sums(const Integral3 &ii, const AxisPlan &c_plan,
        const AxisPlan &h_plan, const AxisPlan &w_plan);

// Box sums as unevaluated pairs hi + lo, for callers that keep cancelling
// them against each other (the variance).
struct SplitSums {
    std::vector<double> hi, lo;
};

SplitSums box_sums_split(const Integral3 &ii, const AxisPlan &c_plan, const AxisPlan &h_plan,
        const AxisPlan &w_plan);

// Window sum for every position of the slice, (C, H, W) order. O(C*H*W)
// for any p, q.
std::vector<double> box_sums_all(const Integral3 &ii, std::size_t c_group, std::size_t p,
        std::size_t q, WindowMode mode, Boundary boundary = Boundary::replicate);

// Number of source elements in each position's window, (C, H, W) order.
std::vector<std::int64_t> window_counts(Extent3 dims, std::size_t c_group, std::size_t p,
        std::size_t q, WindowMode mode);

// Throws GroupError / RangeError for an invalid window configuration.
void validate_window(std::size_t channels, std::size_t c_group, std::size_t p, std::size_t q);

} // namespace lcn

#endif
