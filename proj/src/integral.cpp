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

#include "lcn/integral.hpp"

#include <algorithm>
#include <string>

#include "double_double.hpp"
#include "lcn/parallel.hpp"

namespace lcn {

Span window_range(std::size_t extent, std::size_t pos, std::size_t size, WindowMode mode) {
    if (size == 0) throw RangeError("window size must be >= 1");
    if (pos >= extent) throw IndexError("position outside axis");
    if (mode == WindowMode::tiled) {
        const std::size_t lo = pos / size * size;
        return {lo, std::min(lo + size, extent)};
    }
    if (size >= extent) return {0, extent};
    const std::size_t half = size / 2;
    const std::size_t lo = std::min(pos > half ? pos - half : 0, extent - size);
    return {lo, lo + size};
}

Span group_range(std::size_t c, std::size_t c_group) {
    if (c_group == 0) throw GroupError("c_group must be >= 1");
    const std::size_t lo = c / c_group * c_group;
    return {lo, lo + c_group};
}

AxisPlan window_plan(std::size_t extent, std::size_t size, WindowMode mode) {
    AxisPlan plan;
    plan.ranges.reserve(extent);
    for (std::size_t i = 0; i < extent; ++i)
        plan.ranges.push_back(window_range(extent, i, size, mode));
    return plan;
}

AxisPlan group_plan(std::size_t channels, std::size_t c_group) {
    AxisPlan plan;
    plan.ranges.reserve(channels);
    for (std::size_t c = 0; c < channels; ++c)
        plan.ranges.push_back(group_range(c, c_group));
    return plan;
}

AxisPlan anchor_plan(const AxisPlan &windows) {
    const auto &win = windows.ranges;
    const std::size_t n = win.size();
    AxisPlan plan;
    plan.ranges.resize(n);
    std::size_t first = 0, last = 0;
    for (std::size_t j = 0; j < n; ++j) {
        while (first < n && win[first].hi <= j)
            ++first;
        while (last < n && win[last].lo <= j)
            ++last;
        plan.ranges[j] = {first, last};
    }
    return plan;
}

Integral3::Integral3(Extent3 dims, std::vector<double> table, std::vector<double> residual)
    : dims_(dims), table_(std::move(table)), residual_(std::move(residual)) {
    const std::size_t expected = (dims.c + 1) * (dims.h + 1) * (dims.w + 1);
    if (table_.size() != expected || residual_.size() != expected)
        throw ShapeError("integral table size does not match dims");
}

namespace {

// (hi, lo) += (b_hi, b_lo), renormalized.
inline void dd_add(double &hi, double &lo, double b_hi, double b_lo) {
    const DoubleDouble r = DoubleDouble {hi, lo} + DoubleDouble {b_hi, b_lo};
    hi = r.hi;
    lo = r.lo;
}

// Compensated sum of the 8 signed corners of a box, hi and lo parts.
struct CornerSum {
    double s = 0.0, e = 0.0;
    void add(const double *hi, const double *lo, std::size_t k, bool negative) {
        double t, err;
        two_sum(s, negative ? -hi[k] : hi[k], t, err);
        s = t;
        e += err + (negative ? -lo[k] : lo[k]);
    }
    double value() const { return s + e; }
    DoubleDouble split() const { return dd_normalize(s, e); }
};

// 2-D integral of each plane into slot c + 1, then a running sum over planes.
template <typename Source>
Integral3 integrate(Extent3 d, const Source &source) {
    const std::size_t sh = d.w + 1, sc = (d.h + 1) * sh;
    std::vector<double> hi((d.c + 1) * sc, 0.0), lo((d.c + 1) * sc, 0.0);

    parallel_for(d.c, [&](std::size_t c) {
        double *plane_hi = hi.data() + (c + 1) * sc;
        double *plane_lo = lo.data() + (c + 1) * sc;
        for (std::size_t h = 0; h < d.h; ++h) {
            const std::size_t above = h * sh, row = (h + 1) * sh;
            double run_hi = 0.0, run_lo = 0.0;
            for (std::size_t w = 0; w < d.w; ++w) {
                const DoubleDouble v = source((c * d.h + h) * d.w + w);
                dd_add(run_hi, run_lo, v.hi, v.lo);
                double cell_hi = plane_hi[above + w + 1], cell_lo = plane_lo[above + w + 1];
                dd_add(cell_hi, cell_lo, run_hi, run_lo);
                plane_hi[row + w + 1] = cell_hi;
                plane_lo[row + w + 1] = cell_lo;
            }
        }
    });
    for (std::size_t c = 1; c < d.c; ++c) {
        const std::size_t prev = c * sc, cur = (c + 1) * sc;
        for (std::size_t i = 0; i < sc; ++i)
            dd_add(hi[cur + i], lo[cur + i], hi[prev + i], lo[prev + i]);
    }
    return Integral3(d, std::move(hi), std::move(lo));
}

template <typename T>
Integral3 integral_of(std::span<const T> src, Extent3 d, bool squared, double shift) {
    if (src.size() != d.count()) throw ShapeError("source size does not match dims");
    // Centered (and squared) source values are formed exactly as pairs.
    auto centered = [&](std::size_t i) {
        DoubleDouble v;
        two_sum(static_cast<double>(src[i]), -shift, v.hi, v.lo);
        return v;
    };
    if (squared)
        return integrate(d, [&](std::size_t i) {
            const DoubleDouble v = centered(i);
            return v * v;
        });
    return integrate(d, centered);
}

} // namespace

template <typename T>
Integral3 build_integral(const Tensor<T> &x, std::size_t sample, bool squared, double shift) {
    const Dims &d = x.dims();
    if (sample >= d.b)
        throw IndexError("sample " + std::to_string(sample) + " out of range for batch "
                + std::to_string(d.b));
    return integral_of<T>(x.sample(sample), {d.c, d.h, d.w}, squared, shift);
}

template Integral3 build_integral<float>(const Tensor4f &, std::size_t, bool, double);
template Integral3 build_integral<double>(const Tensor4 &, std::size_t, bool, double);

Integral3 build_integral(std::span<const double> source, Extent3 dims, bool squared,
        double shift) {
    return integral_of<double>(source, dims, squared, shift);
}

double box_sum(const Integral3 &ii, std::size_t c0, std::size_t c1, std::size_t h0,
        std::size_t h1, std::size_t w0, std::size_t w1) {
    const Extent3 &d = ii.dims();
    if (!(c0 < c1 && c1 <= d.c && h0 < h1 && h1 <= d.h && w0 < w1 && w1 <= d.w))
        throw RangeError("empty, inverted or out-of-bounds box");
    const double *hi = ii.table().data(), *lo = ii.residual().data();
    CornerSum sum;
    sum.add(hi, lo, ii.offset(c1, h1, w1), false);
    sum.add(hi, lo, ii.offset(c1, h0, w1), true);
    sum.add(hi, lo, ii.offset(c1, h1, w0), true);
    sum.add(hi, lo, ii.offset(c1, h0, w0), false);
    sum.add(hi, lo, ii.offset(c0, h1, w1), true);
    sum.add(hi, lo, ii.offset(c0, h0, w1), false);
    sum.add(hi, lo, ii.offset(c0, h1, w0), false);
    sum.add(hi, lo, ii.offset(c0, h0, w0), true);
    return sum.value();
}

SplitSums box_sums_split(const Integral3 &ii, const AxisPlan &c_plan, const AxisPlan &h_plan,
        const AxisPlan &w_plan) {
    const Extent3 &d = ii.dims();
    if (c_plan.ranges.size() != d.c || h_plan.ranges.size() != d.h
            || w_plan.ranges.size() != d.w)
        throw ShapeError("axis plans do not match the integral table");

    const double *hi = ii.table().data(), *lo = ii.residual().data();
    const Span *wr = w_plan.ranges.data();
    SplitSums out {std::vector<double>(d.count()), std::vector<double>(d.count())};

    parallel_for(d.c * d.h, [&](std::size_t row) {
        const std::size_t c = row / d.h, h = row % d.h;
        const Span cr = c_plan.ranges[c], hr = h_plan.ranges[h];
        const std::size_t r00 = ii.offset(cr.lo, hr.lo, 0), r01 = ii.offset(cr.lo, hr.hi, 0);
        const std::size_t r10 = ii.offset(cr.hi, hr.lo, 0), r11 = ii.offset(cr.hi, hr.hi, 0);
        double *dst_hi = out.hi.data() + row * d.w;
        double *dst_lo = out.lo.data() + row * d.w;
        for (std::size_t w = 0; w < d.w; ++w) {
            const std::size_t w0 = wr[w].lo, w1 = wr[w].hi;
            CornerSum sum;
            sum.add(hi, lo, r11 + w1, false);
            sum.add(hi, lo, r10 + w1, true);
            sum.add(hi, lo, r11 + w0, true);
            sum.add(hi, lo, r10 + w0, false);
            sum.add(hi, lo, r01 + w1, true);
            sum.add(hi, lo, r00 + w1, false);
            sum.add(hi, lo, r01 + w0, false);
            sum.add(hi, lo, r00 + w0, true);
            const DoubleDouble v = sum.split();
            dst_hi[w] = v.hi;
            dst_lo[w] = v.lo;
        }
    });
    return out;
}

std::vector<double> box_sums(const Integral3 &ii, const AxisPlan &c_plan,
        const AxisPlan &h_plan, const AxisPlan &w_plan) {
    SplitSums split = box_sums_split(ii, c_plan, h_plan, w_plan);
    for (std::size_t i = 0; i < split.hi.size(); ++i)
        split.hi[i] += split.lo[i];
    return std::move(split.hi);
}

void validate_window(std::size_t channels, std::size_t c_group, std::size_t p, std::size_t q) {
    if (c_group == 0 || c_group > channels || channels % c_group != 0)
        throw GroupError("c_group " + std::to_string(c_group) + " does not divide C = "
                + std::to_string(channels));
    if (p < 1 || q < 1) throw RangeError("window sides must be >= 1");
}

std::vector<double> box_sums_all(const Integral3 &ii, std::size_t c_group, std::size_t p,
        std::size_t q, WindowMode mode, Boundary) {
    const Extent3 &d = ii.dims();
    validate_window(d.c, c_group, p, q);
    return box_sums(ii, group_plan(d.c, c_group), window_plan(d.h, p, mode),
            window_plan(d.w, q, mode));
}

std::vector<std::int64_t> window_counts(Extent3 d, std::size_t c_group, std::size_t p,
        std::size_t q, WindowMode mode) {
    validate_window(d.c, c_group, p, q);
    const AxisPlan hp = window_plan(d.h, p, mode), wp = window_plan(d.w, q, mode);
    std::vector<std::int64_t> n(d.count());
    std::size_t i = 0;
    for (std::size_t c = 0; c < d.c; ++c)
        for (std::size_t h = 0; h < d.h; ++h)
            for (std::size_t w = 0; w < d.w; ++w)
                n[i++] = static_cast<std::int64_t>(
                        c_group * hp.ranges[h].size() * wp.ranges[w].size());
    return n;
}

} // namespace lcn
