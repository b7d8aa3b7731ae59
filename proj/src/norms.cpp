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

#include "lcn/norms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "double_double.hpp"
#include "lcn/parallel.hpp"

namespace lcn {

namespace {

template <typename T>
void require_finite(const Tensor<T> &x) {
    if (!all_finite(x)) throw DataError("input contains NaN or Inf");
}

NormStats make_stats(const Dims &d) {
    return {Tensor4(d), Tensor4(d), Tensor<std::int64_t>(d)};
}

// Normalizes the elements listed by `visit` with one (mean, var) pair.
// visit(f) must call f(flat_index) for every member of the pool, in a fixed
// order.
template <typename T, typename Visit>
void normalize_pool(const Tensor<T> &x, Tensor<T> &y, NormStats &stats, double eps,
        const AffineParams &params, Visit visit) {
    const Dims &d = x.dims();
    double sum = 0.0;
    std::int64_t n = 0;
    visit([&](std::size_t i) {
        sum += static_cast<double>(x[i]);
        ++n;
    });
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    visit([&](std::size_t i) {
        const double dv = static_cast<double>(x[i]) - mean;
        ss += dv * dv;
    });
    const double var = ss / static_cast<double>(n);
    const double inv_std = 1.0 / std::sqrt(var + eps);
    visit([&](std::size_t i) {
        const std::size_t c = (i / d.plane()) % d.c;
        const double xhat = (static_cast<double>(x[i]) - mean) * inv_std;
        y[i] = static_cast<T>(params.gamma[c] * xhat + params.beta[c]);
        stats.mean[i] = mean;
        stats.var[i] = var;
        stats.n_map[i] = n;
    });
}

} // namespace

void validate(const LcnConfig &cfg, const Dims &dims) {
    validate_window(dims.c, cfg.c_group, cfg.p, cfg.q);
    if (!(cfg.eps > 0.0)) throw RangeError("eps must be > 0");
}

void validate(const AffineParams &params, std::size_t channels) {
    if (params.gamma.size() != channels || params.beta.size() != channels)
        throw ShapeError("affine params have length " + std::to_string(params.gamma.size())
                + "/" + std::to_string(params.beta.size()) + ", expected "
                + std::to_string(channels));
    for (std::size_t c = 0; c < channels; ++c)
        if (!std::isfinite(params.gamma[c]) || !std::isfinite(params.beta[c]))
            throw DataError("affine params must be finite");
}

template <typename T>
NormResult<T> lcn_forward(const Tensor<T> &x, const LcnConfig &cfg, const AffineParams &params) {
    const Dims &d = x.dims();
    validate(cfg, d);
    validate(params, d.c);
    require_finite(x);

    const Extent3 ext {d.c, d.h, d.w};
    const AxisPlan cp = group_plan(d.c, cfg.c_group);
    const AxisPlan hp = window_plan(d.h, cfg.p, cfg.mode);
    const AxisPlan wp = window_plan(d.w, cfg.q, cfg.mode);
    const std::vector<std::int64_t> counts = window_counts(ext, cfg.c_group, cfg.p, cfg.q, cfg.mode);

    NormResult<T> out {Tensor<T>(d), make_stats(d)};
    for (std::size_t b = 0; b < d.b; ++b) {
        const auto xs = x.sample(b);
        double total = 0.0;
        for (T v : xs)
            total += static_cast<double>(v);
        const double shift = total / static_cast<double>(xs.size());

        const SplitSums sums = box_sums_split(build_integral(x, b, false, shift), cp, hp, wp);
        const SplitSums sq_sums = box_sums_split(build_integral(x, b, true, shift), cp, hp, wp);

        // mean = S / n and var = Q / n - mean^2 in double-double: Q / n and
        // mean^2 are close whenever the window is nearly flat.
        const std::size_t base = b * ext.count();
        auto ys = out.y.sample(b);
        parallel_for(d.c, [&](std::size_t c) {
            const double gamma = params.gamma[c], beta = params.beta[c];
            for (std::size_t k = c * d.plane(); k < (c + 1) * d.plane(); ++k) {
                const double n = static_cast<double>(counts[k]);
                const DoubleDouble mean = DoubleDouble {sums.hi[k], sums.lo[k]} / n;
                const DoubleDouble mean_sq = DoubleDouble {sq_sums.hi[k], sq_sums.lo[k]} / n;
                const double var = std::max(0.0, (mean_sq - mean * mean).value());
                DoubleDouble centered;
                two_sum(static_cast<double>(xs[k]), -shift, centered.hi, centered.lo);
                const double xhat = (centered - mean).value() / std::sqrt(var + cfg.eps);
                ys[k] = static_cast<T>(gamma * xhat + beta);
                out.stats.mean[base + k] = (DoubleDouble {shift, 0.0} + mean).value();
                out.stats.var[base + k] = var;
                out.stats.n_map[base + k] = counts[k];
            }
        });
    }
    return out;
}

template <typename T>
NormResult<T> gn_forward(const Tensor<T> &x, std::size_t groups, double eps,
        const AffineParams &params) {
    const Dims &d = x.dims();
    if (groups == 0 || d.c % groups != 0)
        throw GroupError(std::to_string(groups) + " groups do not divide C = "
                + std::to_string(d.c));
    if (!(eps > 0.0)) throw RangeError("eps must be > 0");
    validate(params, d.c);
    require_finite(x);

    const std::size_t per_group = d.c / groups;
    NormResult<T> out {Tensor<T>(d), make_stats(d)};
    parallel_for(d.b * groups, [&](std::size_t job) {
        const std::size_t b = job / groups, g = job % groups;
        const std::size_t begin = x.index(b, g * per_group, 0, 0);
        const std::size_t end = begin + per_group * d.plane();
        normalize_pool(x, out.y, out.stats, eps, params, [&](auto &&f) {
            for (std::size_t i = begin; i < end; ++i)
                f(i);
        });
    });
    return out;
}

template <typename T>
NormResult<T> in_forward(const Tensor<T> &x, double eps, const AffineParams &params) {
    return gn_forward(x, x.dims().c, eps, params);
}

template <typename T>
NormResult<T> ln_forward(const Tensor<T> &x, double eps, const AffineParams &params) {
    return gn_forward(x, 1, eps, params);
}

template <typename T>
NormResult<T> bn_forward(const Tensor<T> &x, double eps, const AffineParams &params,
        RunningStats *running, bool training) {
    const Dims &d = x.dims();
    if (!(eps > 0.0)) throw RangeError("eps must be > 0");
    validate(params, d.c);
    require_finite(x);

    NormResult<T> out {Tensor<T>(d), make_stats(d)};
    if (training) {
        parallel_for(d.c, [&](std::size_t c) {
            normalize_pool(x, out.y, out.stats, eps, params, [&](auto &&f) {
                for (std::size_t b = 0; b < d.b; ++b) {
                    const std::size_t begin = x.index(b, c, 0, 0);
                    for (std::size_t i = begin; i < begin + d.plane(); ++i)
                        f(i);
                }
            });
        });
        if (running) {
            if (running->mean.empty() && running->var.empty()) {
                running->mean.assign(d.c, 0.0);
                running->var.assign(d.c, 1.0);
            }
            if (running->mean.size() != d.c || running->var.size() != d.c)
                throw ShapeError("running stats length does not match C");
            const double m = running->momentum;
            for (std::size_t c = 0; c < d.c; ++c) {
                const std::size_t i = x.index(0, c, 0, 0);
                running->mean[c] = (1.0 - m) * running->mean[c] + m * out.stats.mean[i];
                running->var[c] = (1.0 - m) * running->var[c] + m * out.stats.var[i];
            }
        }
        return out;
    }

    if (!running || running->mean.size() != d.c || running->var.size() != d.c)
        throw StateError("evaluation mode needs running statistics for every channel");
    const auto n = static_cast<std::int64_t>(d.b * d.plane());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t c = (i / d.plane()) % d.c;
        const double mean = running->mean[c], var = std::max(0.0, running->var[c]);
        const double xhat = (static_cast<double>(x[i]) - mean) / std::sqrt(var + eps);
        out.y[i] = static_cast<T>(params.gamma[c] * xhat + params.beta[c]);
        out.stats.mean[i] = mean;
        out.stats.var[i] = var;
        out.stats.n_map[i] = n;
    }
    return out;
}

std::vector<double> gaussian_taps(std::size_t window, double sigma) {
    if (window < 3 || window % 2 == 0)
        throw RangeError("LRN window must be odd and >= 3, got " + std::to_string(window));
    if (!(sigma > 0.0)) throw RangeError("LRN sigma must be > 0");
    const long r = static_cast<long>(window / 2);
    std::vector<double> taps(window);
    double total = 0.0;
    for (long k = -r; k <= r; ++k) {
        taps[k + r] = std::exp(-0.5 * double(k * k) / (sigma * sigma));
        total += taps[k + r];
    }
    for (double &t : taps)
        t /= total;
    return taps;
}

template <typename T>
Tensor<T> lrn_forward(const Tensor<T> &x, const LrnConfig &cfg) {
    const std::vector<double> taps = gaussian_taps(cfg.window, cfg.sigma_g);
    require_finite(x);
    const Dims &d = x.dims();
    const long r = static_cast<long>(cfg.window / 2);
    const long H = static_cast<long>(d.h), W = static_cast<long>(d.w);

    // Everything is taken relative to the anchor value, so a flat
    // neighbourhood gives an exactly zero numerator and spread.
    Tensor<T> y(d);
    std::vector<double> numer(d.c * d.plane()), spread(d.plane());
    for (std::size_t b = 0; b < d.b; ++b) {
        parallel_for(d.h, [&](std::size_t hu) {
            const long h = static_cast<long>(hu);
            for (long w = 0; w < W; ++w) {
                double pooled = 0.0;
                for (std::size_t c = 0; c < d.c; ++c) {
                    const double anchor = x(b, c, hu, w);
                    double offset = 0.0;
                    for (long p = -r; p <= r; ++p) {
                        const std::size_t hh = std::clamp(h + p, 0L, H - 1);
                        for (long q = -r; q <= r; ++q)
                            offset += taps[p + r] * taps[q + r]
                                    * (x(b, c, hh, std::clamp(w + q, 0L, W - 1)) - anchor);
                    }
                    double var = 0.0;
                    for (long p = -r; p <= r; ++p) {
                        const std::size_t hh = std::clamp(h + p, 0L, H - 1);
                        for (long q = -r; q <= r; ++q) {
                            const double dv = x(b, c, hh, std::clamp(w + q, 0L, W - 1)) - anchor
                                    - offset;
                            var += taps[p + r] * taps[q + r] * dv * dv;
                        }
                    }
                    numer[(c * d.h + hu) * d.w + w] = -offset;
                    pooled += var;
                }
                spread[hu * d.w + w] = std::sqrt(pooled / static_cast<double>(d.c));
            }
        });
        double floor_c = 0.0;
        for (double s : spread)
            floor_c += s;
        floor_c /= static_cast<double>(d.plane());

        for (std::size_t c = 0; c < d.c; ++c)
            for (std::size_t k = 0; k < d.plane(); ++k) {
                const double denom = std::max(floor_c, spread[k]);
                y(b, c, k / d.w, k % d.w)
                        = denom > 0.0 ? static_cast<T>(numer[c * d.plane() + k] / denom) : T(0);
            }
    }
    return y;
}

template <typename T>
Tensor<T> affine(const Tensor<T> &xhat, const AffineParams &params) {
    const Dims &d = xhat.dims();
    validate(params, d.c);
    Tensor<T> y(d);
    for (std::size_t i = 0; i < xhat.size(); ++i) {
        const std::size_t c = (i / d.plane()) % d.c;
        y[i] = static_cast<T>(params.gamma[c] * static_cast<double>(xhat[i]) + params.beta[c]);
    }
    return y;
}

#define LCN_INSTANTIATE(T) \
    template NormResult<T> lcn_forward(const Tensor<T> &, const LcnConfig &, const AffineParams &); \
    template NormResult<T> gn_forward(const Tensor<T> &, std::size_t, double, const AffineParams &); \
    template NormResult<T> in_forward(const Tensor<T> &, double, const AffineParams &); \
    template NormResult<T> ln_forward(const Tensor<T> &, double, const AffineParams &); \
    template NormResult<T> bn_forward( \
            const Tensor<T> &, double, const AffineParams &, RunningStats *, bool); \
    template Tensor<T> lrn_forward(const Tensor<T> &, const LrnConfig &); \
    template Tensor<T> affine(const Tensor<T> &, const AffineParams &);

LCN_INSTANTIATE(float)
LCN_INSTANTIATE(double)

#undef LCN_INSTANTIATE

} // namespace lcn
