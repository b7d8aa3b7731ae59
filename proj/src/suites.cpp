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

#include "lcn/suites.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "lcn/grad.hpp"
#include "lcn/oracle.hpp"

namespace lcn {

namespace {

constexpr std::array<std::size_t, 4> kGroupChoices {1, 2, 4, 8};
constexpr std::array<std::size_t, 5> kWindowChoices {1, 3, 5, 7, 16};

template <typename Array>
auto pick(Rng &rng, const Array &options) {
    return options[rng.below(options.size())];
}

std::size_t between(Rng &rng, std::size_t lo, std::size_t hi) {
    return lo + rng.below(hi - lo + 1);
}

AffineParams random_affine(Rng &rng, std::size_t channels) {
    AffineParams params = AffineParams::identity(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        params.gamma[c] = 0.5 + rng.uniform();
        params.beta[c] = rng.normal();
    }
    return params;
}

std::string describe(const Dims &d) {
    std::ostringstream os;
    os << d.b << "x" << d.c << "x" << d.h << "x" << d.w;
    return os.str();
}

std::string describe(const LcnConfig &cfg) {
    std::ostringstream os;
    os << "c_group=" << cfg.c_group << " window=" << cfg.p << "x" << cfg.q << " mode="
       << (cfg.mode == WindowMode::sliding ? "sliding" : "tiled") << " eps=" << cfg.eps;
    return os.str();
}

// Records one trial's error against the suite tolerance.
void record(SuiteResult &result, double error, std::uint64_t trial_seed, const std::string &what) {
    ++result.trials;
    if (!(error <= result.worst_error)) {
        result.worst_error = std::isnan(error) ? INFINITY : error;
        result.worst_seed = trial_seed;
        result.worst_case = what;
    }
    if (!(error <= result.tolerance)) {
        if (result.failures == 0) {
            result.failing_seed = trial_seed;
            result.failing_case = what;
        }
        ++result.failures;
    }
}

SuiteResult make_result(const char *name, double tolerance) {
    SuiteResult r;
    r.name = name;
    r.tolerance = tolerance;
    return r;
}

} // namespace

double max_rel_error(const Tensor4 &a, const Tensor4 &b) {
    if (!(a.dims() == b.dims())) return INFINITY;
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

Tensor4 crop_width(const Tensor4 &x, std::size_t start, std::size_t width) {
    const Dims &d = x.dims();
    if (width == 0 || start + width > d.w) throw RangeError("crop outside the tensor");
    Tensor4 out(Dims {d.b, d.c, d.h, width});
    for (std::size_t b = 0; b < d.b; ++b)
        for (std::size_t c = 0; c < d.c; ++c)
            for (std::size_t h = 0; h < d.h; ++h)
                for (std::size_t w = 0; w < width; ++w)
                    out(b, c, h, w) = x(b, c, h, start + w);
    return out;
}

SuiteResult run_lcn_oracle_suite(std::size_t trials, std::uint64_t seed) {
    SuiteResult result = make_result("oracle/lcn", kOracleTolerance);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + t;
        Rng rng(trial_seed);
        LcnConfig cfg;
        cfg.c_group = pick(rng, kGroupChoices);
        const Dims d {between(rng, 1, 2), cfg.c_group * between(rng, 1, 8 / cfg.c_group),
                between(rng, 1, 16), between(rng, 1, 16)};
        cfg.p = pick(rng, kWindowChoices);
        cfg.q = pick(rng, kWindowChoices);
        cfg.mode = rng.below(2) ? WindowMode::tiled : WindowMode::sliding;
        const AffineParams params = random_affine(rng, d.c);
        const Tensor4 x = fill_random(d, rng.next(), Distribution::normal01);

        const auto fast = lcn_forward(x, cfg, params);
        const auto slow = oracle::lcn_naive(x, cfg, params);
        double error = max_rel_error(fast.y, slow.y);
        if (!(fast.stats.n_map == slow.stats.n_map)) error = INFINITY;
        record(result, error, trial_seed, describe(d) + " " + describe(cfg));
    }
    return result;
}

SuiteResult run_family_oracle_suite(std::size_t trials, std::uint64_t seed) {
    SuiteResult result = make_result("oracle/family", kOracleTolerance);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + t;
        Rng rng(trial_seed);
        const std::size_t groups = pick(rng, kGroupChoices);
        const Dims d {between(rng, 1, 2), groups * between(rng, 1, 8 / groups),
                between(rng, 1, 16), between(rng, 1, 16)};
        const AffineParams params = random_affine(rng, d.c);
        const Tensor4 x = fill_random(d, rng.next(), Distribution::normal01);
        const double eps = rng.below(2) ? 1e-5 : 1e-3;

        oracle::FamilyConfig fc;
        fc.groups = groups;
        fc.eps = eps;
        fc.lrn.window = 3 + 2 * rng.below(4);
        fc.lrn.sigma_g = 0.5 + 2.0 * rng.uniform();

        const std::string what = describe(d) + " groups=" + std::to_string(groups);
        double worst = 0.0;
        auto check = [&](oracle::Family op, const Tensor4 &fast) {
            worst = std::max(worst, max_rel_error(fast, oracle::family_naive(op, x, fc, params)));
        };
        check(oracle::Family::gn, gn_forward(x, groups, eps, params).y);
        check(oracle::Family::in, in_forward(x, eps, params).y);
        check(oracle::Family::ln, ln_forward(x, eps, params).y);
        check(oracle::Family::bn, bn_forward(x, eps, params, nullptr, true).y);

        RunningStats running;
        running.mean.resize(d.c);
        running.var.resize(d.c);
        for (std::size_t c = 0; c < d.c; ++c) {
            running.mean[c] = rng.normal();
            running.var[c] = 0.5 + rng.uniform();
        }
        fc.training = false;
        fc.running = &running;
        check(oracle::Family::bn, bn_forward(x, eps, params, &running, false).y);
        check(oracle::Family::lrn, lrn_forward(x, fc.lrn));
        record(result, worst, trial_seed, what);
    }
    return result;
}

SuiteResult run_reduction_suite(std::size_t trials, std::uint64_t seed) {
    SuiteResult result = make_result("reductions", kReductionTolerance);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + t;
        Rng rng(trial_seed);
        const std::size_t groups = pick(rng, kGroupChoices);
        const Dims d {between(rng, 1, 2), groups * between(rng, 1, 8 / groups),
                between(rng, 1, 16), between(rng, 1, 16)};
        const double eps = rng.below(2) ? 1e-5 : 1e-3;
        const AffineParams params = random_affine(rng, d.c);
        const Tensor4 x = fill_random(d, rng.next(), Distribution::normal01);

        LcnConfig cfg;
        cfg.mode = WindowMode::tiled;
        cfg.p = d.h + rng.below(8);
        cfg.q = d.w + rng.below(8);
        cfg.eps = eps;

        double worst = 0.0;
        cfg.c_group = d.c / groups;
        worst = std::max(worst,
                max_rel_error(lcn_forward(x, cfg, params).y, gn_forward(x, groups, eps, params).y));
        cfg.c_group = d.c;
        worst = std::max(worst,
                max_rel_error(lcn_forward(x, cfg, params).y, ln_forward(x, eps, params).y));
        cfg.c_group = 1;
        worst = std::max(worst,
                max_rel_error(lcn_forward(x, cfg, params).y, in_forward(x, eps, params).y));
        record(result, worst, trial_seed, describe(d) + " G=" + std::to_string(groups));
    }
    return result;
}

namespace {

// Random differentiable configuration for `op`, dims <= 2x4x8x8.
OpConfig random_op_config(Rng &rng, NormOp op, Dims &dims) {
    OpConfig config;
    config.op = op;
    const std::size_t c_group = std::array<std::size_t, 3> {1, 2, 4}[rng.below(3)];
    dims = {between(rng, 1, 2), c_group * between(rng, 1, 4 / c_group), between(rng, 2, 8),
            between(rng, 2, 8)};
    const double eps = rng.below(2) ? 1e-5 : 1e-3;
    config.lcn.c_group = c_group;
    config.lcn.p = between(rng, 2, 8);
    config.lcn.q = between(rng, 2, 8);
    config.lcn.mode = rng.below(2) ? WindowMode::tiled : WindowMode::sliding;
    // A lone trailing column tile with one channel can be a single element.
    if (config.lcn.mode == WindowMode::tiled && c_group == 1)
        while (config.lcn.q < dims.w && dims.w % config.lcn.q == 1) ++config.lcn.q;
    config.lcn.eps = eps;
    config.ref.groups = dims.c / c_group;
    config.ref.eps = eps;
    config.ref.training = true;
    return config;
}

std::string describe(const OpConfig &config, const Dims &d) {
    std::string s = std::string(op_name(config.op)) + " " + describe(d);
    if (config.op == NormOp::lcn) return s + " " + describe(config.lcn);
    return s + " groups=" + std::to_string(config.ref.groups)
            + " eps=" + std::to_string(config.ref.eps);
}

constexpr std::array<NormOp, 5> kAllOps {NormOp::lcn, NormOp::gn, NormOp::in, NormOp::ln,
        NormOp::bn};

} // namespace

SuiteResult run_gradient_suite(std::size_t trials, std::uint64_t seed) {
    SuiteResult result = make_result("gradients", kGradientTolerance);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + t;
        Rng rng(trial_seed);
        for (NormOp op : kAllOps) {
            Dims d;
            const OpConfig config = random_op_config(rng, op, d);
            const Tensor4 x = ramp_input(d, rng.next());
            const AffineParams params = random_affine(rng, d.c);
            try {
                const FdReport report = finite_diff_check(config, x, params, kGradientStep,
                        rng.next());
                record(result, report.max_rel(), trial_seed, describe(config, d));
            } catch (const DegenerateInputError &) { ++result.rejected; }
        }
    }
    return result;
}

SuiteResult run_adjoint_suite(std::size_t trials, std::uint64_t seed) {
    SuiteResult result = make_result("adjoint", kAdjointTolerance);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + t;
        Rng rng(trial_seed);
        Dims d;
        // Every other trial is lcn; the rest cycle through the reference ops.
        const NormOp op = t % 2 == 0 ? NormOp::lcn : kAllOps[1 + (t / 2) % 4];
        const OpConfig config = random_op_config(rng, op, d);
        const Tensor4 x = ramp_input(d, rng.next());
        const AffineParams params = random_affine(rng, d.c);
        try {
            const AdjointReport report = adjoint_check(config, x, params, rng.next());
            record(result, report.rel_error, trial_seed, describe(config, d));
        } catch (const DegenerateInputError &) { ++result.rejected; }
    }
    return result;
}

SuiteResult run_shift_suite(std::size_t trials, std::uint64_t seed) {
    SuiteResult result = make_result("shift", kShiftTolerance);
    const std::size_t k = kShiftPixels;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + t;
        Rng rng(trial_seed);
        LcnConfig cfg;
        cfg.c_group = pick(rng, kGroupChoices);
        cfg.mode = WindowMode::sliding;
        cfg.p = 1 + 2 * rng.below(6);
        cfg.q = 1 + 2 * rng.below(8);
        const Dims d {between(rng, 1, 2), cfg.c_group * between(rng, 1, 8 / cfg.c_group),
                between(rng, 4, 16), between(rng, 48, 64)};
        const Tensor4 x = fill_random(d, rng.next(), Distribution::normal01);
        const AffineParams params = AffineParams::identity(d.c);

        const std::size_t crop = d.w - k;
        const Tensor4 left = crop_width(x, 0, crop), right = crop_width(x, k, crop);
        const Tensor4 y_left = lcn_forward(left, cfg, params).y;
        const Tensor4 y_right = lcn_forward(right, cfg, params).y;

        // Original column u sits at u in the left crop and u - k in the right.
        double worst = 0.0;
        std::size_t compared = 0;
        for (std::size_t u = k; u < crop; ++u) {
            const Span in_left = window_range(crop, u, cfg.q, cfg.mode);
            const Span in_right = window_range(crop, u - k, cfg.q, cfg.mode);
            if (in_left.lo != in_right.lo + k) continue;
            for (std::size_t b = 0; b < d.b; ++b)
                for (std::size_t c = 0; c < d.c; ++c)
                    for (std::size_t h = 0; h < d.h; ++h) {
                        worst = std::max(worst,
                                std::abs(y_left(b, c, h, u) - y_right(b, c, h, u - k)));
                        ++compared;
                    }
        }
        if (compared == 0) worst = INFINITY;
        record(result, worst, trial_seed, describe(d) + " " + describe(cfg));
    }
    return result;
}

} // namespace lcn
