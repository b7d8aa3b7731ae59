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

#include "lcn/grad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lcn/oracle.hpp"
#include "lcn/parallel.hpp"

namespace lcn {

namespace {

void check_shapes(const Tensor4 &grad_y, const Tensor4 &x, const AffineParams &params,
        const NormStats &stats) {
    if (!(grad_y.dims() == x.dims()))
        throw ShapeError("grad_y dims differ from x dims");
    validate(params, x.dims().c);
    if (!(stats.mean.dims() == x.dims()) || !(stats.var.dims() == x.dims())
            || !(stats.n_map.dims() == x.dims()))
        throw StateError("saved statistics do not match the input dims");
}

GradBundle zero_bundle(const Dims &d) {
    return {Tensor4(d), std::vector<double>(d.c, 0.0), std::vector<double>(d.c, 0.0)};
}

// grad_gamma / grad_beta, shared by every op.
void affine_grads(GradBundle &g, const Tensor4 &grad_y, const Tensor4 &x, const NormStats &stats,
        double eps) {
    const Dims &d = x.dims();
    for (std::size_t b = 0; b < d.b; ++b)
        for (std::size_t c = 0; c < d.c; ++c) {
            double sum_g = 0.0, sum_gx = 0.0;
            const std::size_t base = x.index(b, c, 0, 0);
            for (std::size_t i = base; i < base + d.plane(); ++i) {
                const double xhat = (x[i] - stats.mean[i]) / std::sqrt(stats.var[i] + eps);
                sum_g += grad_y[i];
                sum_gx += grad_y[i] * xhat;
            }
            g.grad_beta[c] += sum_g;
            g.grad_gamma[c] += sum_gx;
        }
}

// Normwise relative error in the max norm; absolute when the reference is 0.
double normwise(double max_abs_diff, double ref_scale) {
    return ref_scale > 0.0 ? max_abs_diff / ref_scale : max_abs_diff;
}

} // namespace

GradBundle lcn_backward(const Tensor4 &grad_y, const Tensor4 &x, const LcnConfig &cfg,
        const AffineParams &params, const NormStats &stats) {
    const Dims &d = x.dims();
    check_shapes(grad_y, x, params, stats);
    validate(cfg, d);

    const Extent3 ext {d.c, d.h, d.w};
    const std::vector<std::int64_t> counts = window_counts(ext, cfg.c_group, cfg.p, cfg.q, cfg.mode);
    for (std::size_t b = 0; b < d.b; ++b)
        if (!std::equal(counts.begin(), counts.end(),
                    stats.n_map.data().begin() + static_cast<std::ptrdiff_t>(b * ext.count())))
            throw StateError("saved window counts do not match the configuration");

    const AxisPlan cp = group_plan(d.c, cfg.c_group);
    const AxisPlan hp = anchor_plan(window_plan(d.h, cfg.p, cfg.mode));
    const AxisPlan wp = anchor_plan(window_plan(d.w, cfg.q, cfg.mode));

    GradBundle out = zero_bundle(d);
    affine_grads(out, grad_y, x, stats, cfg.eps);

    const std::size_t len = ext.count();
    std::vector<double> direct(len), coef_const(len), coef_lin(len);
    for (std::size_t b = 0; b < d.b; ++b) {
        const std::size_t base = b * len;
        double shift = 0.0;
        for (std::size_t k = 0; k < len; ++k)
            shift += x[base + k];
        shift /= static_cast<double>(len);

        // Per anchor i: dL/dx_j picks up a_i + b_i * (x_j - shift) from every
        // window i containing j.
        parallel_for(d.c, [&](std::size_t c) {
            for (std::size_t k = c * d.plane(); k < (c + 1) * d.plane(); ++k) {
                const std::size_t i = base + k;
                const double n = static_cast<double>(stats.n_map[i]);
                const double inv_std = 1.0 / std::sqrt(stats.var[i] + cfg.eps);
                const double g = grad_y[i] * params.gamma[c];
                const double centered = x[i] - stats.mean[i];
                const double d_mean = -g * inv_std;
                const double d_var = -0.5 * g * centered * inv_std * inv_std * inv_std;
                const double lin = 2.0 * d_var / n;
                direct[k] = g * inv_std;
                coef_lin[k] = lin;
                coef_const[k] = d_mean / n - lin * (stats.mean[i] - shift);
            }
        });

        const std::vector<double> sum_const = box_sums(build_integral(coef_const, ext), cp, hp, wp);
        const std::vector<double> sum_lin = box_sums(build_integral(coef_lin, ext), cp, hp, wp);
        parallel_for(d.c, [&](std::size_t c) {
            for (std::size_t k = c * d.plane(); k < (c + 1) * d.plane(); ++k)
                out.grad_x[base + k]
                        = direct[k] + sum_const[k] + (x[base + k] - shift) * sum_lin[k];
        });
    }
    return out;
}

GradBundle reference_backward(RefOp op, const Tensor4 &grad_y, const Tensor4 &x,
        const RefConfig &config, const AffineParams &params, const NormStats &stats) {
    const Dims &d = x.dims();
    check_shapes(grad_y, x, params, stats);
    if (!(config.eps > 0.0)) throw RangeError("eps must be > 0");

    std::size_t groups = 1;
    switch (op) {
    case RefOp::gn: groups = config.groups; break;
    case RefOp::in: groups = d.c; break;
    case RefOp::ln: groups = 1; break;
    case RefOp::bn: break;
    }
    if (op != RefOp::bn && (groups == 0 || d.c % groups != 0))
        throw GroupError("groups do not divide C");

    const std::int64_t pool = op == RefOp::bn
            ? static_cast<std::int64_t>(d.b * d.plane())
            : static_cast<std::int64_t>(d.c / groups * d.plane());
    for (std::int64_t n : stats.n_map.data())
        if (n != pool) throw StateError("saved pool sizes do not match the configuration");

    GradBundle out = zero_bundle(d);
    affine_grads(out, grad_y, x, stats, config.eps);

    // One pool: dx = s * (g - mean(g) - xhat * mean(g * xhat)).
    auto pool_backward = [&](auto visit) {
        double sum_g = 0.0, sum_gx = 0.0;
        visit([&](std::size_t i, std::size_t c) {
            const double xhat = (x[i] - stats.mean[i]) / std::sqrt(stats.var[i] + config.eps);
            const double g = grad_y[i] * params.gamma[c];
            sum_g += g;
            sum_gx += g * xhat;
        });
        const double m = static_cast<double>(pool);
        visit([&](std::size_t i, std::size_t c) {
            const double inv_std = 1.0 / std::sqrt(stats.var[i] + config.eps);
            const double xhat = (x[i] - stats.mean[i]) * inv_std;
            const double g = grad_y[i] * params.gamma[c];
            out.grad_x[i] = inv_std * (g - sum_g / m - xhat * sum_gx / m);
        });
    };

    if (op == RefOp::bn && !config.training) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const std::size_t c = (i / d.plane()) % d.c;
            out.grad_x[i] = grad_y[i] * params.gamma[c] / std::sqrt(stats.var[i] + config.eps);
        }
    } else if (op == RefOp::bn) {
        parallel_for(d.c, [&](std::size_t c) {
            pool_backward([&](auto &&f) {
                for (std::size_t b = 0; b < d.b; ++b) {
                    const std::size_t begin = x.index(b, c, 0, 0);
                    for (std::size_t i = begin; i < begin + d.plane(); ++i)
                        f(i, c);
                }
            });
        });
    } else {
        const std::size_t per_group = d.c / groups;
        parallel_for(d.b * groups, [&](std::size_t job) {
            const std::size_t b = job / groups, g = job % groups;
            pool_backward([&](auto &&f) {
                for (std::size_t c = g * per_group; c < (g + 1) * per_group; ++c) {
                    const std::size_t begin = x.index(b, c, 0, 0);
                    for (std::size_t i = begin; i < begin + d.plane(); ++i)
                        f(i, c);
                }
            });
        });
    }
    return out;
}

const char *op_name(NormOp op) {
    switch (op) {
    case NormOp::lcn: return "lcn";
    case NormOp::gn: return "gn";
    case NormOp::in: return "in";
    case NormOp::ln: return "ln";
    case NormOp::bn: return "bn";
    }
    return "?";
}

NormResult<double> forward(const OpConfig &config, const Tensor4 &x, const AffineParams &params) {
    const RefConfig &r = config.ref;
    switch (config.op) {
    case NormOp::lcn: return lcn_forward(x, config.lcn, params);
    case NormOp::gn: return gn_forward(x, r.groups, r.eps, params);
    case NormOp::in: return in_forward(x, r.eps, params);
    case NormOp::ln: return ln_forward(x, r.eps, params);
    case NormOp::bn: {
        if (!r.training)
            throw StateError("the checkers differentiate training-mode batch norm only");
        return bn_forward(x, r.eps, params, nullptr, true);
    }
    }
    throw StateError("unknown op");
}

GradBundle backward(const OpConfig &config, const Tensor4 &grad_y, const Tensor4 &x,
        const AffineParams &params, const NormStats &stats) {
    switch (config.op) {
    case NormOp::lcn: return lcn_backward(grad_y, x, config.lcn, params, stats);
    case NormOp::gn: return reference_backward(RefOp::gn, grad_y, x, config.ref, params, stats);
    case NormOp::in: return reference_backward(RefOp::in, grad_y, x, config.ref, params, stats);
    case NormOp::ln: return reference_backward(RefOp::ln, grad_y, x, config.ref, params, stats);
    case NormOp::bn: return reference_backward(RefOp::bn, grad_y, x, config.ref, params, stats);
    }
    throw StateError("unknown op");
}

double FdReport::max_rel() const {
    return std::max({max_rel_x, max_rel_gamma, max_rel_beta});
}

double FdReport::max_abs() const {
    return std::max({max_abs_x, max_abs_gamma, max_abs_beta});
}

namespace {

double weighted_loss(const Tensor4 &weights, const Tensor4 &y) {
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        loss += weights[i] * y[i];
    return loss;
}

struct Comparison {
    double max_abs = 0.0, max_rel = 0.0;
    std::size_t worst = 0;
};

Comparison compare(const std::vector<double> &analytic, const std::vector<double> &numeric) {
    Comparison out;
    double scale = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double diff = std::abs(analytic[i] - numeric[i]);
        if (diff > out.max_abs) {
            out.max_abs = diff;
            out.worst = i;
        }
        scale = std::max(scale, std::abs(numeric[i]));
    }
    out.max_rel = normwise(out.max_abs, scale);
    return out;
}

void reject_degenerate(const NormStats &stats) {
    const double lowest = *std::min_element(stats.var.data().begin(), stats.var.data().end());
    if (lowest < kDegenerateVariance)
        throw DegenerateInputError("pooled variance " + std::to_string(lowest)
                + " is too close to zero for a finite-difference check");
}

// Two-pass direct evaluation of the same map, for the adjoint check.
Tensor4 reference_forward(const OpConfig &config, const Tensor4 &x, const AffineParams &params) {
    oracle::FamilyConfig fc;
    fc.groups = config.ref.groups;
    fc.eps = config.ref.eps;
    fc.training = true;
    switch (config.op) {
    case NormOp::lcn: return oracle::lcn_naive(x, config.lcn, params).y;
    case NormOp::gn: return oracle::family_naive(oracle::Family::gn, x, fc, params);
    case NormOp::in: return oracle::family_naive(oracle::Family::in, x, fc, params);
    case NormOp::ln: return oracle::family_naive(oracle::Family::ln, x, fc, params);
    case NormOp::bn: return oracle::family_naive(oracle::Family::bn, x, fc, params);
    }
    throw StateError("unknown op");
}

} // namespace

FdReport finite_diff_check(const OpConfig &config, const Tensor4 &x, const AffineParams &params,
        double step, std::uint64_t seed) {
    if (!(step > 0.0)) throw RangeError("step must be > 0");
    const NormResult<double> base = forward(config, x, params);
    reject_degenerate(base.stats);

    const Tensor4 weights = fill_random(x.dims(), seed, Distribution::normal01);
    const GradBundle analytic = backward(config, weights, x, params, base.stats);

    auto loss_at = [&](const Tensor4 &xx, const AffineParams &pp) {
        return weighted_loss(weights, forward(config, xx, pp).y);
    };

    std::vector<double> num_x(x.size());
    Tensor4 probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = probe[i];
        probe[i] = keep + step;
        const double up = loss_at(probe, params);
        probe[i] = keep - step;
        const double down = loss_at(probe, params);
        probe[i] = keep;
        num_x[i] = (up - down) / (2.0 * step);
    }

    const std::size_t channels = x.dims().c;
    std::vector<double> num_gamma(channels), num_beta(channels);
    AffineParams pp = params;
    for (std::size_t c = 0; c < channels; ++c) {
        for (auto [vec, num] : {std::pair {&pp.gamma, &num_gamma}, std::pair {&pp.beta, &num_beta}}) {
            const double keep = (*vec)[c];
            (*vec)[c] = keep + step;
            const double up = loss_at(x, pp);
            (*vec)[c] = keep - step;
            const double down = loss_at(x, pp);
            (*vec)[c] = keep;
            (*num)[c] = (up - down) / (2.0 * step);
        }
    }

    const std::vector<double> ana_x(analytic.grad_x.data().begin(), analytic.grad_x.data().end());
    const Comparison cx = compare(ana_x, num_x);
    const Comparison cg = compare(analytic.grad_gamma, num_gamma);
    const Comparison cb = compare(analytic.grad_beta, num_beta);

    FdReport report;
    report.max_abs_x = cx.max_abs;
    report.max_rel_x = cx.max_rel;
    report.worst_index = cx.worst;
    report.max_abs_gamma = cg.max_abs;
    report.max_rel_gamma = cg.max_rel;
    report.max_abs_beta = cb.max_abs;
    report.max_rel_beta = cb.max_rel;
    return report;
}

AdjointReport adjoint_check(const OpConfig &config, const Tensor4 &x,
        const AffineParams &params, std::uint64_t seed, double step) {
    if (!(step > 0.0)) throw RangeError("step must be > 0");
    const NormResult<double> base = forward(config, x, params);
    reject_degenerate(base.stats);
    const double eps = config.op == NormOp::lcn ? config.lcn.eps : config.ref.eps;
    const double sigma_min = std::sqrt(
            *std::min_element(base.stats.var.data().begin(), base.stats.var.data().end()) + eps);
    const double t = step * sigma_min;

    Rng rng(seed);
    Tensor4 u(x.dims()), v(x.dims());
    for (double &e : u.data())
        e = rng.normal();
    for (double &e : v.data())
        e = rng.normal();

    // <v, (f(x + t u) - f(x - t u)) / 2t>
    auto directional = [&](double t) {
        Tensor4 plus = x, minus = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            plus[i] += t * u[i];
            minus[i] -= t * u[i];
        }
        const Tensor4 yp = reference_forward(config, plus, params);
        const Tensor4 ym = reference_forward(config, minus, params);
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            acc += v[i] * (yp[i] - ym[i]);
        return acc / (2.0 * t);
    };

    AdjointReport report;
    // Two rounds of Richardson extrapolation on steps t, t/2, t/4: O(t^6).
    const double d1 = directional(t), d2 = directional(t / 2.0), d4 = directional(t / 4.0);
    const double r1 = (4.0 * d2 - d1) / 3.0, r2 = (4.0 * d4 - d2) / 3.0;
    report.forward_side = (16.0 * r2 - r1) / 15.0;
    const GradBundle g = backward(config, v, x, params, base.stats);
    double norm_u = 0.0, norm_jtv = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        report.backward_side += u[i] * g.grad_x[i];
        norm_u += u[i] * u[i];
        norm_jtv += g.grad_x[i] * g.grad_x[i];
    }
    // Relative to the Cauchy-Schwarz bound |<u, J^T v>| <= |u| |J^T v|.
    const double scale = std::max({std::abs(report.forward_side), std::abs(report.backward_side),
            std::sqrt(norm_u * norm_jtv)});
    report.rel_error = normwise(std::abs(report.forward_side - report.backward_side), scale);
    return report;
}

Tensor4 ramp_input(Dims dims, std::uint64_t seed) {
    Tensor4 x = fill_random(dims, seed, Distribution::normal01);
    // Distinct slopes per axis keep even two-element pools well spread.
    for (std::size_t b = 0; b < dims.b; ++b)
        for (std::size_t c = 0; c < dims.c; ++c)
            for (std::size_t h = 0; h < dims.h; ++h)
                for (std::size_t w = 0; w < dims.w; ++w)
                    x(b, c, h, w) = 0.02 * x(b, c, h, w) + 0.7 * static_cast<double>(c)
                            + 0.4 * static_cast<double>(h) + 0.25 * static_cast<double>(w);
    return x;
}

} // namespace lcn
