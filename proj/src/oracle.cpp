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

#include "lcn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lcn::oracle {

NormResult<double> lcn_naive(const Tensor4 &x, const LcnConfig &cfg, const AffineParams &params) {
    const Dims &d = x.dims();
    validate(cfg, d);
    validate(params, d.c);
    if (!all_finite(x)) throw DataError("input contains NaN or Inf");

    NormResult<double> out {Tensor4(d),
            {Tensor4(d), Tensor4(d), Tensor<std::int64_t>(d)}};
    for (std::size_t b = 0; b < d.b; ++b)
        for (std::size_t c = 0; c < d.c; ++c)
            for (std::size_t h = 0; h < d.h; ++h)
                for (std::size_t w = 0; w < d.w; ++w) {
                    const Span cs = group_range(c, cfg.c_group);
                    const Span hs = window_range(d.h, h, cfg.p, cfg.mode);
                    const Span ws = window_range(d.w, w, cfg.q, cfg.mode);
                    double sum = 0.0;
                    std::int64_t n = 0;
                    for (std::size_t k = cs.lo; k < cs.hi; ++k)
                        for (std::size_t i = hs.lo; i < hs.hi; ++i)
                            for (std::size_t j = ws.lo; j < ws.hi; ++j) {
                                sum += x(b, k, i, j);
                                ++n;
                            }
                    const double mean = sum / double(n);
                    double ss = 0.0;
                    for (std::size_t k = cs.lo; k < cs.hi; ++k)
                        for (std::size_t i = hs.lo; i < hs.hi; ++i)
                            for (std::size_t j = ws.lo; j < ws.hi; ++j) {
                                const double dv = x(b, k, i, j) - mean;
                                ss += dv * dv;
                            }
                    const double var = ss / double(n);
                    const double xhat = (x(b, c, h, w) - mean) / std::sqrt(var + cfg.eps);
                    out.y(b, c, h, w) = params.gamma[c] * xhat + params.beta[c];
                    out.stats.mean(b, c, h, w) = mean;
                    out.stats.var(b, c, h, w) = var;
                    out.stats.n_map(b, c, h, w) = n;
                }
    return out;
}

namespace {

// Index-set membership for the global family: does k share i's pool?
bool same_pool(Family op, const Dims &d, std::size_t groups, std::size_t ib, std::size_t ic,
        std::size_t kb, std::size_t kc) {
    switch (op) {
    case Family::bn: return kc == ic;
    case Family::ln: return kb == ib;
    case Family::in: return kb == ib && kc == ic;
    case Family::gn: {
        const std::size_t per = d.c / groups;
        return kb == ib && kc / per == ic / per;
    }
    case Family::lrn: break;
    }
    return false;
}

Tensor4 lrn_naive(const Tensor4 &x, const LrnConfig &cfg) {
    if (cfg.window < 3 || cfg.window % 2 == 0)
        throw RangeError("LRN window must be odd and >= 3");
    const Dims &d = x.dims();
    const long r = static_cast<long>(cfg.window / 2);
    const long H = static_cast<long>(d.h), W = static_cast<long>(d.w);

    // 2-D weights, normalized directly over the square.
    std::vector<double> weight(cfg.window * cfg.window);
    double total = 0.0;
    for (long p = -r; p <= r; ++p)
        for (long q = -r; q <= r; ++q) {
            const double v = std::exp(-double(p * p + q * q) / (2.0 * cfg.sigma_g * cfg.sigma_g));
            weight[(p + r) * cfg.window + (q + r)] = v;
            total += v;
        }
    for (double &v : weight)
        v /= total;

    Tensor4 y(d);
    for (std::size_t b = 0; b < d.b; ++b) {
        Tensor4 numer(Dims {1, d.c, d.h, d.w});
        std::vector<double> sigma(d.h * d.w);
        for (long h = 0; h < H; ++h)
            for (long w = 0; w < W; ++w) {
                double pooled = 0.0;
                for (std::size_t c = 0; c < d.c; ++c) {
                    // Deviations from the anchor: exact zeros on flat patches.
                    const double anchor = x(b, c, h, w);
                    auto at = [&](long p, long q) {
                        return x(b, c, std::clamp(h + p, 0L, H - 1), std::clamp(w + q, 0L, W - 1))
                                - anchor;
                    };
                    double m = 0.0;
                    for (long p = -r; p <= r; ++p)
                        for (long q = -r; q <= r; ++q)
                            m += weight[(p + r) * cfg.window + (q + r)] * at(p, q);
                    double v = 0.0;
                    for (long p = -r; p <= r; ++p)
                        for (long q = -r; q <= r; ++q) {
                            const double dv = at(p, q) - m;
                            v += weight[(p + r) * cfg.window + (q + r)] * dv * dv;
                        }
                    numer(0, c, h, w) = -m;
                    pooled += v;
                }
                sigma[h * W + w] = std::sqrt(pooled / double(d.c));
            }
        double floor_c = 0.0;
        for (double s : sigma)
            floor_c += s;
        floor_c /= double(sigma.size());
        for (std::size_t c = 0; c < d.c; ++c)
            for (long h = 0; h < H; ++h)
                for (long w = 0; w < W; ++w) {
                    const double denom = std::max(floor_c, sigma[h * W + w]);
                    y(b, c, h, w) = denom > 0.0 ? numer(0, c, h, w) / denom : 0.0;
                }
    }
    return y;
}

} // namespace

Tensor4 family_naive(Family op, const Tensor4 &x, const FamilyConfig &config,
        const AffineParams &params) {
    if (op == Family::lrn) return lrn_naive(x, config.lrn);

    const Dims &d = x.dims();
    validate(params, d.c);
    if (op == Family::gn && (config.groups == 0 || d.c % config.groups != 0))
        throw GroupError("groups do not divide C");
    if (op == Family::bn && !config.training
            && (!config.running || config.running->mean.size() != d.c))
        throw StateError("evaluation mode needs running statistics");

    Tensor4 y(d);
    for (std::size_t ib = 0; ib < d.b; ++ib)
        for (std::size_t ic = 0; ic < d.c; ++ic) {
            double mean = 0.0, var = 0.0;
            if (op == Family::bn && !config.training) {
                mean = config.running->mean[ic];
                var = config.running->var[ic];
            } else {
                double sum = 0.0, n = 0.0;
                for (std::size_t kb = 0; kb < d.b; ++kb)
                    for (std::size_t kc = 0; kc < d.c; ++kc) {
                        if (!same_pool(op, d, config.groups, ib, ic, kb, kc)) continue;
                        for (std::size_t h = 0; h < d.h; ++h)
                            for (std::size_t w = 0; w < d.w; ++w) {
                                sum += x(kb, kc, h, w);
                                n += 1.0;
                            }
                    }
                mean = sum / n;
                for (std::size_t kb = 0; kb < d.b; ++kb)
                    for (std::size_t kc = 0; kc < d.c; ++kc) {
                        if (!same_pool(op, d, config.groups, ib, ic, kb, kc)) continue;
                        for (std::size_t h = 0; h < d.h; ++h)
                            for (std::size_t w = 0; w < d.w; ++w) {
                                const double dv = x(kb, kc, h, w) - mean;
                                var += dv * dv;
                            }
                    }
                var /= n;
            }
            for (std::size_t h = 0; h < d.h; ++h)
                for (std::size_t w = 0; w < d.w; ++w)
                    y(ib, ic, h, w) = params.gamma[ic] * (x(ib, ic, h, w) - mean)
                                    / std::sqrt(var + config.eps)
                            + params.beta[ic];
        }
    return y;
}

} // namespace lcn::oracle
