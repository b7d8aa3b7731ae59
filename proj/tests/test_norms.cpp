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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lcn/norms.hpp"
#include "lcn/oracle.hpp"
#include "lcn/parallel.hpp"
#include "lcn/suites.hpp"

using namespace lcn;

namespace {

LcnConfig make_cfg(std::size_t c_group, std::size_t p, std::size_t q, WindowMode mode,
        double eps = 1e-5) {
    LcnConfig cfg;
    cfg.c_group = c_group;
    cfg.p = p;
    cfg.q = q;
    cfg.mode = mode;
    cfg.eps = eps;
    return cfg;
}

AffineParams random_params(std::size_t channels, std::uint64_t seed) {
    Rng rng(seed);
    AffineParams params = AffineParams::identity(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        params.gamma[c] = 0.5 + rng.uniform();
        params.beta[c] = rng.normal();
    }
    return params;
}

void expect_channels_equal_beta(const Tensor4 &y, const AffineParams &params) {
    const Dims &d = y.dims();
    for (std::size_t b = 0; b < d.b; ++b)
        for (std::size_t c = 0; c < d.c; ++c)
            for (std::size_t i = 0; i < d.plane(); ++i)
                EXPECT_EQ(y[(b * d.c + c) * d.plane() + i], params.beta[c]);
}

// Sample b of x moved to position perm[b].
Tensor4 permute_batch(const Tensor4 &x, const std::vector<std::size_t> &perm) {
    Tensor4 out(x.dims());
    for (std::size_t b = 0; b < perm.size(); ++b)
        std::copy(x.sample(b).begin(), x.sample(b).end(), out.sample(perm[b]).begin());
    return out;
}

} // namespace

TEST(Lcn, ConstantInputGivesBeta) {
    const Tensor4 x(Dims {2, 4, 6, 5}, 5.0);
    const AffineParams params = random_params(4, 1);
    for (WindowMode mode : {WindowMode::sliding, WindowMode::tiled}) {
        expect_channels_equal_beta(lcn_forward(x, make_cfg(2, 3, 4, mode), params).y, params);
        expect_channels_equal_beta(oracle::lcn_naive(x, make_cfg(2, 3, 4, mode), params).y,
                params);
    }
    expect_channels_equal_beta(
            lcn_forward(x, make_cfg(1, 1, 1, WindowMode::sliding), AffineParams::identity(4)).y,
            AffineParams::identity(4));
}

TEST(Lcn, TwoElementClosedForm) {
    const Tensor4 x(Dims {1, 1, 1, 2}, std::vector<double> {0.0, 2.0});
    const LcnConfig cfg = make_cfg(1, 1, 2, WindowMode::sliding);
    const double expect = 1.0 / std::sqrt(1.0 + 1e-5);
    for (const auto &r : {lcn_forward(x, cfg, AffineParams::identity(1)),
                 oracle::lcn_naive(x, cfg, AffineParams::identity(1))}) {
        EXPECT_NEAR(r.stats.mean[0], 1.0, 1e-15);
        EXPECT_NEAR(r.stats.var[0], 1.0, 1e-15);
        EXPECT_NEAR(r.y[0], -expect, 1e-15);
        EXPECT_NEAR(r.y[1], expect, 1e-15);
        EXPECT_EQ(r.stats.n_map[0], 2);
    }
    EXPECT_NEAR(expect, 0.999995, 1e-6);
}

TEST(Lcn, MatchesNaiveOracle) {
    const Tensor4 x = fill_random({2, 4, 8, 8}, 17, Distribution::normal01);
    const AffineParams params = random_params(4, 2);
    for (WindowMode mode : {WindowMode::sliding, WindowMode::tiled}) {
        const LcnConfig cfg = make_cfg(2, 5, 5, mode);
        const auto fast = lcn_forward(x, cfg, params);
        const auto slow = oracle::lcn_naive(x, cfg, params);
        EXPECT_LT(max_rel_error(fast.y, slow.y), 1e-9);
        EXPECT_LT(max_rel_error(fast.stats.mean, slow.stats.mean), 1e-9);
        EXPECT_LT(max_rel_error(fast.stats.var, slow.stats.var), 1e-9);
        EXPECT_EQ(fast.stats.n_map, slow.stats.n_map);
    }
}

TEST(Lcn, DefaultConfigOnLargeInput) {
    const Tensor4f x = tensor_cast<float>(fill_random({1, 4, 512, 512}, 4, Distribution::normal01));
    const LcnConfig cfg;
    ASSERT_EQ(cfg.c_group, 2u);
    ASSERT_EQ(cfg.p, 227u);
    ASSERT_EQ(cfg.q, 227u);
    const auto r = lcn_forward(x, cfg, AffineParams::identity(4));
    EXPECT_EQ(r.y.dims(), x.dims());
    EXPECT_TRUE(all_finite(r.y));
    EXPECT_EQ(r.stats.n_map[0], 2 * 227 * 227);
}

TEST(Lcn, SinglePrecisionTracksDoublePrecision) {
    const Tensor4 x = fill_random({1, 4, 16, 16}, 5, Distribution::normal01);
    const LcnConfig cfg = make_cfg(2, 7, 7, WindowMode::sliding);
    const auto ref = lcn_forward(x, cfg, AffineParams::identity(4));
    const auto single = lcn_forward(tensor_cast<float>(x), cfg, AffineParams::identity(4));
    EXPECT_LT(max_rel_error(tensor_cast<double>(single.y), ref.y), 1e-5);
}

TEST(Lcn, TiledTilesAreNormalized) {
    const Tensor4 x = fill_random({1, 4, 12, 12}, 6, Distribution::normal01);
    const double eps = 1e-5;
    const auto r = lcn_forward(x, make_cfg(2, 4, 3, WindowMode::tiled, eps),
            AffineParams::identity(4));
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t th = 0; th < 3; ++th)
            for (std::size_t tw = 0; tw < 4; ++tw) {
                double mean = 0.0, sq = 0.0, x_mean = 0.0, x_sq = 0.0;
                const double n = 2 * 4 * 3;
                for (std::size_t c = 2 * g; c < 2 * g + 2; ++c)
                    for (std::size_t h = 4 * th; h < 4 * th + 4; ++h)
                        for (std::size_t w = 3 * tw; w < 3 * tw + 3; ++w) {
                            mean += r.y(0, c, h, w) / n;
                            sq += r.y(0, c, h, w) * r.y(0, c, h, w) / n;
                            x_mean += x(0, c, h, w) / n;
                            x_sq += x(0, c, h, w) * x(0, c, h, w) / n;
                        }
                const double sigma2 = x_sq - x_mean * x_mean;
                EXPECT_NEAR(mean, 0.0, 1e-9);
                EXPECT_NEAR(sq - mean * mean, sigma2 / (sigma2 + eps), 1e-9);
                EXPECT_NEAR(sq - mean * mean, 1.0, 1e-6 + eps / sigma2);
            }
}

// Only eps breaks the invariance; it is negligible once sigma^2 >= 1e6 * eps.
TEST(Lcn, ScaleShiftCovariance) {
    Tensor4 x = fill_random({2, 4, 10, 9}, 7, Distribution::normal01);
    for (auto &v : x.data()) v *= 100.0;
    for (double a : {3.5, 0.25}) {
        Tensor4 z(x.dims());
        for (std::size_t i = 0; i < x.size(); ++i) z[i] = a * x[i] - 12.0;
        for (WindowMode mode : {WindowMode::sliding, WindowMode::tiled}) {
            const LcnConfig cfg = make_cfg(2, 5, 3, mode);
            const auto ra = lcn_forward(x, cfg, AffineParams::identity(4));
            const auto rb = lcn_forward(z, cfg, AffineParams::identity(4));
            std::size_t compared = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (std::min(ra.stats.var[i], rb.stats.var[i]) < 1e6 * cfg.eps) continue;
                EXPECT_NEAR(ra.y[i], rb.y[i], 1e-6);
                ++compared;
            }
            EXPECT_GT(compared, x.size() * 9 / 10);
        }
    }
}

TEST(Lcn, BatchPermutationIsBitExact) {
    const Tensor4 x = fill_random({3, 4, 7, 6}, 8, Distribution::normal01);
    const std::vector<std::size_t> perm {2, 0, 1};
    const Tensor4 xp = permute_batch(x, perm);
    const AffineParams params = random_params(4, 3);
    EXPECT_EQ(permute_batch(lcn_forward(x, make_cfg(2, 3, 5, WindowMode::sliding), params).y,
                      perm),
            lcn_forward(xp, make_cfg(2, 3, 5, WindowMode::sliding), params).y);
    EXPECT_EQ(permute_batch(gn_forward(x, 2, 1e-5, params).y, perm),
            gn_forward(xp, 2, 1e-5, params).y);
    EXPECT_EQ(permute_batch(in_forward(x, 1e-5, params).y, perm), in_forward(xp, 1e-5, params).y);
    EXPECT_EQ(permute_batch(ln_forward(x, 1e-5, params).y, perm), ln_forward(xp, 1e-5, params).y);
}

TEST(Lcn, ThreadCountDoesNotChangeResults) {
    const Tensor4 x = fill_random({2, 8, 33, 29}, 9, Distribution::normal01);
    const AffineParams params = random_params(8, 4);
    const LcnConfig cfg = make_cfg(4, 9, 7, WindowMode::sliding);
    const std::size_t saved = num_threads();
    set_num_threads(1);
    const auto one = lcn_forward(x, cfg, params);
    const auto gn_one = gn_forward(x, 4, 1e-5, params);
    set_num_threads(5);
    const auto five = lcn_forward(x, cfg, params);
    const auto gn_five = gn_forward(x, 4, 1e-5, params);
    set_num_threads(saved);
    EXPECT_EQ(one.y, five.y);
    EXPECT_EQ(one.stats.var, five.stats.var);
    EXPECT_EQ(gn_one.y, gn_five.y);
}

TEST(Lcn, RejectsInvalidArguments) {
    const Tensor4 x = fill_random({1, 4, 4, 4}, 1, Distribution::normal01);
    EXPECT_THROW(lcn_forward(x, make_cfg(3, 3, 3, WindowMode::sliding), AffineParams::identity(4)),
            GroupError);
    EXPECT_THROW(lcn_forward(x, make_cfg(2, 0, 3, WindowMode::sliding), AffineParams::identity(4)),
            RangeError);
    EXPECT_THROW(lcn_forward(x, make_cfg(2, 3, 3, WindowMode::sliding, 0.0),
                         AffineParams::identity(4)),
            RangeError);
    EXPECT_THROW(lcn_forward(x, make_cfg(2, 3, 3, WindowMode::sliding), AffineParams::identity(3)),
            ShapeError);
    Tensor4 bad = x;
    bad[5] = INFINITY;
    EXPECT_THROW(lcn_forward(bad, make_cfg(2, 3, 3, WindowMode::sliding),
                         AffineParams::identity(4)),
            DataError);
}

TEST(GroupNorm, SpecialCasesAreLayerAndInstanceNorm) {
    const Tensor4 x = fill_random({2, 6, 5, 4}, 10, Distribution::normal01);
    const AffineParams params = random_params(6, 5);
    EXPECT_EQ(gn_forward(x, 1, 1e-5, params).y, ln_forward(x, 1e-5, params).y);
    EXPECT_EQ(gn_forward(x, 6, 1e-5, params).y, in_forward(x, 1e-5, params).y);
    EXPECT_THROW(gn_forward(x, 4, 1e-5, params), GroupError);
}

TEST(GroupNorm, MatchOracles) {
    const Tensor4 x = fill_random({2, 8, 6, 6}, 11, Distribution::normal01);
    const AffineParams params = random_params(8, 6);
    oracle::FamilyConfig fc;
    fc.groups = 4;
    EXPECT_LT(max_rel_error(gn_forward(x, 4, 1e-5, params).y,
                      oracle::family_naive(oracle::Family::gn, x, fc, params)),
            1e-12);
    EXPECT_LT(max_rel_error(in_forward(x, 1e-5, params).y,
                      oracle::family_naive(oracle::Family::in, x, fc, params)),
            1e-12);
    EXPECT_LT(max_rel_error(ln_forward(x, 1e-5, params).y,
                      oracle::family_naive(oracle::Family::ln, x, fc, params)),
            1e-12);
}

TEST(GroupNorm, ConstantPoolsGiveBeta) {
    Tensor4 x = fill_random({2, 3, 4, 4}, 12, Distribution::normal01);
    const AffineParams params = random_params(3, 7);
    for (std::size_t i = 0; i < 16; ++i) x(1, 2, i / 4, i % 4) = -4.0;
    const auto in = in_forward(x, 1e-5, params).y;
    for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(in(1, 2, i / 4, i % 4), params.beta[2]);

    const Tensor4 flat(Dims {2, 3, 4, 4}, 2.5);
    expect_channels_equal_beta(ln_forward(flat, 1e-5, params).y, params);
}

TEST(BatchNorm, SingleSampleEqualsInstanceNorm) {
    const Tensor4 x = fill_random({1, 3, 5, 5}, 13, Distribution::normal01);
    const AffineParams params = random_params(3, 8);
    EXPECT_LT(max_rel_error(bn_forward(x, 1e-5, params, nullptr, true).y,
                      in_forward(x, 1e-5, params).y),
            1e-15);
}

TEST(BatchNorm, ConstantBatchGivesBeta) {
    const AffineParams params = random_params(3, 9);
    expect_channels_equal_beta(
            bn_forward(Tensor4(Dims {4, 3, 2, 2}, -1.5), 1e-5, params, nullptr, true).y, params);
}

TEST(BatchNorm, MatchesOracleInBothModes) {
    const Tensor4 x = fill_random({4, 3, 5, 5}, 14, Distribution::normal01);
    const AffineParams params = random_params(3, 10);
    oracle::FamilyConfig fc;
    EXPECT_LT(max_rel_error(bn_forward(x, 1e-5, params, nullptr, true).y,
                      oracle::family_naive(oracle::Family::bn, x, fc, params)),
            1e-12);
    RunningStats running {{0.1, -0.2, 0.3}, {1.5, 0.5, 2.0}, 0.1};
    fc.training = false;
    fc.running = &running;
    EXPECT_LT(max_rel_error(bn_forward(x, 1e-5, params, &running, false).y,
                      oracle::family_naive(oracle::Family::bn, x, fc, params)),
            1e-12);
}

TEST(BatchNorm, RunningStatisticsUpdate) {
    const Tensor4 x = fill_random({3, 2, 4, 4}, 15, Distribution::normal01);
    RunningStats running;
    const auto r = bn_forward(x, 1e-5, AffineParams::identity(2), &running, true);
    ASSERT_EQ(running.mean.size(), 2u);
    for (std::size_t c = 0; c < 2; ++c) {
        const double mu = r.stats.mean(0, c, 0, 0);
        const double var = r.stats.var(0, c, 0, 0);
        EXPECT_NEAR(running.mean[c], 0.1 * mu, 1e-15);
        EXPECT_NEAR(running.var[c], 0.9 + 0.1 * var, 1e-15);
    }
    EXPECT_THROW(bn_forward(x, 1e-5, AffineParams::identity(2), nullptr, false), StateError);
}

TEST(BatchNorm, TrainingMeanIsArithmeticMean) {
    Tensor4 x(Dims {2, 2, 3, 3});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
    const auto r = bn_forward(x, 1e-5, AffineParams::identity(2), nullptr, true);
    // Channel 0 holds 0..8 and 18..26; channel 1 holds 9..17 and 27..35.
    EXPECT_EQ(r.stats.mean(0, 0, 0, 0), 13.0);
    EXPECT_EQ(r.stats.mean(1, 1, 2, 2), 22.0);
}

TEST(Lrn, ConstantAndSinglePixelInputsGiveZero) {
    const Tensor4 flat = lrn_forward(Tensor4(Dims {1, 3, 7, 6}, 4.0), LrnConfig {});
    for (double v : flat.data()) EXPECT_EQ(v, 0.0);
    const Tensor4 pixel = lrn_forward(fill_random({2, 3, 1, 1}, 16, Distribution::normal01),
            LrnConfig {});
    for (double v : pixel.data()) EXPECT_EQ(v, 0.0);
}

TEST(Lrn, MatchesWeightedLoopOracle) {
    const Tensor4 x = fill_random({1, 2, 9, 9}, 17, Distribution::normal01);
    oracle::FamilyConfig fc;
    fc.lrn = LrnConfig {9, 2.0};
    EXPECT_LT(max_rel_error(lrn_forward(x, fc.lrn),
                      oracle::family_naive(oracle::Family::lrn, x, fc, {})),
            1e-9);
}

TEST(Lrn, GaussianTapsAreNormalizedAndSymmetric) {
    const auto taps = gaussian_taps(7, 1.5);
    ASSERT_EQ(taps.size(), 7u);
    double sum = 0.0;
    for (double t : taps) sum += t;
    EXPECT_NEAR(sum, 1.0, 1e-15);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(taps[i], taps[6 - i]);
    EXPECT_THROW(gaussian_taps(4, 1.0), RangeError);
    EXPECT_THROW(gaussian_taps(5, 0.0), RangeError);
}

TEST(Affine, Examples) {
    const Tensor4 half(Dims {1, 1, 1, 1}, 0.5);
    EXPECT_EQ(affine(half, AffineParams {{2.0}, {-1.0}})[0], 0.0);
    const Tensor4 x = fill_random({1, 2, 3, 3}, 18, Distribution::normal01);
    EXPECT_EQ(affine(x, AffineParams::identity(2)), x);
    const AffineParams params = random_params(2, 11);
    expect_channels_equal_beta(affine(Tensor4(Dims {2, 2, 3, 3}), params), params);
}
