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

#ifndef LCN_ORACLE_HPP
#define LCN_ORACLE_HPP

#include "lcn/norms.hpp"

namespace lcn::oracle {

// Slow, direct evaluations used as ground truth. Everything runs in real64
// on one thread; the only logic shared with the fast path is the window and
// group membership (window_range / group_range).

// Loops over every member of every position's window: O(N * c_group * p * q).
NormResult<double> lcn_naive(const Tensor4 &x, const LcnConfig &cfg, const AffineParams &params);

enum class Family { gn, in, ln, bn, lrn };

struct FamilyConfig {
    std::size_t groups = 1;                  // gn only
    double eps = 1e-5;
    bool training = true;                    // bn only
    const RunningStats *running = nullptr;   // bn eval only
    LrnConfig lrn {};                        // lrn only
};

Tensor4 family_naive(Family op, const Tensor4 &x, const FamilyConfig &config,
        const AffineParams &params);

} // namespace lcn::oracle

#endif
