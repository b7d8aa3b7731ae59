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

#ifndef LCN_BENCH_HPP
#define LCN_BENCH_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lcn/integral.hpp"
#include "lcn/tensor.hpp"

namespace lcn {

inline constexpr const char *kFastOp = "lcn_integral";
inline constexpr const char *kNaiveOp = "lcn_naive";

struct BenchRecord {
    std::string op;
    Dims dims;
    std::size_t p = 0, q = 0, c_group = 1;
    WindowMode mode = WindowMode::sliding;
    std::size_t reps = 0;
    std::int64_t median_ns = 0;
    double throughput_eps = 0.0;  // elements per second at the median

    bool operator==(const BenchRecord &) const = default;
};

struct BenchOptions {
    Dims dims {1, 32, 256, 256};
    std::vector<std::size_t> windows {7, 31, 127, 227};
    std::size_t c_group = 2;
    WindowMode mode = WindowMode::sliding;
    std::size_t reps = 5;
    std::size_t warmup = 2;
    std::size_t naive_cap = 31;  // naive path only for windows <= this
    bool naive = true;
    std::uint64_t seed = 1;
};

// Times lcn_forward on a real32 input (and the real64 naive oracle for
// small windows), one record per (path, window) with p = q = window.
std::vector<BenchRecord> run_bench(const BenchOptions &options);

// max / min of the median times recorded for `op`.
double flatness_ratio(const std::vector<BenchRecord> &records, const std::string &op);

inline constexpr const char *kCsvHeader
        = "op,B,C,H,W,p,q,c_group,mode,reps,median_ns,throughput_eps";

void write_csv(std::ostream &os, const std::vector<BenchRecord> &records);
// Throws FormatError on a malformed header or row.
std::vector<BenchRecord> parse_csv(std::istream &is);

const char *mode_name(WindowMode mode);
WindowMode parse_mode(const std::string &name);

} // namespace lcn

#endif
