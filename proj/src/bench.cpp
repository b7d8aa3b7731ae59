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

#include "lcn/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <istream>
#include <ostream>
#include <sstream>

#include "lcn/norms.hpp"
#include "lcn/oracle.hpp"

namespace lcn {

namespace {

template <typename Fn>
std::int64_t median_time_ns(std::size_t warmup, std::size_t reps, Fn &&fn) {
    using clock = std::chrono::steady_clock;
    for (std::size_t i = 0; i < warmup; ++i)
        fn();
    std::vector<std::int64_t> times;
    for (std::size_t i = 0; i < reps; ++i) {
        const auto start = clock::now();
        fn();
        times.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(
                clock::now() - start).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string &field) {
    T value {};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw FormatError("bad numeric field '" + field + "'");
    return value;
}

} // namespace

const char *mode_name(WindowMode mode) {
    return mode == WindowMode::sliding ? "sliding" : "tiled";
}

WindowMode parse_mode(const std::string &name) {
    if (name == "sliding") return WindowMode::sliding;
    if (name == "tiled") return WindowMode::tiled;
    throw FormatError("unknown window mode '" + name + "'");
}

std::vector<BenchRecord> run_bench(const BenchOptions &options) {
    if (options.reps < 5) throw RangeError("benchmarks need at least 5 repetitions");
    if (options.windows.empty()) throw RangeError("no window sizes given");

    const Tensor4 x64 = fill_random(options.dims, options.seed, Distribution::normal01);
    const Tensor4f x32 = tensor_cast<float>(x64);
    const AffineParams params = AffineParams::identity(options.dims.c);
    const double elements = static_cast<double>(options.dims.count());

    std::vector<BenchRecord> records;
    auto add = [&](const char *op, std::size_t window, std::int64_t ns) {
        BenchRecord r;
        r.op = op;
        r.dims = options.dims;
        r.p = r.q = window;
        r.c_group = options.c_group;
        r.mode = options.mode;
        r.reps = options.reps;
        r.median_ns = ns;
        r.throughput_eps = elements / (static_cast<double>(std::max<std::int64_t>(ns, 1)) * 1e-9);
        records.push_back(r);
    };

    // Fast-path repetitions cycle through the windows, so slow drift in the
    // machine state lands on every window alike instead of on the first one.
    std::vector<LcnConfig> configs;
    for (std::size_t window : options.windows) {
        LcnConfig cfg;
        cfg.c_group = options.c_group;
        cfg.p = cfg.q = window;
        cfg.mode = options.mode;
        validate(cfg, options.dims);
        configs.push_back(cfg);
    }
    auto run_fast = [&](const LcnConfig &cfg) {
        using clock = std::chrono::steady_clock;
        const auto start = clock::now();
        volatile float sink = lcn_forward(x32, cfg, params).y[0];
        (void)sink;
        return std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();
    };
    for (std::size_t i = 0; i < options.warmup; ++i)
        for (const auto &cfg : configs) run_fast(cfg);
    std::vector<std::vector<std::int64_t>> times(configs.size());
    for (std::size_t rep = 0; rep < options.reps; ++rep)
        for (std::size_t k = 0; k < configs.size(); ++k) times[k].push_back(run_fast(configs[k]));
    for (std::size_t k = 0; k < configs.size(); ++k) {
        std::sort(times[k].begin(), times[k].end());
        add(kFastOp, options.windows[k], times[k][times[k].size() / 2]);
    }
    if (options.naive) {
        for (std::size_t window : options.windows) {
            if (window > options.naive_cap) continue;
            LcnConfig cfg;
            cfg.c_group = options.c_group;
            cfg.p = cfg.q = window;
            cfg.mode = options.mode;
            add(kNaiveOp, window, median_time_ns(options.warmup, options.reps, [&] {
                volatile double sink = oracle::lcn_naive(x64, cfg, params).y[0];
                (void)sink;
            }));
        }
    }
    return records;
}

double flatness_ratio(const std::vector<BenchRecord> &records, const std::string &op) {
    std::int64_t lo = 0, hi = 0;
    bool any = false;
    for (const auto &r : records) {
        if (r.op != op) continue;
        lo = any ? std::min(lo, r.median_ns) : r.median_ns;
        hi = any ? std::max(hi, r.median_ns) : r.median_ns;
        any = true;
    }
    if (!any || lo <= 0) return 0.0;
    return static_cast<double>(hi) / static_cast<double>(lo);
}

void write_csv(std::ostream &os, const std::vector<BenchRecord> &records) {
    os << kCsvHeader << '\n';
    for (const auto &r : records)
        os << r.op << ',' << r.dims.b << ',' << r.dims.c << ',' << r.dims.h << ',' << r.dims.w
           << ',' << r.p << ',' << r.q << ',' << r.c_group << ',' << mode_name(r.mode) << ','
           << r.reps << ',' << r.median_ns << ',' << format_double(r.throughput_eps) << '\n';
}

std::vector<BenchRecord> parse_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader)
        throw FormatError("missing or unexpected CSV header");
    std::vector<BenchRecord> records;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            f.push_back(field);
        if (f.size() != 12) throw FormatError("expected 12 fields in '" + line + "'");
        BenchRecord r;
        r.op = f[0];
        r.dims = {parse_number<std::size_t>(f[1]), parse_number<std::size_t>(f[2]),
                parse_number<std::size_t>(f[3]), parse_number<std::size_t>(f[4])};
        r.p = parse_number<std::size_t>(f[5]);
        r.q = parse_number<std::size_t>(f[6]);
        r.c_group = parse_number<std::size_t>(f[7]);
        r.mode = parse_mode(f[8]);
        r.reps = parse_number<std::size_t>(f[9]);
        r.median_ns = parse_number<std::int64_t>(f[10]);
        r.throughput_eps = parse_number<double>(f[11]);
        records.push_back(r);
    }
    return records;
}

} // namespace lcn
