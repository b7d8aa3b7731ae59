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

// Acceptance run: one PASS/FAIL line per top-level criterion, exit status 0
// only when every line passes. Usage: lcn_acceptance [seed]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "lcn/bench.hpp"
#include "lcn/suites.hpp"
#include "lcn/tensor.hpp"

namespace fs = std::filesystem;
using namespace lcn;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string summary(const SuiteResult &r) {
    std::string s = std::to_string(r.trials) + " cases, " + std::to_string(r.failures)
            + " failures, worst " + sci(r.worst_error) + " (tol " + sci(r.tolerance) + ")";
    if (r.rejected) s += ", " + std::to_string(r.rejected) + " rejected";
    if (!r.passed()) s += ", first failure seed " + std::to_string(r.failing_seed) + ": "
            + r.failing_case;
    return s;
}

// Criteria that draw random cases also require every requested case to count.
Verdict suite_verdict(const std::vector<SuiteResult> &results,
        const std::vector<std::size_t> &wanted) {
    Verdict v {true, ""};
    for (std::size_t i = 0; i < results.size(); ++i) {
        v.pass = v.pass && results[i].passed() && results[i].trials >= wanted[i];
        v.detail += (i ? "; " : "") + results[i].name + ": " + summary(results[i]);
    }
    return v;
}

Verdict oracle_equivalence(std::uint64_t seed) {
    return suite_verdict({run_lcn_oracle_suite(200, seed)}, {200});
}

Verdict reduction_identities(std::uint64_t seed) {
    return suite_verdict({run_reduction_suite(50, seed)}, {50});
}

Verdict gradient_correctness(std::uint64_t seed) {
    // Every gradient trial checks lcn and all four reference ops.
    return suite_verdict({run_gradient_suite(100, seed), run_adjoint_suite(50, seed)},
            {5 * 100, 50});
}

Verdict constant_runtime(std::uint64_t seed) {
    BenchOptions options;
    options.seed = seed;
    const auto records = run_bench(options);
    const double flat = flatness_ratio(records, kFastOp);
    const double growth = flatness_ratio(records, kNaiveOp);
    std::string detail = "fast path max/min " + std::to_string(flat) + " (< 1.5), naive growth "
            + std::to_string(growth) + "x (>= 10); medians ms:";
    for (const auto &r : records)
        detail += " " + r.op + "@" + std::to_string(r.p) + "="
                + std::to_string(static_cast<double>(r.median_ns) * 1e-6);
    return {flat < 1.5 && growth >= 10.0, detail};
}

Verdict shift_consistency(std::uint64_t seed) {
    return suite_verdict({run_shift_suite(20, seed)}, {20});
}

std::vector<char> slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict cli_contract(std::uint64_t seed) {
    const fs::path dir = fs::temp_directory_path() / "lcn_acceptance";
    fs::create_directories(dir);
    std::string detail;
    bool pass = true;

    std::ostringstream out, err;
    const int check_code = cli::run({"check", "--suite", "all", "--seed", std::to_string(seed)},
            out, err);
    pass = pass && check_code == cli::kOk;
    detail += "check --suite all exit " + std::to_string(check_code);

    const fs::path csv = dir / "bench.csv";
    std::ostringstream bench_out;
    const int bench_code = cli::run({"bench", "--dims", "1x4x48x48", "--windows", "7,31,127",
            "--csv", csv.string()}, bench_out, err);
    std::size_t parsed = 0;
    bool header_ok = false;
    try {
        std::ifstream in(csv);
        std::string header;
        std::getline(in, header);
        header_ok = header == kCsvHeader;
        in.seekg(0);
        parsed = parse_csv(in).size();
    } catch (const Error &e) {
        detail += std::string(", csv error: ") + e.what();
    }
    pass = pass && bench_code == cli::kOk && header_ok && parsed == 5;
    detail += "; bench exit " + std::to_string(bench_code) + ", header "
            + (header_ok ? "ok" : "mismatch") + ", " + std::to_string(parsed) + " records parsed";

    bool exact = true;
    const Tensor4 x = fill_random({2, 3, 4, 5}, seed, Distribution::normal01);
    const Tensor4f xf = tensor_cast<float>(fill_random({3, 2, 7, 6}, seed + 1,
            Distribution::uniform01));
    write_tensor(x, dir / "a.lcnt");
    write_tensor(xf, dir / "b.lcnt");
    const AnyTensor ra = read_tensor(dir / "a.lcnt");
    const AnyTensor rb = read_tensor(dir / "b.lcnt");
    exact = std::holds_alternative<Tensor4>(ra) && std::holds_alternative<Tensor4f>(rb);
    if (exact) {
        const Tensor4 &ya = std::get<Tensor4>(ra);
        const Tensor4f &yb = std::get<Tensor4f>(rb);
        exact = ya.dims() == x.dims() && yb.dims() == xf.dims()
                && std::memcmp(ya.data().data(), x.data().data(), x.size() * sizeof(double)) == 0
                && std::memcmp(yb.data().data(), xf.data().data(), xf.size() * sizeof(float))
                        == 0;
        write_tensor(ra, dir / "a2.lcnt");
        exact = exact && slurp(dir / "a.lcnt") == slurp(dir / "a2.lcnt");
    }
    pass = pass && exact;
    detail += std::string("; LCNT round trip ") + (exact ? "bit-exact" : "MISMATCH");
    fs::remove_all(dir);
    return {pass, detail};
}

struct Criterion {
    const char *name;
    double limit_s;
    std::function<Verdict(std::uint64_t)> run;
};

} // namespace

int main(int argc, char **argv) {
    const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 1;
    const std::vector<Criterion> criteria {
            {"oracle equivalence", 60, oracle_equivalence},
            {"reduction identities", 10, reduction_identities},
            {"gradient correctness", 300, gradient_correctness},
            {"constant runtime", 120, constant_runtime},
            {"shift consistency", 30, shift_consistency},
            {"cli contract", 600, cli_contract},
    };
    int failed = 0;
    for (const auto &c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v {false, ""};
        try {
            v = c.run(seed);
        } catch (const std::exception &e) {
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs
                = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.limit_s;
        const bool pass = v.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s  %-22s %.1f s (limit %.0f s)  %s\n", pass ? "PASS" : "FAIL", c.name, secs,
                c.limit_s, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%s: %zu/%zu criteria passed\n", failed ? "FAILED" : "OK",
            criteria.size() - failed, criteria.size());
    return failed ? 1 : 0;
}
