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

#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "lcn/bench.hpp"
#include "lcn/error.hpp"
#include "lcn/norms.hpp"
#include "lcn/parallel.hpp"
#include "lcn/suites.hpp"

namespace lcn::cli {

namespace {

// Flag values that fail validation after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::size_t> split_sizes(const std::string &text, char sep, const char *what) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, sep)) {
        if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
            throw UsageError(std::string("malformed ") + what + " '" + text + "'");
        out.push_back(std::stoull(part));
    }
    if (!text.empty() && text.back() == sep)
        throw UsageError(std::string("malformed ") + what + " '" + text + "'");
    return out;
}

std::pair<std::size_t, std::size_t> parse_window(const std::string &text) {
    const auto parts = split_sizes(text, 'x', "--window");
    if (parts.size() != 2 || parts[0] == 0 || parts[1] == 0)
        throw UsageError("--window expects PxQ with P, Q >= 1, got '" + text + "'");
    return {parts[0], parts[1]};
}

std::vector<double> read_vector(const std::string &path, std::size_t channels, const char *what) {
    const Tensor4 t = to_real64(read_tensor(path));
    if (t.size() != channels)
        throw ShapeError(std::string(what) + " file holds " + std::to_string(t.size())
                + " values, input has " + std::to_string(channels) + " channels");
    return {t.data().begin(), t.data().end()};
}

struct ApplyArgs {
    std::string input, output, norm = "lcn";
    std::optional<std::size_t> c_group;
    std::optional<std::string> window, mode, gamma, beta, stats;
    std::optional<double> eps;
};

template <typename T>
int apply_typed(const Tensor<T> &x, const ApplyArgs &a, std::ostream &out) {
    const Dims &d = x.dims();
    AffineParams params = AffineParams::identity(d.c);
    if (a.gamma) params.gamma = read_vector(*a.gamma, d.c, "--gamma");
    if (a.beta) params.beta = read_vector(*a.beta, d.c, "--beta");
    const double eps = a.eps.value_or(1e-5);

    std::optional<NormResult<T>> result;
    Tensor<T> y;
    if (a.norm == "lcn") {
        LcnConfig cfg;
        cfg.c_group = a.c_group.value_or(cfg.c_group);
        if (a.window) std::tie(cfg.p, cfg.q) = parse_window(*a.window);
        if (a.mode) cfg.mode = parse_mode(*a.mode);
        cfg.eps = eps;
        result = lcn_forward(x, cfg, params);
    } else if (a.norm == "gn") {
        const std::size_t per_group = a.c_group.value_or(2);
        if (per_group == 0 || d.c % per_group != 0)
            throw GroupError("--c-group " + std::to_string(per_group) + " does not divide C = "
                    + std::to_string(d.c));
        result = gn_forward(x, d.c / per_group, eps, params);
    } else if (a.norm == "in") {
        result = in_forward(x, eps, params);
    } else if (a.norm == "ln") {
        result = ln_forward(x, eps, params);
    } else if (a.norm == "bn") {
        result = bn_forward(x, eps, params, nullptr, true);
    } else {
        LrnConfig cfg;
        if (a.window) {
            const auto [p, q] = parse_window(*a.window);
            if (p != q) throw UsageError("lrn windows are square, got " + *a.window);
            cfg.window = p;
        }
        y = affine(lrn_forward(x, cfg), params);
    }
    if (result) y = std::move(result->y);

    write_tensor(y, a.output);
    if (a.stats && result) {
        write_tensor(result->stats.mean, *a.stats + ".mean.lcnt");
        write_tensor(result->stats.var, *a.stats + ".var.lcnt");
    }
    out << "wrote " << a.output << " (" << d.b << "x" << d.c << "x" << d.h << "x" << d.w
        << ", " << a.norm << ")\n";
    return kOk;
}

int cmd_apply(const ApplyArgs &a, std::ostream &out) {
    const bool windowed = a.norm == "lcn" || a.norm == "lrn";
    if (a.window && !windowed) throw UsageError("--window only applies to lcn and lrn");
    if (a.mode && a.norm != "lcn") throw UsageError("--mode only applies to lcn");
    if (a.c_group && a.norm != "lcn" && a.norm != "gn")
        throw UsageError("--c-group only applies to lcn and gn");
    if (a.eps && a.norm == "lrn") throw UsageError("--eps does not apply to lrn");
    if (a.eps && !(*a.eps > 0.0)) throw UsageError("--eps must be > 0");
    if (a.stats && a.norm == "lrn") throw UsageError("lrn produces no statistics for --stats");
    if (a.mode && *a.mode != "sliding" && *a.mode != "tiled")
        throw UsageError("--mode must be sliding or tiled");
    if (a.window) parse_window(*a.window);

    const AnyTensor x = read_tensor(a.input);
    return std::visit([&](const auto &t) { return apply_typed(t, a, out); }, x);
}

void print_suite(const SuiteResult &r, std::ostream &out) {
    out << std::left << std::setw(15) << r.name << std::right << " cases=" << r.trials
        << " failures=" << r.failures;
    if (r.rejected) out << " rejected=" << r.rejected;
    out << " worst=" << std::scientific << std::setprecision(3) << r.worst_error
        << " tol=" << r.tolerance << std::defaultfloat << (r.passed() ? "  PASS" : "  FAIL")
        << '\n';
    if (!r.worst_case.empty()) out << "  worst case: " << r.worst_case << '\n';
    if (!r.passed())
        out << "  first failure: " << r.failing_case << "\n  reproduce: lcn check --suite "
            << r.name.substr(0, r.name.find('/')) << " --trials 1 --seed " << r.failing_seed
            << '\n';
}

int cmd_check(const std::string &suite, std::size_t trials, std::uint64_t seed,
        std::ostream &out) {
    if (trials == 0) throw UsageError("--trials must be >= 1");
    const bool all = suite == "all";
    std::vector<SuiteResult> results;
    if (all || suite == "oracle") {
        results.push_back(run_lcn_oracle_suite(trials, seed));
        results.push_back(run_family_oracle_suite(trials, seed));
    }
    if (all || suite == "reductions") results.push_back(run_reduction_suite(trials, seed));
    if (all || suite == "gradients") {
        results.push_back(run_gradient_suite(trials, seed));
        results.push_back(run_adjoint_suite(trials, seed));
    }
    if (all || suite == "shift") results.push_back(run_shift_suite(trials, seed));

    std::size_t failed = 0;
    for (const auto &r : results) {
        // The reproducer names the suite group, which is what --suite accepts.
        SuiteResult shown = r;
        if (shown.name == "adjoint") shown.name = "gradients/adjoint";
        print_suite(shown, out);
        failed += r.passed() ? 0 : 1;
    }
    out << (failed ? "FAILED: " : "OK: ") << results.size() - failed << "/" << results.size()
        << " suites passed\n";
    return failed ? kCheckFailed : kOk;
}

struct BenchArgs {
    std::string dims = "1x32x256x256";
    std::string windows = "7,31,127,227";
    std::size_t c_group = 2;
    std::string mode = "sliding";
    std::size_t reps = 5;
    std::optional<std::string> csv;
};

int cmd_bench(const BenchArgs &a, std::ostream &out) {
    BenchOptions options;
    const auto dims = split_sizes(a.dims, 'x', "--dims");
    if (dims.size() != 4 || std::count(dims.begin(), dims.end(), 0u) != 0)
        throw UsageError("--dims expects BxCxHxW with every extent >= 1");
    options.dims = {dims[0], dims[1], dims[2], dims[3]};
    if (a.windows.empty()) throw UsageError("--windows is empty");
    options.windows = split_sizes(a.windows, ',', "--windows");
    if (options.windows.empty()
            || std::count(options.windows.begin(), options.windows.end(), 0u) != 0)
        throw UsageError("--windows expects a comma list of sizes >= 1");
    if (a.mode != "sliding" && a.mode != "tiled")
        throw UsageError("--mode must be sliding or tiled");
    options.mode = parse_mode(a.mode);
    options.c_group = a.c_group;
    if (a.reps < 5) throw UsageError("--reps must be >= 5");
    options.reps = a.reps;
    validate_window(options.dims.c, options.c_group, 1, 1);

    std::ofstream file;
    if (a.csv) {
        file.open(*a.csv, std::ios::trunc);
        if (!file) throw IoError("cannot open " + *a.csv + " for writing");
    }

    const auto records = run_bench(options);
    if (a.csv) {
        write_csv(file, records);
        if (!file.flush()) throw IoError("write failed: " + *a.csv);
        out << "wrote " << records.size() << " records to " << *a.csv << '\n';
    } else {
        write_csv(out, records);
    }

    for (const auto &r : records)
        out << "# " << std::left << std::setw(13) << r.op << std::right << " window "
            << std::setw(4) << r.p << "  median " << std::fixed << std::setprecision(3)
            << double(r.median_ns) * 1e-6 << " ms" << std::defaultfloat << '\n';
    out << "# flatness " << kFastOp << " max/min = " << std::setprecision(4)
        << flatness_ratio(records, kFastOp) << '\n';
    if (std::count_if(records.begin(), records.end(), [](auto &r) { return r.op == kNaiveOp; }) > 1)
        out << "# growth " << kNaiveOp << " max/min = " << flatness_ratio(records, kNaiveOp)
            << '\n';
    return kOk;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app {"Local context normalization toolkit"};
    app.require_subcommand(1);
    std::size_t threads = 0;
    app.add_option("--threads", threads, "kernel threads (default: all cores)");

    ApplyArgs apply;
    auto *sub_apply = app.add_subcommand("apply", "normalize an LCNT tensor file");
    sub_apply->add_option("--input", apply.input, "input LCNT file")->required();
    sub_apply->add_option("--output", apply.output, "output LCNT file")->required();
    sub_apply->add_option("--norm", apply.norm, "lcn, gn, in, ln, bn or lrn")
            ->check(CLI::IsMember({"lcn", "gn", "in", "ln", "bn", "lrn"}));
    sub_apply->add_option("--c-group", apply.c_group, "channels per group (lcn, gn)");
    sub_apply->add_option("--window", apply.window, "PxQ spatial window (lcn, lrn)");
    sub_apply->add_option("--mode", apply.mode, "sliding or tiled (lcn)");
    sub_apply->add_option("--eps", apply.eps, "variance epsilon");
    sub_apply->add_option("--gamma", apply.gamma, "LCNT file with C scales");
    sub_apply->add_option("--beta", apply.beta, "LCNT file with C shifts");
    sub_apply->add_option("--stats", apply.stats, "write PREFIX.mean.lcnt / PREFIX.var.lcnt");
    sub_apply->add_option("--threads", threads, "kernel threads");

    std::string suite = "all";
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    auto *sub_check = app.add_subcommand("check", "run the randomized property suites");
    sub_check->add_option("--suite", suite, "oracle, reductions, gradients, shift or all")
            ->check(CLI::IsMember({"oracle", "reductions", "gradients", "shift", "all"}));
    sub_check->add_option("--trials", trials, "random cases per suite");
    sub_check->add_option("--seed", seed, "base seed");
    sub_check->add_option("--threads", threads, "kernel threads");

    BenchArgs bench;
    auto *sub_bench = app.add_subcommand("bench", "time lcn against window size");
    sub_bench->add_option("--dims", bench.dims, "BxCxHxW");
    sub_bench->add_option("--windows", bench.windows, "comma list of window sides");
    sub_bench->add_option("--c-group", bench.c_group, "channels per group");
    sub_bench->add_option("--mode", bench.mode, "sliding or tiled");
    sub_bench->add_option("--reps", bench.reps, "timed repetitions (>= 5)");
    sub_bench->add_option("--csv", bench.csv, "CSV output path (default: stdout)");
    sub_bench->add_option("--threads", threads, "kernel threads");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "lcn: " << e.what() << '\n';
        return kUsage;
    }

    set_num_threads(threads);
    try {
        if (*sub_apply) return cmd_apply(apply, out);
        if (*sub_check) return cmd_check(suite, trials, seed, out);
        return cmd_bench(bench, out);
    } catch (const UsageError &e) {
        err << "lcn: " << e.what() << '\n';
        return kUsage;
    } catch (const Error &e) {
        err << "lcn: " << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::io: return kFileError;
        case ErrorKind::shape: return kShapeError;
        case ErrorKind::other: break;
        }
        return kCheckFailed;
    } catch (const std::exception &e) {
        err << "lcn: " << e.what() << '\n';
        return kCheckFailed;
    }
}

} // namespace lcn::cli
