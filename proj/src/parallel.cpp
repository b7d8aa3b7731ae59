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

#include "lcn/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace lcn {

namespace {
std::atomic<std::size_t> g_threads {0};
}

void set_num_threads(std::size_t n) {
    g_threads.store(n);
}

std::size_t num_threads() {
    const std::size_t n = g_threads.load();
    if (n != 0) return n;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn) {
    const std::size_t nthr = std::min(num_threads(), n);
    if (nthr <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthr);
    pool.reserve(nthr);
    for (std::size_t t = 0; t < nthr; ++t) {
        const std::size_t begin = n * t / nthr, end = n * (t + 1) / nthr;
        pool.emplace_back([&, t, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i)
                    fn(i);
            } catch (...) { errors[t] = std::current_exception(); }
        });
    }
    for (auto &th : pool)
        th.join();
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace lcn
