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

#ifndef LCN_PARALLEL_HPP
#define LCN_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace lcn {

// Kernel thread count. 0 restores the default (hardware concurrency).
void set_num_threads(std::size_t n);
std::size_t num_threads();

// Runs fn(i) for i in [0, n), split into contiguous chunks across threads.
// Callers only write disjoint outputs from fn, so results never depend on
// the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn);

} // namespace lcn

#endif
