// Copyright 2026 The snnforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SNNFORGE_PARALLEL_HPP_
#define SNNFORGE_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace snnforge {

// Worker cap: SNNFORGE_THREADS if set and positive, else the hardware
// concurrency (at least 1).
std::size_t worker_count();

// Splits [0, n) into at most worker_count() contiguous chunks and runs
// fn(chunk_index, begin, end) for each, in parallel when more than one worker
// is available. Callers write per-item results to disjoint slots and reduce
// afterwards in index order, so output never depends on the worker count.
void parallel_chunks(
    std::size_t n,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace snnforge

#endif  // SNNFORGE_PARALLEL_HPP_
