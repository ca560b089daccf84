// Copyright 2026 The avsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AVSR_PARALLEL_HPP
#define AVSR_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace avsr {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static partition of [0, n) over worker threads. Results must not depend on
// the partition; callers write to per-index buffers and reduce in index order
// afterwards, so outputs are identical for any thread count.
inline void parallel_for(int n, int num_threads, const std::function<void(int)>& fn) {
  num_threads = std::min(resolve_threads(num_threads), n);
  if (num_threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(num_threads));
  for (int t = 0; t < num_threads; ++t) {
    workers.emplace_back([&, t]() {
      try {
        for (int i = t; i < n; i += num_threads) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace avsr

#endif  // AVSR_PARALLEL_HPP
