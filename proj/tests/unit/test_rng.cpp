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

#include <doctest.h>

#include <cmath>
#include <future>
#include <vector>

#include "avsr/rng.hpp"

using namespace avsr;

TEST_CASE("same seed produces the same stream across instances") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("child seeds are stable and distinct per key") {
  CHECK(child_seed(7, "clip_0001") == child_seed(7, "clip_0001"));
  CHECK(child_seed(7, "clip_0001") != child_seed(7, "clip_0002"));
  CHECK(child_seed(7, "clip_0001") != child_seed(8, "clip_0001"));
}

TEST_CASE("parallel workers with hash-derived seeds reproduce serial draws") {
  std::vector<std::uint64_t> serial(8);
  for (int w = 0; w < 8; ++w) {
    Rng rng(child_seed(3, "worker_" + std::to_string(w)));
    serial[static_cast<std::size_t>(w)] = rng.next_u64();
  }
  std::vector<std::future<std::uint64_t>> futs;
  for (int w = 0; w < 8; ++w)
    futs.push_back(std::async(std::launch::async, [w]() {
      Rng rng(child_seed(3, "worker_" + std::to_string(w)));
      return rng.next_u64();
    }));
  for (int w = 0; w < 8; ++w)
    CHECK(futs[static_cast<std::size_t>(w)].get() == serial[static_cast<std::size_t>(w)]);
}

TEST_CASE("uniform stays in range and covers it") {
  Rng rng(5);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("normal draws have roughly standard moments") {
  Rng rng(11);
  const int n = 50000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("uniform_int is inclusive on both ends") {
  Rng rng(9);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.uniform_int(2, 5);
    CHECK(v >= 2);
    CHECK(v <= 5);
    saw_lo = saw_lo || v == 2;
    saw_hi = saw_hi || v == 5;
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
}
