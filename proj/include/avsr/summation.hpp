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

#ifndef AVSR_SUMMATION_HPP
#define AVSR_SUMMATION_HPP

#include <cstddef>
#include <span>

namespace avsr {

// Kahan compensated accumulator. Metric means use this so that chunked or
// reordered accumulation stays within ~1e-12 of the sequential result.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = sum_ + y;
    c_ = (t - sum_) - y;
    sum_ = t;
  }

  void merge(const KahanSum& other) {
    add(other.sum_);
    add(-other.c_);
  }

  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

inline double kahan_mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

}  // namespace avsr

#endif  // AVSR_SUMMATION_HPP
