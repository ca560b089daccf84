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

#ifndef AVSR_TAXONOMY_HPP
#define AVSR_TAXONOMY_HPP

#include <string>
#include <vector>

#include "avsr/errors.hpp"
#include "avsr/image.hpp"

namespace avsr {

enum class ShapeKind { circle, square, triangle, bar };

const char* to_string(ShapeKind shape);
ShapeKind shape_kind_from_string(const std::string& s);

// Frequency-bin footprint plus a temporal envelope. Envelope ids:
// 0 constant, 1 rising ramp, 2 falling ramp, 3 half-sine pulse, 4 all-zero.
struct AudioSignature {
  std::vector<int> bins;
  int envelope_id = 0;
  double amplitude = 1.0;
};

struct ObjectClassSpec {
  std::string class_name;
  std::string super_category;
  ShapeKind shape = ShapeKind::circle;
  Rgb color = {255, 255, 255};
  AudioSignature signature;
  // Held-out classes exist in the taxonomy but never appear in scenes or
  // training audio; their signature bins are reserved for generalization
  // tests against sounds never heard in training.
  bool held_out = false;
};

// Four super-categories, four object classes each. Signature bins of classes
// in different super-categories never overlap, which keeps off-screen
// replacement sounds spectrally separable from every visible object.
class CategoryTaxonomy {
 public:
  CategoryTaxonomy() = default;
  CategoryTaxonomy(std::vector<std::string> categories, std::vector<ObjectClassSpec> classes);

  const std::vector<std::string>& categories() const { return categories_; }
  const std::vector<ObjectClassSpec>& classes() const { return classes_; }

  const ObjectClassSpec& by_name(const std::string& class_name) const;
  bool contains(const std::string& class_name) const;

  std::vector<const ObjectClassSpec*> in_category(const std::string& category,
                                                  bool include_held_out = false) const;
  std::vector<const ObjectClassSpec*> outside_categories(
      const std::vector<std::string>& excluded, bool include_held_out = false) const;
  std::vector<const ObjectClassSpec*> visible_classes() const;  // not held out
  std::vector<const ObjectClassSpec*> held_out_classes() const;

  void validate() const;

  void save_json_file(const std::string& path) const;
  static CategoryTaxonomy load_json_file(const std::string& path);

 private:
  std::vector<std::string> categories_;
  std::vector<ObjectClassSpec> classes_;
};

// The stock 4x4 taxonomy used by the corpus generator: 16 frequency bins
// partitioned 4 per category; per category, three scene classes take 2-bin
// subsets of the band's first three bins and one held-out class takes the
// band's final bin.
CategoryTaxonomy default_taxonomy();

}  // namespace avsr

#endif  // AVSR_TAXONOMY_HPP
