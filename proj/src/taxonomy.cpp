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

#include "avsr/taxonomy.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "avsr/fsutil.hpp"

namespace avsr {

using ordered_json = nlohmann::ordered_json;

const char* to_string(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::circle: return "circle";
    case ShapeKind::square: return "square";
    case ShapeKind::triangle: return "triangle";
    case ShapeKind::bar: return "bar";
  }
  return "?";
}

ShapeKind shape_kind_from_string(const std::string& s) {
  if (s == "circle") return ShapeKind::circle;
  if (s == "square") return ShapeKind::square;
  if (s == "triangle") return ShapeKind::triangle;
  if (s == "bar") return ShapeKind::bar;
  throw ValidationError("unknown shape: " + s);
}

CategoryTaxonomy::CategoryTaxonomy(std::vector<std::string> categories,
                                   std::vector<ObjectClassSpec> classes)
    : categories_(std::move(categories)), classes_(std::move(classes)) {
  validate();
}

const ObjectClassSpec& CategoryTaxonomy::by_name(const std::string& class_name) const {
  for (const auto& c : classes_)
    if (c.class_name == class_name) return c;
  throw ContractError("unknown object class: " + class_name);
}

bool CategoryTaxonomy::contains(const std::string& class_name) const {
  return std::any_of(classes_.begin(), classes_.end(),
                     [&](const auto& c) { return c.class_name == class_name; });
}

std::vector<const ObjectClassSpec*> CategoryTaxonomy::in_category(
    const std::string& category, bool include_held_out) const {
  std::vector<const ObjectClassSpec*> out;
  for (const auto& c : classes_)
    if (c.super_category == category && (include_held_out || !c.held_out)) out.push_back(&c);
  return out;
}

std::vector<const ObjectClassSpec*> CategoryTaxonomy::outside_categories(
    const std::vector<std::string>& excluded, bool include_held_out) const {
  std::vector<const ObjectClassSpec*> out;
  for (const auto& c : classes_) {
    if (std::find(excluded.begin(), excluded.end(), c.super_category) != excluded.end()) continue;
    if (!include_held_out && c.held_out) continue;
    out.push_back(&c);
  }
  return out;
}

std::vector<const ObjectClassSpec*> CategoryTaxonomy::visible_classes() const {
  std::vector<const ObjectClassSpec*> out;
  for (const auto& c : classes_)
    if (!c.held_out) out.push_back(&c);
  return out;
}

std::vector<const ObjectClassSpec*> CategoryTaxonomy::held_out_classes() const {
  std::vector<const ObjectClassSpec*> out;
  for (const auto& c : classes_)
    if (c.held_out) out.push_back(&c);
  return out;
}

void CategoryTaxonomy::validate() const {
  if (categories_.size() != 4) throw ValidationError("taxonomy must have exactly 4 categories");
  std::set<std::string> cat_set(categories_.begin(), categories_.end());
  if (cat_set.size() != 4) throw ValidationError("duplicate category names");

  std::set<std::string> names;
  std::map<std::string, std::set<int>> category_bins;
  for (const auto& c : classes_) {
    if (!cat_set.count(c.super_category))
      throw ValidationError("class " + c.class_name + " names unknown category " +
                            c.super_category);
    if (!names.insert(c.class_name).second)
      throw ValidationError("object class appears in more than one category: " + c.class_name);
    if (c.signature.bins.empty())
      throw ValidationError("class " + c.class_name + " has an empty signature");
    for (int b : c.signature.bins) {
      if (b < 0) throw ValidationError("negative signature bin for class " + c.class_name);
      category_bins[c.super_category].insert(b);
    }
  }
  // Signature bins must not cross category boundaries.
  for (auto it = category_bins.begin(); it != category_bins.end(); ++it) {
    for (auto jt = std::next(it); jt != category_bins.end(); ++jt) {
      std::vector<int> overlap;
      std::set_intersection(it->second.begin(), it->second.end(), jt->second.begin(),
                            jt->second.end(), std::back_inserter(overlap));
      if (!overlap.empty())
        throw ValidationError("categories " + it->first + " and " + jt->first +
                              " share signature bins");
    }
  }
}

void CategoryTaxonomy::save_json_file(const std::string& path) const {
  ordered_json j;
  j["categories"] = categories_;
  ordered_json arr = ordered_json::array();
  for (const auto& c : classes_) {
    ordered_json e;
    e["class_name"] = c.class_name;
    e["super_category"] = c.super_category;
    e["shape"] = to_string(c.shape);
    e["color"] = {c.color[0], c.color[1], c.color[2]};
    e["bins"] = c.signature.bins;
    e["envelope_id"] = c.signature.envelope_id;
    e["amplitude"] = c.signature.amplitude;
    e["held_out"] = c.held_out;
    arr.push_back(e);
  }
  j["classes"] = arr;
  write_file_bytes(path, j.dump(2) + "\n");
}

CategoryTaxonomy CategoryTaxonomy::load_json_file(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw FileParseError("taxonomy parse error in " + path + ": " + e.what());
  }
  std::vector<std::string> categories = j.at("categories").get<std::vector<std::string>>();
  std::vector<ObjectClassSpec> classes;
  for (const auto& e : j.at("classes")) {
    ObjectClassSpec c;
    c.class_name = e.at("class_name").get<std::string>();
    c.super_category = e.at("super_category").get<std::string>();
    c.shape = shape_kind_from_string(e.at("shape").get<std::string>());
    const auto col = e.at("color").get<std::vector<int>>();
    c.color = {static_cast<std::uint8_t>(col[0]), static_cast<std::uint8_t>(col[1]),
               static_cast<std::uint8_t>(col[2])};
    c.signature.bins = e.at("bins").get<std::vector<int>>();
    c.signature.envelope_id = e.at("envelope_id").get<int>();
    c.signature.amplitude = e.at("amplitude").get<double>();
    c.held_out = e.at("held_out").get<bool>();
    classes.push_back(std::move(c));
  }
  return CategoryTaxonomy(std::move(categories), std::move(classes));
}

CategoryTaxonomy default_taxonomy() {
  std::vector<std::string> categories = {"music", "human", "animal", "machine"};
  std::vector<ObjectClassSpec> classes;

  struct Entry {
    const char* name;
    ShapeKind shape;
    Rgb color;
    std::vector<int> rel_bins;  // within the category's 4-bin band
    int envelope;
    bool held_out;
  };
  // Per category band [4k, 4k+4): scene classes use 2-bin subsets of the
  // first three bins; the held-out class owns the fourth bin alone.
  // Each category owns a hue family (warm / blue / green / purple) with the
  // classes inside it still clearly distinct, mirroring how semantically
  // related sound sources tend to look alike; held-out classes never appear
  // in scenes.
  const std::vector<std::vector<Entry>> per_category = {
      {{"chime", ShapeKind::circle, {255, 190, 30}, {0, 1}, 3, false},
       {"strum", ShapeKind::triangle, {250, 110, 30}, {0, 2}, 1, false},
       {"organ", ShapeKind::bar, {200, 40, 30}, {1, 2}, 0, false},
       {"bell", ShapeKind::circle, {255, 230, 150}, {3}, 0, true}},
      {{"speech", ShapeKind::square, {40, 110, 255}, {0, 1}, 2, false},
       {"laugh", ShapeKind::circle, {40, 215, 235}, {0, 2}, 3, false},
       {"whistle", ShapeKind::triangle, {120, 150, 250}, {1, 2}, 0, false},
       {"cough", ShapeKind::square, {180, 215, 255}, {3}, 1, true}},
      {{"bark", ShapeKind::triangle, {60, 200, 60}, {0, 1}, 1, false},
       {"meow", ShapeKind::square, {20, 130, 90}, {0, 2}, 2, false},
       {"chirp", ShapeKind::circle, {175, 235, 55}, {1, 2}, 3, false},
       {"bleat", ShapeKind::triangle, {210, 255, 190}, {3}, 2, true}},
      {{"siren", ShapeKind::bar, {250, 60, 190}, {0, 1}, 0, false},
       {"engine", ShapeKind::square, {150, 140, 170}, {0, 2}, 1, false},
       {"drill", ShapeKind::circle, {140, 60, 220}, {1, 2}, 2, false},
       {"alarm", ShapeKind::bar, {245, 200, 245}, {3}, 3, true}},
  };

  for (std::size_t k = 0; k < per_category.size(); ++k) {
    for (const auto& e : per_category[k]) {
      ObjectClassSpec c;
      c.class_name = e.name;
      c.super_category = categories[k];
      c.shape = e.shape;
      c.color = e.color;
      for (int rb : e.rel_bins) c.signature.bins.push_back(static_cast<int>(4 * k) + rb);
      c.signature.envelope_id = e.envelope;
      c.held_out = e.held_out;
      classes.push_back(std::move(c));
    }
  }
  return CategoryTaxonomy(std::move(categories), std::move(classes));
}

}  // namespace avsr
