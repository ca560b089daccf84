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

#ifndef AVSR_SCENE_HPP
#define AVSR_SCENE_HPP

#include <string>
#include <vector>

#include "avsr/image.hpp"
#include "avsr/mask.hpp"
#include "avsr/taxonomy.hpp"

namespace avsr {

// One object instance. size is the shape's scale parameter: circle radius,
// square/triangle half-extent, bar half-height (bars are 4x wider than tall).
struct Placement {
  std::string class_name;
  int cx = 0;
  int cy = 0;
  int size = 0;
};

// Placements are drawn in order; later entries occlude earlier ones.
struct SceneSpec {
  std::string clip_id;
  std::string subset;                 // "s4" | "ms3"
  std::vector<Placement> placements;
  std::vector<int> sounding;          // indices into placements
  Rgb background = {18, 18, 24};
};

struct RenderResult {
  Image frame;
  std::vector<Mask> masks;  // visible pixels per placement
};

// Integer rasterization, no anti-aliasing; deterministic for a given spec.
// Throws GenerationError when a shape does not fit inside the frame.
RenderResult gen_scene(const SceneSpec& spec, const CategoryTaxonomy& taxonomy, int image_size);

// Bounding half-extents of a shape, used for fit checks and jitter clamping.
struct Extent {
  int x = 0;
  int y = 0;
};
Extent shape_extent(ShapeKind shape, int size);

// Union of the sounding placements' visible masks.
Mask sounding_mask(const SceneSpec& spec, const RenderResult& render);

}  // namespace avsr

#endif  // AVSR_SCENE_HPP
