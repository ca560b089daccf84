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

#include "avsr/scene.hpp"

#include <cmath>

namespace avsr {

namespace {

bool inside_shape(ShapeKind shape, int size, int dx, int dy) {
  switch (shape) {
    case ShapeKind::circle:
      return dx * dx + dy * dy <= size * size;
    case ShapeKind::square:
      return std::abs(dx) <= size && std::abs(dy) <= size;
    case ShapeKind::triangle: {
      // Apex-up isoceles triangle: apex at dy = -size, base at dy = +size.
      if (dy < -size || dy > size) return false;
      const double t = static_cast<double>(dy + size) / (2.0 * size);
      return std::abs(dx) <= t * size + 1e-9;
    }
    case ShapeKind::bar:
      return std::abs(dx) <= 2 * size && 2 * std::abs(dy) <= size;
  }
  return false;
}

}  // namespace

Extent shape_extent(ShapeKind shape, int size) {
  switch (shape) {
    case ShapeKind::circle: return {size, size};
    case ShapeKind::square: return {size, size};
    case ShapeKind::triangle: return {size, size};
    case ShapeKind::bar: return {2 * size, (size + 1) / 2};
  }
  return {size, size};
}

RenderResult gen_scene(const SceneSpec& spec, const CategoryTaxonomy& taxonomy, int image_size) {
  if (image_size < 1) throw ContractError("image_size must be >= 1");
  for (int idx : spec.sounding) {
    if (idx < 0 || idx >= static_cast<int>(spec.placements.size()))
      throw ContractError("sounding index out of range in clip " + spec.clip_id);
  }

  // Topmost-owner buffer: -1 = background.
  std::vector<int> owner(static_cast<std::size_t>(image_size) * image_size, -1);
  for (std::size_t p = 0; p < spec.placements.size(); ++p) {
    const auto& pl = spec.placements[p];
    if (pl.size < 1) throw GenerationError("non-positive object size in clip " + spec.clip_id);
    const auto& cls = taxonomy.by_name(pl.class_name);
    const Extent ext = shape_extent(cls.shape, pl.size);
    if (pl.cx - ext.x < 0 || pl.cx + ext.x >= image_size || pl.cy - ext.y < 0 ||
        pl.cy + ext.y >= image_size)
      throw GenerationError("object '" + pl.class_name + "' does not fit in frame of clip " +
                            spec.clip_id);
    for (int y = pl.cy - ext.y; y <= pl.cy + ext.y; ++y) {
      for (int x = pl.cx - ext.x; x <= pl.cx + ext.x; ++x) {
        if (inside_shape(cls.shape, pl.size, x - pl.cx, y - pl.cy))
          owner[static_cast<std::size_t>(y) * image_size + x] = static_cast<int>(p);
      }
    }
  }

  RenderResult out;
  out.frame = Image(image_size, image_size, spec.background);
  out.masks.assign(spec.placements.size(), Mask(image_size, image_size));
  for (int y = 0; y < image_size; ++y) {
    for (int x = 0; x < image_size; ++x) {
      const int p = owner[static_cast<std::size_t>(y) * image_size + x];
      if (p < 0) continue;
      out.frame.set(y, x, taxonomy.by_name(spec.placements[p].class_name).color);
      out.masks[p].at(y, x) = 1;
    }
  }
  return out;
}

Mask sounding_mask(const SceneSpec& spec, const RenderResult& render) {
  if (render.masks.empty()) {
    return Mask(render.frame.height, render.frame.width);
  }
  Mask m(render.frame.height, render.frame.width);
  for (int idx : spec.sounding) {
    const Mask& part = render.masks[idx];
    for (std::size_t i = 0; i < m.bits.size(); ++i) m.bits[i] |= part.bits[i];
  }
  return m;
}

}  // namespace avsr
