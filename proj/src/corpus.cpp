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

#include "avsr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>

#include <json.hpp>

#include "avsr/audio_synth.hpp"
#include "avsr/fsutil.hpp"
#include "avsr/png_io.hpp"
#include "avsr/rng.hpp"
#include "avsr/scene.hpp"
#include "avsr/spectrogram.hpp"

namespace avsr {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

SplitCounts split_counts(int total_clips) {
  if (total_clips < 1) throw ContractError("clip count must be >= 1");
  SplitCounts s;
  s.val = static_cast<int>(std::ceil(0.15 * total_clips));
  s.test = s.val;
  s.train = total_clips - s.val - s.test;
  if (s.train < 1) throw ContractError("clip count too small to form train/val/test splits");
  return s;
}

void CorpusMeta::save_json_file(const std::string& path) const {
  ordered_json j;
  j["subset"] = subset;
  j["frames_per_clip"] = frames_per_clip;
  j["image_size"] = image_size;
  j["spec_frames"] = spec_frames;
  j["spec_bins"] = spec_bins;
  j["seed"] = seed;
  write_file_bytes(path, j.dump(2) + "\n");
}

CorpusMeta CorpusMeta::load_json_file(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw FileParseError("corpus meta parse error in " + path + ": " + e.what());
  }
  CorpusMeta m;
  m.subset = j.at("subset").get<std::string>();
  m.frames_per_clip = j.at("frames_per_clip").get<int>();
  m.image_size = j.at("image_size").get<int>();
  m.spec_frames = j.at("spec_frames").get<int>();
  m.spec_bins = j.at("spec_bins").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

namespace {

std::string zero_pad(int v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, v);
  return buf;
}

// Draws the clip's object classes. Every placed object is a sound source, so
// positive pairs keep the sounding mask predictable from the frame alone and
// a positives-only model is free to ignore audio entirely; the negative
// conditions are what expose that shortcut. The objects span at most three
// categories so an off-screen category always remains available.
struct ClipCast {
  std::vector<const ObjectClassSpec*> sounding;
};

ClipCast draw_cast(const CategoryTaxonomy& taxonomy, const std::string& subset, Rng& rng) {
  const auto pool = taxonomy.visible_classes();
  ClipCast cast;
  std::set<std::string> used_classes;
  std::set<std::string> used_categories;

  auto try_add = [&](std::vector<const ObjectClassSpec*>& dst) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto* c = pool[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
      if (used_classes.count(c->class_name)) continue;
      if (!used_categories.count(c->super_category) && used_categories.size() >= 3) continue;
      used_classes.insert(c->class_name);
      used_categories.insert(c->super_category);
      dst.push_back(c);
      return true;
    }
    return false;
  };

  const int n_sounding = subset == "s4" ? 1 : static_cast<int>(rng.uniform_int(1, 3));
  for (int i = 0; i < n_sounding; ++i) try_add(cast.sounding);
  return cast;
}

Placement draw_placement(const ObjectClassSpec& cls, int image_size, int jitter_margin,
                         Rng& rng) {
  Placement p;
  p.class_name = cls.class_name;
  p.size = cls.shape == ShapeKind::bar ? static_cast<int>(rng.uniform_int(9, 14))
                                       : static_cast<int>(rng.uniform_int(12, 20));
  const Extent ext = shape_extent(cls.shape, p.size);
  const int lo_x = ext.x + jitter_margin;
  const int hi_x = image_size - 1 - ext.x - jitter_margin;
  const int lo_y = ext.y + jitter_margin;
  const int hi_y = image_size - 1 - ext.y - jitter_margin;
  if (lo_x > hi_x || lo_y > hi_y)
    throw GenerationError("image too small for object '" + cls.class_name + "'");
  p.cx = static_cast<int>(rng.uniform_int(lo_x, hi_x));
  p.cy = static_cast<int>(rng.uniform_int(lo_y, hi_y));
  return p;
}

constexpr int kJitterRange = 2;

}  // namespace

CorpusSummary generate_corpus(const CorpusOptions& options, const std::string& out_dir) {
  if (options.subset != "s4" && options.subset != "ms3")
    throw ContractError("subset must be s4 or ms3");
  if (options.frames_per_clip < 1) throw ContractError("frames_per_clip must be >= 1");
  if (options.image_size < 32 || options.image_size % 32 != 0)
    throw ContractError("image_size must be a positive multiple of 32");

  const int total = options.effective_clips();
  const SplitCounts counts = split_counts(total);
  const CategoryTaxonomy taxonomy = default_taxonomy();

  fs::create_directories(out_dir);
  taxonomy.save_json_file((fs::path(out_dir) / "taxonomy.json").string());
  CorpusMeta meta{options.subset, options.frames_per_clip, options.image_size,
                  options.spec_frames, options.spec_bins, options.seed};
  meta.save_json_file((fs::path(out_dir) / "corpus_meta.json").string());

  CorpusSummary summary;
  summary.subset = options.subset;
  summary.clips_total = total;
  summary.splits = counts;
  summary.frames_per_clip = options.frames_per_clip;
  summary.scene_classes = static_cast<int>(taxonomy.visible_classes().size());

  const struct {
    const char* name;
    int n;
  } splits[3] = {{"train", counts.train}, {"val", counts.val}, {"test", counts.test}};

  for (const auto& split : splits) {
    const fs::path split_dir = fs::path(out_dir) / split.name;
    fs::create_directories(split_dir / "frames");
    fs::create_directories(split_dir / "masks");
    fs::create_directories(split_dir / "audio");

    std::vector<SampleRecord> records;
    for (int i = 0; i < split.n; ++i) {
      const std::string clip_id = options.subset + "_" + split.name + "_" + zero_pad(i, 4);
      const std::uint64_t clip_seed = child_seed(options.seed, clip_id);
      Rng rng(clip_seed);

      const ClipCast cast = draw_cast(taxonomy, options.subset, rng);
      for (const auto* cls : cast.sounding)
        summary.sounding_clips_per_category[cls->super_category] += 1;

      SceneSpec scene;
      scene.clip_id = clip_id;
      scene.subset = options.subset;
      scene.background = {static_cast<std::uint8_t>(rng.uniform_int(10, 40)),
                          static_cast<std::uint8_t>(rng.uniform_int(10, 40)),
                          static_cast<std::uint8_t>(rng.uniform_int(10, 40))};
      for (const auto* cls : cast.sounding) {
        scene.placements.push_back(
            draw_placement(*cls, options.image_size, kJitterRange, rng));
        scene.sounding.push_back(static_cast<int>(scene.placements.size()) - 1);
      }

      std::vector<const ObjectClassSpec*> sounding_specs = cast.sounding;
      std::vector<std::string> object_names;
      for (const auto& p : scene.placements) object_names.push_back(p.class_name);
      std::vector<std::string> sounding_names;
      for (const auto* c : cast.sounding) sounding_names.push_back(c->class_name);

      for (int t = 0; t < options.frames_per_clip; ++t) {
        SceneSpec frame_scene = scene;
        Rng jitter_rng(child_seed(clip_seed, "jitter_" + std::to_string(t)));
        for (auto& p : frame_scene.placements) {
          p.cx += static_cast<int>(jitter_rng.uniform_int(-kJitterRange, kJitterRange));
          p.cy += static_cast<int>(jitter_rng.uniform_int(-kJitterRange, kJitterRange));
        }
        const RenderResult render = gen_scene(frame_scene, taxonomy, options.image_size);
        const Mask gt = sounding_mask(frame_scene, render);

        const std::string stem = clip_id + "_f" + std::to_string(t);
        const std::string frame_rel = "frames/" + stem + ".png";
        const std::string mask_rel = "masks/" + stem + "_pos.png";
        const std::string audio_rel = "audio/" + stem + "_positive.avsr";
        save_image_png(render.frame, (split_dir / frame_rel).string());
        save_mask_png(gt, (split_dir / mask_rel).string());
        Rng floor_rng(child_seed(clip_seed, "floor_" + std::to_string(t)));
        const double floor_amp =
            floor_rng.uniform(kFloorAmplitudeMin, kFloorAmplitudeMax);
        const Spectrogram audio = gen_positive_audio(
            sounding_specs, options.spec_frames, options.spec_bins,
            child_seed(clip_seed, "audio_" + std::to_string(t)), floor_amp);
        save_spectrogram(audio, (split_dir / audio_rel).string());

        SampleRecord rec;
        rec.sample_id = stem + "_positive";
        rec.clip_id = clip_id;
        rec.frame_index = t;
        rec.subset = options.subset;
        rec.split = split.name;
        rec.frame_path = frame_rel;
        rec.gt_mask_path = mask_rel;
        rec.pos_mask_path = mask_rel;
        rec.audio_path = audio_rel;
        rec.object_classes = object_names;
        rec.sounding_classes = sounding_names;
        rec.condition.kind = ConditionKind::positive;
        records.push_back(std::move(rec));
      }
    }
    save_manifest(records, (split_dir / "clips.jsonl").string());
  }
  return summary;
}

namespace {

std::string rel_to(const fs::path& target, const fs::path& base) {
  return fs::relative(target, base).generic_string();
}

int condition_rank(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::positive: return 0;
    case ConditionKind::silence: return 1;
    case ConditionKind::noise: return 2;
    case ConditionKind::offscreen: return 3;
  }
  return 4;
}

void sort_records(std::vector<SampleRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const SampleRecord& a, const SampleRecord& b) {
                     if (a.clip_id != b.clip_id) return a.clip_id < b.clip_id;
                     if (a.frame_index != b.frame_index) return a.frame_index < b.frame_index;
                     return condition_rank(a.condition.kind) < condition_rank(b.condition.kind);
                   });
}

// Shared all-zero assets, written once per bench directory.
struct BenchAssets {
  std::string empty_mask_rel;
  std::string silence_rel;
};

BenchAssets ensure_assets(const std::string& out_dir, const CorpusMeta& meta) {
  const fs::path assets = fs::path(out_dir) / "assets";
  fs::create_directories(assets);
  BenchAssets a;
  a.empty_mask_rel = "assets/empty.png";
  a.silence_rel = "assets/silence.avsr";
  const fs::path mask_path = fs::path(out_dir) / a.empty_mask_rel;
  if (!fs::exists(mask_path))
    save_mask_png(Mask(meta.image_size, meta.image_size), mask_path.string());
  const fs::path silence_path = fs::path(out_dir) / a.silence_rel;
  if (!fs::exists(silence_path))
    save_spectrogram(make_silence(meta.spec_frames, meta.spec_bins), silence_path.string());
  return a;
}

std::string stem_of(const SampleRecord& rec) {
  return rec.clip_id + "_f" + std::to_string(rec.frame_index);
}

// Rewrites a positive base record's paths relative to the bench directory.
SampleRecord rebase_positive(const SampleRecord& base, const fs::path& split_dir,
                             const fs::path& out_dir) {
  SampleRecord rec = base;
  rec.frame_path = rel_to(split_dir / base.frame_path, out_dir);
  rec.gt_mask_path = rel_to(split_dir / base.gt_mask_path, out_dir);
  rec.pos_mask_path = rel_to(split_dir / base.pos_mask_path, out_dir);
  rec.audio_path = rel_to(split_dir / base.audio_path, out_dir);
  return rec;
}

SampleRecord make_negative(const SampleRecord& positive_rebased, ConditionKind kind,
                           const std::string& audio_rel, const BenchAssets& assets,
                           const std::optional<std::string>& offscreen_category) {
  SampleRecord rec = positive_rebased;
  const std::string stem = stem_of(rec);
  rec.sample_id = stem + "_" + to_string(kind);
  rec.gt_mask_path = assets.empty_mask_rel;
  rec.audio_path = audio_rel;
  rec.sounding_classes.clear();
  rec.condition.kind = kind;
  rec.condition.offscreen_source_category = offscreen_category;
  return rec;
}

std::vector<std::string> record_categories(const SampleRecord& rec,
                                           const CategoryTaxonomy& taxonomy) {
  std::set<std::string> cats;
  for (const auto& name : rec.object_classes) cats.insert(taxonomy.by_name(name).super_category);
  return {cats.begin(), cats.end()};
}

}  // namespace

std::vector<SampleRecord> build_eval_manifest(const std::vector<SampleRecord>& base_positive,
                                              const CategoryTaxonomy& taxonomy,
                                              std::uint64_t seed, const CorpusMeta& meta,
                                              const std::string& split_dir,
                                              const std::string& out_dir) {
  const BenchAssets assets = ensure_assets(out_dir, meta);
  std::vector<SampleRecord> out;
  if (base_positive.empty()) return out;
  const std::string split = base_positive.front().split;
  const fs::path audio_dir = fs::path(out_dir) / "audio" / split;
  fs::create_directories(audio_dir);

  for (const auto& base : base_positive) {
    if (base.condition.kind != ConditionKind::positive)
      throw ContractError("eval manifests are built from positive clip records");
    const SampleRecord pos = rebase_positive(base, split_dir, out_dir);
    const std::string stem = stem_of(base);
    out.push_back(pos);

    out.push_back(make_negative(pos, ConditionKind::silence, assets.silence_rel, assets, {}));

    const std::string noise_rel = "audio/" + split + "/" + stem + "_noise.avsr";
    Rng amp_rng(child_seed(seed, stem + "_noiseamp"));
    const Spectrogram noise =
        make_noise(child_seed(seed, stem + "_noise"), meta.spec_frames, meta.spec_bins,
                   amp_rng.uniform(kNoiseAmplitudeMin, kNoiseAmplitudeMax));
    save_spectrogram(noise, (fs::path(out_dir) / noise_rel).string());
    out.push_back(make_negative(pos, ConditionKind::noise, noise_rel, assets, {}));

    const auto [off_audio, off_cls] =
        sample_offscreen(record_categories(base, taxonomy), taxonomy,
                         child_seed(seed, stem + "_offscreen"), meta.spec_frames, meta.spec_bins);
    const std::string off_rel = "audio/" + split + "/" + stem + "_offscreen.avsr";
    save_spectrogram(off_audio, (fs::path(out_dir) / off_rel).string());
    out.push_back(
        make_negative(pos, ConditionKind::offscreen, off_rel, assets, off_cls->super_category));
  }
  sort_records(out);
  return out;
}

std::vector<SampleRecord> build_train_manifest(const std::vector<SampleRecord>& base_positive,
                                               const CategoryTaxonomy& taxonomy, double rho,
                                               std::uint64_t seed, const CorpusMeta& meta,
                                               const std::string& split_dir,
                                               const std::string& out_dir) {
  if (!(rho >= 0.0 && rho < 1.0)) throw ContractError("rho must be in [0, 1)");
  const BenchAssets assets = ensure_assets(out_dir, meta);
  const std::size_t n = base_positive.size();
  const std::size_t n_neg = static_cast<std::size_t>(std::llround(rho * static_cast<double>(n)));

  // Seeded choice of which records flip and which negative type each gets.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<int> flip(n, -1);  // -1 keep positive; 0 silence, 1 noise, 2 offscreen
  for (std::size_t i = 0; i < n_neg; ++i) flip[order[i]] = static_cast<int>(i % 3);

  std::string split = n > 0 ? base_positive.front().split : "train";
  const fs::path audio_dir = fs::path(out_dir) / "audio" / split;
  if (n_neg > 0) fs::create_directories(audio_dir);

  std::vector<SampleRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SampleRecord pos = rebase_positive(base_positive[i], split_dir, out_dir);
    if (flip[i] < 0) {
      out.push_back(pos);
      continue;
    }
    const std::string stem = stem_of(base_positive[i]);
    if (flip[i] == 0) {
      out.push_back(make_negative(pos, ConditionKind::silence, assets.silence_rel, assets, {}));
    } else if (flip[i] == 1) {
      const std::string rel = "audio/" + split + "/" + stem + "_noise.avsr";
      Rng amp_rng(child_seed(seed, stem + "_noiseamp"));
      save_spectrogram(make_noise(child_seed(seed, stem + "_noise"), meta.spec_frames,
                                  meta.spec_bins,
                                  amp_rng.uniform(kNoiseAmplitudeMin, kNoiseAmplitudeMax)),
                       (fs::path(out_dir) / rel).string());
      out.push_back(make_negative(pos, ConditionKind::noise, rel, assets, {}));
    } else {
      const auto [audio, cls] = sample_offscreen(
          record_categories(base_positive[i], taxonomy), taxonomy,
          child_seed(seed, stem + "_offscreen"), meta.spec_frames, meta.spec_bins);
      const std::string rel = "audio/" + split + "/" + stem + "_offscreen.avsr";
      save_spectrogram(audio, (fs::path(out_dir) / rel).string());
      out.push_back(make_negative(pos, ConditionKind::offscreen, rel, assets,
                                  cls->super_category));
    }
  }
  sort_records(out);
  return out;
}

BenchPaths build_benchmark(const std::string& corpus_dir, const BenchOptions& options,
                           const std::string& out_dir) {
  const CategoryTaxonomy taxonomy =
      CategoryTaxonomy::load_json_file((fs::path(corpus_dir) / "taxonomy.json").string());
  const CorpusMeta meta =
      CorpusMeta::load_json_file((fs::path(corpus_dir) / "corpus_meta.json").string());
  fs::create_directories(out_dir);

  BenchPaths paths;
  for (const char* split : {"val", "test"}) {
    const fs::path split_dir = fs::path(corpus_dir) / split;
    const auto base = load_manifest((split_dir / "clips.jsonl").string(), false);
    const auto records =
        build_eval_manifest(base, taxonomy, child_seed(options.seed, std::string("eval_") + split),
                            meta, split_dir.string(), out_dir);
    const std::string manifest_path =
        (fs::path(out_dir) / (std::string("eval_") + split + "_manifest.jsonl")).string();
    save_manifest(records, manifest_path);
    (std::string(split) == "val" ? paths.eval_val_manifest : paths.eval_test_manifest) =
        manifest_path;
  }

  const fs::path train_dir = fs::path(corpus_dir) / "train";
  const auto base = load_manifest((train_dir / "clips.jsonl").string(), false);
  const auto records = build_train_manifest(base, taxonomy, options.rho,
                                            child_seed(options.seed, "train"), meta,
                                            train_dir.string(), out_dir);
  paths.train_manifest = (fs::path(out_dir) / "train_manifest.jsonl").string();
  save_manifest(records, paths.train_manifest);

  ordered_json j;
  j["rho"] = options.rho;
  j["seed"] = options.seed;
  j["corpus"] = rel_to(fs::path(corpus_dir), fs::path(out_dir));
  write_file_bytes((fs::path(out_dir) / "bench_meta.json").string(), j.dump(2) + "\n");
  return paths;
}

}  // namespace avsr
