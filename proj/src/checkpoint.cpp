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

#include "avsr/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "avsr/errors.hpp"
#include "avsr/fsutil.hpp"
#include "avsr/rng.hpp"

namespace avsr {

namespace {

constexpr char kMagic[4] = {'A', 'V', 'S', 'C'};

void put_u64le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_f32_section(std::ostream& os, const std::vector<double>& xs) {
  for (double x : xs) {
    const float f = static_cast<float>(x);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
  }
}

void write_f64_section(std::ostream& os, const std::vector<double>& xs) {
  for (double x : xs) {
    std::uint64_t u;
    std::memcpy(&u, &x, 8);
    put_u64le(os, u);
  }
}

std::vector<double> read_f32_section(std::istream& is, std::size_t count,
                                     const std::string& path) {
  std::vector<double> out(count);
  for (auto& x : out) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw FileParseError("truncated checkpoint section in " + path);
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    float f;
    std::memcpy(&f, &u, 4);
    x = static_cast<double>(f);
  }
  return out;
}

std::vector<double> read_f64_section(std::istream& is, std::size_t count,
                                     const std::string& path) {
  std::vector<double> out(count);
  for (auto& x : out) {
    const std::uint64_t u = get_u64le(is);
    if (!is) throw FileParseError("truncated checkpoint section in " + path);
    double d;
    std::memcpy(&d, &u, 8);
    x = d;
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const Network& net, const RunConfig& run_cfg,
                     std::uint64_t seed, int epoch, double best_val_gmiou,
                     const AdamState* adam) {
  const auto& store = net.params();
  nlohmann::ordered_json header;
  header["format"] = "avsr-checkpoint";
  header["version"] = 1;
  header["run_config"] = run_cfg.to_json();
  header["model_config"] = net.config().to_json();
  header["seed"] = seed;
  header["epoch"] = epoch;
  header["best_val_gmiou"] = best_val_gmiou;
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  for (const auto& e : store.entries()) {
    nlohmann::ordered_json p;
    p["name"] = e.name;
    p["shape"] = e.shape;
    params.push_back(p);
  }
  header["params"] = params;
  nlohmann::ordered_json sections = nlohmann::ordered_json::array();
  auto add_section = [&](const char* name, const char* dtype, std::size_t count) {
    nlohmann::ordered_json s;
    s["name"] = name;
    s["dtype"] = dtype;
    s["count"] = count;
    sections.push_back(s);
  };
  add_section("params_f32", "float32", store.size());
  add_section("params_f64", "float64", store.size());
  if (adam) {
    header["adam_step"] = adam->step;
    add_section("adam_m", "float64", adam->m.size());
    add_section("adam_v", "float64", adam->v.size());
  }
  header["sections"] = sections;

  const std::string header_bytes = header.dump();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  put_u64le(os, header_bytes.size());
  os.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
  write_f32_section(os, store.values());
  write_f64_section(os, store.values());
  if (adam) {
    write_f64_section(os, adam->m);
    write_f64_section(os, adam->v);
  }
  if (!os) throw IoError("checkpoint write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw FileParseError("bad checkpoint magic in " + path);
  const std::uint64_t header_len = get_u64le(is);
  std::string header_bytes(header_len, '\0');
  is.read(header_bytes.data(), static_cast<std::streamsize>(header_len));
  if (!is) throw FileParseError("truncated checkpoint header in " + path);

  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(header_bytes);
  } catch (const nlohmann::json::exception& e) {
    throw FileParseError("checkpoint header parse error in " + path + ": " + e.what());
  }
  if (header.at("format").get<std::string>() != "avsr-checkpoint")
    throw FileParseError("not a checkpoint file: " + path);

  LoadedCheckpoint out;
  out.run_config = RunConfig::from_json(header.at("run_config"));
  out.model_config = ModelConfig::from_json(header.at("model_config"));
  out.seed = header.at("seed").get<std::uint64_t>();
  out.epoch = header.at("epoch").get<int>();
  out.best_val_gmiou = header.at("best_val_gmiou").get<double>();

  std::vector<double> params_f32, params_f64, adam_m, adam_v;
  for (const auto& s : header.at("sections")) {
    const std::string name = s.at("name").get<std::string>();
    const std::string dtype = s.at("dtype").get<std::string>();
    const std::size_t count = s.at("count").get<std::size_t>();
    if (dtype == "float32") {
      auto data = read_f32_section(is, count, path);
      if (name == "params_f32") params_f32 = std::move(data);
    } else if (dtype == "float64") {
      auto data = read_f64_section(is, count, path);
      if (name == "params_f64") params_f64 = std::move(data);
      else if (name == "adam_m") adam_m = std::move(data);
      else if (name == "adam_v") adam_v = std::move(data);
    } else {
      throw FileParseError("unknown section dtype '" + dtype + "' in " + path);
    }
  }
  out.params = params_f64.empty() ? std::move(params_f32) : std::move(params_f64);
  if (out.params.empty()) throw FileParseError("checkpoint has no parameter section: " + path);
  if (!adam_m.empty()) {
    AdamState adam;
    adam.step = header.value("adam_step", 0L);
    adam.m = std::move(adam_m);
    adam.v = std::move(adam_v);
    out.adam = std::move(adam);
  }
  return out;
}

Network network_from_checkpoint(const LoadedCheckpoint& ckpt) {
  Network net(ckpt.model_config, 0);
  if (net.param_count() != ckpt.params.size())
    throw ValidationError("checkpoint parameter count does not match model config");
  net.params().values() = ckpt.params;
  return net;
}

std::string checkpoint_digest(const std::string& path) {
  const std::uint64_t h = fnv1a64(read_file_bytes(path));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace avsr
