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

#ifndef AVSR_FSUTIL_HPP
#define AVSR_FSUTIL_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace avsr {

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

// Content hash of every regular file under root (relative path + bytes),
// order-independent of directory iteration. Used by determinism checks.
std::uint64_t hash_tree(const std::filesystem::path& root);

// Fixed-format double for CSV output ("%.10g").
std::string fmt_double(double v);

// Joins fields with commas and a trailing newline.
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace avsr

#endif  // AVSR_FSUTIL_HPP
