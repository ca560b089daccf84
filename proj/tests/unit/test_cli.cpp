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

#include <cstdlib>
#include <filesystem>
#include <string>

#include "avsr/fsutil.hpp"

namespace fs = std::filesystem;
using avsr::hash_tree;
using avsr::read_file_bytes;
using avsr::write_file_bytes;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() / "avsr_tests" / "cli_io";
  fs::create_directories(dir);
  const fs::path out = dir / ("out_" + std::to_string(counter) + ".txt");
  const fs::path err = dir / ("err_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd =
      std::string(AVSR_CLI_BIN) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.code = WEXITSTATUS(raw);
  r.out = read_file_bytes(out.string());
  r.err = read_file_bytes(err.string());
  return r;
}

fs::path work_root() {
  const fs::path p = fs::temp_directory_path() / "avsr_tests" / "cli";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("gen-data is deterministic and reports the corpus summary") {
  const fs::path root = work_root();
  fs::remove_all(root / "det_a");
  fs::remove_all(root / "det_b");
  const CliResult a = run_cli("gen-data --subset s4 --clips 6 --seed 0 --out " +
                              (root / "det_a").string());
  REQUIRE(a.code == 0);
  CHECK(a.out.find("6 clips") != std::string::npos);
  const CliResult b = run_cli("gen-data --subset s4 --clips 6 --seed 0 --out " +
                              (root / "det_b").string());
  REQUIRE(b.code == 0);
  CHECK(hash_tree(root / "det_a") == hash_tree(root / "det_b"));
}

TEST_CASE("gen-data rejects a zero clip count") {
  const CliResult r = run_cli("gen-data --subset s4 --clips 0 --seed 0 --out /tmp/nowhere");
  CHECK(r.code == 1);
}

TEST_CASE("build-bench requires --in") {
  // Unset AVSR_DATA_DIR so there is no fallback.
  unsetenv("AVSR_DATA_DIR");
  const CliResult r = run_cli("build-bench --rho 0.1");
  CHECK(r.code == 1);
}

TEST_CASE("the full pipeline runs end to end through the binary") {
  const fs::path root = work_root();
  const fs::path corpus = root / "pipeline" / "corpus";
  if (!fs::exists(corpus / "corpus_meta.json")) {
    REQUIRE(run_cli("gen-data --subset s4 --clips 8 --seed 1 --out " + corpus.string()).code ==
            0);
  }
  REQUIRE(run_cli("build-bench --in " + corpus.string() + " --rho 0.2 --seed 1").code == 0);

  const fs::path cfg = root / "pipeline" / "cfg.json";
  write_file_bytes(cfg.string(),
                   "{\"seed\": 1, \"epochs\": 1, \"batch_size\": 8, \"negative_ratio\": 0.2}\n");
  const fs::path run = root / "pipeline" / "run";
  fs::remove_all(run);
  const CliResult train = run_cli("train --config " + cfg.string() + " --data " +
                                  (corpus / "bench").string() + " --out " + run.string() +
                                  " --threads 2");
  REQUIRE(train.code == 0);
  CHECK(fs::exists(run / "epochs.csv"));
  CHECK(fs::exists(run / "checkpoint_best.avsc"));

  const CliResult eval = run_cli("eval --checkpoint " + (run / "checkpoint_best.avsc").string() +
                                 " --manifest " +
                                 (corpus / "bench" / "eval_test_manifest.jsonl").string() +
                                 " --out " + (run / "report.json").string());
  REQUIRE(eval.code == 0);
  CHECK(fs::exists(run / "report.json"));
  CHECK(eval.out.find("G-mIoU") != std::string::npos);

  const CliResult hist = run_cli("ablate --mode hist --data " + (corpus / "bench").string() +
                                 " --checkpoint " + (run / "checkpoint_best.avsc").string() +
                                 " --out " + (root / "pipeline" / "hist").string());
  REQUIRE(hist.code == 0);
  CHECK(fs::exists(root / "pipeline" / "hist" / "similarity_scores.csv"));

  const CliResult unseen = run_cli("ablate --mode unseen --data " + corpus.string() +
                                   " --checkpoint " + (run / "checkpoint_best.avsc").string() +
                                   " --out " + (root / "pipeline" / "unseen").string());
  REQUIRE(unseen.code == 0);
  CHECK(fs::exists(root / "pipeline" / "unseen" / "unseen_audio.csv"));
}

TEST_CASE("a config with an unknown key fails by name") {
  const fs::path root = work_root();
  const fs::path cfg = root / "bad_cfg.json";
  write_file_bytes(cfg.string(), "{\"learn_rate\": 0.1}\n");
  const CliResult r =
      run_cli("train --config " + cfg.string() + " --data /tmp/none --out /tmp/none_run");
  CHECK(r.code == 1);
  CHECK(r.err.find("learn_rate") != std::string::npos);
}

TEST_CASE("unknown ablate modes are usage errors") {
  const CliResult r = run_cli("ablate --mode nonsense --data /tmp --out /tmp/x");
  CHECK(r.code == 1);
  CHECK(r.err.find("nonsense") != std::string::npos);
}

TEST_CASE("missing subcommand is a usage error") {
  const CliResult r = run_cli("");
  CHECK(r.code == 1);
}
