// Copyright 2026 The layercut Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "layercut/tensorstore.hpp"

using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(LAYERCUT_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buffer;
  CliResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::size_t n;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.out.append(buffer.data(), n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

json payload_of(const CliResult& r) {
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report["schema_version"] == "1");
  REQUIRE(report.contains("payload"));
  return report["payload"];
}

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() /
          ("layercut_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("plan subcommand emits the report schema") {
  const auto r = run_cli("plan --layers 12 --strategy top --k 6");
  const json payload = payload_of(r);
  CHECK(payload["dropped"] == json({7, 8, 9, 10, 11, 12}));
  CHECK(payload["L"] == 12);
  CHECK(payload["strategy"] == "top");
}

TEST_CASE("plan matches the published alternates") {
  const auto r = run_cli("plan --layers 12 --strategy odd-alternate --k 4");
  CHECK(payload_of(r)["dropped"] == json({5, 7, 9, 11}));
  const auto r2 = run_cli("plan --layers 12 --strategy even-alternate --k 2");
  CHECK(payload_of(r2)["dropped"] == json({10, 12}));
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("plan --layers 12 --strategy symmetric --k 3").exit_code == 1);
  CHECK(run_cli("plan --layers 12 --strategy middle --k 2").exit_code == 1);
  CHECK(run_cli("plan --strategy top --k 2").exit_code == 1);
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("plan --strategy contribution --layers 12 --threshold 0.9").exit_code == 1);
}

TEST_CASE("data errors exit with code 2") {
  TempDir tmp;
  {
    std::ofstream bad(tmp.path("bad.ckpt"), std::ios::binary);
    bad << "not a checkpoint";
  }
  CHECK(run_cli("inspect " + tmp.path("bad.ckpt")).exit_code == 2);
  CHECK(run_cli("inspect " + tmp.path("missing.ckpt")).exit_code == 2);
}

TEST_CASE("identical invocations produce byte-identical reports") {
  const auto a = run_cli("plan --layers 12 --strategy symmetric --k 6");
  const auto b = run_cli("plan --layers 12 --strategy symmetric --k 6");
  CHECK(a.out == b.out);
  CHECK(payload_of(a)["dropped"] == json({4, 5, 6, 7, 8, 9}));
}

TEST_CASE("make-toy, inspect, plan, apply, score, finetune, report pipeline") {
  TempDir tmp;
  const std::string ckpt = tmp.path("toy.ckpt");
  const std::string cfg = tmp.path("toy.json");

  const auto made = run_cli("make-toy " + ckpt +
                            " --layers 4 --d-model 32 --heads 4 --d-ff 64 --vocab 16"
                            " --max-positions 8 --seed 3 --config-out " + cfg);
  CHECK(payload_of(made)["num_layers"] == 4);

  const auto inspected = run_cli("inspect " + ckpt);
  const json ip = payload_of(inspected);
  CHECK(ip["num_layers"] == 4);
  CHECK(ip["params"]["total"] == ip["params"]["embedding"].get<std::uint64_t>() +
                                     4 * ip["params"]["per_layer"][0].get<std::uint64_t>());

  const std::string plan_file = tmp.path("plan.json");
  const auto planned =
      run_cli("plan --layers 4 --strategy top --k 2 --out " + plan_file);
  CHECK(payload_of(planned)["dropped"] == json({3, 4}));

  const std::string pruned = tmp.path("pruned.ckpt");
  const auto applied =
      run_cli("apply " + ckpt + " --plan " + plan_file + " --out " + pruned);
  const json ap = payload_of(applied);
  CHECK(ap["layers_before"] == 4);
  CHECK(ap["layers_after"] == 2);
  CHECK(ap["est_finetune_speedup"] == doctest::Approx(2.0));
  CHECK(std::filesystem::exists(pruned));

  // refuses to overwrite its input
  CHECK(run_cli("apply " + ckpt + " --plan " + plan_file + " --out " + ckpt).exit_code == 1);

  // batch data for scoring
  const std::string data = tmp.path("data.jsonl");
  {
    std::ofstream out(data);
    for (int i = 0; i < 8; ++i) {
      out << R"({"tokens":[0,)" << (1 + i % 15) << "," << (1 + (i * 7) % 15)
          << R"(,3],"label":)" << (i % 4) << "}\n";
    }
  }
  const std::string profile_file = tmp.path("profile.json");
  const auto scored = run_cli("score " + ckpt + " --config " + cfg + " --data " + data +
                              " --profile-out " + profile_file);
  const json sp = payload_of(scored);
  CHECK(sp["L"] == 4);
  CHECK(sp["n_examples"] == 8);
  CHECK(sp["table"].size() == 4);
  CHECK(sp["thresholds"] == json({0.95, 0.925, 0.9}));
  CHECK(sp["table"][0].contains("dropped_at"));

  // contribution planning from the written profile
  const auto cplan =
      run_cli("plan --strategy contribution --profile " + profile_file + " --threshold 0.0");
  CHECK(payload_of(cplan)["strategy"] == "contribution");

  // fine-tune the pruned checkpoint on a small task
  const std::string task_file = tmp.path("task.json");
  {
    std::ofstream out(task_file);
    out << R"({"vocab_size":16,"seq_len":6,"num_classes":3,"rule":0,"train_size":32,)"
        << R"("dev_size":16,"seed":5})";
  }
  const std::string cfg_pruned = tmp.path("pruned.json");
  {
    std::ifstream in(cfg);
    json j;
    in >> j;
    j["num_layers"] = 2;
    std::ofstream out(cfg_pruned);
    out << j.dump();
  }
  const std::string metrics_file = tmp.path("metrics.jsonl");
  const auto tuned = run_cli("finetune " + pruned + " --config " + cfg_pruned + " --task " +
                             task_file + " --epochs 1 --lr 0.05 --batch-size 16 --seed 1" +
                             " --metrics-out " + metrics_file);
  const json fp = payload_of(tuned);
  CHECK(fp["mode"] == "finetune");
  CHECK(fp["layers_after"] == 2);
  CHECK(fp["metrics"]["steps"] == 2);
  CHECK(std::filesystem::exists(metrics_file));

  // loss-threshold report over published-style scores
  const std::string scores_file = tmp.path("scores.json");
  {
    std::ofstream out(scores_file);
    out << R"({"scores":{"0":92.43,"2":92.20,"4":90.60,"6":90.25}})";
  }
  const auto reported =
      run_cli("report --scores " + scores_file + " --threshold-points 1.0");
  CHECK(payload_of(reported)["max_droppable"] == 2);
}

TEST_CASE("finetune flag contradictions are usage errors") {
  TempDir tmp;
  const std::string ckpt = tmp.path("toy.ckpt");
  const std::string cfg = tmp.path("toy.json");
  REQUIRE(run_cli("make-toy " + ckpt + " --layers 2 --d-model 16 --heads 2 --d-ff 32"
                  " --vocab 16 --max-positions 8 --seed 4 --config-out " + cfg)
              .exit_code == 0);
  const std::string task_file = tmp.path("task.json");
  {
    std::ofstream out(task_file);
    out << R"({"vocab_size":16,"seq_len":6,"num_classes":3,"rule":0,"train_size":32,)"
        << R"("dev_size":16,"seed":5})";
  }
  const std::string plan_file = tmp.path("plan.json");
  REQUIRE(run_cli("plan --layers 2 --strategy top --k 1 --out " + plan_file).exit_code == 0);

  CHECK(run_cli("finetune " + ckpt + " --config " + cfg + " --task " + task_file +
                " --gradual")
            .exit_code == 1);
  CHECK(run_cli("finetune " + ckpt + " --config " + cfg + " --task " + task_file +
                " --plan " + plan_file + " --gradual --drop-after-finetune")
            .exit_code == 1);
}

TEST_CASE("apply round-trips through files bit-exactly on the empty plan") {
  TempDir tmp;
  const std::string ckpt = tmp.path("toy.ckpt");
  REQUIRE(run_cli("make-toy " + ckpt + " --layers 2 --d-model 16 --heads 2 --d-ff 32"
                  " --vocab 16 --max-positions 8 --seed 6")
              .exit_code == 0);
  const std::string plan_file = tmp.path("empty_plan.json");
  {
    std::ofstream out(plan_file);
    out << R"({"strategy":"top","L":2,"dropped":[]})";
  }
  const std::string out_ckpt = tmp.path("rewritten.ckpt");
  REQUIRE(run_cli("apply " + ckpt + " --plan " + plan_file + " --out " + out_ckpt)
              .exit_code == 0);
  const layercut::Checkpoint a = layercut::load_checkpoint_file(ckpt);
  const layercut::Checkpoint b = layercut::load_checkpoint_file(out_ckpt);
  CHECK(a == b);
}

TEST_SUITE_END();
