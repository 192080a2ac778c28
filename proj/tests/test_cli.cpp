// Drives the installed CLI binary end to end. The binary path arrives via
// the BDLAB_BIN environment variable set by CTest.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "bdlab/eval.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
namespace ts = bdlab::testsupport;

namespace {

std::string binary() {
  const char* path = std::getenv("BDLAB_BIN");
  REQUIRE(path != nullptr);
  return path;
}

int run(const std::string& args) {
  const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("cli pipeline: synth, poison, train, evaluate, sweep, report") {
  ts::TempDir tmp("cli");
  const auto dir = tmp.path.string();

  REQUIRE(run("synth --out " + dir + "/data --n-per-class 60 --vocab-size 120 --seed 5") == 0);
  REQUIRE(fs::exists(tmp.path / "data" / "train.tsv"));
  REQUIRE(fs::exists(tmp.path / "data" / "test.tsv"));

  // poison: mask has floor(0.05 * 120) = 6 ids
  REQUIRE(run("poison --train " + dir + "/data/train.tsv --out " + dir +
              "/poisoned --trigger badnet --poison-rate 0.05 --target-label 1 --seed 5") == 0);
  const auto mask = nlohmann::json::parse(slurp(tmp.path / "poisoned" / "poison_mask.json"));
  CHECK(mask.size() == 6);
  REQUIRE(fs::exists(tmp.path / "poisoned" / "poisoned_train.tsv"));

  // train: full pipeline into an output directory
  REQUIRE(run("train --train " + dir + "/data/train.tsv --test " + dir +
              "/data/test.tsv --out " + dir + "/run --trigger badnet --poison-rate 0.05 "
              "--target-label 1 --beta 2 --gamma 0.9 --seed 5 --dim 4096 --epochs 2") == 0);
  REQUIRE(fs::exists(tmp.path / "run" / "report.json"));
  const auto report = bdlab::report_from_json(slurp(tmp.path / "run" / "report.json"));
  CHECK(report.clean_acc >= 0.0);
  CHECK(report.clean_acc <= 1.0);

  // determinism: a second identical run writes identical bytes
  REQUIRE(run("train --train " + dir + "/data/train.tsv --test " + dir +
              "/data/test.tsv --out " + dir + "/run2 --trigger badnet --poison-rate 0.05 "
              "--target-label 1 --beta 2 --gamma 0.9 --seed 5 --dim 4096 --epochs 2") == 0);
  CHECK(slurp(tmp.path / "run" / "report.json") == slurp(tmp.path / "run2" / "report.json"));

  // evaluate: reuse the trained checkpoint against the clean test set
  REQUIRE(run("evaluate --checkpoint " + dir + "/run/checkpoints/main.json --test " + dir +
              "/data/test.tsv --trigger badnet --target-label 1 --seed 5 --out " + dir +
              "/eval") == 0);
  REQUIRE(fs::exists(tmp.path / "eval" / "report.json"));
  const auto eval_report = bdlab::report_from_json(slurp(tmp.path / "eval" / "report.json"));
  CHECK_FALSE(eval_report.acc_star.has_value());

  // sweep: two-point grid, each point in its own subdirectory
  REQUIRE(run("sweep --train " + dir + "/data/train.tsv --test " + dir + "/data/test.tsv --out " +
              dir + "/sweep --trigger badnet --poison-rate 0.05 --target-label 1 "
              "--betas 1,2 --gammas 0.9 --seed 5 --dim 4096 --epochs 2") == 0);
  REQUIRE(fs::exists(tmp.path / "sweep" / "scores.json"));
  REQUIRE(fs::exists(tmp.path / "sweep" / "point_00" / "report.json"));
  REQUIRE(fs::exists(tmp.path / "sweep" / "point_01" / "report.json"));
  const auto scores = nlohmann::json::parse(slurp(tmp.path / "sweep" / "scores.json"));
  CHECK(scores.at("scores").size() == 2);
  CHECK(scores.at("selected").contains("beta"));

  // report: pivot two runs into one table
  REQUIRE(run("report " + dir + "/run/report.json " + dir + "/eval/report.json --labels "
              "DPoE,Benign --out " + dir + "/table.md") == 0);
  const auto table = slurp(tmp.path / "table.md");
  CHECK(table.find("| DPoE |") != std::string::npos);
  CHECK(table.find("BadNet ASR") != std::string::npos);
}

TEST_CASE("cli exit codes") {
  ts::TempDir tmp("cli");
  const auto dir = tmp.path.string();

  // usage errors
  CHECK(run("explode") == 1);
  CHECK(run("") == 1);
  CHECK(run("train --train x.tsv --test y.tsv --out " + dir + "/o --trigger nope") == 1);

  // data error: missing dataset file
  CHECK(run("train --train " + dir + "/missing.tsv --test " + dir + "/missing.tsv --out " + dir +
            "/o --dim 1024") == 2);

  // data error: malformed TSV
  {
    std::ofstream bad(tmp.path / "bad.tsv", std::ios::binary);
    bad << "sentence\tlabel\na\tb\tc\n";
  }
  CHECK(run("poison --train " + dir + "/bad.tsv --out " + dir + "/p") == 2);

  // numeric failure: diverging learning rate
  CHECK(run("synth --out " + dir + "/d --n-per-class 50 --vocab-size 100 --seed 1") == 0);
  CHECK(run("train --train " + dir + "/d/train.tsv --test " + dir + "/d/test.tsv --out " + dir +
            "/r --dim 1024 --lr 1e308 --lr-trigger 1e308 --poison-rate 0.05") == 3);

  // help exits cleanly
  CHECK(run("--help") == 0);
}

TEST_SUITE_END();
