#include "somno/cli.hpp"

#include <fstream>
#include <string>

#include "cli_runner.hpp"
#include "doctest.h"
#include "published_tables.hpp"
#include "somno/dataset.hpp"
#include "somno/metrics.hpp"
#include "somno/mlp.hpp"
#include "somno/spectral.hpp"

using somno::testing::run_cli;
using somno::testing::slurp;
using somno::testing::TempDir;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string line_starting(const std::string& text, const std::string& prefix) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string line = text.substr(pos, end - pos);
    if (line.rfind(prefix, 0) == 0) return line;
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return {};
}

}  // namespace

TEST_CASE("evaluate on identical hypnograms is 100%") {
  TempDir dir("eval");
  write_text(dir / "a.txt", "W\n1\n2\n2\n3\n4\nR\nM\nR\n");
  const auto r = run_cli({"evaluate", dir / "a.txt", dir / "a.txt"});
  CHECK(r.code == 0);
  CHECK(r.out.find("Overall: 8/8 = 100.00% (100%)") != std::string::npos);
}

TEST_CASE("report on the reference composition") {
  TempDir dir("report");
  {
    std::ofstream out(dir / "hyp.txt", std::ios::binary);
    somno::write_hypnogram(out, somno::golden::reference_hypnogram());
  }
  const auto r = run_cli({"report", dir / "hyp.txt"});
  REQUIRE(r.code == 0);
  CHECK(line_starting(r.out, "TTS") == "TTS           1033        30990");
  CHECK(line_starting(r.out, "TTR") == "TTR           1114        33420");
  CHECK(r.out.find("somno ") != std::string::npos);

  const auto csv = run_cli({"report", dir / "hyp.txt", "--csv"});
  REQUIRE(csv.code == 0);
  CHECK(line_starting(csv.out, "TTS,") == "TTS,1033,30990,,,,,");
}

TEST_CASE("exit codes") {
  TempDir dir("codes");
  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"frobnicate"}).code == 1);
  CHECK(run_cli({"report"}).code == 1);
  CHECK(run_cli({"report", dir / "x.txt", "--bogus"}).code == 1);
  CHECK(run_cli({"--help"}).code == 0);

  const auto missing = run_cli({"report", dir / "missing.txt"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("missing.txt") != std::string::npos);

  write_text(dir / "bad.txt", "W\n2\nQ\n");
  const auto bad = run_cli({"report", dir / "bad.txt"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("bad.txt:3") != std::string::npos);

  CHECK(run_cli({"synth", "-o", dir / "r.edf", "--hypnogram", dir / "h.txt",
                 "--counts", "1,2"})
            .code == 2);
  CHECK(run_cli({"synth", "-o", dir / "r.edf", "--hypnogram", dir / "h.txt",
                 "--channels", "3"})
            .code == 1);
}

TEST_CASE("scored hypnogram agrees with in-memory training accuracy") {
  TempDir dir("pipeline");
  REQUIRE(run_cli({"synth", "-o", dir / "rec.edf", "--hypnogram", dir / "hyp.txt",
                   "--counts", "12,10,30,12,20,16", "--movement", "3", "--seed", "5"})
              .code == 0);
  REQUIRE(run_cli({"features", dir / "rec.edf", "-o", dir / "f.csv"}).code == 0);
  const auto train = run_cli({"train", dir / "f.csv", dir / "hyp.txt", "-o",
                              dir / "model.txt", "--seed", "5", "--max-epochs", "150"});
  REQUIRE(train.code == 0);
  REQUIRE(run_cli({"score", dir / "model.txt", dir / "rec.edf", "-o",
                   dir / "scored.txt"})
              .code == 0);
  const auto eval = run_cli({"evaluate", dir / "hyp.txt", dir / "scored.txt"});
  REQUIRE(eval.code == 0);

  std::ifstream fin(dir / "f.csv");
  const auto rows = somno::read_feature_file(fin);
  const auto data =
      somno::build_dataset(rows, somno::read_hypnogram_file(dir / "hyp.txt"));
  std::ifstream min(dir / "model.txt");
  const auto model = somno::read_model(min);
  const somno::Fraction acc =
      somno::overall_accuracy(somno::evaluate(model, data));
  const std::string expected = std::to_string(acc.num) + "/" + std::to_string(acc.den);

  CHECK(acc.den == 100);
  CHECK(line_starting(eval.out, "Overall: ").rfind("Overall: " + expected + " ", 0) == 0);
  CHECK(line_starting(train.out, "dataset        " + expected + " ").size() > 0);
}

TEST_CASE("reruns with the same seed are byte-identical") {
  TempDir a("det-a");
  TempDir b("det-b");
  for (const TempDir* d : {&a, &b}) {
    const TempDir& dir = *d;
    REQUIRE(run_cli({"synth", "-o", dir / "rec.edf", "--hypnogram", dir / "hyp.txt",
                     "--counts", "8,8,8,8,8,8", "--channels", "2", "--seed", "11"})
                .code == 0);
    REQUIRE(run_cli({"features", dir / "rec.edf", "-o", dir / "f.csv", "--signals",
                     "EEG1", "EEG2"})
                .code == 0);
    REQUIRE(run_cli({"train", dir / "f.csv", dir / "hyp.txt", "-o", dir / "m.txt",
                     "--seed", "11", "--max-epochs", "60", "--report", dir / "t.txt"})
                .code == 0);
    REQUIRE(run_cli({"score", dir / "m.txt", dir / "rec.edf", "-o", dir / "s.txt"})
                .code == 0);
  }
  for (const char* name : {"rec.edf", "hyp.txt", "f.csv", "m.txt", "t.txt", "s.txt"}) {
    CAPTURE(name);
    const std::string left = slurp(a / name);
    CHECK(!left.empty());
    CHECK(left == slurp(b / name));
  }
  CHECK(slurp(a / "t.txt").find("seed 11") != std::string::npos);
}

TEST_CASE("different seeds give different recordings") {
  TempDir dir("seeds");
  REQUIRE(run_cli({"synth", "-o", dir / "a.edf", "--hypnogram", dir / "a.txt",
                   "--counts", "2,2,2,2,2,2", "--seed", "1"})
              .code == 0);
  REQUIRE(run_cli({"synth", "-o", dir / "b.edf", "--hypnogram", dir / "b.txt",
                   "--counts", "2,2,2,2,2,2", "--seed", "2"})
              .code == 0);
  CHECK(slurp(dir / "a.edf") != slurp(dir / "b.edf"));
}

TEST_CASE("score needs as many signals as the model has channels") {
  TempDir dir("width");
  REQUIRE(run_cli({"synth", "-o", dir / "rec.edf", "--hypnogram", dir / "hyp.txt",
                   "--counts", "4,4,4,4,4,4", "--seed", "3"})
              .code == 0);
  REQUIRE(run_cli({"features", dir / "rec.edf", "-o", dir / "f.csv"}).code == 0);
  REQUIRE(run_cli({"train", dir / "f.csv", dir / "hyp.txt", "-o", dir / "m.txt",
                   "--max-epochs", "5"})
              .code == 0);
  const auto r = run_cli({"score", dir / "m.txt", dir / "rec.edf", "-o",
                          dir / "s.txt", "--signals", "EEG1", "EEG1"});
  CHECK(r.code == 2);
}
