#include "somno/metrics.hpp"

#include <string>

#include "doctest.h"
#include "published_tables.hpp"
#include "somno/error.hpp"
#include "somno/random.hpp"

using somno::SleepStage;

TEST_CASE("Fraction::percent rounds half up exactly") {
  CHECK(somno::Fraction{1, 8}.percent() == 13);   // 12.5
  CHECK(somno::Fraction{1, 200}.percent() == 1);  // 0.5
  CHECK(somno::Fraction{1, 201}.percent() == 0);
  CHECK(somno::Fraction{835, 1100}.percent() == 76);
  CHECK(somno::Fraction{3, 3}.percent() == 100);
}

TEST_CASE("confusion_matrix basics") {
  std::vector<SleepStage> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(somno::kClassStages[i % 6]);
  const auto perfect = somno::confusion_matrix(labels, labels);
  CHECK(perfect.trace() == 10);
  CHECK(perfect.total() == 10);
  CHECK(somno::overall_accuracy(perfect).value() == 1.0);

  const std::vector<SleepStage> awake(7, SleepStage::Awake);
  const std::vector<SleepStage> s1(7, SleepStage::S1);
  const auto off = somno::confusion_matrix(awake, s1);
  CHECK(off.at(SleepStage::Awake, SleepStage::S1) == 7);
  CHECK(off.total() == 7);
  CHECK(somno::overall_accuracy(off).value() == 0.0);

  CHECK_THROWS_AS(somno::confusion_matrix(awake, labels), somno::Error);
  std::vector<SleepStage> with_movement = awake;
  with_movement[3] = SleepStage::Movement;
  CHECK_THROWS_WITH_AS(somno::confusion_matrix(with_movement, awake),
                       doctest::Contains("Movement"), somno::Error);
  CHECK_THROWS_AS(somno::overall_accuracy(somno::ConfusionMatrix{}), somno::Error);
}

TEST_CASE("golden confusion matrix reproduces the published success column") {
  std::vector<SleepStage> actual, predicted;
  somno::golden::replay(actual, predicted);
  const auto cm = somno::confusion_matrix(actual, predicted);
  CHECK(cm.counts() == somno::golden::kConfusionCounts);
  CHECK(cm.total() == 1100);
  // Row sums equal the per-stage scored counts.
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(cm.row_sum(somno::kClassStages[i]) == somno::golden::kStageEpochs[i]);
  }

  const auto rates = somno::per_class_success(cm);
  for (std::size_t i = 0; i < 6; ++i) {
    REQUIRE(rates[i].has_value());
    CHECK(rates[i]->percent() == somno::golden::kSuccessPercent[i]);
  }
  CHECK(*rates[0] == somno::Fraction{59, 67});
  CHECK(*rates[3] == somno::Fraction{3, 107});
  const auto overall = somno::overall_accuracy(cm);
  CHECK(overall == somno::Fraction{835, 1100});
  CHECK(overall.percent() == somno::golden::kOverallPercent);
}

TEST_CASE("per_class_success on identity and empty rows") {
  somno::ConfusionMatrix cm;
  for (SleepStage s : somno::kClassStages) cm.add(s, s);
  for (const auto& r : somno::per_class_success(cm)) CHECK(r->value() == 1.0);

  somno::ConfusionMatrix sparse;
  sparse.add(SleepStage::S2, SleepStage::S2, 3);
  const auto rates = somno::per_class_success(sparse);
  CHECK_FALSE(rates[0].has_value());
  CHECK(rates[2]->value() == 1.0);
}

TEST_CASE("property: accuracy is the count-weighted mean of class success") {
  somno::Random rng(31);
  for (int t = 0; t < 200; ++t) {
    somno::ConfusionMatrix cm;
    for (int k = 0; k < 50; ++k) {
      cm.add(somno::kClassStages[rng.below(6)], somno::kClassStages[rng.below(6)],
             rng.below(5));
    }
    if (cm.total() == 0) continue;
    const auto rates = somno::per_class_success(cm);
    double weighted = 0.0;
    std::uint64_t rows = 0;
    for (std::size_t i = 0; i < 6; ++i) {
      const auto n = cm.row_sum(somno::kClassStages[i]);
      rows += n;
      if (rates[i]) {
        CHECK(rates[i]->value() >= 0.0);
        CHECK(rates[i]->value() <= 1.0);
        weighted += rates[i]->value() * static_cast<double>(n);
      }
    }
    CHECK(rows == cm.total());
    const double acc = somno::overall_accuracy(cm).value();
    CHECK(acc == doctest::Approx(weighted / static_cast<double>(rows)).epsilon(1e-12));
  }
}

TEST_CASE("architecture_report on the reference composition") {
  const auto h = somno::golden::reference_hypnogram();
  REQUIRE(h.size() == 1114);
  const auto r = somno::architecture_report(h);
  CHECK(r.tts_epochs == 1033);
  CHECK(r.tts_s == 30990.0);
  CHECK(r.ttr_epochs == 1114);
  CHECK(r.ttr_s == 33420.0);
  CHECK(r.ttr_s == h.duration_s());

  CHECK(r[SleepStage::S2].of_tts->percent() == 34);
  CHECK(*r[SleepStage::S2].of_tts == somno::Fraction{347, 1033});
  CHECK(r[SleepStage::S1].of_tts->percent() == 5);
  CHECK(r[SleepStage::S3].of_tts->percent() == 10);
  CHECK(r[SleepStage::S4].of_tts->percent() == 28);
  CHECK(r[SleepStage::REM].of_tts->percent() == 23);
  CHECK_FALSE(r[SleepStage::Awake].of_tts.has_value());
  CHECK_FALSE(r[SleepStage::Movement].of_tts.has_value());

  const std::array<std::uint64_t, 7> ttr = {6, 5, 31, 10, 26, 21, 1};
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(r.stages[i].of_ttr.percent() == ttr[i]);
    CHECK(r.stages[i].duration_s == 30.0 * static_cast<double>(somno::golden::kStageEpochs[i]));
  }
  CHECK(r[SleepStage::REM].normative_tts == "20 to 25");
  CHECK(r[SleepStage::S2].normative_tts == "~ 50");

  double tts_sum = 0.0;
  for (const auto& s : r.stages) {
    if (s.of_tts) tts_sum += s.of_tts->value();
  }
  CHECK(tts_sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rendered architecture report footnotes disagreements with the printed table") {
  const auto r = somno::architecture_report(somno::golden::reference_hypnogram());
  const std::vector<std::string> footer = {"-- somno test"};
  const std::string text = somno::render_architecture_text(r, footer);
  CHECK(text.find("TTS           1033        30990") != std::string::npos);
  CHECK(text.find("TTR           1114        33420") != std::string::npos);
  CHECK(text.find("S4 %TTS: computed 292/1033 = 28.27%, the reference scoring prints 26%") !=
        std::string::npos);
  CHECK(text.find("REM %TTS: computed 233/1033 = 22.56%, the reference scoring prints 21%") !=
        std::string::npos);
  CHECK(text.find("[3]") == std::string::npos);  // only the two disagreements
  CHECK(text.find("-- somno test") != std::string::npos);

  const std::string csv = somno::render_architecture_csv(r);
  CHECK(csv.rfind("stage,epochs,duration_s,", 0) == 0);
  CHECK(csv.find("\nS4,292,8760,") != std::string::npos);
  CHECK(csv.find("\nTTS,1033,30990") != std::string::npos);
}

TEST_CASE("architecture_report for a night without sleep") {
  const auto r = somno::architecture_report(somno::parse_hypnogram("W\nW\nW\n"));
  CHECK(r.tts_epochs == 0);
  for (const auto& s : r.stages) CHECK_FALSE(s.of_tts.has_value());
  CHECK(r[SleepStage::Awake].of_ttr.percent() == 100);
  CHECK(somno::render_architecture_text(r).find("[1]") == std::string::npos);
  CHECK_THROWS_AS(somno::architecture_report(somno::Hypnogram{}), somno::Error);
}

TEST_CASE("compare_hypnograms skips Movement on either side") {
  const auto expert = somno::parse_hypnogram("W\nM\n2\n2\nR\n");
  const auto scored = somno::parse_hypnogram("W\nW\nM\n2\n2\n");
  const auto cm = somno::compare_hypnograms(expert, scored);
  CHECK(cm.total() == 3);
  CHECK(cm.at(SleepStage::REM, SleepStage::S2) == 1);
  CHECK_THROWS_AS(somno::compare_hypnograms(expert, somno::parse_hypnogram("W\n")),
                  somno::Error);
}

TEST_CASE("confusion renderings") {
  const somno::ConfusionMatrix cm(somno::golden::kConfusionCounts);
  const std::string text = somno::render_confusion_text(cm);
  CHECK(text.find("as ->") == 0);
  CHECK(text.find("Awake        59      0      0      0      5      3      88%") !=
        std::string::npos);
  CHECK(text.find("Overall: 835/1100 = 75.91% (76%)") != std::string::npos);
  const std::string csv = somno::render_confusion_csv(cm);
  CHECK(csv.rfind("actual,Awake,S1,S2,S3,S4,REM,success\n", 0) == 0);
  CHECK(csv.find("\nS3,0,0,39,3,52,13,") != std::string::npos);
}
