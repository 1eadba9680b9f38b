#include "somno/synth.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "somno/error.hpp"

using somno::SleepStage;

namespace {

constexpr double kFs = 256.0;

somno::SpectralFeatures features_of(const somno::Epoch& e) {
  return somno::relative_band_powers(somno::power_spectrum(e));
}

}  // namespace

TEST_CASE("band tone bins sit mid-band") {
  CHECK(somno::band_tone_bin(somno::Band::Delta, 7680, kFs) == 67);
  CHECK(somno::band_tone_bin(somno::Band::Theta, 7680, kFs) == 180);
  CHECK(somno::band_tone_bin(somno::Band::Alpha, 7680, kFs) == 300);
  CHECK(somno::band_tone_bin(somno::Band::Sigma, 7680, kFs) == 420);
  CHECK(somno::band_tone_bin(somno::Band::Beta, 7680, kFs) == 720);
  // At 32 Hz sampling nothing above the 16 Hz Nyquist bin exists.
  CHECK_THROWS_AS(somno::band_tone_bin(somno::Band::Beta, 32, 32.0), somno::Error);
  CHECK(somno::band_tone_bin(somno::Band::Beta, 64, 64.0) == 24);
}

TEST_CASE("noise-free epochs reproduce their band weights exactly") {
  const std::vector<std::array<double, 5>> weights = {
      {0, 0, 1, 0, 0}, {0.5, 0, 0, 0, 0.5}, {0.1, 0.2, 0.3, 0.15, 0.25}};
  std::uint64_t seed = 1;
  for (const auto& w : weights) {
    const somno::StageProfile p{SleepStage::S2, w, 0.0};
    const auto e = somno::synth_epoch(p, kFs, 30.0, seed++);
    CHECK(e.samples.size() == 7680);
    const auto f = features_of(e);
    for (std::size_t b = 0; b < 5; ++b) CHECK(std::fabs(f.rsp[b] - w[b]) < 1e-9);
  }
}

TEST_CASE("noisy epochs average to the mixed expectation") {
  const std::array<double, 5> w = {0.1, 0.5, 0.2, 0.1, 0.1};
  const std::array<double, 5> bandwidth = {106.0 / 946, 120.0 / 946, 120.0 / 946,
                                           120.0 / 946, 480.0 / 946};
  const somno::StageProfile p{SleepStage::S1, w, 0.1};
  std::array<double, 5> mean{};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto f = features_of(somno::synth_epoch(p, kFs, 30.0, seed));
    for (std::size_t b = 0; b < 5; ++b) mean[b] += f.rsp[b] / 50.0;
  }
  for (std::size_t b = 0; b < 5; ++b) {
    CHECK(std::fabs(mean[b] - (0.9 * w[b] + 0.1 * bandwidth[b])) <= 0.03);
  }
}

TEST_CASE("synth_epoch is deterministic in its seed and stays in the EDF range") {
  const auto p = somno::default_profiles()[3];
  const auto a = somno::synth_epoch(p, kFs, 30.0, 5);
  const auto b = somno::synth_epoch(p, kFs, 30.0, 5);
  const auto c = somno::synth_epoch(p, kFs, 30.0, 6);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
  for (double v : a.samples) CHECK(std::fabs(v) < 250.0);
}

TEST_CASE("synth_epoch errors") {
  CHECK_THROWS_AS(somno::synth_epoch({SleepStage::S1, {0.5, 0.4, 0, 0, 0}, 0.0}, kFs, 30.0, 1),
                  somno::Error);
  CHECK_THROWS_AS(somno::synth_epoch({SleepStage::S1, {1.5, -0.5, 0, 0, 0}, 0.0}, kFs, 30.0, 1),
                  somno::Error);
  CHECK_THROWS_AS(somno::synth_epoch({SleepStage::S1, {1, 0, 0, 0, 0}, 1.0}, kFs, 30.0, 1),
                  somno::Error);
  CHECK_THROWS_AS(somno::synth_epoch({SleepStage::S1, {1, 0, 0, 0, 0}, 0.0}, 255.5, 1.0, 1),
                  somno::Error);
}

TEST_CASE("synth_dataset") {
  SUBCASE("six separable profiles") {
    std::vector<somno::ProfileCount> plan;
    for (const auto& p : somno::separable_profiles(0.05)) plan.push_back({p, 100});
    const auto out = somno::synth_dataset(plan, kFs, 7);
    CHECK(out.dataset.size() == 600);
    CHECK(out.dataset.feature_width == 5);
    for (std::size_t n : out.dataset.class_counts()) CHECK(n == 100);
    CHECK(out.hypnogram.size() == 600);
  }
  SUBCASE("reference class counts and determinism") {
    std::vector<somno::ProfileCount> plan;
    const auto profiles = somno::default_profiles();
    for (std::size_t c = 0; c < 6; ++c) plan.push_back({profiles[c], somno::kReferenceClassCounts[c]});
    const auto a = somno::synth_dataset(plan, kFs, 11);
    CHECK(a.dataset.class_counts() == somno::kReferenceClassCounts);
    CHECK(a.dataset.size() == 1100);
    const auto b = somno::synth_dataset(plan, kFs, 11);
    REQUIRE(b.dataset.size() == a.dataset.size());
    for (std::size_t i = 0; i < a.dataset.size(); ++i) {
      CHECK(a.dataset.rows[i].features == b.dataset.rows[i].features);
    }
  }
  SUBCASE("movement epochs appear in the hypnogram but not the dataset") {
    const std::vector<somno::ProfileCount> plan = {
        {somno::default_profiles()[0], 3}, {somno::movement_profile(), 2}};
    const auto out = somno::synth_dataset(plan, kFs, 1);
    CHECK(out.hypnogram.size() == 5);
    CHECK(out.dataset.size() == 3);
  }
}

TEST_CASE("EDF round trip of generated signals keeps features within 1e-3") {
  std::vector<somno::ProfileCount> plan;
  for (const auto& p : somno::default_profiles()) plan.push_back({p, 2});
  const auto rec = somno::synth_recording(plan, kFs, 3, "C3-A2");
  const auto spec = somno::eeg_signal_spec("C3-A2", 7680);
  const somno::SignalData sig{spec, rec.series.samples};
  const auto edf = somno::EdfRecording::from_bytes(somno::write_recording({&sig, 1}, {}));
  const auto back = somno::read_signal(edf, std::string("C3-A2"));

  const auto before = somno::extract_features(std::span(&rec.series, 1));
  const auto after = somno::extract_features(std::span(&back, 1));
  REQUIRE(before.size() == 12);
  REQUIRE(after.size() == 12);
  for (std::size_t e = 0; e < before.size(); ++e) {
    for (std::size_t b = 0; b < 5; ++b) CHECK(std::fabs(before[e][b] - after[e][b]) <= 1e-3);
  }
}

TEST_CASE("profile file round trip and errors") {
  const auto profiles = somno::default_profiles();
  std::stringstream ss;
  somno::write_profiles(ss, profiles);
  const auto back = somno::read_profiles(ss);
  REQUIRE(back.size() == profiles.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].stage == profiles[i].stage);
    CHECK(back[i].band_weights == profiles[i].band_weights);
    CHECK(back[i].noise_fraction == profiles[i].noise_fraction);
  }

  std::istringstream tokens("stage,delta,theta,alpha,sigma,beta,noise\nW,0,0,1,0,0,0.1\nM,0.2,0.2,0.2,0.2,0.2,0.5\n");
  const auto t = somno::read_profiles(tokens);
  CHECK(t[0].stage == SleepStage::Awake);
  CHECK(t[1].stage == SleepStage::Movement);

  std::istringstream bad_sum("stage,delta,theta,alpha,sigma,beta,noise\nS1,0.5,0,0,0,0,0\n");
  CHECK_THROWS_WITH_AS(somno::read_profiles(bad_sum, "p.csv"), doctest::Contains("p.csv:2"),
                       somno::Error);
  std::istringstream bad_stage("stage,delta,theta,alpha,sigma,beta,noise\nS9,1,0,0,0,0,0\n");
  CHECK_THROWS_AS(somno::read_profiles(bad_stage), somno::Error);
  std::istringstream no_header("S1,1,0,0,0,0,0\n");
  CHECK_THROWS_AS(somno::read_profiles(no_header), somno::Error);
}
