#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "somno/dataset.hpp"
#include "somno/edf.hpp"
#include "somno/spectral.hpp"
#include "somno/stage.hpp"

namespace somno {

// Target band composition of synthetic epochs for one stage.
struct StageProfile {
  SleepStage stage = SleepStage::Awake;
  std::array<double, kNumBands> band_weights{};  // sums to 1
  double noise_fraction = 0.0;                   // in [0, 1)
};

void validate(const StageProfile& profile);

// RMS amplitude of generated epochs; keeps samples well inside ±250 µV.
inline constexpr double kSynthRmsMicrovolts = 20.0;

// DFT bin index of the tone used for a band: the middle retained bin of the
// band for an epoch of n samples at sampling_rate.
std::size_t band_tone_bin(Band band, std::size_t n, double sampling_rate);

// One tone per weighted band at its centre bin with amplitude² ∝ weight and
// a random phase, plus Gaussian white noise whose expected share of the
// [0.5, 32] Hz power is noise_fraction. Deterministic in seed.
Epoch synth_epoch(const StageProfile& profile, double sampling_rate,
                  double duration_s, std::uint64_t seed);

struct ProfileCount {
  StageProfile profile;
  std::size_t count = 0;
};

struct SynthRecording {
  SampleSeries series;
  Hypnogram hypnogram;
};

// Epochs in plan order, profile by profile; epoch j uses
// derive_seed(seed, j).
SynthRecording synth_recording(std::span<const ProfileCount> plan,
                               double sampling_rate, std::uint64_t seed,
                               std::string label = "EEG",
                               double duration_s = kDefaultEpochSeconds);

struct SynthDataset {
  LabeledDataset dataset;
  Hypnogram hypnogram;
};

// Generates the recording above and runs it through feature extraction and
// build_dataset.
SynthDataset synth_dataset(std::span<const ProfileCount> plan,
                           double sampling_rate, std::uint64_t seed,
                           double duration_s = kDefaultEpochSeconds);

// Awake alpha-dominant, S1/REM theta-dominant, S2 theta + sigma, S3/S4
// delta-dominant with overlapping compositions.
std::vector<StageProfile> default_profiles();

// One clearly separated profile per class.
std::vector<StageProfile> separable_profiles(double noise_fraction);

// Broadband profile used for Movement epochs.
StageProfile movement_profile();

// Epoch counts of the reference night in Awake, S1, S2, S3, S4, REM order.
inline constexpr std::array<std::size_t, kNumClasses> kReferenceClassCounts = {
    67, 54, 347, 107, 292, 233};

// Profile file: header `stage,delta,theta,alpha,sigma,beta,noise`, then one
// row per profile. Stage may be a name (Awake, S1, ...) or a hypnogram
// token (W, 1, ...).
std::vector<StageProfile> read_profiles(std::istream& in,
                                        std::string_view source = "profiles");
void write_profiles(std::ostream& out, std::span<const StageProfile> profiles);

}  // namespace somno
