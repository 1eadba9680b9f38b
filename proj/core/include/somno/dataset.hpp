#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "somno/spectral.hpp"
#include "somno/stage.hpp"

namespace somno {

// Whole-night stage sequence, one label per scoring epoch.
struct Hypnogram {
  std::vector<SleepStage> labels;
  double epoch_duration_s = kDefaultEpochSeconds;

  std::size_t size() const { return labels.size(); }
  double duration_s() const {
    return static_cast<double>(labels.size()) * epoch_duration_s;
  }
};

// One token per line from {W, 1, 2, 3, 4, R, M}; blank lines and lines
// starting with '#' are skipped. Errors name the offending line.
Hypnogram parse_hypnogram(std::string_view text,
                          std::string_view source = "hypnogram",
                          double epoch_duration_s = kDefaultEpochSeconds);
Hypnogram read_hypnogram_file(const std::filesystem::path& path,
                              double epoch_duration_s = kDefaultEpochSeconds);
// Writes tokens one per line; `footer` lines are emitted as '#' comments.
void write_hypnogram(std::ostream& out, const Hypnogram& hypnogram,
                     std::span<const std::string> footer = {});

struct LabeledRow {
  FeatureRow features;
  SleepStage stage = SleepStage::Awake;
  std::size_t epoch_index = 0;  // position in the source hypnogram
};

// Classifier corpus. Never holds Movement labels or NaN features.
struct LabeledDataset {
  std::size_t feature_width = 0;
  std::vector<LabeledRow> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  std::array<std::size_t, kNumClasses> class_counts() const;
};

// Pairs features with labels by epoch index, dropping Movement epochs and
// epochs with any NaN feature.
LabeledDataset build_dataset(std::span<const FeatureRow> features,
                             const Hypnogram& hypnogram);

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset validation;
};

// Per-class shuffle with Random(seed), classes visited in stage order;
// round(train_fraction × n) rows of each class (clamped to [1, n − 1]) go to
// train. Both outputs keep the input's row order.
DatasetSplit stratified_split(const LabeledDataset& dataset,
                              double train_fraction, std::uint64_t seed);

}  // namespace somno
