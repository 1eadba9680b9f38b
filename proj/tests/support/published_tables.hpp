#pragma once

// Counts from the published scoring of the reference night, used as golden
// inputs.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "somno/dataset.hpp"
#include "somno/metrics.hpp"

namespace somno::golden {

// Rows actual, columns predicted, Awake S1 S2 S3 S4 REM.
inline const ConfusionMatrix::Counts kConfusionCounts = {{
    {59, 0, 0, 0, 5, 3},
    {11, 0, 17, 0, 2, 24},
    {3, 1, 291, 0, 21, 31},
    {0, 0, 39, 3, 52, 13},
    {1, 0, 9, 2, 278, 2},
    {7, 0, 16, 0, 6, 204},
}};

inline constexpr std::array<std::uint64_t, 6> kSuccessPercent = {88, 0, 84, 3, 95, 88};
inline constexpr std::uint64_t kOverallPercent = 76;

// Awake S1 S2 S3 S4 REM Movement.
inline constexpr std::array<std::size_t, 7> kStageEpochs = {67, 54, 347, 107, 292, 233, 14};

// Label sequences whose confusion matrix is kConfusionCounts.
inline void replay(std::vector<SleepStage>& actual, std::vector<SleepStage>& predicted) {
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      for (std::uint64_t n = 0; n < kConfusionCounts[i][j]; ++n) {
        actual.push_back(kClassStages[i]);
        predicted.push_back(kClassStages[j]);
      }
    }
  }
}

// Hypnogram with the reference composition, stages interleaved.
inline Hypnogram reference_hypnogram() {
  Hypnogram h;
  auto remaining = kStageEpochs;
  bool any = true;
  while (any) {
    any = false;
    for (std::size_t s = 0; s < 7; ++s) {
      if (remaining[s] == 0) continue;
      h.labels.push_back(kAllStages[s]);
      --remaining[s];
      any = true;
    }
  }
  return h;
}

}  // namespace somno::golden
