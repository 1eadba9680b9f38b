#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "somno/dataset.hpp"
#include "somno/stage.hpp"

namespace somno {

// Exact ratio of counts. Percentages are rounded half-up only for display.
struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  // round(100 · num / den), halves rounded up, in exact integer arithmetic.
  std::uint64_t percent() const { return (200 * num + den) / (2 * den); }

  friend bool operator==(const Fraction&, const Fraction&) = default;
};

// Rows are the expert (actual) stage, columns the predicted stage, both in
// Awake, S1, S2, S3, S4, REM order.
class ConfusionMatrix {
 public:
  using Counts = std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(const Counts& counts) : counts_(counts) {}

  void add(SleepStage actual, SleepStage predicted, std::uint64_t n = 1);
  void merge(const ConfusionMatrix& other);

  std::uint64_t at(SleepStage actual, SleepStage predicted) const {
    return counts_[index_of(actual)][index_of(predicted)];
  }
  std::uint64_t row_sum(SleepStage actual) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;
  const Counts& counts() const { return counts_; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  Counts counts_{};
};

// Throws on length mismatch or a Movement label on either side.
ConfusionMatrix confusion_matrix(std::span<const SleepStage> actual,
                                 std::span<const SleepStage> predicted);

// Diagonal over row sum; nullopt for stages with no samples.
std::array<std::optional<Fraction>, kNumClasses> per_class_success(
    const ConfusionMatrix& cm);

// Trace over total. Throws for an empty matrix.
Fraction overall_accuracy(const ConfusionMatrix& cm);

// Confusion matrix over epochs where neither hypnogram says Movement.
ConfusionMatrix compare_hypnograms(const Hypnogram& expert,
                                   const Hypnogram& predicted);

struct StageComposition {
  SleepStage stage = SleepStage::Awake;
  std::size_t epochs = 0;
  double duration_s = 0.0;
  std::optional<Fraction> of_tts;  // sleep stages only, and only if TTS > 0
  Fraction of_ttr;
  std::string_view normative_tts;  // static reference range, sleep stages only
};

// Sleep architecture of one night. TTS sums S1-S4 and REM; TTR is every
// scored epoch including Awake and Movement.
struct ArchitectureReport {
  std::array<StageComposition, 7> stages;  // kAllStages order
  std::size_t tts_epochs = 0;
  double tts_s = 0.0;
  std::size_t ttr_epochs = 0;
  double ttr_s = 0.0;
  double epoch_duration_s = kDefaultEpochSeconds;

  const StageComposition& operator[](SleepStage s) const {
    return stages[index_of(s)];
  }
};

ArchitectureReport architecture_report(const Hypnogram& hypnogram);

// Stage composition and rounded percentages as printed for the published
// reference night (67/54/347/107/292/233/14 epochs). Used to footnote cells
// where the printed rounding disagrees with the exact ratios.
struct ReferenceComposition {
  std::array<std::size_t, 7> epochs;
  std::array<std::optional<int>, 7> printed_tts;
  std::array<int, 7> printed_ttr;
};
extern const ReferenceComposition kReferenceComposition;

// Plain-text tables; `footer` lines are appended verbatim.
std::string render_architecture_text(const ArchitectureReport& report,
                                     std::span<const std::string> footer = {});
std::string render_architecture_csv(const ArchitectureReport& report);
std::string render_confusion_text(const ConfusionMatrix& cm);
std::string render_confusion_csv(const ConfusionMatrix& cm);

}  // namespace somno
