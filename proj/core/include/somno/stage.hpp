#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace somno {

// The six classifier classes in output-neuron order, then Movement, which
// only ever appears in scored hypnograms.
enum class SleepStage : unsigned char { Awake, S1, S2, S3, S4, REM, Movement };

inline constexpr std::size_t kNumClasses = 6;

inline constexpr std::array<SleepStage, kNumClasses> kClassStages = {
    SleepStage::Awake, SleepStage::S1, SleepStage::S2,
    SleepStage::S3,    SleepStage::S4, SleepStage::REM};

inline constexpr std::array<SleepStage, 7> kAllStages = {
    SleepStage::Awake, SleepStage::S1,  SleepStage::S2,      SleepStage::S3,
    SleepStage::S4,    SleepStage::REM, SleepStage::Movement};

constexpr std::size_t index_of(SleepStage s) {
  return static_cast<std::size_t>(s);
}

constexpr bool is_sleep(SleepStage s) {
  return s != SleepStage::Awake && s != SleepStage::Movement;
}

// Throws somno::Error for i >= kNumClasses.
SleepStage class_stage(std::size_t i);

// "Awake", "S1", ..., "REM", "Movement".
std::string_view stage_name(SleepStage s);
std::optional<SleepStage> stage_from_name(std::string_view name);

// Hypnogram tokens: W, 1, 2, 3, 4, R, M.
char stage_token(SleepStage s);
std::optional<SleepStage> stage_from_token(std::string_view token);

}  // namespace somno
