#include "somno/stage.hpp"

#include <string>

#include "somno/error.hpp"

namespace somno {

namespace {

constexpr std::array<std::string_view, 7> kNames = {
    "Awake", "S1", "S2", "S3", "S4", "REM", "Movement"};
constexpr std::array<char, 7> kTokens = {'W', '1', '2', '3', '4', 'R', 'M'};

}  // namespace

SleepStage class_stage(std::size_t i) {
  if (i >= kNumClasses) {
    throw Error("class index " + std::to_string(i) + " is not a sleep stage");
  }
  return kClassStages[i];
}

std::string_view stage_name(SleepStage s) { return kNames[index_of(s)]; }

std::optional<SleepStage> stage_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return kAllStages[i];
  }
  return std::nullopt;
}

char stage_token(SleepStage s) { return kTokens[index_of(s)]; }

std::optional<SleepStage> stage_from_token(std::string_view token) {
  if (token.size() != 1) return std::nullopt;
  for (std::size_t i = 0; i < kTokens.size(); ++i) {
    if (kTokens[i] == token[0]) return kAllStages[i];
  }
  return std::nullopt;
}

}  // namespace somno
