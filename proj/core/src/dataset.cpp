#include "somno/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "somno/error.hpp"
#include "somno/random.hpp"

namespace somno {

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

}  // namespace

Hypnogram parse_hypnogram(std::string_view text, std::string_view source,
                          double epoch_duration_s) {
  if (!(epoch_duration_s > 0.0)) throw Error("epoch duration must be positive");
  Hypnogram h;
  h.epoch_duration_s = epoch_duration_s;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view line = strip(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto stage = stage_from_token(line);
    if (!stage) {
      throw Error(std::string(source) + ":" + std::to_string(line_no) +
                  ": unknown stage token '" + std::string(line) + "'");
    }
    h.labels.push_back(*stage);
  }
  if (h.labels.empty()) {
    throw Error(std::string(source) + ": hypnogram has no epochs");
  }
  return h;
}

Hypnogram read_hypnogram_file(const std::filesystem::path& path,
                              double epoch_duration_s) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open hypnogram '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return parse_hypnogram(text, path.string(), epoch_duration_s);
}

void write_hypnogram(std::ostream& out, const Hypnogram& hypnogram,
                     std::span<const std::string> footer) {
  for (SleepStage s : hypnogram.labels) out << stage_token(s) << '\n';
  for (const auto& line : footer) out << "# " << line << '\n';
}

std::array<std::size_t, kNumClasses> LabeledDataset::class_counts() const {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& row : rows) ++counts[index_of(row.stage)];
  return counts;
}

LabeledDataset build_dataset(std::span<const FeatureRow> features,
                             const Hypnogram& hypnogram) {
  if (features.size() != hypnogram.size()) {
    throw Error("feature/hypnogram length mismatch: " +
                std::to_string(features.size()) + " feature rows vs " +
                std::to_string(hypnogram.size()) + " scored epochs");
  }
  LabeledDataset ds;
  ds.feature_width = features.empty() ? 0 : features.front().size();
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != ds.feature_width) {
      throw Error("feature row " + std::to_string(i) + " has width " +
                  std::to_string(features[i].size()) + ", expected " +
                  std::to_string(ds.feature_width));
    }
    const SleepStage stage = hypnogram.labels[i];
    if (stage == SleepStage::Movement) continue;
    const bool has_nan = std::any_of(features[i].begin(), features[i].end(),
                                     [](double v) { return std::isnan(v); });
    if (has_nan) continue;
    ds.rows.push_back(LabeledRow{features[i], stage, i});
  }
  return ds;
}

DatasetSplit stratified_split(const LabeledDataset& dataset,
                              double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train fraction must lie strictly between 0 and 1");
  }
  if (dataset.empty()) throw Error("cannot split an empty dataset");

  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    by_class[index_of(dataset.rows[i].stage)].push_back(i);
  }

  Random rng(seed);
  std::vector<bool> to_train(dataset.rows.size(), false);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < 2) {
      throw Error("class " + std::string(stage_name(class_stage(c))) +
                  " has a single row; a split needs at least 2 per class");
    }
    rng.shuffle(std::span(members));
    const auto n = static_cast<long>(members.size());
    const long n_train =
        std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);
    for (long k = 0; k < n_train; ++k) to_train[members[static_cast<std::size_t>(k)]] = true;
  }

  DatasetSplit split;
  split.train.feature_width = dataset.feature_width;
  split.validation.feature_width = dataset.feature_width;
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    (to_train[i] ? split.train : split.validation).rows.push_back(dataset.rows[i]);
  }
  return split;
}

}  // namespace somno
