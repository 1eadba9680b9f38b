#include "somno/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "somno/error.hpp"

namespace somno {

namespace {

constexpr std::array<std::string_view, 7> kNormativeTts = {
    "---", "< 10", "~ 50", "~ 10", "~ 10", "20 to 25", "---"};

void require_class(SleepStage s, std::string_view side) {
  if (s == SleepStage::Movement) {
    throw Error("Movement label in " + std::string(side) +
                " stages; confusion matrices cover the six sleep classes only");
  }
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad_left(std::string_view s, std::size_t width) {
  std::string out(width > s.size() ? width - s.size() : 0, ' ');
  out.append(s);
  return out;
}

std::string pad_right(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

std::string display_percent(const Fraction& f) {
  return std::to_string(f.percent()) + " (" + fixed(100.0 * f.value(), 2) + ")";
}

bool matches_reference(const ArchitectureReport& r) {
  for (std::size_t i = 0; i < kAllStages.size(); ++i) {
    if (r.stages[i].epochs != kReferenceComposition.epochs[i]) return false;
  }
  return true;
}

}  // namespace

const ReferenceComposition kReferenceComposition = {
    {67, 54, 347, 107, 292, 233, 14},
    {std::nullopt, 5, 34, 10, 26, 21, std::nullopt},
    {6, 5, 31, 10, 26, 21, 1},
};

void ConfusionMatrix::add(SleepStage actual, SleepStage predicted,
                          std::uint64_t n) {
  require_class(actual, "actual");
  require_class(predicted, "predicted");
  counts_[index_of(actual)][index_of(predicted)] += n;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    for (std::size_t j = 0; j < kNumClasses; ++j) counts_[i][j] += other.counts_[i][j];
  }
}

std::uint64_t ConfusionMatrix::row_sum(SleepStage actual) const {
  std::uint64_t n = 0;
  for (std::uint64_t c : counts_[index_of(actual)]) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts_) {
    for (std::uint64_t c : row) n += c;
  }
  return n;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) n += counts_[i][i];
  return n;
}

ConfusionMatrix confusion_matrix(std::span<const SleepStage> actual,
                                 std::span<const SleepStage> predicted) {
  if (actual.size() != predicted.size()) {
    throw Error("label length mismatch: " + std::to_string(actual.size()) +
                " actual vs " + std::to_string(predicted.size()) + " predicted");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < actual.size(); ++i) cm.add(actual[i], predicted[i]);
  return cm;
}

std::array<std::optional<Fraction>, kNumClasses> per_class_success(
    const ConfusionMatrix& cm) {
  std::array<std::optional<Fraction>, kNumClasses> rates;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    const std::uint64_t n = cm.row_sum(kClassStages[i]);
    if (n > 0) rates[i] = Fraction{cm.counts()[i][i], n};
  }
  return rates;
}

Fraction overall_accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t n = cm.total();
  if (n == 0) throw Error("overall accuracy of an empty confusion matrix");
  return Fraction{cm.trace(), n};
}

ConfusionMatrix compare_hypnograms(const Hypnogram& expert,
                                   const Hypnogram& predicted) {
  if (expert.size() != predicted.size()) {
    throw Error("hypnogram length mismatch: " + std::to_string(expert.size()) +
                " vs " + std::to_string(predicted.size()) + " epochs");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < expert.size(); ++i) {
    const SleepStage a = expert.labels[i];
    const SleepStage p = predicted.labels[i];
    if (a == SleepStage::Movement || p == SleepStage::Movement) continue;
    cm.add(a, p);
  }
  return cm;
}

ArchitectureReport architecture_report(const Hypnogram& hypnogram) {
  if (hypnogram.labels.empty()) {
    throw Error("architecture report of an empty hypnogram");
  }
  ArchitectureReport r;
  r.epoch_duration_s = hypnogram.epoch_duration_s;
  for (std::size_t i = 0; i < kAllStages.size(); ++i) {
    r.stages[i].stage = kAllStages[i];
    r.stages[i].normative_tts = kNormativeTts[i];
  }
  for (SleepStage s : hypnogram.labels) ++r.stages[index_of(s)].epochs;

  for (const auto& line : r.stages) {
    if (is_sleep(line.stage)) r.tts_epochs += line.epochs;
  }
  r.ttr_epochs = hypnogram.size();
  r.tts_s = static_cast<double>(r.tts_epochs) * r.epoch_duration_s;
  r.ttr_s = static_cast<double>(r.ttr_epochs) * r.epoch_duration_s;

  for (auto& line : r.stages) {
    line.duration_s = static_cast<double>(line.epochs) * r.epoch_duration_s;
    line.of_ttr = Fraction{line.epochs, r.ttr_epochs};
    if (is_sleep(line.stage) && r.tts_epochs > 0) {
      line.of_tts = Fraction{line.epochs, r.tts_epochs};
    }
  }
  return r;
}

std::string render_architecture_text(const ArchitectureReport& r,
                                     std::span<const std::string> footer) {
  const bool reference = matches_reference(r);
  std::vector<std::string> notes;
  auto cell = [&](std::size_t stage, const std::optional<Fraction>& f,
                  std::optional<int> printed, std::string_view column) {
    if (!f) return std::string("---");
    std::string s = display_percent(*f);
    if (reference && printed && static_cast<std::uint64_t>(*printed) != f->percent()) {
      notes.push_back("[" + std::to_string(notes.size() + 1) + "] " +
                      std::string(stage_name(kAllStages[stage])) + " " +
                      std::string(column) + ": computed " +
                      std::to_string(f->num) + "/" + std::to_string(f->den) +
                      " = " + fixed(100.0 * f->value(), 2) +
                      "%, the reference scoring prints " +
                      std::to_string(*printed) + "%");
      s += "[" + std::to_string(notes.size()) + "]";
    }
    return s;
  };

  std::ostringstream out;
  out << pad_right("Stage", 10) << pad_left("Epochs", 8)
      << pad_left("Duration(s)", 13) << "  " << pad_right("%TTS", 16)
      << pad_right("%TV-TTS", 10) << pad_right("%TTR", 16) << '\n';
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    const auto& line = r.stages[i];
    out << pad_right(stage_name(line.stage), 10)
        << pad_left(std::to_string(line.epochs), 8)
        << pad_left(fixed(line.duration_s, 0), 13) << "  "
        << pad_right(cell(i, line.of_tts, kReferenceComposition.printed_tts[i], "%TTS"), 16)
        << pad_right(line.normative_tts, 10)
        << pad_right(cell(i, line.of_ttr, kReferenceComposition.printed_ttr[i], "%TTR"), 16)
        << '\n';
  }
  out << pad_right("TTS", 10) << pad_left(std::to_string(r.tts_epochs), 8)
      << pad_left(fixed(r.tts_s, 0), 13) << '\n';
  out << pad_right("TTR", 10) << pad_left(std::to_string(r.ttr_epochs), 8)
      << pad_left(fixed(r.ttr_s, 0), 13) << '\n';
  out << "Percentages: integer rounded half-up, exact value in parentheses.\n";
  for (const auto& n : notes) out << n << '\n';
  for (const auto& f : footer) out << f << '\n';

  std::string text = out.str();
  std::string trimmed;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line(text.data() + start, nl - start);
    while (!line.empty() && line.back() == ' ') line.remove_suffix(1);
    trimmed.append(line).push_back('\n');
    start = nl + 1;
  }
  return trimmed;
}

std::string render_architecture_csv(const ArchitectureReport& r) {
  std::ostringstream out;
  out << "stage,epochs,duration_s,pct_tts,pct_tts_rounded,pct_tv_tts,pct_ttr,"
         "pct_ttr_rounded\n";
  char buf[64];
  for (const auto& line : r.stages) {
    out << stage_name(line.stage) << ',' << line.epochs << ','
        << fixed(line.duration_s, 0) << ',';
    if (line.of_tts) {
      std::snprintf(buf, sizeof buf, "%.17g", 100.0 * line.of_tts->value());
      out << buf << ',' << line.of_tts->percent();
    } else {
      out << ',';
    }
    out << ',' << (is_sleep(line.stage) ? line.normative_tts : "") << ',';
    std::snprintf(buf, sizeof buf, "%.17g", 100.0 * line.of_ttr.value());
    out << buf << ',' << line.of_ttr.percent() << '\n';
  }
  out << "TTS," << r.tts_epochs << ',' << fixed(r.tts_s, 0) << ",,,,,\n";
  out << "TTR," << r.ttr_epochs << ',' << fixed(r.ttr_s, 0) << ",,,,,\n";
  return out.str();
}

std::string render_confusion_text(const ConfusionMatrix& cm) {
  const auto rates = per_class_success(cm);
  std::ostringstream out;
  out << pad_right("as ->", 8);
  for (SleepStage s : kClassStages) out << pad_left(stage_name(s), 7);
  out << pad_left("Success", 9) << '\n';
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    out << pad_right(stage_name(kClassStages[i]), 8);
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      out << pad_left(std::to_string(cm.counts()[i][j]), 7);
    }
    out << pad_left(rates[i] ? std::to_string(rates[i]->percent()) + "%" : "---", 9)
        << '\n';
  }
  if (cm.total() > 0) {
    const Fraction acc = overall_accuracy(cm);
    out << "Overall: " << acc.num << '/' << acc.den << " = "
        << fixed(100.0 * acc.value(), 2) << "% (" << acc.percent() << "%)\n";
  }
  return out.str();
}

std::string render_confusion_csv(const ConfusionMatrix& cm) {
  const auto rates = per_class_success(cm);
  std::ostringstream out;
  out << "actual";
  for (SleepStage s : kClassStages) out << ',' << stage_name(s);
  out << ",success\n";
  char buf[64];
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    out << stage_name(kClassStages[i]);
    for (std::size_t j = 0; j < kNumClasses; ++j) out << ',' << cm.counts()[i][j];
    out << ',';
    if (rates[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", rates[i]->value());
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace somno
