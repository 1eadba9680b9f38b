#include "somno/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "somno/dataset.hpp"
#include "somno/edf.hpp"
#include "somno/error.hpp"
#include "somno/metrics.hpp"
#include "somno/mlp.hpp"
#include "somno/random.hpp"
#include "somno/spectral.hpp"
#include "somno/synth.hpp"

#ifndef SOMNO_VERSION
#define SOMNO_VERSION "0.0.0"
#endif

namespace somno::cli {
namespace {

struct Options {
  std::string edf;
  std::string features;
  std::string hypnogram;
  std::string model;
  std::string expert;
  std::string scored;
  std::string output;
  std::string report;
  std::string profiles;
  std::vector<std::string> signals;
  double epoch_s = kDefaultEpochSeconds;
  std::size_t hidden = 6;
  std::vector<std::size_t> sweep;
  TrainConfig train;
  std::size_t repetitions = 10;
  bool csv = false;
  std::vector<std::size_t> counts{kReferenceClassCounts.begin(),
                                  kReferenceClassCounts.end()};
  double separable = -1.0;
  std::size_t movement = 0;
  std::size_t channels = 1;
  double rate = 256.0;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fraction_text(const Fraction& f) {
  return std::to_string(f.num) + "/" + std::to_string(f.den) + " = " +
         fmt("%.2f", 100.0 * f.value()) + "%";
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  return out;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  auto file = open_out(path);
  file << text;
  if (!file) throw Error("write failed: " + path);
}

std::vector<std::string> provenance(const std::string& command,
                                    const std::vector<std::string>& config) {
  std::string line = "somno " SOMNO_VERSION " " + command;
  for (const auto& item : config) line += " | " + item;
  return {line};
}

std::string footer_text(const std::vector<std::string>& lines) {
  std::string text = "--\n";
  for (const auto& l : lines) text += l + "\n";
  return text;
}

std::vector<std::string> train_config(const Options& o) {
  return {"seed " + std::to_string(o.train.seed),
          "lr " + fmt("%g", o.train.learning_rate),
          "max-epochs " + std::to_string(o.train.max_training_epochs),
          "patience " + std::to_string(o.train.patience),
          "epoch " + fmt("%g", o.epoch_s) + " s"};
}

std::vector<SampleSeries> load_channels(const EdfRecording& rec,
                                        const std::vector<std::string>& signals,
                                        std::size_t wanted) {
  std::vector<SampleSeries> channels;
  if (signals.empty()) {
    if (rec.header().n_signals() < wanted) {
      throw Error("recording has " + std::to_string(rec.header().n_signals()) +
                  " signal(s), " + std::to_string(wanted) + " needed");
    }
    for (std::size_t i = 0; i < wanted; ++i) {
      channels.push_back(read_signal(rec, SignalSelector{i}));
    }
    return channels;
  }
  if (signals.size() != wanted) {
    throw Error(std::to_string(signals.size()) + " signal(s) given, " +
                std::to_string(wanted) + " needed");
  }
  for (const auto& label : signals) {
    channels.push_back(read_signal(rec, SignalSelector{label}));
  }
  return channels;
}

std::vector<FeatureRow> load_features(const std::string& path) {
  auto in = open_in(path);
  return read_feature_file(in, path);
}

LabeledDataset load_dataset(const Options& o) {
  const auto rows = load_features(o.features);
  const Hypnogram hyp = read_hypnogram_file(o.hypnogram, o.epoch_s);
  return build_dataset(rows, hyp);
}

std::string class_count_line(const LabeledDataset& data) {
  const auto counts = data.class_counts();
  std::string line;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (i) line += "  ";
    line += std::string(stage_name(kClassStages[i])) + " " +
            std::to_string(counts[i]);
  }
  return line;
}

int cmd_info(const Options& o, std::ostream& out) {
  const auto rec = EdfRecording::load(o.edf);
  const EdfHeader& h = rec.header();
  std::ostringstream s;
  s << "version        " << h.version << '\n'
    << "patient        " << h.patient_id << '\n'
    << "recording      " << h.recording_id << '\n'
    << "start          " << h.start_date << ' ' << h.start_time << '\n'
    << "header bytes   " << h.header_bytes << '\n'
    << "records        " << h.n_records << '\n'
    << "record length  " << fmt("%g", h.record_duration_s) << " s\n"
    << "duration       " << fmt("%g", h.duration_s()) << " s\n"
    << "signals        " << h.n_signals() << '\n';
  for (std::size_t i = 0; i < h.n_signals(); ++i) {
    const SignalSpec& sig = h.signals[i];
    s << "  [" << i << "] " << sig.label << "  " << fmt("%g", h.sampling_rate(i))
      << " Hz  " << fmt("%g", sig.phys_min) << ".." << fmt("%g", sig.phys_max)
      << ' ' << sig.physical_dim << "  digital " << sig.dig_min << ".."
      << sig.dig_max << '\n';
  }
  out << s.str();
  return kExitOk;
}

int cmd_features(const Options& o, std::ostream& out) {
  const auto rec = EdfRecording::load(o.edf);
  const auto channels =
      load_channels(rec, o.signals, std::max<std::size_t>(1, o.signals.size()));
  const auto rows = extract_features(channels, o.epoch_s);
  auto file = open_out(o.output);
  write_feature_file(file, rows);
  const auto unclassifiable = std::count_if(rows.begin(), rows.end(), [](const auto& r) {
    return std::any_of(r.begin(), r.end(), [](double v) { return std::isnan(v); });
  });
  out << rows.size() << " epochs, " << unclassifiable << " unclassifiable\n";
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const LabeledDataset data = load_dataset(o);
  if (data.empty()) throw Error("no labeled epochs in " + o.hypnogram);
  const DatasetSplit split =
      stratified_split(data, kCrossValidationTrainFraction, o.train.seed);
  const std::vector<std::size_t> sizes{data.feature_width, o.hidden, kNumClasses};
  const FitResult result = fit(split.train, split.validation, sizes, o.train);

  auto file = open_out(o.output);
  write_model(file, result.model);
  if (!file) throw Error("write failed: " + o.output);

  const TrainReport& r = result.report;
  std::ostringstream s;
  s << "somno train  seed " << o.train.seed << '\n'
    << "network        " << sizes[0] << '-' << sizes[1] << '-' << sizes[2] << '\n'
    << "dataset        " << data.size() << " epochs (" << class_count_line(data)
    << ")\n"
    << "split          " << split.train.size() << " train, "
    << split.validation.size() << " validation\n"
    << "epochs run     " << r.epochs_run() << '\n'
    << "best epoch     " << r.best_epoch << '\n'
    << "train error    " << fmt("%.6f", r.training_error.at(r.best_epoch - 1)) << '\n'
    << "val error      " << fmt("%.6f", r.best_validation_error()) << '\n'
    << "validation     "
    << fraction_text(overall_accuracy(evaluate(result.model, split.validation)))
    << '\n';
  const ConfusionMatrix all = evaluate(result.model, data);
  s << "dataset        " << fraction_text(overall_accuracy(all)) << "\n\n"
    << render_confusion_text(all) << '\n';
  auto config = train_config(o);
  config.push_back("hidden " + std::to_string(o.hidden));
  s << footer_text(provenance("train", config));
  emit(s.str(), o.report, out);
  return kExitOk;
}

void write_cv(std::ostringstream& s, const CvReport& cv) {
  for (std::size_t i = 0; i < cv.accuracies.size(); ++i) {
    s << "  rep " << (i + 1 < 10 ? " " : "") << i + 1 << "  accuracy "
      << fmt("%.4f", cv.accuracies[i]) << "  best epoch " << cv.best_epochs[i]
      << '\n';
  }
  s << "mean accuracy  " << fmt("%.4f", cv.mean_accuracy) << "\n\n"
    << render_confusion_text(cv.pooled) << '\n';
}

int cmd_crossval(const Options& o, std::ostream& out) {
  const LabeledDataset data = load_dataset(o);
  std::ostringstream s;
  s << "somno crossval  seed " << o.train.seed << '\n'
    << "dataset        " << data.size() << " epochs (" << class_count_line(data)
    << ")\n"
    << "repetitions    " << o.repetitions << " x "
    << fmt("%g", 100 * kCrossValidationTrainFraction) << "/"
    << fmt("%g", 100 * (1 - kCrossValidationTrainFraction)) << " stratified\n";
  auto config = train_config(o);
  config.push_back("repetitions " + std::to_string(o.repetitions));
  if (o.sweep.empty()) {
    const std::vector<std::size_t> sizes{data.feature_width, o.hidden, kNumClasses};
    const CvReport cv = cross_validate(data, sizes, o.train, o.repetitions);
    s << "network        " << sizes[0] << '-' << sizes[1] << '-' << sizes[2]
      << "\n\n";
    write_cv(s, cv);
    config.push_back("hidden " + std::to_string(o.hidden));
  } else {
    const SweepResult sweep = hidden_sweep(data, o.sweep, o.train, o.repetitions);
    s << "\nhidden  mean accuracy\n";
    for (const auto& e : sweep.entries) {
      s << fmt("%6.0f", static_cast<double>(e.hidden)) << "  "
        << fmt("%.4f", e.report.mean_accuracy) << '\n';
    }
    const SweepEntry& best = sweep.entries.at(sweep.best);
    s << "\nbest network   " << data.feature_width << '-' << best.hidden << '-'
      << kNumClasses << "\n\n";
    write_cv(s, best.report);
    std::string list;
    for (std::size_t h : o.sweep) list += (list.empty() ? "" : ",") + std::to_string(h);
    config.push_back("hidden-sweep " + list);
  }
  s << footer_text(provenance("crossval", config));
  emit(s.str(), o.report, out);
  return kExitOk;
}

int cmd_score(const Options& o, std::ostream& out) {
  auto model_in = open_in(o.model);
  const Mlp model = read_model(model_in, o.model);
  if (model.input_size() % kNumBands != 0) {
    throw Error(o.model + ": input width " + std::to_string(model.input_size()) +
                " is not a multiple of " + std::to_string(kNumBands));
  }
  const auto rec = EdfRecording::load(o.edf);
  const auto channels =
      load_channels(rec, o.signals, model.input_size() / kNumBands);
  const auto rows = extract_features(channels, o.epoch_s);

  Hypnogram hyp;
  hyp.epoch_duration_s = o.epoch_s;
  std::size_t unclassifiable = 0;
  for (const auto& row : rows) {
    if (std::any_of(row.begin(), row.end(), [](double v) { return std::isnan(v); })) {
      hyp.labels.push_back(SleepStage::Movement);
      ++unclassifiable;
    } else {
      hyp.labels.push_back(predict(model, row));
    }
  }
  const auto footer = provenance("score", {"epoch " + fmt("%g", o.epoch_s) + " s"});
  auto file = open_out(o.output);
  write_hypnogram(file, hyp, footer);
  if (!file) throw Error("write failed: " + o.output);
  out << rows.size() << " epochs scored, " << unclassifiable
      << " unclassifiable\n";
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  const Hypnogram hyp = read_hypnogram_file(o.hypnogram, o.epoch_s);
  const ArchitectureReport report = architecture_report(hyp);
  if (o.csv) {
    emit(render_architecture_csv(report), o.output, out);
  } else {
    auto footer = provenance("report", {"epoch " + fmt("%g", o.epoch_s) + " s"});
    footer.insert(footer.begin(), "--");
    emit(render_architecture_text(report, footer), o.output, out);
  }
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const Hypnogram expert = read_hypnogram_file(o.expert, o.epoch_s);
  const Hypnogram scored = read_hypnogram_file(o.scored, o.epoch_s);
  const ConfusionMatrix cm = compare_hypnograms(expert, scored);
  if (o.csv) {
    emit(render_confusion_csv(cm), o.output, out);
  } else {
    emit(render_confusion_text(cm) + footer_text(provenance("evaluate", {})),
         o.output, out);
  }
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  std::vector<StageProfile> profiles;
  if (!o.profiles.empty()) {
    auto in = open_in(o.profiles);
    profiles = read_profiles(in, o.profiles);
  } else if (o.separable >= 0.0) {
    profiles = separable_profiles(o.separable);
  } else {
    profiles = default_profiles();
  }
  if (o.counts.size() != profiles.size()) {
    throw Error(std::to_string(o.counts.size()) + " counts for " +
                std::to_string(profiles.size()) + " profiles");
  }
  std::vector<ProfileCount> plan;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    plan.push_back({profiles[i], o.counts[i]});
  }
  if (o.movement > 0) plan.push_back({movement_profile(), o.movement});

  const double spr = o.rate * o.epoch_s;
  if (spr != std::floor(spr) || spr < 1 || spr > 32767) {
    throw Error("rate x epoch must be a whole number of samples per record");
  }

  std::vector<SynthRecording> recordings;
  for (std::size_t c = 0; c < o.channels; ++c) {
    const std::uint64_t seed = c == 0 ? o.train.seed : derive_seed(o.train.seed, c);
    recordings.push_back(synth_recording(plan, o.rate, seed,
                                         "EEG" + std::to_string(c + 1), o.epoch_s));
  }
  std::vector<SignalData> signals;
  for (const auto& r : recordings) {
    double peak = 0.0;
    for (double v : r.series.samples) peak = std::max(peak, std::abs(v));
    const double limit = std::max(250.0, std::ceil(peak));
    signals.push_back({eeg_signal_spec(r.series.label, static_cast<int>(spr), limit),
                       r.series.samples});
  }
  RecordingFields fields;
  fields.patient_id = "X X X X";
  fields.recording_id = "Startdate X X X somno-synth seed " + std::to_string(o.train.seed);
  fields.record_duration_s = o.epoch_s;
  auto file = open_out(o.output);
  write_recording(signals, fields, file);
  if (!file) throw Error("write failed: " + o.output);

  auto hyp_file = open_out(o.hypnogram);
  write_hypnogram(hyp_file, recordings.front().hypnogram,
                  provenance("synth", {"seed " + std::to_string(o.train.seed)}));
  if (!hyp_file) throw Error("write failed: " + o.hypnogram);

  out << recordings.front().hypnogram.size() << " epochs, " << o.channels
      << " channel(s) at " << fmt("%g", o.rate) << " Hz, seed " << o.train.seed
      << '\n';
  return kExitOk;
}

void add_train_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--hidden", o.hidden, "Hidden layer width")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lr", o.train.learning_rate, "Learning rate")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-epochs", o.train.max_training_epochs,
                  "Maximum training epochs")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--patience", o.train.patience,
                  "Epochs without improvement before stopping")
      ->check(CLI::PositiveNumber);
}

void add_seed(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.train.seed, "Root random seed");
}

void add_epoch(CLI::App* cmd, Options& o) {
  cmd->add_option("--epoch", o.epoch_s, "Epoch duration in seconds")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Sleep staging from EEG spectral features", "somno"};
  app.set_version_flag("--version", SOMNO_VERSION);
  app.require_subcommand(1);

  auto* info = app.add_subcommand("info", "Print an EDF header");
  info->add_option("edf", o.edf, "EDF file")->required();

  auto* features = app.add_subcommand("features", "EDF to feature file");
  features->add_option("edf", o.edf, "EDF file")->required();
  features->add_option("-o,--output", o.output, "Feature file")->required();
  features->add_option("--signals", o.signals, "One or two signal labels")
      ->expected(1, 2);
  add_epoch(features, o);

  auto* train = app.add_subcommand("train", "Fit a network on one recording");
  train->add_option("features", o.features, "Feature file")->required();
  train->add_option("hypnogram", o.hypnogram, "Expert hypnogram")->required();
  train->add_option("-o,--output", o.output, "Model file")->required();
  train->add_option("--report", o.report, "Write the report here");
  add_train_flags(train, o);
  add_seed(train, o);
  add_epoch(train, o);

  auto* crossval = app.add_subcommand("crossval", "Repeated stratified validation");
  crossval->add_option("features", o.features, "Feature file")->required();
  crossval->add_option("hypnogram", o.hypnogram, "Expert hypnogram")->required();
  crossval->add_option("--report", o.report, "Write the report here");
  crossval->add_option("--repetitions", o.repetitions, "Number of repetitions")
      ->check(CLI::PositiveNumber);
  crossval->add_option("--hidden-sweep", o.sweep, "Hidden widths to compare")
      ->delimiter(',');
  add_train_flags(crossval, o);
  add_seed(crossval, o);
  add_epoch(crossval, o);

  auto* score = app.add_subcommand("score", "Stage a recording with a model");
  score->add_option("model", o.model, "Model file")->required();
  score->add_option("edf", o.edf, "EDF file")->required();
  score->add_option("-o,--output", o.output, "Hypnogram file")->required();
  score->add_option("--signals", o.signals, "Signal labels")->expected(1, 2);
  add_epoch(score, o);

  auto* report = app.add_subcommand("report", "Sleep architecture of a hypnogram");
  report->add_option("hypnogram", o.hypnogram, "Hypnogram")->required();
  report->add_option("-o,--output", o.output, "Write the report here");
  report->add_flag("--csv", o.csv, "CSV instead of text");
  add_epoch(report, o);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare two hypnograms");
  evaluate_cmd->add_option("expert", o.expert, "Expert hypnogram")->required();
  evaluate_cmd->add_option("scored", o.scored, "Scored hypnogram")->required();
  evaluate_cmd->add_option("-o,--output", o.output, "Write the table here");
  evaluate_cmd->add_flag("--csv", o.csv, "CSV instead of text");
  add_epoch(evaluate_cmd, o);

  auto* synth = app.add_subcommand("synth", "Synthetic EDF and hypnogram");
  synth->add_option("-o,--output", o.output, "EDF file")->required();
  synth->add_option("--hypnogram", o.hypnogram, "Hypnogram file")->required();
  auto* profiles_opt = synth->add_option("--profiles", o.profiles, "Profile file");
  synth->add_option("--separable", o.separable,
                    "Use disjoint-band profiles with this noise fraction")
      ->check(CLI::Range(0.0, 0.99))
      ->excludes(profiles_opt);
  synth->add_option("--counts", o.counts, "Epochs per profile")->delimiter(',');
  synth->add_option("--movement", o.movement, "Movement epochs appended");
  synth->add_option("--channels", o.channels, "1 or 2")->check(CLI::Range(1, 2));
  synth->add_option("--rate", o.rate, "Sampling rate in Hz")
      ->check(CLI::PositiveNumber);
  add_seed(synth, o);
  add_epoch(synth, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (info->parsed()) return cmd_info(o, out);
    if (features->parsed()) return cmd_features(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (crossval->parsed()) return cmd_crossval(o, out);
    if (score->parsed()) return cmd_score(o, out);
    if (report->parsed()) return cmd_report(o, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(o, out);
    if (synth->parsed()) return cmd_synth(o, out);
  } catch (const std::exception& e) {
    err << "somno: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace somno::cli
