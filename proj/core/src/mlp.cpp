#include "somno/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

#include "somno/error.hpp"
#include "somno/random.hpp"

namespace somno {

namespace {

constexpr std::string_view kModelMagic = "SOMNO-MLP";
constexpr int kModelVersion = 1;

void check_width(const Mlp& mlp, std::size_t width) {
  if (width != mlp.input_size()) {
    throw Error("input width " + std::to_string(width) +
                " does not match network input size " +
                std::to_string(mlp.input_size()));
  }
}

void check_target(const Mlp& mlp, std::span<const double> target) {
  if (target.size() != mlp.output_size()) {
    throw Error("target width " + std::to_string(target.size()) +
                " does not match network output size " +
                std::to_string(mlp.output_size()));
  }
}

void check_dataset(const Mlp& mlp, const LabeledDataset& data) {
  for (const auto& row : data.rows) {
    check_width(mlp, row.features.size());
    if (index_of(row.stage) >= mlp.output_size()) {
      throw Error("label " + std::string(stage_name(row.stage)) +
                  " has no output neuron in a network with " +
                  std::to_string(mlp.output_size()) + " outputs");
    }
  }
}

double row_error(const Mlp& mlp, const LabeledRow& row) {
  const auto out = outputs(mlp, row.features);
  double e = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double t = j == index_of(row.stage) ? 1.0 : 0.0;
    e += (out[j] - t) * (out[j] - t);
  }
  return 0.5 * e;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) {
    throw Error("a network needs at least an input and an output layer");
  }
  for (std::size_t s : sizes_) {
    if (s == 0) throw Error("layer sizes must be at least 1");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    Layer layer;
    layer.inputs = sizes_[l];
    layer.outputs = sizes_[l + 1];
    layer.weights.assign(layer.inputs * layer.outputs, 0.0);
    layer.biases.assign(layer.outputs, 0.0);
    layers_.push_back(std::move(layer));
  }
}

Mlp Mlp::init(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
  Mlp mlp(std::move(layer_sizes));
  Random rng(seed);
  for (Layer& layer : mlp.layers_) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
  }
  return mlp;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.biases.size() + l.weights.size();
  return n;
}

std::vector<double> Mlp::parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (const Layer& l : layers_) {
    for (std::size_t j = 0; j < l.outputs; ++j) {
      p.push_back(l.biases[j]);
      for (std::size_t i = 0; i < l.inputs; ++i) p.push_back(l.weight(j, i));
    }
  }
  return p;
}

void Mlp::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw Error("expected " + std::to_string(parameter_count()) +
                " parameters, got " + std::to_string(values.size()));
  }
  std::size_t k = 0;
  for (Layer& l : layers_) {
    for (std::size_t j = 0; j < l.outputs; ++j) {
      l.biases[j] = values[k++];
      for (std::size_t i = 0; i < l.inputs; ++i) l.weight(j, i) = values[k++];
    }
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<std::vector<double>> forward(const Mlp& mlp,
                                         std::span<const double> input) {
  check_width(mlp, input.size());
  for (double v : input) {
    if (!std::isfinite(v)) throw Error("network input is not finite");
  }
  std::vector<std::vector<double>> acts;
  acts.reserve(mlp.layers().size() + 1);
  acts.emplace_back(input.begin(), input.end());
  for (const Layer& layer : mlp.layers()) {
    const auto& prev = acts.back();
    std::vector<double> next(layer.outputs);
    for (std::size_t j = 0; j < layer.outputs; ++j) {
      double z = layer.biases[j];
      for (std::size_t i = 0; i < layer.inputs; ++i) z += layer.weight(j, i) * prev[i];
      next[j] = sigmoid(z);
    }
    acts.push_back(std::move(next));
  }
  return acts;
}

std::vector<double> outputs(const Mlp& mlp, std::span<const double> input) {
  return std::move(forward(mlp, input).back());
}

double squared_error(const Mlp& mlp, std::span<const double> input,
                     std::span<const double> target) {
  check_target(mlp, target);
  const auto out = outputs(mlp, input);
  double e = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    e += (out[j] - target[j]) * (out[j] - target[j]);
  }
  return 0.5 * e;
}

std::vector<double> gradient(const Mlp& mlp, std::span<const double> input,
                             std::span<const double> target) {
  check_target(mlp, target);
  const auto acts = forward(mlp, input);
  const auto& layers = mlp.layers();

  // delta[l][j] = ∂E/∂z for neuron j of layer l's output.
  std::vector<std::vector<double>> delta(layers.size());
  {
    const auto& out = acts.back();
    auto& d = delta.back();
    d.resize(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      d[j] = (out[j] - target[j]) * out[j] * (1.0 - out[j]);
    }
  }
  for (std::size_t l = layers.size() - 1; l-- > 0;) {
    const Layer& above = layers[l + 1];
    const auto& a = acts[l + 1];
    auto& d = delta[l];
    d.assign(layers[l].outputs, 0.0);
    for (std::size_t i = 0; i < above.inputs; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < above.outputs; ++j) {
        s += above.weight(j, i) * delta[l + 1][j];
      }
      d[i] = s * a[i] * (1.0 - a[i]);
    }
  }

  std::vector<double> g;
  g.reserve(mlp.parameter_count());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& prev = acts[l];
    for (std::size_t j = 0; j < layers[l].outputs; ++j) {
      g.push_back(delta[l][j]);
      for (std::size_t i = 0; i < layers[l].inputs; ++i) {
        g.push_back(delta[l][j] * prev[i]);
      }
    }
  }
  return g;
}

double train_step(Mlp& mlp, std::span<const double> input,
                  std::span<const double> one_hot_target,
                  double learning_rate) {
  check_target(mlp, one_hot_target);
  const double loss = squared_error(mlp, input, one_hot_target);
  const auto g = gradient(mlp, input, one_hot_target);
  std::size_t k = 0;
  for (Layer& l : mlp.layers()) {
    for (std::size_t j = 0; j < l.outputs; ++j) {
      l.biases[j] -= learning_rate * g[k++];
      for (std::size_t i = 0; i < l.inputs; ++i) {
        l.weight(j, i) -= learning_rate * g[k++];
      }
    }
  }
  return loss;
}

std::vector<double> one_hot(std::size_t cls, std::size_t size) {
  if (cls >= size) {
    throw Error("class " + std::to_string(cls) + " outside " +
                std::to_string(size) + " outputs");
  }
  std::vector<double> t(size, 0.0);
  t[cls] = 1.0;
  return t;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw Error("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t j = 1; j < values.size(); ++j) {
    if (values[j] > values[best]) best = j;
  }
  return best;
}

std::size_t predict_class(const Mlp& mlp, std::span<const double> features) {
  return argmax(outputs(mlp, features));
}

SleepStage predict(const Mlp& mlp, std::span<const double> features) {
  return class_stage(predict_class(mlp, features));
}

double mean_error(const Mlp& mlp, const LabeledDataset& data) {
  if (data.empty()) throw Error("mean error of an empty dataset");
  double total = 0.0;
  for (const auto& row : data.rows) total += row_error(mlp, row);
  return total / static_cast<double>(data.size());
}

double accuracy(const Mlp& mlp, const LabeledDataset& data) {
  if (data.empty()) throw Error("accuracy of an empty dataset");
  std::size_t hits = 0;
  for (const auto& row : data.rows) {
    hits += predict_class(mlp, row.features) == index_of(row.stage);
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

ConfusionMatrix evaluate(const Mlp& mlp, const LabeledDataset& data) {
  ConfusionMatrix cm;
  for (const auto& row : data.rows) cm.add(row.stage, predict(mlp, row.features));
  return cm;
}

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    throw Error("learning rate must be positive");
  }
  if (c.max_training_epochs < 1) throw Error("max training epochs must be >= 1");
  if (c.patience < 1) throw Error("patience must be >= 1");
}

FitResult fit(const LabeledDataset& train, const LabeledDataset& validation,
              std::span<const std::size_t> layer_sizes,
              const TrainConfig& config) {
  validate(config);
  if (train.empty() || validation.empty()) {
    throw Error("training and validation sets must be non-empty");
  }
  Mlp mlp = Mlp::init({layer_sizes.begin(), layer_sizes.end()}, config.seed);
  check_dataset(mlp, train);
  check_dataset(mlp, validation);

  std::vector<std::vector<double>> targets;
  targets.reserve(train.size());
  for (const auto& row : train.rows) {
    targets.push_back(one_hot(index_of(row.stage), mlp.output_size()));
  }

  Random rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  FitResult result{mlp, {}};
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= config.max_training_epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t i : order) {
      train_step(mlp, train.rows[i].features, targets[i], config.learning_rate);
    }
    const double val_error = mean_error(mlp, validation);
    result.report.training_error.push_back(mean_error(mlp, train));
    result.report.validation_error.push_back(val_error);
    if (val_error < best) {
      best = val_error;
      result.report.best_epoch = epoch;
      result.model = mlp;
    } else if (epoch - result.report.best_epoch >= config.patience) {
      break;
    }
  }
  return result;
}

CvReport cross_validate(const LabeledDataset& dataset,
                        std::span<const std::size_t> layer_sizes,
                        const TrainConfig& config, std::size_t repetitions) {
  validate(config);
  if (repetitions < 1) throw Error("cross-validation needs at least one repetition");

  struct Run {
    double accuracy = 0.0;
    std::size_t best_epoch = 0;
    ConfusionMatrix cm;
  };
  auto run_one = [&](std::size_t r) {
    const std::uint64_t seed = config.seed + r;
    const DatasetSplit split =
        stratified_split(dataset, kCrossValidationTrainFraction, seed);
    TrainConfig cfg = config;
    cfg.seed = seed;
    const FitResult fitted = fit(split.train, split.validation, layer_sizes, cfg);
    Run out;
    out.cm = evaluate(fitted.model, split.validation);
    out.accuracy = overall_accuracy(out.cm).value();
    out.best_epoch = fitted.report.best_epoch;
    return out;
  };

  std::vector<Run> runs(repetitions);
  const std::size_t workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, repetitions);
  if (workers == 1) {
    for (std::size_t r = 0; r < repetitions; ++r) runs[r] = run_one(r + 1);
  } else {
    std::vector<std::future<void>> pending;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
      pending.push_back(std::async(std::launch::async, [&] {
        for (std::size_t r = next++; r < repetitions; r = next++) {
          runs[r] = run_one(r + 1);
        }
      }));
    }
    for (auto& f : pending) f.get();
  }

  CvReport report;
  for (const Run& run : runs) {
    report.accuracies.push_back(run.accuracy);
    report.best_epochs.push_back(run.best_epoch);
    report.pooled.merge(run.cm);
  }
  report.mean_accuracy =
      std::accumulate(report.accuracies.begin(), report.accuracies.end(), 0.0) /
      static_cast<double>(repetitions);
  return report;
}

SweepResult hidden_sweep(const LabeledDataset& dataset,
                         std::span<const std::size_t> hidden_sizes,
                         const TrainConfig& config, std::size_t repetitions) {
  if (hidden_sizes.empty()) throw Error("hidden-size sweep needs at least one size");
  SweepResult result;
  for (std::size_t h : hidden_sizes) {
    const std::array<std::size_t, 3> sizes = {dataset.feature_width, h, kNumClasses};
    result.entries.push_back({h, cross_validate(dataset, sizes, config, repetitions)});
    if (result.entries.back().report.mean_accuracy >
        result.entries[result.best].report.mean_accuracy) {
      result.best = result.entries.size() - 1;
    }
  }
  return result;
}

void write_model(std::ostream& out, const Mlp& mlp) {
  out << kModelMagic << ' ' << kModelVersion << '\n';
  for (std::size_t i = 0; i < mlp.layer_sizes().size(); ++i) {
    out << (i ? " " : "") << mlp.layer_sizes()[i];
  }
  out << '\n';
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    out << (i ? " " : "") << stage_name(kClassStages[i]);
  }
  out << '\n';
  for (const Layer& l : mlp.layers()) {
    for (std::size_t j = 0; j < l.outputs; ++j) {
      out << format_double(l.biases[j]);
      for (std::size_t i = 0; i < l.inputs; ++i) out << ' ' << format_double(l.weight(j, i));
      out << '\n';
    }
  }
}

Mlp read_model(std::istream& in, std::string_view source) {
  std::size_t line_no = 0;
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    if (!std::getline(in, line)) {
      throw Error(std::string(source) + ": unexpected end of model file after line " +
                  std::to_string(line_no));
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return std::istringstream(line);
  };
  auto fail = [&](const std::string& what) {
    return Error(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
  };

  {
    auto ss = next_line();
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != kModelMagic) {
      throw fail("not a SOMNO-MLP model file");
    }
    if (version != kModelVersion) {
      throw fail("unsupported model version " + std::to_string(version));
    }
  }
  std::vector<std::size_t> sizes;
  {
    auto ss = next_line();
    std::size_t s = 0;
    while (ss >> s) sizes.push_back(s);
    if (!ss.eof()) throw fail("malformed layer sizes");
  }
  {
    auto ss = next_line();
    std::string name;
    std::size_t i = 0;
    while (ss >> name) {
      if (i >= kNumClasses || stage_from_name(name) != kClassStages[i]) {
        throw fail("unexpected stage order");
      }
      ++i;
    }
    if (i != kNumClasses) throw fail("expected six stage names");
  }

  Mlp mlp = [&] {
    try {
      return Mlp(sizes);
    } catch (const Error& e) {
      throw fail(e.what());
    }
  }();
  for (Layer& l : mlp.layers()) {
    for (std::size_t j = 0; j < l.outputs; ++j) {
      auto ss = next_line();
      std::vector<double> values;
      std::string tok;
      while (ss >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(tok, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != tok.size() || !std::isfinite(v)) {
          throw fail("not a finite number: '" + tok + "'");
        }
        values.push_back(v);
      }
      if (values.size() != l.inputs + 1) {
        throw fail("expected bias and " + std::to_string(l.inputs) + " weights");
      }
      l.biases[j] = values[0];
      for (std::size_t i = 0; i < l.inputs; ++i) l.weight(j, i) = values[i + 1];
    }
  }
  return mlp;
}

}  // namespace somno
