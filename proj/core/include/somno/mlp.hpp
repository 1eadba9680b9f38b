#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "somno/dataset.hpp"
#include "somno/metrics.hpp"
#include "somno/stage.hpp"

namespace somno {

// Fully connected layer; weights are row-major, one row per output neuron.
struct Layer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  double& weight(std::size_t out, std::size_t in) {
    return weights[out * inputs + in];
  }
  double weight(std::size_t out, std::size_t in) const {
    return weights[out * inputs + in];
  }

  friend bool operator==(const Layer&, const Layer&) = default;
};

// Multilayer perceptron with logistic activations on every non-input layer.
class Mlp {
 public:
  // All parameters zero. Throws for fewer than two layers or a zero size.
  explicit Mlp(std::vector<std::size_t> layer_sizes);

  // Weights uniform in ±1/√fan_in drawn from Random(seed), biases zero.
  static Mlp init(std::vector<std::size_t> layer_sizes, std::uint64_t seed);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  // Flattened parameters: per layer, per output neuron, the bias followed by
  // that neuron's weight row.
  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<Layer> layers_;
};

double sigmoid(double x);

// Activations of every layer, input first. Throws on a width mismatch or a
// non-finite input.
std::vector<std::vector<double>> forward(const Mlp& mlp,
                                         std::span<const double> input);
std::vector<double> outputs(const Mlp& mlp, std::span<const double> input);

// ½ Σ (output − target)².
double squared_error(const Mlp& mlp, std::span<const double> input,
                     std::span<const double> target);

// Backpropagated gradient of the squared error, in parameters() order.
std::vector<double> gradient(const Mlp& mlp, std::span<const double> input,
                             std::span<const double> target);

// One online gradient-descent step. Returns the loss before the update.
// Target must be one-hot over the output layer.
double train_step(Mlp& mlp, std::span<const double> input,
                  std::span<const double> one_hot_target,
                  double learning_rate);

std::vector<double> one_hot(std::size_t cls, std::size_t size);

// Index of the largest output; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);
std::size_t predict_class(const Mlp& mlp, std::span<const double> features);
SleepStage predict(const Mlp& mlp, std::span<const double> features);

// Mean per-row squared error (½ Σ over outputs) on a dataset.
double mean_error(const Mlp& mlp, const LabeledDataset& data);
double accuracy(const Mlp& mlp, const LabeledDataset& data);
ConfusionMatrix evaluate(const Mlp& mlp, const LabeledDataset& data);

struct TrainConfig {
  double learning_rate = 0.2;
  std::size_t max_training_epochs = 1000;
  // Training epochs without a new validation minimum before stopping.
  std::size_t patience = 50;
  std::uint64_t seed = 1;
};

void validate(const TrainConfig& config);

struct TrainReport {
  // Index i holds the error after training epoch i + 1.
  std::vector<double> training_error;
  std::vector<double> validation_error;
  std::size_t best_epoch = 0;  // 1-based

  std::size_t epochs_run() const { return training_error.size(); }
  double best_validation_error() const {
    return validation_error.at(best_epoch - 1);
  }
};

struct FitResult {
  Mlp model;  // snapshot taken at best_epoch
  TrainReport report;
};

// Online backpropagation with per-epoch shuffling and early stopping on the
// validation error. The network is initialized from config.seed.
FitResult fit(const LabeledDataset& train, const LabeledDataset& validation,
              std::span<const std::size_t> layer_sizes,
              const TrainConfig& config);

inline constexpr double kCrossValidationTrainFraction = 0.8;

struct CvReport {
  std::vector<double> accuracies;  // one per repetition
  std::vector<std::size_t> best_epochs;
  double mean_accuracy = 0.0;
  ConfusionMatrix pooled;
};

// Repetition r (1-based) splits with seed config.seed + r, fits with the
// same derived seed and scores the held-out rows. Repetitions run in
// parallel; results are merged in repetition order.
CvReport cross_validate(const LabeledDataset& dataset,
                        std::span<const std::size_t> layer_sizes,
                        const TrainConfig& config, std::size_t repetitions);

struct SweepEntry {
  std::size_t hidden = 0;
  CvReport report;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::size_t best = 0;  // index into entries; earliest wins ties
};

// Cross-validates (width, h, 6) for each h in hidden_sizes.
SweepResult hidden_sweep(const LabeledDataset& dataset,
                         std::span<const std::size_t> hidden_sizes,
                         const TrainConfig& config, std::size_t repetitions);

// Line-oriented model file, header `SOMNO-MLP 1`.
void write_model(std::ostream& out, const Mlp& mlp);
Mlp read_model(std::istream& in, std::string_view source = "model");

}  // namespace somno
