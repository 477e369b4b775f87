#pragma once

// Small dense network trained with periodic projection onto the module
// hardware form, plus the restore-and-retrain flow.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "goa/approximation.hpp"
#include "goa/error.hpp"
#include "goa/photonic.hpp"

namespace goa {

enum class Activation { relu, tanh, identity };
enum class Loss { cross_entropy, mse };

/// Fully connected net. Layer l maps dims[l] -> dims[l + 1]; the activation
/// is applied to every layer but the last. Only the first `classes` outputs
/// are scored, so the output width can be padded to a multiple of k.
struct ToyNet {
  std::vector<Matrix> weights;  // dims[l + 1] x dims[l]
  std::vector<Vector> biases;
  Activation activation = Activation::relu;
  std::size_t classes = 0;

  std::vector<std::size_t> dims() const;
  /// Throws goa::Error on inconsistent shapes or non-finite parameters.
  void validate() const;
  /// He-style Gaussian init, zero biases.
  static ToyNet random(const std::vector<std::size_t>& dims, std::size_t classes, Activation activation,
                       std::uint64_t seed);
};

/// Samples are columns of `x`.
struct Dataset {
  Matrix x;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

struct BlobSpec {
  std::size_t classes = 3;
  std::size_t train_per_class = 100;
  std::size_t validation_per_class = 50;
  double radius = 3.0;
  double spread = 1.5;
  std::size_t width = 8;  // lifted feature width
  std::uint64_t seed = 7;

  friend bool operator==(const BlobSpec&, const BlobSpec&) = default;
};

struct BlobData {
  Dataset train;
  Dataset validation;
};

/// Gaussian blobs around points on a circle in 2-D, lifted to `width`
/// features by one seeded random linear map shared by both splits.
BlobData make_blobs(const BlobSpec& spec);

/// One sample per line: feature columns then an integer label. Lines starting
/// with '#' and blank lines are skipped.
Dataset load_csv(const std::filesystem::path& path);

Matrix forward(const ToyNet& net, const Matrix& x);
double loss(const ToyNet& net, const Dataset& batch, Loss kind = Loss::cross_entropy);
double accuracy(const ToyNet& net, const Dataset& data);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Backprop of the mean batch loss.
Gradients gradients(const ToyNet& net, const Dataset& batch, Loss kind = Loss::cross_entropy);

/// One plain SGD step in place. Returns the loss before the step.
double train_step(ToyNet& net, const Dataset& batch, double learning_rate, Loss kind = Loss::cross_entropy);

using RestoredSet = std::set<ColumnRef>;

/// Each k x k block replaced by its module hardware matrix; blocks in a
/// restored column (layer, output block) are left exact. Layer dims must be
/// multiples of k.
ToyNet project_hardware(const ToyNet& net, std::size_t k, const RestoredSet& restored = {});

/// approx_module residual of every block, one entry per layer.
std::vector<LayerResiduals> layer_residuals(const ToyNet& net, std::size_t k);

struct TrainSchedule {
  std::size_t epochs = 30;
  std::size_t period = 5;  // project after every period-th epoch
  double learning_rate = 0.05;
  std::size_t batch_size = 16;
  std::size_t restoration_budget = 0;
  std::uint64_t seed = 11;
  Loss loss = Loss::cross_entropy;

  void validate() const;

  friend bool operator==(const TrainSchedule&, const TrainSchedule&) = default;
};

struct TraceEntry {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean training loss over the epoch
  double accuracy = 0.0;  // validation accuracy at epoch end, before projection
  bool projected = false;
  double projected_accuracy = 0.0;  // after projection, when projected
  bool final_projection = false;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct TrainResult {
  ToyNet net;
  std::vector<TraceEntry> trace;
  std::size_t projections = 0;
  double final_accuracy = 0.0;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t epoch, std::vector<TraceEntry> trace)
      : Error(ErrorKind::divergence, "training diverged (non-finite loss) in epoch " + std::to_string(epoch)),
        trace_(std::move(trace)) {}
  const std::vector<TraceEntry>& trace() const noexcept { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

/// SGD with projection at the end of every period-th epoch and once more
/// after the last epoch, so there are floor(epochs / period) + 1 projections.
TrainResult hw_aware_train(ToyNet net, const Dataset& train, const Dataset& validation,
                           const TrainSchedule& schedule, std::size_t k, const RestoredSet& restored = {});

/// Same loop with no projection.
TrainResult train_float(ToyNet net, const Dataset& train, const Dataset& validation,
                        const TrainSchedule& schedule);

struct RestorationResult {
  RestorationSelection selection;
  RestoredSet restored;
  TrainResult retrained;
};

/// Ranks the net's columns by accumulated residual, selects up to
/// `schedule.restoration_budget` admissible ones against the packed toy
/// clusters on `arch`, and runs hw_aware_train again with them exact.
RestorationResult restore_and_retrain(const ToyNet& net, const Dataset& train, const Dataset& validation,
                                      const TrainSchedule& schedule, const GoaArch& arch);

}  // namespace goa
