#include "goa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "goa/mapper.hpp"
#include "goa/workload.hpp"

namespace goa {

namespace {

Matrix activate(const Matrix& z, Activation a) {
  switch (a) {
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::identity: return z;
  }
  return z;
}

Matrix activate_grad(const Matrix& z, Activation a) {
  switch (a) {
    case Activation::relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::tanh: return (1.0 - z.array().tanh().square()).matrix();
    case Activation::identity: return Matrix::Ones(z.rows(), z.cols());
  }
  return Matrix::Ones(z.rows(), z.cols());
}

void check_batch(const ToyNet& net, const Dataset& batch) {
  if (net.weights.empty()) throw Error(ErrorKind::invalid_argument, "toy net has no layers");
  if (batch.x.rows() != net.weights.front().cols()) {
    throw Error(ErrorKind::dimension_mismatch,
                "batch feature width " + std::to_string(batch.x.rows()) + " does not match net input width " +
                    std::to_string(net.weights.front().cols()));
  }
  if (static_cast<std::size_t>(batch.x.cols()) != batch.labels.size()) {
    throw Error(ErrorKind::dimension_mismatch, "batch has mismatched sample and label counts");
  }
  if (batch.labels.empty()) throw Error(ErrorKind::invalid_argument, "empty batch");
  for (std::size_t y : batch.labels) {
    if (y >= net.classes) throw Error(ErrorKind::invalid_argument, "label " + std::to_string(y) + " out of range");
  }
}

struct ForwardCache {
  std::vector<Matrix> inputs;  // a_l, the input to layer l
  std::vector<Matrix> pre;     // z_l
};

ForwardCache run_forward(const ToyNet& net, const Matrix& x) {
  ForwardCache c;
  Matrix a = x;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Matrix z = net.weights[l] * a;
    z.colwise() += net.biases[l];
    c.inputs.push_back(std::move(a));
    a = l + 1 < net.weights.size() ? activate(z, net.activation) : z;
    c.pre.push_back(std::move(z));
  }
  return c;
}

/// Mean loss and its gradient with respect to the final pre-activation.
std::pair<double, Matrix> loss_and_grad(const Matrix& logits, const std::vector<std::size_t>& labels,
                                        std::size_t classes, Loss kind) {
  const auto b = static_cast<double>(labels.size());
  const auto c = static_cast<Eigen::Index>(classes);
  Matrix grad = Matrix::Zero(logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index s = 0; s < logits.cols(); ++s) {
    const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(s)]);
    const Vector z = logits.col(s).head(c);
    if (kind == Loss::cross_entropy) {
      const double zmax = z.maxCoeff();
      const Vector e = (z.array() - zmax).exp().matrix();
      const double sum = e.sum();
      total += -(z(y) - zmax - std::log(sum));
      Vector p = e / sum;
      p(y) -= 1.0;
      grad.col(s).head(c) = p / b;
    } else {
      Vector d = z;
      d(y) -= 1.0;
      total += 0.5 * d.squaredNorm();
      grad.col(s).head(c) = d / b;
    }
  }
  return {total / b, std::move(grad)};
}

}  // namespace

std::vector<std::size_t> ToyNet::dims() const {
  std::vector<std::size_t> d;
  if (weights.empty()) return d;
  d.push_back(static_cast<std::size_t>(weights.front().cols()));
  for (const auto& w : weights) d.push_back(static_cast<std::size_t>(w.rows()));
  return d;
}

void ToyNet::validate() const {
  if (weights.empty()) throw Error(ErrorKind::invalid_argument, "toy net has no layers");
  if (biases.size() != weights.size()) throw Error(ErrorKind::dimension_mismatch, "toy net: one bias per layer");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (l > 0 && weights[l].cols() != weights[l - 1].rows()) {
      throw Error(ErrorKind::dimension_mismatch, "toy net: layer " + std::to_string(l) + " input width mismatch");
    }
    if (biases[l].size() != weights[l].rows()) {
      throw Error(ErrorKind::dimension_mismatch, "toy net: bias " + std::to_string(l) + " length mismatch");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw Error(ErrorKind::invalid_argument, "toy net: layer " + std::to_string(l) + " is not finite");
    }
  }
  if (classes == 0 || classes > static_cast<std::size_t>(weights.back().rows())) {
    throw Error(ErrorKind::invalid_argument, "toy net: classes must lie in [1, output width]");
  }
}

ToyNet ToyNet::random(const std::vector<std::size_t>& dims, std::size_t classes, Activation activation,
                      std::uint64_t seed) {
  if (dims.size() < 2) throw Error(ErrorKind::invalid_argument, "toy net needs at least two dims");
  std::mt19937_64 rng(seed);
  ToyNet net;
  net.activation = activation;
  net.classes = classes;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(dims[l])));
    Matrix w(static_cast<Eigen::Index>(dims[l + 1]), static_cast<Eigen::Index>(dims[l]));
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(static_cast<Eigen::Index>(dims[l + 1])));
  }
  net.validate();
  return net;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.x.resize(x.rows(), static_cast<Eigen::Index>(indices.size()));
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.x.col(static_cast<Eigen::Index>(i)) = x.col(static_cast<Eigen::Index>(indices[i]));
    out.labels.push_back(labels[indices[i]]);
  }
  return out;
}

BlobData make_blobs(const BlobSpec& spec) {
  if (spec.classes < 2 || spec.width < 2 || spec.train_per_class == 0) {
    throw Error(ErrorKind::invalid_argument, "blobs: need >= 2 classes, width >= 2 and samples");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix lift(static_cast<Eigen::Index>(spec.width), 2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    for (Eigen::Index i = 0; i < lift.rows(); ++i) lift(i, j) = gauss(rng) / std::sqrt(2.0);
  }
  auto draw = [&](std::size_t per_class) {
    Dataset d;
    const std::size_t total = per_class * spec.classes;
    d.x.resize(static_cast<Eigen::Index>(spec.width), static_cast<Eigen::Index>(total));
    for (std::size_t s = 0; s < total; ++s) {
      const std::size_t c = s % spec.classes;
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(spec.classes);
      const double dx = gauss(rng);
      const double dy = gauss(rng);
      const Eigen::Vector2d p(spec.radius * std::cos(angle) + spec.spread * dx,
                              spec.radius * std::sin(angle) + spec.spread * dy);
      d.x.col(static_cast<Eigen::Index>(s)) = lift * p;
      d.labels.push_back(c);
    }
    return d;
  };
  BlobData out;
  out.train = draw(spec.train_per_class);
  out.validation = draw(spec.validation_per_class);
  return out;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_argument, "cannot open dataset " + path.string());
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw Error(ErrorKind::invalid_argument,
                    path.string() + ":" + std::to_string(line_no) + ": invalid number '" + cell + "'");
      }
    }
    if (values.size() < 2) {
      throw Error(ErrorKind::invalid_argument,
                  path.string() + ":" + std::to_string(line_no) + ": need features and a label");
    }
    const double label = values.back();
    if (label < 0.0 || label != std::floor(label)) {
      throw Error(ErrorKind::invalid_argument,
                  path.string() + ":" + std::to_string(line_no) + ": label must be a nonnegative integer");
    }
    values.pop_back();
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw Error(ErrorKind::dimension_mismatch,
                  path.string() + ":" + std::to_string(line_no) + ": inconsistent feature count");
    }
    rows.push_back(std::move(values));
    labels.push_back(static_cast<std::size_t>(label));
  }
  Dataset d;
  if (rows.empty()) return d;
  d.x.resize(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (std::size_t f = 0; f < rows[s].size(); ++f) {
      d.x(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(s)) = rows[s][f];
    }
  }
  d.labels = std::move(labels);
  return d;
}

Matrix forward(const ToyNet& net, const Matrix& x) {
  Matrix a = x;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Matrix z = net.weights[l] * a;
    z.colwise() += net.biases[l];
    a = l + 1 < net.weights.size() ? activate(z, net.activation) : z;
  }
  return a;
}

double loss(const ToyNet& net, const Dataset& batch, Loss kind) {
  check_batch(net, batch);
  return loss_and_grad(forward(net, batch.x), batch.labels, net.classes, kind).first;
}

double accuracy(const ToyNet& net, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  check_batch(net, data);
  const Matrix logits = forward(net, data.x);
  std::size_t hits = 0;
  for (Eigen::Index s = 0; s < logits.cols(); ++s) {
    Eigen::Index best = 0;
    logits.col(s).head(static_cast<Eigen::Index>(net.classes)).maxCoeff(&best);
    if (static_cast<std::size_t>(best) == data.labels[static_cast<std::size_t>(s)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

namespace {

std::pair<double, Gradients> backprop(const ToyNet& net, const Dataset& batch, Loss kind) {
  check_batch(net, batch);
  const ForwardCache cache = run_forward(net, batch.x);
  auto [value, dz] = loss_and_grad(cache.pre.back(), batch.labels, net.classes, kind);
  Gradients g;
  g.weights.resize(net.weights.size());
  g.biases.resize(net.weights.size());
  for (std::size_t l = net.weights.size(); l-- > 0;) {
    g.weights[l] = dz * cache.inputs[l].transpose();
    g.biases[l] = dz.rowwise().sum();
    if (l > 0) {
      dz = ((net.weights[l].transpose() * dz).array() * activate_grad(cache.pre[l - 1], net.activation).array())
               .matrix();
    }
  }
  return {value, std::move(g)};
}

}  // namespace

Gradients gradients(const ToyNet& net, const Dataset& batch, Loss kind) { return backprop(net, batch, kind).second; }

double train_step(ToyNet& net, const Dataset& batch, double learning_rate, Loss kind) {
  const auto [value, g] = backprop(net, batch, kind);
  if (!std::isfinite(value)) throw Error(ErrorKind::divergence, "non-finite training loss");
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    net.weights[l] -= learning_rate * g.weights[l];
    net.biases[l] -= learning_rate * g.biases[l];
  }
  return value;
}

ToyNet project_hardware(const ToyNet& net, std::size_t k, const RestoredSet& restored) {
  net.validate();
  ToyNet out = net;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const Matrix& w = net.weights[l];
    if (static_cast<std::size_t>(w.rows()) % k != 0 || static_cast<std::size_t>(w.cols()) % k != 0) {
      throw Error(ErrorKind::dimension_mismatch,
                  "project_hardware: layer " + std::to_string(l) + " dims are not multiples of k = " +
                      std::to_string(k));
    }
    Cluster c = partition({l, w}, k);
    for (std::size_t i = 0; i < c.rows_mod; ++i) {
      if (restored.contains(ColumnRef{l, i})) continue;
      for (std::size_t j = 0; j < c.cols_mod; ++j) c.block(i, j) = approx_module(c.block(i, j)).hardware();
    }
    out.weights[l] = c.reassemble();
  }
  return out;
}

std::vector<LayerResiduals> layer_residuals(const ToyNet& net, std::size_t k) {
  std::vector<LayerResiduals> out;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const Cluster c = partition({l, net.weights[l]}, k);
    LayerResiduals r{l, c.rows_mod, c.cols_mod, {}};
    for (const auto& block : c.blocks) r.residuals.push_back(approx_module(block).residual);
    out.push_back(std::move(r));
  }
  return out;
}

void TrainSchedule::validate() const {
  if (period < 1) throw Error(ErrorKind::invalid_argument, "schedule: period must be >= 1");
  if (epochs < period) throw Error(ErrorKind::invalid_argument, "schedule: epochs must be >= period");
  if (batch_size < 1) throw Error(ErrorKind::invalid_argument, "schedule: batch_size must be >= 1");
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
    throw Error(ErrorKind::invalid_argument, "schedule: learning_rate must be finite and >= 0");
  }
}

namespace {

TrainResult run_training(ToyNet net, const Dataset& train, const Dataset& validation, const TrainSchedule& schedule,
                         std::size_t k, const RestoredSet& restored, bool project) {
  schedule.validate();
  net.validate();
  check_batch(net, train);
  TrainResult result;
  std::mt19937_64 rng(schedule.seed);
  std::vector<std::size_t> order(train.size());

  for (std::size_t epoch = 1; epoch <= schedule.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += schedule.batch_size) {
      const std::size_t stop = std::min(order.size(), start + schedule.batch_size);
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(stop));
      try {
        total += train_step(net, train.subset(idx), schedule.learning_rate, schedule.loss) *
                 static_cast<double>(idx.size());
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::divergence) throw;
        throw TrainingDiverged(epoch, result.trace);
      }
    }
    TraceEntry entry;
    entry.epoch = epoch;
    entry.loss = total / static_cast<double>(train.size());
    if (!std::isfinite(entry.loss) || !net.weights.back().allFinite()) throw TrainingDiverged(epoch, result.trace);
    entry.accuracy = accuracy(net, validation);
    if (project && epoch % schedule.period == 0) {
      net = project_hardware(net, k, restored);
      ++result.projections;
      entry.projected = true;
      entry.projected_accuracy = accuracy(net, validation);
    }
    if (project && epoch == schedule.epochs) {
      net = project_hardware(net, k, restored);
      ++result.projections;
      entry.final_projection = true;
      entry.projected = true;
      entry.projected_accuracy = accuracy(net, validation);
    }
    result.trace.push_back(entry);
  }
  result.final_accuracy = accuracy(net, validation);
  result.net = std::move(net);
  return result;
}

}  // namespace

TrainResult hw_aware_train(ToyNet net, const Dataset& train, const Dataset& validation,
                           const TrainSchedule& schedule, std::size_t k, const RestoredSet& restored) {
  return run_training(std::move(net), train, validation, schedule, k, restored, true);
}

TrainResult train_float(ToyNet net, const Dataset& train, const Dataset& validation,
                        const TrainSchedule& schedule) {
  return run_training(std::move(net), train, validation, schedule, 0, {}, false);
}

RestorationResult restore_and_retrain(const ToyNet& net, const Dataset& train, const Dataset& validation,
                                      const TrainSchedule& schedule, const GoaArch& arch) {
  arch.validate();
  std::vector<ClusterShape> shapes;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const MatrixShape s{static_cast<std::size_t>(net.weights[l].rows()),
                        static_cast<std::size_t>(net.weights[l].cols())};
    shapes.push_back(cluster_shape(l, s, arch.k));
  }
  const MappingPlan plan = pack(shapes, arch);
  RestorationResult out;
  out.selection = select_restorations(rank_columns(layer_residuals(net, arch.k)), schedule.restoration_budget,
                                      arch, plan);
  for (const auto& c : out.selection.columns) out.restored.insert(c.ref);
  out.retrained = hw_aware_train(net, train, validation, schedule, arch.k, out.restored);
  return out;
}

}  // namespace goa
