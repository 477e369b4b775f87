#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "goa/error.hpp"
#include "goa/trainer.hpp"
#include "goa/workload.hpp"
#include "oracles.hpp"

using namespace goa;

namespace {

double rel_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

RestoredSet every_column(const ToyNet& net, std::size_t k) {
  RestoredSet all;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (std::size_t i = 0; i * k < static_cast<std::size_t>(net.weights[l].rows()); ++i) all.insert({l, i});
  }
  return all;
}

TrainSchedule short_schedule() {
  TrainSchedule s;
  s.epochs = 10;
  s.period = 5;
  return s;
}

}  // namespace

TEST_CASE("zero learning rate leaves the net unchanged") {
  const BlobData data = make_blobs({});
  ToyNet net = ToyNet::random({8, 16, 4}, 3, Activation::relu, 1);
  const ToyNet before = net;
  const double l = train_step(net, data.train, 0.0);
  CHECK(l == doctest::Approx(loss(before, data.train)));
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    CHECK(net.weights[i] == before.weights[i]);
    CHECK(net.biases[i] == before.biases[i]);
  }
}

TEST_CASE("linear net with squared loss takes the analytic step") {
  ToyNet net;
  net.weights = {Matrix::Zero(2, 2)};
  net.weights[0] << 0.5, -0.25, 0.75, 1.0;
  net.biases = {Vector::Zero(2)};
  net.biases[0] << 0.1, -0.2;
  net.activation = Activation::identity;
  net.classes = 2;
  Dataset batch;
  batch.x = Matrix(2, 2);
  batch.x << 1.0, -2.0, 3.0, 0.5;
  batch.labels = {0, 1};

  // L = 1/(2B) sum ||W x + b - e_y||^2, so dL/dW = (1/B) sum r x^T.
  Matrix residual = net.weights[0] * batch.x;
  residual.colwise() += net.biases[0];
  residual(0, 0) -= 1.0;
  residual(1, 1) -= 1.0;
  const Matrix gw = residual * batch.x.transpose() / 2.0;
  const Vector gb = residual.rowwise().sum() / 2.0;
  const Matrix expect_w = net.weights[0] - 0.1 * gw;
  const Vector expect_b = net.biases[0] - 0.1 * gb;

  train_step(net, batch, 0.1, Loss::mse);
  CHECK((net.weights[0] - expect_w).norm() < 1e-12);
  CHECK((net.biases[0] - expect_b).norm() < 1e-12);
}

TEST_CASE("backprop matches central finite differences") {
  oracle::Rng rng(50);
  const BlobData data = make_blobs({});
  std::vector<std::size_t> idx(12);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i * 17;
  const Dataset batch = data.train.subset(idx);
  for (Activation act : {Activation::tanh, Activation::relu, Activation::identity}) {
    for (Loss kind : {Loss::cross_entropy, Loss::mse}) {
      const ToyNet net = ToyNet::random({8, 8, 4}, 3, act, 5);
      const Gradients g = gradients(net, batch, kind);
      const Gradients fd = oracle::finite_difference(net, batch, kind);
      for (std::size_t l = 0; l < net.weights.size(); ++l) {
        CHECK(rel_error(g.weights[l], fd.weights[l]) < 1e-4);
        CHECK(rel_error(g.biases[l], fd.biases[l]) < 1e-4);
      }
    }
  }
}

TEST_CASE("project_hardware is idempotent and block-wise") {
  const ToyNet net = ToyNet::random({8, 12, 4}, 3, Activation::relu, 2);
  const ToyNet once = project_hardware(net, 4);
  const ToyNet twice = project_hardware(once, 4);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    CHECK((once.weights[l] - twice.weights[l]).norm() < 1e-9);
    const Cluster src = partition({l, net.weights[l]}, 4);
    const Cluster dst = partition({l, once.weights[l]}, 4);
    for (std::size_t b = 0; b < src.blocks.size(); ++b) {
      const UnitaryApprox a = approx_module(src.blocks[b]);
      CHECK((dst.blocks[b] - a.hardware()).norm() < 1e-12);
      CHECK((src.blocks[b] - dst.blocks[b]).norm() == doctest::Approx(a.residual));
    }
  }
  const auto res = layer_residuals(net, 4);
  REQUIRE(res.size() == 2);
  CHECK(res[0].rows_mod == 3);
  CHECK(res[0].cols_mod == 2);
}

TEST_CASE("orthogonal single block is left unchanged") {
  oracle::Rng rng(51);
  ToyNet net;
  net.weights = {oracle::random_orthogonal(4, rng)};
  net.biases = {Vector::Zero(4)};
  net.classes = 4;
  CHECK((project_hardware(net, 4).weights[0] - net.weights[0]).norm() < 1e-9);
}

TEST_CASE("project_hardware keeps restored columns exact") {
  const ToyNet net = ToyNet::random({8, 8, 4}, 3, Activation::relu, 3);
  const ToyNet p = project_hardware(net, 4, {{0, 1}});
  CHECK(p.weights[0].bottomRows(4) == net.weights[0].bottomRows(4));
  CHECK(p.weights[0].topRows(4) != net.weights[0].topRows(4));
  CHECK_THROWS_AS(project_hardware(ToyNet::random({6, 8, 4}, 3, Activation::relu, 1), 4), Error);
}

TEST_CASE("projection count follows the schedule") {
  const BlobData data = make_blobs({});
  const ToyNet net = ToyNet::random({8, 8, 4}, 3, Activation::relu, 4);
  for (auto [epochs, period] : {std::pair{4, 4}, std::pair{10, 5}, std::pair{7, 3}, std::pair{3, 1}}) {
    TrainSchedule s;
    s.epochs = static_cast<std::size_t>(epochs);
    s.period = static_cast<std::size_t>(period);
    const TrainResult r = hw_aware_train(net, data.train, data.validation, s, 4);
    CHECK(r.projections == s.epochs / s.period + 1);
    CHECK(r.trace.size() == s.epochs);
    CHECK(r.trace.back().final_projection);
    if (period == 1) {
      for (const auto& e : r.trace) CHECK(e.projected);
    }
  }
}

TEST_CASE("training lowers the loss and is deterministic") {
  const BlobData data = make_blobs({});
  const ToyNet net = ToyNet::random({8, 16, 4}, 3, Activation::relu, 5);
  TrainSchedule s = short_schedule();
  s.epochs = 5;
  const TrainResult a = train_float(net, data.train, data.validation, s);
  const TrainResult b = train_float(net, data.train, data.validation, s);
  CHECK(a.trace.back().loss < a.trace.front().loss);
  CHECK(a.trace == b.trace);
  CHECK(a.projections == 0);
}

TEST_CASE("restoring every column makes hardware training equal float training") {
  const BlobData data = make_blobs({});
  const ToyNet net = ToyNet::random({8, 16, 4}, 3, Activation::relu, 6);
  const TrainSchedule s = short_schedule();
  const TrainResult hw = hw_aware_train(net, data.train, data.validation, s, 4, every_column(net, 4));
  const TrainResult fl = train_float(net, data.train, data.validation, s);
  for (std::size_t l = 0; l < net.weights.size(); ++l) CHECK(hw.net.weights[l] == fl.net.weights[l]);
  CHECK(hw.final_accuracy == fl.final_accuracy);
}

TEST_CASE("restore_and_retrain selects the worst column first") {
  const BlobData data = make_blobs({});
  const ToyNet start = ToyNet::random({8, 16, 4}, 3, Activation::relu, 7);
  TrainSchedule s = short_schedule();
  const TrainResult hw = hw_aware_train(start, data.train, data.validation, s, 4);
  const GoaArch arch{8, 16, 4, 8};

  s.restoration_budget = 0;
  const RestorationResult none = restore_and_retrain(hw.net, data.train, data.validation, s, arch);
  CHECK(none.restored.empty());
  const TrainResult cont = hw_aware_train(hw.net, data.train, data.validation, s, 4);
  CHECK(none.retrained.trace == cont.trace);

  s.restoration_budget = 1;
  const RestorationResult one = restore_and_retrain(hw.net, data.train, data.validation, s, arch);
  REQUIRE(one.restored.size() == 1);
  const RestorationSelection ranking = rank_columns(layer_residuals(hw.net, 4));
  CHECK(*one.restored.begin() == ranking.columns.front().ref);

  s.restoration_budget = 100;
  const RestorationResult all = restore_and_retrain(hw.net, data.train, data.validation, s, arch);
  CHECK(all.restored == every_column(hw.net, 4));
  CHECK(all.selection.shortfall);
  const auto res = layer_residuals(all.retrained.net, 4);
  for (const auto& layer : res) {
    for (double r : layer.residuals) CHECK(r >= 0.0);
  }
}

TEST_CASE("divergence surfaces the partial trace") {
  const BlobData data = make_blobs({});
  const ToyNet net = ToyNet::random({8, 16, 4}, 3, Activation::identity, 8);
  TrainSchedule s = short_schedule();
  s.learning_rate = 1e6;
  s.loss = Loss::mse;
  try {
    train_float(net, data.train, data.validation, s);
    FAIL("expected divergence");
  } catch (const TrainingDiverged& e) {
    CHECK(e.kind() == ErrorKind::divergence);
    CHECK(e.trace().size() < s.epochs);
  }
}

TEST_CASE("blobs are deterministic and balanced") {
  const BlobData a = make_blobs({});
  const BlobData b = make_blobs({});
  CHECK(a.train.x == b.train.x);
  CHECK(a.train.size() == 300);
  CHECK(a.validation.size() == 150);
  CHECK(a.train.x.rows() == 8);
  std::vector<std::size_t> counts(3, 0);
  for (auto y : a.train.labels) ++counts[y];
  CHECK(counts == std::vector<std::size_t>{100, 100, 100});
}

TEST_CASE("load_csv reads samples and reports bad lines") {
  const auto dir = std::filesystem::temp_directory_path() / "goa_csv_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "ok.csv");
    f << "# x0,x1,label\n1.0,2.0,0\n\n3.0,4.0,1\n";
  }
  const Dataset d = load_csv(dir / "ok.csv");
  CHECK(d.size() == 2);
  CHECK(d.x(1, 1) == 4.0);
  CHECK(d.labels[1] == 1);
  {
    std::ofstream f(dir / "bad.csv");
    f << "1.0,2.0,0\n1.0,oops,1\n";
  }
  try {
    load_csv(dir / "bad.csv");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}
