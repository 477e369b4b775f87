#include <doctest.h>

#include "goa/error.hpp"
#include "goa/workload.hpp"
#include "oracles.hpp"

using namespace goa;

namespace {

LayerSpec conv(std::string name, std::size_t filters, std::size_t kernel, std::size_t depth) {
  return {LayerKind::conv, std::move(name), filters, kernel, depth, 1, false};
}

}  // namespace

TEST_CASE("reshape_conv examples") {
  CHECK(reshape_conv(conv("a", 256, 3, 128)) == MatrixShape{256, 1152});
  CHECK(reshape_conv(conv("b", 1, 1, 1)) == MatrixShape{1, 1});
  CHECK(reshape_conv(conv("c", 64, 3, 3)) == MatrixShape{64, 27});
}

TEST_CASE("partition block counts") {
  const Cluster c = partition({0, Matrix::Zero(256, 1152)}, 63);
  CHECK(c.rows_mod == 5);
  CHECK(c.cols_mod == 19);
  CHECK(c.blocks.size() == 95);

  oracle::Rng rng(20);
  const Matrix sq = oracle::random_matrix(4, 4, rng);
  const Cluster one = partition({0, sq}, 4);
  CHECK(one.blocks.size() == 1);
  CHECK((one.block(0, 0) - sq).norm() == 0.0);
}

TEST_CASE("partition pads with zeros and reassembles exactly") {
  oracle::Rng rng(21);
  const Matrix w = oracle::random_matrix(4, 5, rng);
  const Cluster c = partition({0, w}, 3);
  REQUIRE(c.rows_mod == 2);
  REQUIRE(c.cols_mod == 2);
  CHECK(c.block(1, 0).bottomRows(2).norm() == 0.0);
  CHECK(c.block(0, 1).rightCols(1).norm() == 0.0);
  CHECK(c.block(1, 1).bottomRows(2).norm() == 0.0);
  CHECK(c.block(1, 1).rightCols(1).norm() == 0.0);
  CHECK(c.block(0, 0) == w.block(0, 0, 3, 3));
  CHECK(c.reassemble() == w);
}

TEST_CASE("partition and reassemble are lossless on random shapes") {
  oracle::Rng rng(22);
  std::uniform_int_distribution<std::size_t> dim(1, 20);
  std::uniform_int_distribution<std::size_t> kd(2, 7);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t rows = dim(rng);
    const std::size_t cols = dim(rng);
    const std::size_t k = kd(rng);
    const Matrix w = oracle::random_matrix(rows, cols, rng);
    const Cluster c = partition({0, w}, k);
    CHECK(c.rows_mod == (rows + k - 1) / k);
    CHECK(c.cols_mod == (cols + k - 1) / k);
    CHECK(c.reassemble() == w);
  }
}

TEST_CASE("partition rejects k < 2") {
  CHECK_THROWS_AS(partition({0, Matrix::Zero(2, 2)}, 1), Error);
}

TEST_CASE("validate_network catches depth mismatches") {
  Network ok{conv("a", 64, 3, 3), conv("b", 128, 3, 64)};
  CHECK_NOTHROW(validate_network(ok));
  Network bad{conv("a", 64, 3, 3), conv("b", 128, 3, 32)};
  try {
    validate_network(bad);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
  Network pooled{conv("a", 64, 3, 3), {LayerKind::pool, "p", 0, 1, 0, 4, false},
                 {LayerKind::dense, "fc", 10, 1, 256, 1, false}};
  CHECK_NOTHROW(validate_network(pooled));
}

TEST_CASE("adjust_depths worked example") {
  const GoaArch arch{20, 12, 63, 20};
  const Network net{conv("b", 128, 3, 64), conv("a", 256, 3, 128)};
  const AdjustedNetwork adj = adjust_depths(net, arch);
  REQUIRE(adj.adjustments.size() == 1);
  const DepthAdjustment& d = adj.adjustments[0];
  CHECK(d.length == 1152);
  CHECK(d.cluster_length == 1197);
  CHECK(d.slack_cluster == 45);
  CHECK(d.slack_grid == 63);
  CHECK(d.new_depth == 140);
  CHECK(d.delta == 1260 - 1152);
  CHECK(d.previous_width_growth == 0);
  CHECK(adj.adjusted[1].depth == 140);
  CHECK(adj.adjusted[0].filters == 140);
  CHECK(adj.adjusted[0].depth == 64);
  CHECK_NOTHROW(validate_network(adj.adjusted));
}

TEST_CASE("adjust_depths leaves a grid-filling layer unchanged") {
  // h^2 d = 9 * 14 = 126 = m k with k = 63, m = 2.
  const GoaArch arch{2, 4, 63, 2};
  const Network net{conv("b", 14, 1, 3), conv("a", 10, 3, 14)};
  const AdjustedNetwork adj = adjust_depths(net, arch);
  CHECK(adj.adjusted == net);
  REQUIRE(adj.adjustments.size() == 1);
  CHECK(adj.adjustments[0].delta == 0);
}

TEST_CASE("adjust_depths never changes the first layer's input depth") {
  const GoaArch arch{20, 12, 63, 20};
  const Network net{conv("c1", 64, 3, 3), conv("c2", 64, 3, 64), conv("c3", 128, 3, 64)};
  const AdjustedNetwork adj = adjust_depths(net, arch);
  CHECK(adj.adjusted[0].depth == 3);
  CHECK(adj.adjusted[0].kernel == 3);
  CHECK(adj.adjusted[2].filters == 128);
  CHECK_NOTHROW(validate_network(adj.adjusted));
}

TEST_CASE("adjusted networks re-validate on random chains") {
  oracle::Rng rng(23);
  std::uniform_int_distribution<std::size_t> f(1, 300);
  std::uniform_int_distribution<std::size_t> kern(1, 3);
  std::uniform_int_distribution<std::size_t> kd(2, 64);
  std::uniform_int_distribution<std::size_t> md(1, 20);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  for (int t = 0; t < 300; ++t) {
    Network net;
    std::size_t depth = f(rng) % 16 + 1;
    const std::size_t layers = len(rng);
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t filters = f(rng);
      net.push_back(conv("l" + std::to_string(l), filters, kern(rng), depth));
      depth = filters;
    }
    const GoaArch arch{md(rng), 4, kd(rng), 20};
    const AdjustedNetwork adj = adjust_depths(net, arch);
    CHECK_NOTHROW(validate_network(adj.adjusted));
    CHECK(adj.adjusted.front().depth == net.front().depth);
    CHECK(adj.adjusted.back().filters == net.back().filters);
    for (std::size_t l = 0; l < net.size(); ++l) {
      CHECK(adj.adjusted[l].depth >= net[l].depth);
      const std::size_t h2 = net[l].kernel * net[l].kernel;
      const std::size_t length = h2 * net[l].depth;
      const std::size_t cap = std::max(arch.m * arch.k, ceil_div(length, arch.k) * arch.k);
      CHECK(h2 * adj.adjusted[l].depth <= cap);
    }
  }
}

TEST_CASE("weight_shapes skips pools") {
  Network net{conv("a", 64, 3, 3), {LayerKind::pool, "p", 0, 1, 0, 4, false},
              {LayerKind::dense, "fc", 10, 1, 256, 1, false}};
  const auto shapes = weight_shapes(net);
  REQUIRE(shapes.size() == 2);
  CHECK(shapes[0].first == 0);
  CHECK(shapes[0].second == MatrixShape{64, 27});
  CHECK(shapes[1].first == 2);
  CHECK(shapes[1].second == MatrixShape{10, 256});
}
