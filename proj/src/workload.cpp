#include "goa/workload.hpp"

#include <algorithm>
#include <string>

#include "goa/error.hpp"

namespace goa {

namespace {

std::string layer_label(const Network& network, std::size_t index) {
  const auto& l = network[index];
  std::string label = "layer " + std::to_string(index);
  if (!l.name.empty()) label += " (" + l.name + ")";
  return label;
}

// Indices of the non-branch weight layers, in order.
std::vector<std::size_t> chain_of(const Network& network) {
  std::vector<std::size_t> chain;
  for (std::size_t i = 0; i < network.size(); ++i) {
    if (network[i].is_weight() && !network[i].branch) chain.push_back(i);
  }
  return chain;
}

// Product of pool ratios strictly between two chain layers.
std::size_t ratio_between(const Network& network, std::size_t from, std::size_t to) {
  std::size_t r = 1;
  for (std::size_t i = from + 1; i < to; ++i) {
    if (network[i].kind == LayerKind::pool) r *= network[i].pool_ratio;
  }
  return r;
}

}  // namespace

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void validate_network(const Network& network) {
  auto fail = [&](std::size_t i, const std::string& msg) {
    throw Error(ErrorKind::invalid_argument, layer_label(network, i) + ": " + msg);
  };
  for (std::size_t i = 0; i < network.size(); ++i) {
    const auto& l = network[i];
    if (l.kind == LayerKind::pool) {
      if (l.pool_ratio < 1) fail(i, "pool_ratio must be >= 1");
      continue;
    }
    if (l.filters < 1) fail(i, "filters must be >= 1");
    if (l.kernel < 1) fail(i, "kernel must be >= 1");
    if (l.depth < 1) fail(i, "depth must be >= 1");
    if (l.kind == LayerKind::dense && l.kernel != 1) fail(i, "dense layers have kernel 1");
  }
  const auto chain = chain_of(network);
  for (std::size_t c = 1; c < chain.size(); ++c) {
    const auto& prev = network[chain[c - 1]];
    const auto& cur = network[chain[c]];
    const std::size_t r = ratio_between(network, chain[c - 1], chain[c]);
    if (cur.depth != r * prev.filters) {
      fail(chain[c], "depth " + std::to_string(cur.depth) + " != " + std::to_string(r) + " x " +
                         std::to_string(prev.filters) + " filters of " +
                         layer_label(network, chain[c - 1]));
    }
  }
}

MatrixShape reshape_conv(const LayerSpec& layer) {
  if (!layer.is_weight()) {
    throw Error(ErrorKind::invalid_argument, "reshape_conv: pool layers carry no weights");
  }
  return {layer.filters, layer.kernel * layer.kernel * layer.depth};
}

std::vector<std::pair<std::size_t, MatrixShape>> weight_shapes(const Network& network) {
  std::vector<std::pair<std::size_t, MatrixShape>> out;
  for (std::size_t i = 0; i < network.size(); ++i) {
    if (network[i].is_weight()) out.emplace_back(i, reshape_conv(network[i]));
  }
  return out;
}

Matrix Cluster::reassemble() const {
  Matrix full(static_cast<Eigen::Index>(rows_mod * k), static_cast<Eigen::Index>(cols_mod * k));
  const auto kk = static_cast<Eigen::Index>(k);
  for (std::size_t i = 0; i < rows_mod; ++i) {
    for (std::size_t j = 0; j < cols_mod; ++j) {
      full.block(static_cast<Eigen::Index>(i) * kk, static_cast<Eigen::Index>(j) * kk, kk, kk) =
          block(i, j);
    }
  }
  return full.topLeftCorner(static_cast<Eigen::Index>(matrix_rows),
                            static_cast<Eigen::Index>(matrix_cols));
}

Cluster partition(const WeightMatrix& w, std::size_t k) {
  if (k < 2) throw Error(ErrorKind::invalid_argument, "partition: k must be >= 2");
  Cluster c;
  c.layer = w.layer;
  c.k = k;
  c.matrix_rows = static_cast<std::size_t>(w.values.rows());
  c.matrix_cols = static_cast<std::size_t>(w.values.cols());
  c.rows_mod = ceil_div(c.matrix_rows, k);
  c.cols_mod = ceil_div(c.matrix_cols, k);
  c.blocks.reserve(c.rows_mod * c.cols_mod);
  const auto kk = static_cast<Eigen::Index>(k);
  for (std::size_t i = 0; i < c.rows_mod; ++i) {
    for (std::size_t j = 0; j < c.cols_mod; ++j) {
      Matrix b = Matrix::Zero(kk, kk);
      const auto r0 = static_cast<Eigen::Index>(i * k);
      const auto c0 = static_cast<Eigen::Index>(j * k);
      const auto rows = std::min<Eigen::Index>(kk, w.values.rows() - r0);
      const auto cols = std::min<Eigen::Index>(kk, w.values.cols() - c0);
      b.topLeftCorner(rows, cols) = w.values.block(r0, c0, rows, cols);
      c.blocks.push_back(std::move(b));
    }
  }
  return c;
}

AdjustedNetwork adjust_depths(const Network& network, const GoaArch& arch) {
  validate_network(network);
  AdjustedNetwork out{network, network, {}};
  Network& net = out.adjusted;
  const std::size_t k = arch.k;
  const std::size_t grid_length = arch.m * k;
  const auto chain = chain_of(net);

  for (std::size_t c = chain.size(); c-- > 1;) {
    const std::size_t a = chain[c];
    const std::size_t b = chain[c - 1];
    auto& layer = net[a];
    auto& prev = net[b];
    const std::size_t r = ratio_between(net, b, a);
    const std::size_t h2 = layer.kernel * layer.kernel;

    DepthAdjustment adj;
    adj.layer = a;
    adj.previous = b;
    adj.length = h2 * layer.depth;
    adj.cluster_length = ceil_div(adj.length, k) * k;
    adj.slack_cluster = adj.cluster_length - adj.length;
    adj.slack_grid = grid_length > adj.cluster_length ? grid_length - adj.cluster_length : 0;
    const std::size_t max_length = adj.length + adj.slack_cluster + adj.slack_grid;

    const std::size_t prev_width = ceil_div(prev.filters, k);
    // Width growth of the previous cluster is nondecreasing in depth and zero
    // at the current depth, so the minimum is always zero: take the largest
    // depth that keeps the previous cluster's module width.
    std::size_t best_depth = layer.depth;
    for (std::size_t d = layer.depth; d * h2 <= max_length; d += r) {
      if (ceil_div(d / r, k) == prev_width) best_depth = d;
    }
    const std::size_t best_growth = ceil_div(best_depth / r, k) - prev_width;
    adj.new_depth = best_depth;
    adj.delta = h2 * best_depth - adj.length;
    adj.previous_width_growth = best_growth;
    layer.depth = best_depth;
    prev.filters = best_depth / r;
    out.adjustments.push_back(adj);
  }
  std::reverse(out.adjustments.begin(), out.adjustments.end());
  validate_network(net);
  return out;
}

}  // namespace goa
