#pragma once

// Network shape ingestion, conv reshaping, k x k partitioning and kernel
// depth adjustment.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "goa/photonic.hpp"

namespace goa {

enum class LayerKind { conv, dense, pool };

struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  std::string name;
  std::size_t filters = 0;  // conv/dense output dimension
  std::size_t kernel = 1;   // h, spatial kernel size (1 for dense)
  std::size_t depth = 0;    // d, input channels
  /// Pool layers: the next weight layer's depth is pool_ratio times the
  /// previous weight layer's filters (1 for plain max pooling, s*s for a
  /// flatten of an s x s map).
  std::size_t pool_ratio = 1;
  /// Side-path layer (e.g. a projection shortcut): excluded from the
  /// consecutive-layer chain and never adjusted.
  bool branch = false;

  bool is_weight() const noexcept { return kind != LayerKind::pool; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

using Network = std::vector<LayerSpec>;

/// Throws goa::Error(invalid_argument) naming the first inconsistent layer.
void validate_network(const Network& network);

struct MatrixShape {
  std::size_t rows = 0;  // M = filters
  std::size_t cols = 0;  // N = h^2 d

  friend bool operator==(const MatrixShape&, const MatrixShape&) = default;
};

MatrixShape reshape_conv(const LayerSpec& layer);

struct WeightMatrix {
  std::size_t layer = 0;
  Matrix values;  // M x N
};

/// Zero-padded k x k block grid of one weight matrix.
struct Cluster {
  std::size_t layer = 0;
  std::size_t k = 0;
  std::size_t matrix_rows = 0;
  std::size_t matrix_cols = 0;
  std::size_t rows_mod = 0;  // ceil(M / k): output blocks
  std::size_t cols_mod = 0;  // ceil(N / k): input blocks
  std::vector<Matrix> blocks;  // rows_mod x cols_mod, row-major

  const Matrix& block(std::size_t i, std::size_t j) const { return blocks[i * cols_mod + j]; }
  Matrix& block(std::size_t i, std::size_t j) { return blocks[i * cols_mod + j]; }

  /// Reassembles the blocks and crops the padding.
  Matrix reassemble() const;
};

std::size_t ceil_div(std::size_t a, std::size_t b);

Cluster partition(const WeightMatrix& w, std::size_t k);

struct DepthAdjustment {
  std::size_t layer = 0;  // index in the network
  std::size_t length = 0;             // l_a = h^2 d
  std::size_t cluster_length = 0;     // L_a = ceil(l_a / k) k
  std::size_t slack_cluster = 0;      // S1
  std::size_t slack_grid = 0;         // S2 (0 when the cluster is taller than m k)
  std::size_t delta = 0;              // applied length increase, h^2 d' - l_a
  std::size_t new_depth = 0;          // d'
  std::optional<std::size_t> previous;  // index of the adjusted predecessor
  std::size_t previous_width_growth = 0;  // in modules
};

struct AdjustedNetwork {
  Network original;
  Network adjusted;
  std::vector<DepthAdjustment> adjustments;  // one per adjustable layer
};

/// Grows kernel depths (and the producing layer's filters) into the unused
/// length of each cluster and of the grid, last layer first.
AdjustedNetwork adjust_depths(const Network& network, const GoaArch& arch);

/// Weight layers in order (pool layers skipped), with their matrix shapes.
std::vector<std::pair<std::size_t, MatrixShape>> weight_shapes(const Network& network);

}  // namespace goa
