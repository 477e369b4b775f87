#pragma once

// Multi-pass packing of weight clusters onto the m x n module grid.
//
// Clusters are rotated by 90 degrees: input block j of a cluster sits in grid
// row origin_row + j (it receives that row's input slice) and output block i
// sits in grid column origin_col + offset(i) (its partial sums are collected
// by that column's photodiodes). A restored output block occupies two grid
// columns, so a cluster with r restored columns is rows_mod + r wide.

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "goa/photonic.hpp"
#include "goa/workload.hpp"

namespace goa {

struct ClusterShape {
  std::size_t layer = 0;
  std::size_t rows_mod = 0;  // output blocks -> grid columns
  std::size_t cols_mod = 0;  // input blocks -> grid rows
  std::set<std::size_t> restored;  // restored output blocks

  std::size_t width() const noexcept { return rows_mod + restored.size(); }
  std::size_t height() const noexcept { return cols_mod; }
  std::size_t area() const noexcept { return width() * height(); }

  friend bool operator==(const ClusterShape&, const ClusterShape&) = default;
};

ClusterShape cluster_shape(const Cluster& cluster);
ClusterShape cluster_shape(std::size_t layer, const MatrixShape& shape, std::size_t k);

/// Grid-column offset, within the cluster footprint, of the module that
/// detects output block i (the second module for restored blocks).
std::vector<std::size_t> output_column_offsets(const ClusterShape& shape);

struct Placement {
  std::size_t cluster = 0;  // index into MappingPlan::clusters
  std::size_t pass = 0;
  std::size_t row = 0;      // origin, module rows
  std::size_t col = 0;      // origin, module columns
  std::size_t height = 0;   // input blocks covered
  std::size_t width = 0;
  std::size_t segment = 0;  // 0-based segment index within the cluster
  std::size_t block_begin = 0;  // first input block of the segment

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct MappingPlan {
  GoaArch arch;
  std::vector<ClusterShape> clusters;
  std::vector<std::vector<Placement>> passes;

  /// Segments of one cluster, ordered by block_begin.
  std::vector<Placement> segments(std::size_t cluster) const;

  friend bool operator==(const MappingPlan&, const MappingPlan&) = default;
};

/// First-fit-decreasing packing. Clusters no taller than m are placed whole
/// (descending area, ties by layer index) at the first free origin of the
/// first pass that has room, scanning origins row-major; a new pass opens
/// when none has room. Clusters taller than m are then cut into segments of
/// at most m input blocks and each segment is placed the same way.
/// Throws goa::Error(infeasible) naming the layer when a cluster is wider
/// than the grid.
MappingPlan pack(std::span<const ClusterShape> clusters, const GoaArch& arch);

std::size_t mapping_cost(const MappingPlan& plan);
std::size_t eo_conversions(const MappingPlan& plan);

/// Occupied modules over available module slots, across all passes.
double utilization(const MappingPlan& plan);

/// Every overlap, out-of-bounds or coverage violation, as text. Empty for a
/// legal plan.
std::vector<std::string> plan_violations(const MappingPlan& plan);

// ---------------------------------------------------------------------------
// Monolithic interleaved-array baseline.

/// Mapping one u x u unitary onto the top-left corner of an s x s rectangular
/// mesh: `used` MZIs realize it, `affected` further MZIs lie on the light
/// paths from its inputs and have to be programmed as well.
struct InterleavingWaste {
  std::size_t used = 0;
  std::size_t affected = 0;
  std::size_t total = 0;
};

InterleavingWaste interleaving_waste(std::size_t unitary_ports, std::size_t array_ports);

/// Largest s with s(s-1)/2 <= budget.
std::size_t array_ports_for_budget(std::size_t mzi_budget);

/// MZIs an M x N matrix needs in SVD form, (M^2 + N^2) / 2.
std::size_t svd_form_mzis(std::size_t rows, std::size_t cols);

enum class OversizePolicy {
  reject,  // a matrix whose SVD form does not fit the array is infeasible
  tile,    // such matrices are cut into square tiles that fit, one per pass
};

struct BaselineCost {
  std::size_t array_ports = 0;
  std::size_t capacity = 0;  // MZIs in the array
  std::size_t mapping_cost = 0;
  std::size_t used_mzis = 0;
  std::size_t wasted_mzis = 0;

  double utilization() const;
};

/// One matrix (or tile) per pass on a single s x s interleaved array.
BaselineCost interleaving_baseline_cost(std::span<const MatrixShape> matrices,
                                        std::size_t mzi_budget,
                                        OversizePolicy policy = OversizePolicy::reject);

}  // namespace goa
