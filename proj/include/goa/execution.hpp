#pragma once

// Runs a mapping plan on the simulated grid: programs every module of every
// pass from the layer weights and drives each placement with its input
// slices. Partial sums of segmented clusters are added digitally after
// detection (one E/O conversion per extra segment).

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "goa/approximation.hpp"
#include "goa/mapper.hpp"
#include "goa/workload.hpp"

namespace goa {

/// Programs for every block of one cluster: a single UΣ module per block,
/// or a (V^T, U Σ) pair for blocks in restored columns.
struct ClusterPrograms {
  std::size_t rows_mod = 0;
  std::size_t cols_mod = 0;
  std::vector<MeshProgram> primary;   // module that detects the output
  std::vector<std::optional<MeshProgram>> leading;  // V^T module of a pair

  const MeshProgram& at(std::size_t i, std::size_t j) const { return primary[i * cols_mod + j]; }
};

ClusterPrograms program_cluster(const Cluster& cluster, const ClusterShape& shape);

/// The matrix the hardware realizes for `w`: every k x k block replaced by
/// its U diag(sigma) approximation, blocks of restored columns kept exact.
Matrix hardware_matrix(const Matrix& w, std::size_t k, const std::set<std::size_t>& restored = {});

/// Grid programming of one pass.
GridProgram program_pass(const MappingPlan& plan, std::size_t pass,
                         std::span<const ClusterPrograms> programs,
                         const std::vector<std::size_t>& row_wavelengths = {});

struct PlanExecution {
  std::vector<Vector> simulated;  // per cluster, length M
  std::size_t activations = 0;    // simulate_goa calls
};

/// `weights[c]` and `inputs[c]` belong to plan.clusters[c]. Each placement is
/// activated on its own: only its grid rows are lit and only its grid
/// columns are read, so co-resident placements never mix.
PlanExecution execute_plan(const MappingPlan& plan, std::span<const Matrix> weights,
                           std::span<const Vector> inputs,
                           const std::vector<std::size_t>& row_wavelengths = {});

}  // namespace goa
