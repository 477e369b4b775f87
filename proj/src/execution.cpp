#include "goa/execution.hpp"

#include <string>

#include "goa/error.hpp"

namespace goa {

ClusterPrograms program_cluster(const Cluster& cluster, const ClusterShape& shape) {
  ClusterPrograms out;
  out.rows_mod = cluster.rows_mod;
  out.cols_mod = cluster.cols_mod;
  out.primary.reserve(cluster.blocks.size());
  out.leading.reserve(cluster.blocks.size());
  for (std::size_t i = 0; i < cluster.rows_mod; ++i) {
    for (std::size_t j = 0; j < cluster.cols_mod; ++j) {
      if (shape.restored.contains(i)) {
        auto [first, second] = restore_pair(cluster.block(i, j));
        out.primary.push_back(std::move(second));
        out.leading.emplace_back(std::move(first));
      } else {
        out.primary.push_back(module_program(approx_module(cluster.block(i, j))));
        out.leading.emplace_back(std::nullopt);
      }
    }
  }
  return out;
}

Matrix hardware_matrix(const Matrix& w, std::size_t k, const std::set<std::size_t>& restored) {
  Cluster c = partition({0, w}, k);
  for (std::size_t i = 0; i < c.rows_mod; ++i) {
    if (restored.contains(i)) continue;
    for (std::size_t j = 0; j < c.cols_mod; ++j) c.block(i, j) = approx_module(c.block(i, j)).hardware();
  }
  return c.reassemble();
}

GridProgram program_pass(const MappingPlan& plan, std::size_t pass,
                         std::span<const ClusterPrograms> programs,
                         const std::vector<std::size_t>& row_wavelengths) {
  GridProgram grid(plan.arch);
  if (!row_wavelengths.empty()) {
    if (row_wavelengths.size() != plan.arch.m) {
      throw Error(ErrorKind::invalid_argument, "row wavelength map must list one channel per module row");
    }
    grid.row_wavelengths = row_wavelengths;
  }
  for (const auto& pl : plan.passes.at(pass)) {
    const auto& shape = plan.clusters.at(pl.cluster);
    const auto& progs = programs[pl.cluster];
    const auto offsets = output_column_offsets(shape);
    for (std::size_t t = 0; t < pl.height; ++t) {
      const std::size_t row = pl.row + t;
      const std::size_t j = pl.block_begin + t;
      for (std::size_t i = 0; i < shape.rows_mod; ++i) {
        const std::size_t col = pl.col + offsets[i];
        grid.at(row, col) = progs.at(i, j);
        if (const auto& lead = progs.leading[i * progs.cols_mod + j]) {
          grid.at(row, col - 1) = *lead;
          grid.feeds_right[row * plan.arch.n + col - 1] = true;
        }
      }
    }
  }
  return grid;
}

PlanExecution execute_plan(const MappingPlan& plan, std::span<const Matrix> weights,
                           std::span<const Vector> inputs,
                           const std::vector<std::size_t>& row_wavelengths) {
  const std::size_t nc = plan.clusters.size();
  if (weights.size() != nc || inputs.size() != nc) {
    throw Error(ErrorKind::dimension_mismatch, "execute_plan: one weight matrix and input per cluster");
  }
  const std::size_t k = plan.arch.k;
  const auto kk = static_cast<Eigen::Index>(k);

  std::vector<ClusterPrograms> programs;
  std::vector<Vector> padded_inputs;
  PlanExecution out;
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& shape = plan.clusters[c];
    const Cluster cluster = partition({shape.layer, weights[c]}, k);
    if (cluster.rows_mod != shape.rows_mod || cluster.cols_mod != shape.cols_mod) {
      throw Error(ErrorKind::dimension_mismatch,
                  "execute_plan: weights of layer " + std::to_string(shape.layer) +
                      " do not match the planned cluster shape");
    }
    if (inputs[c].size() != weights[c].cols()) {
      throw Error(ErrorKind::dimension_mismatch,
                  "execute_plan: input length mismatch for layer " + std::to_string(shape.layer));
    }
    programs.push_back(program_cluster(cluster, shape));
    Vector x = Vector::Zero(static_cast<Eigen::Index>(shape.cols_mod * k));
    x.head(inputs[c].size()) = inputs[c];
    padded_inputs.push_back(std::move(x));
    out.simulated.push_back(Vector::Zero(static_cast<Eigen::Index>(shape.rows_mod * k)));
  }

  for (std::size_t p = 0; p < plan.passes.size(); ++p) {
    const GridProgram grid = program_pass(plan, p, programs, row_wavelengths);
    for (const auto& pl : plan.passes[p]) {
      const auto& shape = plan.clusters[pl.cluster];
      Vector lit = Vector::Zero(static_cast<Eigen::Index>(plan.arch.m * k));
      for (std::size_t t = 0; t < pl.height; ++t) {
        lit.segment(static_cast<Eigen::Index>((pl.row + t) * k), kk) =
            padded_inputs[pl.cluster].segment(static_cast<Eigen::Index>((pl.block_begin + t) * k), kk);
      }
      const Vector detected = simulate_goa(grid, lit);
      ++out.activations;
      const auto offsets = output_column_offsets(shape);
      for (std::size_t i = 0; i < shape.rows_mod; ++i) {
        out.simulated[pl.cluster].segment(static_cast<Eigen::Index>(i * k), kk) +=
            detected.segment(static_cast<Eigen::Index>((pl.col + offsets[i]) * k), kk);
      }
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    out.simulated[c] = out.simulated[c].head(weights[c].rows()).eval();
  }
  return out;
}

}  // namespace goa
