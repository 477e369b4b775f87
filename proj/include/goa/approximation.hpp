#pragma once

// Single-unitary module approximation w ~ U diag(sigma), SVD restoration of
// critical module columns, and the restoration ranking/selection logic.

#include <cstddef>
#include <utility>
#include <vector>

#include "goa/photonic.hpp"

namespace goa {

struct SvdTriple {
  Matrix u;      // left singular vectors
  Vector sigma;  // descending, >= 0
  Matrix v;      // right singular vectors; w = u * diag(sigma) * v^T
};

/// Descending singular values; each left singular vector is flipped so its
/// largest-magnitude entry is nonnegative (the matching column of v follows).
SvdTriple svd_decompose(const Matrix& w);

struct NearestUnitary {
  Matrix u;
  /// False when w is rank deficient and the polar factor is not unique.
  bool unique = true;
};

/// Polar factor U_svd V_svd^T: the Frobenius-nearest orthogonal matrix.
NearestUnitary nearest_unitary(const Matrix& w);

/// Which slice the diagonal scales. `column` matches the module's hardware
/// order U * diag(sigma) (diagonal at the inputs); `row` fits diag(sigma) * U.
enum class SliceOrientation { column, row };

/// Closed-form per-slice least squares: sigma_j = <slice_j(U), slice_j(w)>.
Vector fit_diagonal(const Matrix& w, const Matrix& u,
                    SliceOrientation orientation = SliceOrientation::column);

struct UnitaryApprox {
  Matrix u;
  Vector sigma;
  double residual = 0.0;  // ||w - hardware()||_F
  bool unique = true;
  SliceOrientation orientation = SliceOrientation::column;

  /// U * diag(sigma) (column mode) or diag(sigma) * U (row mode).
  Matrix hardware() const;
};

UnitaryApprox approx_module(const Matrix& w,
                            SliceOrientation orientation = SliceOrientation::column);

/// Mesh program realizing a column-mode approximation. Negative sigma are
/// folded into the unitary as a pi phase so the diagonal stays nonnegative.
MeshProgram module_program(const UnitaryApprox& approx);

/// Two-module exact realization of w: the first mesh carries V^T with a unit
/// diagonal, the second carries U with diag(sigma_svd).
std::pair<MeshProgram, MeshProgram> restore_pair(const Matrix& w);

/// A module-grid column of one layer's cluster, i.e. output block `column`.
struct ColumnRef {
  std::size_t layer = 0;
  std::size_t column = 0;

  friend auto operator<=>(const ColumnRef&, const ColumnRef&) = default;
};

struct RankedColumn {
  ColumnRef ref;
  double error = 0.0;
};

struct RestorationSelection {
  std::vector<RankedColumn> columns;  // descending accumulated error
  bool shortfall = false;             // fewer admissible columns than budget
};

/// Per-block residuals of one layer, rows_mod x cols_mod row-major
/// (block (i, j) = output block i, input block j).
struct LayerResiduals {
  std::size_t layer = 0;
  std::size_t rows_mod = 0;
  std::size_t cols_mod = 0;
  std::vector<double> residuals;
};

/// Accumulated error per column (sum over the column's blocks), sorted
/// descending; ties keep layer/column order.
RestorationSelection rank_columns(const std::vector<LayerResiduals>& layers);

struct MappingPlan;

/// Greedy pick of up to `budget` columns from `ranking`. A column is
/// admissible when, in every pass where its layer is placed, its grid column
/// has a right neighbour inside the grid, and the cluster widened by one
/// module column per restoration still fits the grid width.
RestorationSelection select_restorations(const RestorationSelection& ranking, std::size_t budget,
                                         const GoaArch& arch, const MappingPlan& plan);

}  // namespace goa
