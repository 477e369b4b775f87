#include "goa/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "goa/error.hpp"
#include "goa/mapper.hpp"

namespace goa {

namespace {

void require_square_finite(const Matrix& w, const char* where) {
  if (w.rows() != w.cols() || w.rows() < 1) {
    throw Error(ErrorKind::dimension_mismatch, std::string(where) + ": matrix must be square");
  }
  if (!w.allFinite()) {
    throw Error(ErrorKind::invalid_argument, std::string(where) + ": non-finite entries");
  }
}

}  // namespace

SvdTriple svd_decompose(const Matrix& w) {
  require_square_finite(w, "svd_decompose");
  Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdTriple out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
    Eigen::Index arg = 0;
    out.u.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.u(arg, j) < 0.0) {
      out.u.col(j) *= -1.0;
      out.v.col(j) *= -1.0;
    }
  }
  return out;
}

NearestUnitary nearest_unitary(const Matrix& w) {
  const SvdTriple svd = svd_decompose(w);
  const double largest = svd.sigma.size() > 0 ? svd.sigma(0) : 0.0;
  const double smallest = svd.sigma.size() > 0 ? svd.sigma(svd.sigma.size() - 1) : 0.0;
  const double eps = std::numeric_limits<double>::epsilon() * static_cast<double>(w.rows());
  return {svd.u * svd.v.transpose(), smallest > eps * std::max(largest, 1.0)};
}

Vector fit_diagonal(const Matrix& w, const Matrix& u, SliceOrientation orientation) {
  if (w.rows() != u.rows() || w.cols() != u.cols() || w.rows() != w.cols()) {
    throw Error(ErrorKind::dimension_mismatch, "fit_diagonal: w and U must be equal-size squares");
  }
  // Slices of an orthogonal matrix have unit norm, so the least-squares
  // scalar reduces to the inner product.
  if (orientation == SliceOrientation::column) return u.cwiseProduct(w).colwise().sum().transpose();
  return u.cwiseProduct(w).rowwise().sum();
}

Matrix UnitaryApprox::hardware() const {
  if (orientation == SliceOrientation::column) return u * sigma.asDiagonal();
  return sigma.asDiagonal() * u;
}

UnitaryApprox approx_module(const Matrix& w, SliceOrientation orientation) {
  const NearestUnitary nu = nearest_unitary(w);
  UnitaryApprox a;
  a.u = nu.u;
  a.unique = nu.unique;
  a.orientation = orientation;
  a.sigma = fit_diagonal(w, a.u, orientation);
  a.residual = (w - a.hardware()).norm();
  return a;
}

MeshProgram module_program(const UnitaryApprox& approx) {
  if (approx.orientation != SliceOrientation::column) {
    throw Error(ErrorKind::invalid_argument,
                "module_program: only the column orientation maps onto a module (U then diag at the inputs)");
  }
  const auto k = approx.u.cols();
  CMatrix u = approx.u.cast<Complex>();
  std::vector<double> magnitudes(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    magnitudes[static_cast<std::size_t>(j)] = std::abs(approx.sigma(j));
    if (approx.sigma(j) < 0.0) u.col(j) *= -1.0;
  }
  MeshProgram program = decompose_unitary(u);
  program.diagonal = std::move(magnitudes);
  return program;
}

std::pair<MeshProgram, MeshProgram> restore_pair(const Matrix& w) {
  const SvdTriple svd = svd_decompose(w);
  MeshProgram first = decompose_unitary(svd.v.transpose().cast<Complex>());
  MeshProgram second = decompose_unitary(svd.u.cast<Complex>());
  second.diagonal.assign(svd.sigma.data(), svd.sigma.data() + svd.sigma.size());
  return {std::move(first), std::move(second)};
}

RestorationSelection rank_columns(const std::vector<LayerResiduals>& layers) {
  RestorationSelection out;
  for (const auto& layer : layers) {
    if (layer.residuals.size() != layer.rows_mod * layer.cols_mod) {
      throw Error(ErrorKind::dimension_mismatch,
                  "rank_columns: layer " + std::to_string(layer.layer) + " residual grid size mismatch");
    }
    for (std::size_t i = 0; i < layer.rows_mod; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < layer.cols_mod; ++j) sum += layer.residuals[i * layer.cols_mod + j];
      out.columns.push_back({{layer.layer, i}, sum});
    }
  }
  std::stable_sort(out.columns.begin(), out.columns.end(),
                   [](const RankedColumn& a, const RankedColumn& b) { return a.error > b.error; });
  return out;
}

RestorationSelection select_restorations(const RestorationSelection& ranking, std::size_t budget,
                                         const GoaArch& arch, const MappingPlan& plan) {
  RestorationSelection out;
  std::vector<std::size_t> extra(plan.clusters.size(), 0);
  for (const auto& candidate : ranking.columns) {
    if (out.columns.size() == budget) break;
    const auto it = std::find_if(plan.clusters.begin(), plan.clusters.end(),
                                 [&](const ClusterShape& c) { return c.layer == candidate.ref.layer; });
    if (it == plan.clusters.end() || candidate.ref.column >= it->rows_mod) continue;
    const auto index = static_cast<std::size_t>(it - plan.clusters.begin());
    if (it->restored.contains(candidate.ref.column)) continue;

    const auto offsets = output_column_offsets(*it);
    bool admissible = it->width() + extra[index] + 1 <= arch.n;
    for (const auto& seg : plan.segments(index)) {
      if (seg.col + offsets[candidate.ref.column] + 1 >= arch.n) admissible = false;
    }
    if (!admissible) continue;
    ++extra[index];
    out.columns.push_back(candidate);
  }
  out.shortfall = out.columns.size() < budget;
  return out;
}

}  // namespace goa
