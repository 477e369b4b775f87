#include "goa/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <tuple>

#include "goa/error.hpp"

namespace goa {

namespace {

// Occupancy of one pass with a summed-area table for O(1) rectangle queries.
class PassGrid {
 public:
  PassGrid(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), used_(rows * cols, 0), sat_((rows + 1) * (cols + 1), 0) {}

  bool free(std::size_t r, std::size_t c, std::size_t h, std::size_t w) const {
    return sat(r + h, c + w) - sat(r, c + w) - sat(r + h, c) + sat(r, c) == 0;
  }

  std::optional<std::pair<std::size_t, std::size_t>> first_fit(std::size_t h, std::size_t w) const {
    if (h > rows_ || w > cols_) return std::nullopt;
    for (std::size_t r = 0; r + h <= rows_; ++r) {
      for (std::size_t c = 0; c + w <= cols_; ++c) {
        if (!used_[r * cols_ + c] && free(r, c, h, w)) return std::pair{r, c};
      }
    }
    return std::nullopt;
  }

  /// First row-major origin at which a w-wide piece of at least `floor` rows
  /// fits, with the number of free rows below it (capped at `cap`).
  std::optional<std::tuple<std::size_t, std::size_t, std::size_t>> first_slot(std::size_t w, std::size_t cap,
                                                                             std::size_t floor) const {
    if (w > cols_) return std::nullopt;
    for (std::size_t r = 0; r + floor <= rows_; ++r) {
      for (std::size_t c = 0; c + w <= cols_; ++c) {
        if (!free(r, c, 1, w)) continue;
        std::size_t h = 1;
        while (h < cap && r + h < rows_ && free(r + h, c, 1, w)) ++h;
        if (h >= floor) return std::tuple{r, c, h};
      }
    }
    return std::nullopt;
  }

  void occupy(std::size_t r, std::size_t c, std::size_t h, std::size_t w) {
    for (std::size_t i = r; i < r + h; ++i) {
      for (std::size_t j = c; j < c + w; ++j) used_[i * cols_ + j] = 1;
    }
    for (std::size_t i = 1; i <= rows_; ++i) {
      for (std::size_t j = 1; j <= cols_; ++j) {
        sat_[i * (cols_ + 1) + j] = used_[(i - 1) * cols_ + (j - 1)] + sat(i - 1, j) + sat(i, j - 1) -
                                    sat(i - 1, j - 1);
      }
    }
  }

 private:
  long sat(std::size_t r, std::size_t c) const { return sat_[r * (cols_ + 1) + c]; }

  std::size_t rows_, cols_;
  std::vector<char> used_;
  std::vector<long> sat_;
};

}  // namespace

ClusterShape cluster_shape(const Cluster& cluster) {
  return {cluster.layer, cluster.rows_mod, cluster.cols_mod, {}};
}

ClusterShape cluster_shape(std::size_t layer, const MatrixShape& shape, std::size_t k) {
  return {layer, ceil_div(shape.rows, k), ceil_div(shape.cols, k), {}};
}

std::vector<std::size_t> output_column_offsets(const ClusterShape& shape) {
  std::vector<std::size_t> offsets(shape.rows_mod);
  std::size_t col = 0;
  for (std::size_t i = 0; i < shape.rows_mod; ++i) {
    if (shape.restored.contains(i)) ++col;  // V^T module sits to the left
    offsets[i] = col++;
  }
  return offsets;
}

std::vector<Placement> MappingPlan::segments(std::size_t cluster) const {
  std::vector<Placement> out;
  for (const auto& pass : passes) {
    for (const auto& p : pass) {
      if (p.cluster == cluster) out.push_back(p);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Placement& a, const Placement& b) { return a.block_begin < b.block_begin; });
  return out;
}

MappingPlan pack(std::span<const ClusterShape> clusters, const GoaArch& arch) {
  arch.validate();
  MappingPlan plan;
  plan.arch = arch;
  plan.clusters.assign(clusters.begin(), clusters.end());

  for (const auto& c : clusters) {
    if (c.rows_mod == 0 || c.cols_mod == 0) {
      throw Error(ErrorKind::invalid_argument,
                  "pack: layer " + std::to_string(c.layer) + " has an empty cluster");
    }
    if (c.width() > arch.n) {
      throw Error(ErrorKind::infeasible,
                  "layer " + std::to_string(c.layer) + ": cluster is " + std::to_string(c.width()) +
                      " modules wide but the grid has n = " + std::to_string(arch.n) + " columns");
    }
  }

  std::vector<std::size_t> whole, tall;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    (clusters[i].height() <= arch.m ? whole : tall).push_back(i);
  }
  auto by_area = [&](std::size_t a, std::size_t b) {
    if (clusters[a].area() != clusters[b].area()) return clusters[a].area() > clusters[b].area();
    if (clusters[a].layer != clusters[b].layer) return clusters[a].layer < clusters[b].layer;
    return a < b;
  };
  std::sort(whole.begin(), whole.end(), by_area);
  std::sort(tall.begin(), tall.end(), by_area);

  std::vector<PassGrid> grids;
  auto place = [&](std::size_t cluster, std::size_t begin, std::size_t height, std::size_t segment) {
    const std::size_t width = clusters[cluster].width();
    for (std::size_t p = 0; p < grids.size(); ++p) {
      if (auto origin = grids[p].first_fit(height, width)) {
        grids[p].occupy(origin->first, origin->second, height, width);
        plan.passes[p].push_back(
            {cluster, p, origin->first, origin->second, height, width, segment, begin});
        return;
      }
    }
    grids.emplace_back(arch.m, arch.n);
    grids.back().occupy(0, 0, height, width);
    plan.passes.emplace_back();
    plan.passes.back().push_back({cluster, grids.size() - 1, 0, 0, height, width, segment, begin});
  };

  for (std::size_t i : whole) place(i, 0, clusters[i].height(), 0);
  // Tall clusters are cut into full-width segments whose heights follow the
  // free space: each segment takes the first free slot of an existing pass,
  // and only a remainder that finds no slot opens a new pass. Slots shorter
  // than a quarter of the grid that would not finish the cluster are skipped,
  // since each extra segment costs an E/O conversion.
  const std::size_t min_fill = ceil_div(arch.m, 4);
  for (std::size_t i : tall) {
    const std::size_t width = clusters[i].width();
    std::size_t segment = 0;
    std::size_t begin = 0;
    while (begin < clusters[i].height()) {
      const std::size_t want = std::min(arch.m, clusters[i].height() - begin);
      bool placed = false;
      for (std::size_t p = 0; p < grids.size() && !placed; ++p) {
        if (auto slot = grids[p].first_slot(width, want, std::min(want, min_fill))) {
          const auto [row, col, height] = *slot;
          grids[p].occupy(row, col, height, width);
          plan.passes[p].push_back({i, p, row, col, height, width, segment++, begin});
          begin += height;
          placed = true;
        }
      }
      if (!placed) {
        place(i, begin, want, segment++);
        begin += want;
      }
    }
  }
  return plan;
}

std::size_t mapping_cost(const MappingPlan& plan) { return plan.passes.size(); }

std::size_t eo_conversions(const MappingPlan& plan) {
  std::vector<std::size_t> segments(plan.clusters.size(), 0);
  for (const auto& pass : plan.passes) {
    for (const auto& p : pass) ++segments[p.cluster];
  }
  std::size_t total = 0;
  for (std::size_t s : segments) total += s > 0 ? s - 1 : 0;
  return total;
}

double utilization(const MappingPlan& plan) {
  if (plan.passes.empty()) return 0.0;
  std::size_t occupied = 0;
  for (const auto& pass : plan.passes) {
    for (const auto& p : pass) occupied += p.height * p.width;
  }
  return static_cast<double>(occupied) /
         static_cast<double>(plan.passes.size() * plan.arch.m * plan.arch.n);
}

std::vector<std::string> plan_violations(const MappingPlan& plan) {
  std::vector<std::string> out;
  const auto& arch = plan.arch;
  for (std::size_t p = 0; p < plan.passes.size(); ++p) {
    std::vector<int> owner(arch.m * arch.n, -1);
    for (std::size_t q = 0; q < plan.passes[p].size(); ++q) {
      const auto& pl = plan.passes[p][q];
      const std::string tag = "pass " + std::to_string(p) + " placement " + std::to_string(q);
      if (pl.pass != p) out.push_back(tag + ": pass index mismatch");
      if (pl.cluster >= plan.clusters.size()) {
        out.push_back(tag + ": unknown cluster");
        continue;
      }
      if (pl.height == 0 || pl.width == 0) out.push_back(tag + ": empty extent");
      if (pl.row + pl.height > arch.m || pl.col + pl.width > arch.n) {
        out.push_back(tag + ": out of bounds");
        continue;
      }
      for (std::size_t r = pl.row; r < pl.row + pl.height; ++r) {
        for (std::size_t c = pl.col; c < pl.col + pl.width; ++c) {
          int& cell = owner[r * arch.n + c];
          if (cell >= 0) {
            out.push_back(tag + ": overlaps placement " + std::to_string(cell) + " at (" +
                          std::to_string(r) + ", " + std::to_string(c) + ")");
          }
          cell = static_cast<int>(q);
        }
      }
    }
  }
  for (std::size_t i = 0; i < plan.clusters.size(); ++i) {
    const auto segs = plan.segments(i);
    const auto& shape = plan.clusters[i];
    const std::string tag = "cluster " + std::to_string(i);
    std::size_t next = 0;
    for (std::size_t s = 0; s < segs.size(); ++s) {
      if (segs[s].block_begin != next) out.push_back(tag + ": segments leave a gap or overlap");
      if (segs[s].width != shape.width()) out.push_back(tag + ": segment width != cluster width");
      if (segs[s].segment != s) out.push_back(tag + ": segment numbering");
      next = segs[s].block_begin + segs[s].height;
    }
    if (next != shape.height()) out.push_back(tag + ": segments do not cover the cluster");
  }
  return out;
}

InterleavingWaste interleaving_waste(std::size_t unitary_ports, std::size_t array_ports) {
  if (unitary_ports < 1 || unitary_ports > array_ports) {
    throw Error(ErrorKind::infeasible, "interleaving_waste: a " + std::to_string(unitary_ports) +
                                           "-port unitary does not fit a " +
                                           std::to_string(array_ports) + "-port array");
  }
  InterleavingWaste w;
  w.total = array_ports * (array_ports - 1) / 2;
  std::vector<bool> lit(array_ports, false);
  for (std::size_t p = 0; p < unitary_ports; ++p) lit[p] = true;
  for (std::size_t c = 0; c < array_ports; ++c) {
    for (std::size_t p = c % 2; p + 1 < array_ports; p += 2) {
      if (c < unitary_ports && p + 1 < unitary_ports) {
        ++w.used;  // part of the top-left u-port rectangular mesh
      } else if (lit[p] || lit[p + 1]) {
        ++w.affected;
        lit[p] = lit[p + 1] = true;
      }
    }
  }
  return w;
}

std::size_t array_ports_for_budget(std::size_t mzi_budget) {
  auto s = static_cast<std::size_t>(std::floor((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(mzi_budget))) / 2.0));
  while (s > 0 && s * (s - 1) / 2 > mzi_budget) --s;
  while ((s + 1) * s / 2 <= mzi_budget) ++s;
  return s;
}

std::size_t svd_form_mzis(std::size_t rows, std::size_t cols) { return (rows * rows + cols * cols) / 2; }

double BaselineCost::utilization() const {
  if (mapping_cost == 0) return 0.0;
  return static_cast<double>(used_mzis) / static_cast<double>(mapping_cost * capacity);
}

BaselineCost interleaving_baseline_cost(std::span<const MatrixShape> matrices,
                                        std::size_t mzi_budget, OversizePolicy policy) {
  BaselineCost cost;
  cost.array_ports = array_ports_for_budget(mzi_budget);
  cost.capacity = cost.array_ports * (cost.array_ports - 1) / 2;
  const std::size_t s = cost.array_ports;
  auto fits = [&](std::size_t r, std::size_t c) {
    return r <= s && c <= s && svd_form_mzis(r, c) <= cost.capacity;
  };
  auto map_one = [&](std::size_t r, std::size_t c) {
    const std::size_t used = svd_form_mzis(r, c);
    ++cost.mapping_cost;
    cost.used_mzis += used;
    cost.wasted_mzis += cost.capacity - used;
  };

  for (const auto& m : matrices) {
    if (fits(m.rows, m.cols)) {
      map_one(m.rows, m.cols);
      continue;
    }
    if (policy == OversizePolicy::reject) {
      throw Error(ErrorKind::infeasible,
                  "baseline: " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                      " needs " + std::to_string(svd_form_mzis(m.rows, m.cols)) +
                      " MZIs in SVD form but the array has " + std::to_string(cost.capacity));
    }
    // Square tile that always fits, then widen the column extent as far as
    // the SVD-form budget allows for that row extent.
    std::size_t side = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(cost.capacity))));
    side = std::max<std::size_t>(1, std::min(side, s));
    const std::size_t tile_rows = std::min(m.rows, side);
    std::size_t tile_cols = std::min(m.cols, s);
    while (tile_cols > 1 && !fits(tile_rows, tile_cols)) --tile_cols;
    for (std::size_t r0 = 0; r0 < m.rows; r0 += tile_rows) {
      for (std::size_t c0 = 0; c0 < m.cols; c0 += tile_cols) {
        map_one(std::min(tile_rows, m.rows - r0), std::min(tile_cols, m.cols - c0));
      }
    }
  }
  return cost;
}

}  // namespace goa
