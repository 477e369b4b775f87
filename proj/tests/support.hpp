#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <filesystem>
#include <string>
#include <vector>

#include "goa/arch_search.hpp"
#include "goa/io.hpp"
#include "goa/mapper.hpp"
#include "goa/workload.hpp"

namespace fixture {

inline std::filesystem::path data(const std::string& relative) {
  return std::filesystem::path(GOA_DATA_DIR) / relative;
}

inline std::vector<goa::ClusterShape> shapes(const goa::Network& net, std::size_t k) {
  std::vector<goa::ClusterShape> out;
  for (const auto& [index, shape] : goa::weight_shapes(net)) out.push_back(goa::cluster_shape(index, shape, k));
  return out;
}

inline std::vector<goa::MatrixShape> matrices(const goa::Network& net) {
  std::vector<goa::MatrixShape> out;
  for (const auto& entry : goa::weight_shapes(net)) out.push_back(entry.second);
  return out;
}

/// A 200-candidate space (m 1..4, n 4..8, k 60..69) on the five-matrix
/// workload, small enough to enumerate.
inline goa::SearchConfig enumerable_search(std::uint64_t seed) {
  goa::SearchConfig c;
  c.weights = {1.0, 0.2, 0.0, 0.1};
  c.mzi_budget = 50'000;
  c.wavelengths = 4;
  c.k_range = {60, 69};
  c.m_range = goa::IntRange{1, 4};
  c.n_range = goa::IntRange{4, 8};
  c.population = 16;
  c.generations = 30;
  c.seed = seed;
  c.workloads = {goa::load_network(data("networks/vgg16_fig4.json"))};
  c.device = goa::load_device_params(data("device_params.json"));
  return c;
}

/// Exhaustive minimum of the configured metric over the whole space.
inline goa::Candidate exhaustive_best(const goa::SearchConfig& config) {
  goa::Evaluator eval(config);
  const goa::SearchSpace space = goa::search_space(config);
  goa::Candidate best;
  for (std::size_t k = space.k.lo; k <= space.k.hi; ++k) {
    for (std::size_t m = space.m.lo; m <= space.m.hi; ++m) {
      for (std::size_t n = space.n.lo; n <= space.n.hi; ++n) {
        const goa::Candidate c = eval.evaluate(m, n, k);
        if (c.fitness < best.fitness) best = c;
      }
    }
  }
  return best;
}

}  // namespace fixture
