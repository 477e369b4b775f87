#pragma once

// Genetic-algorithm search over the grid shape (m, n) and module size k.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "goa/costmodel.hpp"
#include "goa/workload.hpp"

namespace goa {

struct MetricWeights {
  double alpha = 1.0;  // mapping cost
  double beta = 0.0;   // area
  double gamma = 0.0;  // power
  double delta = 0.0;  // E/O conversions

  friend bool operator==(const MetricWeights&, const MetricWeights&) = default;
};

struct IntRange {
  std::size_t lo = 1;
  std::size_t hi = 1;

  std::size_t size() const noexcept { return hi >= lo ? hi - lo + 1 : 0; }
  bool contains(std::size_t v) const noexcept { return v >= lo && v <= hi; }

  friend bool operator==(const IntRange&, const IntRange&) = default;
};

enum class Normalization {
  reference,  // each term divided by its value at the reference candidate
  raw,
};

struct SearchConfig {
  MetricWeights weights;
  std::size_t mzi_budget = 0;
  std::size_t wavelengths = 1;
  IntRange k_range{2, 2};
  std::optional<IntRange> m_range;  // default [1, W]
  std::optional<IntRange> n_range;  // default [1, budget / MZIs per smallest module]
  std::size_t population = 16;
  std::size_t generations = 30;
  double crossover_rate = 0.9;
  double mutation_rate = 0.2;
  std::uint64_t seed = 1;
  Normalization normalization = Normalization::reference;
  std::vector<Network> workloads;
  DeviceParams device;

  /// Throws goa::Error(invalid_argument) on negative weights, population < 2,
  /// rates outside [0, 1] or an empty workload list.
  void validate() const;
};

struct SearchSpace {
  IntRange m, n, k;
  std::size_t size() const noexcept { return m.size() * n.size() * k.size(); }
};

SearchSpace search_space(const SearchConfig& config);

struct Candidate {
  std::size_t m = 1, n = 1, k = 2;
  double fitness = std::numeric_limits<double>::infinity();
  bool feasible = false;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Raw objective terms of one architecture, averaged over the workloads.
struct MetricTerms {
  double mapping_cost = 0.0;
  double area = 0.0;
  double power = 0.0;
  double eo_conversions = 0.0;
};

/// Memoizing fitness evaluator shared by the GA and exhaustive scans.
class Evaluator {
 public:
  explicit Evaluator(const SearchConfig& config);

  /// Budget, wavelength and cluster-width checks only (no packing).
  bool feasible(std::size_t m, std::size_t n, std::size_t k) const;
  std::optional<MetricTerms> terms(std::size_t m, std::size_t n, std::size_t k);
  Candidate evaluate(std::size_t m, std::size_t n, std::size_t k);

  const MetricTerms& normalizer() const noexcept { return normalizer_; }
  const std::optional<GoaArch>& reference() const noexcept { return reference_; }
  std::size_t evaluations() const noexcept { return cache_.size(); }

 private:
  const SearchConfig& config_;
  std::vector<std::vector<MatrixShape>> shapes_;  // per workload
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, Candidate> cache_;
  MetricTerms normalizer_{1.0, 1.0, 1.0, 1.0};
  std::optional<GoaArch> reference_;
};

/// alpha * cost + beta * area + gamma * power + delta * eo on normalized terms.
double metric(const MetricTerms& terms, const MetricWeights& weights, const MetricTerms& normalizer);

struct SearchResult {
  Candidate best;
  std::vector<double> history;  // best-so-far fitness, generation 0 first
  std::size_t evaluations = 0;
  std::optional<GoaArch> reference;
};

/// Tournament(2) selection, uniform crossover, +-1 or redraw mutation, one
/// elite. Deterministic for a fixed seed. Throws goa::Error(infeasible) when
/// no candidate in the space is feasible.
SearchResult ga_search(const SearchConfig& config);

}  // namespace goa
