#include "goa/arch_search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "goa/error.hpp"
#include "goa/mapper.hpp"

namespace goa {

void SearchConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_argument, "search config: " + msg); };
  for (double w : {weights.alpha, weights.beta, weights.gamma, weights.delta}) {
    if (!std::isfinite(w) || w < 0.0) fail("weights must be finite and >= 0");
  }
  if (population < 2) fail("population must be >= 2");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) fail("crossover_rate must lie in [0, 1]");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) fail("mutation_rate must lie in [0, 1]");
  if (workloads.empty()) fail("at least one workload is required");
  if (k_range.lo < 2 || k_range.size() == 0) fail("k_range must satisfy 2 <= lo <= hi");
  if (wavelengths < 1) fail("wavelengths must be >= 1");
  if (m_range && (m_range->lo < 1 || m_range->size() == 0)) fail("m_range must satisfy 1 <= lo <= hi");
  if (n_range && (n_range->lo < 1 || n_range->size() == 0)) fail("n_range must satisfy 1 <= lo <= hi");
  for (const auto& w : workloads) validate_network(w);
  device.validate();
}

SearchSpace search_space(const SearchConfig& config) {
  SearchSpace s;
  s.k = config.k_range;
  s.m = config.m_range.value_or(IntRange{1, config.wavelengths});
  if (config.n_range) {
    s.n = *config.n_range;
  } else {
    const std::size_t per = mzis_per_module(config.k_range.lo);
    s.n = {1, std::max<std::size_t>(1, config.mzi_budget / per)};
  }
  return s;
}

double metric(const MetricTerms& t, const MetricWeights& w, const MetricTerms& norm) {
  return w.alpha * (t.mapping_cost / norm.mapping_cost) + w.beta * (t.area / norm.area) +
         w.gamma * (t.power / norm.power) + w.delta * (t.eo_conversions / norm.eo_conversions);
}

Evaluator::Evaluator(const SearchConfig& config) : config_(config) {
  for (const auto& net : config.workloads) {
    std::vector<MatrixShape> shapes;
    for (const auto& [idx, shape] : weight_shapes(net)) shapes.push_back(shape);
    shapes_.push_back(std::move(shapes));
  }
  if (config.normalization != Normalization::reference) return;

  // Reference: the feasible near-square grid with the most MZIs.
  const SearchSpace space = search_space(config);
  std::optional<std::pair<std::size_t, GoaArch>> best;
  for (std::size_t k = space.k.lo; k <= space.k.hi; ++k) {
    const std::size_t per = mzis_per_module(k);
    const auto side = static_cast<std::size_t>(std::sqrt(static_cast<double>(config.mzi_budget / per)));
    for (std::size_t s = side + 1; s >= 1; --s) {
      const std::size_t m = std::clamp(s, space.m.lo, space.m.hi);
      if (!space.n.contains(s) || !feasible(m, s, k)) continue;
      const std::size_t mzis = m * s * per;
      if (!best || mzis > best->first) best = {mzis, GoaArch{m, s, k, config.wavelengths}};
      break;
    }
  }
  if (!best) return;
  reference_ = best->second;
  if (auto t = terms(reference_->m, reference_->n, reference_->k)) {
    auto pick = [](double v) { return v > 0.0 ? v : 1.0; };
    normalizer_ = {pick(t->mapping_cost), pick(t->area), pick(t->power), pick(t->eo_conversions)};
  }
  cache_.clear();
}

bool Evaluator::feasible(std::size_t m, std::size_t n, std::size_t k) const {
  if (m < 1 || n < 1 || k < 2 || m > config_.wavelengths) return false;
  if (m * n * mzis_per_module(k) > config_.mzi_budget) return false;
  for (const auto& shapes : shapes_) {
    for (const auto& s : shapes) {
      if (ceil_div(s.rows, k) > n) return false;
    }
  }
  return true;
}

std::optional<MetricTerms> Evaluator::terms(std::size_t m, std::size_t n, std::size_t k) {
  if (!feasible(m, n, k)) return std::nullopt;
  const GoaArch arch{m, n, k, config_.wavelengths};
  MetricTerms t;
  for (const auto& shapes : shapes_) {
    std::vector<ClusterShape> clusters;
    for (std::size_t i = 0; i < shapes.size(); ++i) clusters.push_back(cluster_shape(i, shapes[i], k));
    const MappingPlan plan = pack(clusters, arch);
    t.mapping_cost += static_cast<double>(mapping_cost(plan));
    t.eo_conversions += static_cast<double>(eo_conversions(plan));
  }
  const auto count = static_cast<double>(shapes_.size());
  t.mapping_cost /= count;
  t.eo_conversions /= count;
  const ComponentCounts counts = component_counts(arch);
  for (Component c : kComponents) {
    t.area += static_cast<double>(counts[c]) * config_.device[c].area_um2;
    t.power += static_cast<double>(counts[c]) * config_.device[c].static_power_mw;
  }
  return t;
}

Candidate Evaluator::evaluate(std::size_t m, std::size_t n, std::size_t k) {
  const auto key = std::tuple{m, n, k};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  Candidate c{m, n, k, std::numeric_limits<double>::infinity(), false};
  if (auto t = terms(m, n, k)) {
    c.feasible = true;
    c.fitness = metric(*t, config_.weights, normalizer_);
  }
  cache_.emplace(key, c);
  return c;
}

SearchResult ga_search(const SearchConfig& config) {
  config.validate();
  const SearchSpace space = search_space(config);
  Evaluator eval(config);
  std::mt19937_64 rng(config.seed);

  // Feasibility is cheap to check, so scan the space (or a seeded sample of
  // it) before spending GA generations.
  bool any = false;
  constexpr std::size_t kScanLimit = 2'000'000;
  if (space.size() <= kScanLimit) {
    for (std::size_t k = space.k.lo; k <= space.k.hi && !any; ++k) {
      for (std::size_t m = space.m.lo; m <= space.m.hi && !any; ++m) {
        for (std::size_t n = space.n.lo; n <= space.n.hi && !any; ++n) any = eval.feasible(m, n, k);
      }
    }
  } else {
    std::mt19937_64 scan_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t t = 0; t < kScanLimit && !any; ++t) {
      const std::size_t m = std::uniform_int_distribution<std::size_t>(space.m.lo, space.m.hi)(scan_rng);
      const std::size_t n = std::uniform_int_distribution<std::size_t>(space.n.lo, space.n.hi)(scan_rng);
      const std::size_t k = std::uniform_int_distribution<std::size_t>(space.k.lo, space.k.hi)(scan_rng);
      any = eval.feasible(m, n, k);
    }
  }
  if (!any) {
    throw Error(ErrorKind::infeasible,
                "search: no feasible architecture under the MZI budget " + std::to_string(config.mzi_budget) +
                    " and W = " + std::to_string(config.wavelengths));
  }

  const IntRange ranges[3] = {space.m, space.n, space.k};
  auto draw = [&](std::size_t gene) {
    return std::uniform_int_distribution<std::size_t>(ranges[gene].lo, ranges[gene].hi)(rng);
  };
  auto genes = [](const Candidate& c) { return std::array<std::size_t, 3>{c.m, c.n, c.k}; };
  auto make = [&](const std::array<std::size_t, 3>& g) { return eval.evaluate(g[0], g[1], g[2]); };
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Candidate> population;
  for (std::size_t i = 0; i < config.population; ++i) population.push_back(make({draw(0), draw(1), draw(2)}));
  auto better = [](const Candidate& a, const Candidate& b) { return a.fitness < b.fitness; };
  Candidate best = *std::min_element(population.begin(), population.end(), better);

  SearchResult result;
  result.history.push_back(best.fitness);
  auto tournament = [&]() -> const Candidate& {
    std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
    const Candidate& a = population[pick(rng)];
    const Candidate& b = population[pick(rng)];
    return better(b, a) ? b : a;
  };

  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    std::vector<Candidate> next{best};
    while (next.size() < config.population) {
      auto child = genes(tournament());
      const auto other = genes(tournament());
      if (unit(rng) < config.crossover_rate) {
        for (std::size_t g = 0; g < 3; ++g) {
          if (unit(rng) < 0.5) child[g] = other[g];
        }
      }
      for (std::size_t g = 0; g < 3; ++g) {
        if (unit(rng) >= config.mutation_rate) continue;
        if (unit(rng) < 0.5) {
          if (unit(rng) < 0.5) {
            if (child[g] > ranges[g].lo) --child[g];
          } else if (child[g] < ranges[g].hi) {
            ++child[g];
          }
        } else {
          child[g] = draw(g);
        }
      }
      // Duplicate elimination: redraw one gene of a child already present in
      // the next generation so the population keeps its spread.
      for (std::size_t attempt = 0; attempt < 8; ++attempt) {
        const bool duplicate = std::any_of(next.begin(), next.end(),
                                           [&](const Candidate& c) { return genes(c) == child; });
        if (!duplicate) break;
        const std::size_t g = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
        child[g] = draw(g);
      }
      next.push_back(make(child));
    }
    population = std::move(next);
    const Candidate& gen_best = *std::min_element(population.begin(), population.end(), better);
    if (better(gen_best, best)) best = gen_best;
    result.history.push_back(best.fitness);
  }
  result.best = best;
  result.evaluations = eval.evaluations();
  result.reference = eval.reference();
  return result;
}

}  // namespace goa
