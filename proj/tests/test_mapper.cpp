#include <doctest.h>

#include <algorithm>
#include <cstdint>

#include "goa/costmodel.hpp"
#include "goa/error.hpp"
#include "goa/io.hpp"
#include "goa/mapper.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace goa;

namespace {

ClusterShape rect(std::size_t layer, std::size_t width, std::size_t height) {
  return {layer, width, height, {}};
}

std::vector<ClusterShape> random_clusters(oracle::Rng& rng, std::size_t count, std::size_t max_w,
                                          std::size_t max_h) {
  std::uniform_int_distribution<std::size_t> w(1, max_w);
  std::uniform_int_distribution<std::size_t> h(1, max_h);
  std::vector<ClusterShape> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t width = w(rng);
    const std::size_t height = h(rng);
    out.push_back(rect(i, width, height));
  }
  return out;
}

}  // namespace

TEST_CASE("single unit cluster costs one pass") {
  const std::vector<ClusterShape> one{rect(0, 1, 1)};
  const MappingPlan plan = pack(one, GoaArch{3, 4, 4, 3});
  CHECK(mapping_cost(plan) == 1);
  CHECK(eo_conversions(plan) == 0);
  CHECK(plan_violations(plan).empty());
}

TEST_CASE("empty workload costs nothing") {
  const MappingPlan plan = pack(std::vector<ClusterShape>{}, GoaArch{2, 2, 4, 2});
  CHECK(mapping_cost(plan) == 0);
  CHECK(eo_conversions(plan) == 0);
  CHECK(utilization(plan) == 0.0);
}

TEST_CASE("2x2 grid: two small clusters share a pass, the large one is alone") {
  const std::vector<ClusterShape> c{rect(0, 2, 1), rect(1, 2, 1), rect(2, 2, 2)};
  const MappingPlan plan = pack(c, GoaArch{2, 2, 4, 2});
  CHECK(mapping_cost(plan) == 2);
  CHECK(oracle::min_passes({{2, 1}, {2, 1}, {2, 2}}, 2, 2) == 2);
  CHECK(plan.passes[0].size() == 1);
  CHECK(plan.passes[0][0].cluster == 2);
  CHECK(plan.passes[1].size() == 2);
}

TEST_CASE("N unit clusters need ceil(N / mn) passes") {
  for (std::size_t count : {1, 5, 6, 7, 12, 13, 40}) {
    std::vector<ClusterShape> c;
    for (std::size_t i = 0; i < count; ++i) c.push_back(rect(i, 1, 1));
    const MappingPlan plan = pack(c, GoaArch{2, 3, 4, 2});
    CHECK(mapping_cost(plan) == (count + 5) / 6);
  }
}

TEST_CASE("eo_conversions counts extra segments") {
  const GoaArch arch{2, 4, 4, 2};
  const std::vector<ClusterShape> three{rect(0, 1, 6)};
  CHECK(eo_conversions(pack(three, arch)) == 2);
  const std::vector<ClusterShape> two_by_two{rect(0, 1, 4), rect(1, 1, 3)};
  CHECK(eo_conversions(pack(two_by_two, arch)) == 2);
}

TEST_CASE("wide clusters are infeasible and name the layer") {
  const std::vector<ClusterShape> c{rect(7, 5, 1)};
  try {
    pack(c, GoaArch{2, 4, 4, 2});
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::infeasible);
    CHECK(std::string(e.what()).find("layer 7") != std::string::npos);
  }
}

TEST_CASE("five-matrix workload packs into two passes with four co-resident") {
  const Network net = load_network(fixture::data("networks/vgg16_fig4.json"));
  const GoaArch arch{20, 12, 63, 20};
  const auto shapes = fixture::shapes(net, arch.k);
  REQUIRE(shapes.size() == 5);
  CHECK(shapes.back().rows_mod == 5);
  CHECK(shapes.back().cols_mod == 37);
  const MappingPlan plan = pack(shapes, arch);
  CHECK(plan_violations(plan).empty());
  CHECK(mapping_cost(plan) == 2);
  CHECK(plan.passes[0].size() == 4);
  CHECK(plan.segments(4).size() >= 2);
  CHECK(eo_conversions(plan) == plan.segments(4).size() - 1);
}

TEST_CASE("segments partition the tall cluster's rows") {
  const std::vector<ClusterShape> c{rect(0, 2, 11), rect(1, 1, 2)};
  const MappingPlan plan = pack(c, GoaArch{4, 3, 4, 4});
  const auto segs = plan.segments(0);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].block_begin == 0);
  CHECK(segs[1].block_begin == 4);
  CHECK(segs[2].block_begin == 8);
  CHECK(segs[2].height == 3);
  CHECK(plan_violations(plan).empty());
}

TEST_CASE("a segment fills the slot left under another cluster's tail") {
  // Two 3 x 6 clusters on a 4 x 3 grid: area 36 fits 3 passes exactly.
  const std::vector<ClusterShape> c{rect(0, 3, 6), rect(1, 3, 6)};
  const MappingPlan plan = pack(c, GoaArch{4, 3, 4, 4});
  CHECK(plan_violations(plan).empty());
  CHECK(mapping_cost(plan) == 3);
  const auto segs = plan.segments(1);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].pass == 1);
  CHECK(segs[0].row == 2);
  CHECK(segs[0].height == 2);
  CHECK(segs[1].block_begin == 2);
  CHECK(segs[1].height == 4);
}

TEST_CASE("slots shorter than a quarter of the grid are not filled") {
  // m = 8: the 1-row slot under the first cluster is skipped by the second
  // cluster's leading segment; only its 1-row remainder may take it.
  const std::vector<ClusterShape> c{rect(0, 2, 15), rect(1, 2, 9)};
  const MappingPlan plan = pack(c, GoaArch{8, 2, 4, 8});
  CHECK(plan_violations(plan).empty());
  const auto segs = plan.segments(1);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].pass == 2);
  CHECK(segs[0].height == 8);
  CHECK(segs[1].height == 1);
}

TEST_CASE("plan_violations flags overlap, bounds and coverage") {
  const std::vector<ClusterShape> c{rect(0, 2, 2), rect(1, 1, 1)};
  MappingPlan plan = pack(c, GoaArch{2, 4, 4, 2});
  REQUIRE(plan_violations(plan).empty());

  MappingPlan overlap = plan;
  overlap.passes[0][1].col = 1;
  overlap.passes[0][1].row = 1;
  CHECK_FALSE(plan_violations(overlap).empty());

  MappingPlan oob = plan;
  oob.passes[0][1].col = 4;
  CHECK_FALSE(plan_violations(oob).empty());

  MappingPlan missing = plan;
  missing.passes[0].pop_back();
  CHECK_FALSE(plan_violations(missing).empty());
}

TEST_CASE("greedy never beats the exhaustive optimum on tiny instances") {
  oracle::Rng rng(30);
  std::uniform_int_distribution<std::size_t> count(1, 6);
  std::uniform_int_distribution<std::size_t> side(1, 3);
  std::size_t worse = 0;
  double worst_ratio = 1.0;
  for (int t = 0; t < 300; ++t) {
    const GoaArch arch{side(rng), side(rng), 4, 3};
    const auto clusters = random_clusters(rng, count(rng), arch.n, arch.m);
    std::vector<std::pair<std::size_t, std::size_t>> rects;
    for (const auto& c : clusters) rects.emplace_back(c.width(), c.height());
    const std::size_t greedy = mapping_cost(pack(clusters, arch));
    const std::size_t best = oracle::min_passes(rects, arch.m, arch.n);
    CHECK(greedy >= best);
    if (greedy > best) ++worse;
    worst_ratio = std::max(worst_ratio, static_cast<double>(greedy) / static_cast<double>(best));
  }
  MESSAGE("greedy above optimum on " << worse << " of 300 instances, worst ratio " << worst_ratio);
}

TEST_CASE("packer fuzz: legal plans on 1000 random workloads") {
  oracle::Rng rng(31);
  std::uniform_int_distribution<std::size_t> side(1, 12);
  std::uniform_int_distribution<std::size_t> count(0, 15);
  std::bernoulli_distribution coin(0.2);
  std::size_t bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const GoaArch arch{side(rng), side(rng), 4, 12};
    auto clusters = random_clusters(rng, count(rng), arch.n, 3 * arch.m);
    for (auto& c : clusters) {
      for (std::size_t i = 0; i < c.rows_mod && c.width() < arch.n; ++i) {
        if (coin(rng)) c.restored.insert(i);
      }
    }
    const MappingPlan plan = pack(clusters, arch);
    if (!plan_violations(plan).empty()) ++bad;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      std::size_t covered = 0;
      for (const auto& s : plan.segments(i)) covered += s.height;
      CHECK(covered == clusters[i].height());
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("mapping cost does not grow when the grid grows") {
  const Network net = load_network(fixture::data("networks/vgg16.json"));
  for (std::size_t k : {16, 32, 63}) {
    const auto shapes = fixture::shapes(net, k);
    std::size_t widest = 0;
    for (const auto& s : shapes) widest = std::max(widest, s.width());
    std::size_t prev_m = SIZE_MAX;
    for (std::size_t m = 1; m <= 24; ++m) {
      const std::size_t cost = mapping_cost(pack(shapes, GoaArch{m, widest + 2, k, 24}));
      CHECK(cost <= prev_m);
      prev_m = cost;
    }
    std::size_t prev_n = SIZE_MAX;
    for (std::size_t n = widest; n <= widest + 20; ++n) {
      const std::size_t cost = mapping_cost(pack(shapes, GoaArch{8, n, k, 24}));
      CHECK(cost <= prev_n);
      prev_n = cost;
    }
  }
}

TEST_CASE("interleaving waste: 4 ports on an 8-port array") {
  const InterleavingWaste w = interleaving_waste(4, 8);
  CHECK(w.used == 6);
  CHECK(w.affected == 18);
  CHECK(w.total == 28);
  const InterleavingWaste full = interleaving_waste(8, 8);
  CHECK(full.used == 28);
  CHECK(full.affected == 0);
  CHECK_THROWS_AS(interleaving_waste(9, 8), Error);
}

TEST_CASE("baseline arithmetic") {
  CHECK(array_ports_for_budget(28) == 8);
  CHECK(array_ports_for_budget(27) == 7);
  CHECK(array_ports_for_budget(0) == 1);
  CHECK(svd_form_mzis(4, 6) == 26);
  const std::vector<MatrixShape> one{{4, 4}};
  const BaselineCost c = interleaving_baseline_cost(one, 28);
  CHECK(c.mapping_cost == 1);
  CHECK(c.used_mzis == 16);
  CHECK(c.wasted_mzis == 12);
  const std::vector<MatrixShape> big{{100, 100}};
  CHECK_THROWS_AS(interleaving_baseline_cost(big, 28), Error);
  const BaselineCost tiled = interleaving_baseline_cost(big, 28, OversizePolicy::tile);
  CHECK(tiled.mapping_cost > 1);
  CHECK(tiled.used_mzis <= tiled.mapping_cost * tiled.capacity);
}

TEST_CASE("hybrid beats the baseline on the bundled VGG16") {
  const Network net = load_network(fixture::data("networks/vgg16.json"));
  const GoaArch arch{20, 12, 63, 20};
  const MappingPlan plan = pack(fixture::shapes(net, arch.k), arch);
  const std::size_t budget = component_counts(arch)[Component::mzi];
  const auto mats = fixture::matrices(net);
  const BaselineCost base = interleaving_baseline_cost(mats, budget, OversizePolicy::tile);
  CHECK(mapping_cost(plan) < base.mapping_cost);
}
