#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <stdexcept>

#include "test_util.hpp"
#include "urllc/net_model.hpp"
#include "urllc/serialize.hpp"

using namespace urllc;
using Catch::Approx;

namespace {

NetworkConfig indoor_network_83() {
  NetworkConfig c;
  c.region_w = c.region_h = 120.0;
  c.n_links = 83;
  c.cell_grid = {3, 3};
  c.n_channels = 7;
  return c;
}

bool links_equal(const std::vector<LinkSpec>& a, const std::vector<LinkSpec>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id || a[i].tx.x != b[i].tx.x || a[i].tx.y != b[i].tx.y ||
        a[i].rx.x != b[i].rx.x || a[i].rx.y != b[i].rx.y || a[i].demand != b[i].demand ||
        a[i].period != b[i].period || a[i].deadline != b[i].deadline ||
        a[i].arrival != b[i].arrival) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("83-link topology in a 120 m square") {
  const auto cfg = indoor_network_83();
  const auto links = generate_topology(cfg, 1);
  REQUIRE(links.size() == 83);
  const double max_dist = cfg.resolved_max_link_distance();
  for (const auto& l : links) {
    CHECK(l.tx.x >= 0.0);
    CHECK(l.tx.x <= 120.0);
    CHECK(l.tx.y >= 0.0);
    CHECK(l.tx.y <= 120.0);
    CHECK(l.rx.x >= 0.0);
    CHECK(l.rx.x <= 120.0);
    CHECK(l.rx.y >= 0.0);
    CHECK(l.rx.y <= 120.0);
    CHECK(l.length() >= cfg.min_separation);
    CHECK(l.length() <= max_dist + 1e-9);
    CHECK(l.deadline >= 1);
    CHECK(l.deadline <= l.period);
    CHECK(l.arrival >= 0);
    CHECK(l.arrival < l.period);
  }
}

TEST_CASE("topology generation is a pure function of config and seed") {
  const auto cfg = indoor_network_83();
  CHECK(links_equal(generate_topology(cfg, 1), generate_topology(cfg, 1)));
  CHECK_FALSE(links_equal(generate_topology(cfg, 1), generate_topology(cfg, 2)));

  // byte-identical serialized form
  const auto t1 = make_topology(cfg, 1);
  const auto t2 = make_topology(cfg, 1);
  CHECK(topology_to_json(t1).dump() == topology_to_json(t2).dump());
}

TEST_CASE("324-link topology on a 6x6 grid keeps cells consistent with positions") {
  NetworkConfig cfg;
  cfg.region_w = cfg.region_h = 240.0;
  cfg.n_links = 324;
  cfg.cell_grid = {6, 6};
  const auto links = generate_topology(cfg, 7);
  REQUIRE(links.size() == 324);
  for (const auto& l : links) {
    // independent recomputation of the cell from raw coordinates
    const int cx = std::min(5, static_cast<int>(l.tx.x / 40.0));
    const int cy = std::min(5, static_cast<int>(l.tx.y / 40.0));
    const int expected = cy * 6 + cx;
    CHECK(cell_index(l.tx, cfg) == expected);
    CHECK(cell_index(l.tx, cfg) >= 0);
    CHECK(cell_index(l.tx, cfg) < 36);
  }
}

TEST_CASE("generation rejects degenerate configs") {
  NetworkConfig cfg;
  cfg.n_links = 0;
  CHECK_THROWS_AS(generate_topology(cfg, 1), std::invalid_argument);

  NetworkConfig tiny;
  tiny.region_w = tiny.region_h = 1.0;
  tiny.n_links = 100;
  tiny.n_nodes = 110;
  CHECK_THROWS_AS(generate_topology(tiny, 1), std::invalid_argument);
}

TEST_CASE("nodes respect the minimum separation") {
  NetworkConfig cfg;
  cfg.n_links = 30;
  cfg.region_w = cfg.region_h = 60.0;
  const auto links = generate_topology(cfg, 3);
  for (const auto& l : links) CHECK(l.length() >= cfg.min_separation - 1e-12);
}

TEST_CASE("conflict edge appears for links one meter apart at zero margin") {
  std::vector<LinkSpec> links;
  links.push_back(testutil::make_link(0, {0.0, 0.0}, {1.0, 0.0}));
  links.push_back(testutil::make_link(1, {0.0, 1.0}, {1.0, 1.0}));
  NetworkConfig cfg;
  cfg.interference_margin_db = 0.0;
  const auto g = build_conflict_graph(links, cfg);
  CHECK(g.edge(0, 1));
}

TEST_CASE("single link yields an edgeless graph") {
  std::vector<LinkSpec> links{testutil::make_link(0, {0.0, 0.0}, {1.0, 0.0})};
  NetworkConfig cfg;
  const auto g = build_conflict_graph(links, cfg);
  CHECK(g.size() == 1);
  CHECK(g.n_edges() == 0);
}

TEST_CASE("edge criterion matches an independent scalar evaluation") {
  // links at opposite corners of a 240 m square
  std::vector<LinkSpec> links;
  links.push_back(testutil::make_link(0, {0.0, 0.0}, {1.0, 0.0}));
  links.push_back(testutil::make_link(1, {240.0, 240.0}, {239.0, 240.0}));
  NetworkConfig cfg;
  cfg.region_w = cfg.region_h = 240.0;

  for (double margin : {40.0, 60.0, 80.0}) {
    cfg.interference_margin_db = margin;
    const auto g = build_conflict_graph(links, cfg);

    // hand evaluation of both directions
    const double noise = 1.38e-23 * 290.0 * 2.0e7;
    const double threshold = noise * std::pow(10.0, margin / 10.0);
    const double d_10 = std::hypot(240.0 - 1.0, 240.0);      // tx1 -> rx0
    const double d_01 = std::hypot(239.0, 240.0);            // tx0 -> rx1
    const bool expect = 1.0 / std::pow(d_10, 3.0) >= threshold ||
                        1.0 / std::pow(d_01, 3.0) >= threshold;
    INFO("margin " << margin << " dB");
    CHECK(g.edge(0, 1) == expect);
  }
}

TEST_CASE("adjacency is symmetric with a zero diagonal") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    NetworkConfig cfg;
    Rng rng(derive_seed(seed, 0x515e));
    cfg.n_links = rng.uniform_int(1, 12);
    cfg.region_w = cfg.region_h = rng.uniform(20.0, 200.0);
    cfg.interference_margin_db = rng.uniform(0.0, 90.0);
    const auto links = generate_topology(cfg, seed);
    const auto g = build_conflict_graph(links, cfg);
    for (int i = 0; i < g.size(); ++i) {
      CHECK_FALSE(g.edge(i, i));
      for (int j = 0; j < g.size(); ++j) {
        if (g.edge(i, j) != g.edge(j, i)) {
          INFO("seed " << seed);
          REQUIRE(g.edge(i, j) == g.edge(j, i));
        }
      }
    }
  }
}

TEST_CASE("shrinking the margin never removes edges") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    NetworkConfig cfg;
    cfg.n_links = 10;
    cfg.region_w = cfg.region_h = 150.0;
    const auto links = generate_topology(cfg, seed);

    cfg.interference_margin_db = 75.0;
    const auto strict = build_conflict_graph(links, cfg);
    cfg.interference_margin_db = 55.0;
    const auto permissive = build_conflict_graph(links, cfg);

    for (int i = 0; i < strict.size(); ++i) {
      for (int j = 0; j < strict.size(); ++j) {
        if (strict.edge(i, j)) {
          INFO("seed " << seed << " edge " << i << "," << j);
          CHECK(permissive.edge(i, j));
        }
      }
    }
  }
}

TEST_CASE("channel qualities are per-topology and lie in range") {
  NetworkConfig cfg;
  cfg.n_links = 10;
  const auto g1 = channel_qualities(cfg, 5, 10);
  const auto g2 = channel_qualities(cfg, 5, 10);
  const auto g3 = channel_qualities(cfg, 6, 10);
  CHECK(g1.data() == g2.data());
  CHECK(g1.data() != g3.data());
  for (double v : g1.data()) {
    CHECK(v >= 0.5);
    CHECK(v <= 1.0);
  }
}
