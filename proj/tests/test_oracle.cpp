#include <catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "test_util.hpp"
#include "urllc/oracle.hpp"
#include "urllc/scheduler.hpp"

using namespace urllc;
using Catch::Approx;

TEST_CASE("central differences recover simple derivatives") {
  const auto square = [](const std::vector<double>& w) { return w[0] * w[0]; };
  CHECK(finite_difference_grad(square, {3.0})[0] == Approx(6.0).margin(1e-6));

  const auto constant = [](const std::vector<double>&) { return 4.2; };
  CHECK(finite_difference_grad(constant, {1.0, 2.0})[0] == Approx(0.0).margin(1e-9));

  const auto linear = [](const std::vector<double>& w) { return 5.0 * w[0]; };
  CHECK(finite_difference_grad(linear, {7.0})[0] == Approx(5.0).margin(1e-9));

  CHECK_THROWS_AS(finite_difference_grad(square, {1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("brute-force MWIS on hand-checked graphs") {
  SECTION("triangle keeps only the heaviest vertex") {
    ConflictGraph g(3);
    g.add_edge(0, 1);
    g.add_edge(0, 2);
    g.add_edge(1, 2);
    const auto r = brute_force_mwis(g, {3.0, 2.0, 1.0});
    CHECK(r.best_set == std::vector<int>{0});
    CHECK(r.best_value == Approx(3.0));
    CHECK(r.enumerated == 8);
  }
  SECTION("path chooses the heavy middle over both ends") {
    ConflictGraph g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    const auto r = brute_force_mwis(g, {1.0, 5.0, 1.0});
    CHECK(r.best_set == std::vector<int>{1});
    CHECK(r.best_value == Approx(5.0));
  }
  SECTION("edgeless graph takes everything") {
    ConflictGraph g(4);
    const auto r = brute_force_mwis(g, {1.0, 2.0, 3.0, 4.0});
    CHECK(r.best_set == std::vector<int>{0, 1, 2, 3});
    CHECK(r.best_value == Approx(10.0));
  }
  SECTION("ties resolve to the lexicographically smallest set") {
    ConflictGraph g(2);
    g.add_edge(0, 1);
    const auto r = brute_force_mwis(g, {1.0, 1.0});
    CHECK(r.best_set == std::vector<int>{0});
  }
  SECTION("the enumeration guard rejects large instances") {
    ConflictGraph g(25);
    CHECK_THROWS_AS(brute_force_mwis(g, std::vector<double>(25, 1.0)), std::invalid_argument);
  }
}

TEST_CASE("MWIS value is invariant under node relabeling") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const int n = 4 + static_cast<int>(seed % 7);
    const auto g = testutil::random_graph(n, 0.4, seed);
    Rng rng(derive_seed(seed, 0x9123));
    std::vector<double> w(n);
    for (auto& v : w) v = rng.uniform(0.1, 5.0);

    const auto perm = testutil::random_permutation(n, rng);
    const auto pg = testutil::permute_graph(g, perm);
    std::vector<double> pw(n);
    for (int i = 0; i < n; ++i) pw[perm[i]] = w[i];

    CHECK(brute_force_mwis(g, w).best_value ==
          Approx(brute_force_mwis(pg, pw).best_value).margin(1e-12));
  }
}

TEST_CASE("exhaustive slot search on desk-scale fixtures") {
  PhyConstants consts;

  SECTION("a single link always transmits") {
    std::vector<LinkSpec> links{testutil::make_link(0, {0, 0}, {1, 0})};
    ConflictGraph g(1);
    const auto best = exhaustive_best_slot(links, g, 1, {1.0}, 1.0, 3.0, 1.0, consts);
    CHECK(best.assignment.is_active(0, 0));
    CHECK(best.value > 0.0);
  }
  SECTION("two conflicting links: the geometrically stronger one alone") {
    std::vector<LinkSpec> links;
    links.push_back(testutil::make_link(0, {0, 0}, {1, 0}));      // 1 m
    links.push_back(testutil::make_link(1, {10, 0}, {12, 0}));    // 2 m
    ConflictGraph g(2);
    g.add_edge(0, 1);
    const auto best = exhaustive_best_slot(links, g, 1, {1.0, 1.0}, 1.0, 3.0, 1.0, consts);
    CHECK(best.assignment.is_active(0, 0));
    CHECK(best.assignment.rbs_assigned(1) == 0);

    // singleton objective comparison by hand
    const double q0 = std::log2(1.0 + received_power(1.0, 3.0, 1.0) / noise_power(consts));
    CHECK(best.value == Approx(q0).epsilon(1e-12));
  }
  SECTION("two compatible links with two RBs end up on separate RBs") {
    std::vector<LinkSpec> links;
    links.push_back(testutil::make_link(0, {0, 0}, {1, 0}));
    links.push_back(testutil::make_link(1, {50, 0}, {51, 0}));
    ConflictGraph g(2);  // compatible per the conflict model
    const auto best = exhaustive_best_slot(links, g, 2, {1.0, 1.0}, 1.0, 3.0, 1.0, consts);
    REQUIRE(best.assignment.rbs_assigned(0) == 1);
    REQUIRE(best.assignment.rbs_assigned(1) == 1);
    CHECK(best.assignment.link_rbs[0][0] != best.assignment.link_rbs[1][0]);
  }
  SECTION("the search-space guard rejects oversized instances") {
    std::vector<LinkSpec> links;
    for (int i = 0; i < 11; ++i) {
      links.push_back(testutil::make_link(i, {i * 5.0, 0.0}, {i * 5.0 + 1.0, 0.0}));
    }
    ConflictGraph g(11);
    CHECK_THROWS_AS(
        exhaustive_best_slot(links, g, 1, std::vector<double>(11, 1.0), 1.0, 3.0, 1.0, consts),
        std::invalid_argument);
  }
}

TEST_CASE("exhaustive optimum dominates the greedy allocator") {
  PhyConstants consts;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = testutil::random_instance(seed, 6, 40.0, 25.0);
    std::vector<double> demands(6, 1.0);
    const auto best = exhaustive_best_slot(inst.links, inst.graph, 2, demands, 1.0, 3.0, 1.0,
                                           consts);

    std::vector<double> weights(6);
    for (int i = 0; i < 6; ++i) {
      weights[i] =
          std::log2(1.0 + received_power(inst.links[i].length(), 3.0, 1.0) / noise_power(consts));
    }
    const auto asg = greedy_rb_allocation(weights, demands, inst.graph, 2, 1.0);
    const double greedy_value = detail::slot_objective(asg, inst.links, demands, 1.0, 3.0, 1.0,
                                                       noise_power(consts));
    INFO("seed " << seed);
    CHECK(greedy_value <= best.value + 1e-9);
  }
}
