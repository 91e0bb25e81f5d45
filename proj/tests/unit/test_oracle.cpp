#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "replica_grid/delivery_sim.hpp"
#include "replica_grid/density_solver.hpp"
#include "replica_grid/error.hpp"
#include "replica_grid/oracle.hpp"
#include "replica_grid/placement.hpp"
#include "test_support.hpp"

namespace rg = replica_grid;

#ifndef REPLICA_GRID_FIXTURE_DIR
#error "REPLICA_GRID_FIXTURE_DIR must point at tests/fixtures"
#endif

TEST(OracleAn, SingleFileEverywhere) {
  const auto r = rg::brute_force_an(rg::GridSpec(1), 1, rg::Popularity::zipf(1, 1.0));
  EXPECT_EQ(r.best_avg_load, 0.0);
  for (const auto& b : r.best_placement.buffers) EXPECT_EQ(b, (std::vector<rg::FileId>{0}));
}

TEST(OracleAn, PopularFileGetsMoreReplicas) {
  const auto pop = rg::Popularity::from_probabilities({0.9, 0.1});
  const auto r = rg::brute_force_an(rg::GridSpec(1), 1, pop);
  EXPECT_GE(rg::replica_nodes(r.best_placement, 0).size(), 3u);
  EXPECT_TRUE(rg::validate_capacity(r.best_placement));
}

TEST(OracleAn, Refusals) {
  EXPECT_THROW(rg::brute_force_an(rg::GridSpec(3), 1, rg::Popularity::zipf(2, 1.0)), rg::SizeLimit);
  EXPECT_THROW(rg::brute_force_an(rg::GridSpec(1), 1, rg::Popularity::zipf(5, 1.0)), rg::SizeLimit);
  EXPECT_THROW(rg::brute_force_an(rg::GridSpec(2), 2, rg::Popularity::zipf(4, 1.0)), rg::SizeLimit);
  EXPECT_EQ(rg::brute_force_an_leaves(rg::GridSpec(2), 2, rg::Popularity::zipf(4, 1.0)), 0u);
}

TEST(OracleAn, ScoreMatchesSimulator) {
  // The oracle's score of its own best placement agrees with the engine.
  std::mt19937_64 rng(4);
  for (int i = 0; i < 6; ++i) {
    const auto pop = rg::testing::random_popularity(rng, 1 + i % 3);
    const auto r = rg::brute_force_an(rg::GridSpec(1), 1, pop);
    const auto loads = rg::link_loads(r.best_placement, pop);
    EXPECT_NEAR(rg::avg_link(loads), r.best_avg_load, 1e-12);
    EXPECT_GE(r.best_avg_load, rg::lower_bound(rg::measured_densities(r.best_placement), pop) - 1e-12);
  }
}

TEST(OracleAn, NotWorseThanCanonical) {
  for (std::size_t m = 1; m <= 3; ++m) {
    const auto pop = rg::Popularity::zipf(m, 0.8);
    const rg::GridSpec grid(2);
    const auto r = rg::brute_force_an(grid, 1, pop);
    const auto canon = rg::canonical_truncate(rg::solve_cd(16, 1.0, pop));
    const auto placed = rg::canonical_place(grid, canon, pop, 1);
    const double can = rg::avg_link(rg::link_loads(placed, pop));
    EXPECT_LE(r.best_avg_load, can + 1e-12);
    EXPECT_LE(can, 0.5 + 1.5 * std::sqrt(2.0) * r.best_avg_load);
  }
}

TEST(OracleAn, FrozenFixture) {
  std::ifstream in(std::string(REPLICA_GRID_FIXTURE_DIR) + "/oracle_an.json");
  ASSERT_TRUE(in.good());
  const auto doc = nlohmann::json::parse(in);
  ASSERT_FALSE(doc["records"].empty());
  for (const auto& rec : doc["records"]) {
    const auto& inst = rec["instance"];
    const auto pop = rg::Popularity::from_probabilities(inst["p"].get<std::vector<double>>());
    const auto r = rg::brute_force_an(rg::GridSpec(inst["nu"].get<int>()), inst["K"].get<int>(), pop);
    EXPECT_NEAR(r.best_avg_load, rec["best_avg_load"].get<double>(), 1e-12) << inst.dump();
  }
}

TEST(OracleCd, MatchesSolverExample) {
  const auto pop = rg::Popularity::from_probabilities({0.7, 0.2, 0.1});
  const auto g = rg::brute_force_cd(4, 1.0, pop, 1e-3);
  const double exact = rg::cd_cost(rg::solve_cd(4, 1.0, pop), pop);
  EXPECT_LE(exact, g.value + 1e-12);
  EXPECT_NEAR(g.value, exact, 1e-2);
  EXPECT_NEAR(g.densities[0], 0.5, 2e-3);
}

TEST(OracleCd, SingleFile) {
  const auto pop = rg::Popularity::zipf(1, 1.0);
  EXPECT_EQ(rg::brute_force_cd(16, 1.0, pop, 0.01).densities[0], 1.0);
  const auto half = rg::brute_force_cd(16, 0.5, pop, 0.01);
  EXPECT_NEAR(half.densities[0], 0.5, 1e-12);
}

TEST(OracleCd, SymmetricOptimum) {
  const auto pop = rg::Popularity::zipf(3, 0.0);
  const auto g = rg::brute_force_cd(16, 1.0, pop, 0.005);
  EXPECT_NEAR(g.densities[0], g.densities[1], 0.006);
  EXPECT_NEAR(g.densities[1], g.densities[2], 0.006);
}

TEST(OracleCd, Refusals) {
  EXPECT_THROW(rg::brute_force_cd(16, 1.0, rg::Popularity::zipf(5, 1.0), 0.01), rg::SizeLimit);
  EXPECT_THROW(rg::brute_force_cd(16, 1.0, rg::Popularity::zipf(3, 1.0), 1e-4), rg::InvalidInput);
  EXPECT_THROW(rg::brute_force_cd(4, 0.5, rg::Popularity::zipf(3, 1.0), 0.01), rg::Infeasible);
  EXPECT_THROW(rg::brute_force_cd(1 << 20, 2.0, rg::Popularity::zipf(4, 1.0), 1e-3), rg::SizeLimit);
}

TEST(OracleCluster, HopSumsAndBounds) {
  const std::int64_t want[] = {4, 32, 256};
  for (int level = 1; level <= 3; ++level) {
    const auto c = rg::enumerate_cluster(level);
    EXPECT_EQ(c.hop_sum, want[level - 1]);
    EXPECT_EQ(c.hop_sum, rg::cluster_hop_sum(level));
    EXPECT_TRUE(c.bounds_hold) << level;
    double total = 0.0;
    for (const auto& l : c.links) total += l.load;
    EXPECT_NEAR(total, static_cast<double>(c.hop_sum), 1e-12);
  }
  const auto one = rg::enumerate_cluster(1);
  double on = 0.0, off = 0.0;
  for (const auto& l : one.links) (l.on_axis ? on : off) = std::max(l.on_axis ? on : off, l.load);
  EXPECT_EQ(on, one.axis_bound);
  EXPECT_EQ(off, one.off_axis_bound);
  EXPECT_THROW(rg::enumerate_cluster(0), rg::InvalidInput);
  EXPECT_THROW(rg::enumerate_cluster(4), rg::InvalidInput);
}

TEST(OracleCluster, MatchesEngineOnTorus) {
  // A single file at level k on a 2^(k+1) grid: every cluster sees the same pattern.
  for (int level = 1; level <= 3; ++level) {
    const rg::GridSpec grid(level + 1);
    const auto canon = rg::canonical_from_levels({level}, level + 1);
    const auto pop = rg::Popularity::zipf(1, 1.0);
    const auto placed = rg::canonical_place(grid, canon, pop, 1);
    const auto loads = rg::file_link_loads(placed, pop, 0);
    double peak = 0.0, total = 0.0;
    for (double v : loads) {
      peak = std::max(peak, v);
      total += v;
    }
    const auto c = rg::enumerate_cluster(level);
    double cluster_peak = 0.0;
    for (const auto& l : c.links) cluster_peak = std::max(cluster_peak, l.load);
    EXPECT_NEAR(total, 4.0 * static_cast<double>(c.hop_sum), 1e-9);
    EXPECT_NEAR(peak, cluster_peak, 1e-12);
  }
}
