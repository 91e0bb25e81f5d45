#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "replica_grid/density_solver.hpp"
#include "replica_grid/error.hpp"
#include "replica_grid/oracle.hpp"
#include "test_support.hpp"

namespace rg = replica_grid;

namespace {

const double kScale = std::sqrt(2.0) / 6.0;

void expect_profile_invariants(const rg::DensityProfile& d, const rg::Popularity& pop) {
  const std::size_t m_count = pop.size();
  const double floor_d = 1.0 / static_cast<double>(d.n_nodes);
  ASSERT_EQ(d.densities.size(), m_count);
  ASSERT_GE(d.l_index, 1u);
  ASSERT_LE(d.l_index, d.r_index);
  ASSERT_LE(d.r_index, m_count + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < m_count; ++i) {
    const std::size_t m = i + 1;
    const double v = d.densities[i];
    sum += v;
    if (m < d.l_index) {
      ASSERT_EQ(v, 1.0);
    } else if (m >= d.r_index) {
      ASSERT_EQ(v, floor_d);
    } else {
      ASSERT_GT(v, floor_d);
      ASSERT_LT(v, 1.0);
    }
    if (i > 0) {
      ASSERT_LE(v, d.densities[i - 1] * (1 + 1e-12));
    }
  }
  if (d.capacity < static_cast<double>(m_count)) {
    ASSERT_NEAR(sum, d.capacity, 1e-9);
  }
  ASSERT_LE(sum, d.capacity + 1e-9);
}

}  // namespace

TEST(DensitySolver, TwoEqualFiles) {
  const auto pop = rg::Popularity::from_probabilities({0.5, 0.5});
  const auto d = rg::solve_cd(16, 1.0, pop);
  EXPECT_NEAR(d.densities[0], 0.5, 1e-12);
  EXPECT_NEAR(d.densities[1], 0.5, 1e-12);
  EXPECT_EQ(d.l_index, 1u);
  EXPECT_EQ(d.r_index, 3u);
}

TEST(DensitySolver, DownTruncatedTail) {
  const auto pop = rg::Popularity::from_probabilities({0.7, 0.2, 0.1});
  const auto d = rg::solve_cd(4, 1.0, pop);
  EXPECT_NEAR(d.densities[0], 0.5, 1e-12);
  EXPECT_NEAR(d.densities[1], 0.25, 1e-15);
  EXPECT_NEAR(d.densities[2], 0.25, 1e-15);
  EXPECT_EQ(d.l_index, 1u);
  EXPECT_EQ(d.r_index, 2u);
  // Interior marginal 0.99 exceeds those of the truncated files (0.8, 0.4).
  EXPECT_NEAR(0.35 * std::pow(0.5, -1.5), 0.9899494936611666, 1e-12);
}

TEST(DensitySolver, SlackCapacity) {
  const auto pop = rg::Popularity::zipf(3, 0.9);
  const auto d = rg::solve_cd(4, 3.0, pop);
  for (double v : d.densities) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(d.l_index, 4u);
  EXPECT_EQ(d.r_index, 4u);
  EXPECT_EQ(rg::cd_cost(d, pop), 0.0);
}

TEST(DensitySolver, Errors) {
  const auto pop = rg::Popularity::zipf(5, 1.0);
  EXPECT_THROW(rg::solve_cd(4, 1.0, pop), rg::Infeasible);
  EXPECT_THROW(rg::solve_cd(0, 1.0, pop), rg::InvalidInput);
  EXPECT_THROW(rg::solve_cd(16, 0.0, pop), rg::InvalidInput);
  EXPECT_THROW(rg::solve_cd(16, -1.0, pop), rg::InvalidInput);
}

TEST(DensitySolver, CostExamples) {
  const auto half = rg::Popularity::from_probabilities({0.5, 0.5});
  const std::vector<double> ones{1.0, 1.0};
  EXPECT_EQ(rg::cd_cost(ones, half), 0.0);
  const std::vector<double> d{0.5, 0.5};
  EXPECT_NEAR(rg::cd_cost(d, half), kScale * (std::sqrt(2.0) - 1.0), 1e-15);
  EXPECT_NEAR(rg::cd_cost(d, half), 0.09763, 1e-5);
  const auto single = rg::Popularity::zipf(1, 1.0);
  const std::vector<double> once{0.01};
  EXPECT_NEAR(rg::cd_cost(once, single), kScale * 9.0, 1e-14);
  EXPECT_NEAR(rg::cd_cost(once, single), 2.1213, 1e-4);
}

TEST(DensitySolver, LowerBoundExamples) {
  const auto half = rg::Popularity::from_probabilities({0.5, 0.5});
  const std::vector<double> ones{1.0, 1.0};
  EXPECT_EQ(rg::lower_bound(ones, half), 0.0);
  const std::vector<double> q{0.25, 0.25};
  EXPECT_NEAR(rg::lower_bound(q, half), kScale, 1e-15);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto pop = rg::testing::random_popularity(rng, 6);
    const auto prof = rg::solve_cd(64, 2.0, pop);
    EXPECT_EQ(rg::lower_bound(prof.densities, pop), rg::cd_cost(prof, pop));
  }
}

TEST(DensitySolver, CanonicalTruncateExamples) {
  const std::vector<double> a{0.3};
  const auto ca = rg::canonical_truncate(a, 16);
  EXPECT_EQ(ca.densities[0], 0.25);
  EXPECT_EQ(ca.levels[0], 1);

  const std::vector<double> b{0.25};
  EXPECT_EQ(rg::canonical_truncate(b, 16).densities[0], 0.25);

  const std::vector<double> c{0.5, 0.25, 0.25};
  const auto cc = rg::canonical_truncate(c, 4);
  EXPECT_EQ(cc.densities, (std::vector<double>{0.25, 0.25, 0.25}));
  EXPECT_EQ(cc.level_sets.size(), 2u);
  EXPECT_TRUE(cc.level_sets[0].empty());
  EXPECT_EQ(cc.level_sets[1], (std::vector<rg::FileId>{0, 1, 2}));

  EXPECT_THROW(rg::canonical_truncate(c, 8), rg::InvalidInput);
}

TEST(DensitySolver, ACoeffExamples) {
  const auto single = rg::Popularity::zipf(1, 1.0);
  EXPECT_DOUBLE_EQ(rg::a_coeff(0, 0, 1.0, 4, single), 1.0);
  const auto half = rg::Popularity::from_probabilities({0.5, 0.5});
  EXPECT_NEAR(rg::a_coeff(0, 0, 2.0, 4, half), std::pow(0.5, 2.0 / 3.0), 1e-15);
  EXPECT_NEAR(rg::a_coeff(0, 0, 2.0, 4, half), 0.6300, 1e-4);
  // K - i - j/N = 0.
  EXPECT_EQ(rg::a_coeff(2, 0, 2.0, 4, half), 1.0);
  EXPECT_EQ(rg::a_coeff(1, 4, 2.0, 4, half), 1.0);
  EXPECT_THROW(rg::a_coeff(3, 0, 2.0, 4, half), rg::InvalidInput);
}

TEST(DensitySolver, JsonRoundTrip) {
  const auto pop = rg::Popularity::zipf(20, 1.1);
  const auto d = rg::solve_cd(256, 3.0, pop);
  const auto back = rg::density_profile_from_json(rg::to_json(d));
  EXPECT_EQ(back.l_index, d.l_index);
  EXPECT_EQ(back.r_index, d.r_index);
  EXPECT_EQ(back.n_nodes, d.n_nodes);
  EXPECT_EQ(back.capacity, d.capacity);
  ASSERT_EQ(back.densities.size(), d.densities.size());
  // JSON keeps 12 significant digits.
  for (std::size_t i = 0; i < d.densities.size(); ++i) {
    EXPECT_NEAR(back.densities[i], d.densities[i], 1e-11 * d.densities[i]);
  }
  EXPECT_THROW(rg::density_profile_from_json("{not json"), rg::InvalidInput);
}

TEST(DensitySolver, RandomInstancesSatisfyInvariantsAndKkt) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> nu_d(0, 6);
  std::uniform_int_distribution<std::size_t> m_d(1, 300);
  std::uniform_real_distribution<double> tau_d(0.0, 3.0);
  std::bernoulli_distribution zipf(0.5);
  for (int i = 0; i < 400; ++i) {
    const std::int64_t n = std::int64_t{1} << (2 * nu_d(rng));
    const std::size_t m = m_d(rng);
    const double min_k = static_cast<double>(m) / static_cast<double>(n);
    std::uniform_real_distribution<double> k_d(std::max(0.05, min_k), std::max(min_k, 1.0) * 3.0);
    const double k = std::max(k_d(rng), min_k);
    const auto pop = zipf(rng) ? rg::Popularity::zipf(m, tau_d(rng)) : rg::testing::random_popularity(rng, m);
    const auto d = rg::solve_cd(n, k, pop);
    expect_profile_invariants(d, pop);
    const auto kkt = rg::kkt_check(d, pop);
    ASSERT_LE(kkt.worst(), 1e-7) << "N=" << n << " K=" << k << " M=" << m;

    rg::SolveOptions desc;
    desc.descending_scan = true;
    const auto e = rg::solve_cd(n, k, pop, desc);
    ASSERT_EQ(e.l_index, d.l_index);
    ASSERT_EQ(e.r_index, d.r_index);
    for (std::size_t j = 0; j < m; ++j) ASSERT_NEAR(e.densities[j], d.densities[j], 1e-10);
  }
}

TEST(DensitySolver, ExactKnownSolution) {
  // Interior closed form with no truncation: d proportional to p^{2/3}.
  const auto pop = rg::Popularity::from_probabilities({0.4, 0.3, 0.2, 0.1});
  const auto d = rg::solve_cd(1 << 20, 1.0, pop);
  double s = 0.0;
  for (std::size_t m = 0; m < 4; ++m) s += std::pow(pop[m], 2.0 / 3.0);
  for (std::size_t m = 0; m < 4; ++m) EXPECT_NEAR(d.densities[m], std::pow(pop[m], 2.0 / 3.0) / s, 1e-12);
  EXPECT_EQ(d.l_index, 1u);
  EXPECT_EQ(d.r_index, 5u);
  EXPECT_NEAR(d.mu, 0.5 * std::pow(s, 1.5), 1e-12);
}

TEST(DensitySolver, CanonicalSandwich) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> nu_d(1, 6);
  std::uniform_int_distribution<std::size_t> m_d(1, 200);
  std::uniform_real_distribution<double> tau_d(0.0, 2.5);
  for (int i = 0; i < 500; ++i) {
    const std::int64_t n = std::int64_t{1} << (2 * nu_d(rng));
    const std::size_t m = m_d(rng);
    const int k_min = std::max<int>(1, static_cast<int>((static_cast<std::int64_t>(m) + n - 1) / n));
    const int k = std::uniform_int_distribution<int>(k_min, k_min + 5)(rng);
    const auto pop = rg::Popularity::zipf(m, tau_d(rng));
    const auto d = rg::solve_cd(n, k, pop);
    const auto c = rg::canonical_truncate(d);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      ASSERT_LE(c.densities[j], d.densities[j]);
      ASSERT_LT(d.densities[j], 4.0 * c.densities[j]);
      ASSERT_EQ(c.densities[j], std::ldexp(1.0, -2 * c.levels[j]));
      sum += c.densities[j];
    }
    ASSERT_LE(sum, k + 1e-12);
    std::size_t covered = 0;
    for (const auto& set : c.level_sets) covered += set.size();
    ASSERT_EQ(covered, m);
    const double opt = rg::cd_cost(d, pop);
    const double can = rg::cd_cost(c.densities, pop);
    ASSERT_LE(opt, can + 1e-12);
    ASSERT_LT(can, 2.0 * opt + kScale + 1e-12);
  }
}

TEST(DensitySolver, ComparativeStatics) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 60; ++i) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(2, 400)(rng);
    const auto pop = rg::Popularity::zipf(m, std::uniform_real_distribution<double>(0.0, 2.5)(rng));
    const std::int64_t n = 1024;
    double prev = std::numeric_limits<double>::infinity();
    for (double k = 0.5; k <= 8.0; k += 0.25) {
      if (k * n < static_cast<double>(m)) continue;
      const double c = rg::cd_cost(rg::solve_cd(n, k, pop), pop);
      ASSERT_LE(c, prev * (1 + 1e-12) + 1e-15);
      prev = c;
    }
    prev = std::numeric_limits<double>::infinity();
    for (std::int64_t nn = 256; nn <= (1 << 20); nn *= 4) {
      const double c = rg::cd_cost(rg::solve_cd(nn, 2.0, pop), pop);
      ASSERT_LE(c, prev * (1 + 1e-12) + 1e-15);
      prev = c;
    }
  }
}

TEST(DensitySolver, NotAboveGridOracle) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 12; ++i) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    const std::int64_t n = i % 2 == 0 ? 4 : 16;
    const double k = std::uniform_real_distribution<double>(static_cast<double>(m) / n, 2.0)(rng);
    const auto pop = rg::testing::random_popularity(rng, m);
    const double exact = rg::cd_cost(rg::solve_cd(n, k, pop), pop);
    const auto grid = rg::brute_force_cd(n, k, pop, 1e-3);
    ASSERT_LE(exact, grid.value + 1e-12);
  }
}

TEST(DensitySolver, CanonicalFromLevels) {
  const auto c = rg::canonical_from_levels({0, 1, 1, 3}, 3);
  EXPECT_EQ(c.densities, (std::vector<double>{1.0, 0.25, 0.25, 1.0 / 64}));
  ASSERT_EQ(c.level_sets.size(), 4u);
  EXPECT_EQ(c.level_sets[1], (std::vector<rg::FileId>{1, 2}));
  EXPECT_THROW(rg::canonical_from_levels({4}, 3), rg::InvalidInput);
  EXPECT_THROW(rg::canonical_from_levels({-1}, 3), rg::InvalidInput);
}
