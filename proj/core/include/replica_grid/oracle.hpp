#pragma once

#include <cstdint>
#include <vector>

#include "replica_grid/placement.hpp"
#include "replica_grid/popularity.hpp"
#include "replica_grid/torus_grid.hpp"

namespace replica_grid {

// Exhaustive baselines for tiny instances. They share no distance or routing
// code with the engine so that they can be used to check it.

struct OracleResult {
  double best_avg_load = 0.0;
  CachePlacement best_placement;
  std::uint64_t instances_examined = 0;
};

// Minimum average link load over all per-node buffers, scored as
// (1/2N) sum_{n,m} h(n, m) p_m with h the hop count to the nearest replica.
// Only full buffers (min(K, M) files) are enumerated: adding a file to a
// buffer never lengthens a nearest-replica distance. Throws SizeLimit when
// N > 16, M > 4 or the search space is too large, Infeasible when KN < M.
OracleResult brute_force_an(const GridSpec& grid, int capacity, const Popularity& pop, int jobs = 1);

// Leaves brute_force_an would visit; 0 when the instance is refused.
std::uint64_t brute_force_an_leaves(const GridSpec& grid, int capacity, const Popularity& pop);

struct CdOracleResult {
  double value = 0.0;
  std::vector<double> densities;
  std::uint64_t points = 0;
};

// Grid search of (sqrt 2 / 6) sum (d^{-1/2} - 1) p over d in [1/N, 1]^M,
// sum d <= K. The first M - 1 coordinates step by `resolution` from 1/N (1 is
// always included), the last takes the largest value the capacity allows.
// Throws SizeLimit when M > 4 or the grid is too large, InvalidInput when
// resolution < 1e-3.
CdOracleResult brute_force_cd(std::int64_t n_nodes, double capacity, const Popularity& pop, double resolution);

struct ClusterLink {
  int x = 0;  // origin, relative to the server
  int y = 0;
  Axis axis = Axis::kRow;
  double load = 0.0;  // per unit request probability
  bool on_axis = false;  // on the server's row (row links) or column (column links)
};

struct ClusterEnumeration {
  std::int64_t hop_sum = 0;
  std::vector<ClusterLink> links;
  double axis_bound = 0.0;      // per unit probability
  double off_axis_bound = 0.0;
  bool bounds_hold = true;
};

// Walks every route of a 2^level x 2^level cluster on the open plane with
// the server at the origin. level in {1, 2, 3}.
ClusterEnumeration enumerate_cluster(int level);

}  // namespace replica_grid
