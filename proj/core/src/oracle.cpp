#include "replica_grid/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "replica_grid/error.hpp"
#include "replica_grid/parallel.hpp"

namespace replica_grid {

namespace {

constexpr std::int64_t kMaxOracleNodes = 16;
constexpr std::size_t kMaxOracleFiles = 4;
constexpr std::uint64_t kMaxLeaves = 500'000'000;
constexpr std::uint64_t kMaxCdPoints = 50'000'000;

int ring_distance(int a, int b, int side) {
  const int d = std::abs(a - b);
  return std::min(d, side - d);
}

std::uint64_t saturating_pow(std::uint64_t base, std::int64_t exp) {
  std::uint64_t v = 1;
  for (std::int64_t i = 0; i < exp; ++i) {
    if (v > std::numeric_limits<std::uint64_t>::max() / std::max<std::uint64_t>(base, 1)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    v *= base;
  }
  return v;
}

std::vector<unsigned> full_buffers(std::size_t m_count, int capacity) {
  const int size = std::min<int>(capacity, static_cast<int>(m_count));
  std::vector<unsigned> out;
  for (unsigned s = 0; s < (1u << m_count); ++s) {
    if (std::popcount(s) == size) out.push_back(s);
  }
  return out;
}

struct Best {
  double score = std::numeric_limits<double>::infinity();
  std::vector<unsigned> buffers;
  std::uint64_t examined = 0;
};

}  // namespace

std::uint64_t brute_force_an_leaves(const GridSpec& grid, int capacity, const Popularity& pop) {
  if (grid.node_count() > kMaxOracleNodes || pop.size() > kMaxOracleFiles || capacity < 1) return 0;
  const auto choices = full_buffers(pop.size(), capacity).size();
  const auto leaves = saturating_pow(choices, grid.node_count());
  return leaves > kMaxLeaves ? 0 : leaves;
}

OracleResult brute_force_an(const GridSpec& grid, int capacity, const Popularity& pop, int jobs) {
  const std::int64_t n = grid.node_count();
  const std::size_t m_count = pop.size();
  if (grid.nu() < 1) throw InvalidInput("oracle needs a grid with links (nu >= 1)");
  if (capacity < 1) throw InvalidInput("oracle needs integer K >= 1");
  if (n > kMaxOracleNodes || m_count > kMaxOracleFiles) {
    throw SizeLimit("oracle limited to N <= 16 and M <= 4");
  }
  if (static_cast<std::int64_t>(capacity) * n < static_cast<std::int64_t>(m_count)) {
    throw Infeasible("infeasible: KN < M");
  }
  if (brute_force_an_leaves(grid, capacity, pop) == 0) throw SizeLimit("oracle search space too large");

  const int side = grid.side();
  const auto nodes = static_cast<std::size_t>(n);
  // Nearest-replica hop sum for every replica set.
  std::vector<std::int64_t> hop_sum(std::size_t{1} << nodes, 0);
  for (std::size_t mask = 1; mask < hop_sum.size(); ++mask) {
    std::int64_t total = 0;
    for (std::size_t c = 0; c < nodes; ++c) {
      int best = std::numeric_limits<int>::max();
      for (std::size_t s = 0; s < nodes; ++s) {
        if (!(mask >> s & 1u)) continue;
        const int d = ring_distance(static_cast<int>(c % side), static_cast<int>(s % side), side) +
                      ring_distance(static_cast<int>(c / side), static_cast<int>(s / side), side);
        best = std::min(best, d);
      }
      total += best;
    }
    hop_sum[mask] = total;
  }

  const auto choices = full_buffers(m_count, capacity);
  std::vector<Best> per_first(choices.size());
  parallel_for(choices.size(), jobs, [&](std::size_t first) {
    Best& best = per_first[first];
    std::vector<unsigned> pick(nodes, 0);
    std::vector<std::uint32_t> file_mask(m_count, 0);
    pick[0] = choices[first];
    for (std::size_t m = 0; m < m_count; ++m) {
      if (choices[first] >> m & 1u) file_mask[m] |= 1u;
    }
    // Iterative DFS over nodes 1..N-1.
    std::vector<std::size_t> at(nodes, 0);
    std::size_t depth = 1;
    if (nodes == 1) depth = 0;
    auto score_leaf = [&] {
      double score = 0.0;
      for (std::size_t m = 0; m < m_count; ++m) {
        if (file_mask[m] == 0) return;
        score += pop[m] * static_cast<double>(hop_sum[file_mask[m]]);
      }
      ++best.examined;
      if (score < best.score) {
        best.score = score;
        best.buffers = pick;
      }
    };
    if (depth == 0) {
      score_leaf();
      return;
    }
    at[1] = 0;
    for (;;) {
      if (at[depth] == choices.size()) {
        at[depth] = 0;
        --depth;
        if (depth == 0) break;
        // undo the choice at this depth, advance
        for (std::size_t m = 0; m < m_count; ++m) file_mask[m] &= ~(1u << depth);
        ++at[depth];
        continue;
      }
      pick[depth] = choices[at[depth]];
      for (std::size_t m = 0; m < m_count; ++m) {
        if (pick[depth] >> m & 1u) {
          file_mask[m] |= 1u << depth;
        } else {
          file_mask[m] &= ~(1u << depth);
        }
      }
      if (depth + 1 == nodes) {
        score_leaf();
        ++at[depth];
      } else {
        ++depth;
        at[depth] = 0;
      }
    }
  });

  OracleResult out;
  const Best* winner = nullptr;
  for (const Best& b : per_first) {
    out.instances_examined += b.examined;
    if (!b.buffers.empty() && (winner == nullptr || b.score < winner->score)) winner = &b;
  }
  if (winner == nullptr) throw InternalError("oracle found no covering placement");
  std::vector<std::vector<FileId>> buffers(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t m = 0; m < m_count; ++m) {
      if (winner->buffers[i] >> m & 1u) buffers[i].push_back(m);
    }
  }
  out.best_avg_load = winner->score / (2.0 * static_cast<double>(n));
  out.best_placement = CachePlacement{grid, capacity, m_count, std::move(buffers)};
  return out;
}

CdOracleResult brute_force_cd(std::int64_t n_nodes, double capacity, const Popularity& pop, double resolution) {
  const std::size_t m_count = pop.size();
  if (m_count > kMaxOracleFiles) throw SizeLimit("density oracle limited to M <= 4");
  if (!(resolution >= 1e-3)) throw InvalidInput("density oracle resolution must be >= 1e-3");
  if (n_nodes < 1) throw InvalidInput("N must be positive");
  const double floor_d = 1.0 / static_cast<double>(n_nodes);
  if (capacity < static_cast<double>(m_count) * floor_d) throw Infeasible("infeasible: KN < M");

  std::vector<double> values;
  for (double v = floor_d; v < 1.0; v += resolution) values.push_back(v);
  values.push_back(1.0);
  const std::size_t dims = m_count - 1;
  if (saturating_pow(values.size(), static_cast<std::int64_t>(dims)) > kMaxCdPoints) {
    throw SizeLimit("density oracle grid too large");
  }

  CdOracleResult out;
  out.value = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(dims, 0);
  std::vector<double> d(m_count);
  const double scale = std::sqrt(2.0) / 6.0;
  for (;;) {
    double used = 0.0;
    for (std::size_t i = 0; i < dims; ++i) {
      d[i] = values[idx[i]];
      used += d[i];
    }
    const double last = std::clamp(capacity - used, floor_d, 1.0);
    if (used + last <= capacity * (1.0 + 1e-12)) {
      d[dims] = last;
      double cost = 0.0;
      for (std::size_t m = 0; m < m_count; ++m) cost += (1.0 / std::sqrt(d[m]) - 1.0) * pop[m];
      cost *= scale;
      ++out.points;
      if (cost < out.value) {
        out.value = cost;
        out.densities = d;
      }
    }
    std::size_t k = 0;
    while (k < dims && ++idx[k] == values.size()) idx[k++] = 0;
    if (k == dims) break;
  }
  if (out.densities.empty()) throw InternalError("density oracle found no feasible point");
  return out;
}

ClusterEnumeration enumerate_cluster(int level) {
  if (level < 1 || level > 3) throw InvalidInput("cluster enumeration supports levels 1 to 3");
  const int p = 1 << level;
  const int lo = -(p / 2 - 1);
  const int hi = p / 2;
  // Half-request counts keyed by (x, y, axis).
  std::map<std::tuple<int, int, int>, std::int64_t> halves;
  ClusterEnumeration out;
  auto horizontal = [&](int y, int x_from, int x_to, std::int64_t w) {
    for (int x = std::min(x_from, x_to); x < std::max(x_from, x_to); ++x) halves[{x, y, 0}] += w;
  };
  auto vertical = [&](int x, int y_from, int y_to, std::int64_t w) {
    for (int y = std::min(y_from, y_to); y < std::max(y_from, y_to); ++y) halves[{x, y, 1}] += w;
  };
  for (int v = lo; v <= hi; ++v) {
    for (int u = lo; u <= hi; ++u) {
      out.hop_sum += std::abs(u) + std::abs(v);
      if (u == 0 || v == 0) {
        horizontal(v, u, 0, 2);
        vertical(u, v, 0, 2);
      } else {
        horizontal(v, u, 0, 1);  // along the client row, then up/down the server column
        vertical(0, v, 0, 1);
        vertical(u, v, 0, 1);  // along the client column, then the server row
        horizontal(0, u, 0, 1);
      }
    }
  }
  const double half_side = std::ldexp(1.0, level - 1);
  out.axis_bound = half_side * (half_side + 0.5);
  out.off_axis_bound = std::ldexp(1.0, level - 2);
  for (const auto& [key, count] : halves) {
    const auto [x, y, axis] = key;
    ClusterLink link;
    link.x = x;
    link.y = y;
    link.axis = axis == 0 ? Axis::kRow : Axis::kColumn;
    link.load = 0.5 * static_cast<double>(count);
    link.on_axis = axis == 0 ? y == 0 : x == 0;
    const double bound = link.on_axis ? out.axis_bound : out.off_axis_bound;
    if (link.load > bound) out.bounds_hold = false;
    out.links.push_back(link);
  }
  return out;
}

}  // namespace replica_grid
