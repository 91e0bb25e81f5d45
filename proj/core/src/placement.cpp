#include "replica_grid/placement.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "replica_grid/error.hpp"

namespace replica_grid {

namespace {

Node cell_of_rank(int side, int rank0) {
  const int diag = rank0 / side;
  const int x = rank0 % side;
  return {x, (x + diag) % side};
}

}  // namespace

CachePlacement make_placement(const GridSpec& grid, int capacity, std::size_t file_count,
                              std::vector<std::vector<FileId>> buffers) {
  if (buffers.size() != static_cast<std::size_t>(grid.node_count())) {
    throw InvalidInput("placement needs one buffer per node");
  }
  for (auto& b : buffers) {
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    if (!b.empty() && b.back() >= file_count) throw InvalidInput("buffer references unknown file");
  }
  return CachePlacement{grid, capacity, file_count, std::move(buffers)};
}

int diagonal_rank(int k, Node cell) {
  const int side = 1 << k;
  const int diag = ((cell.y - cell.x) % side + side) % side;
  return diag * side + cell.x + 1;
}

std::vector<Node> diagonal_order(int k) {
  if (k < 1 || k > 15) throw InvalidInput("diagonal_order needs 1 <= k <= 15");
  const int side = 1 << k;
  std::vector<Node> order;
  order.reserve(static_cast<std::size_t>(side) * side);
  for (int r = 0; r < side * side; ++r) order.push_back(cell_of_rank(side, r));
  return order;
}

CachePlacement canonical_place(const GridSpec& grid, const CanonicalProfile& canon,
                               const Popularity& pop, int capacity) {
  if (capacity < 1) throw InvalidInput("placement needs integer K >= 1");
  if (canon.nu != grid.nu()) throw InvalidInput("canonical profile and grid disagree on nu");
  if (canon.levels.size() != pop.size()) throw InvalidInput("canonical profile and popularity sizes differ");
  // Densities are exact powers of 1/4, so this sum is exact for any sane M.
  double mass = 0.0;
  for (double d : canon.densities) mass += d;
  if (mass > static_cast<double>(capacity) * (1.0 + 1e-12)) {
    throw InvalidInput("canonical densities exceed the cache capacity");
  }

  const int side = grid.side();
  std::vector<std::vector<FileId>> buffers(static_cast<std::size_t>(grid.node_count()));

  for (int k = 1; k <= canon.nu; ++k) {
    const auto& level = canon.level_sets[static_cast<std::size_t>(k)];
    if (level.empty()) continue;
    std::vector<FileId> files(level.begin(), level.end());
    std::stable_sort(files.begin(), files.end(), [&](FileId a, FileId b) {
      return pop[a] > pop[b] || (pop[a] == pop[b] && a < b);
    });

    const int block = 1 << k;
    const int cells = block * block;
    std::size_t low = buffers[0].size();
    std::size_t high = low;
    for (int y = 0; y < block; ++y) {
      for (int x = 0; x < block; ++x) {
        const std::size_t occ = buffers[grid.index({x, y})].size();
        low = std::min(low, occ);
        high = std::max(high, occ);
      }
    }
    if (high - low > 1) throw InternalError("placement lost occupancy balance before a level");

    // First the least-filled cells in scan order, then full sweeps.
    int rank = 0;
    bool first_pass = true;
    for (FileId m : files) {
      Node base;
      for (;;) {
        if (rank == cells) {
          rank = 0;
          first_pass = false;
        }
        const Node c = cell_of_rank(block, rank++);
        if (!first_pass || buffers[grid.index(c)].size() == low) {
          base = c;
          break;
        }
      }
      for (int y = base.y; y < side; y += block) {
        for (int x = base.x; x < side; x += block) {
          auto& b = buffers[grid.index({x, y})];
          b.push_back(m);
          if (b.size() > static_cast<std::size_t>(capacity)) {
            throw InternalError("canonical placement exceeded the cache capacity");
          }
        }
      }
    }
  }

  for (FileId m : canon.level_sets[0]) {
    for (auto& b : buffers) {
      b.push_back(m);
      if (b.size() > static_cast<std::size_t>(capacity)) {
        throw InternalError("canonical placement exceeded the cache capacity");
      }
    }
  }
  for (auto& b : buffers) std::sort(b.begin(), b.end());
  return CachePlacement{grid, capacity, pop.size(), std::move(buffers)};
}

bool validate_capacity(const CachePlacement& placement) {
  std::vector<char> seen(placement.file_count, 0);
  for (const auto& b : placement.buffers) {
    if (b.size() > static_cast<std::size_t>(placement.capacity)) return false;
    for (FileId m : b) {
      if (m < seen.size()) seen[m] = 1;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
}

std::vector<double> measured_densities(const CachePlacement& placement) {
  std::vector<std::int64_t> count(placement.file_count, 0);
  for (const auto& b : placement.buffers) {
    for (FileId m : b) ++count[m];
  }
  std::vector<double> d(placement.file_count);
  const double n = static_cast<double>(placement.grid.node_count());
  for (std::size_t m = 0; m < d.size(); ++m) d[m] = static_cast<double>(count[m]) / n;
  return d;
}

std::vector<Node> replica_nodes(const CachePlacement& placement, FileId m) {
  std::vector<Node> out;
  for (NodeId id = 0; id < placement.buffers.size(); ++id) {
    const auto& b = placement.buffers[id];
    if (std::binary_search(b.begin(), b.end(), m)) out.push_back(placement.grid.node_at(id));
  }
  return out;
}

std::string to_json(const CachePlacement& placement) {
  nlohmann::ordered_json j;
  j["nu"] = placement.grid.nu();
  j["side"] = placement.grid.side();
  j["capacity"] = placement.capacity;
  j["file_count"] = placement.file_count;
  j["valid"] = validate_capacity(placement);
  auto cells = nlohmann::ordered_json::array();
  for (NodeId id = 0; id < placement.buffers.size(); ++id) {
    const Node n = placement.grid.node_at(id);
    std::vector<std::size_t> files;
    for (FileId m : placement.buffers[id]) files.push_back(m + 1);
    nlohmann::ordered_json cell;
    cell["x"] = n.x;
    cell["y"] = n.y;
    cell["files"] = files;
    cells.push_back(std::move(cell));
  }
  j["buffers"] = std::move(cells);
  return j.dump(2);
}

std::string render_matrix(const CachePlacement& placement) {
  const int side = placement.grid.side();
  std::vector<std::string> text(placement.buffers.size());
  std::size_t width = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    std::string s;
    for (FileId m : placement.buffers[i]) {
      if (!s.empty()) s += ',';
      s += std::to_string(m + 1);
    }
    if (s.empty()) s = "-";
    width = std::max(width, s.size());
    text[i] = std::move(s);
  }
  std::ostringstream os;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const std::string& s = text[placement.grid.index({x, y})];
      if (x > 0) os << " | ";
      os << s;
      if (x + 1 < side) os << std::string(width - s.size(), ' ');
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace replica_grid
