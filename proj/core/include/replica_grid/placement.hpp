#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "replica_grid/density_solver.hpp"
#include "replica_grid/popularity.hpp"
#include "replica_grid/torus_grid.hpp"

namespace replica_grid {

// Per-node file sets. buffers is indexed by NodeId; each list is sorted.
struct CachePlacement {
  GridSpec grid{0};
  int capacity = 1;
  std::size_t file_count = 0;
  std::vector<std::vector<FileId>> buffers;

  const std::vector<FileId>& at(Node n) const { return buffers[grid.index(n)]; }
};

// Hand-built placement; sorts and deduplicates each buffer. Throws
// InvalidInput on a size mismatch or an out-of-range file id.
CachePlacement make_placement(const GridSpec& grid, int capacity, std::size_t file_count,
                              std::vector<std::vector<FileId>> buffers);

// 1-based scan rank of a cell in the 2^k x 2^k precedence matrix. The main
// diagonal comes first, then each following wrapped diagonal top to bottom.
int diagonal_rank(int k, Node cell);

// Cells of the 2^k x 2^k block in scan order (k >= 1).
std::vector<Node> diagonal_order(int k);

// Greedy canonical placement. Requires integer K >= 1, canon.nu == grid.nu()
// and sum of canonical densities <= K (InvalidInput otherwise).
CachePlacement canonical_place(const GridSpec& grid, const CanonicalProfile& canon,
                               const Popularity& pop, int capacity);

// max_n |B_n| <= K and every file is stored somewhere.
bool validate_capacity(const CachePlacement& placement);

// Fraction of nodes holding each file.
std::vector<double> measured_densities(const CachePlacement& placement);

// Nodes holding file m, row-major.
std::vector<Node> replica_nodes(const CachePlacement& placement, FileId m);

// {"nu", "side", "capacity", "file_count", "valid", "buffers": [{"x", "y", "files"}]}
// with 1-based file numbers.
std::string to_json(const CachePlacement& placement);

// One line per grid row, cells separated by " | ", files 1-based and
// comma-joined, padded to equal width.
std::string render_matrix(const CachePlacement& placement);

}  // namespace replica_grid
