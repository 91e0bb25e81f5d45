#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace replica_grid {

// Grid coordinate, 0-based. x is the column (grows east), y is the row
// (grows south). Node indices are row-major: index = y * side + x.
struct Node {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Node&, const Node&) = default;
};

// kRow links join (x, y) to its east neighbour, kColumn links join (x, y) to
// its south neighbour, both with wrap-around.
enum class Axis : std::uint8_t { kRow = 0, kColumn = 1 };

struct Link {
  Node origin;
  Axis axis = Axis::kRow;

  friend bool operator==(const Link&, const Link&) = default;
};

using LinkId = std::size_t;
using NodeId = std::size_t;

// Signed per-axis offset from one node to another along the chosen shortest
// wrap direction. Negative dx is west, negative dy is north.
struct Displacement {
  int dx = 0;
  int dy = 0;
};

// Toroidal side x side lattice with side = 2^nu and N = 4^nu nodes.
class GridSpec {
 public:
  explicit GridSpec(int nu);

  // Throws InvalidInput unless node_count is a power of four.
  static GridSpec from_node_count(std::int64_t node_count);

  int nu() const { return nu_; }
  int side() const { return side_; }
  std::int64_t node_count() const { return static_cast<std::int64_t>(side_) * side_; }

  // 2N for nu >= 1; the single-node grid has no usable links.
  std::size_t link_count() const;

  bool contains(Node n) const { return n.x >= 0 && n.y >= 0 && n.x < side_ && n.y < side_; }
  NodeId index(Node n) const { return static_cast<NodeId>(n.y) * side_ + n.x; }
  Node node_at(NodeId id) const;
  Node wrap(int x, int y) const;

  LinkId link_index(const Link& link) const { return 2 * index(link.origin) + static_cast<LinkId>(link.axis); }
  Link link_at(LinkId id) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int nu_;
  int side_;
};

// One shortest path together with the share of requests it carries.
struct Route {
  double fraction = 1.0;
  std::vector<Node> nodes;    // client first, server last
  std::vector<LinkId> links;  // nodes.size() - 1 entries
};

using RouteSet = std::vector<Route>;

int hop_distance(const GridSpec& grid, Node a, Node b);

// Axis ties (|delta| == side / 2) resolve toward decreasing coordinates.
Displacement torus_displacement(const GridSpec& grid, Node from, Node to);

// One I-shaped route when client and server share a row or column, otherwise
// the row-first and column-first L-shaped routes with half of the traffic
// each. A local hit yields a single empty route.
RouteSet shortest_routes(const GridSpec& grid, Node client, Node server);

// Row-major by origin, east link before south link. Empty for nu == 0.
std::vector<Link> enumerate_links(const GridSpec& grid);

}  // namespace replica_grid
