#include "replica_grid/torus_grid.hpp"

#include <cstdlib>
#include <string>

#include "replica_grid/error.hpp"

namespace replica_grid {

namespace {

// Largest side we index with int coordinates and size_t link ids.
constexpr int kMaxNu = 15;

int axis_offset(int from, int to, int side) {
  int d = ((to - from) % side + side) % side;  // in [0, side)
  if (2 * d < side) return d;
  if (2 * d > side) return d - side;
  return -d;  // tie: go toward decreasing coordinates
}

// Append |steps| moves along one axis, recording the traversed links.
void walk(const GridSpec& grid, Route& route, Axis axis, int steps) {
  const int dir = steps < 0 ? -1 : 1;
  for (int i = 0; i < std::abs(steps); ++i) {
    const Node cur = route.nodes.back();
    Node next;
    Link link;
    if (axis == Axis::kRow) {
      next = grid.wrap(cur.x + dir, cur.y);
      link = {dir > 0 ? cur : next, Axis::kRow};
    } else {
      next = grid.wrap(cur.x, cur.y + dir);
      link = {dir > 0 ? cur : next, Axis::kColumn};
    }
    route.links.push_back(grid.link_index(link));
    route.nodes.push_back(next);
  }
}

}  // namespace

GridSpec::GridSpec(int nu) : nu_(nu), side_(0) {
  if (nu < 0 || nu > kMaxNu) {
    throw InvalidInput("grid exponent nu must lie in [0, " + std::to_string(kMaxNu) + "], got " +
                       std::to_string(nu));
  }
  side_ = 1 << nu;
}

GridSpec GridSpec::from_node_count(std::int64_t node_count) {
  std::int64_t n = 1;
  for (int nu = 0; nu <= kMaxNu; ++nu, n *= 4) {
    if (n == node_count) return GridSpec(nu);
    if (n > node_count) break;
  }
  throw InvalidInput("node count " + std::to_string(node_count) + " is not a power of 4");
}

std::size_t GridSpec::link_count() const {
  return nu_ == 0 ? 0 : 2 * static_cast<std::size_t>(node_count());
}

Node GridSpec::node_at(NodeId id) const {
  return {static_cast<int>(id % side_), static_cast<int>(id / side_)};
}

Node GridSpec::wrap(int x, int y) const {
  return {((x % side_) + side_) % side_, ((y % side_) + side_) % side_};
}

Link GridSpec::link_at(LinkId id) const {
  return {node_at(id / 2), static_cast<Axis>(id % 2)};
}

Displacement torus_displacement(const GridSpec& grid, Node from, Node to) {
  return {axis_offset(from.x, to.x, grid.side()), axis_offset(from.y, to.y, grid.side())};
}

int hop_distance(const GridSpec& grid, Node a, Node b) {
  const Displacement d = torus_displacement(grid, a, b);
  return std::abs(d.dx) + std::abs(d.dy);
}

RouteSet shortest_routes(const GridSpec& grid, Node client, Node server) {
  const Displacement d = torus_displacement(grid, client, server);
  if (d.dx == 0 || d.dy == 0) {
    Route route{1.0, {client}, {}};
    walk(grid, route, Axis::kRow, d.dx);
    walk(grid, route, Axis::kColumn, d.dy);
    return {std::move(route)};
  }
  Route row_first{0.5, {client}, {}};
  walk(grid, row_first, Axis::kRow, d.dx);
  walk(grid, row_first, Axis::kColumn, d.dy);
  Route column_first{0.5, {client}, {}};
  walk(grid, column_first, Axis::kColumn, d.dy);
  walk(grid, column_first, Axis::kRow, d.dx);
  return {std::move(row_first), std::move(column_first)};
}

std::vector<Link> enumerate_links(const GridSpec& grid) {
  std::vector<Link> links;
  links.reserve(grid.link_count());
  for (LinkId id = 0; id < grid.link_count(); ++id) links.push_back(grid.link_at(id));
  return links;
}

}  // namespace replica_grid
