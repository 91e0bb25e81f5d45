#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "replica_grid/placement.hpp"
#include "replica_grid/popularity.hpp"
#include "replica_grid/torus_grid.hpp"

namespace replica_grid {

// Request rate of every node. Loads for another rate scale linearly.
inline constexpr double kRequestRate = 1.0;

// Traffic per undirected link, indexed like enumerate_links.
struct LinkLoadMap {
  GridSpec grid{1};
  std::vector<double> loads;
  double request_rate = kRequestRate;
};

// Server of file m for every node, indexed by NodeId.
struct ServeMap {
  GridSpec grid{1};
  FileId file = 0;
  std::vector<Node> server;

  RouteSet routes(Node client) const { return shortest_routes(grid, client, server[grid.index(client)]); }
};

// Nearest replica; among equally near replicas the most northern wins, then
// the most western (relative to the client, along the torus-shortest side).
// Throws InvalidInput when no node holds m.
ServeMap serve_map(const CachePlacement& placement, FileId m);

enum class LoadMethod {
  kAuto,    // tiled for lattice-placed files, direct otherwise
  kTiled,   // fold one period per file and tile; InvalidInput if not a lattice
  kDirect,  // walk every (node, file) route
};

struct LoadOptions {
  LoadMethod method = LoadMethod::kAuto;
  int jobs = 1;
};

// Throws InvalidInput for nu == 0 grids and uncovered files. Output is
// identical for any jobs value.
LinkLoadMap link_loads(const CachePlacement& placement, const Popularity& pop,
                       const LoadOptions& options = {});

// Traffic of a single file, p_m included.
std::vector<double> file_link_loads(const CachePlacement& placement, const Popularity& pop, FileId m,
                                    LoadMethod method = LoadMethod::kAuto);

double worst_link(const LinkLoadMap& loads);
double avg_link(const LinkLoadMap& loads);
double total_load(const LinkLoadMap& loads);

// sum over nodes and files of hop count to the nearest replica times p_m,
// computed by direct distance minimization.
double hop_weighted_demand(const CachePlacement& placement, const Popularity& pop);

// Total hops from the nodes of a 2^level x 2^level cluster to its replica.
std::int64_t cluster_hop_sum(int level);

// Continuous rhombus radius for a cluster of q nodes, and the hop-sum lower
// bound 2 rho (rho + 1)(2 rho + 1) / 3 evaluated at that radius.
double rhombus_radius(double q);
double rhombus_lower_hop_sum(double q);

// Smallest possible hop sum of q distinct lattice nodes to one server: fill
// distance shells (1 node at 0, 4h nodes at h) in order.
std::int64_t rhombus_exact_hop_sum(std::int64_t q);

struct PerFileBoundReport {
  bool holds = true;
  double cross_cluster_max = 0.0;   // largest m-load on a link joining two clusters
  double axis_ratio = 0.0;          // max load / bound on the server row and column
  double off_axis_ratio = 0.0;      // max load / bound on the other links
};

// Checks the per-file link-load bounds of a canonically placed file m.
PerFileBoundReport per_file_bound_report(const CachePlacement& placement, const Popularity& pop, FileId m);
bool per_file_link_bound(const CachePlacement& placement, const Popularity& pop, FileId m);

// CSV with header link_index,origin_x,origin_y,axis,load and a trailing
// summary,worst,<w>,avg,<a> row.
std::string to_csv(const LinkLoadMap& loads);

}  // namespace replica_grid
