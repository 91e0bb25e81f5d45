#include "replica_grid/delivery_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <sstream>
#include <tuple>

#include "replica_grid/error.hpp"
#include "replica_grid/format.hpp"
#include "replica_grid/parallel.hpp"

namespace replica_grid {

namespace {

// Fixed so that partial sums, and therefore the output bits, do not depend on
// the worker count.
constexpr std::size_t kFilesPerBlock = 64;

struct Lattice {
  int period = 1;
  Node base;
};

std::vector<std::vector<NodeId>> replicas_by_file(const CachePlacement& placement) {
  std::vector<std::vector<NodeId>> out(placement.file_count);
  for (NodeId id = 0; id < placement.buffers.size(); ++id) {
    for (FileId m : placement.buffers[id]) out[m].push_back(id);
  }
  return out;
}

// Replicas form {base + period * (i, j)} covering the whole torus.
std::optional<Lattice> detect_lattice(const GridSpec& grid, const std::vector<NodeId>& reps) {
  if (reps.empty()) return std::nullopt;
  int per_axis = 1;
  while (static_cast<std::size_t>(per_axis) * per_axis < reps.size()) per_axis *= 2;
  if (static_cast<std::size_t>(per_axis) * per_axis != reps.size() || per_axis > grid.side()) return std::nullopt;
  const int period = grid.side() / per_axis;
  const Node base = grid.node_at(reps.front());
  if (base.x >= period || base.y >= period) return std::nullopt;
  for (NodeId id : reps) {
    const Node n = grid.node_at(id);
    if ((n.x - base.x) % period != 0 || (n.y - base.y) % period != 0) return std::nullopt;
  }
  return Lattice{period, base};
}

int lattice_offset(int from, int to, int period) {
  const int a = ((to - from) % period + period) % period;
  return 2 * a < period ? a : a - period;
}

void check_simulable(const CachePlacement& placement, const Popularity& pop) {
  if (placement.grid.nu() < 1) throw InvalidInput("link loads need a grid with nu >= 1");
  if (placement.file_count != pop.size()) throw InvalidInput("placement and popularity sizes differ");
}

// Half-request counts per link of one lattice-placed file over a single
// period x period torus. Index (y * period + x) * 2 + axis.
std::vector<std::int64_t> folded_counts(const Lattice& lat) {
  const int p = lat.period;
  const std::size_t stride = static_cast<std::size_t>(p) + 1;
  std::vector<std::int64_t> hdiff(static_cast<std::size_t>(p) * stride, 0);
  std::vector<std::int64_t> vdiff(static_cast<std::size_t>(p) * stride, 0);

  // Cyclic interval [lo, lo + len) on line `line`, len < p.
  auto add = [&](std::vector<std::int64_t>& diff, int line, int start, int delta, std::int64_t w) {
    if (delta == 0) return;
    const int len = std::abs(delta);
    const int lo = ((std::min(start, start + delta)) % p + p) % p;
    std::int64_t* row = diff.data() + static_cast<std::size_t>(line) * stride;
    if (lo + len <= p) {
      row[lo] += w;
      row[lo + len] -= w;
    } else {
      row[lo] += w;
      row[p] -= w;
      row[0] += w;
      row[lo + len - p] -= w;
    }
  };
  auto wrap = [p](int v) { return ((v % p) + p) % p; };

  for (int y = 0; y < p; ++y) {
    for (int x = 0; x < p; ++x) {
      const int dx = lattice_offset(x, lat.base.x, p);
      const int dy = lattice_offset(y, lat.base.y, p);
      if (dx == 0 && dy == 0) continue;
      if (dx == 0 || dy == 0) {
        add(hdiff, y, x, dx, 2);
        add(vdiff, x, y, dy, 2);
        continue;
      }
      add(hdiff, y, x, dx, 1);
      add(vdiff, wrap(x + dx), y, dy, 1);
      add(vdiff, x, y, dy, 1);
      add(hdiff, wrap(y + dy), x, dx, 1);
    }
  }

  std::vector<std::int64_t> out(2 * static_cast<std::size_t>(p) * p, 0);
  for (int line = 0; line < p; ++line) {
    std::int64_t hrun = 0;
    std::int64_t vrun = 0;
    for (int i = 0; i < p; ++i) {
      hrun += hdiff[static_cast<std::size_t>(line) * stride + i];
      vrun += vdiff[static_cast<std::size_t>(line) * stride + i];
      out[(static_cast<std::size_t>(line) * p + i) * 2 + 0] = hrun;  // row link at (i, line)
      out[(static_cast<std::size_t>(i) * p + line) * 2 + 1] = vrun;  // column link at (line, i)
    }
  }
  return out;
}

ServeMap lattice_serve_map(const GridSpec& grid, FileId m, const Lattice& lat) {
  ServeMap sm{grid, m, std::vector<Node>(static_cast<std::size_t>(grid.node_count()))};
  for (NodeId id = 0; id < sm.server.size(); ++id) {
    const Node c = grid.node_at(id);
    sm.server[id] = grid.wrap(c.x + lattice_offset(c.x, lat.base.x, lat.period),
                              c.y + lattice_offset(c.y, lat.base.y, lat.period));
  }
  return sm;
}

ServeMap generic_serve_map(const GridSpec& grid, FileId m, const std::vector<NodeId>& reps) {
  ServeMap sm{grid, m, std::vector<Node>(static_cast<std::size_t>(grid.node_count()))};
  for (NodeId id = 0; id < sm.server.size(); ++id) {
    const Node c = grid.node_at(id);
    std::tuple<int, int, int> best{std::numeric_limits<int>::max(), 0, 0};
    Node pick;
    for (NodeId r : reps) {
      const Node s = grid.node_at(r);
      const Displacement d = torus_displacement(grid, c, s);
      const std::tuple<int, int, int> key{std::abs(d.dx) + std::abs(d.dy), d.dy, d.dx};
      if (key < best) {
        best = key;
        pick = s;
      }
    }
    sm.server[id] = pick;
  }
  return sm;
}

// Half-request counts per link from walking every route.
std::vector<std::int64_t> direct_counts(const ServeMap& sm) {
  const GridSpec& grid = sm.grid;
  std::vector<std::int64_t> count(grid.link_count(), 0);
  for (NodeId id = 0; id < sm.server.size(); ++id) {
    const RouteSet routes = sm.routes(grid.node_at(id));
    const std::int64_t w = routes.size() == 1 ? 2 : 1;
    for (const Route& r : routes) {
      for (LinkId l : r.links) count[l] += w;
    }
  }
  return count;
}

void tile_onto(const GridSpec& grid, int period, const std::vector<double>& folded, std::vector<double>& loads) {
  const int side = grid.side();
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const std::size_t f = (static_cast<std::size_t>(y % period) * period + x % period) * 2;
      const std::size_t l = 2 * grid.index({x, y});
      loads[l] += folded[f];
      loads[l + 1] += folded[f + 1];
    }
  }
}

struct FilePlan {
  FileId file;
  std::optional<Lattice> lattice;
};

// Sums fn(block) for fixed-size blocks of `files` in block order.
template <typename Fn>
std::vector<double> blocked_sum(const std::vector<FilePlan>& files, std::size_t width, int jobs, Fn fn) {
  std::vector<double> total(width, 0.0);
  const std::size_t blocks = (files.size() + kFilesPerBlock - 1) / kFilesPerBlock;
  const std::size_t wave = static_cast<std::size_t>(resolve_jobs(jobs));
  for (std::size_t first = 0; first < blocks; first += wave) {
    const std::size_t n = std::min(wave, blocks - first);
    std::vector<std::vector<double>> partial(n, std::vector<double>(width, 0.0));
    parallel_for(n, jobs, [&](std::size_t i) {
      const std::size_t b = first + i;
      const std::size_t lo = b * kFilesPerBlock;
      const std::size_t hi = std::min(files.size(), lo + kFilesPerBlock);
      for (std::size_t f = lo; f < hi; ++f) fn(files[f], partial[i]);
    });
    for (const auto& part : partial) {
      for (std::size_t j = 0; j < width; ++j) total[j] += part[j];
    }
  }
  return total;
}

}  // namespace

ServeMap serve_map(const CachePlacement& placement, FileId m) {
  if (m >= placement.file_count) throw InvalidInput("file index out of range");
  std::vector<NodeId> reps;
  for (NodeId id = 0; id < placement.buffers.size(); ++id) {
    const auto& b = placement.buffers[id];
    if (std::binary_search(b.begin(), b.end(), m)) reps.push_back(id);
  }
  if (reps.empty()) throw InvalidInput("file " + std::to_string(m + 1) + " is not stored at any node");
  return generic_serve_map(placement.grid, m, reps);
}

std::vector<double> file_link_loads(const CachePlacement& placement, const Popularity& pop, FileId m,
                                    LoadMethod method) {
  check_simulable(placement, pop);
  if (m >= placement.file_count) throw InvalidInput("file index out of range");
  const GridSpec& grid = placement.grid;
  const auto reps = replicas_by_file(placement);
  if (reps[m].empty()) throw InvalidInput("file " + std::to_string(m + 1) + " is not stored at any node");
  const auto lat = detect_lattice(grid, reps[m]);
  if (method == LoadMethod::kTiled && !lat) throw InvalidInput("file is not placed on a lattice");
  std::vector<double> loads(grid.link_count(), 0.0);
  const double half = 0.5 * pop[m] * kRequestRate;
  if (method != LoadMethod::kDirect && lat) {
    if (lat->period == 1) return loads;
    const auto counts = folded_counts(*lat);
    std::vector<double> folded(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) folded[i] = static_cast<double>(counts[i]) * half;
    tile_onto(grid, lat->period, folded, loads);
    return loads;
  }
  const auto counts = direct_counts(generic_serve_map(grid, m, reps[m]));
  for (std::size_t i = 0; i < counts.size(); ++i) loads[i] = static_cast<double>(counts[i]) * half;
  return loads;
}

LinkLoadMap link_loads(const CachePlacement& placement, const Popularity& pop, const LoadOptions& options) {
  check_simulable(placement, pop);
  const GridSpec& grid = placement.grid;
  const auto reps = replicas_by_file(placement);

  // Lattice files grouped by period; everything else walked directly.
  std::vector<std::vector<FilePlan>> by_period(static_cast<std::size_t>(grid.nu()) + 1);
  std::vector<FilePlan> direct;
  for (FileId m = 0; m < placement.file_count; ++m) {
    if (reps[m].empty()) throw InvalidInput("file " + std::to_string(m + 1) + " is not stored at any node");
    std::optional<Lattice> lat;
    if (options.method != LoadMethod::kDirect) lat = detect_lattice(grid, reps[m]);
    if (options.method == LoadMethod::kTiled && !lat) {
      throw InvalidInput("file " + std::to_string(m + 1) + " is not placed on a lattice");
    }
    if (lat) {
      if (lat->period == 1) continue;  // stored everywhere, no traffic
      int k = 0;
      while ((1 << k) < lat->period) ++k;
      by_period[static_cast<std::size_t>(k)].push_back({m, lat});
    } else {
      direct.push_back({m, std::nullopt});
    }
  }

  LinkLoadMap out{grid, std::vector<double>(grid.link_count(), 0.0), kRequestRate};
  for (int k = 1; k <= grid.nu(); ++k) {
    const auto& files = by_period[static_cast<std::size_t>(k)];
    if (files.empty()) continue;
    const int period = 1 << k;
    const std::size_t width = 2 * static_cast<std::size_t>(period) * period;
    const auto folded = blocked_sum(files, width, options.jobs, [&](const FilePlan& f, std::vector<double>& acc) {
      const auto counts = folded_counts(*f.lattice);
      const double half = 0.5 * pop[f.file] * kRequestRate;
      for (std::size_t i = 0; i < width; ++i) acc[i] += static_cast<double>(counts[i]) * half;
    });
    tile_onto(grid, period, folded, out.loads);
  }
  if (!direct.empty()) {
    const auto walked = blocked_sum(direct, grid.link_count(), options.jobs,
                                    [&](const FilePlan& f, std::vector<double>& acc) {
                                      const auto counts = direct_counts(generic_serve_map(grid, f.file, reps[f.file]));
                                      const double half = 0.5 * pop[f.file] * kRequestRate;
                                      for (std::size_t i = 0; i < counts.size(); ++i) {
                                        acc[i] += static_cast<double>(counts[i]) * half;
                                      }
                                    });
    for (std::size_t i = 0; i < walked.size(); ++i) out.loads[i] += walked[i];
  }
  return out;
}

double worst_link(const LinkLoadMap& loads) {
  if (loads.loads.empty()) throw InvalidInput("no links");
  return *std::max_element(loads.loads.begin(), loads.loads.end());
}

double total_load(const LinkLoadMap& loads) { return compensated_sum(loads.loads); }

double avg_link(const LinkLoadMap& loads) {
  if (loads.loads.empty()) throw InvalidInput("no links");
  return total_load(loads) / static_cast<double>(loads.loads.size());
}

double hop_weighted_demand(const CachePlacement& placement, const Popularity& pop) {
  if (placement.file_count != pop.size()) throw InvalidInput("placement and popularity sizes differ");
  const GridSpec& grid = placement.grid;
  const int side = grid.side();
  const auto reps = replicas_by_file(placement);
  std::vector<double> per_file(placement.file_count);
  std::vector<int> dist(static_cast<std::size_t>(grid.node_count()));
  std::deque<NodeId> queue;
  // Multi-source BFS from the replicas of each file.
  for (FileId m = 0; m < placement.file_count; ++m) {
    if (reps[m].empty()) throw InvalidInput("file " + std::to_string(m + 1) + " is not stored at any node");
    std::fill(dist.begin(), dist.end(), -1);
    for (NodeId r : reps[m]) {
      dist[r] = 0;
      queue.push_back(r);
    }
    std::int64_t hops = 0;
    while (!queue.empty()) {
      const NodeId u = queue.front();
      queue.pop_front();
      hops += dist[u];
      const Node n = grid.node_at(u);
      const Node nbr[4] = {grid.wrap(n.x + 1, n.y), grid.wrap(n.x - 1, n.y), grid.wrap(n.x, n.y + 1),
                           grid.wrap(n.x, n.y - 1)};
      for (int i = 0; i < (side > 1 ? 4 : 0); ++i) {
        const NodeId v = grid.index(nbr[i]);
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    per_file[m] = static_cast<double>(hops) * pop[m] * kRequestRate;
  }
  return compensated_sum(per_file);
}

std::int64_t cluster_hop_sum(int level) {
  if (level < 0 || level > 20) throw InvalidInput("cluster level out of range");
  if (level == 0) return 0;
  return std::int64_t{1} << (3 * level - 1);
}

double rhombus_radius(double q) {
  if (!(q >= 1.0)) throw InvalidInput("cluster size must be at least 1");
  return 0.5 * (-1.0 + std::sqrt(2.0 * q - 1.0));
}

double rhombus_lower_hop_sum(double q) {
  const double rho = rhombus_radius(q);
  return 2.0 * rho * (rho + 1.0) * (2.0 * rho + 1.0) / 3.0;
}

std::int64_t rhombus_exact_hop_sum(std::int64_t q) {
  if (q < 1) throw InvalidInput("cluster size must be at least 1");
  std::int64_t left = q - 1;
  std::int64_t sum = 0;
  for (std::int64_t h = 1; left > 0; ++h) {
    const std::int64_t take = std::min(left, 4 * h);
    sum += take * h;
    left -= take;
  }
  return sum;
}

PerFileBoundReport per_file_bound_report(const CachePlacement& placement, const Popularity& pop, FileId m) {
  check_simulable(placement, pop);
  const GridSpec& grid = placement.grid;
  const auto reps = replicas_by_file(placement);
  if (m >= reps.size() || reps[m].empty()) throw InvalidInput("file is not stored at any node");
  const auto lat = detect_lattice(grid, reps[m]);
  if (!lat) throw InvalidInput("per-file bounds need a canonically placed file");
  const auto loads = file_link_loads(placement, pop, m, LoadMethod::kTiled);

  PerFileBoundReport rep;
  if (lat->period == 1) {
    for (double v : loads) rep.off_axis_ratio = std::max(rep.off_axis_ratio, v);
    rep.holds = rep.off_axis_ratio == 0.0;
    return rep;
  }
  int level = 0;
  while ((1 << level) < lat->period) ++level;
  const double half = std::ldexp(1.0, level - 1);
  const double axis_bound = half * (half + 0.5) * pop[m];
  const double off_bound = std::ldexp(1.0, level - 2) * pop[m];
  const ServeMap sm = lattice_serve_map(grid, m, *lat);
  for (LinkId l = 0; l < loads.size(); ++l) {
    const Link link = grid.link_at(l);
    const Node u = link.origin;
    const Node v = link.axis == Axis::kRow ? grid.wrap(u.x + 1, u.y) : grid.wrap(u.x, u.y + 1);
    const Node su = sm.server[grid.index(u)];
    if (su != sm.server[grid.index(v)]) {
      rep.cross_cluster_max = std::max(rep.cross_cluster_max, loads[l]);
      continue;
    }
    const bool on_axis = link.axis == Axis::kRow ? u.y == su.y : u.x == su.x;
    if (on_axis) {
      rep.axis_ratio = std::max(rep.axis_ratio, loads[l] / axis_bound);
    } else {
      rep.off_axis_ratio = std::max(rep.off_axis_ratio, loads[l] / off_bound);
    }
  }
  constexpr double kSlack = 1e-12;
  rep.holds = rep.cross_cluster_max == 0.0 && rep.axis_ratio <= 1.0 + kSlack && rep.off_axis_ratio <= 1.0 + kSlack;
  return rep;
}

bool per_file_link_bound(const CachePlacement& placement, const Popularity& pop, FileId m) {
  return per_file_bound_report(placement, pop, m).holds;
}

std::string to_csv(const LinkLoadMap& loads) {
  std::ostringstream os;
  os << "link_index,origin_x,origin_y,axis,load\n";
  for (LinkId l = 0; l < loads.loads.size(); ++l) {
    const Link link = loads.grid.link_at(l);
    os << l << ',' << link.origin.x << ',' << link.origin.y << ','
       << (link.axis == Axis::kRow ? "row" : "column") << ',' << format_number(loads.loads[l]) << '\n';
  }
  os << "summary,worst," << format_number(worst_link(loads)) << ",avg," << format_number(avg_link(loads)) << '\n';
  return os.str();
}

}  // namespace replica_grid
