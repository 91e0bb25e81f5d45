#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <sstream>

#include "replica_grid/asymptotics.hpp"
#include "replica_grid/delivery_sim.hpp"
#include "replica_grid/density_solver.hpp"
#include "replica_grid/error.hpp"
#include "replica_grid/format.hpp"
#include "replica_grid/oracle.hpp"
#include "replica_grid/placement.hpp"

namespace replica_grid::cli {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct Options {
  std::string config;
  int jobs = 1;
  std::uint64_t seed = 1;

  std::optional<int> nu;
  std::optional<std::int64_t> n_nodes;
  std::optional<std::int64_t> m_count;
  std::optional<std::string> m_law;
  std::optional<double> capacity;
  std::optional<double> tau;
  std::optional<std::string> pop_file;
  std::optional<std::string> levels;
  std::optional<std::string> out;
  std::optional<std::string> csv;
  std::optional<std::string> method;
  std::optional<std::string> nus;
  std::optional<std::string> axis;
  std::optional<std::string> kind;
  std::optional<double> resolution;
  std::optional<int> level;
  bool random_pop = false;
};

std::string num(double v) { return format_number(v); }

int jobs_from_env() {
  const char* v = std::getenv("REPLICA_GRID_JOBS");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096) throw InvalidInput("REPLICA_GRID_JOBS must be a positive integer");
  return static_cast<int>(n);
}

// Fills options that were not given on the command line from a JSON object
// whose keys are the long option names.
void merge_config(const std::string& path, const CLI::App& sub, Options& o) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw InvalidInput("config " + path + " must hold a JSON object");
  auto unset = [&](const std::string& name) {
    const CLI::Option* opt = sub.get_option_no_throw("--" + name);
    return opt == nullptr || opt->count() == 0;
  };
  try {
    for (const auto& [key, value] : j.items()) {
      if (!unset(key)) continue;
      if (key == "nu") o.nu = value.get<int>();
      else if (key == "N") o.n_nodes = value.get<std::int64_t>();
      else if (key == "M") o.m_count = value.get<std::int64_t>();
      else if (key == "m-law") o.m_law = value.get<std::string>();
      else if (key == "K") o.capacity = value.get<double>();
      else if (key == "tau") o.tau = value.get<double>();
      else if (key == "pop-file") o.pop_file = value.get<std::string>();
      else if (key == "levels") o.levels = value.get<std::string>();
      else if (key == "out") o.out = value.get<std::string>();
      else if (key == "csv") o.csv = value.get<std::string>();
      else if (key == "method") o.method = value.get<std::string>();
      else if (key == "nus") o.nus = value.get<std::string>();
      else if (key == "axis") o.axis = value.get<std::string>();
      else if (key == "kind") o.kind = value.get<std::string>();
      else if (key == "resolution") o.resolution = value.get<double>();
      else if (key == "level") o.level = value.get<int>();
      else if (key == "jobs") o.jobs = value.get<int>();
      else if (key == "seed") o.seed = value.get<std::uint64_t>();
      else if (key == "random") o.random_pop = value.get<bool>();
      else throw InvalidInput("config " + path + ": unknown key \"" + key + "\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("config " + path + ": " + e.what());
  }
}

std::vector<long long> parse_int_list(const std::string& text) {
  std::vector<long long> out;
  std::stringstream ss(text);
  ss.imbue(std::locale::classic());
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    if (first == std::string::npos) throw InvalidInput("empty entry in list \"" + text + "\"");
    item = item.substr(first);
    // "a-b" ranges and "vxn" repeats
    const auto dash = item.find('-', 1);
    const auto times = item.find('x');
    try {
      if (dash != std::string::npos) {
        const long long lo = std::stoll(item.substr(0, dash));
        const long long hi = std::stoll(item.substr(dash + 1));
        if (hi < lo) throw InvalidInput("bad range " + item);
        for (long long v = lo; v <= hi; ++v) out.push_back(v);
      } else if (times != std::string::npos) {
        const long long v = std::stoll(item.substr(0, times));
        const long long n = std::stoll(item.substr(times + 1));
        if (n < 1) throw InvalidInput("bad repeat " + item);
        for (long long i = 0; i < n; ++i) out.push_back(v);
      } else {
        std::size_t used = 0;
        out.push_back(std::stoll(item, &used));
        if (used != item.size()) throw InvalidInput("bad integer " + item);
      }
    } catch (const std::logic_error&) {
      throw InvalidInput("bad list entry \"" + item + "\"");
    }
  }
  if (out.empty()) throw InvalidInput("empty list");
  return out;
}

GridSpec resolve_grid(const Options& o) {
  if (o.nu && o.n_nodes) {
    const GridSpec g(*o.nu);
    if (g.node_count() != *o.n_nodes) throw InvalidInput("--nu and --N disagree");
    return g;
  }
  if (o.nu) return GridSpec(*o.nu);
  if (o.n_nodes) return GridSpec::from_node_count(*o.n_nodes);
  throw InvalidInput("grid size required: give --nu or --N");
}

double resolve_capacity(const Options& o) { return o.capacity.value_or(1.0); }

int integer_capacity(double k) {
  if (k < 1.0 || k != std::floor(k) || k > 1e9) throw InvalidInput("placement needs an integer K >= 1");
  return static_cast<int>(k);
}

std::int64_t resolve_m(const Options& o, const GridSpec& grid, double capacity) {
  if (o.m_count && o.m_law) throw InvalidInput("give either --M or --m-law, not both");
  if (o.m_count) return *o.m_count;
  if (o.m_law) return evaluate_m_law(*o.m_law, grid.node_count(), capacity);
  if (o.levels) return static_cast<std::int64_t>(parse_int_list(*o.levels).size());
  return -1;
}

Popularity random_popularity(std::size_t m_count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(m_count);
  for (double& v : w) v = u(rng);
  std::sort(w.begin(), w.end(), std::greater<>());
  const double total = compensated_sum(w);
  for (double& v : w) v /= total;
  // Renormalize once more so the sum is 1 to the last bit we can get.
  const double again = compensated_sum(w);
  for (double& v : w) v /= again;
  return Popularity::from_probabilities(std::move(w));
}

Popularity resolve_popularity(const Options& o, std::int64_t m_count) {
  if (o.pop_file) {
    if (o.tau) throw InvalidInput("give either --tau or --pop-file, not both");
    auto pop = Popularity::load(*o.pop_file);
    if (m_count >= 0 && static_cast<std::size_t>(m_count) != pop.size()) {
      throw InvalidInput("--M disagrees with the popularity file");
    }
    return pop;
  }
  if (m_count < 1) throw InvalidInput("file count required: give --M, --m-law or --pop-file");
  if (o.random_pop) return random_popularity(static_cast<std::size_t>(m_count), o.seed);
  return Popularity::zipf(static_cast<std::size_t>(m_count), o.tau.value_or(1.0));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write " + path);
  f << text;
  if (text.empty() || text.back() != '\n') f << '\n';
}

std::string densities_line(const std::vector<double>& d) {
  std::string s = "[";
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) s += ", ";
    s += num(d[i]);
  }
  return s + "]";
}

int cmd_solve(const Options& o, std::ostream& out) {
  const GridSpec grid = resolve_grid(o);
  const double k = resolve_capacity(o);
  const auto pop = resolve_popularity(o, resolve_m(o, grid, k));
  const auto profile = solve_cd(grid.node_count(), k, pop);
  const auto canon = canonical_truncate(profile);
  const double c_star = cd_cost(profile, pop);
  const double c_canon = cd_cost(canon.densities, pop);
  const auto kkt = kkt_check(profile, pop);
  out << "N = " << grid.node_count() << "\nM = " << pop.size() << "\nK = " << num(k) << '\n';
  out << "l = " << profile.l_index << "\nr = " << profile.r_index << "\nmu = " << num(profile.mu) << '\n';
  out << "C_CD = " << num(c_star) << "\nC_CD_canonical = " << num(c_canon) << '\n';
  out << "canonical_lower_margin = " << num(c_canon - c_star) << '\n';
  out << "canonical_upper_margin = " << num(2.0 * c_star + kSqrt2 / 6.0 - c_canon) << '\n';
  out << "kkt_worst = " << num(kkt.worst()) << '\n';
  if (pop.size() <= 64) {
    out << "d = " << densities_line(profile.densities) << '\n';
    out << "d_canonical = " << densities_line(canon.densities) << '\n';
  }
  if (o.out) write_file(*o.out, to_json(profile));
  if (c_canon < c_star - 1e-12 || c_canon >= 2.0 * c_star + kSqrt2 / 6.0) {
    throw InternalError("canonical cost outside its guaranteed range");
  }
  return kExitOk;
}

struct Built {
  GridSpec grid{0};
  Popularity pop;
  int capacity = 1;
  CanonicalProfile canon;
  std::optional<DensityProfile> profile;
};

Built build_placement_inputs(const Options& o) {
  const GridSpec grid = resolve_grid(o);
  const double k = resolve_capacity(o);
  const int capacity = integer_capacity(k);
  auto pop = resolve_popularity(o, resolve_m(o, grid, k));
  if (o.levels) {
    std::vector<int> levels;
    for (long long v : parse_int_list(*o.levels)) levels.push_back(static_cast<int>(v));
    if (levels.size() != pop.size()) throw InvalidInput("--levels needs one entry per file");
    auto canon = canonical_from_levels(std::move(levels), grid.nu());
    return Built{grid, std::move(pop), capacity, std::move(canon), std::nullopt};
  }
  auto profile = solve_cd(grid.node_count(), k, pop);
  auto canon = canonical_truncate(profile);
  return Built{grid, std::move(pop), capacity, std::move(canon), std::move(profile)};
}

int cmd_place(const Options& o, std::ostream& out) {
  const Built b = build_placement_inputs(o);
  const auto placement = canonical_place(b.grid, b.canon, b.pop, b.capacity);
  const bool valid = validate_capacity(placement);
  out << render_matrix(placement);
  out << "valid = " << (valid ? "true" : "false") << '\n';
  if (o.out) write_file(*o.out, to_json(placement));
  if (!valid) throw InternalError("canonical placement violates capacity or coverage");
  return kExitOk;
}

LoadMethod parse_method(const std::optional<std::string>& m) {
  if (!m || *m == "auto") return LoadMethod::kAuto;
  if (*m == "tiled") return LoadMethod::kTiled;
  if (*m == "direct") return LoadMethod::kDirect;
  throw InvalidInput("--method must be auto, tiled or direct");
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const Built b = build_placement_inputs(o);
  if (b.grid.nu() < 1) throw InvalidInput("simulation needs nu >= 1");
  const auto placement = canonical_place(b.grid, b.canon, b.pop, b.capacity);
  if (!validate_capacity(placement)) throw InternalError("canonical placement violates capacity or coverage");
  const auto loads = link_loads(placement, b.pop, {parse_method(o.method), o.jobs});
  const double worst = worst_link(loads);
  const double avg = avg_link(loads);
  const double total = total_load(loads);
  const double demand = hop_weighted_demand(placement, b.pop);
  const double residual = std::abs(total - demand) / std::max(1.0, std::abs(demand));
  const double lb = lower_bound(measured_densities(placement), b.pop);
  const double c_canon = cd_cost(b.canon.densities, b.pop);
  const double avg_bound = 0.25 + 3.0 * kSqrt2 / 4.0 * c_canon;
  const double a00 = a_coeff(0, 0, b.capacity, b.grid.node_count(), b.pop);
  const double worst_bound = 2.5 + a00 + (1.5 * kSqrt2 + 2.0) * avg;

  out << "N = " << b.grid.node_count() << "\nM = " << b.pop.size() << "\nK = " << b.capacity << '\n';
  out << "C_WN = " << num(worst) << "\nC_AN = " << num(avg) << '\n';
  out << "load_identity_residual = " << num(residual) << '\n';
  out << "lower_bound = " << num(lb) << "\nlower_bound_margin = " << num(avg - lb) << '\n';
  out << "avg_bound = " << num(avg_bound) << "\navg_bound_margin = " << num(avg_bound - avg) << '\n';
  out << "worst_bound = " << num(worst_bound) << "\nworst_bound_margin = " << num(worst_bound - worst) << '\n';
  if (o.out) {
    nlohmann::ordered_json j;
    j["N"] = b.grid.node_count();
    j["M"] = b.pop.size();
    j["K"] = b.capacity;
    j["C_WN"] = round_significant(worst);
    j["C_AN"] = round_significant(avg);
    j["load_identity_residual"] = round_significant(residual);
    j["lower_bound"] = round_significant(lb);
    j["avg_bound"] = round_significant(avg_bound);
    j["worst_bound"] = round_significant(worst_bound);
    write_file(*o.out, j.dump(2));
  }
  const std::string csv = to_csv(loads);
  if (o.csv) {
    if (*o.csv == "-") {
      out << csv;
    } else {
      write_file(*o.csv, csv);
    }
  }
  if (residual > 1e-9) throw InternalError("link loads do not add up to the hop-weighted demand");
  if (avg < lb * (1.0 - 1e-12)) throw InternalError("average load below the density lower bound");
  if (avg > avg_bound * (1.0 + 1e-12)) throw InternalError("average load above the canonical bound");
  if (worst > worst_bound * (1.0 + 1e-12)) throw InternalError("worst load above the canonical bound");
  return kExitOk;
}

std::vector<int> resolve_nus(const Options& o) {
  if (!o.nus) throw InvalidInput("sweep needs --nus, e.g. 5-10 or 5,6,7");
  std::vector<int> nus;
  for (long long v : parse_int_list(*o.nus)) nus.push_back(static_cast<int>(v));
  return nus;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  if (o.pop_file) throw InvalidInput("sweep uses Zipf popularity; --pop-file is not supported");
  SweepScenario sc;
  sc.tau = o.tau.value_or(1.0);
  sc.capacity = resolve_capacity(o);
  sc.m_law = o.m_law.value_or(o.m_count ? std::to_string(*o.m_count) : "N");
  sc.nus = resolve_nus(o);
  sc.jobs = o.jobs;
  if (o.axis && *o.axis != "M" && *o.axis != "sqrtN") throw InvalidInput("--axis must be M or sqrtN");
  sc.axis = o.axis && *o.axis == "sqrtN" ? FitAxis::kSqrtN : FitAxis::kM;
  const auto result = sweep(sc);
  const std::string csv = to_csv(result);
  if (o.csv && *o.csv != "-") {
    write_file(*o.csv, csv);
  } else {
    out << csv;
  }
  out << "axis = " << (sc.axis == FitAxis::kM ? "M" : "sqrtN") << '\n';
  out << "predicted_exponent = " << num(result.predicted_exponent) << '\n';
  out << "fitted_exponent = " << num(result.fitted_exponent) << '\n';
  out << "fitted_exponent_log_corrected = " << num(result.fitted_exponent_log_corrected) << '\n';
  out << "fit_points = " << result.fit_points << '\n';
  if (o.out) {
    // One regime report per point, in sweep order.
    std::string doc = "[";
    for (std::size_t i = 0; i < result.points.size(); ++i) {
      const auto& p = result.points[i];
      doc += (i ? ",\n" : "\n") + to_json(classify_regime(p.tau, p.capacity, p.m_count, p.n_nodes));
    }
    write_file(*o.out, doc + "\n]\n");
  }
  for (const auto& p : result.points) {
    if (p.c > 3.0 * std::sqrt(static_cast<double>(p.n_nodes))) {
      throw InternalError("capacity exceeds 3 sqrt(N) at nu = " + std::to_string(p.nu));
    }
  }
  return kExitOk;
}

int cmd_classify(const Options& o, std::ostream& out) {
  const GridSpec grid = resolve_grid(o);
  const double k = resolve_capacity(o);
  const std::int64_t m = resolve_m(o, grid, k);
  if (m < 1) throw InvalidInput("classify needs --M or --m-law");
  const auto report = classify_regime(o.tau.value_or(1.0), k, m, grid.node_count());
  const std::string json = to_json(report);
  out << json << '\n';
  if (o.out) write_file(*o.out, json);
  return kExitOk;
}

int cmd_oracle(const Options& o, std::ostream& out) {
  const std::string kind = o.kind.value_or("an");
  nlohmann::ordered_json j;
  if (kind == "cluster") {
    const int level = o.level.value_or(1);
    const auto c = enumerate_cluster(level);
    const auto expected = cluster_hop_sum(level);
    out << "level = " << level << "\nhop_sum = " << c.hop_sum << "\nexpected_hop_sum = " << expected << '\n';
    out << "bounds_hold = " << (c.bounds_hold ? "true" : "false") << '\n';
    j["kind"] = kind;
    j["level"] = level;
    j["hop_sum"] = c.hop_sum;
    j["bounds_hold"] = c.bounds_hold;
    if (o.out) write_file(*o.out, j.dump(2));
    if (c.hop_sum != expected) throw InternalError("cluster hop sum differs from its closed form");
    return kExitOk;
  }
  const GridSpec grid = resolve_grid(o);
  const double k = resolve_capacity(o);
  const auto pop = resolve_popularity(o, resolve_m(o, grid, k));
  if (kind == "cd") {
    const double res = o.resolution.value_or(0.01);
    const auto oracle = brute_force_cd(grid.node_count(), k, pop, res);
    const auto profile = solve_cd(grid.node_count(), k, pop);
    const double exact = cd_cost(profile, pop);
    out << "grid_minimum = " << num(oracle.value) << "\nsolver_value = " << num(exact) << '\n';
    out << "grid_points = " << oracle.points << '\n';
    j["kind"] = kind;
    j["grid_minimum"] = round_significant(oracle.value);
    j["solver_value"] = round_significant(exact);
    if (o.out) write_file(*o.out, j.dump(2));
    if (exact > oracle.value + 1e-12) throw InternalError("solver value above the grid minimum");
    return kExitOk;
  }
  if (kind != "an") throw InvalidInput("--kind must be an, cd or cluster");
  const int capacity = integer_capacity(k);
  const auto oracle = brute_force_an(grid, capacity, pop, o.jobs);
  const auto canon = canonical_truncate(solve_cd(grid.node_count(), k, pop));
  const auto placement = canonical_place(grid, canon, pop, capacity);
  const double canonical_avg = avg_link(link_loads(placement, pop, {LoadMethod::kAuto, o.jobs}));
  const double bound = 0.5 + 1.5 * kSqrt2 * oracle.best_avg_load;
  out << "best_avg_load = " << num(oracle.best_avg_load) << "\ninstances_examined = " << oracle.instances_examined
      << '\n';
  out << "canonical_avg_load = " << num(canonical_avg) << "\norder_bound = " << num(bound) << '\n';
  out << render_matrix(oracle.best_placement);
  j["kind"] = kind;
  j["N"] = grid.node_count();
  j["K"] = capacity;
  std::vector<double> probs;
  for (double v : pop.probs()) probs.push_back(round_significant(v));
  j["probs"] = std::move(probs);
  j["best_avg_load"] = round_significant(oracle.best_avg_load);
  j["instances_examined"] = oracle.instances_examined;
  if (o.out) write_file(*o.out, j.dump(2));
  if (canonical_avg > bound * (1.0 + 1e-12)) throw InternalError("canonical load above the order bound");
  return kExitOk;
}

void add_scenario_options(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON file with option values; command-line flags win");
  sub->add_option("--jobs", o.jobs, "worker threads (default: REPLICA_GRID_JOBS or 1)");
  sub->add_option("--seed", o.seed, "seed for --random popularity");
  sub->add_option("--nu", o.nu, "grid exponent, N = 4^nu");
  sub->add_option("--N", o.n_nodes, "number of nodes (power of 4)");
  sub->add_option("--M", o.m_count, "number of files");
  sub->add_option("--m-law", o.m_law, "M as an expression in N and K, e.g. 0.1*K*N");
  sub->add_option("--K", o.capacity, "cache slots per node (default 1)");
  sub->add_option("--tau", o.tau, "Zipf exponent (default 1)");
  sub->add_option("--pop-file", o.pop_file, "popularity file, one probability per line");
  sub->add_flag("--random", o.random_pop, "random nonincreasing popularity drawn from --seed");
  sub->add_option("--out", o.out, "write the JSON result to this file");
}

int dispatch(CLI::App& app, std::map<CLI::App*, int (*)(const Options&, std::ostream&)>& cmds, Options& o,
             std::ostream& out) {
  for (auto& [sub, fn] : cmds) {
    if (sub->parsed()) {
      if (!o.config.empty()) merge_config(o.config, *sub, o);
      return fn(o, out);
    }
  }
  (void)app;
  throw InvalidInput("no command given");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Replica placement and link-load engine for toroidal grid networks", "replica_grid"};
  app.require_subcommand(1);
  std::map<CLI::App*, int (*)(const Options&, std::ostream&)> cmds;

  auto* solve = app.add_subcommand("solve", "optimal replication densities and their canonical truncation");
  add_scenario_options(solve, o);
  cmds[solve] = &cmd_solve;

  auto* place = app.add_subcommand("place", "canonical cache placement");
  add_scenario_options(place, o);
  place->add_option("--levels", o.levels, "explicit levels per file, e.g. 1x3,2x19,3x3");
  cmds[place] = &cmd_place;

  auto* simulate = app.add_subcommand("simulate", "link loads of the canonical placement");
  add_scenario_options(simulate, o);
  simulate->add_option("--levels", o.levels, "explicit levels per file");
  simulate->add_option("--csv", o.csv, "write per-link loads as CSV ('-' for stdout)");
  simulate->add_option("--method", o.method, "auto, tiled or direct");
  cmds[simulate] = &cmd_simulate;

  auto* sweep_cmd = app.add_subcommand("sweep", "capacity scaling sweep with slope fit");
  add_scenario_options(sweep_cmd, o);
  sweep_cmd->add_option("--nus", o.nus, "grid exponents, e.g. 5-10");
  sweep_cmd->add_option("--axis", o.axis, "fit against M (default) or sqrtN");
  sweep_cmd->add_option("--csv", o.csv, "write the sweep table here instead of stdout");
  cmds[sweep_cmd] = &cmd_sweep;

  auto* classify = app.add_subcommand("classify", "asymptotic regime of one instance");
  add_scenario_options(classify, o);
  cmds[classify] = &cmd_classify;

  auto* oracle = app.add_subcommand("oracle", "brute-force baselines on tiny instances");
  add_scenario_options(oracle, o);
  oracle->add_option("--kind", o.kind, "an (default), cd or cluster");
  oracle->add_option("--resolution", o.resolution, "grid step for --kind cd (default 0.01)");
  oracle->add_option("--level", o.level, "cluster level for --kind cluster");
  cmds[oracle] = &cmd_oracle;

  std::vector<std::string> argv_store = args;
  if (argv_store.empty()) argv_store.emplace_back("replica_grid");
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    o.jobs = jobs_from_env();
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    return dispatch(app, cmds, o, out);
  } catch (const Infeasible& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace replica_grid::cli
