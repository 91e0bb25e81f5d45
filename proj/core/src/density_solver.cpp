#include "replica_grid/density_solver.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "replica_grid/error.hpp"
#include "replica_grid/format.hpp"

namespace replica_grid {

namespace {

constexpr double kCostScale = 1.4142135623730951 / 6.0;  // sqrt(2) / 6
constexpr long double kAcceptTol = 1e-12L;

// Search over the saturated / interior / floor block split. Indices 1-based.
class PartitionSearch {
 public:
  PartitionSearch(std::int64_t n_nodes, double capacity, const Popularity& pop)
      : n_(static_cast<long double>(n_nodes)),
        k_(capacity),
        m_(pop.size()),
        pop_(pop),
        q_(pop.size()),
        prefix_(pop.size() + 1, 0.0L) {
    for (std::size_t i = 0; i < m_; ++i) {
      q_[i] = std::pow(static_cast<long double>(pop[i]), 2.0L / 3.0L);
      prefix_[i + 1] = prefix_[i] + q_[i];
    }
  }

  std::size_t max_l() const {
    const auto whole = static_cast<std::size_t>(std::floor(k_));
    return std::min(whole, m_) + 1;
  }

  bool feasible_l(std::size_t l) const {
    const long double lm = static_cast<long double>(l);
    const long double md = static_cast<long double>(m_);
    return n_ * (k_ - (lm - 1)) - (md - lm + 1) >= -kAcceptTol * n_ * k_;
  }

  // Tries l as the first non-saturated file; fills out on success.
  bool try_l(std::size_t l, DensityProfile& out) const {
    if (!feasible_l(l)) return false;
    const std::size_t r = find_r(l);
    if (r > l) {
      const long double b = residual(l, r) / interior_mass(l, r);
      if (b * q(l) >= 1.0L + kAcceptTol) return false;
      if (l > 1 && b * q(l - 1) < 1.0L - kAcceptTol) return false;
      fill(l, r, b, out);
      out.mu = static_cast<double>(0.5L / (b * std::sqrt(b)));
      return true;
    }
    // Empty interior: the saturated blocks exhaust the capacity exactly and a
    // multiplier must exist between the two marginals.
    const long double n_sqrt3 = n_ * std::sqrt(n_);
    if (l > 1 && static_cast<long double>(pop_[l - 2]) <
                     n_sqrt3 * static_cast<long double>(pop_[l - 1]) * (1.0L - kAcceptTol)) {
      return false;
    }
    fill(l, r, 0.0L, out);
    out.mu = static_cast<double>(0.5L * n_sqrt3 * static_cast<long double>(pop_[l - 1]));
    return true;
  }

 private:
  long double q(std::size_t m) const { return q_[m - 1]; }
  long double interior_mass(std::size_t l, std::size_t r) const { return prefix_[r - 1] - prefix_[l - 1]; }
  long double residual(std::size_t l, std::size_t r) const {
    return (k_ - static_cast<long double>(l - 1)) - static_cast<long double>(m_ - r + 1) / n_;
  }

  // d_{r-1} > 1/N under partition (l, r). True on a prefix of r > l.
  bool above_floor(std::size_t l, std::size_t r) const {
    return n_ * residual(l, r) * q(r - 1) > interior_mass(l, r);
  }

  std::size_t find_r(std::size_t l) const {
    if (l + 1 > m_ + 1 || !above_floor(l, l + 1)) return l;
    std::size_t good = l + 1;
    std::size_t bad = m_ + 2;  // sentinel
    while (bad - good > 1) {
      const std::size_t mid = good + (bad - good) / 2;
      if (above_floor(l, mid)) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    return good;
  }

  void fill(std::size_t l, std::size_t r, long double b, DensityProfile& out) const {
    const double floor_density = static_cast<double>(1.0L / n_);
    out.densities.assign(m_, floor_density);
    for (std::size_t m = 1; m < l; ++m) out.densities[m - 1] = 1.0;
    for (std::size_t m = l; m < r; ++m) {
      const double d = static_cast<double>(b * q(m));
      out.densities[m - 1] = std::clamp(d, floor_density, 1.0);
    }
    out.l_index = l;
    out.r_index = r;
  }

  long double n_;
  long double k_;
  std::size_t m_;
  const Popularity& pop_;
  std::vector<long double> q_;
  std::vector<long double> prefix_;
};

}  // namespace

DensityProfile solve_cd(std::int64_t n_nodes, double capacity, const Popularity& pop,
                        const SolveOptions& options) {
  if (n_nodes < 1) throw InvalidInput("number of nodes must be positive");
  if (!(capacity > 0.0) || !std::isfinite(capacity)) throw InvalidInput("cache capacity must be positive");
  const std::size_t m_count = pop.size();
  if (capacity * static_cast<double>(n_nodes) < static_cast<double>(m_count)) {
    throw Infeasible("infeasible: KN < M");
  }
  for (std::size_t m = 1; m < m_count; ++m) {
    if (pop[m] > pop[m - 1]) throw InvalidInput("popularity must be nonincreasing");
  }

  DensityProfile out;
  out.n_nodes = n_nodes;
  out.capacity = capacity;
  if (capacity >= static_cast<double>(m_count)) {
    out.densities.assign(m_count, 1.0);
    out.l_index = out.r_index = m_count + 1;
    out.mu = 0.0;
    return out;
  }

  const PartitionSearch search(n_nodes, capacity, pop);
  const std::size_t top = search.max_l();
  if (options.descending_scan) {
    for (std::size_t l = top; l >= 1; --l) {
      if (search.try_l(l, out)) return out;
    }
  } else {
    for (std::size_t l = 1; l <= top; ++l) {
      if (!search.feasible_l(l)) break;
      if (search.try_l(l, out)) return out;
    }
  }
  throw InternalError("density solver found no partition satisfying the optimality conditions");
}

double cd_cost(std::span<const double> densities, const Popularity& pop) {
  if (densities.size() != pop.size()) throw InvalidInput("density and popularity sizes differ");
  std::vector<double> terms(densities.size());
  for (std::size_t m = 0; m < densities.size(); ++m) {
    terms[m] = (1.0 / std::sqrt(densities[m]) - 1.0) * pop[m];
  }
  return kCostScale * compensated_sum(terms);
}

double lower_bound(std::span<const double> densities, const Popularity& pop) {
  return cd_cost(densities, pop);
}

CanonicalProfile canonical_truncate(std::span<const double> densities, std::int64_t n_nodes) {
  int nu = 0;
  for (std::int64_t n = 1; n < n_nodes; n *= 4) ++nu;
  if ((std::int64_t{1} << (2 * nu)) != n_nodes) {
    throw InvalidInput("canonical truncation needs N = 4^nu, got N = " + std::to_string(n_nodes));
  }
  std::vector<int> levels(densities.size());
  for (std::size_t m = 0; m < densities.size(); ++m) {
    int k = 0;
    while (k < nu && std::ldexp(1.0, -2 * k) > densities[m]) ++k;
    levels[m] = k;
  }
  return canonical_from_levels(std::move(levels), nu);
}

CanonicalProfile canonical_truncate(const DensityProfile& profile) {
  return canonical_truncate(profile.densities, profile.n_nodes);
}

CanonicalProfile canonical_from_levels(std::vector<int> levels, int nu) {
  CanonicalProfile c;
  c.nu = nu;
  c.level_sets.resize(static_cast<std::size_t>(nu) + 1);
  c.densities.resize(levels.size());
  for (std::size_t m = 0; m < levels.size(); ++m) {
    if (levels[m] < 0 || levels[m] > nu) {
      throw InvalidInput("level of file " + std::to_string(m + 1) + " outside [0, nu]");
    }
    c.densities[m] = std::ldexp(1.0, -2 * levels[m]);
    c.level_sets[static_cast<std::size_t>(levels[m])].push_back(m);
  }
  c.levels = std::move(levels);
  return c;
}

double a_coeff(std::int64_t i, std::int64_t j, double capacity, std::int64_t n_nodes,
               const Popularity& pop) {
  if (i < 0 || j < 0 || n_nodes < 1) throw InvalidInput("a_coeff requires i, j >= 0 and N >= 1");
  const double denom = capacity - static_cast<double>(i) - static_cast<double>(j) / static_cast<double>(n_nodes);
  if (std::abs(denom) <= 1e-12 * std::max(1.0, capacity)) return 1.0;
  if (denom < 0.0) throw InvalidInput("a_coeff denominator K - i - j/N is negative");
  const auto m_count = static_cast<std::int64_t>(pop.size());
  std::vector<double> terms;
  for (std::int64_t k = i + 1; k <= m_count - j; ++k) {
    terms.push_back(std::pow(pop[static_cast<FileId>(k - 1)], 2.0 / 3.0));
  }
  return compensated_sum(terms) / denom;
}

double KktReport::worst() const {
  return std::max({interior_residual, upper_violation, lower_violation, capacity_residual, bound_violation});
}

KktReport kkt_check(const DensityProfile& profile, const Popularity& pop) {
  KktReport rep;
  const double floor_density = 1.0 / static_cast<double>(profile.n_nodes);
  const double mu = profile.mu;
  for (std::size_t i = 0; i < profile.densities.size(); ++i) {
    const std::size_t m = i + 1;
    const double d = profile.densities[i];
    rep.bound_violation = std::max({rep.bound_violation, floor_density - d, d - 1.0});
    const double marginal = 0.5 * pop[i] / (d * std::sqrt(d));
    if (mu <= 0.0) continue;
    if (m < profile.l_index) {
      rep.upper_violation = std::max(rep.upper_violation, (mu - marginal) / mu);
    } else if (m < profile.r_index) {
      rep.interior_residual = std::max(rep.interior_residual, std::abs(marginal - mu) / mu);
    } else {
      rep.lower_violation = std::max(rep.lower_violation, (marginal - mu) / mu);
    }
  }
  const double total = compensated_sum(profile.densities);
  if (profile.capacity < static_cast<double>(profile.densities.size())) {
    rep.capacity_residual = std::abs(total - profile.capacity);
  } else {
    rep.capacity_residual = std::max(0.0, total - profile.capacity);
  }
  return rep;
}

std::string to_json(const DensityProfile& profile) {
  nlohmann::ordered_json j;
  j["n_nodes"] = profile.n_nodes;
  j["capacity"] = round_significant(profile.capacity);
  j["l"] = profile.l_index;
  j["r"] = profile.r_index;
  j["mu"] = round_significant(profile.mu);
  std::vector<double> densities;
  densities.reserve(profile.densities.size());
  for (double d : profile.densities) densities.push_back(round_significant(d));
  j["densities"] = std::move(densities);
  return j.dump(2);
}

DensityProfile density_profile_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DensityProfile p;
    p.n_nodes = j.at("n_nodes").get<std::int64_t>();
    p.capacity = j.at("capacity").get<double>();
    p.l_index = j.at("l").get<std::size_t>();
    p.r_index = j.at("r").get<std::size_t>();
    p.mu = j.at("mu").get<double>();
    p.densities = j.at("densities").get<std::vector<double>>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed density profile JSON: ") + e.what());
  }
}

}  // namespace replica_grid
