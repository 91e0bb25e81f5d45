#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "replica_grid/popularity.hpp"

namespace replica_grid {

// Optimal continuous replication densities.
//
// Files are split into three consecutive blocks (1-based indices, as in the
// model): m < l are stored everywhere (d = 1), l <= m < r are interior with
// d proportional to p_m^{2/3}, and m >= r are stored once (d = 1/N).
struct DensityProfile {
  std::vector<double> densities;
  std::size_t l_index = 1;
  std::size_t r_index = 1;
  double mu = 0.0;  // multiplier of the capacity constraint
  std::int64_t n_nodes = 1;
  double capacity = 1.0;
};

// Densities truncated down to powers of 1/4.
struct CanonicalProfile {
  int nu = 0;
  std::vector<int> levels;        // d_m = 4^-levels[m]
  std::vector<double> densities;
  std::vector<std::vector<FileId>> level_sets;  // level_sets[k] = files at level k, ascending
};

struct SolveOptions {
  // Scan the up-truncated block size from the top instead of from l = 1.
  // The optimum is unique, so the result must not depend on this.
  bool descending_scan = false;
};

// Minimizes sum_m p_m (d_m^{-1/2} - 1) over 1/N <= d_m <= 1, sum d_m <= K.
// Throws Infeasible when K*N < M and InvalidInput on bad arguments.
DensityProfile solve_cd(std::int64_t n_nodes, double capacity, const Popularity& pop,
                        const SolveOptions& options = {});

// (sqrt 2 / 6) sum_m (d_m^{-1/2} - 1) p_m.
double cd_cost(std::span<const double> densities, const Popularity& pop);
inline double cd_cost(const DensityProfile& profile, const Popularity& pop) {
  return cd_cost(profile.densities, pop);
}

// Lower bound on the average link load of any placement whose densities are
// given. Same expression as cd_cost; applied to measured densities.
double lower_bound(std::span<const double> densities, const Popularity& pop);

// Requires n_nodes == 4^nu; throws InvalidInput otherwise.
CanonicalProfile canonical_truncate(const DensityProfile& profile);
CanonicalProfile canonical_truncate(std::span<const double> densities, std::int64_t n_nodes);

// Builds a canonical profile from explicit levels (used for prescribed layouts).
CanonicalProfile canonical_from_levels(std::vector<int> levels, int nu);

// Worst-link additive coefficient:
// A_{i,j} = sum_{k=i+1}^{M-j} p_k^{2/3} / (K - i - j/N), or 1 when the
// denominator is zero. Throws InvalidInput when it is negative.
double a_coeff(std::int64_t i, std::int64_t j, double capacity, std::int64_t n_nodes,
               const Popularity& pop);

struct KktReport {
  double interior_residual = 0.0;   // max relative |(p/2) d^{-3/2} - mu| / mu
  double upper_violation = 0.0;     // max relative shortfall of marginal below mu at d = 1
  double lower_violation = 0.0;     // max relative excess of marginal above mu at d = 1/N
  double capacity_residual = 0.0;   // |sum d - K| when K < M, else max(0, sum d - K)
  double bound_violation = 0.0;     // max distance outside [1/N, 1]

  double worst() const;
};

KktReport kkt_check(const DensityProfile& profile, const Popularity& pop);

std::string to_json(const DensityProfile& profile);
DensityProfile density_profile_from_json(std::string_view text);

}  // namespace replica_grid
