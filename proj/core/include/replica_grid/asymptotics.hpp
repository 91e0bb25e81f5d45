#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "replica_grid/density_solver.hpp"
#include "replica_grid/popularity.hpp"

namespace replica_grid {

// C = sum_m (d_m^{-1/2} - 1) p_m on the optimal densities and its split
// C = c_mid + c_down - tail.
struct CapacityBreakdown {
  double c_total = 0.0;
  double c_mid = 0.0;    // sum over interior files of p / sqrt(d)
  double c_down = 0.0;   // sqrt(N) * mass of the files stored once
  double k_mid = 0.0;    // capacity left to the interior block, ((K - l + 1) N - (M - r + 1)) / N
  double tail = 0.0;     // sum_{m >= l} p_m
  // Zipf closed form of c_mid, from harmonic sums; NaN for other popularities
  // or when the interior block is empty.
  double c_mid_closed_form = 0.0;
  std::size_t l_index = 1;
  std::size_t r_index = 1;
};

CapacityBreakdown analytic_capacity(std::int64_t n_nodes, double capacity, const Popularity& pop);
CapacityBreakdown analytic_capacity(const DensityProfile& profile, const Popularity& pop);

// Limit of l. 1 for tau <= 3/2; otherwise the lowest l >= 2 satisfying the
// two-sided zeta condition, 1 if there is none.
std::size_t estimate_l_hat(double tau, double capacity);

// As above, but when M exceeds the almost-empty threshold and tau > 3/2 the
// capacity is reduced by M/N first.
std::size_t estimate_l_hat(double tau, double capacity, std::int64_t m_count, std::int64_t n_nodes);

// Largest M for which the once-stored set stays almost empty. For tau = 3/2
// this is the root of M ln M = KN.
double almost_empty_threshold(double tau, double capacity, std::int64_t n_nodes);

// Constant h of the tau > 3/2 threshold h N^{3/(2 tau)}.
double threshold_h(double tau, double capacity);

double estimate_r_hat(double tau, double capacity, std::int64_t m_count, std::int64_t n_nodes);

struct PredictedLaw {
  double m_exponent = 0.0;      // C ~ M^a
  double log_exponent = 0.0;    // times (ln x)^b, x named in log_argument
  double slack_exponent = 0.0;  // times (KN - M)^c
  std::string log_argument = "M";
  std::string formula;
};

struct RegimeReport {
  double tau = 0.0;
  double capacity = 0.0;
  std::int64_t m_count = 0;
  std::int64_t n_nodes = 0;
  std::string regime;            // almost_empty, nonempty, nonempty_l_hat, nonempty_l_one, near_capacity, zero_slack
  double threshold = 0.0;        // almost-empty bound on M
  std::size_t predicted_l_hat = 1;
  double predicted_r_hat = 0.0;
  PredictedLaw predicted_law;
  std::string truncation_state;  // empty, almost_empty, nonempty (from the exact solve)
  std::size_t exact_l = 1;
  std::size_t exact_r = 1;
};

// Throws Infeasible when KN < M.
RegimeReport classify_regime(double tau, double capacity, std::int64_t m_count, std::int64_t n_nodes);

PredictedLaw predicted_law(double tau, std::string_view regime);

std::string to_json(const RegimeReport& report);

// Evaluates an M(N, K) expression such as "0.1*K*N", "N^0.6", "K*N - 3" or
// "floor(N^0.6)". The result is floored to an integer. Throws InvalidInput
// on a syntax error.
std::int64_t evaluate_m_law(std::string_view expr, std::int64_t n_nodes, double capacity);

enum class FitAxis { kM, kSqrtN };

struct SweepScenario {
  double tau = 1.0;
  double capacity = 1.0;
  std::string m_law = "N";
  std::vector<int> nus;
  FitAxis axis = FitAxis::kM;
  int jobs = 1;
};

struct SweepPoint {
  int nu = 0;
  std::int64_t n_nodes = 0;
  std::int64_t m_count = 0;
  double capacity = 0.0;
  double tau = 0.0;
  double c = 0.0;
  std::size_t l_index = 1;
  std::size_t r_index = 1;
  std::string regime;
  double predicted_exponent = 0.0;
  double predicted_log_exponent = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double fitted_exponent = 0.0;
  double fitted_exponent_log_corrected = 0.0;  // after dividing out the predicted log factor
  double predicted_exponent = 0.0;             // of the largest point
  std::size_t fit_points = 0;
};

// Least-squares slope of ln y against ln x over the points whose x lies in
// the top decade, widened to the last three points if the decade has fewer.
// Throws InvalidInput with fewer than three points.
double fit_top_decade_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t* used = nullptr);

// Throws InvalidInput with fewer than three points and Infeasible when a
// point has KN < M.
SweepResult sweep(const SweepScenario& scenario);

// nu,N,M,K,tau,C,l,r,regime,predicted_exponent,fitted_exponent
std::string to_csv(const SweepResult& result);

}  // namespace replica_grid
