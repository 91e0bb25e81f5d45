#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace replica_grid {

using FileId = std::size_t;  // 0-based; file m of the model is FileId m - 1

// Request distribution over M files. Probabilities are strictly positive,
// nonincreasing in the file index and sum to one within 1e-12.
class Popularity {
 public:
  // p_m = m^-tau / H_tau(M).
  static Popularity zipf(std::size_t m_count, double tau);

  // Validates positivity, monotonicity and normalization.
  static Popularity from_probabilities(std::vector<double> probs);

  // Plain text, one probability per line. Blank lines and lines starting
  // with '#' are skipped.
  static Popularity load(const std::filesystem::path& path);

  std::size_t size() const { return probs_.size(); }
  double operator[](FileId m) const { return probs_[m]; }
  std::span<const double> probs() const { return probs_; }
  std::optional<double> tau() const { return tau_; }

 private:
  Popularity(std::vector<double> probs, std::optional<double> tau)
      : probs_(std::move(probs)), tau_(tau) {}

  std::vector<double> probs_;
  std::optional<double> tau_;
};

// Generalized harmonic number H_tau(n) = sum_{j=1}^{n} j^-tau, compensated.
double harmonic(double tau, std::uint64_t n);

struct HarmonicBounds {
  double lo = 0.0;
  double hi = 0.0;
};

// Integral bracket of H_tau(n) - H_tau(m) for 0 <= m <= n.
HarmonicBounds harmonic_bounds(double tau, std::uint64_t m, std::uint64_t n);

// Riemann zeta for s > 1: direct summation plus an Euler-Maclaurin tail,
// accurate to well below 1e-10.
double riemann_zeta(double s);

// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

}  // namespace replica_grid
