#include "replica_grid/popularity.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "replica_grid/error.hpp"

namespace replica_grid {

namespace {

constexpr double kNormTolerance = 1e-12;

// (a^{1-tau} - b^{1-tau}) / (1 - tau), continuous through tau = 1 where it
// becomes ln(a / b).
double power_integral(double tau, double a, double b) {
  const double e = 1.0 - tau;
  const double log_ratio = std::log(a) - std::log(b);
  if (std::abs(e) < 1e-12) return log_ratio;
  return std::pow(b, e) * std::expm1(e * log_ratio) / e;
}

class NeumaierSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

double compensated_sum(std::span<const double> values) {
  NeumaierSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

double harmonic(double tau, std::uint64_t n) {
  NeumaierSum acc;
  // smallest terms first
  for (std::uint64_t j = n; j >= 1; --j) acc.add(std::pow(static_cast<double>(j), -tau));
  return acc.value();
}

HarmonicBounds harmonic_bounds(double tau, std::uint64_t m, std::uint64_t n) {
  if (m > n) {
    throw InvalidInput("harmonic_bounds requires m <= n (m=" + std::to_string(m) +
                       ", n=" + std::to_string(n) + ")");
  }
  if (n == 0) return {0.0, 0.0};
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  HarmonicBounds b;
  b.lo = power_integral(tau, nd + 1.0, md + 1.0);
  b.hi = 1.0 + power_integral(tau, nd, md + 1.0);
  return b;
}

double riemann_zeta(double s) {
  if (!(s > 1.0)) throw InvalidInput("riemann_zeta requires s > 1");
  // sum_{j<n} j^-s, then the Euler-Maclaurin tail sum_{j>=n} j^-s.
  constexpr std::uint64_t n = 1000;
  const double head = harmonic(s, n - 1);
  const double nd = static_cast<double>(n);
  const double f = std::pow(nd, -s);
  const double tail = nd * f / (s - 1.0) + 0.5 * f + s * f / (12.0 * nd) -
                      s * (s + 1.0) * (s + 2.0) * f / (720.0 * nd * nd * nd) +
                      s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * f /
                          (30240.0 * nd * nd * nd * nd * nd);
  return head + tail;
}

Popularity Popularity::zipf(std::size_t m_count, double tau) {
  if (m_count == 0) throw InvalidInput("zipf requires at least one file");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidInput("zipf requires tau >= 0");
  std::vector<double> probs(m_count);
  for (std::size_t m = 0; m < m_count; ++m) probs[m] = std::pow(static_cast<double>(m + 1), -tau);
  const double h = harmonic(tau, m_count);
  for (double& p : probs) p /= h;
  return Popularity(std::move(probs), tau);
}

Popularity Popularity::from_probabilities(std::vector<double> probs) {
  if (probs.empty()) throw InvalidInput("popularity vector is empty");
  for (std::size_t m = 0; m < probs.size(); ++m) {
    if (!(probs[m] > 0.0) || !std::isfinite(probs[m])) {
      throw InvalidInput("probability of file " + std::to_string(m + 1) + " must be positive");
    }
    if (m > 0 && probs[m] > probs[m - 1]) {
      throw InvalidInput("popularity must be nonincreasing (file " + std::to_string(m + 1) +
                         " exceeds file " + std::to_string(m) + ")");
    }
  }
  const double total = compensated_sum(probs);
  if (std::abs(total - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "popularity must sum to 1 within 1e-12, got " << total;
    throw InvalidInput(os.str());
  }
  return Popularity(std::move(probs), std::nullopt);
}

Popularity Popularity::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open popularity file " + path.string());
  std::vector<double> probs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream is(line.substr(first));
    is.imbue(std::locale::classic());
    double p = 0.0;
    std::string rest;
    if (!(is >> p) || (is >> rest)) {
      throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": expected one number");
    }
    probs.push_back(p);
  }
  return from_probabilities(std::move(probs));
}

}  // namespace replica_grid
