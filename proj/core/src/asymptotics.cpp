#include "replica_grid/asymptotics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "replica_grid/error.hpp"
#include "replica_grid/format.hpp"
#include "replica_grid/parallel.hpp"

namespace replica_grid {

namespace {

constexpr double kCriticalTau = 1.5;
constexpr double kTauEps = 1e-12;
constexpr double kExactFallbackTau = 0.05;
constexpr std::size_t kMaxLScan = 1000000;

bool is_critical(double tau) { return std::abs(tau - kCriticalTau) <= kTauEps; }

void check_instance(double tau, double capacity, std::int64_t m_count, std::int64_t n_nodes) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidInput("tau must be a finite value >= 0");
  if (!(capacity > 0.0) || !std::isfinite(capacity)) throw InvalidInput("cache capacity must be positive");
  if (m_count < 1 || n_nodes < 1) throw InvalidInput("M and N must be positive");
  if (capacity * static_cast<double>(n_nodes) < static_cast<double>(m_count)) throw Infeasible("infeasible: KN < M");
}

// Lowest l >= 2 with
//   (K - l + 1) l^-s < zeta(s) - H_s(l - 1)  and  (K - l + 2)(l - 1)^-s >= zeta(s) - H_s(l - 2),
// s = 2 tau / 3 > 1.
std::size_t zeta_l_scan(double tau, double capacity) {
  if (tau <= kCriticalTau + kTauEps) return 1;
  const double s = 2.0 * tau / 3.0;
  const double zeta = riemann_zeta(s);
  const double top = std::min(std::floor(capacity) + 1.0, static_cast<double>(kMaxLScan));
  double h_prev2 = 0.0;  // H_s(l - 2)
  double h_prev1 = 1.0;  // H_s(l - 1)
  for (std::size_t l = 2; static_cast<double>(l) <= top; ++l) {
    const double ld = static_cast<double>(l);
    const bool below = (capacity - ld + 1.0) * std::pow(ld, -s) < zeta - h_prev1;
    const bool above = (capacity - ld + 2.0) * std::pow(ld - 1.0, -s) >= zeta - h_prev2;
    if (below && above) return l;
    h_prev2 = h_prev1;
    h_prev1 += std::pow(ld, -s);
  }
  return 1;
}

// Root of x ln x = target on [lo, hi] by bisection.
double solve_x_log_x(double target, double lo, double hi) {
  if (lo * std::log(lo) >= target) return lo;
  if (hi * std::log(hi) <= target) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mid * std::log(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Smallest r >= 1 with
//   slack + r - 1 > (r - 1)^s H_s(r - 1)  (vacuous at r = 1)  and  slack + r <= r^s H_s(r).
double zero_slack_r(double tau, double slack, std::int64_t m_count) {
  const double s = 2.0 * tau / 3.0;
  double h_prev = 0.0;
  for (std::int64_t r = 1; r <= m_count + 1; ++r) {
    const double rd = static_cast<double>(r);
    const double h = h_prev + std::pow(rd, -s);
    const bool first = r == 1 || slack + rd - 1.0 > std::pow(rd - 1.0, s) * h_prev;
    const bool second = slack + rd <= std::pow(rd, s) * h;
    if (first && second) return rd;
    h_prev = h;
  }
  return static_cast<double>(m_count + 1);
}

bool almost_empty(double tau, double capacity, std::int64_t m_count, std::int64_t n_nodes) {
  return static_cast<double>(m_count) <= almost_empty_threshold(tau, capacity, n_nodes);
}

double slack_of(double capacity, std::int64_t m_count, std::int64_t n_nodes) {
  return capacity * static_cast<double>(n_nodes) - static_cast<double>(m_count);
}

std::string classify_label(double tau, double capacity, std::int64_t m_count, std::int64_t n_nodes) {
  const double n = static_cast<double>(n_nodes);
  const double slack = slack_of(capacity, m_count, n_nodes);
  if (slack <= std::sqrt(n)) return "zero_slack";
  if (almost_empty(tau, capacity, m_count, n_nodes)) return "almost_empty";
  if (slack / (capacity * n) <= std::pow(n, -0.25)) return "near_capacity";
  if (tau > kCriticalTau + kTauEps) {
    const double beta = 3.0 / (2.0 * tau - 3.0);
    return static_cast<double>(m_count) <= (capacity - beta) * n ? "nonempty_l_hat" : "nonempty_l_one";
  }
  return "nonempty";
}

}  // namespace

CapacityBreakdown analytic_capacity(const DensityProfile& profile, const Popularity& pop) {
  if (profile.densities.size() != pop.size()) throw InvalidInput("profile and popularity sizes differ");
  CapacityBreakdown b;
  b.l_index = profile.l_index;
  b.r_index = profile.r_index;
  const std::size_t l = profile.l_index;
  const std::size_t r = profile.r_index;
  const double sqrt_n = std::sqrt(static_cast<double>(profile.n_nodes));
  std::vector<double> total;
  std::vector<double> mid;
  std::vector<double> down;
  std::vector<double> tail;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const std::size_t m = i + 1;
    const double p = pop[i];
    const double inv = 1.0 / std::sqrt(profile.densities[i]);
    total.push_back((inv - 1.0) * p);
    if (m >= l) tail.push_back(p);
    if (m >= l && m < r) mid.push_back(p * inv);
    if (m >= r) down.push_back(p * sqrt_n);
  }
  b.c_total = compensated_sum(total);
  b.c_mid = compensated_sum(mid);
  b.c_down = compensated_sum(down);
  b.tail = compensated_sum(tail);
  const double n = static_cast<double>(profile.n_nodes);
  const double m_count = static_cast<double>(pop.size());
  b.k_mid = ((profile.capacity - static_cast<double>(l) + 1.0) * n - (m_count - static_cast<double>(r) + 1.0)) / n;

  b.c_mid_closed_form = std::numeric_limits<double>::quiet_NaN();
  if (pop.tau() && r > l && b.k_mid > 0.0) {
    const double tau = *pop.tau();
    const double s = 2.0 * tau / 3.0;
    const double span = harmonic(s, r - 1) - harmonic(s, l - 1);
    b.c_mid_closed_form = std::pow(span, 1.5) / (std::sqrt(b.k_mid) * harmonic(tau, pop.size()));
  } else if (r <= l) {
    b.c_mid_closed_form = 0.0;
  }
  return b;
}

CapacityBreakdown analytic_capacity(std::int64_t n_nodes, double capacity, const Popularity& pop) {
  return analytic_capacity(solve_cd(n_nodes, capacity, pop), pop);
}

std::size_t estimate_l_hat(double tau, double capacity) {
  if (!(tau >= 0.0)) throw InvalidInput("tau must be >= 0");
  if (!(capacity > 0.0)) throw InvalidInput("cache capacity must be positive");
  return zeta_l_scan(tau, capacity);
}

std::size_t estimate_l_hat(double tau, double capacity, std::int64_t m_count, std::int64_t n_nodes) {
  const std::size_t l0 = estimate_l_hat(tau, capacity);
  if (tau <= kCriticalTau + kTauEps || almost_empty(tau, capacity, m_count, n_nodes)) return l0;
  const double reduced = capacity - static_cast<double>(m_count) / static_cast<double>(n_nodes);
  if (reduced <= 0.0) return 1;
  return zeta_l_scan(tau, reduced);
}

double threshold_h(double tau, double capacity) {
  if (tau <= kCriticalTau + kTauEps) throw InvalidInput("threshold constant h needs tau > 3/2");
  const double l_hat = static_cast<double>(estimate_l_hat(tau, capacity));
  const double e = 2.0 * tau / 3.0;
  const double inner = (capacity - l_hat + 1.0) * (e - 1.0) / std::pow(l_hat, 1.0 - e);
  if (inner <= 0.0) return 0.0;
  return std::pow(inner, 3.0 / (2.0 * tau));
}

double almost_empty_threshold(double tau, double capacity, std::int64_t n_nodes) {
  const double kn = capacity * static_cast<double>(n_nodes);
  if (is_critical(tau)) return solve_x_log_x(kn, 1.0, std::max(kn, 2.0));
  if (tau < kCriticalTau) return (1.0 - 2.0 * tau / 3.0) * kn;
  return threshold_h(tau, capacity) * std::pow(static_cast<double>(n_nodes), 3.0 / (2.0 * tau));
}

double estimate_r_hat(double tau, double capacity, std::int64_t m_count, std::int64_t n_nodes) {
  check_instance(tau, capacity, m_count, n_nodes);
  const double n = static_cast<double>(n_nodes);
  const double m = static_cast<double>(m_count);
  const double cap_r = m + 1.0;
  if (tau < kExactFallbackTau) {
    return static_cast<double>(solve_cd(n_nodes, capacity, Popularity::zipf(static_cast<std::size_t>(m_count), tau)).r_index);
  }
  const double slack = slack_of(capacity, m_count, n_nodes);
  if (slack <= std::sqrt(n)) return zero_slack_r(tau, slack, m_count);
  if (almost_empty(tau, capacity, m_count, n_nodes)) return cap_r;
  if (is_critical(tau)) return std::min(cap_r, solve_x_log_x(slack, 2.0, std::max(capacity * n, 3.0)));
  if (tau < kCriticalTau) return std::min(cap_r, (3.0 - 2.0 * tau) / (2.0 * tau) * slack);
  const double alpha = (2.0 * tau - 3.0) / (2.0 * tau);
  const double beta = 3.0 / (2.0 * tau - 3.0);
  const double g = 3.0 / (2.0 * tau);
  if (m <= (capacity - beta) * n) {
    return std::min(cap_r, alpha * ((capacity + 1.0) * std::pow(n, g) - m / std::pow(n, 1.0 - g)));
  }
  return std::min(cap_r, std::pow((2.0 * tau - 3.0) / 3.0 * slack, g));
}

PredictedLaw predicted_law(double tau, std::string_view regime) {
  PredictedLaw law;
  const bool crit = is_critical(tau);
  const bool low = tau < 1.0 - kTauEps;
  const bool one = std::abs(tau - 1.0) <= kTauEps;
  const bool mid = !low && !one && tau < kCriticalTau - kTauEps;
  const bool high = tau > kCriticalTau + kTauEps;
  if (regime == "zero_slack") {
    law.m_exponent = 0.5;
    law.formula = "sqrt(M)";
    return law;
  }
  if (regime == "near_capacity") {
    if (low || one) {
      law.m_exponent = 0.5;
      law.formula = "sqrt(M)";
    } else if (mid) {
      law.m_exponent = 0.5;
      law.slack_exponent = -(tau - 1.0);
      law.formula = "sqrt(M) / (KN-M)^(tau-1)";
    } else if (crit) {
      law.m_exponent = 0.5;
      law.slack_exponent = -0.5;
      law.log_exponent = 1.5;
      law.log_argument = "r";
      law.formula = "sqrt(M/(KN-M)) * log(r)^1.5";
    } else {
      law.m_exponent = 0.5;
      law.slack_exponent = -3.0 * (tau - 1.0) / (2.0 * tau);
      law.formula = "sqrt(M) / (KN-M)^(3(tau-1)/(2tau))";
    }
    return law;
  }
  // almost_empty and the nonempty columns share their laws except at tau = 3/2.
  if (low) {
    law.m_exponent = 0.5;
    law.formula = "sqrt(M)";
  } else if (one) {
    law.m_exponent = 0.5;
    law.log_exponent = -1.0;
    law.formula = "sqrt(M) / log(M)";
  } else if (mid) {
    law.m_exponent = 1.5 - tau;
    law.formula = "M^(3/2-tau)";
  } else if (crit) {
    law.log_exponent = 1.5;
    law.log_argument = regime == "almost_empty" ? "M" : "r";
    law.formula = regime == "almost_empty" ? "log(M)^1.5" : "log(r)^1.5";
  } else if (high) {
    law.formula = "1";
  }
  return law;
}

RegimeReport classify_regime(double tau, double capacity, std::int64_t m_count, std::int64_t n_nodes) {
  check_instance(tau, capacity, m_count, n_nodes);
  RegimeReport rep;
  rep.tau = tau;
  rep.capacity = capacity;
  rep.m_count = m_count;
  rep.n_nodes = n_nodes;
  rep.regime = classify_label(tau, capacity, m_count, n_nodes);
  rep.threshold = almost_empty_threshold(tau, capacity, n_nodes);
  rep.predicted_l_hat = estimate_l_hat(tau, capacity, m_count, n_nodes);
  rep.predicted_r_hat = estimate_r_hat(tau, capacity, m_count, n_nodes);
  rep.predicted_law = predicted_law(tau, rep.regime);

  const auto pop = Popularity::zipf(static_cast<std::size_t>(m_count), tau);
  const auto profile = solve_cd(n_nodes, capacity, pop);
  rep.exact_l = profile.l_index;
  rep.exact_r = profile.r_index;
  const double down = static_cast<double>(m_count) - static_cast<double>(profile.r_index) + 1.0;
  if (down <= 0.0) {
    rep.truncation_state = "empty";
  } else if (down <= std::pow(static_cast<double>(m_count), 0.9)) {
    rep.truncation_state = "almost_empty";
  } else {
    rep.truncation_state = "nonempty";
  }
  return rep;
}

std::string to_json(const RegimeReport& report) {
  nlohmann::ordered_json j;
  j["tau"] = round_significant(report.tau);
  j["K"] = round_significant(report.capacity);
  j["M"] = report.m_count;
  j["N"] = report.n_nodes;
  j["regime"] = report.regime;
  j["threshold"] = round_significant(report.threshold);
  j["l_hat"] = report.predicted_l_hat;
  j["r_hat"] = round_significant(report.predicted_r_hat);
  j["law"] = {{"formula", report.predicted_law.formula},
              {"m_exponent", round_significant(report.predicted_law.m_exponent)},
              {"log_exponent", round_significant(report.predicted_law.log_exponent)},
              {"log_argument", report.predicted_law.log_argument},
              {"slack_exponent", round_significant(report.predicted_law.slack_exponent)}};
  j["truncation_state"] = report.truncation_state;
  j["exact_l"] = report.exact_l;
  j["exact_r"] = report.exact_r;
  return j.dump(2);
}

namespace {

// expr  := term (('+' | '-') term)*
// term  := power (('*' | '/') power)*
// power := unary ('^' power)?
// unary := '-' unary | atom
// atom  := number | N | K | '(' expr ')' | floor '(' expr ')' | ceil '(' expr ')'
class LawParser {
 public:
  LawParser(std::string_view text, double n, double k) : s_(text), n_(n), k_(k) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidInput("bad M law \"" + std::string(s_) + "\": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) {
        v += term();
      } else if (eat('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }
  double term() {
    double v = power();
    for (;;) {
      if (eat('*')) {
        v *= power();
      } else if (eat('/')) {
        v /= power();
      } else {
        return v;
      }
    }
  }
  double power() {
    const double base = unary();
    if (eat('^')) return std::pow(base, power());
    return base;
  }
  double unary() {
    if (eat('-')) return -unary();
    return atom();
  }
  double atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = pos_;
      while (end < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                                 s_[end] == 'e' || s_[end] == 'E' ||
                                 ((s_[end] == '-' || s_[end] == '+') && end > pos_ &&
                                  (s_[end - 1] == 'e' || s_[end - 1] == 'E')))) {
        ++end;
      }
      std::istringstream is{std::string(s_.substr(pos_, end - pos_))};
      is.imbue(std::locale::classic());
      double v = 0.0;
      if (!(is >> v) || !is.eof()) fail("bad number");
      pos_ = end;
      return v;
    }
    std::size_t end = pos_;
    while (end < s_.size() && std::isalpha(static_cast<unsigned char>(s_[end]))) ++end;
    const std::string_view word = s_.substr(pos_, end - pos_);
    pos_ = end;
    if (word == "N") return n_;
    if (word == "K") return k_;
    if (word == "floor" || word == "ceil") {
      if (!eat('(')) fail("expected '(' after " + std::string(word));
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      // pow(1024, 0.6) lands just under 64
      const double eps = 1e-9 * std::max(1.0, std::abs(v));
      return word == "floor" ? std::floor(v + eps) : std::ceil(v - eps);
    }
    fail(word.empty() ? "unexpected '" + std::string(1, c) + "'" : "unknown name " + std::string(word));
  }

  std::string_view s_;
  double n_;
  double k_;
  std::size_t pos_ = 0;
};

}  // namespace

std::int64_t evaluate_m_law(std::string_view expr, std::int64_t n_nodes, double capacity) {
  const double v = LawParser(expr, static_cast<double>(n_nodes), capacity).parse();
  if (!std::isfinite(v)) throw InvalidInput("M law evaluates to a non-finite value");
  // tolerate representation error such as 0.1 * 40 = 3.9999999999999996
  return static_cast<std::int64_t>(std::floor(v + 1e-9 * std::max(1.0, std::abs(v))));
}

double fit_top_decade_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t* used) {
  if (x.size() != y.size()) throw InvalidInput("fit needs equally many x and y values");
  if (x.size() < 3) throw InvalidInput("slope fit needs at least 3 points");
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  const double x_max = x[idx.back()];
  std::size_t first = idx.size();
  while (first > 0 && x[idx[first - 1]] >= x_max / 10.0) --first;
  first = std::min(first, idx.size() - 3);

  double sx = 0.0;
  double sy = 0.0;
  const double cnt = static_cast<double>(idx.size() - first);
  for (std::size_t i = first; i < idx.size(); ++i) {
    if (!(x[idx[i]] > 0.0) || !(y[idx[i]] > 0.0)) throw InvalidInput("slope fit needs positive values");
    sx += std::log(x[idx[i]]);
    sy += std::log(y[idx[i]]);
  }
  const double mx = sx / cnt;
  const double my = sy / cnt;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = first; i < idx.size(); ++i) {
    const double dx = std::log(x[idx[i]]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[idx[i]]) - my);
  }
  if (sxx <= 0.0) throw InvalidInput("slope fit needs distinct x values");
  if (used) *used = idx.size() - first;
  return sxy / sxx;
}

SweepResult sweep(const SweepScenario& scenario) {
  if (scenario.nus.size() < 3) throw InvalidInput("sweep needs at least 3 points");
  SweepResult out;
  out.points.resize(scenario.nus.size());
  // Resolve every point before spending time on solves.
  for (std::size_t i = 0; i < scenario.nus.size(); ++i) {
    const int nu = scenario.nus[i];
    if (nu < 0 || nu > 15) throw InvalidInput("nu out of range");
    SweepPoint& p = out.points[i];
    p.nu = nu;
    p.n_nodes = std::int64_t{1} << (2 * nu);
    p.m_count = evaluate_m_law(scenario.m_law, p.n_nodes, scenario.capacity);
    p.capacity = scenario.capacity;
    p.tau = scenario.tau;
    if (p.m_count < 1) throw InvalidInput("M law gives M < 1 at nu = " + std::to_string(nu));
    check_instance(scenario.tau, scenario.capacity, p.m_count, p.n_nodes);
  }
  parallel_for(out.points.size(), scenario.jobs, [&](std::size_t i) {
    SweepPoint& p = out.points[i];
    const auto pop = Popularity::zipf(static_cast<std::size_t>(p.m_count), p.tau);
    const auto profile = solve_cd(p.n_nodes, p.capacity, pop);
    const auto cap = analytic_capacity(profile, pop);
    p.c = cap.c_total;
    p.l_index = profile.l_index;
    p.r_index = profile.r_index;
    p.regime = classify_label(p.tau, p.capacity, p.m_count, p.n_nodes);
    const PredictedLaw law = predicted_law(p.tau, p.regime);
    p.predicted_exponent = law.m_exponent;
    p.predicted_log_exponent = law.log_exponent;
  });

  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> ys_corrected;
  for (const auto& p : out.points) {
    const double x = scenario.axis == FitAxis::kM ? static_cast<double>(p.m_count)
                                                  : std::sqrt(static_cast<double>(p.n_nodes));
    xs.push_back(x);
    ys.push_back(p.c);
    const PredictedLaw law = predicted_law(p.tau, p.regime);
    const double r_log = std::log(std::max(2.0, static_cast<double>(p.r_index)));
    const double m_log = std::log(std::max(2.0, static_cast<double>(p.m_count)));
    const double arg = law.log_argument == "r" ? r_log : m_log;
    ys_corrected.push_back(p.c / std::pow(arg, law.log_exponent));
  }
  out.fitted_exponent = fit_top_decade_slope(xs, ys, &out.fit_points);
  out.fitted_exponent_log_corrected = fit_top_decade_slope(xs, ys_corrected);

  const SweepPoint& last = out.points.back();
  out.predicted_exponent = last.predicted_exponent;
  if (scenario.axis == FitAxis::kSqrtN && out.points.size() >= 2) {
    // M against sqrt(N) grows with exponent 2 d ln M / d ln N.
    const SweepPoint& prev = out.points[out.points.size() - 2];
    const double growth = std::log(static_cast<double>(last.m_count) / static_cast<double>(prev.m_count)) /
                          std::log(static_cast<double>(last.n_nodes) / static_cast<double>(prev.n_nodes));
    out.predicted_exponent = 2.0 * growth * last.predicted_exponent;
  }
  return out;
}

std::string to_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "nu,N,M,K,tau,C,l,r,regime,predicted_exponent,fitted_exponent\n";
  for (const auto& p : result.points) {
    os << p.nu << ',' << p.n_nodes << ',' << p.m_count << ',' << format_number(p.capacity) << ','
       << format_number(p.tau) << ',' << format_number(p.c) << ',' << p.l_index << ',' << p.r_index << ','
       << p.regime << ',' << format_number(p.predicted_exponent) << ',' << format_number(result.fitted_exponent)
       << '\n';
  }
  return os.str();
}

}  // namespace replica_grid
