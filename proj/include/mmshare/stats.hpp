#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmshare/rng.hpp"

namespace mmshare::stats {

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(std::span<const double> xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

// Nearest-rank percentile on an ascending sort: the ceil(q*n)-th order
// statistic. q in (0, 1].
inline double percentile_nearest_rank(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("percentile: empty sample");
  const auto n = xs.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  std::nth_element(xs.begin(), xs.begin() + (rank - 1), xs.end());
  return xs[rank - 1];
}

inline double fifth_percentile(std::span<const double> xs) {
  return percentile_nearest_rank(std::vector<double>(xs.begin(), xs.end()), 0.05);
}

using Statistic = std::function<double(std::vector<double>&)>;

inline Statistic fifth_percentile_statistic() {
  return [](std::vector<double>& v) { return percentile_nearest_rank(v, 0.05); };
}

inline Statistic mean_statistic() {
  return [](std::vector<double>& v) { return mean(v); };
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap: resample with replacement, take the (1-level)/2 and
// (1+level)/2 empirical quantiles of the statistic.
inline Interval bootstrap_ci(std::span<const double> xs, const Statistic& stat,
                             double level, int resamples, Rng& rng) {
  if (xs.empty()) throw std::invalid_argument("bootstrap_ci: empty sample");
  if (level <= 0.0 || level >= 1.0) throw std::invalid_argument("bootstrap_ci: bad level");
  const std::size_t n = xs.size();
  std::vector<double> stats(resamples);
  std::vector<double> draw(n);
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t i = 0; i < n; ++i) draw[i] = xs[rng.uniform_int(n)];
    stats[r] = stat(draw);
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - level) / 2.0;
  auto pick = [&](double q) {
    auto idx = static_cast<std::size_t>(std::ceil(q * resamples));
    if (idx < 1) idx = 1;
    if (idx > static_cast<std::size_t>(resamples)) idx = resamples;
    return stats[idx - 1];
  };
  return {pick(alpha), pick(1.0 - alpha)};
}

// Least-squares slope of y over x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ols_slope: need >= 2 paired points");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_slope: degenerate x");
  return sxy / sxx;
}

// ---- special functions for the hypothesis tests -------------------------

namespace detail {

inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad args");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_contfrac(a, x);
}

inline double chi_squared_cdf(double x, double dof) { return gamma_p(dof / 2.0, x / 2.0); }

inline double chi_squared_quantile(double p, double dof) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("chi_squared_quantile: bad p");
  double lo = 0.0, hi = dof + 100.0 * std::sqrt(2.0 * dof) + 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi_squared_cdf(mid, dof) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct GofResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 0.0;
};

// Chi-squared goodness of fit of integer counts against Poisson(mean).
// Bins with expected count < 5 are merged into their neighbours.
inline GofResult poisson_gof(std::span<const std::uint64_t> counts, double mean) {
  if (counts.empty()) throw std::invalid_argument("poisson_gof: empty sample");
  const double n = static_cast<double>(counts.size());
  std::uint64_t kmax = 0;
  for (auto c : counts) kmax = std::max(kmax, c);

  // pmf by recurrence, observed histogram
  std::vector<double> expected(kmax + 2, 0.0);
  std::vector<double> observed(kmax + 2, 0.0);
  double pmf = std::exp(-mean);
  double tail = 1.0;
  for (std::uint64_t k = 0; k <= kmax; ++k) {
    expected[k] = n * pmf;
    tail -= pmf;
    pmf *= mean / static_cast<double>(k + 1);
  }
  expected[kmax + 1] = n * std::max(tail, 0.0);  // upper tail bin
  for (auto c : counts) observed[c] += 1.0;

  // merge adjacent bins until every expected count is >= 5
  std::vector<double> eb, ob;
  double ea = 0.0, oa = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    ea += expected[k];
    oa += observed[k];
    if (ea >= 5.0) {
      eb.push_back(ea);
      ob.push_back(oa);
      ea = oa = 0.0;
    }
  }
  if (ea > 0.0 && !eb.empty()) {
    eb.back() += ea;
    ob.back() += oa;
  }
  if (eb.size() < 2) throw std::invalid_argument("poisson_gof: too few bins");

  double x2 = 0.0;
  for (std::size_t i = 0; i < eb.size(); ++i) {
    const double d = ob[i] - eb[i];
    x2 += d * d / eb[i];
  }
  const double dof = static_cast<double>(eb.size() - 1);
  return {x2, dof, 1.0 - chi_squared_cdf(x2, dof)};
}

// Kolmogorov survival function Q_KS, and the two-sample KS test.
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < a.size() && ib < b.size()) {
    const double va = a[ia], vb = b[ib];
    if (va <= vb) ++ia;
    if (vb <= va) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  return {d, kolmogorov_q(lambda)};
}

}  // namespace mmshare::stats
