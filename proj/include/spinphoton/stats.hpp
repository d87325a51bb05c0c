#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace spinphoton::stats {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;      // sample standard deviation
  double mean_error = 0.0;  // standard error of the mean
  std::size_t n = 0;
};

inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd out;
  out.n = xs.size();
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  out.mean_error = out.stddev / std::sqrt(static_cast<double>(xs.size()));
  return out;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Regularized lower incomplete gamma P(a, x), series/continued-fraction split.
inline double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // series representation
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // continued fraction (modified Lentz)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - gln) * h;
  return 1.0 - q;
}

/// Survival function of the chi-squared distribution with k degrees of freedom.
inline double chi_squared_sf(double x, double k) {
  if (x <= 0.0) return 1.0;
  return 1.0 - gamma_p(0.5 * k, 0.5 * x);
}

/// Asymptotic Kolmogorov distribution Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample KS test against a CDF supplied as callable; returns the p-value.
template <typename Cdf>
double ks_test_pvalue(std::vector<double> samples, Cdf&& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(f - lo), std::abs(f - hi)});
  }
  const double sqn = std::sqrt(n);
  return kolmogorov_q((sqn + 0.12 + 0.11 / sqn) * d);
}

/// Two-sided binomial test, normal approximation with continuity correction.
inline double binomial_two_sided_pvalue(std::uint64_t k, std::uint64_t n, double p) {
  if (n == 0 || p <= 0.0 || p >= 1.0)
    throw std::invalid_argument("binomial_test: bad arguments");
  const double mean = static_cast<double>(n) * p;
  const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  double z = (std::abs(static_cast<double>(k) - mean) - 0.5) / sd;
  z = std::max(z, 0.0);
  return std::clamp(2.0 * (1.0 - normal_cdf(z)), 0.0, 1.0);
}

/// Variance-ratio test that counts drawn across seeds have the expected
/// binomial variance: S = (m-1) s^2 / sigma^2 ~ chi^2_{m-1}. Two-sided p.
inline double variance_chi2_two_sided_pvalue(std::span<const double> samples,
                                             double expected_variance) {
  const auto ms = mean_std(samples);
  if (ms.n < 2 || expected_variance <= 0.0)
    throw std::invalid_argument("variance_chi2: bad arguments");
  const double dof = static_cast<double>(ms.n - 1);
  const double s = dof * ms.stddev * ms.stddev / expected_variance;
  const double upper = chi_squared_sf(s, dof);
  const double lower = 1.0 - upper;
  return std::clamp(2.0 * std::min(upper, lower), 0.0, 1.0);
}

}  // namespace spinphoton::stats
