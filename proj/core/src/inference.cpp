#include "jdqml/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "jdqml/errors.hpp"
#include "jdqml/kahan.hpp"

namespace jdqml {

AsymptoticInfo asymptotic_covariance_levy_ou(const ParamVector& theta0, double mu2) {
  if (theta0.size() != 5 || theta0.p != 1 || theta0.q != 1 || theta0.r != 3)
    throw InvalidParameterError("asymptotic_covariance_levy_ou: expected the Levy-OU layout");
  if (!(mu2 > 0.0)) throw InvalidParameterError("asymptotic_covariance_levy_ou: mu2 must be > 0");

  const double alpha0 = theta0.values[kLevyOuAlpha];
  const double lambda0 = theta0.values[kLevyOuLambda];
  const double sigma2_0 = theta0.values[kLevyOuSigma2];
  if (!(alpha0 > 0.0) || !(lambda0 > 0.0) || !(sigma2_0 > 0.0))
    throw InvalidParameterError(
        "asymptotic_covariance_levy_ou: alpha0, lambda0, sigma2_0 must be > 0");

  AsymptoticInfo info;
  info.mu2 = mu2;
  info.K_diag = {2.0 / (alpha0 * alpha0), mu2 / (alpha0 * alpha0), 1.0 / lambda0,
                 lambda0 / sigma2_0, lambda0 / (2.0 * sigma2_0 * sigma2_0)};
  return info;
}

double estimate_mu2(const Path& path) {
  const std::size_t n = path.increments();
  if (n < 1) throw InvalidParameterError("estimate_mu2: path has no increments");
  const std::size_t d = static_cast<std::size_t>(path.dim);
  KahanSum sum;
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double v = path.values[i * d + k];
      norm2 += v * v;
    }
    sum.add(norm2);
  }
  return sum.value() / static_cast<double>(n);
}

std::array<double, 5> AsymptoticInfo::rates(std::size_t n, double h) {
  const double root_n = std::sqrt(static_cast<double>(n));
  const double root_nh = std::sqrt(static_cast<double>(n) * h);
  return {root_n, root_nh, root_nh, root_nh, root_nh};
}

std::array<double, 5> standardize(const EstimateResult& result, const ParamVector& theta0,
                                  const AsymptoticInfo& info, std::size_t n, double h) {
  const auto rates = AsymptoticInfo::rates(n, h);
  std::array<double, 5> z{};
  for (std::size_t i = 0; i < 5; ++i) {
    z[i] = rates[i] * (result.theta.values[i] - theta0.values[i]) *
           std::sqrt(info.K_diag[i]);
  }
  return z;
}

namespace {

/// Regularized lower incomplete gamma P(a, x) by series (x < a+1) or
/// continued fraction (x >= a+1).
double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double gln = std::lgamma(a);
  constexpr int kMaxIter = 500;
  const double eps = std::numeric_limits<double>::epsilon();
  const double fpmin = std::numeric_limits<double>::min() / eps;

  if (x < a + 1.0) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < kMaxIter; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }

  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double frac = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    frac *= del;
    if (std::abs(del - 1.0) <= eps) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * frac;
}

}  // namespace

double chi2_cdf(double x, int df) {
  if (df < 1) throw InvalidParameterError("chi2_cdf: df must be >= 1");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_quantile(double eps, int df) {
  if (df < 1) throw InvalidParameterError("chi2_quantile: df must be >= 1");
  if (!(eps > 0.0 && eps < 1.0))
    throw InvalidParameterError("chi2_quantile: eps must lie in (0, 1)");
  const double target = 1.0 - eps;

  double lo = 0.0;
  double hi = static_cast<double>(df) + 10.0;
  while (chi2_cdf(hi, df) < target) hi *= 2.0;

  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, df) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-10 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

double qlr_statistic(QllContext& ctx, const EstimateResult& unconstrained,
                     const EstimateResult& constrained, const Threshold& th1_bar,
                     const Threshold& th2_bar) {
  const double l_free = qll_joint(ctx, unconstrained.theta, th1_bar, th2_bar);
  const double l_null = qll_joint(ctx, constrained.theta, th1_bar, th2_bar);
  return -2.0 * (l_null - l_free);
}

TestResult decide_test(double lambda_n, int df, double eps) {
  if (df < 1) throw InvalidParameterError("decide_test: df must be >= 1");
  TestResult result;
  result.lambda_n = lambda_n;
  result.df = df;
  result.critical_value = chi2_quantile(eps, df);
  result.p_value = 1.0 - chi2_cdf(lambda_n, df);
  result.reject = lambda_n > result.critical_value;
  return result;
}

double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InvalidParameterError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    dist = std::max(dist, f - static_cast<double>(i) / n);
    dist = std::max(dist, static_cast<double>(i + 1) / n - f);
  }
  return dist;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidParameterError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double dist = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    dist = std::max(dist, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return dist;
}

namespace {

double ks_coefficient(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw InvalidParameterError("ks critical value: level must lie in (0, 1)");
  return std::sqrt(-0.5 * std::log(0.5 * level));
}

}  // namespace

double ks_critical(double level, std::size_t n) {
  return ks_coefficient(level) / std::sqrt(static_cast<double>(n));
}

double ks_two_sample_critical(double level, std::size_t m, std::size_t n) {
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  return ks_coefficient(level) * std::sqrt((dm + dn) / (dm * dn));
}

}  // namespace jdqml
