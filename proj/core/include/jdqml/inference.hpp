#pragma once

#include <array>
#include <functional>
#include <vector>

#include "jdqml/estimate.hpp"
#include "jdqml/likelihood.hpp"
#include "jdqml/params.hpp"

namespace jdqml {

/// Diagonal asymptotic information of the Levy-OU adaptive estimator,
///   K = diag(2/alpha0^2, mu2/alpha0^2, 1/lambda0, lambda0/sigma0^2,
///            lambda0/(2 sigma0^4)),
/// with convergence rates sqrt(n) for alpha and sqrt(nh) for the rest.
/// The full cross-model information matrices are out of scope; only this
/// built-in diagonal case is computed.
struct AsymptoticInfo {
  std::array<double, 5> K_diag{};
  double mu2 = 0.0;

  /// Per-component scaling (sqrt(n), sqrt(nh), sqrt(nh), sqrt(nh), sqrt(nh)).
  static std::array<double, 5> rates(std::size_t n, double h);
};

AsymptoticInfo asymptotic_covariance_levy_ou(const ParamVector& theta0, double mu2);

/// Ergodic time average n^{-1} sum_{i=0}^{n-1} |X_{t_i}|^2.
double estimate_mu2(const Path& path);

/// Componentwise (rate * (estimate - truth) * sqrt(K)); each entry is
/// standard normal in the limit. Used for the QQ exports.
std::array<double, 5> standardize(const EstimateResult& result, const ParamVector& theta0,
                                  const AsymptoticInfo& info, std::size_t n, double h);

/// Regularized lower incomplete gamma P(df/2, x/2).
double chi2_cdf(double x, int df);

/// Upper-eps point of chi^2_df, found by bracketed root-finding on the CDF.
double chi2_quantile(double eps, int df);

struct TestResult {
  double lambda_n = 0.0;
  int df = 0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  ThresholdSet thresholds;
};

/// Lambda_n = -2 (l_n(theta*) - l_n(theta)) with the joint likelihood at
/// (th1_bar, th2_bar). Both estimates must come from the context's path.
double qlr_statistic(QllContext& ctx, const EstimateResult& unconstrained,
                     const EstimateResult& constrained, const Threshold& th1_bar,
                     const Threshold& th2_bar);

/// Rejects iff lambda_n strictly exceeds the upper-eps chi^2_df point.
TestResult decide_test(double lambda_n, int df, double eps);

// --- small sample-test utilities used by the studies ---

double standard_normal_cdf(double x);

/// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic one-sample KS critical value c(level)/sqrt(n).
double ks_critical(double level, std::size_t n);

/// Asymptotic two-sample KS critical value c(level)*sqrt((m+n)/(m*n)).
double ks_two_sample_critical(double level, std::size_t m, std::size_t n);

}  // namespace jdqml
