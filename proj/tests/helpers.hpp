#pragma once

// Shared fixtures and independent naive-summation oracles for the Levy-OU
// model. The oracle functions are deliberately plain loops over the defining
// formulas; they must not share code with the library.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline double cutoff(double D, double rho, double h) { return D * std::pow(h, rho); }

/// l_n^(1)(alpha) = -1/2 sum { dX^2/(h alpha^2) + 2 log alpha } 1{|dX| <= D1 h^rho1}
inline double l1(const std::vector<double>& x, double h, double D1, double rho1,
                 double alpha) {
  const double c = cutoff(D1, rho1, h);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double dx = x[i + 1] - x[i];
    if (std::abs(dx) <= c)
      sum += dx * dx / (h * alpha * alpha) + 2.0 * std::log(alpha);
  }
  return -0.5 * sum;
}

/// l-bar_n^(2)(beta | a) = -1/(2 a^2 h) sum (dX + beta h X)^2 1{|dX| <= D3 h^rho3}
inline double l2_bar(const std::vector<double>& x, double h, double D3, double rho3,
                     double beta, double alpha_bar) {
  const double c = cutoff(D3, rho3, h);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double dx = x[i + 1] - x[i];
    if (std::abs(dx) <= c) {
      const double resid = dx + beta * h * x[i];
      sum += resid * resid;
    }
  }
  return -sum / (2.0 * alpha_bar * alpha_bar * h);
}

/// l-tilde_n^(2)(gamma) = sum log Psi(dX) 1{|dX| > D2 h^rho2} - lambda n h
inline double l2_tilde(const std::vector<double>& x, double h, double D2, double rho2,
                       double lambda, double mu, double sigma2) {
  const double c = cutoff(D2, rho2, h);
  const std::size_t n = x.size() - 1;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i + 1] - x[i];
    if (std::abs(dx) > c) {
      sum += std::log(lambda) - 0.5 * std::log(2.0 * M_PI * sigma2) -
             (dx - mu) * (dx - mu) / (2.0 * sigma2);
    }
  }
  return sum - lambda * static_cast<double>(n) * h;
}

/// l_n(theta): continuous part with drift residuals under (D1b, rho1b) plus
/// the jump part under (D2b, rho2b).
inline double joint(const std::vector<double>& x, double h, double D1b, double rho1b,
                    double D2b, double rho2b, double alpha, double beta, double lambda,
                    double mu, double sigma2) {
  const double c = cutoff(D1b, rho1b, h);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double dx = x[i + 1] - x[i];
    if (std::abs(dx) <= c) {
      const double resid = dx + beta * h * x[i];
      sum += resid * resid / (h * alpha * alpha) + 2.0 * std::log(alpha);
    }
  }
  return -0.5 * sum + l2_tilde(x, h, D2b, rho2b, lambda, mu, sigma2);
}

struct ClosedForms {
  double alpha = 0.0, beta = 0.0, lambda = 0.0, mu = 0.0, sigma2 = 0.0;
  std::size_t n1 = 0, n2 = 0, n3 = 0;
};

/// The adaptive closed forms by direct summation.
inline ClosedForms closed_forms(const std::vector<double>& x, double h, double D1,
                                double rho1, double D2, double rho2, double D3,
                                double rho3) {
  const double c1 = cutoff(D1, rho1, h);
  const double c2 = cutoff(D2, rho2, h);
  const double c3 = cutoff(D3, rho3, h);
  const std::size_t n = x.size() - 1;

  ClosedForms cf;
  double sum_dx2 = 0.0, sum_x_dx = 0.0, sum_x2 = 0.0, sum_large = 0.0;
  std::vector<double> large;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i + 1] - x[i];
    const double a = std::abs(dx);
    if (a <= c1) {
      ++cf.n1;
      sum_dx2 += dx * dx;
    }
    if (a <= c3) {
      ++cf.n3;
      sum_x_dx += x[i] * dx;
      sum_x2 += x[i] * x[i];
    }
    if (a > c2) {
      ++cf.n2;
      sum_large += dx;
      large.push_back(dx);
    }
  }
  if (cf.n1 > 0) cf.alpha = std::sqrt(sum_dx2 / (static_cast<double>(cf.n1) * h));
  if (sum_x2 > 0.0) cf.beta = -sum_x_dx / (h * sum_x2);
  cf.lambda = static_cast<double>(cf.n2) / (static_cast<double>(n) * h);
  if (cf.n2 > 0) {
    cf.mu = sum_large / static_cast<double>(cf.n2);
    double ss = 0.0;
    for (double dx : large) ss += (dx - cf.mu) * (dx - cf.mu);
    cf.sigma2 = ss / static_cast<double>(cf.n2);
  }
  return cf;
}

}  // namespace oracle

namespace fixtures {

/// The worked tiny dataset: X = [1.0, 0.9, 0.95, 3.95], h = 0.01, so
/// dX = [-0.1, 0.05, 3.0]. With cutoff 0.2512 the first two increments are
/// small and the third is a jump.
inline std::vector<double> tiny_path_values() { return {1.0, 0.9, 0.95, 3.95}; }
inline constexpr double kTinyH = 0.01;

}  // namespace fixtures
