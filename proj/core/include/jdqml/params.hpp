#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jdqml/errors.hpp"

namespace jdqml {

// Flat parameter layout for the Levy-OU model: (alpha, beta, lambda, mu, sigma2).
inline constexpr std::size_t kLevyOuAlpha = 0;
inline constexpr std::size_t kLevyOuBeta = 1;
inline constexpr std::size_t kLevyOuLambda = 2;
inline constexpr std::size_t kLevyOuMu = 3;
inline constexpr std::size_t kLevyOuSigma2 = 4;

/// The unknown theta = (alpha, beta, gamma): diffusion, drift and jump
/// parameters stored as one flat vector with a recorded (p, q, r) split so
/// constrained optimization can freeze individual components.
struct ParamVector {
  std::vector<double> values;
  std::size_t p = 0;  ///< diffusion block size
  std::size_t q = 0;  ///< drift block size
  std::size_t r = 0;  ///< jump block size

  ParamVector() = default;
  ParamVector(std::vector<double> flat, std::size_t p_, std::size_t q_, std::size_t r_)
      : values(std::move(flat)), p(p_), q(q_), r(r_) {
    validate();
  }

  /// (alpha, beta, lambda, mu, sigma2) with split (1, 1, 3).
  static ParamVector levy_ou(double alpha, double beta, double lambda, double mu,
                             double sigma2) {
    return ParamVector({alpha, beta, lambda, mu, sigma2}, 1, 1, 3);
  }

  std::size_t size() const { return values.size(); }

  std::span<const double> alpha() const { return {values.data(), p}; }
  std::span<const double> beta() const { return {values.data() + p, q}; }
  std::span<const double> gamma() const { return {values.data() + p + q, r}; }

  void validate() const {
    if (p + q + r == 0) throw InvalidParameterError("ParamVector: empty split (p = q = r = 0)");
    if (values.size() != p + q + r)
      throw InvalidParameterError("ParamVector: flat size does not match (p, q, r) split");
  }
};

/// Compact box bounds matching a ParamVector layout.
struct ParamBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  ParamBounds() = default;
  ParamBounds(std::vector<double> lo, std::vector<double> hi)
      : lower(std::move(lo)), upper(std::move(hi)) {
    validate();
  }

  void validate() const;

  std::size_t size() const { return lower.size(); }

  bool contains(std::span<const double> x) const;
  bool contains(const ParamVector& theta) const { return contains(theta.values); }

  /// Clamps component i onto [lower[i], upper[i]].
  double project(double value, std::size_t i) const;

  /// Wide default box around the Levy-OU example's parameter region.
  static ParamBounds levy_ou_default() {
    return ParamBounds({1e-3, 1e-3, 1e-3, -50.0, 1e-3}, {50.0, 50.0, 200.0, 50.0, 500.0});
  }
};

}  // namespace jdqml
