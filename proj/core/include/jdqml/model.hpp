#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "jdqml/params.hpp"
#include "jdqml/rng.hpp"

namespace jdqml {

/// Coefficient functions and jump density defining the SDE
///   dX = b(X, beta) dt + a(X, alpha) dW + int c(X, z, gamma) p(dt, dz).
///
/// All callbacks receive flat parameter blocks (alpha, beta or gamma) and
/// write results into caller-provided storage.
struct ModelSpec {
  int dim = 1;        ///< state dimension d
  int noise_dim = 1;  ///< Brownian dimension s

  std::size_t p = 1, q = 1, r = 0;  ///< parameter split the callbacks expect

  /// b(x, beta) -> out[d]
  std::function<void(std::span<const double> x, std::span<const double> beta,
                     std::span<double> out)>
      drift;
  /// a(x, alpha) -> out[d*s] row-major
  std::function<void(std::span<const double> x, std::span<const double> alpha,
                     std::span<double> out)>
      diffusion;
  /// c(x, z, gamma) -> out[d]
  std::function<void(std::span<const double> x, std::span<const double> z,
                     std::span<const double> gamma, std::span<double> out)>
      jump_map;
  /// log Psi_gamma(y, x)
  std::function<double(std::span<const double> y, std::span<const double> x,
                       std::span<const double> gamma)>
      log_jump_density;
  /// lambda(gamma) > 0
  std::function<double(std::span<const double> gamma)> intensity;
  /// int_B Psi_gamma(y, x) dy; equals intensity for additive jumps.
  std::function<double(std::span<const double> x, std::span<const double> gamma)> jump_mass;
  /// Draws one jump mark z ~ F_gamma; used by the generic simulator.
  std::function<void(std::span<const double> gamma, Rng& rng, std::span<double> out)>
      sample_mark;

  bool has_closed_form = false;             ///< Levy-OU closed-form estimators apply
  bool state_independent_diffusion = false; ///< S(x, alpha) does not depend on x
  bool additive_jumps = false;              ///< c(x, z, .) = z, so jump_mass == intensity
  std::string name;
};

/// The one-dimensional Levy-OU model of the built-in example:
/// drift -beta x, constant diffusion alpha, identity jump map and Gaussian
/// jump density with gamma = (lambda, mu, sigma2).
ModelSpec levy_ou_model();

/// S(x, alpha) = a(x, alpha) a(x, alpha)^T as a d x d row-major matrix.
/// Throws SingularSError when the product is not positive definite.
std::vector<double> eval_S(const ModelSpec& model, std::span<const double> x,
                           std::span<const double> alpha);

}  // namespace jdqml
