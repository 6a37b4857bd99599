#include "jdqml/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jdqml/errors.hpp"
#include "jdqml/linalg.hpp"

namespace jdqml {

void ParamBounds::validate() const {
  if (lower.size() != upper.size())
    throw InvalidParameterError("ParamBounds: lower/upper size mismatch");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw InvalidParameterError("ParamBounds: endpoints must be finite (compact box)");
    if (!(lower[i] < upper[i]))
      throw InvalidParameterError("ParamBounds: lower < upper required componentwise");
  }
}

bool ParamBounds::contains(std::span<const double> x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

double ParamBounds::project(double value, std::size_t i) const {
  return std::clamp(value, lower[i], upper[i]);
}

ModelSpec levy_ou_model() {
  ModelSpec m;
  m.dim = 1;
  m.noise_dim = 1;
  m.p = 1;
  m.q = 1;
  m.r = 3;
  m.name = "levy_ou";
  m.has_closed_form = true;
  m.state_independent_diffusion = true;
  m.additive_jumps = true;

  m.drift = [](std::span<const double> x, std::span<const double> beta,
               std::span<double> out) { out[0] = -beta[0] * x[0]; };

  m.diffusion = [](std::span<const double>, std::span<const double> alpha,
                   std::span<double> out) { out[0] = alpha[0]; };

  m.jump_map = [](std::span<const double>, std::span<const double> z,
                  std::span<const double>, std::span<double> out) { out[0] = z[0]; };

  // log Psi_gamma(y, x) = log lambda - log(2 pi sigma2)/2 - (y - mu)^2/(2 sigma2)
  m.log_jump_density = [](std::span<const double> y, std::span<const double>,
                          std::span<const double> gamma) {
    const double lambda = gamma[0];
    const double mu = gamma[1];
    const double sigma2 = gamma[2];
    const double dev = y[0] - mu;
    return std::log(lambda) - 0.5 * std::log(2.0 * std::numbers::pi * sigma2) -
           dev * dev / (2.0 * sigma2);
  };

  m.intensity = [](std::span<const double> gamma) { return gamma[0]; };

  // Identity jump map, so the mass of Psi equals the intensity.
  m.jump_mass = [](std::span<const double>, std::span<const double> gamma) {
    return gamma[0];
  };

  m.sample_mark = [](std::span<const double> gamma, Rng& rng, std::span<double> out) {
    out[0] = rng.normal(gamma[1], std::sqrt(gamma[2]));
  };

  return m;
}

std::vector<double> eval_S(const ModelSpec& model, std::span<const double> x,
                           std::span<const double> alpha) {
  const std::size_t d = static_cast<std::size_t>(model.dim);
  const std::size_t s = static_cast<std::size_t>(model.noise_dim);

  std::vector<double> a(d * s);
  model.diffusion(x, alpha, a);

  std::vector<double> S(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < s; ++k) acc += a[i * s + k] * a[j * s + k];
      S[i * d + j] = acc;
      S[j * d + i] = acc;
    }
  }

  std::vector<double> chol(S);
  if (!cholesky(chol, d)) {
    throw SingularSError("eval_S: a(x, alpha) a(x, alpha)^T is not positive definite");
  }
  return S;
}

}  // namespace jdqml
