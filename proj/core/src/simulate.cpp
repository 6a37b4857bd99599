#include "jdqml/simulate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "jdqml/errors.hpp"
#include "jdqml/rng.hpp"

namespace jdqml {

namespace {

struct LevyOuParams {
  double alpha, beta, lambda, mu, sigma2;
};

LevyOuParams unpack_levy_ou(const ParamVector& params) {
  if (params.size() != 5 || params.p != 1 || params.q != 1 || params.r != 3)
    throw InvalidParameterError("simulate_levy_ou: expected (alpha, beta, lambda, mu, sigma2)");
  const LevyOuParams p{params.values[kLevyOuAlpha], params.values[kLevyOuBeta],
                       params.values[kLevyOuLambda], params.values[kLevyOuMu],
                       params.values[kLevyOuSigma2]};
  for (double v : params.values) {
    if (!std::isfinite(v)) throw InvalidParameterError("simulate_levy_ou: non-finite parameter");
  }
  // Zero alpha/beta/lambda give degenerate but well-defined dynamics.
  if (p.alpha < 0.0) throw InvalidParameterError("simulate_levy_ou: alpha must be >= 0");
  if (p.beta < 0.0) throw InvalidParameterError("simulate_levy_ou: beta must be >= 0");
  if (p.lambda < 0.0) throw InvalidParameterError("simulate_levy_ou: lambda must be >= 0");
  if (!(p.sigma2 > 0.0)) throw InvalidParameterError("simulate_levy_ou: sigma2 must be > 0");
  return p;
}

/// Exact OU transition over dt: mean e^{-beta dt} x, variance
/// alpha^2 (1 - e^{-2 beta dt}) / (2 beta), with the beta -> 0 limit alpha^2 dt.
class OuStepper {
 public:
  OuStepper(double alpha, double beta) : alpha_(alpha), beta_(beta) {}

  double step(double x, double dt, Rng& rng) const {
    const double decay = std::exp(-beta_ * dt);
    return decay * x + stddev(dt, decay) * rng.normal();
  }

  /// Precomputed variant for the common fixed-dt case.
  struct Coeffs {
    double decay, sd;
  };
  Coeffs coeffs(double dt) const {
    const double decay = std::exp(-beta_ * dt);
    return {decay, stddev(dt, decay)};
  }

 private:
  double stddev(double dt, double decay) const {
    const double var = beta_ > 0.0
                           ? alpha_ * alpha_ * (1.0 - decay * decay) / (2.0 * beta_)
                           : alpha_ * alpha_ * dt;
    return std::sqrt(var);
  }

  double alpha_, beta_;
};

double next_epoch_gap(double lambda, Rng& rng) {
  return lambda > 0.0 ? rng.exponential(lambda) : std::numeric_limits<double>::infinity();
}

}  // namespace

double stationary_start(const ParamVector& params, const PathConfig& cfg) {
  const LevyOuParams p = unpack_levy_ou(params);
  const double horizon =
      cfg.burn_in_time ? *cfg.burn_in_time : (p.beta > 0.0 ? 50.0 / p.beta : 0.0);

  Rng rng(stream_seed(cfg.seed, kBurnInStreamTag));
  const OuStepper ou(p.alpha, p.beta);
  const double jump_sd = std::sqrt(p.sigma2);

  double x = 0.0;
  double t = 0.0;
  double next_jump = next_epoch_gap(p.lambda, rng);
  while (next_jump <= horizon) {
    x = ou.step(x, next_jump - t, rng);
    x += rng.normal(p.mu, jump_sd);
    t = next_jump;
    next_jump += next_epoch_gap(p.lambda, rng);
  }
  return ou.step(x, horizon - t, rng);
}

Path simulate_levy_ou(const ParamVector& params, const PathConfig& cfg) {
  cfg.validate();
  const LevyOuParams p = unpack_levy_ou(params);

  double x = cfg.initial_state ? cfg.initial_state->at(0) : stationary_start(params, cfg);

  Rng rng(stream_seed(cfg.seed, kPathStreamTag));
  const OuStepper ou(p.alpha, p.beta);
  const auto grid = ou.coeffs(cfg.h);
  const double jump_sd = std::sqrt(p.sigma2);

  Path path;
  path.dim = 1;
  path.times.resize(cfg.n + 1);
  path.values.resize(cfg.n + 1);
  std::vector<std::uint32_t> marks(cfg.n, 0);

  path.times[0] = 0.0;
  path.values[0] = x;

  double cursor = 0.0;  // time of the state currently held in x
  double next_jump = next_epoch_gap(p.lambda, rng);

  for (std::size_t i = 1; i <= cfg.n; ++i) {
    const double t_next = static_cast<double>(i) * cfg.h;
    if (next_jump > t_next) {
      // No epoch inside (t_{i-1}, t_i]: one exact grid transition.
      x = grid.decay * x + grid.sd * rng.normal();
    } else {
      std::uint32_t count = 0;
      while (next_jump <= t_next) {
        x = ou.step(x, next_jump - cursor, rng);
        x += rng.normal(p.mu, jump_sd);
        cursor = next_jump;
        next_jump += next_epoch_gap(p.lambda, rng);
        ++count;
      }
      x = ou.step(x, t_next - cursor, rng);
      marks[i - 1] = count;
    }
    cursor = t_next;
    path.times[i] = t_next;
    path.values[i] = x;
  }

  path.jump_marks = std::move(marks);
  return path;
}

Path simulate_generic(const ModelSpec& model, const ParamVector& params,
                      const PathConfig& cfg) {
  cfg.validate();
  params.validate();
  if (params.p != model.p || params.q != model.q || params.r != model.r)
    throw InvalidParameterError("simulate_generic: parameter split does not match model");

  const std::size_t d = static_cast<std::size_t>(model.dim);
  const std::size_t s = static_cast<std::size_t>(model.noise_dim);
  const auto alpha = params.alpha();
  const auto beta = params.beta();
  const auto gamma = params.gamma();

  const double lambda = model.r > 0 && model.intensity ? model.intensity(gamma) : 0.0;
  if (lambda < 0.0) throw InvalidParameterError("simulate_generic: negative intensity");
  if (lambda > 0.0 && !model.sample_mark)
    throw InvalidParameterError("simulate_generic: model has jumps but no mark sampler");

  std::vector<double> x(d, 0.0);
  if (cfg.initial_state) {
    if (cfg.initial_state->size() != d)
      throw InvalidParameterError("simulate_generic: initial_state dimension mismatch");
    x = *cfg.initial_state;
  } else if (model.name == "levy_ou") {
    x[0] = stationary_start(params, cfg);
  }

  Rng rng(stream_seed(cfg.seed, kPathStreamTag));

  Path path;
  path.dim = model.dim;
  path.times.resize(cfg.n + 1);
  path.values.resize((cfg.n + 1) * d);
  std::vector<std::uint32_t> marks(cfg.n, 0);

  path.times[0] = 0.0;
  for (std::size_t k = 0; k < d; ++k) path.values[k] = x[k];

  const double sub = cfg.h / static_cast<double>(cfg.substeps);
  const double sqrt_sub = std::sqrt(sub);

  std::vector<double> drift(d), diff(d * s), noise(s), mark(d), jump(d);
  double next_jump = next_epoch_gap(lambda, rng);

  for (std::size_t i = 1; i <= cfg.n; ++i) {
    std::uint32_t count = 0;
    for (int k = 0; k < cfg.substeps; ++k) {
      const double sub_end = (static_cast<double>(i - 1) +
                              static_cast<double>(k + 1) / static_cast<double>(cfg.substeps)) *
                             cfg.h;
      model.drift(x, beta, drift);
      model.diffusion(x, alpha, diff);
      for (std::size_t j = 0; j < s; ++j) noise[j] = rng.normal();
      for (std::size_t row = 0; row < d; ++row) {
        double dx = drift[row] * sub;
        for (std::size_t j = 0; j < s; ++j) dx += diff[row * s + j] * sqrt_sub * noise[j];
        x[row] += dx;
      }
      // Epochs inside this substep land at its end.
      while (next_jump <= sub_end) {
        model.sample_mark(gamma, rng, mark);
        model.jump_map(x, mark, gamma, jump);
        for (std::size_t row = 0; row < d; ++row) x[row] += jump[row];
        next_jump += next_epoch_gap(lambda, rng);
        ++count;
      }
    }
    path.times[i] = static_cast<double>(i) * cfg.h;
    for (std::size_t row = 0; row < d; ++row) {
      if (!std::isfinite(x[row]))
        throw NonFiniteStateError("simulate_generic: state exploded at t = " +
                                  std::to_string(path.times[i]));
      path.values[i * d + row] = x[row];
    }
    marks[i - 1] = count;
  }

  path.jump_marks = std::move(marks);
  return path;
}

}  // namespace jdqml
