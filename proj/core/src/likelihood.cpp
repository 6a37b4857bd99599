#include "jdqml/likelihood.hpp"

#include <cmath>
#include <vector>

#include "jdqml/errors.hpp"
#include "jdqml/kahan.hpp"
#include "jdqml/linalg.hpp"

namespace jdqml {

const IncrementClassification& QllContext::classification(const Threshold& th) {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  const auto key = std::make_pair(th.D, th.rho);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, classify(*path_, th)).first;
  return it->second;
}

namespace {

/// Per-state S(x, alpha) factorization workspace. When the diffusion is
/// state independent the factor is computed once per call.
class SFactors {
 public:
  SFactors(const ModelSpec& model, const Path& path, std::span<const double> alpha)
      : model_(model), path_(path), alpha_(alpha), d_(static_cast<std::size_t>(model.dim)) {
    a_.resize(d_ * static_cast<std::size_t>(model.noise_dim));
    chol_.resize(d_ * d_);
    scratch_.resize(d_);
    if (model_.state_independent_diffusion) factor_at(0);
  }

  /// Prepares the factor for increment i (state X_{t_i}).
  void load(std::size_t i) {
    if (!model_.state_independent_diffusion) factor_at(i);
  }

  double logdet() const { return logdet_; }

  double quadratic(std::span<const double> v) {
    return cholesky_quadratic(chol_, d_, v, scratch_);
  }

 private:
  void factor_at(std::size_t i) {
    const std::size_t s = static_cast<std::size_t>(model_.noise_dim);
    model_.diffusion(path_.state(i), alpha_, a_);
    for (std::size_t r = 0; r < d_; ++r) {
      for (std::size_t c = r; c < d_; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < s; ++k) acc += a_[r * s + k] * a_[c * s + k];
        chol_[r * d_ + c] = acc;
        chol_[c * d_ + r] = acc;
      }
    }
    if (!cholesky(chol_, d_))
      throw SingularSError("S(x, alpha) is not positive definite");
    logdet_ = cholesky_logdet(chol_, d_);
  }

  const ModelSpec& model_;
  const Path& path_;
  std::span<const double> alpha_;
  std::size_t d_;
  std::vector<double> a_, chol_, scratch_;
  double logdet_ = 0.0;
};

}  // namespace

double qll_diffusion(QllContext& ctx, std::span<const double> alpha, const Threshold& th1) {
  const Path& path = ctx.path();
  const ModelSpec& model = ctx.model();
  const IncrementClassification& cls = ctx.classification(th1);
  const std::size_t n = path.increments();
  const double inv_h = 1.0 / path.step();

  KahanSum sum;

  if (model.dim == 1 && model.state_independent_diffusion) {
    double a = 0.0;
    model.diffusion(path.state(0), alpha, {&a, 1});
    const double S = a * a;
    if (!(S > 0.0)) throw SingularSError("S(x, alpha) is not positive definite");
    const double inv_S = 1.0 / S;
    const double logdet = std::log(S);
    const double* x = path.values.data();
    for (std::size_t i = 0; i < n; ++i) {
      if (!cls.small_mask[i]) continue;
      const double dx = x[i + 1] - x[i];
      sum.add(inv_h * dx * dx * inv_S + logdet);
    }
    return -0.5 * sum.value();
  }

  SFactors factors(model, path, alpha);
  const std::size_t d = static_cast<std::size_t>(model.dim);
  std::vector<double> dx(d);
  for (std::size_t i = 0; i < n; ++i) {
    if (!cls.small_mask[i]) continue;
    factors.load(i);
    const auto cur = path.state(i);
    const auto next = path.state(i + 1);
    for (std::size_t k = 0; k < d; ++k) dx[k] = next[k] - cur[k];
    sum.add(inv_h * factors.quadratic(dx) + factors.logdet());
  }
  return -0.5 * sum.value();
}

double qll_drift(QllContext& ctx, std::span<const double> beta,
                 std::span<const double> alpha_bar, const Threshold& th3) {
  const Path& path = ctx.path();
  const ModelSpec& model = ctx.model();
  const IncrementClassification& cls = ctx.classification(th3);
  const std::size_t n = path.increments();
  const double h = path.step();

  KahanSum sum;

  if (model.dim == 1 && model.state_independent_diffusion) {
    double a = 0.0;
    model.diffusion(path.state(0), alpha_bar, {&a, 1});
    const double S = a * a;
    if (!(S > 0.0)) throw SingularSError("S(x, alpha) is not positive definite");
    const double inv_S = 1.0 / S;
    const double* x = path.values.data();
    double b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!cls.small_mask[i]) continue;
      model.drift({&x[i], 1}, beta, {&b, 1});
      const double resid = x[i + 1] - x[i] - h * b;
      sum.add(resid * resid * inv_S);
    }
    return -sum.value() / (2.0 * h);
  }

  SFactors factors(model, path, alpha_bar);
  const std::size_t d = static_cast<std::size_t>(model.dim);
  std::vector<double> b(d), resid(d);
  for (std::size_t i = 0; i < n; ++i) {
    if (!cls.small_mask[i]) continue;
    factors.load(i);
    const auto cur = path.state(i);
    const auto next = path.state(i + 1);
    model.drift(cur, beta, b);
    for (std::size_t k = 0; k < d; ++k) resid[k] = next[k] - cur[k] - h * b[k];
    sum.add(factors.quadratic(resid));
  }
  return -sum.value() / (2.0 * h);
}

double qll_jump(QllContext& ctx, std::span<const double> gamma, const Threshold& th2) {
  const Path& path = ctx.path();
  const ModelSpec& model = ctx.model();
  const IncrementClassification& cls = ctx.classification(th2);
  const std::size_t n = path.increments();
  const double h = path.step();
  const std::size_t d = static_cast<std::size_t>(path.dim);

  KahanSum jump_sum;
  std::vector<double> dx(d);
  for (std::size_t i = 0; i < n; ++i) {
    if (cls.small_mask[i]) continue;
    const auto cur = path.state(i);
    const auto next = path.state(i + 1);
    for (std::size_t k = 0; k < d; ++k) dx[k] = next[k] - cur[k];
    jump_sum.add(model.log_jump_density(dx, cur, gamma));
  }

  // Compensator over all n increments, filtered or not.
  double compensator;
  if (model.additive_jumps) {
    compensator = h * static_cast<double>(n) * model.intensity(gamma);
  } else {
    KahanSum mass;
    for (std::size_t i = 0; i < n; ++i) mass.add(model.jump_mass(path.state(i), gamma));
    compensator = h * mass.value();
  }
  return jump_sum.value() - compensator;
}

double qll_joint(QllContext& ctx, const ParamVector& theta, const Threshold& th1_bar,
                 const Threshold& th2_bar) {
  const Path& path = ctx.path();
  const ModelSpec& model = ctx.model();
  const IncrementClassification& cls = ctx.classification(th1_bar);
  const std::size_t n = path.increments();
  const double h = path.step();
  const double inv_h = 1.0 / h;
  const auto alpha = theta.alpha();
  const auto beta = theta.beta();

  KahanSum sum;

  if (model.dim == 1 && model.state_independent_diffusion) {
    double a = 0.0;
    model.diffusion(path.state(0), alpha, {&a, 1});
    const double S = a * a;
    if (!(S > 0.0)) throw SingularSError("S(x, alpha) is not positive definite");
    const double inv_S = 1.0 / S;
    const double logdet = std::log(S);
    const double* x = path.values.data();
    double b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!cls.small_mask[i]) continue;
      model.drift({&x[i], 1}, beta, {&b, 1});
      const double resid = x[i + 1] - x[i] - h * b;
      sum.add(inv_h * resid * resid * inv_S + logdet);
    }
  } else {
    SFactors factors(model, path, alpha);
    const std::size_t d = static_cast<std::size_t>(model.dim);
    std::vector<double> b(d), resid(d);
    for (std::size_t i = 0; i < n; ++i) {
      if (!cls.small_mask[i]) continue;
      factors.load(i);
      const auto cur = path.state(i);
      const auto next = path.state(i + 1);
      model.drift(cur, beta, b);
      for (std::size_t k = 0; k < d; ++k) resid[k] = next[k] - cur[k] - h * b[k];
      sum.add(inv_h * factors.quadratic(resid) + factors.logdet());
    }
  }

  return -0.5 * sum.value() + qll_jump(ctx, theta.gamma(), th2_bar);
}

}  // namespace jdqml
