#include "jdqml/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "jdqml/errors.hpp"
#include "jdqml/kahan.hpp"

namespace jdqml {

void EstimationConfig::validate(std::size_t param_count) const {
  thresholds.th1.validate();
  thresholds.th2.validate();
  thresholds.th3.validate();
  thresholds.th1_bar.validate();
  thresholds.th2_bar.validate();
  bounds.validate();
  if (bounds.size() != param_count)
    throw InvalidParameterError("EstimationConfig: bounds do not match parameter count");
  optimizer.validate();

  std::vector<bool> seen(param_count, false);
  for (const auto& [idx, value] : constraints) {
    if (idx >= param_count)
      throw ConstraintError("constraint index " + std::to_string(idx) + " out of range");
    if (seen[idx])
      throw ConstraintError("constraint index " + std::to_string(idx) + " repeated");
    seen[idx] = true;
    if (value < bounds.lower[idx] || value > bounds.upper[idx])
      throw ConstraintError("constraint value for component " + std::to_string(idx) +
                            " lies outside its bounds interval");
  }
}

namespace {

std::optional<double> fixed_value(const ConstraintList& constraints, std::size_t idx) {
  for (const auto& [i, v] : constraints) {
    if (i == idx) return v;
  }
  return std::nullopt;
}

void require_levy_ou_path(const Path& path) {
  if (path.dim != 1)
    throw InvalidParameterError("Levy-OU closed forms require a one-dimensional path");
  if (path.increments() < 1)
    throw InvalidParameterError("Levy-OU closed forms require at least one increment");
}

/// Jump-block closed forms shared by the adaptive and joint estimators:
/// lambda = n2/(nh), mu = mean of the large increments, sigma2 their
/// (mu-centered) mean square.
void fill_jump_block(const std::vector<double>& large_increments, std::size_t n, double h,
                     const ConstraintList& constraints, LevyOuClosedForms& out) {
  const std::size_t n2 = out.n2;

  if (auto v = fixed_value(constraints, kLevyOuLambda)) {
    out.lambda = *v;
  } else {
    if (n2 < 1)
      throw DegenerateFilterError(
          "lambda: the jump filter retained no increment (n2 == 0)");
    out.lambda = static_cast<double>(n2) / (static_cast<double>(n) * h);
  }

  if (auto v = fixed_value(constraints, kLevyOuMu)) {
    out.mu = *v;
  } else {
    if (n2 < 1)
      throw DegenerateFilterError("mu: the jump filter retained no increment (n2 == 0)");
    KahanSum sum;
    for (double dx : large_increments) sum.add(dx);
    out.mu = sum.value() / static_cast<double>(n2);
  }

  if (auto v = fixed_value(constraints, kLevyOuSigma2)) {
    out.sigma2 = *v;
  } else if (n2 >= 2) {
    KahanSum sum;
    for (double dx : large_increments) {
      const double dev = dx - out.mu;
      sum.add(dev * dev);
    }
    out.sigma2 = sum.value() / static_cast<double>(n2);
  }
  // n2 < 2 leaves sigma2 unset: the sample variance of one increment about
  // its own mean is identically zero.
}

}  // namespace

LevyOuClosedForms levy_ou_closed_forms(const Path& path, const Threshold& th1,
                                       const Threshold& th2, const Threshold& th3,
                                       const ConstraintList& constraints) {
  require_levy_ou_path(path);
  const std::size_t n = path.increments();
  const double h = path.step();
  const double c1 = cutoff(th1, h);
  const double c2 = cutoff(th2, h);
  const double c3 = cutoff(th3, h);

  KahanSum sum_dx2_small1;   // sum of dX^2 over the th1-small set
  KahanSum sum_x_dx_small3;  // sum of X_{i-1} dX over the th3-small set
  KahanSum sum_x2_small3;    // sum of X_{i-1}^2 over the th3-small set
  std::vector<double> large_increments;

  LevyOuClosedForms out;
  const double* x = path.values.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i + 1] - x[i];
    const double a = std::abs(dx);
    if (a <= c1) {
      ++out.n1;
      sum_dx2_small1.add(dx * dx);
    }
    if (a <= c3) {
      ++out.n3;
      sum_x_dx_small3.add(x[i] * dx);
      sum_x2_small3.add(x[i] * x[i]);
    }
    if (a > c2) {
      ++out.n2;
      large_increments.push_back(dx);
    }
  }

  if (auto v = fixed_value(constraints, kLevyOuAlpha)) {
    out.alpha = *v;
  } else {
    if (out.n1 < 1)
      throw DegenerateFilterError(
          "alpha: the diffusion filter retained no increment (n1 == 0)");
    out.alpha = std::sqrt(sum_dx2_small1.value() / (static_cast<double>(out.n1) * h));
  }

  if (auto v = fixed_value(constraints, kLevyOuBeta)) {
    out.beta = *v;
  } else {
    const double sum_x2 = sum_x2_small3.value();
    if (!(sum_x2 > 0.0))
      throw DegenerateFilterError(
          "beta: sum of X_{t_{i-1}}^2 over the th3-small set is zero");
    out.beta = -sum_x_dx_small3.value() / (h * sum_x2);
  }

  fill_jump_block(large_increments, n, h, constraints, out);
  return out;
}

LevyOuClosedForms levy_ou_joint_closed_forms(const Path& path, const Threshold& th1_bar,
                                             const Threshold& th2_bar,
                                             const ConstraintList& constraints) {
  require_levy_ou_path(path);
  const std::size_t n = path.increments();
  const double h = path.step();
  const double c1 = cutoff(th1_bar, h);
  const double c2 = cutoff(th2_bar, h);

  KahanSum sum_dx2;   // over the th1_bar-small set
  KahanSum sum_x_dx;
  KahanSum sum_x2;
  std::vector<double> large_increments;

  LevyOuClosedForms out;
  const double* x = path.values.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i + 1] - x[i];
    const double a = std::abs(dx);
    if (a <= c1) {
      ++out.n1;
      sum_dx2.add(dx * dx);
      sum_x_dx.add(x[i] * dx);
      sum_x2.add(x[i] * x[i]);
    }
    if (a > c2) {
      ++out.n2;
      large_increments.push_back(dx);
    }
  }
  out.n3 = out.n1;  // the joint continuous part uses one filter

  if (auto v = fixed_value(constraints, kLevyOuBeta)) {
    out.beta = *v;
  } else {
    if (!(sum_x2.value() > 0.0))
      throw DegenerateFilterError(
          "beta: sum of X_{t_{i-1}}^2 over the th1_bar-small set is zero");
    out.beta = -sum_x_dx.value() / (h * sum_x2.value());
  }

  if (auto v = fixed_value(constraints, kLevyOuAlpha)) {
    out.alpha = *v;
  } else {
    if (out.n1 < 1)
      throw DegenerateFilterError(
          "alpha: the joint continuous filter retained no increment (n1 == 0)");
    // sum of (dX + beta h X)^2 expanded over the cached sums
    const double bh = out.beta * h;
    const double quad =
        sum_dx2.value() + 2.0 * bh * sum_x_dx.value() + bh * bh * sum_x2.value();
    out.alpha = std::sqrt(std::max(quad, 0.0) / (static_cast<double>(out.n1) * h));
  }

  fill_jump_block(large_increments, n, h, constraints, out);
  return out;
}

namespace {

EstimateResult project_closed_forms(const LevyOuClosedForms& cf, const EstimationConfig& cfg) {
  if (!cf.sigma2)
    throw DegenerateFilterError(
        "sigma2: the jump filter must retain at least two increments (n2 < 2)");

  EstimateResult result;
  result.method = "closed_form";
  result.converged = true;
  result.n1 = cf.n1;
  result.n2 = cf.n2;
  result.n3 = cf.n3;

  const double raw[5] = {cf.alpha, cf.beta, cf.lambda, cf.mu, *cf.sigma2};
  std::vector<double> projected_values(5);
  result.projected.assign(5, false);
  for (std::size_t i = 0; i < 5; ++i) {
    projected_values[i] = cfg.bounds.project(raw[i], i);
    result.projected[i] = projected_values[i] != raw[i];
  }
  result.theta = ParamVector(std::move(projected_values), 1, 1, 3);
  return result;
}

}  // namespace

EstimateResult estimate_adaptive_levy_ou(const Path& path, const EstimationConfig& cfg) {
  cfg.validate(5);
  const auto cf = levy_ou_closed_forms(path, cfg.thresholds.th1, cfg.thresholds.th2,
                                       cfg.thresholds.th3, cfg.constraints);
  EstimateResult result = project_closed_forms(cf, cfg);

  if (cfg.with_loglik) {
    const ModelSpec model = levy_ou_model();
    QllContext ctx(model, path);
    result.loglik.l1 = qll_diffusion(ctx, result.theta.alpha(), cfg.thresholds.th1);
    result.loglik.l2_bar =
        qll_drift(ctx, result.theta.beta(), result.theta.alpha(), cfg.thresholds.th3);
    result.loglik.l2_tilde = qll_jump(ctx, result.theta.gamma(), cfg.thresholds.th2);
  }
  return result;
}

namespace {

/// Maximizes `objective` over the free coordinates of one parameter block.
/// Constrained coordinates stay at their fixed values; a fully constrained
/// block is returned as-is.
struct BlockResult {
  std::vector<double> values;
  double objective_value = 0.0;
  bool converged = true;
  bool optimized = false;
};

BlockResult maximize_block(const std::function<double(std::span<const double>)>& objective,
                           std::span<const double> lower, std::span<const double> upper,
                           std::size_t offset, std::size_t size,
                           const ConstraintList& constraints,
                           const OptimizerSettings& settings) {
  BlockResult block;
  block.values.resize(size);
  std::vector<std::size_t> free_idx;
  for (std::size_t k = 0; k < size; ++k) {
    if (auto v = fixed_value(constraints, offset + k)) {
      block.values[k] = *v;
    } else {
      free_idx.push_back(k);
      block.values[k] = 0.5 * (lower[offset + k] + upper[offset + k]);
    }
  }

  if (free_idx.empty()) {
    block.objective_value = objective(block.values);
    return block;
  }

  std::vector<double> lo(free_idx.size()), hi(free_idx.size()), x0(free_idx.size());
  for (std::size_t j = 0; j < free_idx.size(); ++j) {
    lo[j] = lower[offset + free_idx[j]];
    hi[j] = upper[offset + free_idx[j]];
    x0[j] = block.values[free_idx[j]];
  }

  std::vector<double> full = block.values;
  auto wrapped = [&](std::span<const double> free_values) {
    for (std::size_t j = 0; j < free_idx.size(); ++j) full[free_idx[j]] = free_values[j];
    return objective(full);
  };

  const OptResult opt = nelder_mead(wrapped, lo, hi, x0, settings);
  for (std::size_t j = 0; j < free_idx.size(); ++j) block.values[free_idx[j]] = opt.x[j];
  block.objective_value = opt.value;
  block.converged = opt.converged;
  block.optimized = true;
  return block;
}

}  // namespace

EstimateResult estimate_adaptive_generic(QllContext& ctx, const EstimationConfig& cfg) {
  const ModelSpec& model = ctx.model();
  const std::size_t p = model.p, q = model.q, r = model.r;
  cfg.validate(p + q + r);

  const auto& cls1 = ctx.classification(cfg.thresholds.th1);
  const auto& cls2 = ctx.classification(cfg.thresholds.th2);
  const auto& cls3 = ctx.classification(cfg.thresholds.th3);
  if (p > 0 && cls1.n_small == 0)
    throw DegenerateFilterError("alpha step: the diffusion filter retained no increment");
  if (r > 0 && cls2.n_large == 0)
    throw DegenerateFilterError("gamma step: the jump filter retained no increment");

  EstimateResult result;
  result.method = "optimizer";
  result.n1 = cls1.n_small;
  result.n2 = cls2.n_large;
  result.n3 = cls3.n_small;

  // Step 1: alpha.
  auto alpha_obj = [&](std::span<const double> a) {
    return qll_diffusion(ctx, a, cfg.thresholds.th1);
  };
  BlockResult alpha =
      maximize_block(alpha_obj, cfg.bounds.lower, cfg.bounds.upper, 0, p, cfg.constraints,
                     cfg.optimizer);

  // Step 2: beta given alpha.
  auto beta_obj = [&](std::span<const double> b) {
    return qll_drift(ctx, b, alpha.values, cfg.thresholds.th3);
  };
  BlockResult beta =
      maximize_block(beta_obj, cfg.bounds.lower, cfg.bounds.upper, p, q, cfg.constraints,
                     cfg.optimizer);

  // Step 3: gamma, independent of the first two.
  auto gamma_obj = [&](std::span<const double> g) {
    return qll_jump(ctx, g, cfg.thresholds.th2);
  };
  BlockResult gamma =
      maximize_block(gamma_obj, cfg.bounds.lower, cfg.bounds.upper, p + q, r,
                     cfg.constraints, cfg.optimizer);

  std::vector<double> flat;
  flat.reserve(p + q + r);
  flat.insert(flat.end(), alpha.values.begin(), alpha.values.end());
  flat.insert(flat.end(), beta.values.begin(), beta.values.end());
  flat.insert(flat.end(), gamma.values.begin(), gamma.values.end());
  result.theta = ParamVector(std::move(flat), p, q, r);
  result.projected.assign(p + q + r, false);
  result.converged = alpha.converged && beta.converged && gamma.converged;
  if (cfg.with_loglik) {
    result.loglik.l1 = p > 0 ? alpha.objective_value : 0.0;
    result.loglik.l2_bar = q > 0 ? beta.objective_value : 0.0;
    result.loglik.l2_tilde = r > 0 ? gamma.objective_value : 0.0;
  }
  return result;
}

EstimateResult estimate_joint(QllContext& ctx, const EstimationConfig& cfg) {
  const ModelSpec& model = ctx.model();
  const std::size_t count = model.p + model.q + model.r;
  cfg.validate(count);

  if (model.has_closed_form && model.dim == 1) {
    const auto cf = levy_ou_joint_closed_forms(ctx.path(), cfg.thresholds.th1_bar,
                                               cfg.thresholds.th2_bar, cfg.constraints);
    EstimateResult result = project_closed_forms(cf, cfg);
    if (cfg.with_loglik)
      result.loglik.joint =
          qll_joint(ctx, result.theta, cfg.thresholds.th1_bar, cfg.thresholds.th2_bar);
    return result;
  }

  // Seed the search at the adaptive estimate.
  EstimationConfig adaptive_cfg = cfg;
  adaptive_cfg.with_loglik = false;
  EstimateResult seed = estimate_adaptive_generic(ctx, adaptive_cfg);

  std::vector<std::size_t> free_idx;
  std::vector<double> lo, hi, x0;
  std::vector<double> full = seed.theta.values;
  for (std::size_t i = 0; i < count; ++i) {
    if (auto v = fixed_value(cfg.constraints, i)) {
      full[i] = *v;
    } else {
      free_idx.push_back(i);
    }
  }
  for (std::size_t idx : free_idx) {
    lo.push_back(cfg.bounds.lower[idx]);
    hi.push_back(cfg.bounds.upper[idx]);
    x0.push_back(full[idx]);
  }

  EstimateResult result;
  result.method = "optimizer";
  result.n1 = result.n3 = ctx.classification(cfg.thresholds.th1_bar).n_small;
  result.n2 = ctx.classification(cfg.thresholds.th2_bar).n_large;
  if (result.n2 == 0)
    throw DegenerateFilterError("joint estimation: the jump filter retained no increment");

  if (free_idx.empty()) {
    result.theta = ParamVector(std::move(full), model.p, model.q, model.r);
    result.projected.assign(count, false);
    result.method = "closed_form";
  } else {
    auto objective = [&](std::span<const double> free_values) {
      for (std::size_t j = 0; j < free_idx.size(); ++j) full[free_idx[j]] = free_values[j];
      const ParamVector theta(std::vector<double>(full), model.p, model.q, model.r);
      return qll_joint(ctx, theta, cfg.thresholds.th1_bar, cfg.thresholds.th2_bar);
    };
    const OptResult opt = nelder_mead(objective, lo, hi, x0, cfg.optimizer);
    for (std::size_t j = 0; j < free_idx.size(); ++j) full[free_idx[j]] = opt.x[j];
    result.theta = ParamVector(std::move(full), model.p, model.q, model.r);
    result.projected.assign(count, false);
    result.converged = opt.converged;
  }
  if (cfg.with_loglik)
    result.loglik.joint =
        qll_joint(ctx, result.theta, cfg.thresholds.th1_bar, cfg.thresholds.th2_bar);
  return result;
}

EstimateResult estimate_constrained(QllContext& ctx, const EstimationConfig& cfg,
                                    EstimatorKind kind) {
  const ModelSpec& model = ctx.model();
  const std::size_t count = model.p + model.q + model.r;
  cfg.validate(count);

  if (cfg.constraints.size() == count) {
    // Fully constrained: the estimator is the fixed point itself.
    std::vector<double> values(count);
    for (const auto& [idx, v] : cfg.constraints) values[idx] = v;
    EstimateResult result;
    result.theta = ParamVector(std::move(values), model.p, model.q, model.r);
    result.method = "closed_form";
    result.converged = true;
    result.projected.assign(count, false);
    const Threshold& small_th =
        kind == EstimatorKind::joint ? cfg.thresholds.th1_bar : cfg.thresholds.th1;
    const Threshold& large_th =
        kind == EstimatorKind::joint ? cfg.thresholds.th2_bar : cfg.thresholds.th2;
    result.n1 = result.n3 = ctx.classification(small_th).n_small;
    result.n2 = ctx.classification(large_th).n_large;
    return result;
  }

  if (kind == EstimatorKind::joint) return estimate_joint(ctx, cfg);
  if (model.has_closed_form && model.dim == 1)
    return estimate_adaptive_levy_ou(ctx.path(), cfg);
  return estimate_adaptive_generic(ctx, cfg);
}

}  // namespace jdqml
