#pragma once

#include <map>
#include <mutex>
#include <span>
#include <utility>

#include "jdqml/filters.hpp"
#include "jdqml/model.hpp"
#include "jdqml/params.hpp"
#include "jdqml/path.hpp"

namespace jdqml {

/// Shared evaluation state for the quasi-log likelihood functions: the model,
/// the observed path and a classification cache keyed by (D, rho).
/// Evaluations are read-only apart from the cache, which is locked, so
/// concurrent evaluations at different parameters are safe.
class QllContext {
 public:
  QllContext(const ModelSpec& model, const Path& path) : model_(&model), path_(&path) {}

  const ModelSpec& model() const { return *model_; }
  const Path& path() const { return *path_; }

  const IncrementClassification& classification(const Threshold& th);

 private:
  const ModelSpec* model_;
  const Path* path_;
  std::map<std::pair<double, double>, IncrementClassification> cache_;
  std::mutex cache_mutex_;
};

/// l_n^(1)(alpha): continuous-part quasi-log likelihood over the th1-small
/// increments, with raw increments (no drift residual).
double qll_diffusion(QllContext& ctx, std::span<const double> alpha, const Threshold& th1);

/// l-bar_n^(2)(beta | alpha_bar): drift quasi-log likelihood over the
/// th3-small increments. No log-det term.
double qll_drift(QllContext& ctx, std::span<const double> beta,
                 std::span<const double> alpha_bar, const Threshold& th3);

/// l-tilde_n^(2)(gamma): jump-part quasi-log likelihood over the th2-large
/// increments minus the compensator h * sum_i jump_mass(X_{t_{i-1}}, gamma)
/// taken over all n increments.
double qll_jump(QllContext& ctx, std::span<const double> gamma, const Threshold& th2);

/// l_n(theta): joint quasi-log likelihood, the drift-residual continuous part
/// filtered by th1_bar plus the jump part filtered by th2_bar.
double qll_joint(QllContext& ctx, const ParamVector& theta, const Threshold& th1_bar,
                 const Threshold& th2_bar);

}  // namespace jdqml
