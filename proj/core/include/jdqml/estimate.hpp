#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jdqml/filters.hpp"
#include "jdqml/likelihood.hpp"
#include "jdqml/optimize.hpp"
#include "jdqml/params.hpp"

namespace jdqml {

/// The five filter pairs: th1..th3 drive the adaptive estimator, th1_bar and
/// th2_bar the joint likelihood used by the test statistic.
struct ThresholdSet {
  Threshold th1{1.0, 0.285};
  Threshold th2{1.0, 0.26};
  Threshold th3{1.0, 0.255};
  Threshold th1_bar{1.0, 0.26};
  Threshold th2_bar{1.0, 0.26};
};

/// A constraint freezes one flat-layout component at a fixed value.
using ConstraintList = std::vector<std::pair<std::size_t, double>>;

struct EstimationConfig {
  ThresholdSet thresholds;
  ParamBounds bounds = ParamBounds::levy_ou_default();
  OptimizerSettings optimizer;
  ConstraintList constraints;
  bool with_loglik = true;  ///< fill EstimateResult::loglik (three extra passes)

  void validate(std::size_t param_count) const;
};

struct LoglikParts {
  std::optional<double> l1;        ///< l_n^(1)(alpha)
  std::optional<double> l2_bar;    ///< l-bar_n^(2)(beta | alpha)
  std::optional<double> l2_tilde;  ///< l-tilde_n^(2)(gamma)
  std::optional<double> joint;     ///< l_n(theta)
};

struct EstimateResult {
  ParamVector theta;
  std::size_t n1 = 0, n2 = 0, n3 = 0;  ///< filter counts (joint: n1 = n3 = th1_bar count)
  LoglikParts loglik;
  std::string method;  ///< "closed_form" or "optimizer"
  bool converged = true;
  std::vector<bool> projected;  ///< component was clamped onto its bounds interval
};

/// Closed-form component estimates for the Levy-OU model. sigma2 is only
/// defined when the jump filter retains at least two increments.
struct LevyOuClosedForms {
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  std::optional<double> sigma2;
  std::size_t n1 = 0, n2 = 0, n3 = 0;
};

/// Adaptive closed forms: alpha from th1-small raw increments, beta from the
/// th3-small regression, (lambda, mu, sigma2) from the th2-large increments.
/// Constrained components are frozen; free components keep their closed
/// forms (sigma2 centers on the constrained mu when mu is fixed).
LevyOuClosedForms levy_ou_closed_forms(const Path& path, const Threshold& th1,
                                       const Threshold& th2, const Threshold& th3,
                                       const ConstraintList& constraints = {});

/// Joint closed forms: beta from the th1_bar-small regression, alpha from the
/// beta-residuals on the same filter, jump block from th2_bar.
LevyOuClosedForms levy_ou_joint_closed_forms(const Path& path, const Threshold& th1_bar,
                                             const Threshold& th2_bar,
                                             const ConstraintList& constraints = {});

/// Three-step adaptive estimator via the Levy-OU closed forms, projected onto
/// the bounds box. Throws DegenerateFilterError naming the failed count.
EstimateResult estimate_adaptive_levy_ou(const Path& path, const EstimationConfig& cfg);

/// Three sequential box-constrained maximizations with the derivative-free
/// optimizer: alpha first, then beta given alpha, then gamma.
EstimateResult estimate_adaptive_generic(QllContext& ctx, const EstimationConfig& cfg);

/// Maximizes the joint quasi-log likelihood. Uses the Levy-OU closed forms
/// when the model has them, otherwise a multi-start derivative-free search
/// seeded at the adaptive estimate.
EstimateResult estimate_joint(QllContext& ctx, const EstimationConfig& cfg);

enum class EstimatorKind { adaptive, joint };

/// Runs the adaptive or joint procedure with the constrained components
/// frozen at their fixed values; free components are optimized over the
/// reduced box. A fully constrained configuration returns the fixed point.
EstimateResult estimate_constrained(QllContext& ctx, const EstimationConfig& cfg,
                                    EstimatorKind kind = EstimatorKind::adaptive);

}  // namespace jdqml
