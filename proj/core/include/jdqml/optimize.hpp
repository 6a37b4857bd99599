#pragma once

#include <functional>
#include <span>
#include <vector>

namespace jdqml {

struct OptimizerSettings {
  int max_iterations = 2000;  ///< per restart
  double x_tolerance = 1e-8;
  double f_tolerance = 1e-10;
  int restarts = 3;

  void validate() const;
};

struct OptResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  long iterations = 0;
};

/// Box-constrained Nelder-Mead maximization: reflection, expansion,
/// contraction and shrink steps with candidates projected onto the box.
/// Restarts rebuild the simplex around the incumbent with a deterministic
/// perturbation, so results are reproducible for fixed settings.
OptResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                      std::span<const double> lower, std::span<const double> upper,
                      std::span<const double> start, const OptimizerSettings& settings = {});

}  // namespace jdqml
