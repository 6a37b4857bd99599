#include "jdqml/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jdqml/errors.hpp"

namespace jdqml {

void OptimizerSettings::validate() const {
  if (max_iterations < 1) throw InvalidParameterError("OptimizerSettings: max_iterations >= 1");
  if (!(x_tolerance > 0.0)) throw InvalidParameterError("OptimizerSettings: x_tolerance > 0");
  if (!(f_tolerance > 0.0)) throw InvalidParameterError("OptimizerSettings: f_tolerance > 0");
  if (restarts < 1) throw InvalidParameterError("OptimizerSettings: restarts >= 1");
}

namespace {

// Standard Nelder-Mead coefficients.
constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

struct Simplex {
  std::vector<std::vector<double>> x;  // n+1 vertices
  std::vector<double> f;               // negated objective (minimized)
};

void clamp_into_box(std::vector<double>& v, std::span<const double> lo,
                    std::span<const double> hi) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
}

/// One Nelder-Mead run; returns (best point, value, converged, iterations).
struct RunResult {
  std::vector<double> x;
  double f;
  bool converged;
  long iterations;
};

RunResult run_simplex(const std::function<double(std::span<const double>)>& objective,
                      std::span<const double> lo, std::span<const double> hi,
                      const std::vector<double>& start, double step_fraction,
                      const OptimizerSettings& settings) {
  const std::size_t dim = start.size();
  auto eval = [&](const std::vector<double>& v) { return -objective(v); };

  Simplex s;
  s.x.assign(dim + 1, start);
  for (std::size_t j = 0; j < dim; ++j) {
    const double width = hi[j] - lo[j];
    double step = step_fraction * width;
    // Step inward when the start sits at the upper edge.
    if (start[j] + step > hi[j]) step = -step;
    s.x[j + 1][j] += step;
    clamp_into_box(s.x[j + 1], lo, hi);
  }
  s.f.resize(dim + 1);
  for (std::size_t j = 0; j <= dim; ++j) s.f[j] = eval(s.x[j]);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), candidate(dim);
  bool converged = false;
  long iter = 0;

  for (; iter < settings.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });

    const std::size_t best = order[0];
    const std::size_t worst = order[dim];
    const std::size_t second_worst = order[dim - 1];

    double x_spread = 0.0;
    for (std::size_t j = 0; j <= dim; ++j) {
      for (std::size_t k = 0; k < dim; ++k)
        x_spread = std::max(x_spread, std::abs(s.x[j][k] - s.x[best][k]));
    }
    const double f_spread = std::abs(s.f[worst] - s.f[best]);
    if (x_spread <= settings.x_tolerance &&
        f_spread <= settings.f_tolerance * (1.0 + std::abs(s.f[best]))) {
      converged = true;
      break;
    }

    for (std::size_t k = 0; k < dim; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= dim; ++j) {
        if (j != worst) acc += s.x[j][k];
      }
      centroid[k] = acc / static_cast<double>(dim);
    }

    auto blend = [&](double coeff) {
      for (std::size_t k = 0; k < dim; ++k)
        candidate[k] = centroid[k] + coeff * (centroid[k] - s.x[worst][k]);
      clamp_into_box(candidate, lo, hi);
    };

    blend(kReflect);
    const std::vector<double> reflected = candidate;
    const double f_reflected = eval(reflected);

    if (f_reflected < s.f[best]) {
      blend(kExpand);
      const double f_expanded = eval(candidate);
      if (f_expanded < f_reflected) {
        s.x[worst] = candidate;
        s.f[worst] = f_expanded;
      } else {
        s.x[worst] = reflected;
        s.f[worst] = f_reflected;
      }
    } else if (f_reflected < s.f[second_worst]) {
      s.x[worst] = reflected;
      s.f[worst] = f_reflected;
    } else {
      const bool outside = f_reflected < s.f[worst];
      blend(outside ? kContract : -kContract);
      const double f_contracted = eval(candidate);
      if (f_contracted < (outside ? f_reflected : s.f[worst])) {
        s.x[worst] = candidate;
        s.f[worst] = f_contracted;
      } else {
        for (std::size_t j = 0; j <= dim; ++j) {
          if (j == best) continue;
          for (std::size_t k = 0; k < dim; ++k)
            s.x[j][k] = s.x[best][k] + kShrink * (s.x[j][k] - s.x[best][k]);
          clamp_into_box(s.x[j], lo, hi);
          s.f[j] = eval(s.x[j]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t j = 1; j <= dim; ++j) {
    if (s.f[j] < s.f[best]) best = j;
  }
  return {s.x[best], s.f[best], converged, iter};
}

}  // namespace

OptResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                      std::span<const double> lower, std::span<const double> upper,
                      std::span<const double> start, const OptimizerSettings& settings) {
  settings.validate();
  const std::size_t dim = start.size();
  if (dim == 0) throw InvalidParameterError("nelder_mead: empty search space");
  if (lower.size() != dim || upper.size() != dim)
    throw InvalidParameterError("nelder_mead: bounds do not match dimension");
  for (std::size_t j = 0; j < dim; ++j) {
    if (!(lower[j] < upper[j]))
      throw InvalidParameterError("nelder_mead: degenerate box (lower >= upper)");
  }

  std::vector<double> x0(start.begin(), start.end());
  clamp_into_box(x0, lower, upper);

  OptResult result;
  result.x = x0;
  result.value = objective(result.x);

  // Restart from the incumbent with a shrinking simplex; deterministic.
  for (int restart = 0; restart < settings.restarts; ++restart) {
    const double fraction = 0.10 / std::pow(4.0, restart);
    RunResult run = run_simplex(objective, lower, upper, result.x, fraction, settings);
    result.iterations += run.iterations;
    const double value = -run.f;
    if (value > result.value) {
      result.value = value;
      result.x = run.x;
    }
    result.converged = run.converged;
  }
  return result;
}

}  // namespace jdqml
