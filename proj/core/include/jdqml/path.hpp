#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jdqml {

/// Simulation grid: n increments of size h, horizon T = n*h.
struct PathConfig {
  std::size_t n = 0;
  double h = 0.0;
  std::uint64_t seed = 0;
  /// Burn-in horizon for the stationary start; unset means 50/beta.
  std::optional<double> burn_in_time;
  /// Euler substeps per observation interval (generic scheme only).
  int substeps = 1;
  /// Explicit initial state; unset means a stationary burn-in start.
  std::optional<std::vector<double>> initial_state;

  void validate() const;
};

/// Discrete observations (X_{t_i})_{0<=i<=n} on the grid t_i = i*h, plus
/// optional ground-truth per-interval jump counts.
struct Path {
  std::vector<double> times;   ///< length n+1, times[i] = i*h
  std::vector<double> values;  ///< (n+1) x dim, row-major
  int dim = 1;
  std::optional<std::vector<std::uint32_t>> jump_marks;  ///< length n

  std::size_t increments() const { return times.empty() ? 0 : times.size() - 1; }

  double step() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

  std::span<const double> state(std::size_t i) const {
    return {values.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }

  /// Scalar accessor for dim == 1.
  double value(std::size_t i) const { return values[i]; }
};

/// Writes `t,x[,jumps]` (or `t,x1,..,xd[,jumps]`) with a header row and
/// %.17g formatting.
void write_path_csv(const Path& path, const std::string& filename);

/// Reads a path CSV produced by write_path_csv (the `jumps` column is
/// optional). Throws ParseError naming the offending line.
Path read_path_csv(const std::string& filename);

}  // namespace jdqml
