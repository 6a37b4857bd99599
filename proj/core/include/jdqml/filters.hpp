#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jdqml/path.hpp"

namespace jdqml {

/// One (D, rho) filter pair: increments with |dX_i| <= D * h^rho are
/// classified as continuous-part ("small"), the rest as jump-part ("large").
struct Threshold {
  double D = 1.0;
  double rho = 0.26;

  void validate() const;
};

double cutoff(const Threshold& th, double h);

struct IncrementClassification {
  std::vector<std::uint8_t> small_mask;  ///< 1 iff |dX_i| <= cutoff (ties are small)
  std::size_t n_small = 0;
  std::size_t n_large = 0;
  double cutoff_value = 0.0;

  bool is_small(std::size_t i) const { return small_mask[i] != 0; }
};

/// Classifies every increment of the path; Euclidean norm for dim > 1.
IncrementClassification classify(const Path& path, const Threshold& th);

/// Writes one row per increment (`t,dx,small`, %.17g) next to a path export.
void write_classification_csv(const Path& path, const IncrementClassification& cls,
                              const std::string& filename);

/// Advisory diagnostics for the balance conditions: reported, never enforced.
struct BalanceReport {
  double nh = 0.0;
  double nh2 = 0.0;
  double nh_1_plus_delta = 0.0;
  double delta = 0.0;

  struct SlotCheck {
    int slot = 0;  ///< 1..3 adaptive, 4..5 joint (rho1_bar, rho2_bar)
    double rho = 0.0;
    bool admissible = false;
    double window_lo = 0.0;  ///< admissible window within (0, 1/2)
    std::string note;
  };
  std::vector<SlotCheck> slots;
};

/// Reports nh, nh^2, n*h^(1+delta) and whether each rho lies in the
/// admissible window of the asymptotic-normality conditions
/// (slot 1: rho > 1/5 and rho >= (1+delta)/6; slot 2: rho >= delta/2;
/// slot 3: rho >= delta/4; slots 4-5 mirror slots 1-2).
BalanceReport balance_diagnostics(std::size_t n, double h,
                                  const std::vector<Threshold>& thresholds, double delta);

}  // namespace jdqml
