#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "jdqml/estimate.hpp"
#include "jdqml/inference.hpp"
#include "jdqml/params.hpp"

namespace jdqml {

/// One estimation-study cell: the three adaptive filter exponents.
struct RhoCell {
  double rho1 = 0.26;
  double rho2 = 0.26;
  double rho3 = 0.26;
};

/// Data-generating truth plus the test scenario (H0 constraints, level).
struct Scenario {
  ParamVector theta_true;
  ConstraintList constraints;  ///< empty for estimation studies
  double eps = 0.05;
};

struct StudyConfig {
  Scenario scenario;

  /// Estimation study: one cell per (rho1, rho2, rho3) triple.
  std::vector<RhoCell> estimation_cells;

  /// Test study: cells form the product rho1_bar_grid x rho2_bar_grid with
  /// the adaptive filters fixed at `thresholds`.
  std::vector<double> rho1_bar_grid;
  std::vector<double> rho2_bar_grid;

  ThresholdSet thresholds;  ///< D values everywhere; fixed rhos for test studies
  ParamBounds bounds = ParamBounds::levy_ou_default();

  std::size_t replications = 100;
  std::size_t n = 1000000;
  double h = 0.0;             ///< explicit step; 0 means use h_exponent
  double h_exponent = 2.0 / 3.0;  ///< h = n^(-h_exponent)
  std::uint64_t base_seed = 1;
  unsigned parallelism = 0;   ///< worker threads; 0 means hardware concurrency

  double step() const;
  void validate() const;
};

struct CellReport {
  std::string label;
  RhoCell rhos;                       ///< estimation cells
  double rho1_bar = 0.0, rho2_bar = 0.0;  ///< test cells

  std::array<double, 5> mean{};
  std::array<double, 5> sd{};
  /// Standardized estimator components of each surviving replication
  /// (estimation studies only).
  std::vector<std::array<double, 5>> standardized;
  /// Lambda_n of each surviving replication (test studies only).
  std::vector<double> lambda_samples;

  std::size_t rejections = 0;
  std::size_t failures = 0;  ///< degenerate-filter replications, excluded from means
  std::size_t replications = 0;
  int df = 0;
  double critical_value = 0.0;

  std::uint64_t first_seed = 0, last_seed = 0;  ///< derived stream seeds of rep 0 / M-1
  double wall_seconds = 0.0;

  double rejection_rate() const {
    const std::size_t effective = replications - failures;
    return effective == 0 ? 0.0 : static_cast<double>(rejections) / static_cast<double>(effective);
  }
};

struct StudyReport {
  std::string kind;  ///< "estimation" or "test"
  StudyConfig config;
  std::vector<CellReport> cells;
};

/// Simulates and adaptively estimates `replications` paths per cell.
/// Per-replication failures are recorded, never abort the study. The report
/// is identical for identical configs regardless of parallelism.
StudyReport run_estimation_study(const StudyConfig& cfg);

/// Per replication: simulate under the scenario truth, compute the adaptive
/// estimate and its constrained counterpart, evaluate Lambda_n at each
/// (rho1_bar, rho2_bar) cell and record the decision at level eps.
StudyReport run_test_study(const StudyConfig& cfg);

/// Writes means.csv / sds.csv (one row per rho cell), rejections.csv (the
/// rho1_bar x rho2_bar rate matrix), per-cell QQ CSVs and manifest.json into
/// out_dir. Files are
/// written whole-then-renamed so interrupted runs leave no partial CSVs.
void export_report(const StudyReport& report, const std::string& out_dir);

/// (i - 0.5) / m plotting positions mapped through the inverse target CDF are
/// paired with the sorted sample; used for all QQ exports.
std::vector<std::pair<double, double>> qq_pairs(std::vector<double> sample,
                                                const std::function<double(double)>& quantile);

}  // namespace jdqml
