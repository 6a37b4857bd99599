#include "jdqml/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "jdqml/errors.hpp"
#include "jdqml/kahan.hpp"
#include "jdqml/simulate.hpp"

namespace jdqml {

double StudyConfig::step() const {
  return h > 0.0 ? h : std::pow(static_cast<double>(n), -h_exponent);
}

void StudyConfig::validate() const {
  if (replications < 1) throw InvalidParameterError("StudyConfig: replications >= 1");
  if (n < 1) throw InvalidParameterError("StudyConfig: n >= 1");
  const double hh = step();
  if (!(hh > 0.0 && hh < 1.0))
    throw InvalidParameterError("StudyConfig: the h rule must yield h in (0, 1)");
  scenario.theta_true.validate();
  for (const RhoCell& cell : estimation_cells) {
    for (double rho : {cell.rho1, cell.rho2, cell.rho3}) {
      if (!(rho > 0.0 && rho < 0.5))
        throw InvalidParameterError("StudyConfig: every rho must lie in (0, 1/2)");
    }
  }
  for (double rho : rho1_bar_grid) {
    if (!(rho > 0.0 && rho < 0.5))
      throw InvalidParameterError("StudyConfig: every rho1_bar must lie in (0, 1/2)");
  }
  for (double rho : rho2_bar_grid) {
    if (!(rho > 0.0 && rho < 0.5))
      throw InvalidParameterError("StudyConfig: every rho2_bar must lie in (0, 1/2)");
  }
}

namespace {

/// Runs fn(rep) for rep in [0, count) on `workers` threads. Work is split by
/// residue class and results land in per-index slots, so the outcome does not
/// depend on the schedule.
void parallel_reps(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
  unsigned hw = workers == 0 ? std::thread::hardware_concurrency() : workers;
  if (hw == 0) hw = 1;
  hw = static_cast<unsigned>(std::min<std::size_t>(hw, count));
  if (hw <= 1) {
    for (std::size_t rep = 0; rep < count; ++rep) fn(rep);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(hw);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (unsigned t = 0; t < hw; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t rep = t; rep < count; rep += hw) fn(rep);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_rho(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", rho);
  return buf;
}

struct RepOutcome {
  bool failed = false;
  std::array<double, 5> theta{};
  std::array<double, 5> standardized{};
  double lambda = 0.0;
  bool reject = false;
};

void finalize_moments(CellReport& cell, const std::vector<RepOutcome>& outcomes) {
  KahanSum sums[5];
  std::size_t kept = 0;
  for (const RepOutcome& rep : outcomes) {
    if (rep.failed) continue;
    ++kept;
    for (std::size_t k = 0; k < 5; ++k) sums[k].add(rep.theta[k]);
  }
  if (kept > 0) {
    for (std::size_t k = 0; k < 5; ++k)
      cell.mean[k] = sums[k].value() / static_cast<double>(kept);
  }
  if (kept > 1) {
    KahanSum sq[5];
    for (const RepOutcome& rep : outcomes) {
      if (rep.failed) continue;
      for (std::size_t k = 0; k < 5; ++k) {
        const double dev = rep.theta[k] - cell.mean[k];
        sq[k].add(dev * dev);
      }
    }
    for (std::size_t k = 0; k < 5; ++k)
      cell.sd[k] = std::sqrt(sq[k].value() / static_cast<double>(kept - 1));
  }
}

}  // namespace

StudyReport run_estimation_study(const StudyConfig& cfg) {
  cfg.validate();
  if (!cfg.scenario.constraints.empty())
    throw InvalidParameterError("run_estimation_study: scenario must have no constraints");
  if (cfg.estimation_cells.empty())
    throw InvalidParameterError("run_estimation_study: no cells configured");

  StudyReport report;
  report.kind = "estimation";
  report.config = cfg;

  const double h = cfg.step();
  const std::size_t M = cfg.replications;

  for (std::size_t ci = 0; ci < cfg.estimation_cells.size(); ++ci) {
    const RhoCell& rhos = cfg.estimation_cells[ci];
    const auto started = std::chrono::steady_clock::now();

    CellReport cell;
    cell.rhos = rhos;
    cell.label = "rho1_" + format_rho(rhos.rho1) + "_rho2_" + format_rho(rhos.rho2) +
                 "_rho3_" + format_rho(rhos.rho3);
    cell.replications = M;
    cell.first_seed = stream_seed(cfg.base_seed, ci, 0);
    cell.last_seed = stream_seed(cfg.base_seed, ci, M - 1);

    EstimationConfig est;
    est.thresholds = cfg.thresholds;
    est.thresholds.th1.rho = rhos.rho1;
    est.thresholds.th2.rho = rhos.rho2;
    est.thresholds.th3.rho = rhos.rho3;
    est.bounds = cfg.bounds;
    est.with_loglik = false;

    std::vector<RepOutcome> outcomes(M);
    parallel_reps(M, cfg.parallelism, [&](std::size_t rep) {
      PathConfig pc;
      pc.n = cfg.n;
      pc.h = h;
      pc.seed = stream_seed(cfg.base_seed, ci, rep);
      const Path path = simulate_levy_ou(cfg.scenario.theta_true, pc);
      RepOutcome& out = outcomes[rep];
      try {
        const EstimateResult est_result = estimate_adaptive_levy_ou(path, est);
        const AsymptoticInfo info =
            asymptotic_covariance_levy_ou(cfg.scenario.theta_true, estimate_mu2(path));
        const auto z = standardize(est_result, cfg.scenario.theta_true, info, cfg.n, h);
        for (std::size_t k = 0; k < 5; ++k) out.theta[k] = est_result.theta.values[k];
        out.standardized = z;
      } catch (const DegenerateFilterError&) {
        out.failed = true;
      }
    });

    for (const RepOutcome& rep : outcomes) {
      if (rep.failed) {
        ++cell.failures;
      } else {
        cell.standardized.push_back(rep.standardized);
      }
    }
    finalize_moments(cell, outcomes);

    cell.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.cells.push_back(std::move(cell));
  }
  return report;
}

StudyReport run_test_study(const StudyConfig& cfg) {
  cfg.validate();
  if (cfg.scenario.constraints.empty())
    throw InvalidParameterError("run_test_study: scenario needs an H0 constraint set");
  if (cfg.rho1_bar_grid.empty() || cfg.rho2_bar_grid.empty())
    throw InvalidParameterError("run_test_study: empty rho_bar grid");

  StudyReport report;
  report.kind = "test";
  report.config = cfg;

  const double h = cfg.step();
  const std::size_t M = cfg.replications;
  const int df = static_cast<int>(cfg.scenario.constraints.size());
  const double critical = chi2_quantile(cfg.scenario.eps, df);
  const ModelSpec model = levy_ou_model();

  std::size_t ci = 0;
  for (double rho1_bar : cfg.rho1_bar_grid) {
    for (double rho2_bar : cfg.rho2_bar_grid) {
      const auto started = std::chrono::steady_clock::now();

      CellReport cell;
      cell.rho1_bar = rho1_bar;
      cell.rho2_bar = rho2_bar;
      cell.label = "rho1bar_" + format_rho(rho1_bar) + "_rho2bar_" + format_rho(rho2_bar);
      cell.replications = M;
      cell.df = df;
      cell.critical_value = critical;
      cell.first_seed = stream_seed(cfg.base_seed, ci, 0);
      cell.last_seed = stream_seed(cfg.base_seed, ci, M - 1);

      EstimationConfig est;
      est.thresholds = cfg.thresholds;
      est.thresholds.th1_bar.rho = rho1_bar;
      est.thresholds.th2_bar.rho = rho2_bar;
      est.bounds = cfg.bounds;
      est.with_loglik = false;

      EstimationConfig est_null = est;
      est_null.constraints = cfg.scenario.constraints;

      std::vector<RepOutcome> outcomes(M);
      parallel_reps(M, cfg.parallelism, [&](std::size_t rep) {
        PathConfig pc;
        pc.n = cfg.n;
        pc.h = h;
        pc.seed = stream_seed(cfg.base_seed, ci, rep);
        const Path path = simulate_levy_ou(cfg.scenario.theta_true, pc);
        RepOutcome& out = outcomes[rep];
        try {
          QllContext ctx(model, path);
          const EstimateResult fitted = estimate_adaptive_levy_ou(path, est);
          const EstimateResult null_fit = estimate_constrained(ctx, est_null);
          out.lambda = qlr_statistic(ctx, fitted, null_fit, est.thresholds.th1_bar,
                                     est.thresholds.th2_bar);
          out.reject = out.lambda > critical;
        } catch (const DegenerateFilterError&) {
          out.failed = true;
        }
      });

      for (const RepOutcome& rep : outcomes) {
        if (rep.failed) {
          ++cell.failures;
          continue;
        }
        cell.lambda_samples.push_back(rep.lambda);
        cell.rejections += rep.reject ? 1 : 0;
      }

      cell.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      report.cells.push_back(std::move(cell));
      ++ci;
    }
  }
  return report;
}

std::vector<std::pair<double, double>> qq_pairs(std::vector<double> sample,
                                                const std::function<double(double)>& quantile) {
  std::sort(sample.begin(), sample.end());
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(sample.size());
  const double m = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double position = (static_cast<double>(i) + 0.5) / m;
    pairs.emplace_back(quantile(position), sample[i]);
  }
  return pairs;
}

namespace {

using nlohmann::json;

void atomic_write(const std::filesystem::path& target, const std::string& content) {
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

std::string cell_csv_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// N(0,1) quantile by bisection on the CDF; only used for QQ exports.
double normal_quantile(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (standard_normal_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double chi2_quantile_p(double p, int df) {
  // chi2_quantile takes the upper-tail mass.
  return chi2_quantile(1.0 - p, df);
}

constexpr const char* kParamNames[5] = {"alpha", "beta", "lambda", "mu", "sigma2"};

json config_to_json(const StudyConfig& cfg, const std::string& kind) {
  json j;
  j["kind"] = kind;
  j["replications"] = cfg.replications;
  j["n"] = cfg.n;
  j["h"] = cfg.step();
  j["base_seed"] = cfg.base_seed;
  j["parallelism"] = cfg.parallelism;
  j["seed_derivation"] =
      "stream_seed(base_seed, cell_index, replication_index) via splitmix64";
  j["theta_true"] = cfg.scenario.theta_true.values;
  j["eps"] = cfg.scenario.eps;
  json cons = json::array();
  for (const auto& [idx, v] : cfg.scenario.constraints)
    cons.push_back({{"component", kParamNames[idx]}, {"value", v}});
  j["constraints"] = cons;
  j["thresholds"] = {
      {"D1", cfg.thresholds.th1.D},         {"rho1", cfg.thresholds.th1.rho},
      {"D2", cfg.thresholds.th2.D},         {"rho2", cfg.thresholds.th2.rho},
      {"D3", cfg.thresholds.th3.D},         {"rho3", cfg.thresholds.th3.rho},
      {"D1_bar", cfg.thresholds.th1_bar.D}, {"rho1_bar", cfg.thresholds.th1_bar.rho},
      {"D2_bar", cfg.thresholds.th2_bar.D}, {"rho2_bar", cfg.thresholds.th2_bar.rho}};
  return j;
}

}  // namespace

void export_report(const StudyReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  // means.csv / sds.csv: rows are rho cells, columns the five parameters.
  for (const bool want_sd : {false, true}) {
    std::string csv = "rho1,rho2,rho3,alpha,beta,lambda,mu,sigma2\n";
    if (report.kind == "estimation") {
      for (const CellReport& cell : report.cells) {
        csv += format_rho(cell.rhos.rho1) + "," + format_rho(cell.rhos.rho2) + "," +
               format_rho(cell.rhos.rho3);
        const auto& row = want_sd ? cell.sd : cell.mean;
        for (double v : row) csv += "," + cell_csv_value(v);
        csv += '\n';
      }
    }
    atomic_write(dir / (want_sd ? "sds.csv" : "means.csv"), csv);
  }

  // rejections.csv: rho1_bar rows x rho2_bar columns of rejection rates.
  {
    std::string csv = "rho1_bar";
    for (double rho2 : report.config.rho2_bar_grid) csv += "," + format_rho(rho2);
    csv += '\n';
    if (report.kind == "test") {
      std::size_t ci = 0;
      for (double rho1 : report.config.rho1_bar_grid) {
        if (ci + report.config.rho2_bar_grid.size() > report.cells.size()) break;
        csv += format_rho(rho1);
        for (std::size_t k = 0; k < report.config.rho2_bar_grid.size(); ++k) {
          csv += "," + cell_csv_value(report.cells[ci].rejection_rate());
          ++ci;
        }
        csv += '\n';
      }
    }
    atomic_write(dir / "rejections.csv", csv);
  }

  // Per-cell QQ data: two columns, theoretical then empirical quantiles.
  for (const CellReport& cell : report.cells) {
    if (report.kind == "estimation") {
      for (std::size_t k = 0; k < 5; ++k) {
        std::vector<double> component;
        component.reserve(cell.standardized.size());
        for (const auto& z : cell.standardized) component.push_back(z[k]);
        std::string csv = "theoretical,empirical\n";
        if (!component.empty()) {
          for (const auto& [t, e] : qq_pairs(std::move(component), normal_quantile))
            csv += g17(t) + "," + g17(e) + "\n";
        }
        atomic_write(dir / ("qq_" + cell.label + "_" + kParamNames[k] + ".csv"), csv);
      }
    } else {
      std::string csv = "theoretical,empirical\n";
      if (!cell.lambda_samples.empty()) {
        const int df = cell.df;
        auto quantile = [df](double p) { return chi2_quantile_p(p, df); };
        for (const auto& [t, e] : qq_pairs(cell.lambda_samples, quantile))
          csv += g17(t) + "," + g17(e) + "\n";
      }
      atomic_write(dir / ("qq_" + cell.label + "_lambda_n.csv"), csv);
    }
  }

  // manifest.json: everything needed to re-run bit-identically.
  json manifest = config_to_json(report.config, report.kind);
  json cells = json::array();
  for (const CellReport& cell : report.cells) {
    json c;
    c["label"] = cell.label;
    if (report.kind == "estimation") {
      c["rho1"] = cell.rhos.rho1;
      c["rho2"] = cell.rhos.rho2;
      c["rho3"] = cell.rhos.rho3;
      json means, sds;
      for (std::size_t k = 0; k < 5; ++k) {
        means[kParamNames[k]] = cell.mean[k];
        sds[kParamNames[k]] = cell.sd[k];
      }
      c["mean"] = means;
      c["sd"] = sds;
    } else {
      c["rho1_bar"] = cell.rho1_bar;
      c["rho2_bar"] = cell.rho2_bar;
      c["df"] = cell.df;
      c["critical_value"] = cell.critical_value;
      c["rejections"] = cell.rejections;
      c["rejection_rate"] = cell.rejection_rate();
    }
    c["replications"] = cell.replications;
    c["failures"] = cell.failures;
    c["first_seed"] = cell.first_seed;
    c["last_seed"] = cell.last_seed;
    c["wall_seconds"] = cell.wall_seconds;
    cells.push_back(c);
  }
  manifest["cells"] = cells;
  manifest["version"] = "jdqml 0.1.0";
  atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace jdqml
