// Command-line front door: simulate paths, estimate from observation files,
// run a single quasi-likelihood ratio test, or drive a Monte Carlo study from
// a JSON config.
//
// Exit codes: 0 success, 1 degenerate-data/statistical failure,
// 2 usage/config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "jdqml/errors.hpp"
#include "jdqml/estimate.hpp"
#include "jdqml/filters.hpp"
#include "jdqml/inference.hpp"
#include "jdqml/montecarlo.hpp"
#include "jdqml/simulate.hpp"

using nlohmann::json;
using namespace jdqml;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr const char* kParamNames[5] = {"alpha", "beta", "lambda", "mu", "sigma2"};

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* name : allowed) {
      if (key == name) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("config: unknown key \"" + key + "\" in " + where);
  }
}

double require_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key))
    throw ConfigError("config: missing key \"" + std::string(key) + "\" in " + where);
  if (!obj[key].is_number())
    throw ConfigError("config: \"" + std::string(key) + "\" must be a number in " + where);
  return obj[key].get<double>();
}

struct StudySection {
  std::string type;
  std::size_t replications = 100;
  std::vector<RhoCell> cells;
  std::vector<double> rho1_bar_grid;
  std::vector<double> rho2_bar_grid;
  unsigned parallelism = 0;
};

struct AppConfig {
  std::string model = "levy_ou";
  ParamVector params;
  ParamBounds bounds = ParamBounds::levy_ou_default();
  ThresholdSet thresholds;
  std::size_t n = 1000000;
  double h = 0.0;  // 0 means use h_exponent
  double h_exponent = 2.0 / 3.0;
  std::uint64_t seed = 1;
  std::optional<double> burn_in_time;
  std::optional<double> x0;
  double eps = 0.05;
  ConstraintList fix;
  std::string out_dir = "out";
  std::optional<StudySection> study;

  double step() const {
    return h > 0.0 ? h : std::pow(static_cast<double>(n), -h_exponent);
  }
};

std::vector<double> parse_rho_list(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ConfigError("config: " + where + " must be an array");
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number()) throw ConfigError("config: " + where + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

AppConfig load_config(const std::string& filename) {
  if (!std::filesystem::exists(filename))
    throw ConfigError("config file not found: " + filename);
  std::ifstream in(filename);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }

  reject_unknown_keys(root,
                      {"model", "params", "bounds", "thresholds", "n", "h", "h_rule", "seed",
                       "burn_in_time", "x0", "eps", "fix", "out_dir", "study"},
                      "top level");

  AppConfig cfg;
  if (root.contains("model")) {
    cfg.model = root["model"].get<std::string>();
    if (cfg.model != "levy_ou")
      throw ConfigError("config: unknown model \"" + cfg.model +
                        "\" (custom models are registered programmatically)");
  }

  if (!root.contains("params")) throw ConfigError("config: missing \"params\" section");
  const json& params = root["params"];
  reject_unknown_keys(params, {"alpha", "beta", "lambda", "mu", "sigma2"}, "params");
  cfg.params = ParamVector::levy_ou(
      require_number(params, "alpha", "params"), require_number(params, "beta", "params"),
      require_number(params, "lambda", "params"), require_number(params, "mu", "params"),
      require_number(params, "sigma2", "params"));

  if (root.contains("bounds")) {
    const json& bounds = root["bounds"];
    reject_unknown_keys(bounds, {"alpha", "beta", "lambda", "mu", "sigma2"}, "bounds");
    std::vector<double> lo = cfg.bounds.lower, hi = cfg.bounds.upper;
    for (std::size_t i = 0; i < 5; ++i) {
      if (!bounds.contains(kParamNames[i])) continue;
      const json& interval = bounds[kParamNames[i]];
      if (!interval.is_array() || interval.size() != 2)
        throw ConfigError(std::string("config: bounds.") + kParamNames[i] +
                          " must be [lower, upper]");
      lo[i] = interval[0].get<double>();
      hi[i] = interval[1].get<double>();
    }
    cfg.bounds = ParamBounds(std::move(lo), std::move(hi));
  }

  if (root.contains("thresholds")) {
    const json& th = root["thresholds"];
    reject_unknown_keys(th,
                        {"D1", "rho1", "D2", "rho2", "D3", "rho3", "D1_bar", "rho1_bar",
                         "D2_bar", "rho2_bar"},
                        "thresholds");
    auto maybe = [&](const char* key, double& target) {
      if (th.contains(key)) target = th[key].get<double>();
    };
    maybe("D1", cfg.thresholds.th1.D);
    maybe("rho1", cfg.thresholds.th1.rho);
    maybe("D2", cfg.thresholds.th2.D);
    maybe("rho2", cfg.thresholds.th2.rho);
    maybe("D3", cfg.thresholds.th3.D);
    maybe("rho3", cfg.thresholds.th3.rho);
    maybe("D1_bar", cfg.thresholds.th1_bar.D);
    maybe("rho1_bar", cfg.thresholds.th1_bar.rho);
    maybe("D2_bar", cfg.thresholds.th2_bar.D);
    maybe("rho2_bar", cfg.thresholds.th2_bar.rho);
  }

  if (root.contains("n")) cfg.n = root["n"].get<std::size_t>();
  if (root.contains("h") && root.contains("h_rule"))
    throw ConfigError("config: give either \"h\" or \"h_rule\", not both");
  if (root.contains("h")) cfg.h = root["h"].get<double>();
  if (root.contains("h_rule")) {
    const json& rule = root["h_rule"];
    reject_unknown_keys(rule, {"exponent"}, "h_rule");
    cfg.h_exponent = require_number(rule, "exponent", "h_rule");
    cfg.h = 0.0;
  }
  if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();
  if (root.contains("burn_in_time")) cfg.burn_in_time = root["burn_in_time"].get<double>();
  if (root.contains("x0")) cfg.x0 = root["x0"].get<double>();
  if (root.contains("eps")) cfg.eps = root["eps"].get<double>();
  if (root.contains("out_dir")) cfg.out_dir = root["out_dir"].get<std::string>();

  if (root.contains("fix")) {
    const json& fix = root["fix"];
    reject_unknown_keys(fix, {"alpha", "beta", "lambda", "mu", "sigma2"}, "fix");
    for (std::size_t i = 0; i < 5; ++i) {
      if (fix.contains(kParamNames[i]))
        cfg.fix.emplace_back(i, fix[kParamNames[i]].get<double>());
    }
  }

  if (root.contains("study")) {
    const json& study = root["study"];
    reject_unknown_keys(study,
                        {"type", "replications", "rho_grid", "cells", "rho1_bar_grid",
                         "rho2_bar_grid", "parallelism"},
                        "study");
    StudySection section;
    if (!study.contains("type")) throw ConfigError("config: study.type is required");
    section.type = study["type"].get<std::string>();
    if (section.type != "estimation" && section.type != "test")
      throw ConfigError("config: study.type must be \"estimation\" or \"test\"");
    if (study.contains("replications"))
      section.replications = study["replications"].get<std::size_t>();
    if (study.contains("parallelism"))
      section.parallelism = study["parallelism"].get<unsigned>();
    if (study.contains("rho_grid")) {
      for (double rho : parse_rho_list(study["rho_grid"], "study.rho_grid"))
        section.cells.push_back({rho, rho, rho});
    }
    if (study.contains("cells")) {
      for (const auto& cell : study["cells"]) {
        if (!cell.is_array() || cell.size() != 3)
          throw ConfigError("config: study.cells entries must be [rho1, rho2, rho3]");
        section.cells.push_back(
            {cell[0].get<double>(), cell[1].get<double>(), cell[2].get<double>()});
      }
    }
    if (study.contains("rho1_bar_grid"))
      section.rho1_bar_grid = parse_rho_list(study["rho1_bar_grid"], "study.rho1_bar_grid");
    if (study.contains("rho2_bar_grid"))
      section.rho2_bar_grid = parse_rho_list(study["rho2_bar_grid"], "study.rho2_bar_grid");
    cfg.study = std::move(section);
  }

  return cfg;
}

json thresholds_to_json(const ThresholdSet& th) {
  return {{"D1", th.th1.D},         {"rho1", th.th1.rho},
          {"D2", th.th2.D},         {"rho2", th.th2.rho},
          {"D3", th.th3.D},         {"rho3", th.th3.rho},
          {"D1_bar", th.th1_bar.D}, {"rho1_bar", th.th1_bar.rho},
          {"D2_bar", th.th2_bar.D}, {"rho2_bar", th.th2_bar.rho}};
}

json estimate_to_json(const EstimateResult& result, const ThresholdSet& thresholds,
                      std::size_t n, double h, const std::string& input,
                      std::uint64_t config_seed) {
  json theta, projected;
  for (std::size_t i = 0; i < 5; ++i) {
    theta[kParamNames[i]] = result.theta.values[i];
    projected[kParamNames[i]] = static_cast<bool>(result.projected[i]);
  }
  json loglik;
  if (result.loglik.l1) loglik["l1"] = *result.loglik.l1;
  if (result.loglik.l2_bar) loglik["l2_bar"] = *result.loglik.l2_bar;
  if (result.loglik.l2_tilde) loglik["l2_tilde"] = *result.loglik.l2_tilde;
  if (result.loglik.joint) loglik["joint"] = *result.loglik.joint;

  return {{"method", result.method},
          {"converged", result.converged},
          {"theta", theta},
          {"projected", projected},
          {"counts", {{"n1", result.n1}, {"n2", result.n2}, {"n3", result.n3}}},
          {"loglik", loglik},
          {"thresholds", thresholds_to_json(thresholds)},
          {"n", n},
          {"h", h},
          {"input", input},
          {"config_seed", config_seed}};
}

void write_text_file(const std::string& filename, const std::string& content) {
  std::ofstream out(filename);
  if (!out) throw std::runtime_error("cannot open for writing: " + filename);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + filename);
}

/// Loads a path CSV and checks the uniform grid t_i = i*h.
Path load_observations(const std::string& filename) {
  if (!std::filesystem::exists(filename))
    throw ConfigError("observation file not found: " + filename);
  Path path = read_path_csv(filename);
  if (path.increments() < 1) throw ParseError("path CSV: need at least two rows", 2);
  const double h = path.step();
  if (!(h > 0.0)) throw ParseError("path CSV: grid times must increase", 2);
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    const double expected = static_cast<double>(i) * h;
    if (std::abs(path.times[i] - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
      throw ParseError("path CSV: non-uniform grid at line " + std::to_string(i + 2),
                       static_cast<long>(i + 2));
  }
  return path;
}

int cmd_simulate(const AppConfig& cfg, const std::string& out_file) {
  PathConfig pc;
  pc.n = cfg.n;
  pc.h = cfg.step();
  pc.seed = cfg.seed;
  pc.burn_in_time = cfg.burn_in_time;
  if (cfg.x0) pc.initial_state = std::vector<double>{*cfg.x0};

  const Path path = simulate_levy_ou(cfg.params, pc);
  write_path_csv(path, out_file);

  json manifest = {{"command", "simulate"},
                   {"model", cfg.model},
                   {"params",
                    {{"alpha", cfg.params.values[0]},
                     {"beta", cfg.params.values[1]},
                     {"lambda", cfg.params.values[2]},
                     {"mu", cfg.params.values[3]},
                     {"sigma2", cfg.params.values[4]}}},
                   {"n", cfg.n},
                   {"h", pc.h},
                   {"seed", cfg.seed},
                   {"output", out_file},
                   {"version", "jdqml 0.1.0"}};
  if (cfg.burn_in_time) manifest["burn_in_time"] = *cfg.burn_in_time;
  if (cfg.x0) manifest["x0"] = *cfg.x0;
  write_text_file(out_file + ".manifest.json", manifest.dump(2) + "\n");

  std::cerr << "wrote " << out_file << " (" << path.times.size() << " rows)\n";
  return 0;
}

int cmd_estimate(const AppConfig& cfg, const std::string& path_file, bool joint,
                 const std::string& out_file) {
  const Path path = load_observations(path_file);

  EstimationConfig est;
  est.thresholds = cfg.thresholds;
  est.bounds = cfg.bounds;

  EstimateResult result;
  if (joint) {
    const ModelSpec model = levy_ou_model();
    QllContext ctx(model, path);
    result = estimate_joint(ctx, est);
  } else {
    result = estimate_adaptive_levy_ou(path, est);
  }

  const json j = estimate_to_json(result, est.thresholds, path.increments(), path.step(),
                                  path_file, cfg.seed);
  std::cout << j.dump(2) << "\n";
  if (!out_file.empty()) write_text_file(out_file, j.dump(2) + "\n");
  return 0;
}

int cmd_test(const AppConfig& cfg, const std::string& path_file, const std::string& out_file) {
  if (cfg.fix.empty())
    throw ConfigError("test requires constraints: set the \"fix\" section in the config");

  const Path path = load_observations(path_file);
  const ModelSpec model = levy_ou_model();
  QllContext ctx(model, path);

  EstimationConfig est;
  est.thresholds = cfg.thresholds;
  est.bounds = cfg.bounds;
  est.with_loglik = false;

  EstimationConfig est_null = est;
  est_null.constraints = cfg.fix;

  const EstimateResult fitted = estimate_adaptive_levy_ou(path, est);
  const EstimateResult null_fit = estimate_constrained(ctx, est_null);
  const double lambda = qlr_statistic(ctx, fitted, null_fit, est.thresholds.th1_bar,
                                      est.thresholds.th2_bar);

  TestResult test = decide_test(lambda, static_cast<int>(cfg.fix.size()), cfg.eps);
  test.thresholds = cfg.thresholds;

  json constraints;
  for (const auto& [idx, v] : cfg.fix) constraints[kParamNames[idx]] = v;
  json theta;
  for (std::size_t i = 0; i < 5; ++i) theta[kParamNames[i]] = fitted.theta.values[i];

  const json j = {{"lambda_n", test.lambda_n},
                  {"df", test.df},
                  {"eps", cfg.eps},
                  {"critical_value", test.critical_value},
                  {"p_value", test.p_value},
                  {"reject", test.reject},
                  {"constraints", constraints},
                  {"theta_unconstrained", theta},
                  {"thresholds", thresholds_to_json(cfg.thresholds)},
                  {"input", path_file}};
  std::cout << j.dump(2) << "\n";
  if (!out_file.empty()) write_text_file(out_file, j.dump(2) + "\n");
  return 0;
}

void print_balance_diagnostics(const AppConfig& cfg) {
  // Advisory only; delta = 0.51 matches the n = 1e6, h = n^(-2/3) design.
  const double delta = 0.51;
  const auto report = balance_diagnostics(
      cfg.n, cfg.step(),
      {cfg.thresholds.th1, cfg.thresholds.th2, cfg.thresholds.th3, cfg.thresholds.th1_bar,
       cfg.thresholds.th2_bar},
      delta);
  std::cerr << "balance diagnostics (delta = " << delta << "): nh = " << report.nh
            << ", nh^2 = " << report.nh2 << ", n h^(1+delta) = " << report.nh_1_plus_delta
            << "\n";
  static const char* slot_names[] = {"rho1", "rho2", "rho3", "rho1_bar", "rho2_bar"};
  for (const auto& slot : report.slots) {
    if (!slot.admissible)
      std::cerr << "  note: " << slot_names[slot.slot - 1] << " = " << slot.rho << " is "
                << slot.note << "\n";
  }
}

int cmd_study(const AppConfig& cfg) {
  if (!cfg.study) throw ConfigError("config: the study command needs a \"study\" section");
  const StudySection& section = *cfg.study;
  print_balance_diagnostics(cfg);

  StudyConfig sc;
  sc.scenario.theta_true = cfg.params;
  sc.scenario.eps = cfg.eps;
  sc.thresholds = cfg.thresholds;
  sc.bounds = cfg.bounds;
  sc.replications = section.replications;
  sc.n = cfg.n;
  sc.h = cfg.h;
  sc.h_exponent = cfg.h_exponent;
  sc.base_seed = cfg.seed;
  sc.parallelism = section.parallelism;

  StudyReport report;
  if (section.type == "estimation") {
    if (section.cells.empty())
      throw ConfigError("config: estimation study needs study.rho_grid or study.cells");
    sc.estimation_cells = section.cells;
    std::cerr << "estimation study: " << sc.estimation_cells.size() << " cells x "
              << sc.replications << " replications (n = " << sc.n << ", h = " << sc.step()
              << ")\n";
    report = run_estimation_study(sc);
  } else {
    if (cfg.fix.empty())
      throw ConfigError("config: test study needs the \"fix\" section (H0)");
    sc.scenario.constraints = cfg.fix;
    sc.rho1_bar_grid =
        section.rho1_bar_grid.empty() ? std::vector<double>{cfg.thresholds.th1_bar.rho}
                                      : section.rho1_bar_grid;
    sc.rho2_bar_grid =
        section.rho2_bar_grid.empty() ? std::vector<double>{cfg.thresholds.th2_bar.rho}
                                      : section.rho2_bar_grid;
    std::cerr << "test study: " << sc.rho1_bar_grid.size() * sc.rho2_bar_grid.size()
              << " cells x " << sc.replications << " replications (n = " << sc.n
              << ", h = " << sc.step() << ")\n";
    report = run_test_study(sc);
  }

  for (const CellReport& cell : report.cells) {
    std::cerr << "  " << cell.label << ": " << cell.replications - cell.failures << "/"
              << cell.replications << " replications in " << cell.wall_seconds << " s";
    if (report.kind == "test") std::cerr << ", rejection rate " << cell.rejection_rate();
    std::cerr << "\n";
  }

  export_report(report, cfg.out_dir);
  std::cerr << "report written to " << cfg.out_dir << "/\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-likelihood estimation and testing for jump diffusions"};
  app.set_help_flag("--help", "Print help");  // frees -h for the --h step override
  app.require_subcommand(1);

  // Every subcommand binds its own variables: the vendored CLI11 assigns the
  // default_val of options on subcommands that were never invoked.
  std::string config_file;
  std::string sim_out = "path.csv";
  std::string est_out, test_out, path_file;
  bool joint = false;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> n_override;
  std::optional<double> h_override;
  std::optional<double> eps_override;
  std::optional<std::size_t> reps_override;
  std::optional<unsigned> parallel_override;
  std::optional<double> rho1_override, rho2_override, rho3_override;
  std::string out_dir_override;

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate a path and write CSV");
  simulate->add_option("--config", config_file, "JSON config file")->required();
  simulate->add_option("--out", sim_out, "Output CSV file (default path.csv)");
  simulate->add_option("--seed", seed_override, "Override the config seed");
  simulate->add_option("--n", n_override, "Override the number of increments");
  simulate->add_option("--h", h_override, "Override the step size");

  CLI::App* estimate = app.add_subcommand("estimate", "Estimate parameters from a path CSV");
  estimate->add_option("--config", config_file, "JSON config file")->required();
  estimate->add_option("path", path_file, "Observation CSV")->required();
  estimate->add_flag("--joint", joint, "Joint estimation instead of adaptive");
  estimate->add_option("--rho1", rho1_override, "Override rho1");
  estimate->add_option("--rho2", rho2_override, "Override rho2");
  estimate->add_option("--rho3", rho3_override, "Override rho3");
  estimate->add_option("--out", est_out, "Also write the result JSON here");

  CLI::App* test = app.add_subcommand("test", "Run the quasi-likelihood ratio test");
  test->add_option("--config", config_file, "JSON config file")->required();
  test->add_option("path", path_file, "Observation CSV")->required();
  test->add_option("--eps", eps_override, "Test level (default 0.05 or config eps)");
  test->add_option("--out", test_out, "Also write the result JSON here");

  CLI::App* study = app.add_subcommand("study", "Run a Monte Carlo study");
  study->add_option("--config", config_file, "JSON config file")->required();
  study->add_option("--reps", reps_override, "Override study.replications");
  study->add_option("--parallel", parallel_override, "Override study.parallelism");
  study->add_option("--out-dir", out_dir_override, "Override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    AppConfig cfg = load_config(config_file);
    if (seed_override) cfg.seed = *seed_override;
    if (n_override) cfg.n = *n_override;
    if (h_override) {
      cfg.h = *h_override;
    }
    if (eps_override) cfg.eps = *eps_override;
    if (rho1_override) cfg.thresholds.th1.rho = *rho1_override;
    if (rho2_override) cfg.thresholds.th2.rho = *rho2_override;
    if (rho3_override) cfg.thresholds.th3.rho = *rho3_override;
    if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
    if (cfg.study) {
      if (reps_override) cfg.study->replications = *reps_override;
      if (parallel_override) cfg.study->parallelism = *parallel_override;
    }

    if (simulate->parsed()) return cmd_simulate(cfg, sim_out);
    if (estimate->parsed()) return cmd_estimate(cfg, path_file, joint, est_out);
    if (test->parsed()) return cmd_test(cfg, path_file, test_out);
    if (study->parsed()) return cmd_study(cfg);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConstraintError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateFilterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SingularSError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NonFiniteStateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
