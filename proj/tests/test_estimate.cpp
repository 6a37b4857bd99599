#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "jdqml/errors.hpp"
#include "jdqml/estimate.hpp"
#include "jdqml/rng.hpp"
#include "jdqml/simulate.hpp"

using namespace jdqml;

TEST_SUITE_BEGIN("estimate");

namespace {

Path path_from_values(std::vector<double> values, double h) {
  Path path;
  path.dim = 1;
  path.values = std::move(values);
  path.times.resize(path.values.size());
  for (std::size_t i = 0; i < path.times.size(); ++i)
    path.times[i] = static_cast<double>(i) * h;
  return path;
}

EstimationConfig tiny_config() {
  EstimationConfig cfg;
  cfg.thresholds.th1 = {1.0, 0.3};
  cfg.thresholds.th2 = {1.0, 0.3};
  cfg.thresholds.th3 = {1.0, 0.3};
  cfg.thresholds.th1_bar = {1.0, 0.3};
  cfg.thresholds.th2_bar = {1.0, 0.3};
  return cfg;
}

/// Random small Levy-OU dataset with nondegenerate filters; deterministic in
/// the index.
struct SmallDataset {
  Path path;
  EstimationConfig cfg;
};

SmallDataset random_small_dataset(std::uint64_t index) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(stream_seed(0xD5E7u, index, attempt));
    const double alpha = 0.5 + 2.5 * rng.uniform01();
    const double beta = 0.5 + 3.5 * rng.uniform01();
    const double lambda = 2.0 + 15.0 * rng.uniform01();
    const double mu = -2.0 + 4.0 * rng.uniform01();
    const double sigma2 = 1.0 + 8.0 * rng.uniform01();
    const std::size_t n = 10 + static_cast<std::size_t>(rng.uniform01() * 990.0);
    const double h = 0.02;

    PathConfig pc;
    pc.n = n;
    pc.h = h;
    pc.seed = rng.next_u64();
    const auto params = ParamVector::levy_ou(alpha, beta, lambda, mu, sigma2);
    Path path = simulate_levy_ou(params, pc);

    EstimationConfig cfg = tiny_config();
    const double rho = 0.2 + 0.2 * rng.uniform01();
    cfg.thresholds.th1 = cfg.thresholds.th2 = cfg.thresholds.th3 = {1.0, rho};
    cfg.thresholds.th1_bar = cfg.thresholds.th2_bar = {1.0, rho};

    const auto cls = classify(path, cfg.thresholds.th1);
    double sum_x2 = 0.0;
    for (std::size_t i = 0; i < path.increments(); ++i) {
      if (cls.is_small(i)) sum_x2 += path.value(i) * path.value(i);
    }
    if (cls.n_small >= 3 && cls.n_large >= 2 && sum_x2 > 1e-8)
      return {std::move(path), std::move(cfg)};
  }
}

}  // namespace

TEST_CASE("closed forms on the worked tiny dataset") {
  const Path path = path_from_values(fixtures::tiny_path_values(), fixtures::kTinyH);
  const Threshold th{1.0, 0.3};
  const auto cf = levy_ou_closed_forms(path, th, th, th);

  CHECK(cf.n1 == 2);
  CHECK(cf.n2 == 1);
  CHECK(cf.n3 == 2);
  CHECK(cf.alpha == doctest::Approx(std::sqrt(0.625)).epsilon(1e-12));  // 0.790569...
  CHECK(cf.alpha == doctest::Approx(0.790569).epsilon(1e-5));
  CHECK(cf.beta == doctest::Approx(0.055 / 0.0181).epsilon(1e-12));  // 3.03867...
  CHECK(cf.beta == doctest::Approx(3.03867).epsilon(1e-5));
  CHECK(cf.lambda == doctest::Approx(100.0 / 3.0).epsilon(1e-12));  // 33.333...
  CHECK(cf.mu == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(!cf.sigma2.has_value());  // n2 == 1
}

TEST_CASE("sigma2 with a single jump increment is a degenerate-filter error") {
  const Path path = path_from_values(fixtures::tiny_path_values(), fixtures::kTinyH);
  EstimationConfig cfg = tiny_config();
  try {
    (void)estimate_adaptive_levy_ou(path, cfg);
    FAIL("expected DegenerateFilterError");
  } catch (const DegenerateFilterError& e) {
    CHECK(std::string(e.what()).find("sigma2") != std::string::npos);
    CHECK(std::string(e.what()).find("n2") != std::string::npos);
  }
}

TEST_CASE("degenerate alpha filter is named") {
  // every increment is large
  const Path path = path_from_values({0.0, 1.0, 2.5, 1.2}, 0.01);
  EstimationConfig cfg = tiny_config();
  try {
    (void)estimate_adaptive_levy_ou(path, cfg);
    FAIL("expected DegenerateFilterError");
  } catch (const DegenerateFilterError& e) {
    CHECK(std::string(e.what()).find("n1 == 0") != std::string::npos);
  }
}

TEST_CASE("closed forms match the naive oracle on simulated data") {
  PathConfig pc;
  pc.n = 20000;
  pc.h = 1e-3;
  pc.seed = 99;
  const auto params = ParamVector::levy_ou(2.0, 2.5, 6.0, 0.0, 20.25);
  const Path path = simulate_levy_ou(params, pc);
  const std::vector<double> x(path.values.begin(), path.values.end());

  const Threshold th1{1.0, 0.285}, th2{1.0, 0.26}, th3{1.0, 0.255};
  const auto cf = levy_ou_closed_forms(path, th1, th2, th3);
  const auto naive = oracle::closed_forms(x, pc.h, 1.0, 0.285, 1.0, 0.26, 1.0, 0.255);

  CHECK(cf.n1 == naive.n1);
  CHECK(cf.n2 == naive.n2);
  CHECK(cf.n3 == naive.n3);
  CHECK(cf.alpha == doctest::Approx(naive.alpha).epsilon(1e-12));
  CHECK(cf.beta == doctest::Approx(naive.beta).epsilon(1e-12));
  CHECK(cf.lambda == doctest::Approx(naive.lambda).epsilon(1e-12));
  CHECK(cf.mu == doctest::Approx(naive.mu).epsilon(1e-12));
  CHECK(*cf.sigma2 == doctest::Approx(naive.sigma2).epsilon(1e-12));
}

TEST_CASE("first-order conditions of the closed forms") {
  for (std::uint64_t k = 0; k < 20; ++k) {
    const SmallDataset data = random_small_dataset(k);
    const auto cf = levy_ou_closed_forms(data.path, data.cfg.thresholds.th1,
                                         data.cfg.thresholds.th2, data.cfg.thresholds.th3);
    const auto cls3 = classify(data.path, data.cfg.thresholds.th3);
    const auto cls2 = classify(data.path, data.cfg.thresholds.th2);
    const double h = data.path.step();

    double foc_beta = 0.0, scale_beta = 0.0;
    double foc_mu = 0.0;
    for (std::size_t i = 0; i < data.path.increments(); ++i) {
      const double x = data.path.value(i);
      const double dx = data.path.value(i + 1) - x;
      if (cls3.is_small(i)) {
        foc_beta += x * (dx + cf.beta * h * x);
        scale_beta += std::abs(x * dx) + std::abs(cf.beta * h * x * x);
      }
      if (!cls2.is_small(i)) foc_mu += dx - cf.mu;
    }
    CHECK(std::abs(foc_beta) <= 1e-8 * std::max(1.0, scale_beta));
    CHECK(std::abs(foc_mu) <= 1e-9 * std::max(1.0, static_cast<double>(cf.n2)));
  }
}

TEST_CASE("argmax optimality: nudging any component never helps") {
  const ModelSpec model = levy_ou_model();
  for (std::uint64_t k = 0; k < 100; ++k) {
    const SmallDataset data = random_small_dataset(1000 + k);
    EstimationConfig cfg = data.cfg;
    EstimateResult est;
    try {
      est = estimate_adaptive_levy_ou(data.path, cfg);
    } catch (const DegenerateFilterError&) {
      continue;  // n2 may drop below 2 for sigma2
    }
    if (std::any_of(est.projected.begin(), est.projected.end(), [](bool b) { return b; }))
      continue;
    QllContext ctx(model, data.path);

    const auto& theta = est.theta.values;
    const double l1_at = qll_diffusion(ctx, est.theta.alpha(), cfg.thresholds.th1);
    const double l2_at =
        qll_drift(ctx, est.theta.beta(), est.theta.alpha(), cfg.thresholds.th3);
    const double l3_at = qll_jump(ctx, est.theta.gamma(), cfg.thresholds.th2);

    for (double sign : {-1.0, 1.0}) {
      const double da = theta[0] + sign * 1e-3;
      CHECK(qll_diffusion(ctx, {&da, 1}, cfg.thresholds.th1) <= l1_at + 1e-12);

      const double db = theta[1] + sign * 1e-3;
      CHECK(qll_drift(ctx, {&db, 1}, est.theta.alpha(), cfg.thresholds.th3) <= l2_at + 1e-12);

      for (std::size_t g = 0; g < 3; ++g) {
        std::vector<double> gamma = {theta[2], theta[3], theta[4]};
        gamma[g] += sign * 1e-3;
        CHECK(qll_jump(ctx, gamma, cfg.thresholds.th2) <= l3_at + 1e-12);
      }
    }
  }
}

TEST_CASE("generic adaptive optimizer agrees with the closed forms") {
  const ModelSpec model = levy_ou_model();
  for (std::uint64_t k = 0; k < 10; ++k) {
    const SmallDataset data = random_small_dataset(2000 + k);
    EstimateResult closed;
    try {
      closed = estimate_adaptive_levy_ou(data.path, data.cfg);
    } catch (const DegenerateFilterError&) {
      continue;
    }
    if (std::any_of(closed.projected.begin(), closed.projected.end(),
                    [](bool b) { return b; }))
      continue;

    QllContext ctx(model, data.path);
    const EstimateResult opt = estimate_adaptive_generic(ctx, data.cfg);
    for (std::size_t i = 0; i < 5; ++i) {
      const double ref = closed.theta.values[i];
      CHECK(std::abs(opt.theta.values[i] - ref) <= 1e-6 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("flat alpha likelihood mirrors the closed-form degenerate error") {
  const Path path = path_from_values({0.0, 1.0, 2.5, 1.2}, 0.01);
  const ModelSpec model = levy_ou_model();
  QllContext ctx(model, path);
  EstimationConfig cfg = tiny_config();
  CHECK_THROWS_AS((void)estimate_adaptive_generic(ctx, cfg), DegenerateFilterError);
}

TEST_CASE("joint closed forms and optimizer agree, and beta/gamma match adaptive") {
  PathConfig pc;
  pc.n = 20000;
  pc.h = 1e-3;
  pc.seed = 101;
  const auto params = ParamVector::levy_ou(2.0, 2.5, 6.0, 0.0, 20.25);
  const Path path = simulate_levy_ou(params, pc);

  EstimationConfig cfg = tiny_config();
  cfg.thresholds.th1 = {1.0, 0.285};
  cfg.thresholds.th2 = {1.0, 0.26};
  cfg.thresholds.th3 = {1.0, 0.26};
  cfg.thresholds.th1_bar = {1.0, 0.26};  // = th3
  cfg.thresholds.th2_bar = {1.0, 0.26};  // = th2

  const ModelSpec model = levy_ou_model();
  QllContext ctx(model, path);
  const EstimateResult joint = estimate_joint(ctx, cfg);
  CHECK(joint.method == "closed_form");

  // optimizer cross-check through a model clone without closed forms
  ModelSpec no_closed_form = levy_ou_model();
  no_closed_form.has_closed_form = false;
  QllContext ctx2(no_closed_form, path);
  const EstimateResult optimized = estimate_joint(ctx2, cfg);
  CHECK(optimized.method == "optimizer");
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::abs(optimized.theta.values[i] - joint.theta.values[i]) <=
          1e-5 * std::max(1.0, std::abs(joint.theta.values[i])));
  }

  // with th1_bar = th3 and th2_bar = th2: every component except alpha equals
  // the adaptive estimate
  const EstimateResult adaptive = estimate_adaptive_levy_ou(path, cfg);
  for (std::size_t i = 1; i < 5; ++i) {
    CHECK(joint.theta.values[i] ==
          doctest::Approx(adaptive.theta.values[i]).epsilon(1e-6));
  }
  CHECK(joint.theta.values[0] != adaptive.theta.values[0]);
}

TEST_CASE("fully constrained estimation returns the fixed point") {
  const Path path = path_from_values(fixtures::tiny_path_values(), fixtures::kTinyH);
  const ModelSpec model = levy_ou_model();
  QllContext ctx(model, path);

  EstimationConfig cfg = tiny_config();
  cfg.constraints = {{0, 2.0}, {1, 2.5}, {2, 6.0}, {3, 0.0}, {4, 20.25}};
  const EstimateResult result = estimate_constrained(ctx, cfg);
  const std::vector<double> expected = {2.0, 2.5, 6.0, 0.0, 20.25};
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(result.theta.values[i] == doctest::Approx(expected[i]));
}

TEST_CASE("empty constraint list reproduces the unconstrained estimator") {
  PathConfig pc;
  pc.n = 5000;
  pc.h = 1e-3;
  pc.seed = 102;
  const Path path = simulate_levy_ou(ParamVector::levy_ou(2.0, 2.5, 6.0, 0.0, 20.25), pc);
  const ModelSpec model = levy_ou_model();
  QllContext ctx(model, path);

  EstimationConfig cfg = tiny_config();
  cfg.thresholds.th1 = cfg.thresholds.th2 = cfg.thresholds.th3 = {1.0, 0.26};
  const EstimateResult unconstrained = estimate_adaptive_levy_ou(path, cfg);
  const EstimateResult constrained = estimate_constrained(ctx, cfg);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(constrained.theta.values[i] == unconstrained.theta.values[i]);
}

TEST_CASE("constraint value outside the bounds is rejected") {
  const Path path = path_from_values(fixtures::tiny_path_values(), fixtures::kTinyH);
  const ModelSpec model = levy_ou_model();
  QllContext ctx(model, path);
  EstimationConfig cfg = tiny_config();
  cfg.constraints = {{0, 1e9}};
  CHECK_THROWS_AS((void)estimate_constrained(ctx, cfg), ConstraintError);
  cfg.constraints = {{7, 1.0}};
  CHECK_THROWS_AS((void)estimate_constrained(ctx, cfg), ConstraintError);
}

TEST_CASE("partial constraints freeze components and recenter sigma2 on fixed mu") {
  PathConfig pc;
  pc.n = 5000;
  pc.h = 1e-3;
  pc.seed = 103;
  const Path path = simulate_levy_ou(ParamVector::levy_ou(2.0, 2.5, 6.0, 0.5, 20.25), pc);

  EstimationConfig cfg = tiny_config();
  cfg.thresholds.th1 = cfg.thresholds.th2 = cfg.thresholds.th3 = {1.0, 0.26};
  cfg.constraints = {{3, 0.0}};  // fix mu at zero
  const auto cf = levy_ou_closed_forms(path, cfg.thresholds.th1, cfg.thresholds.th2,
                                       cfg.thresholds.th3, cfg.constraints);
  CHECK(cf.mu == 0.0);

  // sigma2 must be the mean square about the constrained mu
  const auto cls = classify(path, cfg.thresholds.th2);
  double ss = 0.0;
  std::size_t n2 = 0;
  for (std::size_t i = 0; i < path.increments(); ++i) {
    if (!cls.is_small(i)) {
      const double dx = path.value(i + 1) - path.value(i);
      ss += dx * dx;
      ++n2;
    }
  }
  CHECK(*cf.sigma2 == doctest::Approx(ss / n2).epsilon(1e-12));
}

TEST_CASE("out-of-box closed-form values are projected and flagged") {
  const Path path = path_from_values({0.0, 0.001, 0.0005, 3.0, 3.0012, 3.0008, 6.2}, 0.01);
  EstimationConfig cfg = tiny_config();
  cfg.bounds = ParamBounds({0.5, 0.001, 0.001, -50.0, 0.001},
                           {50.0, 50.0, 200.0, 50.0, 500.0});
  // tiny diffusion increments push alpha below the 0.5 floor
  const EstimateResult result = estimate_adaptive_levy_ou(path, cfg);
  CHECK(result.theta.values[0] == doctest::Approx(0.5));
  CHECK(result.projected[0]);
  CHECK(!result.projected[2]);
}

TEST_SUITE_END();
