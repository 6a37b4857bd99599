#include <doctest.h>

#include <cmath>
#include <vector>

#include "jdqml/errors.hpp"
#include "jdqml/optimize.hpp"

using namespace jdqml;

TEST_SUITE_BEGIN("optimize");

TEST_CASE("1-d quadratic maximum") {
  const std::vector<double> lo = {0.0}, hi = {10.0}, start = {9.0};
  const auto result = nelder_mead(
      [](std::span<const double> x) { return -(x[0] - 3.0) * (x[0] - 3.0); }, lo, hi, start);
  CHECK(result.converged);
  CHECK(result.x[0] == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("2-d quadratic maximum") {
  const std::vector<double> lo = {-5.0, -5.0}, hi = {5.0, 5.0}, start = {4.0, 4.0};
  const auto result = nelder_mead(
      [](std::span<const double> x) {
        return -((x[0] - 1.0) * (x[0] - 1.0) + (x[1] + 2.0) * (x[1] + 2.0));
      },
      lo, hi, start);
  CHECK(result.converged);
  CHECK(result.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(result.x[1] == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("negated Rosenbrock on [-2, 2]^2") {
  auto objective = [](std::span<const double> x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return -(a * a + 100.0 * b * b);
  };
  const std::vector<double> lo = {-2.0, -2.0}, hi = {2.0, 2.0}, start = {-1.2, 1.0};

  // dense grid oracle confirming the optimum location
  double best = -1e300;
  double gx = 0.0, gy = 0.0;
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j <= 400; ++j) {
      const double x = -2.0 + 4.0 * i / 400.0;
      const double y = -2.0 + 4.0 * j / 400.0;
      const std::vector<double> p = {x, y};
      const double v = objective(p);
      if (v > best) {
        best = v;
        gx = x;
        gy = y;
      }
    }
  }
  CHECK(gx == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(gy == doctest::Approx(1.0).epsilon(1e-9));

  const auto result = nelder_mead(objective, lo, hi, start);
  CHECK(std::abs(result.x[0] - 1.0) <= 1e-4);
  CHECK(std::abs(result.x[1] - 1.0) <= 1e-4);
}

TEST_CASE("starting at the maximizer stays there") {
  const std::vector<double> lo = {0.0}, hi = {10.0}, start = {3.0};
  OptimizerSettings settings;
  const auto result = nelder_mead(
      [](std::span<const double> x) { return -(x[0] - 3.0) * (x[0] - 3.0); }, lo, hi, start,
      settings);
  CHECK(std::abs(result.x[0] - 3.0) <= settings.x_tolerance * 10.0);
}

TEST_CASE("scaling the objective leaves the argmax unchanged") {
  auto base = [](std::span<const double> x) {
    return -((x[0] - 1.3) * (x[0] - 1.3) + 0.5 * (x[1] - 0.4) * (x[1] - 0.4));
  };
  auto scaled = [&](std::span<const double> x) { return 250.0 * base(x); };
  const std::vector<double> lo = {-3.0, -3.0}, hi = {3.0, 3.0}, start = {2.0, -2.0};
  const auto a = nelder_mead(base, lo, hi, start);
  const auto b = nelder_mead(scaled, lo, hi, start);
  CHECK(a.x[0] == doctest::Approx(b.x[0]).epsilon(1e-5));
  CHECK(a.x[1] == doctest::Approx(b.x[1]).epsilon(1e-5));
}

TEST_CASE("maximum on the box edge is reachable") {
  const std::vector<double> lo = {0.0}, hi = {1.0}, start = {0.2};
  const auto result =
      nelder_mead([](std::span<const double> x) { return x[0]; }, lo, hi, start);
  CHECK(result.x[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("deterministic across repeated runs") {
  auto objective = [](std::span<const double> x) {
    return -(std::sin(3.0 * x[0]) + x[0] * x[0] * 0.1);
  };
  const std::vector<double> lo = {-4.0}, hi = {4.0}, start = {1.0};
  const auto a = nelder_mead(objective, lo, hi, start);
  const auto b = nelder_mead(objective, lo, hi, start);
  CHECK(a.x[0] == b.x[0]);
  CHECK(a.value == b.value);
}

TEST_CASE("settings validation") {
  const std::vector<double> lo = {0.0}, hi = {1.0}, start = {0.5};
  OptimizerSettings bad;
  bad.restarts = 0;
  CHECK_THROWS_AS(
      (void)nelder_mead([](std::span<const double>) { return 0.0; }, lo, hi, start, bad),
      InvalidParameterError);
  const std::vector<double> bad_hi = {0.0};
  CHECK_THROWS_AS(
      (void)nelder_mead([](std::span<const double>) { return 0.0; }, lo, bad_hi, start),
      InvalidParameterError);
}

TEST_SUITE_END();
