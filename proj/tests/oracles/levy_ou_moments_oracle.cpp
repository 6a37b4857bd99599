// Independent oracle for the Levy-OU stationary moments. Euler-Maruyama with
// its own RNG and Box-Muller transform; shares no code with the library.
//
// Prints the long-run second moment mu2 (10 paths, T = 4000) and the per-path
// standard deviations of the T = 400 time averages used as test tolerances.
// The printed values are frozen into tests/test_simulate.cpp.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <vector>

namespace {

struct BoxMuller {
  std::mt19937_64 gen;
  bool has_spare = false;
  double spare = 0.0;

  explicit BoxMuller(std::uint64_t seed) : gen(seed) {}

  double uniform_open() {
    return (static_cast<double>(gen() >> 12) + 0.5) * 0x1.0p-52;
  }

  double normal() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare = r * std::sin(2.0 * M_PI * u2);
    has_spare = true;
    return r * std::cos(2.0 * M_PI * u2);
  }
};

struct Averages {
  double mean = 0.0;
  double second_moment = 0.0;
};

// Euler scheme for dX = -beta X dt + alpha dW + compound Poisson(lambda),
// marks N(mu, sigma2); returns time averages over [burn, T+burn].
Averages euler_run(double T, double dt, std::uint64_t seed) {
  const double alpha = 2.0, beta = 2.5, lambda = 6.0, mu = 0.0, sigma = std::sqrt(20.25);
  const double burn = 20.0;
  BoxMuller rng(seed);
  std::exponential_distribution<double> exp_gap(lambda);

  double x = 0.0;
  double t = 0.0;
  double next_jump = exp_gap(rng.gen);
  const double sqrt_dt = std::sqrt(dt);
  const long total_steps = static_cast<long>((T + burn) / dt);
  const long burn_steps = static_cast<long>(burn / dt);

  double sum = 0.0, sum2 = 0.0;
  long kept = 0;
  for (long step = 0; step < total_steps; ++step) {
    x += -beta * x * dt + alpha * sqrt_dt * rng.normal();
    t += dt;
    while (next_jump <= t) {
      x += mu + sigma * rng.normal();
      next_jump += exp_gap(rng.gen);
    }
    if (step >= burn_steps) {
      sum += x;
      sum2 += x * x;
      ++kept;
    }
  }
  return {sum / kept, sum2 / kept};
}

}  // namespace

int main() {
  // Long-run mu2: 10 paths, T = 4000.
  {
    double acc = 0.0, acc2 = 0.0;
    const int paths = 10;
    for (int k = 0; k < paths; ++k) {
      const Averages a = euler_run(4000.0, 2e-4, 1000 + k);
      std::printf("  long path %d: mean=% .5f m2=%.5f\n", k, a.mean, a.second_moment);
      acc += a.second_moment;
      acc2 += a.second_moment * a.second_moment;
    }
    const double mu2 = acc / paths;
    const double sd = std::sqrt((acc2 / paths - mu2 * mu2) * paths / (paths - 1.0));
    std::printf("mu2_oracle = %.6f (sd over paths %.6f, se %.6f)\n", mu2, sd,
                sd / std::sqrt(static_cast<double>(paths)));
  }

  // Dispersion of the T = 400 time averages: 40 paths.
  {
    const int paths = 40;
    std::vector<double> means, m2s;
    for (int k = 0; k < paths; ++k) {
      const Averages a = euler_run(400.0, 2e-4, 5000 + k);
      means.push_back(a.mean);
      m2s.push_back(a.second_moment);
    }
    auto sd = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= v.size();
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / (v.size() - 1.0));
    };
    std::printf("sd_mean_T400 = %.6f\n", sd(means));
    std::printf("sd_m2_T400 = %.6f\n", sd(m2s));
  }
  return 0;
}
