#include "jdqml/filters.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "jdqml/errors.hpp"

namespace jdqml {

void Threshold::validate() const {
  if (!(D > 0.0)) throw InvalidParameterError("Threshold: D must be > 0");
  if (!(rho > 0.0 && rho < 0.5))
    throw InvalidParameterError("Threshold: rho must lie strictly in (0, 1/2)");
}

double cutoff(const Threshold& th, double h) {
  th.validate();
  if (!(h > 0.0)) throw InvalidParameterError("cutoff: h must be > 0");
  return th.D * std::pow(h, th.rho);
}

IncrementClassification classify(const Path& path, const Threshold& th) {
  const std::size_t n = path.increments();
  if (n < 1) throw InvalidParameterError("classify: path has no increments");

  IncrementClassification cls;
  cls.cutoff_value = cutoff(th, path.step());
  cls.small_mask.resize(n);

  const std::size_t d = static_cast<std::size_t>(path.dim);
  const double* values = path.values.data();
  std::size_t n_small = 0;

  if (d == 1) {
    const double c = cls.cutoff_value;
    for (std::size_t i = 0; i < n; ++i) {
      const bool small = std::abs(values[i + 1] - values[i]) <= c;
      cls.small_mask[i] = small;
      n_small += small;
    }
  } else {
    const double c2 = cls.cutoff_value * cls.cutoff_value;
    for (std::size_t i = 0; i < n; ++i) {
      double norm2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double dx = values[(i + 1) * d + k] - values[i * d + k];
        norm2 += dx * dx;
      }
      const bool small = norm2 <= c2;
      cls.small_mask[i] = small;
      n_small += small;
    }
  }

  cls.n_small = n_small;
  cls.n_large = n - n_small;
  return cls;
}

void write_classification_csv(const Path& path, const IncrementClassification& cls,
                              const std::string& filename) {
  const std::size_t n = path.increments();
  if (cls.small_mask.size() != n)
    throw InvalidParameterError("write_classification_csv: classification/path mismatch");
  std::ofstream out(filename);
  if (!out) throw std::runtime_error("cannot open for writing: " + filename);
  out << "t,dx,small\n";
  const std::size_t d = static_cast<std::size_t>(path.dim);
  char buf[96];
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double dx = path.values[(i + 1) * d + k] - path.values[i * d + k];
      norm2 += dx * dx;
    }
    const double dx = d == 1 ? path.values[i + 1] - path.values[i] : std::sqrt(norm2);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", path.times[i + 1], dx,
                  cls.is_small(i) ? 1 : 0);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + filename);
}

BalanceReport balance_diagnostics(std::size_t n, double h,
                                  const std::vector<Threshold>& thresholds, double delta) {
  BalanceReport report;
  report.delta = delta;
  const double dn = static_cast<double>(n);
  report.nh = dn * h;
  report.nh2 = dn * h * h;
  report.nh_1_plus_delta = dn * std::pow(h, 1.0 + delta);

  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    BalanceReport::SlotCheck check;
    check.slot = static_cast<int>(i) + 1;
    check.rho = thresholds[i].rho;

    if (!(check.rho > 0.0 && check.rho < 0.5)) {
      check.admissible = false;
      check.note = "outside (0, 1/2)";
      report.slots.push_back(check);
      continue;
    }

    // Slots 4 and 5 (the joint-likelihood filters) follow the same windows
    // as slots 1 and 2.
    const int role = check.slot <= 3 ? check.slot : check.slot - 3;
    switch (role) {
      case 1:
        check.window_lo = std::max(0.2, (1.0 + delta) / 6.0);
        check.admissible = check.rho > 0.2 && check.rho >= (1.0 + delta) / 6.0;
        break;
      case 2:
        check.window_lo = delta / 2.0;
        check.admissible = check.rho >= delta / 2.0;
        break;
      default:
        check.window_lo = delta / 4.0;
        check.admissible = check.rho >= delta / 4.0;
        break;
    }
    check.note = check.admissible ? "admissible" : "below the admissible window";
    report.slots.push_back(check);
  }
  return report;
}

}  // namespace jdqml
