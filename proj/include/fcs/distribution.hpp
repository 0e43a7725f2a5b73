#pragma once

#include <vector>

namespace fcs {

/// Transfer-count distribution p_n over a contiguous integer range. A
/// negative entry beyond tolerance marks a quasiprobability (possible for the
/// spin-coupling protocol), flagged rather than rejected.
struct CountingDistribution {
  int n_min = 0;
  std::vector<double> p;
  bool quasiprobability = false;
  double max_imag_residual = 0.0;

  int n_max() const { return n_min + static_cast<int>(p.size()) - 1; }

  double at(int n) const {
    const int idx = n - n_min;
    if (idx < 0 || idx >= static_cast<int>(p.size())) return 0.0;
    return p[static_cast<size_t>(idx)];
  }

  double total() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }

  double min_entry() const {
    double m = 0.0;
    for (double v : p) m = v < m ? v : m;
    return m;
  }

  /// Raw moment <n^k>.
  double moment(int k) const {
    double s = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
      double term = p[i];
      const double n = static_cast<double>(n_min + static_cast<int>(i));
      for (int j = 0; j < k; ++j) term *= n;
      s += term;
    }
    return s;
  }

  /// Drops leading/trailing entries below `threshold` in magnitude, always
  /// keeping n = 0 in range.
  void trim(double threshold = 1e-12);
};

}  // namespace fcs
