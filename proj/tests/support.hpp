#pragma once

// Shared helpers for the test suites: deterministic gaussian matrices and a
// one-sample Kolmogorov-Smirnov check. Everything here is test-side only and
// independent of the library internals it is used to check.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "faft/rng.hpp"

namespace testsupport {

inline Eigen::MatrixXd gaussian_matrix(int rows, int cols, std::uint64_t seed,
                                       std::uint64_t stream = 0) {
  faft::NormalSampler normal(faft::mix64(seed), stream);
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = normal();
  return M;
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// One-sample KS statistic against a cdf.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

/// Asymptotic KS critical value: K(x) = 1 - alpha at x = 1.6276 for the 1%
/// level; reject when sqrt(n) * D_n exceeds it.
inline constexpr double kKs1PercentCritical = 1.6276236115189501;

/// Least squares through the normal equations; independent oracle for the
/// QR-based solver in the library.
inline Eigen::VectorXd normal_equations_ols(const Eigen::MatrixXd& Z,
                                            const Eigen::VectorXd& y) {
  return (Z.transpose() * Z).ldlt().solve(Z.transpose() * y);
}

}  // namespace testsupport
