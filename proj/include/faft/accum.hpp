#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace faft {

/// Kahan compensated accumulator. The test statistics are differences of
/// large sums over up to ~1e5 terms, where naive accumulation loses digits.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }

  KahanSum& operator+=(double x) {
    add(x);
    return *this;
  }

  double value() const { return sum; }
};

/// Compensated prefix sums: out[k] = sum of x[0..k-1], out[0] = 0.
inline std::vector<double> prefix_sums(const Eigen::VectorXd& x) {
  std::vector<double> out(static_cast<std::size_t>(x.size()) + 1);
  KahanSum acc;
  out[0] = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    acc.add(x[i]);
    out[static_cast<std::size_t>(i) + 1] = acc.value();
  }
  return out;
}

}  // namespace faft
