#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "faft/accum.hpp"
#include "faft/core.hpp"
#include "faft/errors.hpp"
#include "faft/forecast.hpp"

namespace faft {

enum class TestId { g1, g2, g3, g4 };

inline const char* test_name(TestId id) {
  switch (id) {
    case TestId::g1: return "g1";
    case TestId::g2: return "g2";
    case TestId::g3: return "g3";
    case TestId::g4: return "g4";
  }
  return "?";
}

/// One-sided upper-tail standard normal p-value, 1 - Phi(x).
inline double p_value(double statistic) {
  return 0.5 * std::erfc(statistic / std::numbers::sqrt2);
}

/// Sample variance (divisor n) of the squared errors of the u2 stream:
/// phi_hat^2 = n^{-1} sum (u2^2 - mean(u2^2))^2.
inline double phi_hat2(const Eigen::VectorXd& u2) {
  const Eigen::Index n = u2.size();
  if (n < 2) throw ValidationError("phi_hat2: n >= 2 required");
  KahanSum mean_acc;
  for (Eigen::Index i = 0; i < n; ++i) mean_acc.add(u2[i] * u2[i]);
  const double mean_sq = mean_acc.value() / static_cast<double>(n);
  KahanSum var_acc;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = u2[i] * u2[i] - mean_sq;
    var_acc.add(d * d);
  }
  const double phi2 = var_acc.value() / static_cast<double>(n);
  if (phi2 < 1e-14)
    throw DegenerateVariance("phi_hat2: squared errors are constant");
  return phi2;
}

/// Bartlett-kernel long-run variance of the squared-error deviations.
/// Experimental alternative to phi_hat2 for serially correlated errors,
/// exposed behind a CLI flag; not used by any calibrated target.
inline double phi_hat2_hac(const Eigen::VectorXd& u2, int lags) {
  const Eigen::Index n = u2.size();
  if (n < 2) throw ValidationError("phi_hat2_hac: n >= 2 required");
  if (lags < 0 || lags >= n) throw ValidationError("phi_hat2_hac: bad lag count");
  Eigen::VectorXd d(n);
  KahanSum mean_acc;
  for (Eigen::Index i = 0; i < n; ++i) mean_acc.add(u2[i] * u2[i]);
  const double mean_sq = mean_acc.value() / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = u2[i] * u2[i] - mean_sq;
  KahanSum acc;
  for (Eigen::Index i = 0; i < n; ++i) acc.add(d[i] * d[i]);
  double lrv = acc.value() / static_cast<double>(n);
  for (int l = 1; l <= lags; ++l) {
    KahanSum g;
    for (Eigen::Index i = l; i < n; ++i) g.add(d[i] * d[i - l]);
    lrv += 2.0 * (1.0 - static_cast<double>(l) / (lags + 1)) * g.value() /
           static_cast<double>(n);
  }
  if (lrv < 1e-14) throw DegenerateVariance("phi_hat2_hac: degenerate variance");
  return lrv;
}

/// Closed-form variance scalings omega_j^2 = phi^2 * gamma_j^2 from the
/// operationalization recipe. The g3/g4 formulas are piecewise in the fixed
/// window share against tau0, with matching branches at equality.
inline double omega2(TestId id, const SplitConfig& cfg, double phi2) {
  if (!(phi2 > 0.0)) throw ValidationError("omega2: phi2 must be positive");
  double value = 0.0;
  switch (id) {
    case TestId::g1: {
      const double mu = cfg.mu0;
      value = phi2 * (1.0 - 2.0 * mu) * (1.0 - 2.0 * mu) / (4.0 * mu * (1.0 - mu));
      break;
    }
    case TestId::g2: {
      value = phi2 * std::abs(cfg.lambda1 - cfg.lambda2) / (cfg.lambda1 * cfg.lambda2);
      break;
    }
    case TestId::g3:
    case TestId::g4: {
      const double lam = (id == TestId::g3) ? cfg.lambda2 : cfg.lambda1;
      const double tau = cfg.tau0;
      const double omt = 1.0 - tau;
      if (lam <= tau)
        value = phi2 * (omt * omt + 2.0 * lam * (omt + std::log(tau))) /
                (lam * omt * omt);
      else
        value = phi2 *
                (1.0 - tau * tau +
                 2.0 * lam * (omt * std::log(lam) + tau * std::log(tau))) /
                (lam * omt * omt);
      break;
    }
  }
  if (!(value > 0.0) || !std::isfinite(value))
    throw DegenerateTuning(std::string("omega2: formula for ") + test_name(id) +
                           " is non-positive for these tunings");
  return value;
}

namespace detail {

/// Compensated prefix sums over the error streams; everything each statistic
/// needs is O(1) per window afterwards.
struct StreamSums {
  std::vector<double> u1_sq;    ///< prefix sums of u1^2
  std::vector<double> u2_sq;    ///< prefix sums of u2^2
  std::vector<double> cross;    ///< prefix sums of u1*u2
  std::vector<double> diff_sq;  ///< prefix sums of (u1-u2)^2
  int n = 0;
  double sqrt_n = 0.0;

  StreamSums(const Eigen::VectorXd& u1, const Eigen::VectorXd& u2) {
    n = static_cast<int>(u1.size());
    sqrt_n = std::sqrt(static_cast<double>(n));
    u1_sq = prefix_sums(u1.array().square().matrix());
    u2_sq = prefix_sums(u2.array().square().matrix());
    cross = prefix_sums((u1.array() * u2.array()).matrix());
    diff_sq = prefix_sums((u1.array() - u2.array()).square().matrix());
  }

  /// Unnormalized accuracy core: (n/l1)[ n^{-1/2} sum_{<l1} u1^2
  ///                                     - (l1/l2) n^{-1/2} sum_{<l2} u2^2 ].
  double g2_core(int l1, int l2) const {
    const double a = u1_sq[static_cast<std::size_t>(l1)] / sqrt_n;
    const double b = u2_sq[static_cast<std::size_t>(l2)] / sqrt_n;
    return (static_cast<double>(n) / l1) *
           (a - (static_cast<double>(l1) / l2) * b);
  }
};

}  // namespace detail

/// Outcome of one test: the statistic, its variance pieces, the one-sided
/// p-value, and (for the accuracy tests) the power-enhanced variant.
struct TestResult {
  TestId test_id = TestId::g1;
  double statistic = 0.0;
  std::optional<double> adjusted_statistic;
  double phi2 = 0.0;
  double omega2 = 0.0;
  double p_value = 1.0;
  std::optional<double> p_value_adjusted;
  SplitConfig tunings;
};

/// Nonnegative power-enhancement term for g2/g3/g4, built from the squared
/// gap between the restricted and unrestricted error streams.
inline double power_adjustment(TestId id, const ForecastErrorStreams& streams,
                               const SplitConfig& cfg, bool feasible = true) {
  if (id == TestId::g1)
    throw ValidationError("power_adjustment: defined for g2, g3, g4 only");
  const Eigen::VectorXd& u2 = streams.u2(feasible);
  const detail::StreamSums sums(streams.u1, u2);
  const SplitIndices& s = streams.split;
  const double phi2 = phi_hat2(u2);
  const double omega = std::sqrt(omega2(id, cfg, phi2));
  if (id == TestId::g2 || id == TestId::g3) {
    const double gap = sums.diff_sq[static_cast<std::size_t>(s.l2)] / sums.sqrt_n;
    return gap / (omega * cfg.lambda2);
  }
  // g4: average over the l2 window with weights n/l2.
  KahanSum acc;
  for (int l2 = s.tau_floor + 1; l2 <= s.n; ++l2)
    acc.add((static_cast<double>(s.n) / l2) *
            sums.diff_sq[static_cast<std::size_t>(l2)] / sums.sqrt_n);
  return acc.value() / (omega * s.n * (1.0 - cfg.tau0));
}

namespace detail {

inline TestResult make_result(TestId id, double stat,
                              std::optional<double> adjustment, double phi2,
                              double om2, const SplitConfig& cfg) {
  TestResult res;
  res.test_id = id;
  res.statistic = stat;
  res.phi2 = phi2;
  res.omega2 = om2;
  res.p_value = p_value(stat);
  res.tunings = cfg;
  if (adjustment) {
    res.adjusted_statistic = stat + *adjustment;
    res.p_value_adjusted = p_value(*res.adjusted_statistic);
  }
  return res;
}

}  // namespace detail

/// Forecast-encompassing test. The bracket combines the full out-of-sample
/// sum of squared restricted errors with reweighted cross-product sums over
/// the two mu0 segments.
inline TestResult g1_encompassing(const ForecastErrorStreams& streams,
                                  const SplitConfig& cfg, bool feasible = true) {
  const Eigen::VectorXd& u2 = streams.u2(feasible);
  const detail::StreamSums sums(streams.u1, u2);
  const SplitIndices& s = streams.split;
  const double phi2 = phi_hat2(u2);
  const double om2 = omega2(TestId::g1, cfg, phi2);
  const double n = s.n;
  const double total = sums.u1_sq[static_cast<std::size_t>(s.n)] / sums.sqrt_n;
  const double cross_lo = sums.cross[static_cast<std::size_t>(s.m0)] / sums.sqrt_n;
  const double cross_hi = (sums.cross[static_cast<std::size_t>(s.n)] -
                           sums.cross[static_cast<std::size_t>(s.m0)]) /
                          sums.sqrt_n;
  const double bracket =
      total - 0.5 * ((n / s.m0) * cross_lo + (n / (n - s.m0)) * cross_hi);
  return detail::make_result(TestId::g1, bracket / std::sqrt(om2), std::nullopt,
                             phi2, om2, cfg);
}

/// Forecast-accuracy test comparing the two MSE windows l1 and l2.
inline TestResult g2_accuracy(const ForecastErrorStreams& streams,
                              const SplitConfig& cfg, bool feasible = true) {
  const Eigen::VectorXd& u2 = streams.u2(feasible);
  const detail::StreamSums sums(streams.u1, u2);
  const SplitIndices& s = streams.split;
  if (s.l1 == s.l2)
    throw DegenerateTuning("g2: windows coincide (l1 == l2), variance is zero");
  const double phi2 = phi_hat2(u2);
  const double om2 = omega2(TestId::g2, cfg, phi2);
  const double stat = sums.g2_core(s.l1, s.l2) / std::sqrt(om2);
  const double adj = power_adjustment(TestId::g2, streams, cfg, feasible);
  return detail::make_result(TestId::g2, stat, adj, phi2, om2, cfg);
}

/// Accuracy test averaged over the restricted window l1 with l2 fixed.
inline TestResult g3_averaged(const ForecastErrorStreams& streams,
                              const SplitConfig& cfg, bool feasible = true) {
  const Eigen::VectorXd& u2 = streams.u2(feasible);
  const detail::StreamSums sums(streams.u1, u2);
  const SplitIndices& s = streams.split;
  const double phi2 = phi_hat2(u2);
  const double om2 = omega2(TestId::g3, cfg, phi2);
  KahanSum acc;
  for (int l1 = s.tau_floor + 1; l1 <= s.n; ++l1) acc.add(sums.g2_core(l1, s.l2));
  const double stat =
      acc.value() / (s.n * (1.0 - cfg.tau0)) / std::sqrt(om2);
  const double adj = power_adjustment(TestId::g3, streams, cfg, feasible);
  return detail::make_result(TestId::g3, stat, adj, phi2, om2, cfg);
}

/// Accuracy test averaged over the unrestricted window l2 with l1 fixed, so
/// the MSE of the factor-augmented model accumulates across the average.
inline TestResult g4_averaged(const ForecastErrorStreams& streams,
                              const SplitConfig& cfg, bool feasible = true) {
  const Eigen::VectorXd& u2 = streams.u2(feasible);
  const detail::StreamSums sums(streams.u1, u2);
  const SplitIndices& s = streams.split;
  const double phi2 = phi_hat2(u2);
  const double om2 = omega2(TestId::g4, cfg, phi2);
  KahanSum acc;
  for (int l2 = s.tau_floor + 1; l2 <= s.n; ++l2) acc.add(sums.g2_core(s.l1, l2));
  const double stat =
      acc.value() / (s.n * (1.0 - cfg.tau0)) / std::sqrt(om2);
  const double adj = power_adjustment(TestId::g4, streams, cfg, feasible);
  return detail::make_result(TestId::g4, stat, adj, phi2, om2, cfg);
}

/// Dispatch helper used by the experiment runner and the CLI.
inline TestResult run_test(TestId id, const ForecastErrorStreams& streams,
                           const SplitConfig& cfg, bool feasible = true) {
  switch (id) {
    case TestId::g1: return g1_encompassing(streams, cfg, feasible);
    case TestId::g2: return g2_accuracy(streams, cfg, feasible);
    case TestId::g3: return g3_averaged(streams, cfg, feasible);
    case TestId::g4: return g4_averaged(streams, cfg, feasible);
  }
  throw ValidationError("run_test: unknown test id");
}

}  // namespace faft
