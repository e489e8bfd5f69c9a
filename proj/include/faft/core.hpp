#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "faft/errors.hpp"

namespace faft {

/// Raw inputs of one evaluation problem: a T x N predictor panel X, the
/// target series y and the known-regressor matrix W. W is taken as-is; the
/// library never injects an intercept on its own, composing W (intercept,
/// lags of y, dummies) is the caller's job.
struct PanelData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::MatrixXd W;

  PanelData(Eigen::MatrixXd x, Eigen::VectorXd target, Eigen::MatrixXd w)
      : X(std::move(x)), y(std::move(target)), W(std::move(w)) {
    if (X.rows() != y.size() || W.rows() != y.size())
      throw ValidationError("PanelData: X, y, W must share the same T (got " +
                            std::to_string(X.rows()) + ", " +
                            std::to_string(y.size()) + ", " +
                            std::to_string(W.rows()) + ")");
    if (T() < 10) throw ValidationError("PanelData: T >= 10 required");
    if (N() < 2) throw ValidationError("PanelData: N >= 2 required");
    if (!X.allFinite() || !y.allFinite() || !W.allFinite())
      throw ValidationError("PanelData: inputs contain NaN or Inf");
  }

  int T() const { return static_cast<int>(y.size()); }
  int N() const { return static_cast<int>(X.cols()); }
  int k() const { return static_cast<int>(W.cols()); }
};

/// Tuning fractions shared by all test statistics. Defaults follow the
/// recommended values used throughout the simulation and empirical setups.
struct SplitConfig {
  double pi0 = 0.5;      ///< in-sample share, k0 = floor(T*pi0)
  double mu0 = 0.40;     ///< encompassing split share, must differ from 0.5
  double tau0 = 0.80;    ///< lower edge of the averaging window for g3/g4
  double lambda1 = 1.0;  ///< restricted-MSE window share (g2, g4)
  double lambda2 = 0.65; ///< unrestricted-MSE window share (g2, g3)

  void validate() const {
    auto in_open = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_open(pi0)) throw ValidationError("SplitConfig: pi0 must be in (0,1)");
    if (!in_open(mu0)) throw ValidationError("SplitConfig: mu0 must be in (0,1)");
    if (!in_open(tau0)) throw ValidationError("SplitConfig: tau0 must be in (0,1)");
    if (!(lambda1 > 0.0 && lambda1 <= 1.0))
      throw ValidationError("SplitConfig: lambda1 must be in (0,1]");
    if (!(lambda2 > 0.0 && lambda2 <= 1.0))
      throw ValidationError("SplitConfig: lambda2 must be in (0,1]");
    // mu0 = 0.5 and lambda1 = lambda2 make the respective asymptotic
    // variances collapse to zero.
    if (mu0 == 0.5) throw ValidationError("SplitConfig: mu0 must differ from 0.5");
    if (lambda1 == lambda2)
      throw ValidationError("SplitConfig: lambda1 must differ from lambda2");
  }
};

/// Integer split geometry derived from T and a SplitConfig.
struct SplitIndices {
  int k0 = 0;         ///< in-sample length, floor(T*pi0)
  int n = 0;          ///< out-of-sample length, T - k0
  int m0 = 0;         ///< encompassing cut, floor(n*mu0)
  int l1 = 0;         ///< floor(n*lambda1)
  int l2 = 0;         ///< floor(n*lambda2)
  int tau_floor = 0;  ///< floor(n*tau0)
};

/// Pure floor arithmetic mapping fractions to indices. Throws
/// DegenerateSplit when T is too small for the chosen fractions.
inline SplitIndices compute_split_indices(int T, const SplitConfig& cfg) {
  cfg.validate();
  if (T < 10) throw ValidationError("compute_split_indices: T >= 10 required");
  SplitIndices s;
  s.k0 = static_cast<int>(std::floor(T * cfg.pi0));
  s.n = T - s.k0;
  s.m0 = static_cast<int>(std::floor(s.n * cfg.mu0));
  s.l1 = static_cast<int>(std::floor(s.n * cfg.lambda1));
  s.l2 = static_cast<int>(std::floor(s.n * cfg.lambda2));
  s.tau_floor = static_cast<int>(std::floor(s.n * cfg.tau0));
  if (s.k0 < 1 || s.n < 2)
    throw DegenerateSplit("split: in/out-of-sample lengths collapsed (k0=" +
                          std::to_string(s.k0) + ", n=" + std::to_string(s.n) + ")");
  if (s.m0 < 1 || s.m0 >= s.n)
    throw DegenerateSplit("split: m0 = " + std::to_string(s.m0) +
                          " out of range for n = " + std::to_string(s.n) +
                          "; T too small for mu0");
  if (s.l1 < 1 || s.l2 < 1)
    throw DegenerateSplit("split: floor(n*lambda_j) = 0; T too small");
  if (s.tau_floor + 1 > s.n)
    throw DegenerateSplit("split: tau window empty; T too small for tau0");
  return s;
}

}  // namespace faft
