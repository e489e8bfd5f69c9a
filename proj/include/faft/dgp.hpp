#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "faft/core.hpp"
#include "faft/errors.hpp"
#include "faft/rng.hpp"

namespace faft {

/// Transient periods discarded from the y and idiosyncratic recursions.
inline constexpr int kBurnIn = 200;

struct GarchParams {
  double omega = 0.1;
  double alpha = 0.1;
  double eta = 0.2;
};

/// Monte Carlo design: r-factor panel with strong/weak/heterogeneous
/// loadings, AR(1) idiosyncratics with optional spatial-MA cross-sectional
/// dependence, and i.i.d. or GARCH(1,1) forecast errors.
struct DgpConfig {
  int N = 0;
  int T = 0;
  int r = 3;
  double c = 1.25;
  double theta1 = 0.5;
  Eigen::VectorXd beta;     ///< length r; empty means zeros
  Eigen::VectorXd alphas;   ///< loading strengths, decreasing, in (0,1]
  Eigen::VectorXd D2diag;   ///< target eigenvalue profile of the loadings
  double pi_perturb = 24.0; ///< scale of the G_i*pi/sqrt(N) perturbation
  double rho_mean = 0.3;
  double rho_scale = 0.5;
  bool cs_dependence = false;
  double xi = 0.4;
  int K = 5;
  bool garch = false;
  GarchParams garch_params;
  std::uint64_t seed = 0;

  DgpConfig() {
    alphas = Eigen::VectorXd::Ones(3);
    D2diag.resize(3);
    D2diag << 3.0, 2.0, 1.0;
    beta = Eigen::VectorXd::Zero(3);
  }

  void validate() const {
    if (N < 2 || T < 10) throw ValidationError("dgp: N >= 2 and T >= 10 required");
    if (r < 1) throw ValidationError("dgp: r >= 1 required");
    if (beta.size() != r || alphas.size() != r || D2diag.size() != r)
      throw ValidationError("dgp: beta, alphas, D2diag must have length r");
    for (int j = 0; j < r; ++j) {
      if (!(alphas[j] > 0.0 && alphas[j] <= 1.0))
        throw ValidationError("dgp: alphas must lie in (0,1]");
      if (j > 0 && alphas[j] > alphas[j - 1])
        throw ValidationError("dgp: alphas must be sorted decreasing");
      if (!(D2diag[j] > 0.0)) throw ValidationError("dgp: D2diag must be positive");
    }
    if (pi_perturb < 0.0) throw ValidationError("dgp: pi_perturb must be >= 0");
    if (garch && !(garch_params.alpha + garch_params.eta < 1.0))
      throw ValidationError("dgp: GARCH requires alpha + eta < 1");
    if (cs_dependence && K < 1) throw ValidationError("dgp: K >= 1 required");
  }
};

/// A generated dataset plus the latent truth used by diagnostics and the
/// infeasible test variants.
struct SimulatedDataset {
  PanelData panel;              ///< X, y, W = [1, y_t]
  Eigen::MatrixXd F_true;       ///< T x r
  Eigen::MatrixXd Lambda_true;  ///< N x r
};

/// Loadings lambda_i = G_i D B_N / sqrt(N) + G_i pi / sqrt(N) with a single
/// N(0, I_r) row G_i multiplying both terms and B_N = diag(N^{alpha_j/2}).
inline Eigen::MatrixXd simulate_loadings(int N, int r,
                                         const Eigen::VectorXd& alphas,
                                         const Eigen::VectorXd& D2diag,
                                         double pi_perturb,
                                         NormalSampler& normal) {
  Eigen::VectorXd scale(r);
  for (int j = 0; j < r; ++j) {
    const double bn = std::pow(static_cast<double>(N), alphas[j] / 2.0);
    scale[j] = (std::sqrt(D2diag[j]) * bn + pi_perturb) / std::sqrt(static_cast<double>(N));
  }
  Eigen::MatrixXd lambda(N, r);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < r; ++j) lambda(i, j) = normal() * scale[j];
  return lambda;
}

/// AR(1) idiosyncratics with unit-variance scaling sqrt(1-rho_i^2) on the
/// innovations; optional spatial MA over the K nearest series indices with
/// out-of-range neighbours dropped.
inline Eigen::MatrixXd simulate_idiosyncratics(int N, int T,
                                               const Eigen::VectorXd& rho,
                                               bool cs_dependence, double xi,
                                               int K, NormalSampler& normal) {
  if (rho.size() != N) throw ValidationError("simulate_idiosyncratics: rho length");
  Eigen::MatrixXd E(T, N);
  Eigen::VectorXd state = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd scale = (1.0 - rho.array().square()).sqrt();
  Eigen::VectorXd eps(N), v(N);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < N; ++i) eps[i] = normal();
    if (cs_dependence) {
      v = eps;
      for (int i = 0; i < N; ++i)
        for (int k = 1; k <= K; ++k) {
          if (i - k >= 0) v[i] += xi * eps[i - k];
          if (i + k < N) v[i] += xi * eps[i + k];
        }
    } else {
      v = eps;
    }
    state = rho.cwiseProduct(state) + scale.cwiseProduct(v);
    E.row(t) = state;
  }
  return E;
}

/// GARCH(1,1) errors u_t = sigma_t eps_t with sigma_1^2 at the stationary
/// value omega / (1 - alpha - eta).
inline Eigen::VectorXd simulate_garch(int T, double omega, double alpha,
                                      double eta, NormalSampler& normal) {
  if (!(alpha + eta < 1.0)) throw ValidationError("simulate_garch: alpha + eta < 1");
  Eigen::VectorXd u(T);
  double sig2 = omega / (1.0 - alpha - eta);
  for (int t = 0; t < T; ++t) {
    u[t] = std::sqrt(sig2) * normal();
    sig2 = omega + alpha * u[t] * u[t] + eta * sig2;
  }
  return u;
}

/// Full dataset draw. All randomness flows from counter-based streams keyed
/// off cfg.seed, so identical configs replay bitwise-identically regardless
/// of the number of worker threads around this call.
inline SimulatedDataset generate_dataset(const DgpConfig& cfg) {
  cfg.validate();
  const std::uint64_t key = mix64(cfg.seed);
  NormalSampler load_rng(key, 0);
  NormalSampler rho_rng(key, 1);
  NormalSampler factor_rng(key, 2);
  NormalSampler idio_rng(key, 3);
  NormalSampler error_rng(key, 4);

  const int L = kBurnIn + cfg.T;
  const Eigen::MatrixXd lambda =
      simulate_loadings(cfg.N, cfg.r, cfg.alphas, cfg.D2diag, cfg.pi_perturb, load_rng);

  // AR coefficients rho_i = rho_mean + rho_scale * N(0,1), kept inside the
  // stationarity region by redrawing out-of-range values. A hard clamp would
  // pile ~9% of the series onto near-unit roots, which inflates the
  // idiosyncratic eigenvalue spectrum enough to derail factor-number
  // selection on panels of this size.
  Eigen::VectorXd rho(cfg.N);
  for (int i = 0; i < cfg.N; ++i) {
    double v = cfg.rho_mean + cfg.rho_scale * rho_rng();
    for (int tries = 0; std::abs(v) >= 0.97 && tries < 100; ++tries)
      v = cfg.rho_mean + cfg.rho_scale * rho_rng();
    rho[i] = std::clamp(v, -0.97 + 1e-9, 0.97 - 1e-9);
  }

  Eigen::MatrixXd F(L, cfg.r);
  for (int t = 0; t < L; ++t)
    for (int j = 0; j < cfg.r; ++j) F(t, j) = factor_rng();

  const Eigen::MatrixXd E = simulate_idiosyncratics(cfg.N, L, rho, cfg.cs_dependence,
                                                    cfg.xi, cfg.K, idio_rng);

  Eigen::VectorXd u(L);
  if (cfg.garch) {
    u = simulate_garch(L, cfg.garch_params.omega, cfg.garch_params.alpha,
                       cfg.garch_params.eta, error_rng);
  } else {
    for (int t = 0; t < L; ++t) u[t] = error_rng();
  }

  // y_{t+1} = c + theta1 y_t + beta' f_t + u_{t+1}, run through the burn-in.
  Eigen::VectorXd y_full(L + 1);
  y_full[0] = cfg.c / (1.0 - cfg.theta1);
  for (int t = 0; t < L; ++t)
    y_full[t + 1] = cfg.c + cfg.theta1 * y_full[t] + cfg.beta.dot(F.row(t)) + u[t];

  const Eigen::MatrixXd F_s = F.bottomRows(cfg.T);
  const Eigen::VectorXd y_s = y_full.segment(kBurnIn, cfg.T);
  Eigen::MatrixXd X = F_s * lambda.transpose() + E.bottomRows(cfg.T);
  Eigen::MatrixXd W(cfg.T, 2);
  W.col(0).setOnes();
  W.col(1) = y_s;

  return SimulatedDataset{PanelData(std::move(X), y_s, std::move(W)), F_s, lambda};
}

}  // namespace faft
