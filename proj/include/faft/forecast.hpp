#pragma once

#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "faft/core.hpp"
#include "faft/errors.hpp"
#include "faft/pca.hpp"

namespace faft {

/// Least squares with an explicit conditioning guard: cond(Z'Z) must stay
/// below 1e12. Solves via Householder QR.
inline Eigen::VectorXd ols(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                           const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (Z.rows() != y.size()) throw ValidationError("ols: dimension mismatch");
  if (Z.rows() <= Z.cols())
    throw IllConditioned("ols: more regressors than observations");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z.transpose() * Z,
                                                    Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi >= 1e12 * lo)
    throw IllConditioned("ols: cross-product condition number >= 1e12");
  return Z.householderQr().solve(y);
}

/// Aligned out-of-sample error streams over t = k0..T-1; entry j targets
/// y_{k0+j+1}. u2_hat is empty when the feasible pass was not requested.
struct ForecastErrorStreams {
  Eigen::VectorXd u1;                      ///< restricted-model errors
  Eigen::VectorXd u2_hat;                  ///< factor-augmented, PC factors
  std::optional<Eigen::VectorXd> u2_tilde; ///< factor-augmented, given factors
  int r_used = 0;
  SplitIndices split;

  /// The unrestricted stream a statistic should consume.
  const Eigen::VectorXd& u2(bool feasible) const {
    if (feasible) {
      if (u2_hat.size() == 0)
        throw ValidationError("streams: feasible u2 stream not computed");
      return u2_hat;
    }
    if (!u2_tilde)
      throw ValidationError("streams: infeasible u2 stream not computed");
    return *u2_tilde;
  }
};

struct ForecastOptions {
  bool feasible = true;  ///< run the PC re-estimation pass for u2_hat
};

namespace detail {

[[noreturn]] inline void rethrow_with_step(const NumericError& e, int t) {
  const std::string msg = std::string(e.what()) + " (recursion step t=" +
                          std::to_string(t) + ")";
  if (dynamic_cast<const IllConditioned*>(&e)) throw IllConditioned(msg);
  if (dynamic_cast<const RankDeficient*>(&e)) throw RankDeficient(msg);
  throw NumericError(msg);
}

}  // namespace detail

/// Restricted-model errors: at each t the coefficient is fit on the pairs
/// (w_s, y_{s+1}), s = 1..t-1, and applied to w_t.
inline Eigen::VectorXd restricted_error_stream(const PanelData& data,
                                               const SplitIndices& split) {
  const int T = data.T();
  Eigen::VectorXd u(split.n);
  for (int t = split.k0; t < T; ++t) {
    try {
      const Eigen::VectorXd theta =
          ols(data.W.topRows(t - 1), data.y.segment(1, t - 1));
      u[t - split.k0] = data.y[t] - data.W.row(t - 1).dot(theta);
    } catch (const NumericError& e) {
      detail::rethrow_with_step(e, t);
    }
  }
  return u;
}

/// Factor-augmented errors for an arbitrary per-step factor source.
/// factors_at(t) must return the t x r factor matrix for the sample of the
/// first t rows; the regression uses its rows 1..t-1 and the forecast row t.
template <class FactorsAt>
Eigen::VectorXd unrestricted_error_stream(const PanelData& data,
                                          const SplitIndices& split,
                                          FactorsAt&& factors_at) {
  const int T = data.T();
  const int k = data.k();
  Eigen::VectorXd u(split.n);
  Eigen::MatrixXd Z;
  Eigen::VectorXd z_t;
  for (int t = split.k0; t < T; ++t) {
    try {
      const auto& F = factors_at(t);  // t x r
      const int r = static_cast<int>(F.cols());
      Z.resize(t - 1, k + r);
      Z.leftCols(k) = data.W.topRows(t - 1);
      Z.rightCols(r) = F.topRows(t - 1);
      const Eigen::VectorXd delta = ols(Z, data.y.segment(1, t - 1));
      z_t.resize(k + r);
      z_t.head(k) = data.W.row(t - 1);
      z_t.tail(r) = F.row(t - 1);
      u[t - split.k0] = data.y[t] - z_t.dot(delta);
    } catch (const NumericError& e) {
      detail::rethrow_with_step(e, t);
    }
  }
  return u;
}

/// Full recursive pass: restricted stream, feasible stream with factors
/// re-estimated by PC at every t, and, when true factors are supplied, the
/// infeasible stream using them instead.
inline ForecastErrorStreams recursive_forecast_errors(
    const PanelData& data, const SplitIndices& split, int r,
    const Eigen::MatrixXd* F_true = nullptr, ForecastOptions opt = {}) {
  if (r < 1) throw ValidationError("recursive_forecast_errors: r >= 1 required");
  if (r > std::min(split.k0, data.N()))
    throw ValidationError("recursive_forecast_errors: r must not exceed min(k0, N)");
  if (split.k0 + split.n != data.T())
    throw ValidationError("recursive_forecast_errors: split does not match T");
  if (F_true && (F_true->rows() != data.T() || F_true->cols() != r))
    throw ValidationError("recursive_forecast_errors: F_true must be T x r");

  ForecastErrorStreams out;
  out.r_used = r;
  out.split = split;
  out.u1 = restricted_error_stream(data, split);
  if (opt.feasible) {
    detail::RecursiveFactorEngine engine(data.X, r);
    out.u2_hat = unrestricted_error_stream(
        data, split, [&](int t) -> const Eigen::MatrixXd& { return engine.factors(t); });
  }
  if (F_true) {
    out.u2_tilde = unrestricted_error_stream(
        data, split, [&](int t) { return F_true->topRows(t); });
  }
  return out;
}

}  // namespace faft
