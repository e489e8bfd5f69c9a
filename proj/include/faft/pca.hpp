#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "faft/errors.hpp"

namespace faft {

/// Principal-components estimate on a t x N sample. Normalization:
/// (1/t) F_hat' F_hat = I_r, Lambda_hat = (1/t) X' F_hat, D2 holds the top-r
/// eigenvalues of (Nt)^{-1} X X' in decreasing order.
struct FactorEstimate {
  Eigen::MatrixXd F_hat;       ///< t x r
  Eigen::MatrixXd Lambda_hat;  ///< N x r
  Eigen::VectorXd D2;          ///< r eigenvalues, decreasing
  int t = 0;
  int r = 0;
};

namespace detail {

constexpr double kRankEps = 1e-12;

/// Deterministic eigenvector signs: flip column j so the loading column sum
/// is positive; on an exact tie, make the first nonzero loading positive.
inline void fix_signs(const Eigen::Ref<const Eigen::MatrixXd>& X,
                      Eigen::MatrixXd& F) {
  const double t = static_cast<double>(F.rows());
  const Eigen::VectorXd row_sums = X.rowwise().sum();
  for (int j = 0; j < F.cols(); ++j) {
    double s = F.col(j).dot(row_sums) / t;
    if (s == 0.0) {
      const Eigen::VectorXd lam = X.transpose() * F.col(j) / t;
      for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] != 0.0) {
          s = lam[i];
          break;
        }
      }
    }
    if (s < 0.0) F.col(j) = -F.col(j);
  }
}

/// Top-r factors from the t x t route: eigenvectors of (Nt)^{-1} X X'.
inline void factors_from_tt(const Eigen::Ref<const Eigen::MatrixXd>& gram_tt,
                            int N, int r, Eigen::MatrixXd& F,
                            Eigen::VectorXd& D2) {
  const int t = static_cast<int>(gram_tt.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      gram_tt / (static_cast<double>(N) * t));
  if (es.info() != Eigen::Success)
    throw RankDeficient("eigendecomposition failed on t x t gram");
  D2.resize(r);
  F.resize(t, r);
  for (int j = 0; j < r; ++j) {
    D2[j] = es.eigenvalues()[t - 1 - j];
    F.col(j) = std::sqrt(static_cast<double>(t)) * es.eigenvectors().col(t - 1 - j);
  }
}

/// Top-r factors from the N x N route: eigenvectors of (Nt)^{-1} X' X,
/// mapped back through X. Returns the same factor estimate (footnote: both
/// decompositions share the nonzero spectrum).
inline void factors_from_nn(const Eigen::Ref<const Eigen::MatrixXd>& gram_nn,
                            const Eigen::Ref<const Eigen::MatrixXd>& X_t, int r,
                            Eigen::MatrixXd& F, Eigen::VectorXd& D2) {
  const int N = static_cast<int>(gram_nn.rows());
  const int t = static_cast<int>(X_t.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      gram_nn / (static_cast<double>(N) * t));
  if (es.info() != Eigen::Success)
    throw RankDeficient("eigendecomposition failed on N x N gram");
  D2.resize(r);
  Eigen::MatrixXd V(N, r);
  for (int j = 0; j < r; ++j) {
    D2[j] = es.eigenvalues()[N - 1 - j];
    V.col(j) = es.eigenvectors().col(N - 1 - j);
  }
  F.resize(t, r);
  for (int j = 0; j < r; ++j) {
    if (D2[j] < kRankEps)
      throw RankDeficient("factor " + std::to_string(j + 1) +
                          " eigenvalue below 1e-12");
    F.col(j) = X_t * V.col(j) / (std::sqrt(static_cast<double>(N)) * std::sqrt(D2[j]));
  }
}

}  // namespace detail

/// PC factor extraction. Eigendecomposes whichever gram matrix is smaller;
/// both routes agree on the factor space up to column signs, which the
/// deterministic sign rule pins down.
inline FactorEstimate extract_factors(const Eigen::Ref<const Eigen::MatrixXd>& X_t,
                                      int r) {
  const int t = static_cast<int>(X_t.rows());
  const int N = static_cast<int>(X_t.cols());
  if (r < 1) throw ValidationError("extract_factors: r >= 1 required");
  if (r > std::min(t, N))
    throw ValidationError("extract_factors: r must not exceed min(t, N)");
  FactorEstimate fe;
  fe.t = t;
  fe.r = r;
  if (t <= N) {
    detail::factors_from_tt(X_t * X_t.transpose(), N, r, fe.F_hat, fe.D2);
  } else {
    detail::factors_from_nn(X_t.transpose() * X_t, X_t, r, fe.F_hat, fe.D2);
  }
  if (fe.D2[r - 1] < detail::kRankEps)
    throw RankDeficient("extract_factors: eigenvalue " + std::to_string(r) +
                        " below 1e-12; too few informative directions");
  detail::fix_signs(X_t, fe.F_hat);
  fe.Lambda_hat = X_t.transpose() * fe.F_hat / static_cast<double>(t);
  return fe;
}

/// Bai-Ng IC_p1 factor-number selection over k = 1..r_max:
///   IC(k) = log V(k) + k ((N+T)/(NT)) log(NT/(N+T)),
/// with V(k) the mean squared PC residual. Ties resolve to the smaller k.
inline int select_num_factors_icp1(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                   int r_max) {
  const int T = static_cast<int>(X.rows());
  const int N = static_cast<int>(X.cols());
  if (r_max < 1 || r_max > std::min(T, N) - 1)
    throw ValidationError("select_num_factors_icp1: need 1 <= r_max <= min(T,N)-1");
  const FactorEstimate fe = extract_factors(X, r_max);
  const double nt = static_cast<double>(N) * T;
  const double penalty_unit = ((N + T) / nt) * std::log(nt / (N + T));
  int best_k = 1;
  double best_ic = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= r_max; ++k) {
    const Eigen::MatrixXd resid = X - fe.F_hat.leftCols(k) *
                                          fe.Lambda_hat.leftCols(k).transpose();
    const double v = resid.squaredNorm() / nt;
    const double ic = std::log(v) + k * penalty_unit;
    if (ic < best_ic) {
      best_ic = ic;
      best_k = k;
    }
  }
  return best_k;
}

/// Rotation between estimated and true factor spaces, plus the average
/// squared factor approximation error (1/t) ||F_hat - F H'||_F^2.
struct RotationDiagnostics {
  Eigen::MatrixXd H;          ///< r x r
  double avg_sq_error = 0.0;
  Eigen::VectorXd alpha_assumed;
};

/// H = D2^{-1} (t^{-1} F_hat' F) (N^{-1} Lambda' Lambda). The loading-strength
/// scalings (N/N^alpha and the diagonal B_N variant) cancel algebraically, so
/// one formula covers homogeneous and heterogeneous strengths; alpha is kept
/// as metadata for diagnostics built on top.
inline RotationDiagnostics rotation_matrix(const FactorEstimate& fe,
                                           const Eigen::Ref<const Eigen::MatrixXd>& F_true,
                                           const Eigen::Ref<const Eigen::MatrixXd>& Lambda_true,
                                           const Eigen::VectorXd& alpha) {
  if (F_true.rows() != fe.t || F_true.cols() != fe.r)
    throw ValidationError("rotation_matrix: F_true must be t x r");
  if (Lambda_true.cols() != fe.r)
    throw ValidationError("rotation_matrix: Lambda_true must be N x r");
  if (alpha.size() != fe.r)
    throw ValidationError("rotation_matrix: alpha must have length r");
  for (Eigen::Index j = 0; j < alpha.size(); ++j)
    if (!(alpha[j] > 0.0 && alpha[j] <= 1.0))
      throw ValidationError("rotation_matrix: alpha entries must be in (0,1]");
  if (fe.D2.minCoeff() < detail::kRankEps)
    throw SingularEigenvalues("rotation_matrix: eigenvalue below 1e-12");

  const double t = static_cast<double>(fe.t);
  const double N = static_cast<double>(Lambda_true.rows());
  RotationDiagnostics out;
  out.H = fe.D2.cwiseInverse().asDiagonal() *
          (fe.F_hat.transpose() * F_true / t) *
          (Lambda_true.transpose() * Lambda_true / N);
  out.avg_sq_error = (fe.F_hat - F_true * out.H.transpose()).squaredNorm() / t;
  out.alpha_assumed = alpha;
  return out;
}

namespace detail {

/// Re-estimates factors on growing samples X.topRows(t) as the expanding
/// window advances. Gram matrices are cached: the t x t gram of any prefix is
/// a corner block of the full X X', and the N x N gram grows by rank-one row
/// updates. Both match fresh recomputation to well below 1e-8.
class RecursiveFactorEngine {
 public:
  RecursiveFactorEngine(const Eigen::MatrixXd& X, int r)
      : X_(X), r_(r), N_(static_cast<int>(X.cols())) {}

  /// Factors for the sample consisting of the first t rows. Must be called
  /// with non-decreasing t.
  const Eigen::MatrixXd& factors(int t) {
    if (t <= N_) {
      if (!tt_ready_) {
        gram_tt_ = X_ * X_.transpose();
        tt_ready_ = true;
      }
      factors_from_tt(gram_tt_.topLeftCorner(t, t), N_, r_, F_, D2_);
      for (int j = 0; j < r_; ++j)
        if (D2_[j] < kRankEps)
          throw RankDeficient("recursive PC: eigenvalue below 1e-12");
    } else {
      if (nn_rows_ == 0) {
        gram_nn_ = X_.topRows(t).transpose() * X_.topRows(t);
        nn_rows_ = t;
      } else {
        // Only the lower triangle is kept current; the eigensolver in
        // factors_from_nn reads just that part.
        for (; nn_rows_ < t; ++nn_rows_)
          gram_nn_.selfadjointView<Eigen::Lower>().rankUpdate(
              X_.row(nn_rows_).transpose());
      }
      factors_from_nn(gram_nn_, X_.topRows(t), r_, F_, D2_);
    }
    fix_signs(X_.topRows(t), F_);
    return F_;
  }

  const Eigen::VectorXd& eigenvalues() const { return D2_; }

 private:
  const Eigen::MatrixXd& X_;
  int r_;
  int N_;
  Eigen::MatrixXd gram_tt_;
  Eigen::MatrixXd gram_nn_;
  Eigen::MatrixXd F_;
  Eigen::VectorXd D2_;
  int nn_rows_ = 0;
  bool tt_ready_ = false;
};

}  // namespace detail
}  // namespace faft
