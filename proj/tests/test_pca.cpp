#include <catch2/catch_amalgamated.hpp>

#include "faft/dgp.hpp"
#include "faft/pca.hpp"
#include "support.hpp"

using namespace faft;
using testsupport::gaussian_matrix;

TEST_CASE("extract_factors: noiseless factor model is recovered exactly") {
  const int t = 60, N = 25, r = 3;
  const Eigen::MatrixXd F = gaussian_matrix(t, r, 101);
  const Eigen::MatrixXd L = gaussian_matrix(N, r, 102);
  const Eigen::MatrixXd X = F * L.transpose();
  const FactorEstimate fe = extract_factors(X, r);
  // F_hat spans col(F): projection residual is zero.
  const Eigen::MatrixXd proj =
      fe.F_hat * (fe.F_hat.transpose() * fe.F_hat).ldlt().solve(fe.F_hat.transpose() * F);
  CHECK((proj - F).norm() / F.norm() < 1e-8);
}

TEST_CASE("extract_factors: two-by-two identity panel by hand") {
  Eigen::MatrixXd X(2, 2);
  X << 1.0, 0.0, 0.0, 1.0;
  const FactorEstimate fe = extract_factors(X, 1);
  // (Nt)^{-1} X X' = I/4, so the top eigenvalue is exactly 0.25.
  CHECK(fe.D2[0] == Catch::Approx(0.25).margin(1e-15));
  CHECK(fe.F_hat.squaredNorm() == Catch::Approx(2.0).margin(1e-12));
  CHECK(fe.Lambda_hat.isApprox(X.transpose() * fe.F_hat / 2.0, 1e-14));
}

TEST_CASE("extract_factors: normalization and eigen-identity invariants") {
  const int t = 80, N = 40, r = 4;
  const Eigen::MatrixXd X = gaussian_matrix(t, N, 103) +
                            gaussian_matrix(t, r, 104) * gaussian_matrix(N, r, 105).transpose();
  const FactorEstimate fe = extract_factors(X, r);
  const Eigen::MatrixXd gram = fe.F_hat.transpose() * fe.F_hat / t;
  CHECK((gram - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-8);
  const Eigen::MatrixXd M = X * X.transpose() / (static_cast<double>(N) * t);
  const Eigen::MatrixXd resid = M * fe.F_hat - fe.F_hat * fe.D2.asDiagonal();
  CHECK(resid.cwiseAbs().maxCoeff() < 1e-6 * fe.D2.maxCoeff());
  // D2 decreasing
  for (int j = 1; j < r; ++j) CHECK(fe.D2[j] <= fe.D2[j - 1]);
}

TEST_CASE("extract_factors: t x t and N x N routes agree") {
  const int r = 3;
  const Eigen::MatrixXd F = gaussian_matrix(90, r, 106);
  const Eigen::MatrixXd L = gaussian_matrix(50, r, 107);
  const Eigen::MatrixXd E = gaussian_matrix(90, 50, 108);
  const Eigen::MatrixXd X = F * L.transpose() + 0.5 * E;
  // Run both decompositions on the same sample and align signs.
  Eigen::MatrixXd F_tt, F_nn;
  Eigen::VectorXd D2_tt, D2_nn;
  detail::factors_from_tt(X * X.transpose(), 50, r, F_tt, D2_tt);
  detail::factors_from_nn(X.transpose() * X, X, r, F_nn, D2_nn);
  detail::fix_signs(X, F_tt);
  detail::fix_signs(X, F_nn);
  CHECK((F_tt - F_nn).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((D2_tt - D2_nn).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("extract_factors: scale covariance") {
  const Eigen::MatrixXd X = gaussian_matrix(50, 30, 109);
  const FactorEstimate base = extract_factors(X, 2);
  const FactorEstimate scaled = extract_factors((7.5 * X).eval(), 2);
  CHECK((base.F_hat - scaled.F_hat).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((7.5 * base.Lambda_hat - scaled.Lambda_hat).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("extract_factors: rank deficiency is reported") {
  const Eigen::MatrixXd F = gaussian_matrix(40, 1, 110);
  const Eigen::MatrixXd L = gaussian_matrix(20, 1, 111);
  const Eigen::MatrixXd X = F * L.transpose();  // exact rank one
  CHECK_THROWS_AS(extract_factors(X, 2), RankDeficient);
  CHECK_THROWS_AS(extract_factors(X, 0), ValidationError);
  CHECK_THROWS_AS(extract_factors(X, 21), ValidationError);
}

TEST_CASE("icp1: pure noise selects the grid minimum") {
  const Eigen::MatrixXd X = gaussian_matrix(200, 200, 112);
  CHECK(select_num_factors_icp1(X, 8) == 1);
}

TEST_CASE("icp1: one dominant factor") {
  const Eigen::MatrixXd f = gaussian_matrix(200, 1, 113);
  const Eigen::MatrixXd lam = Eigen::MatrixXd::Ones(150, 1);
  const Eigen::MatrixXd X =
      std::sqrt(10.0) * f * lam.transpose() + gaussian_matrix(200, 150, 114);
  CHECK(select_num_factors_icp1(X, 5) == 1);
}

TEST_CASE("icp1: recovers r = 3 on the simulated design", "[mc]") {
  DgpConfig cfg;
  cfg.N = 150;
  cfg.T = 150;
  cfg.seed = 2024;
  const SimulatedDataset ds = generate_dataset(cfg);
  CHECK(select_num_factors_icp1(ds.panel.X, 8) == 3);
  CHECK_THROWS_AS(select_num_factors_icp1(ds.panel.X, 150), ValidationError);
}

TEST_CASE("loading gram matches the target eigenvalue profile", "[mc]") {
  // With the perturbation off, B_N^{-1} Lambda' Lambda B_N^{-1} concentrates
  // on diag(3,2,1); estimated loadings reproduce it after sign alignment.
  DgpConfig cfg;
  cfg.N = 800;
  cfg.T = 500;
  cfg.pi_perturb = 0.0;
  cfg.seed = 77;
  const SimulatedDataset ds = generate_dataset(cfg);
  const FactorEstimate fe = extract_factors(ds.panel.X, 3);
  const Eigen::MatrixXd gram = fe.Lambda_hat.transpose() * fe.Lambda_hat / 800.0;
  for (int j = 0; j < 3; ++j)
    CHECK(gram(j, j) == Catch::Approx(cfg.D2diag[j]).epsilon(0.15));
}

TEST_CASE("rotation_matrix: exact rotation has zero error") {
  const int t = 50, N = 30, r = 3;
  Eigen::MatrixXd F = gaussian_matrix(t, r, 115);
  // Orthonormalize so that (1/t) F'F = I exactly.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(F);
  F = qr.householderQ() * Eigen::MatrixXd::Identity(t, r) * std::sqrt(static_cast<double>(t));
  Eigen::MatrixXd H0 = Eigen::MatrixXd::Identity(r, r);
  H0(1, 1) = -1.0;  // a diagonal-sign rotation
  Eigen::MatrixXd Lam = gaussian_matrix(N, r, 116);
  Eigen::HouseholderQR<Eigen::MatrixXd> qrl(Lam);
  Lam = qrl.householderQ() * Eigen::MatrixXd::Identity(N, r) * std::sqrt(static_cast<double>(N));

  FactorEstimate fe;
  fe.t = t;
  fe.r = r;
  fe.F_hat = F * H0.transpose();
  fe.Lambda_hat = Eigen::MatrixXd::Zero(N, r);
  fe.D2 = Eigen::VectorXd::Ones(r);
  const RotationDiagnostics diag =
      rotation_matrix(fe, F, Lam, Eigen::VectorXd::Ones(r));
  CHECK(diag.avg_sq_error < 1e-10);
  CHECK(diag.H.isApprox(H0.transpose(), 1e-10));
}

TEST_CASE("rotation_matrix: strong-loading error is small and validated", "[mc]") {
  DgpConfig cfg;
  cfg.N = 400;
  cfg.T = 500;
  cfg.pi_perturb = 0.0;
  double acc = 0.0;
  const int reps = 5;
  for (int rep = 0; rep < reps; ++rep) {
    cfg.seed = 400 + rep;
    const SimulatedDataset ds = generate_dataset(cfg);
    const FactorEstimate fe = extract_factors(ds.panel.X, 3);
    const RotationDiagnostics diag =
        rotation_matrix(fe, ds.F_true, ds.Lambda_true, cfg.alphas);
    acc += diag.avg_sq_error;
  }
  CHECK(acc / reps < 0.05);
}

TEST_CASE("rotation_matrix: weak-loading error decreases in N", "[mc][heavy]") {
  double prev = -1.0;
  for (int N : {200, 800}) {
    DgpConfig cfg;
    cfg.N = N;
    cfg.T = 500;
    cfg.pi_perturb = 0.0;
    cfg.alphas = Eigen::VectorXd::Constant(3, 0.51);
    double acc = 0.0;
    const int reps = 6;
    for (int rep = 0; rep < reps; ++rep) {
      cfg.seed = 900 + rep;
      const SimulatedDataset ds = generate_dataset(cfg);
      const FactorEstimate fe = extract_factors(ds.panel.X, 3);
      acc += rotation_matrix(fe, ds.F_true, ds.Lambda_true, cfg.alphas).avg_sq_error;
    }
    acc /= reps;
    CHECK(acc < 0.5);
    if (prev >= 0.0) CHECK(acc < prev);
    prev = acc;
  }
}

TEST_CASE("rotation_matrix: singular eigenvalues rejected") {
  FactorEstimate fe;
  fe.t = 10;
  fe.r = 2;
  fe.F_hat = gaussian_matrix(10, 2, 117);
  fe.D2 = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(rotation_matrix(fe, gaussian_matrix(10, 2, 118),
                                  gaussian_matrix(5, 2, 119),
                                  Eigen::VectorXd::Ones(2)),
                  SingularEigenvalues);
}

TEST_CASE("recursive engine matches fresh extraction at every cached step") {
  const Eigen::MatrixXd F = gaussian_matrix(70, 2, 120);
  const Eigen::MatrixXd L = gaussian_matrix(30, 2, 121);
  const Eigen::MatrixXd X = F * L.transpose() + 0.3 * gaussian_matrix(70, 30, 122);
  detail::RecursiveFactorEngine engine(X, 2);
  for (int t : {20, 25, 31, 45, 70}) {  // crosses the t <= N boundary at 30
    const Eigen::MatrixXd& Fe = engine.factors(t);
    const FactorEstimate fresh = extract_factors(X.topRows(t), 2);
    REQUIRE(Fe.rows() == t);
    CHECK((Fe - fresh.F_hat).cwiseAbs().maxCoeff() < 1e-8);
  }
}
