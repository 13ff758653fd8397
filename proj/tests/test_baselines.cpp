#include <gtest/gtest.h>

#include <algorithm>

#include <qbmor/gramians_norms.hpp>
#include <qbmor/reduction_baselines.hpp>

#include "support.hpp"

using namespace qbmor;
using qbmor::test::kron_oracle;
using qbmor::test::randn;
using qbmor::test::random_qb;

namespace {

Mat lyap_oracle(const Mat& A, const Mat& Q) {
  const Index n = A.rows();
  const Mat I = Mat::Identity(n, n);
  const Vec x = (kron_oracle(I, A) + kron_oracle(A, I)).partialPivLu().solve(-test::vec_oracle(Q));
  return Eigen::Map<const Mat>(x.data(), n, n);
}

/// sqrt of the eigenvalues of P·Q, sorted non-increasing.
Vec hankel_oracle(const Mat& P, const Mat& Q) {
  Vec ev = Eigen::EigenSolver<Mat>(P * Q).eigenvalues().real().cwiseMax(0.0).cwiseSqrt();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
  return ev;
}

CMat tf(const Mat& A, const Mat& B, const Mat& C, double w) {
  const Index n = A.rows();
  return C.cast<cplx>() * (cplx(0, w) * CMat::Identity(n, n) - A.cast<cplx>()).lu().solve(B.cast<cplx>());
}

}  // namespace

TEST(BalancedTruncation, LinearFullOrderIsSimilarity) {
  std::mt19937_64 rng(120);
  const QBSystem sys = test::random_linear(10, 1, 1, rng);
  const BalancedTruncation bt = balanced_truncation(sys, 10);
  const Mat A = Mat(sys.A());
  for (int k = 0; k < 20; ++k) {
    const double w = std::pow(10.0, -2.0 + 4.0 * k / 19.0);
    const CMat g = tf(A, sys.B(), sys.C(), w), gr = tf(bt.red.A, bt.red.B, bt.red.C, w);
    EXPECT_LE((g - gr).norm(), 1e-9 * g.norm()) << "w=" << w;
  }
}

TEST(BalancedTruncation, LinearHankelValuesMatchOracle) {
  std::mt19937_64 rng(121);
  const QBSystem sys = test::random_linear(8, 2, 2, rng);
  const Mat A = Mat(sys.A());
  const Mat P = lyap_oracle(A, sys.B() * sys.B().transpose());
  const Mat Q = lyap_oracle(A.transpose(), sys.C().transpose() * sys.C());
  const BalancedTruncation bt = balanced_truncation(sys, 3);
  const Vec ref = hankel_oracle(P, Q);
  ASSERT_GE(bt.hsv.size(), 3);
  EXPECT_LE((bt.hsv.head(3) - ref.head(3)).norm(), 1e-9 * ref[0]);
}

TEST(BalancedTruncation, QuadraticBilinearValuesAndBalancing) {
  std::mt19937_64 rng(122);
  const QBSystem sys = random_qb(9, 1, 2, rng, 1.0, 0.7);
  const GramianBundle g = truncated_gramians(sys);
  const BalancedTruncation bt = balanced_truncation(sys, 4);
  const Vec ref = hankel_oracle(g.PT, g.QT);
  EXPECT_LE((bt.hsv.head(4) - ref.head(4)).norm(), 1e-9 * ref[0]);
  // Balanced coordinates: WᵀP_TW = VᵀQ_TV = diag(σ_1..σ_r).
  const Mat Sr = bt.hsv.head(4).asDiagonal();
  EXPECT_LE((bt.W.transpose() * g.PT * bt.W - Sr).norm(), 1e-9 * bt.hsv[0]);
  EXPECT_LE((bt.V.transpose() * g.QT * bt.V - Sr).norm(), 1e-9 * bt.hsv[0]);
}

TEST(BalancedTruncation, Biorthogonality) {
  std::mt19937_64 rng(123);
  const QBSystem sys = random_qb(12, 2, 1, rng);
  const BalancedTruncation bt = balanced_truncation(sys, 5);
  EXPECT_LE((bt.W.transpose() * bt.V - Mat::Identity(5, 5)).norm(), 1e-10);
}

TEST(BalancedTruncation, ValuesNonIncreasingAndSimilarityInvariant) {
  std::mt19937_64 rng(124);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 5 + 2 * trial;
    const QBSystem sys = random_qb(n, 1, 1, rng);
    const Mat T = randn(n, n, rng) + 3.0 * std::sqrt(static_cast<double>(n)) * Mat::Identity(n, n);
    const Mat Ti = T.inverse();
    const Mat H = sys.H().dense_mode(1);
    const QBSystem sim(SpMat((Ti * Mat(sys.A()) * T).sparseView(0.0)),
                       Hessian::from_matricized(Mat(Ti * H * kron_oracle(T, T))),
                       {SpMat((Ti * Mat(sys.N()[0]) * T).sparseView(0.0))}, Ti * sys.B(), sys.C() * T);
    const BalancedTruncation a = balanced_truncation(sys, 2), b = balanced_truncation(sim, 2);
    for (Index i = 0; i + 1 < a.hsv.size(); ++i) EXPECT_GE(a.hsv[i], a.hsv[i + 1]);
    const Index k = std::min(a.hsv.size(), b.hsv.size());
    for (Index i = 0; i < k; ++i)
      if (a.hsv[i] > 1e-6 * a.hsv[0]) EXPECT_NEAR(a.hsv[i], b.hsv[i], 1e-9 * a.hsv[0]) << "n=" << n << " i=" << i;
  }
}

TEST(BalancedTruncation, ZeroInputIsRankDeficient) {
  std::mt19937_64 rng(125);
  const QBSystem base = random_qb(6, 1, 1, rng);
  const QBSystem sys(base.A(), base.H(), base.N(), Mat::Zero(6, 1), base.C());
  try {
    balanced_truncation(sys, 2);
    FAIL() << "expected RankDeficient";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
}

TEST(BalancedTruncation, UnstableRejected) {
  Mat A(2, 2);
  A << 1, 0, 0, -1;
  const QBSystem sys(A.sparseView(), Hessian::zero(2), {}, Mat::Ones(2, 1), Mat::Ones(1, 2));
  try {
    balanced_truncation(sys, 1);
    FAIL() << "expected NotStable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotStable);
  }
}

TEST(BalancedTruncation, RescaledBasesProjectOriginalSystem) {
  std::mt19937_64 rng(126);
  const QBSystem sys = random_qb(10, 1, 1, rng, 1.0, 0.7);
  const double gamma = 0.1;
  const BalancedTruncation a = balanced_truncation(sys, 3, gamma);
  const BalancedTruncation b = balanced_truncation(rescale(sys, gamma), 3);
  EXPECT_LE((a.hsv - b.hsv).norm(), 1e-12 * b.hsv[0]);
  const ReducedModel ref = project(sys, b.V, b.W);
  EXPECT_LE((a.red.A - ref.A).norm(), 1e-12 * ref.A.norm());
  EXPECT_LE((a.red.H - ref.H).norm(), 1e-12 * ref.H.norm());
  EXPECT_LE((a.red.B - ref.B).norm(), 1e-12 * ref.B.norm());
  EXPECT_LE((a.red.C - ref.C).norm(), 1e-12 * ref.C.norm());
  try {
    balanced_truncation(sys, 3, 0.0);
    FAIL() << "expected NonPositiveGamma";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveGamma);
  }
}
