#include <gtest/gtest.h>

#include <qbmor/gramians_norms.hpp>

#include "support.hpp"

using namespace qbmor;
using qbmor::test::kron_oracle;
using qbmor::test::randn;
using qbmor::test::random_qb;

namespace {

QBSystem scalar_system(double a, double h, double nk, double b, double c) {
  Mat A(1, 1), H(1, 1), B(1, 1), C(1, 1);
  A << a;
  H << h;
  B << b;
  C << c;
  std::vector<SpMat> N;
  if (nk != 0.0) N.push_back(Mat(Mat::Constant(1, 1, nk)).sparseView());
  return QBSystem(A.sparseView(), Hessian::from_matricized(H), N, B, C);
}

/// Lyapunov solve through the n²×n² Kronecker system (independent of Bartels-Stewart).
Mat lyap_oracle(const Mat& A, const Mat& Q) {
  const Index n = A.rows();
  const Mat I = Mat::Identity(n, n);
  const Mat K = kron_oracle(I, A) + kron_oracle(A, I);
  const Vec x = K.partialPivLu().solve(-test::vec_oracle(Q));
  return Eigen::Map<const Mat>(x.data(), n, n);
}

double sym_min_eig(const Mat& X) { return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (X + X.transpose())).eigenvalues().minCoeff(); }

}  // namespace

// -------------------------------------------------------------- truncated Gramians

TEST(TruncatedGramians, LinearSystemDegenerates) {
  std::mt19937_64 rng(70);
  const QBSystem sys = test::random_linear(6, 2, 2, rng);
  const GramianBundle g = truncated_gramians(sys);
  EXPECT_LE((g.PT - g.Pl).norm(), 1e-14 * g.Pl.norm());
  EXPECT_LE((g.QT - g.Ql).norm(), 1e-14 * g.Ql.norm());
}

TEST(TruncatedGramians, ScalarExample) {
  const GramianBundle g = truncated_gramians(scalar_system(-1.0, 0.0, 0.5, 1.0, 1.0));
  EXPECT_NEAR(g.Pl(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(g.PT(0, 0), 0.5625, 1e-15);
}

TEST(TruncatedGramians, ResidualsAgainstDenseDefinitions) {
  std::mt19937_64 rng(71);
  const QBSystem sys = random_qb(8, 2, 2, rng, 1.0, 0.5);
  const GramianBundle g = truncated_gramians(sys);
  const Mat A = Mat(sys.A()), B = sys.B(), C = sys.C();
  const Mat H1 = sys.H().dense_mode(1), H2 = sys.H().dense_mode(2);
  Mat SP = H1 * kron_oracle(g.Pl, g.Pl) * H1.transpose() + B * B.transpose();
  Mat SQ = H2 * kron_oracle(g.Pl, g.Ql) * H2.transpose() + C.transpose() * C;
  for (const SpMat& Nk : sys.N()) {
    SP += Mat(Nk) * g.Pl * Mat(Nk).transpose();
    SQ += Mat(Nk).transpose() * g.Ql * Mat(Nk);
  }
  auto scale = [&](const Mat& X, const Mat& Q) { return A.norm() * X.norm() + Q.norm(); };
  EXPECT_LE((A * g.Pl + g.Pl * A.transpose() + B * B.transpose()).norm(), 1e-9 * scale(g.Pl, B * B.transpose()));
  EXPECT_LE((A.transpose() * g.Ql + g.Ql * A + C.transpose() * C).norm(), 1e-9 * scale(g.Ql, C.transpose() * C));
  EXPECT_LE((A * g.PT + g.PT * A.transpose() + SP).norm(), 1e-9 * scale(g.PT, SP));
  EXPECT_LE((A.transpose() * g.QT + g.QT * A + SQ).norm(), 1e-9 * scale(g.QT, SQ));
  EXPECT_LE(test::rel_diff(g.PT, lyap_oracle(A, SP)), 1e-10);
  EXPECT_LE(test::rel_diff(g.QT, lyap_oracle(A.transpose(), SQ)), 1e-10);
  for (const Mat* X : {&g.Pl, &g.Ql, &g.PT, &g.QT}) {
    EXPECT_EQ(*X, Mat(X->transpose()));
    EXPECT_GE(sym_min_eig(*X), -1e-10 * X->norm());
  }
  EXPECT_GE(sym_min_eig(g.PT - g.Pl), -1e-10 * g.PT.norm());
}

TEST(TruncatedGramians, RejectsUnstableAndMassMatrix) {
  EXPECT_THROW(truncated_gramians(scalar_system(0.5, 0.0, 0.0, 1.0, 1.0)), Error);
  const QBSystem base = scalar_system(-1.0, 0.0, 0.0, 1.0, 1.0);
  const QBSystem withE(base.A(), base.H(), base.N(), base.B(), base.C(), base.A());
  try {
    truncated_gramians(withE);
    FAIL() << "expected Unsupported";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Unsupported);
  }
}

// ------------------------------------------------------------- quadratic Gramians

TEST(QuadraticGramians, LinearConvergesImmediately) {
  std::mt19937_64 rng(72);
  const QBSystem sys = test::random_linear(5, 1, 1, rng);
  const QuadraticGramians q = quadratic_gramians(sys);
  const GramianBundle g = truncated_gramians(sys);
  EXPECT_LE(q.iterations_P, 1);
  EXPECT_LE(test::rel_diff(q.P, g.Pl), 1e-13);
  EXPECT_LE(test::rel_diff(q.Q, g.Ql), 1e-13);
}

TEST(QuadraticGramians, ScalarFixedPoint) {
  const QuadraticGramians q = quadratic_gramians(scalar_system(-1.0, 0.1, 0.0, 1.0, 1.0));
  const double expected = (2.0 - std::sqrt(4.0 - 0.04)) / 0.02;
  EXPECT_NEAR(expected, 0.50125628, 1e-8);
  EXPECT_NEAR(q.P(0, 0), expected, 1e-12);
}

TEST(QuadraticGramians, DivergentIterationReported) {
  // −2P + h²P² + 1 = 0 has no real root for h² > 1: the Picard iteration diverges.
  try {
    quadratic_gramians(scalar_system(-1.0, 2.0, 0.0, 1.0, 1.0), 1e-10, 50);
    FAIL() << "expected NoConvergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoConvergence);
  }
}

TEST(QuadraticGramians, FixedPointEquationsHold) {
  std::mt19937_64 rng(73);
  const QBSystem sys = random_qb(5, 1, 1, rng, 0.3, 0.3);
  const QuadraticGramians q = quadratic_gramians(sys);
  const Mat A = Mat(sys.A()), H1 = sys.H().dense_mode(1), H2 = sys.H().dense_mode(2), N = Mat(sys.N()[0]);
  const Mat SP = H1 * kron_oracle(q.P, q.P) * H1.transpose() + N * q.P * N.transpose() + sys.B() * sys.B().transpose();
  const Mat SQ = H2 * kron_oracle(q.P, q.Q) * H2.transpose() + N.transpose() * q.Q * N + sys.C().transpose() * sys.C();
  EXPECT_LE((A * q.P + q.P * A.transpose() + SP).norm(), 1e-8 * SP.norm());
  EXPECT_LE((A.transpose() * q.Q + q.Q * A + SQ).norm(), 1e-8 * SQ.norm());
}

// ------------------------------------------------------------------------- norms

TEST(TruncatedH2Norm, ZeroInputMatrix) {
  std::mt19937_64 rng(74);
  const QBSystem base = random_qb(4, 1, 1, rng);
  const QBSystem sys(base.A(), base.H(), base.N(), Mat::Zero(4, 1), base.C());
  EXPECT_EQ(truncated_h2_norm(sys).value, 0.0);
}

TEST(TruncatedH2Norm, LinearEqualsLinearH2) {
  std::mt19937_64 rng(75);
  const QBSystem sys = test::random_linear(6, 2, 1, rng);
  const Mat Pl = lyap_oracle(Mat(sys.A()), sys.B() * sys.B().transpose());
  const double h2 = std::sqrt((sys.C() * Pl * sys.C().transpose()).trace());
  EXPECT_NEAR(truncated_h2_norm(sys).value, h2, 1e-12 * h2);
}

TEST(TruncatedH2Norm, DualTraceAgreementOnFiftySystems) {
  std::mt19937_64 rng(76);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + trial % 19;
    const Index m = 1 + trial % 3, p = 1 + trial % 2;
    const QBSystem sys = random_qb(n, m, p, rng, 1.0, 0.7);
    const NormReport r = truncated_h2_norm(sys);
    ASSERT_LE(r.rel_gap, 1e-7) << "trial " << trial;
    ASSERT_NEAR(r.value * r.value, truncated_h2_norm_squared(sys), 1e-12 * r.value * r.value);
  }
}

TEST(TruncatedH2Norm, MatchesKernelQuadrature) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 1 + trial % 4;
    const QBSystem sys = random_qb(n, 1 + trial % 2, 1, rng, 1.0, 0.7, 0.5);
    const double oracle = test::KernelQuadrature(sys).value();
    const double value = truncated_h2_norm_squared(sys);
    EXPECT_LE(std::abs(value - oracle), 1e-6 * oracle) << "trial " << trial << " n=" << n;
  }
}

TEST(H2Norm, LinearAndScalar) {
  std::mt19937_64 rng(78);
  const QBSystem lin = test::random_linear(5, 1, 2, rng);
  EXPECT_NEAR(h2_norm(lin).value, truncated_h2_norm(lin).value, 1e-12 * h2_norm(lin).value);
  const NormReport s = h2_norm(scalar_system(-1.0, 0.1, 0.0, 1.0, 1.0));
  EXPECT_NEAR(s.value, 0.70799, 5e-6);
  EXPECT_NEAR(s.value, std::sqrt((2.0 - std::sqrt(3.96)) / 0.02), 1e-12);
}

TEST(H2Norm, DualTraceAgreement) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 10; ++trial) {
    const QBSystem sys = random_qb(5, 1 + trial % 2, 1, rng, 0.4, 0.4);
    const NormReport r = h2_norm(sys);
    EXPECT_LE(r.rel_gap, 1e-6) << "trial " << trial;
    EXPECT_GE(r.value, truncated_h2_norm(sys).value * (1 - 1e-12));
  }
}

// ------------------------------------------------------------------ error system

TEST(TruncatedH2Error, ExactCopyHasZeroError) {
  std::mt19937_64 rng(80);
  const QBSystem sys = random_qb(5, 2, 1, rng);
  const Mat I = Mat::Identity(5, 5);
  const ReducedModel red = project(sys, I, I);
  // The squared error cancels to rounding level; its square root is only
  // O(sqrt(eps)) relative, so the check is made on the squared form.
  const double e2 = truncated_h2_norm_squared(error_system(sys, red));
  EXPECT_LE(std::abs(e2), 1e-13 * truncated_h2_norm_squared(sys));
  EXPECT_LE(truncated_h2_error(sys, red).value, 1e-6 * truncated_h2_norm(sys).value);
}

TEST(TruncatedH2Error, LinearMatchesAugmentedGramian) {
  std::mt19937_64 rng(81);
  const QBSystem sys = test::random_linear(6, 1, 1, rng);
  // Galerkin projection onto an orthonormal basis keeps Â Hurwitz because the
  // symmetric part of A is negative definite.
  const Mat V = Eigen::HouseholderQR<Mat>(randn(6, 2, rng)).householderQ() * Mat::Identity(6, 2);
  const ReducedModel red = project(sys, V, V);
  const Index n = 6, r = 2;
  Mat Ae = Mat::Zero(n + r, n + r), Be(n + r, 1), Ce(1, n + r);
  Ae.topLeftCorner(n, n) = Mat(sys.A());
  Ae.bottomRightCorner(r, r) = red.A;
  Be << sys.B(), red.B;
  Ce << sys.C(), -red.C;
  const Mat Pe = lyap_oracle(Ae, Be * Be.transpose());
  const double ref = std::sqrt((Ce * Pe * Ce.transpose()).trace());
  EXPECT_NEAR(truncated_h2_error(sys, red).value, ref, 1e-9 * ref);
}

TEST(TruncatedH2Error, ErrorSystemStructure) {
  std::mt19937_64 rng(82);
  const QBSystem sys = random_qb(4, 1, 1, rng);
  const ReducedModel red = project(sys, randn(4, 2, rng), randn(4, 2, rng));
  const QBSystem es = error_system(sys, red);
  ASSERT_EQ(es.n(), 6);
  const Vec x = randn(4, rng), xh = randn(2, rng);
  Vec z(6);
  z << x, xh;
  const Vec hz = es.H().apply<double>(z, z);
  EXPECT_LE((hz.head(4) - sys.H().apply<double>(x, x)).norm(), 1e-12 * (1 + hz.norm()));
  EXPECT_LE((hz.tail(2) - red.H * kron_oracle(Mat(xh), Mat(xh)).col(0)).norm(), 1e-12 * (1 + hz.norm()));
  EXPECT_LE((es.C() - (Mat(1, 6) << sys.C(), -red.C).finished()).norm(), 0.0);
}

TEST(TruncatedH2Error, SymmetricInOperandsWhenOrdersMatch) {
  std::mt19937_64 rng(83);
  const QBSystem a = random_qb(3, 1, 1, rng);
  const QBSystem b = random_qb(3, 1, 1, rng);
  const Mat I = Mat::Identity(3, 3);
  const ReducedModel ra = project(a, I, I), rb = project(b, I, I);
  const double ab = truncated_h2_error(a, rb).value, ba = truncated_h2_error(b, ra).value;
  EXPECT_NEAR(ab, ba, 1e-10 * ab);
}

TEST(TruncatedH2Error, UnstableReducedModelRejected) {
  std::mt19937_64 rng(84);
  const QBSystem sys = random_qb(3, 1, 1, rng);
  const Mat I = Mat::Identity(3, 3);
  ReducedModel red = project(sys, I, I);
  red.A = -red.A;
  try {
    truncated_h2_error(sys, red);
    FAIL() << "expected NotStable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotStable);
  }
}
