#include <gtest/gtest.h>

#include <array>
#include <limits>

#include <qbmor/diagnostics.hpp>
#include <qbmor/tqb_irka.hpp>

#include "support.hpp"

using namespace qbmor;
using qbmor::test::randn;
using qbmor::test::random_qb;

namespace {

/// Converged TQB-IRKA model for a random weakly nonlinear system.
struct Converged {
  QBSystem sys;
  ReducedModel red;
};

Converged converged_run(Index n, Index r, std::uint64_t sys_seed, std::uint64_t irka_seed, double hscale = 0.3) {
  std::mt19937_64 rng(sys_seed);
  Converged c{random_qb(n, 1, 1, rng, hscale, hscale), {}};
  IrkaConfig cfg;
  cfg.r = r;
  cfg.tol = 1e-12;
  cfg.maxit = 500;
  cfg.seed = irka_seed;
  const IrkaResult res = tqb_irka(c.sys, cfg);
  EXPECT_TRUE(res.report.converged) << "n=" << n << " r=" << r << " seed " << sys_seed;
  c.red = res.red;
  return c;
}

double spectral_norm(const CMat& X) { return X.size() == 0 ? 0.0 : Eigen::JacobiSVD<CMat>(X).singularValues()(0); }

}  // namespace

// ------------------------------------------------------------ relative_measure

TEST(RelativeMeasure, GuardRules) {
  const CMat num = CMat::Constant(1, 1, 2.0), den = CMat::Constant(1, 1, 4.0), zero = CMat::Zero(1, 1);
  EXPECT_DOUBLE_EQ(relative_measure(num, den, 1e-14), 0.5);
  EXPECT_EQ(relative_measure(zero, zero, 1e-14), 0.0);
  EXPECT_EQ(relative_measure(num, zero, 1e-14), std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(relative_measure(num, zero, 1e-14, 1e3), 2e-3);
  // A denominator at rounding level of the factor scale counts as vanishing.
  EXPECT_DOUBLE_EQ(relative_measure(num, CMat::Constant(1, 1, 1e-12), 1e-14, 1e3), 2e-3);
  EXPECT_DOUBLE_EQ(relative_measure(num, den, 1e-14, 1e3), 0.5);
}

TEST(RelativeMeasure, SpectralNorm) {
  CMat num(2, 2), den(2, 2);
  num << 3, 0, 0, 4;
  den << 1, 1, 1, 1;  // ‖den‖₂ = 2
  EXPECT_DOUBLE_EQ(relative_measure(num, den, 1e-14), 2.0);
}

// --------------------------------------------------------------- residuals

TEST(OptimalityResiduals, FullOrderReductionIsExact) {
  std::mt19937_64 rng(110);
  const QBSystem sys = random_qb(4, 1, 1, rng);
  IrkaConfig cfg;
  cfg.r = 4;
  cfg.seed = 3;
  const IrkaResult res = tqb_irka(sys, cfg);
  const ResidualReport rep = optimality_residuals(sys, res.red);
  ASSERT_FALSE(rep.degraded);
  EXPECT_LE(rep.E_C, 1e-8);
  EXPECT_LE(rep.E_B, 1e-8);
  EXPECT_LE(rep.E_N, 1e-8);
  EXPECT_LE(rep.E_H, 1e-8);
  EXPECT_LE(rep.E_lambda, 1e-8);
}

TEST(OptimalityResiduals, LinearFixedPointIsExactlyOptimal) {
  std::mt19937_64 rng(96);  // a system on which linear IRKA converges
  const QBSystem sys = test::random_linear(10, 1, 1, rng);
  IrkaConfig cfg;
  cfg.r = 2;
  cfg.tol = 1e-12;
  cfg.maxit = 300;
  cfg.seed = 1;
  const IrkaResult res = tqb_irka(sys, cfg);
  ASSERT_TRUE(res.report.converged);
  const ResidualReport rep = optimality_residuals(sys, res.red);
  EXPECT_LE(rep.E_C, 1e-8);
  EXPECT_LE(rep.E_B, 1e-8);
  EXPECT_LE(rep.E_lambda, 1e-8);
  EXPECT_EQ(rep.E_N, 0.0);
  EXPECT_EQ(rep.E_H, 0.0);
}

TEST(OptimalityResiduals, PhiLayoutsMatchDefinitions) {
  const Converged c = converged_run(12, 3, 103, 2);
  const DiagnosticData d = diagnostic_data(c.sys, c.red);
  const ResidualReport rep = optimality_residuals(d);
  const CMat V = d.full.V1 + d.full.V2, W = d.full.W1 + d.full.W2;
  const Index r = 3;
  EXPECT_LE((rep.Phi_C - (c.sys.C().cast<cplx>() * V).transpose()).norm(), 1e-12 * rep.Phi_C.norm());
  EXPECT_LE((rep.Phi_B - (c.sys.B().transpose().cast<cplx>() * W).transpose()).norm(), 1e-12 * rep.Phi_B.norm());
  const CMat N0 = Mat(d.sys_scaled.N()[0]).cast<cplx>();
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j) {
      EXPECT_LE(std::abs(rep.Phi_N(i, j) - (d.full.W1.col(i).transpose() * N0 * d.full.V1.col(j))(0, 0)),
                1e-12 * rep.Phi_N.norm());
      for (Index l = 0; l < r; ++l) {
        const CVec h = d.sys_scaled.H().apply<cplx>(CVec(d.full.V1.col(j)), CVec(d.full.V1.col(l)));
        EXPECT_LE(std::abs(rep.Phi_H(i, j * r + l) - CVec(d.full.W1.col(i).conjugate()).dot(h)), 1e-12 * rep.Phi_H.norm());
      }
      const cplx lam = (d.full.W1.col(i).transpose() * V.col(i))(0, 0) + (d.full.W2.col(i).transpose() * d.full.V1.col(i))(0, 0);
      EXPECT_LE(std::abs(rep.Phi_lambda[i] - lam), 1e-12 * rep.Phi_lambda.norm());
    }
  EXPECT_DOUBLE_EQ(rep.E_C, spectral_norm(rep.Eps_C) / spectral_norm(rep.Phi_C));
}

TEST(OptimalityResiduals, VanishInTheWeaklyNonlinearLimit) {
  // Shrinking H and N by s shrinks every perturbation measure: E_C, E_B, E_Λ
  // like s⁴ and E_N, E_H like s² on this system.
  std::array<double, 5> prev{};
  prev.fill(std::numeric_limits<double>::infinity());
  for (double s : {0.3, 0.1, 0.03, 0.01}) {
    const Converged c = converged_run(12, 3, 103, 2, s);
    const ResidualReport rep = optimality_residuals(c.sys, c.red);
    const std::array<double, 5> e{rep.E_C, rep.E_B, rep.E_N, rep.E_H, rep.E_lambda};
    for (std::size_t i = 0; i < e.size(); ++i) EXPECT_LT(e[i], 0.5 * prev[i]) << "s=" << s << " family " << i;
    prev = e;
  }
  for (double e : prev) EXPECT_LE(e, 1e-5);
}

TEST(OptimalityResiduals, InvariantUnderStateScaling) {
  // x = a·z maps (A, H, N, B, C) to (A, aH, N, B/a, aC) without changing the
  // input-output map; the measures must not change.
  const Converged c = converged_run(12, 3, 103, 2);
  const double a = 2.5;
  const QBSystem scaled(c.sys.A(), c.sys.H().scaled(a), c.sys.N(), c.sys.B() / a, a * c.sys.C());
  ReducedModel red = c.red;
  red.H *= a;
  red.B /= a;
  red.C *= a;
  const ResidualReport x = optimality_residuals(c.sys, c.red), y = optimality_residuals(scaled, red);
  for (auto [u, v] : {std::pair{x.E_C, y.E_C}, {x.E_B, y.E_B}, {x.E_N, y.E_N}, {x.E_H, y.E_H}, {x.E_lambda, y.E_lambda}})
    EXPECT_NEAR(u, v, 1e-5 * u);
}

TEST(OptimalityResiduals, LinearInvariantUnderJointScalingOfBAndC) {
  // For H = 0, N = 0 every Φ_X and ε_X is homogeneous in (B, C, B̂, Ĉ); the
  // raw projection interpolates exactly, so the measures sit at rounding level.
  std::mt19937_64 rng(113);
  const QBSystem sys = test::random_linear(8, 1, 1, rng);
  const ReducedModel red = initial_guess(3, 1, 1, InitKind::Random, 6);
  const QBSystem scaled(sys.A(), sys.H(), sys.N(), 3.0 * sys.B(), 3.0 * sys.C());
  ReducedModel red3 = red;
  red3.B *= 3.0;
  red3.C *= 3.0;
  const ResidualReport x = optimality_residuals(sys, red), y = optimality_residuals(scaled, red3);
  for (auto [u, v] : {std::pair{x.E_C, y.E_C}, {x.E_B, y.E_B}, {x.E_lambda, y.E_lambda}}) {
    EXPECT_LE(u, 1e-12);
    EXPECT_LE(v, 1e-12);
  }
  EXPECT_EQ(x.E_N, y.E_N);
  EXPECT_EQ(x.E_H, y.E_H);
}

TEST(OptimalityResiduals, Deterministic) {
  const Converged c = converged_run(10, 2, 105, 1);
  const ResidualReport a = optimality_residuals(c.sys, c.red), b = optimality_residuals(c.sys, c.red);
  EXPECT_EQ(a.E_C, b.E_C);
  EXPECT_EQ(a.E_H, b.E_H);
  EXPECT_EQ(a.Eps_lambda, b.Eps_lambda);
}

// ---------------------------------------------------------- perturbations

TEST(PerturbationSolves, IdentityForEpsV) {
  for (auto [n, seed] : {std::pair<Index, std::uint64_t>{12, 103}, {20, 105}, {30, 104}}) {
    const Converged c = converged_run(n, 3, seed, 2);
    const DiagnosticData d = diagnostic_data(c.sys, c.red);
    const PerturbationSolution s = perturbation_solves(d);
    const CMat V = d.full.V1 + d.full.V2, W = d.full.W1 + d.full.W2;
    const CMat lhs = d.full.V1, rhs = V * d.hat.V1 + s.eps_v;
    EXPECT_LE((lhs - rhs).norm(), 1e-8 * lhs.norm()) << "n=" << n;
    const CMat G = W.transpose() * V;
    const CMat wref = d.full.W1 - W * G.transpose().lu().solve(d.hat.W1);
    EXPECT_LE((s.eps_w - wref).norm(), 1e-8 * d.full.W1.norm()) << "n=" << n;
    EXPECT_LE((s.Gamma_v - (d.hat.V() - CMat::Identity(3, 3))).norm(), 1e-8 * d.hat.V().norm());
    EXPECT_LE((s.Gamma_w - (d.hat.W() - V.transpose() * W)).norm(), 1e-8 * d.hat.W().norm());
  }
}

TEST(PerturbationSolves, LinearFixedPointHasNoEpsV) {
  std::mt19937_64 rng(96);
  const QBSystem sys = test::random_linear(10, 1, 1, rng);
  IrkaConfig cfg;
  cfg.r = 2;
  cfg.tol = 1e-12;
  cfg.maxit = 300;
  cfg.seed = 1;
  const IrkaResult res = tqb_irka(sys, cfg);
  ASSERT_TRUE(res.report.converged);
  const DiagnosticData d = diagnostic_data(sys, res.red);
  const PerturbationSolution s = perturbation_solves(d);
  EXPECT_LE(s.eps_v.norm(), 1e-12 * d.full.V1.norm());
}

TEST(PerturbationSolves, ScalarChain) {
  // n = r = 1: Π = Π_v = 1, so the right-hand side and ε_v vanish, and
  // V̂1 = V1/V exactly.
  Mat A(1, 1), H(1, 1), B(1, 1), C(1, 1);
  A << -2.0;
  H << 0.3;
  B << 1.0;
  C << 1.0;
  const QBSystem sys(A.sparseView(), Hessian::from_matricized(H), {SpMat(Mat::Constant(1, 1, 0.2).sparseView())}, B, C);
  IrkaConfig cfg;
  cfg.r = 1;
  cfg.seed = 4;
  const IrkaResult res = tqb_irka(sys, cfg);
  const DiagnosticData d = diagnostic_data(sys, res.red);
  const PerturbationSolution s = perturbation_solves(d);
  EXPECT_LE(std::abs(s.eps_v(0, 0)), 1e-14 * std::abs(d.full.V1(0, 0)));
  const cplx v = d.full.V1(0, 0) + d.full.V2(0, 0);
  EXPECT_LE(std::abs(d.hat.V1(0, 0) - d.full.V1(0, 0) / v), 1e-12 * std::abs(d.hat.V1(0, 0)));
}

TEST(PerturbationFormulas, MatchDirectDifferences) {
  for (auto [n, seed] : {std::pair<Index, std::uint64_t>{12, 103}, {20, 105}}) {
    const Converged c = converged_run(n, 3, seed, 2, 0.6);
    const DiagnosticData d = diagnostic_data(c.sys, c.red);
    const ResidualReport direct = optimality_residuals(d);
    const ResidualReport formula = perturbation_formulas(d, perturbation_solves(d));
    auto close = [&](const CMat& a, const CMat& b, const CMat& phi, const char* what) {
      EXPECT_LE((a - b).norm(), 1e-8 * phi.norm() + 1e-12 * b.norm()) << what << " n=" << n;
    };
    close(formula.Eps_C, direct.Eps_C, direct.Phi_C, "C");
    close(formula.Eps_B, direct.Eps_B, direct.Phi_B, "B");
    close(formula.Eps_N, direct.Eps_N, direct.Phi_N, "N");
    close(formula.Eps_H, direct.Eps_H, direct.Phi_H, "H");
    close(CMat(formula.Eps_lambda), CMat(direct.Eps_lambda), CMat(direct.Phi_lambda), "lambda");
  }
}

// ------------------------------------------------------------- brute force

TEST(Bruteforce, AgreesOnConvergedSmallRun) {
  const Converged c = converged_run(6, 2, 108, 3, 0.5);
  EXPECT_LE(verify_against_bruteforce(c.sys, c.red).max(), 1e-9);
  EXPECT_LE(verify_against_bruteforce(c.sys, c.red, 0.5).max(), 1e-9);
}

TEST(Bruteforce, AgreesAwayFromFixedPointAndOnLinearSystems) {
  std::mt19937_64 rng(111);
  const QBSystem sys = random_qb(7, 2, 2, rng, 0.8, 0.8);
  EXPECT_LE(verify_against_bruteforce(sys, initial_guess(3, 2, 2, InitKind::Random, 8)).max(), 1e-9);
  const QBSystem lin = test::random_linear(6, 1, 1, rng);
  EXPECT_LE(verify_against_bruteforce(lin, initial_guess(2, 1, 1, InitKind::Random, 9)).max(), 1e-9);
}

TEST(Bruteforce, SizeGuard) {
  std::mt19937_64 rng(112);
  const QBSystem sys = random_qb(31, 1, 1, rng);
  try {
    verify_against_bruteforce(sys, initial_guess(2, 1, 1, InitKind::Random, 1));
    FAIL() << "expected TooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}
