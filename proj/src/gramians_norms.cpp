#include <qbmor/gramians_norms.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace qbmor {

namespace {

void require_plain(const QBSystem& sys) {
  require(!sys.has_E(), ErrorCode::Unsupported, "Gramians are implemented for E = I only");
}

Mat control_source(const QBSystem& sys, const Mat& P, const Mat& Pquad) {
  Mat S = sys.B() * sys.B().transpose();
  for (const auto& Nk : sys.N()) S.noalias() += Nk * (Nk * P).transpose();
  if (!sys.H().is_zero()) S += sys.H().gram(Pquad, Pquad);
  return S;
}

Mat observe_source(const QBSystem& sys, const Mat& Q, const Mat& Pquad, const Mat& Qquad) {
  Mat S = sys.C().transpose() * sys.C();
  for (const auto& Nk : sys.N()) {
    const SpMat Nt = Nk.transpose();
    S.noalias() += Nt * (Nt * Q).transpose();
  }
  if (!sys.H().is_zero()) S += sys.H().gram_mode2(Pquad, Qquad);
  return S;
}

Mat sym(const Mat& X) { return 0.5 * (X + X.transpose()); }

NormReport make_report(double cp, double bq) {
  NormReport r;
  r.value = std::sqrt(std::max(cp, 0.0));
  r.dual = std::sqrt(std::max(bq, 0.0));
  const double denom = std::max({std::abs(cp), std::abs(bq), std::numeric_limits<double>::min()});
  r.rel_gap = std::abs(cp - bq) / denom;
  return r;
}

}  // namespace

GramianBundle truncated_gramians(const QBSystem& sys) {
  require_plain(sys);
  const Mat A = Mat(sys.A());
  const Mat At = A.transpose();
  GramianBundle g;
  g.Pl = solve_lyapunov(A, sym(sys.B() * sys.B().transpose()));
  g.Ql = solve_lyapunov(At, sym(sys.C().transpose() * sys.C()));
  g.PT = solve_lyapunov(A, sym(control_source(sys, g.Pl, g.Pl)));
  g.QT = solve_lyapunov(At, sym(observe_source(sys, g.Ql, g.Pl, g.Ql)));
  return g;
}

QuadraticGramians quadratic_gramians(const QBSystem& sys, double tol, int maxit) {
  require_plain(sys);
  require(tol > 0.0 && maxit >= 1, ErrorCode::InvalidArgument, "quadratic_gramians: tol > 0 and maxit >= 1 required");
  const Mat A = Mat(sys.A());
  const Mat At = A.transpose();
  QuadraticGramians out;

  Mat P = solve_lyapunov(A, sym(sys.B() * sys.B().transpose()));
  bool done = false;
  for (int it = 1; it <= maxit; ++it) {
    Mat Pn = solve_lyapunov(A, sym(control_source(sys, P, P)));
    if (!Pn.allFinite()) break;
    // stableNorm: a plain Frobenius norm overflows to inf on a diverging
    // iterate, and inf <= tol * inf would report convergence.
    const double change = (Pn - P).stableNorm();
    const double scale = Pn.stableNorm();
    if (!std::isfinite(change) || !std::isfinite(scale)) break;
    P = std::move(Pn);
    out.iterations_P = it;
    if (change <= tol * scale) {
      done = true;
      break;
    }
  }
  if (!done)
    throw Error(ErrorCode::NoConvergence,
                "controllability fixed-point iteration did not converge; consider rescaling H and N");

  Mat Q = solve_lyapunov(At, sym(sys.C().transpose() * sys.C()));
  done = false;
  for (int it = 1; it <= maxit; ++it) {
    Mat Qn = solve_lyapunov(At, sym(observe_source(sys, Q, P, Q)));
    if (!Qn.allFinite()) break;
    // stableNorm: a plain Frobenius norm overflows to inf on a diverging
    // iterate, and inf <= tol * inf would report convergence.
    const double change = (Qn - Q).stableNorm();
    const double scale = Qn.stableNorm();
    if (!std::isfinite(change) || !std::isfinite(scale)) break;
    Q = std::move(Qn);
    out.iterations_Q = it;
    if (change <= tol * scale) {
      done = true;
      break;
    }
  }
  if (!done)
    throw Error(ErrorCode::NoConvergence,
                "observability fixed-point iteration did not converge; consider rescaling H and N");
  out.P = std::move(P);
  out.Q = std::move(Q);
  return out;
}

NormReport truncated_h2_norm(const QBSystem& sys) {
  const GramianBundle g = truncated_gramians(sys);
  return make_report((sys.C() * g.PT * sys.C().transpose()).trace(),
                     (sys.B().transpose() * g.QT * sys.B()).trace());
}

double truncated_h2_norm_squared(const QBSystem& sys) {
  const GramianBundle g = truncated_gramians(sys);
  return (sys.C() * g.PT * sys.C().transpose()).trace();
}

NormReport h2_norm(const QBSystem& sys, double tol, int maxit) {
  const QuadraticGramians g = quadratic_gramians(sys, tol, maxit);
  return make_report((sys.C() * g.P * sys.C().transpose()).trace(), (sys.B().transpose() * g.Q * sys.B()).trace());
}

QBSystem error_system(const QBSystem& sys, const ReducedModel& red) {
  require_plain(sys);
  const Index n = sys.n();
  const Index r = red.r();
  require(red.B.cols() == sys.m() && red.C.rows() == sys.p() && static_cast<Index>(red.N.size()) == sys.m(),
          ErrorCode::DimensionMismatch, "error_system: input/output dimensions differ");
  auto blk = [n, r](const SpMat& X, const Mat& Xh) {
    std::vector<Eigen::Triplet<double>> t;
    for (Index c = 0; c < X.outerSize(); ++c)
      for (SpMat::InnerIterator it(X, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (Index j = 0; j < r; ++j)
      for (Index i = 0; i < r; ++i)
        if (Xh(i, j) != 0.0) t.emplace_back(n + i, n + j, Xh(i, j));
    SpMat M(n + r, n + r);
    M.setFromTriplets(t.begin(), t.end());
    return M;
  };
  std::vector<SpMat> N;
  for (Index k = 0; k < sys.m(); ++k)
    N.push_back(blk(sys.N()[static_cast<std::size_t>(k)], red.N[static_cast<std::size_t>(k)]));
  Mat B(n + r, sys.m());
  B << sys.B(), red.B;
  Mat C(sys.p(), n + r);
  C << sys.C(), -red.C;
  Hessian He = block_diag(sys.H(), Hessian::from_matricized(red.H));
  return QBSystem(blk(sys.A(), red.A), std::move(He), std::move(N), std::move(B), std::move(C));
}

NormReport truncated_h2_error(const QBSystem& sys, const ReducedModel& red) {
  return truncated_h2_norm(error_system(sys, red));
}

}  // namespace qbmor
