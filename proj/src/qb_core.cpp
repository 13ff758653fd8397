#include <qbmor/qb_core.hpp>

#include <type_traits>

#include <Eigen/SparseLU>

namespace qbmor {

namespace {

template <class S>
MatT<S> spmul(const SpMat& A, const MatT<S>& X) {
  if constexpr (std::is_same_v<S, double>) {
    return A * X;
  } else {
    return A.cast<S>() * X;
  }
}

template <class S>
struct Projected {
  MatT<S> A, H, B, C;
  std::vector<MatT<S>> N;
};

template <class S>
Projected<S> project_impl(const QBSystem& sys, const MatT<S>& V, const MatT<S>& W) {
  const Index n = sys.n();
  require(V.rows() == n && W.rows() == n && V.cols() == W.cols(), ErrorCode::DimensionMismatch,
          "project: V and W must be n x r with equal column counts");
  const MatT<S> EV = sys.has_E() ? spmul<S>(*sys.E(), V) : V;
  const MatT<S> G = W.transpose() * EV;
  const double c = cond2(G);
  if (!(c <= 1e13)) throw Error(ErrorCode::SingularGram, "cond(W^T V) = " + std::to_string(c));
  const Eigen::FullPivLU<MatT<S>> lu(G);
  Projected<S> out;
  const MatT<S> Wt = W.transpose();
  out.A = lu.solve(MatT<S>(Wt * spmul<S>(sys.A(), V)));
  for (const auto& Nk : sys.N()) out.N.push_back(lu.solve(MatT<S>(Wt * spmul<S>(Nk, V))));
  out.B = lu.solve(MatT<S>(Wt * sys.B().cast<S>()));
  out.C = sys.C().cast<S>() * V;
  out.H = symmetrize_dense<S>(lu.solve(sys.H().congruence<S>(V, W)));
  return out;
}

}  // namespace

QBSystem::QBSystem(SpMat A, Hessian H, std::vector<SpMat> N, Mat B, Mat C, std::optional<SpMat> E)
    : A_(std::move(A)), N_(std::move(N)), B_(std::move(B)), C_(std::move(C)), E_(std::move(E)) {
  const Index n = A_.rows();
  require(A_.cols() == n, ErrorCode::DimensionMismatch, "QBSystem: A must be square");
  require(H.n() == n, ErrorCode::DimensionMismatch, "QBSystem: Hessian dimension differs from A");
  require(B_.rows() == n, ErrorCode::DimensionMismatch, "QBSystem: B must have n rows");
  require(C_.cols() == n, ErrorCode::DimensionMismatch, "QBSystem: C must have n columns");
  if (N_.empty()) N_.assign(static_cast<std::size_t>(B_.cols()), SpMat(n, n));
  require(static_cast<Index>(N_.size()) == B_.cols(), ErrorCode::DimensionMismatch,
          "QBSystem: one N_k per input required");
  for (const auto& Nk : N_)
    require(Nk.rows() == n && Nk.cols() == n, ErrorCode::DimensionMismatch, "QBSystem: N_k must be n x n");
  if (E_) {
    require(E_->rows() == n && E_->cols() == n, ErrorCode::DimensionMismatch, "QBSystem: E must be n x n");
    Eigen::SparseLU<SpMat> lu;
    SpMat Ec = *E_;
    Ec.makeCompressed();
    lu.compute(Ec);
    require(lu.info() == Eigen::Success, ErrorCode::Unsupported, "QBSystem: E must be invertible");
  }
  A_.makeCompressed();
  for (auto& Nk : N_) Nk.makeCompressed();
  H_ = H.symmetrized();
}

bool QBSystem::is_linear() const {
  if (!H_.is_zero()) return false;
  for (const auto& Nk : N_)
    for (Index c = 0; c < Nk.outerSize(); ++c)
      for (SpMat::InnerIterator it(Nk, c); it; ++it)
        if (it.value() != 0.0) return false;
  return true;
}

QBSystem ReducedModel::as_system() const {
  std::vector<SpMat> Ns;
  for (const auto& Nk : N) Ns.push_back(Nk.sparseView(1.0, 0.0));
  QBSystem sys(SpMat(A.sparseView(1.0, 0.0)), Hessian::from_matricized(H), std::move(Ns), B, C);
  sys.meta = meta;
  return sys;
}

ComplexReduced ComplexReduced::from(const ReducedModel& red) {
  ComplexReduced c;
  c.A = red.A.cast<cplx>();
  c.H = red.H.cast<cplx>();
  c.B = red.B.cast<cplx>();
  c.C = red.C.cast<cplx>();
  for (const auto& Nk : red.N) c.N.push_back(Nk.cast<cplx>());
  return c;
}

SpectralData spectral_transform(const ReducedModel& red, bool reflect, double imag_shift, double cond_limit) {
  SpectralData d;
  d.factors = spectral_decompose(red.A, cond_limit);
  d.lambda = reflect ? reflect_unstable(d.factors.lambda, imag_shift) : d.factors.lambda;
  const CMat& R = d.factors.R;
  const CMat& Ri = d.factors.Rinv;
  d.Bt = Ri * red.B.cast<cplx>();
  d.Ct = red.C.cast<cplx>() * R;
  for (const auto& Nk : red.N) d.Nt.push_back(Ri * Nk.cast<cplx>() * R);
  d.Ht = dense_congruence<cplx>(red.H.cast<cplx>(), Ri, R);
  d.Ht2 = mode_matricize<cplx>(d.Ht, 2);
  return d;
}

ReducedModel project(const QBSystem& sys, const Mat& V, const Mat& W) {
  Projected<double> p = project_impl<double>(sys, V, W);
  ReducedModel red;
  red.A = std::move(p.A);
  red.H = std::move(p.H);
  red.N = std::move(p.N);
  red.B = std::move(p.B);
  red.C = std::move(p.C);
  return red;
}

ComplexReduced project(const QBSystem& sys, const CMat& V, const CMat& W) {
  Projected<cplx> p = project_impl<cplx>(sys, V, W);
  ComplexReduced red;
  red.A = std::move(p.A);
  red.H = std::move(p.H);
  red.N = std::move(p.N);
  red.B = std::move(p.B);
  red.C = std::move(p.C);
  return red;
}

QBSystem rescale(const QBSystem& sys, double gamma) {
  require(gamma > 0.0, ErrorCode::NonPositiveGamma, "rescale: gamma must be positive");
  std::vector<SpMat> N;
  for (const auto& Nk : sys.N()) N.push_back(gamma * Nk);
  QBSystem out(sys.A(), sys.H().scaled(gamma), std::move(N), sys.B(), sys.C(), sys.E());
  out.meta = sys.meta;
  return out;
}

ReducedModel rescale(const ReducedModel& red, double gamma) {
  require(gamma > 0.0, ErrorCode::NonPositiveGamma, "rescale: gamma must be positive");
  ReducedModel out = red;
  out.H *= gamma;
  for (auto& Nk : out.N) Nk *= gamma;
  return out;
}

Vec rhs(const QBSystem& sys, const Vec& x, const Vec& u) {
  require(x.size() == sys.n() && u.size() == sys.m(), ErrorCode::DimensionMismatch, "rhs: length mismatch");
  Vec f = sys.A() * x + sys.B() * u;
  if (!sys.H().is_zero()) f += sys.H().apply<double>(x, x);
  for (Index k = 0; k < sys.m(); ++k)
    if (u[k] != 0.0) f += u[k] * (sys.N()[static_cast<std::size_t>(k)] * x);
  return f;
}

SpMat jacobian(const QBSystem& sys, const Vec& x, const Vec& u) {
  require(x.size() == sys.n() && u.size() == sys.m(), ErrorCode::DimensionMismatch,
          "jacobian: length mismatch");
  SpMat J = sys.A() + sys.H().jacobian(x);
  for (Index k = 0; k < sys.m(); ++k)
    if (u[k] != 0.0) J += u[k] * sys.N()[static_cast<std::size_t>(k)];
  return J;
}

namespace {

CSpMat pencil(const QBSystem& sys, cplx s) {
  CSpMat E(sys.n(), sys.n());
  if (sys.has_E()) E = sys.E()->cast<cplx>();
  else E.setIdentity();
  CSpMat M = s * E - CSpMat(sys.A().cast<cplx>());
  M.makeCompressed();
  return M;
}

}  // namespace

CMat transfer_function(const QBSystem& sys, cplx s) {
  Eigen::SparseLU<CSpMat> lu(pencil(sys, s));
  require(lu.info() == Eigen::Success, ErrorCode::SingularShift, "transfer_function: sE - A singular");
  return sys.C().cast<cplx>() * CMat(lu.solve(CMat(sys.B().cast<cplx>())));
}

CMat transfer_derivative(const QBSystem& sys, cplx s) {
  Eigen::SparseLU<CSpMat> lu(pencil(sys, s));
  require(lu.info() == Eigen::Success, ErrorCode::SingularShift, "transfer_derivative: sE - A singular");
  CMat X = lu.solve(CMat(sys.B().cast<cplx>()));
  if (sys.has_E()) X = sys.E()->cast<cplx>() * X;
  return -(sys.C().cast<cplx>() * CMat(lu.solve(X)));
}

}  // namespace qbmor
