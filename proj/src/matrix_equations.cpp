#include <qbmor/matrix_equations.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <qbmor/parallel.hpp>

namespace qbmor {

std::vector<Index> eigen_order(const CVec& lambda) {
  std::vector<Index> idx(static_cast<std::size_t>(lambda.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    if (lambda[a].real() != lambda[b].real()) return lambda[a].real() < lambda[b].real();
    // |Im| before Im keeps conjugate pairs adjacent when two pairs share a real part.
    if (std::abs(lambda[a].imag()) != std::abs(lambda[b].imag()))
      return std::abs(lambda[a].imag()) < std::abs(lambda[b].imag());
    return lambda[a].imag() < lambda[b].imag();
  });
  return idx;
}

double cond2(const Mat& A) {
  if (A.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(A);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  return smin == 0.0 ? std::numeric_limits<double>::infinity() : s[0] / smin;
}

double cond2(const CMat& A) {
  if (A.size() == 0) return 1.0;
  Eigen::JacobiSVD<CMat> svd(A);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  return smin == 0.0 ? std::numeric_limits<double>::infinity() : s[0] / smin;
}

double spectral_abscissa(const Mat& A) {
  if (A.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Mat> es(A, false);
  require(es.info() == Eigen::Success, ErrorCode::SolverBreakdown, "spectral_abscissa: eigensolver failed");
  return es.eigenvalues().real().maxCoeff();
}

SpectralFactors spectral_decompose(const Mat& A, double cond_limit) {
  require(A.rows() == A.cols(), ErrorCode::DimensionMismatch, "spectral_decompose: square matrix required");
  const Index r = A.rows();
  SpectralFactors f;
  if (r == 0) {
    f.R = CMat(0, 0);
    f.Rinv = CMat(0, 0);
    f.lambda = CVec(0);
    return f;
  }
  Eigen::EigenSolver<Mat> es(A, true);
  require(es.info() == Eigen::Success, ErrorCode::SolverBreakdown, "spectral_decompose: eigensolver failed");
  const CVec lam = es.eigenvalues();
  const CMat vecs = es.eigenvectors();
  const auto order = eigen_order(lam);
  f.lambda.resize(r);
  f.R.resize(r, r);
  for (Index i = 0; i < r; ++i) {
    f.lambda[i] = lam[order[static_cast<std::size_t>(i)]];
    f.R.col(i) = vecs.col(order[static_cast<std::size_t>(i)]);
  }
  f.cond = cond2(f.R);
  if (!(f.cond <= cond_limit))
    throw Error(ErrorCode::NonDiagonalizable,
                "eigenvector matrix condition " + std::to_string(f.cond) + " exceeds limit");
  f.Rinv = f.R.fullPivLu().inverse();
  return f;
}

Mat solve_lyapunov(const Mat& A, const Mat& Q) {
  const Index n = A.rows();
  require(A.cols() == n && Q.rows() == n && Q.cols() == n, ErrorCode::DimensionMismatch,
          "solve_lyapunov: A and Q must be n x n");
  if (n == 0) return Mat(0, 0);
  Eigen::ComplexSchur<CMat> schur(A.cast<cplx>());
  require(schur.info() == Eigen::Success, ErrorCode::SolverBreakdown, "solve_lyapunov: Schur failed");
  const CMat& T = schur.matrixT();
  const CMat& U = schur.matrixU();
  for (Index i = 0; i < n; ++i)
    require(T(i, i).real() < 0.0, ErrorCode::NotStable, "solve_lyapunov: A is not Hurwitz");
  // A = U T U*, Y = U* X U:  T Y + Y T* = F with F = −U* Q U.
  const CMat F = -(U.adjoint() * Q.cast<cplx>() * U);
  CMat Y = CMat::Zero(n, n);
  CVec rhs(n);
  for (Index j = n - 1; j >= 0; --j) {
    rhs = F.col(j);
    if (j + 1 < n) rhs.noalias() -= Y.rightCols(n - 1 - j) * T.row(j).tail(n - 1 - j).conjugate().transpose();
    const cplx shift = std::conj(T(j, j));
    for (Index i = n - 1; i >= 0; --i) {
      cplx s = rhs[i];
      for (Index l = i + 1; l < n; ++l) s -= T(i, l) * Y(l, j);
      Y(i, j) = s / (T(i, i) + shift);
    }
  }
  Mat X = (U * Y * U.adjoint()).real();
  return 0.5 * (X + X.transpose());
}

namespace {

/// Columns that are exact conjugate copies of their predecessor.
std::vector<char> conjugate_copies(const CVec& lambda, const CMat& rhs) {
  std::vector<char> copy(static_cast<std::size_t>(lambda.size()), 0);
  for (Index i = 1; i < lambda.size(); ++i) {
    if (copy[static_cast<std::size_t>(i - 1)]) continue;
    if (lambda[i].imag() != 0.0 && lambda[i] == std::conj(lambda[i - 1]) &&
        rhs.col(i) == rhs.col(i - 1).conjugate())
      copy[static_cast<std::size_t>(i)] = 1;
  }
  return copy;
}

}  // namespace

CMat solve_sylvester_shifted(const SpMat& A, const CVec& lambda, const CMat& rhs, const SpMat* E,
                             bool transpose) {
  const Index n = A.rows(), r = lambda.size();
  require(A.cols() == n && rhs.rows() == n && rhs.cols() == r, ErrorCode::DimensionMismatch,
          "solve_sylvester_shifted: shape mismatch");
  if (E) require(E->rows() == n && E->cols() == n, ErrorCode::DimensionMismatch, "solve_sylvester_shifted: E shape");
  CMat V(n, r);
  if (r == 0) return V;
  const std::vector<char> copy = conjugate_copies(lambda, rhs);
  CSpMat Ac = transpose ? CSpMat(A.transpose().cast<cplx>()) : CSpMat(A.cast<cplx>());
  CSpMat Ec(n, n);
  if (E) {
    Ec = transpose ? CSpMat(E->transpose().cast<cplx>()) : CSpMat(E->cast<cplx>());
  } else {
    Ec.setIdentity();
  }
  parallel_for(static_cast<std::size_t>(r), [&](std::size_t ii) {
    const Index i = static_cast<Index>(ii);
    if (copy[ii]) return;
    CSpMat M = Ac + lambda[i] * Ec;
    M.makeCompressed();
    Eigen::SparseLU<CSpMat> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success)
      throw Error(ErrorCode::SingularShift, "A + lambda_" + std::to_string(i) + " E is singular");
    CVec v = -lu.solve(CVec(rhs.col(i)));
    if (lu.info() != Eigen::Success || !v.allFinite())
      throw Error(ErrorCode::SingularShift, "shifted solve failed for column " + std::to_string(i));
    V.col(i) = v;
  });
  for (Index i = 0; i < r; ++i)
    if (copy[static_cast<std::size_t>(i)]) V.col(i) = V.col(i - 1).conjugate();
  return V;
}

CMat solve_sylvester_shifted(const CMat& A, const CVec& lambda, const CMat& rhs) {
  const Index n = A.rows(), r = lambda.size();
  require(A.cols() == n && rhs.rows() == n && rhs.cols() == r, ErrorCode::DimensionMismatch,
          "solve_sylvester_shifted: shape mismatch");
  CMat V(n, r);
  const std::vector<char> copy = conjugate_copies(lambda, rhs);
  parallel_for(static_cast<std::size_t>(r), [&](std::size_t ii) {
    const Index i = static_cast<Index>(ii);
    if (copy[ii]) return;
    CMat M = A;
    M.diagonal().array() += lambda[i];
    Eigen::FullPivLU<CMat> lu(M);
    if (!lu.isInvertible())
      throw Error(ErrorCode::SingularShift, "A + lambda_" + std::to_string(i) + " I is singular");
    V.col(i) = -lu.solve(CVec(rhs.col(i)));
  });
  for (Index i = 0; i < r; ++i)
    if (copy[static_cast<std::size_t>(i)]) V.col(i) = V.col(i - 1).conjugate();
  return V;
}

CVec reflect_unstable(const CVec& lambda, double imag_shift) {
  CVec out = lambda;
  for (Index i = 0; i < out.size(); ++i) {
    if (out[i].real() > 0.0) out[i] = cplx(-out[i].real(), out[i].imag());
    else if (out[i].real() == 0.0) out[i] = cplx(-imag_shift, out[i].imag());
  }
  return out;
}

namespace {

bool is_conj_pair(cplx a, cplx b) {
  const double tol = 1e-12 * std::max(std::abs(a), 1e-300);
  return std::abs(b - std::conj(a)) <= tol;
}

}  // namespace

Mat realify_basis(const CMat& Vc, const CVec& lambda) {
  require(Vc.cols() == lambda.size(), ErrorCode::DimensionMismatch, "realify_basis: column count");
  Mat V(Vc.rows(), Vc.cols());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i].imag() == 0.0) {
      V.col(i) = Vc.col(i).real();
      continue;
    }
    if (i + 1 >= lambda.size() || !is_conj_pair(lambda[i], lambda[i + 1]))
      throw Error(ErrorCode::PairingViolation, "complex eigenvalue without adjacent conjugate");
    V.col(i) = Vc.col(i).real();
    V.col(i + 1) = Vc.col(i).imag();
    ++i;
  }
  return V;
}

CMat realify_transform(const CVec& lambda) {
  const Index r = lambda.size();
  CMat T = CMat::Zero(r, r);
  const cplx I(0.0, 1.0);
  for (Index i = 0; i < r; ++i) {
    if (lambda[i].imag() == 0.0) {
      T(i, i) = 1.0;
      continue;
    }
    if (i + 1 >= r || !is_conj_pair(lambda[i], lambda[i + 1]))
      throw Error(ErrorCode::PairingViolation, "complex eigenvalue without adjacent conjugate");
    T(i, i) = 0.5;
    T(i + 1, i) = 0.5;
    T(i, i + 1) = -0.5 * I;
    T(i + 1, i + 1) = 0.5 * I;
    ++i;
  }
  return T;
}

Mat psd_factor(const Mat& P) {
  require(P.rows() == P.cols(), ErrorCode::DimensionMismatch, "psd_factor: square matrix required");
  if (P.rows() == 0) return Mat(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (P + P.transpose()));
  require(es.info() == Eigen::Success, ErrorCode::SolverBreakdown, "psd_factor: eigensolver failed");
  const Vec& ev = es.eigenvalues();
  // Eigenvalues below rounding level of the largest one count as zero.
  const double floor = std::numeric_limits<double>::epsilon() * static_cast<double>(P.rows()) *
                       ev.cwiseAbs().maxCoeff();
  std::vector<Index> keep;
  for (Index i = ev.size() - 1; i >= 0; --i)
    if (ev[i] > floor) keep.push_back(i);
  Mat L(P.rows(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    L.col(static_cast<Index>(c)) = es.eigenvectors().col(keep[c]) * std::sqrt(ev[keep[c]]);
  return L;
}

Mat orth(const Mat& V, std::mt19937_64& rng, bool* padded) {
  const Index n = V.rows(), r = V.cols();
  require(r <= n, ErrorCode::DimensionMismatch, "orth: more columns than rows");
  if (padded) *padded = false;
  Eigen::ColPivHouseholderQR<Mat> qr(V);
  qr.setThreshold(1e-13);
  const Index rank = qr.rank();
  Mat Q = qr.householderQ() * Mat::Identity(n, r);
  if (rank == r) return Q;
  if (padded) *padded = true;
  std::normal_distribution<double> nd;
  Mat basis = Q.leftCols(rank);
  Mat extra(n, r - rank);
  for (Index j = 0; j < extra.cols(); ++j)
    for (Index i = 0; i < n; ++i) extra(i, j) = nd(rng);
  for (int pass = 0; pass < 2; ++pass) extra -= basis * (basis.transpose() * extra);
  Eigen::HouseholderQR<Mat> qr2(extra);
  Mat out(n, r);
  out.leftCols(rank) = basis;
  out.rightCols(r - rank) = qr2.householderQ() * Mat::Identity(n, r - rank);
  return out;
}

}  // namespace qbmor
