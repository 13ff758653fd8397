#include <qbmor/kron_tensor.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <type_traits>

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
MatT<S> spmul_t(const SpMat& A, const MatT<S>& X) {
  if constexpr (std::is_same_v<S, double>) {
    return A.transpose() * X;
  } else {
    return A.cast<S>().transpose() * X;
  }
}

SpMat embed(const SpMat& A, Index n, Index offset) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(A.nonZeros()));
  for (Index c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it)
      trip.emplace_back(it.row() + offset, it.col() + offset, it.value());
  SpMat out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Permutation
// ---------------------------------------------------------------------------

Permutation::Permutation(std::vector<Index> map) : map_(std::move(map)) {
  require(is_bijection(), ErrorCode::InvalidArgument, "Permutation: map is not a bijection");
}

Permutation Permutation::identity(Index q) {
  std::vector<Index> map(static_cast<std::size_t>(q));
  for (Index i = 0; i < q; ++i) map[static_cast<std::size_t>(i)] = i;
  return Permutation(std::move(map));
}

bool Permutation::is_bijection() const {
  std::vector<char> seen(map_.size(), 0);
  for (Index v : map_) {
    if (v < 0 || v >= size() || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

Permutation Permutation::transpose() const {
  std::vector<Index> inv(map_.size());
  for (Index i = 0; i < size(); ++i) inv[static_cast<std::size_t>(map_[static_cast<std::size_t>(i)])] = i;
  return Permutation(std::move(inv));
}

Mat Permutation::dense() const {
  Mat P = Mat::Zero(size(), size());
  for (Index i = 0; i < size(); ++i) P(i, map_[static_cast<std::size_t>(i)]) = 1.0;
  return P;
}

SpMat Permutation::sparse() const {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(map_.size());
  for (Index i = 0; i < size(); ++i) trip.emplace_back(i, map_[static_cast<std::size_t>(i)], 1.0);
  SpMat P(size(), size());
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

Permutation kron(const Permutation& P, const Permutation& Q) {
  const Index q = Q.size();
  std::vector<Index> map(static_cast<std::size_t>(P.size() * q));
  for (Index a = 0; a < P.size(); ++a)
    for (Index b = 0; b < q; ++b) map[static_cast<std::size_t>(a * q + b)] = P[a] * q + Q[b];
  return Permutation(std::move(map));
}

Permutation block_diag(const Permutation& P, const Permutation& Q) {
  std::vector<Index> map(P.map());
  for (Index i = 0; i < Q.size(); ++i) map.push_back(Q[i] + P.size());
  return Permutation(std::move(map));
}

Permutation commutation_matrix(Index n, Index m) {
  require(n >= 1 && m >= 1, ErrorCode::InvalidArgument, "commutation_matrix: n, m >= 1");
  // (v ⊗ u)[b·n + a] = v_b u_a = (u ⊗ v)[a·m + b]
  std::vector<Index> map(static_cast<std::size_t>(n * m));
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < m; ++b) map[static_cast<std::size_t>(b * n + a)] = a * m + b;
  return Permutation(std::move(map));
}

Permutation perm_T(Index n, Index m) {
  require(n >= 1 && m >= 1, ErrorCode::InvalidArgument, "perm_T: n, m >= 1");
  // vec(X ⊗ Y)[(a·n + c) + (b·m + d)·n²] = X(a,b) Y(c,d)
  //                                      = (vec X ⊗ vec Y)[(a + b·n)·nm + (c + d·n)]
  const Index nm = n * m;
  std::vector<Index> map(static_cast<std::size_t>(nm * nm));
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < m; ++b)
      for (Index c = 0; c < n; ++c)
        for (Index d = 0; d < m; ++d) {
          const Index out = (a * n + c) + (b * m + d) * n * n;
          map[static_cast<std::size_t>(out)] = (a + b * n) * nm + (c + d * n);
        }
  return Permutation(std::move(map));
}

Permutation perm_M(Index p, Index q, Index r) {
  require(p >= 1 && q >= 1 && r >= 1, ErrorCode::InvalidArgument, "perm_M: p, q, r >= 1");
  // Column a·q + b of the first block sits in row a(q+r) + b; column
  // pq + a·r + b of the second block sits in row a(q+r) + q + b.
  std::vector<Index> map(static_cast<std::size_t>(p * (q + r)));
  for (Index a = 0; a < p; ++a) {
    for (Index b = 0; b < q; ++b) map[static_cast<std::size_t>(a * (q + r) + b)] = a * q + b;
    for (Index b = 0; b < r; ++b) map[static_cast<std::size_t>(a * (q + r) + q + b)] = p * q + a * r + b;
  }
  return Permutation(std::move(map));
}

// ---------------------------------------------------------------------------
// Tensor3
// ---------------------------------------------------------------------------

template <class S>
Tensor3<S> Tensor3<S>::from_matricization(int mu, const MatT<S>& M, Index d1, Index d2, Index d3) {
  Tensor3 X(d1, d2, d3);
  const Index rows[3] = {d1, d2, d3};
  require(mu >= 1 && mu <= 3, ErrorCode::InvalidArgument, "Tensor3: mode must be 1, 2 or 3");
  require(M.rows() == rows[mu - 1] && M.size() == d1 * d2 * d3, ErrorCode::DimensionMismatch,
          "Tensor3::from_matricization: shape mismatch");
  for (Index k = 0; k < d3; ++k)
    for (Index j = 0; j < d2; ++j)
      for (Index i = 0; i < d1; ++i) {
        if (mu == 1) X(i, j, k) = M(i, j + k * d2);
        else if (mu == 2) X(i, j, k) = M(j, i + k * d1);
        else X(i, j, k) = M(k, i + j * d1);
      }
  return X;
}

template <class S>
MatT<S> Tensor3<S>::matricize(int mu) const {
  const Index d1 = d_[0], d2 = d_[1], d3 = d_[2];
  require(mu >= 1 && mu <= 3, ErrorCode::InvalidArgument, "Tensor3: mode must be 1, 2 or 3");
  if (mu == 1) return Eigen::Map<const MatT<S>>(data_.data(), d1, d2 * d3);
  MatT<S> M(mu == 2 ? d2 : d3, mu == 2 ? d1 * d3 : d1 * d2);
  for (Index k = 0; k < d3; ++k)
    for (Index j = 0; j < d2; ++j)
      for (Index i = 0; i < d1; ++i) {
        if (mu == 2) M(j, i + k * d1) = (*this)(i, j, k);
        else M(k, i + j * d1) = (*this)(i, j, k);
      }
  return M;
}

template <class S>
Tensor3<S> Tensor3<S>::mode_product(int mu, const MatT<S>& A) const {
  require(A.cols() == dim(mu), ErrorCode::DimensionMismatch, "Tensor3::mode_product: shape mismatch");
  Index d[3] = {d_[0], d_[1], d_[2]};
  d[mu - 1] = A.rows();
  const MatT<S> Z = A * matricize(mu);
  return from_matricization(mu, Z, d[0], d[1], d[2]);
}

template <class S>
MatT<S> mode_matricize(const MatT<S>& H1, int mu) {
  const Index n = H1.rows();
  require(H1.cols() == n * n, ErrorCode::DimensionMismatch, "mode_matricize: expected n x n^2");
  return Tensor3<S>::from_matricization(1, H1, n, n, n).matricize(mu);
}

template <class S>
MatT<S> symmetrize_dense(const MatT<S>& H1) {
  const Index n = H1.rows();
  require(H1.cols() == n * n, ErrorCode::DimensionMismatch, "symmetrize_dense: expected n x n^2");
  MatT<S> out(n, n * n);
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j) out.col(k * n + j) = S(0.5) * (H1.col(k * n + j) + H1.col(j * n + k));
  return out;
}

template <class S>
MatT<S> dense_congruence(const MatT<S>& H1, const MatT<S>& L, const MatT<S>& R) {
  const Index d = H1.rows(), k = R.rows();
  require(H1.cols() == k * k && L.cols() == d, ErrorCode::DimensionMismatch,
          "dense_congruence: shape mismatch");
  const Tensor3<S> X = Tensor3<S>::from_matricization(1, H1, d, k, k);
  const MatT<S> Rt = R.transpose();
  return X.mode_product(1, L).mode_product(2, Rt).mode_product(3, Rt).matricize(1);
}

template class Tensor3<double>;
template class Tensor3<cplx>;
template Mat mode_matricize<double>(const Mat&, int);
template CMat mode_matricize<cplx>(const CMat&, int);
template Mat symmetrize_dense<double>(const Mat&);
template CMat symmetrize_dense<cplx>(const CMat&);
template Mat dense_congruence<double>(const Mat&, const Mat&, const Mat&);
template CMat dense_congruence<cplx>(const CMat&, const CMat&, const CMat&);

// ---------------------------------------------------------------------------
// Hessian
// ---------------------------------------------------------------------------

Hessian Hessian::zero(Index n) {
  Hessian h;
  h.n_ = n;
  h.storage_ = Storage::Structured;
  h.symmetric_ = true;
  return h;
}

Hessian Hessian::from_matricized(const SpMat& H1) {
  const Index n = H1.rows();
  require(H1.cols() == n * n, ErrorCode::DimensionMismatch,
          "Hessian: mode-1 matrix must be n x n^2");
  Hessian h;
  h.n_ = n;
  h.storage_ = Storage::Matricized;
  h.H1_ = H1;
  h.H1_.makeCompressed();
  h.symmetric_ = h.detect_symmetry();
  return h;
}

Hessian Hessian::from_matricized(const Mat& H1) { return from_matricized(SpMat(H1.sparseView(1.0, 0.0))); }

Hessian Hessian::from_pairs(Index n, std::vector<FactorPair> pairs) {
  for (const auto& p : pairs)
    require(p.A.rows() == n && p.A.cols() == n && p.B.rows() == n && p.B.cols() == n,
            ErrorCode::DimensionMismatch, "Hessian: factor pairs must be n x n");
  Hessian h;
  h.n_ = n;
  h.storage_ = Storage::Structured;
  h.pairs_ = std::move(pairs);
  for (auto& p : h.pairs_) {
    p.A.makeCompressed();
    p.B.makeCompressed();
  }
  h.symmetric_ = h.detect_symmetry();
  return h;
}

bool Hessian::is_zero() const {
  if (storage_ == Storage::Matricized) {
    for (Index k = 0; k < H1_.outerSize(); ++k)
      for (SpMat::InnerIterator it(H1_, k); it; ++it)
        if (it.value() != 0.0) return false;
    return true;
  }
  for (const auto& p : pairs_) {
    bool a_zero = true, b_zero = true;
    for (Index k = 0; k < p.A.outerSize() && a_zero; ++k)
      for (SpMat::InnerIterator it(p.A, k); it; ++it)
        if (it.value() != 0.0) { a_zero = false; break; }
    for (Index k = 0; k < p.B.outerSize() && b_zero; ++k)
      for (SpMat::InnerIterator it(p.B, k); it; ++it)
        if (it.value() != 0.0) { b_zero = false; break; }
    if (!a_zero && !b_zero) return false;
  }
  return true;
}

bool Hessian::detect_symmetry() const {
  if (n_ == 0) return true;
  if (storage_ == Storage::Matricized) {
    double scale = 0.0;
    for (Index c = 0; c < H1_.outerSize(); ++c)
      for (SpMat::InnerIterator it(H1_, c); it; ++it) scale = std::max(scale, std::abs(it.value()));
    for (Index c = 0; c < H1_.outerSize(); ++c) {
      const Index k = c / n_, j = c % n_;
      for (SpMat::InnerIterator it(H1_, c); it; ++it)
        if (std::abs(it.value() - H1_.coeff(it.row(), j * n_ + k)) > 1e-14 * scale) return false;
    }
    return true;
  }
  // Structured: randomized check with a fixed seed (deterministic).
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 3; ++trial) {
    Vec u(n_), v(n_);
    for (Index i = 0; i < n_; ++i) { u[i] = nd(rng); v[i] = nd(rng); }
    const Vec d = apply<double>(u, v) - apply<double>(v, u);
    double scale = 0.0;
    for (const auto& p : pairs_) scale += ((p.A * u).cwiseAbs().cwiseProduct((p.B * v).cwiseAbs())).norm() +
                                         ((p.A * v).cwiseAbs().cwiseProduct((p.B * u).cwiseAbs())).norm();
    if (d.norm() > 1e-13 * std::max(scale, 1e-300)) return false;
  }
  return true;
}

SpMat Hessian::mode1() const {
  if (storage_ == Storage::Matricized) return H1_;
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& p : pairs_) {
    const Eigen::SparseMatrix<double, Eigen::RowMajor> A = p.A, B = p.B;
    for (Index i = 0; i < n_; ++i)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator ia(A, i); ia; ++ia)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator ib(B, i); ib; ++ib)
          trip.emplace_back(i, ia.col() * n_ + ib.col(), ia.value() * ib.value());
  }
  SpMat H(n_, n_ * n_);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

Mat Hessian::dense_mode(int mu) const { return mode_matricize<double>(Mat(mode1()), mu); }

std::vector<FactorPair> Hessian::as_pairs() const {
  if (storage_ == Storage::Structured) return pairs_;
  std::vector<FactorPair> out;
  for (Index k = 0; k < n_; ++k) {
    SpMat Bk = H1_.middleCols(k * n_, n_);
    if (Bk.nonZeros() == 0) continue;
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<char> row_used(static_cast<std::size_t>(n_), 0);
    for (Index c = 0; c < Bk.outerSize(); ++c)
      for (SpMat::InnerIterator it(Bk, c); it; ++it) row_used[static_cast<std::size_t>(it.row())] = 1;
    for (Index i = 0; i < n_; ++i)
      if (row_used[static_cast<std::size_t>(i)]) trip.emplace_back(i, k, 1.0);
    SpMat Ak(n_, n_);
    Ak.setFromTriplets(trip.begin(), trip.end());
    out.push_back({Ak, Bk});
  }
  return out;
}

template <class S>
VecT<S> Hessian::apply(const VecT<S>& u, const VecT<S>& v) const {
  require(u.size() == n_ && v.size() == n_, ErrorCode::DimensionMismatch, "Hessian::apply length");
  VecT<S> y = VecT<S>::Zero(n_);
  if (storage_ == Storage::Structured) {
    for (const auto& p : pairs_) {
      const VecT<S> au = spmul<S>(p.A, u), bv = spmul<S>(p.B, v);
      y += au.cwiseProduct(bv);
    }
    return y;
  }
  for (Index c = 0; c < H1_.outerSize(); ++c) {
    const S w = u[c / n_] * v[c % n_];
    if (w == S(0)) continue;
    for (SpMat::InnerIterator it(H1_, c); it; ++it) y[it.row()] += it.value() * w;
  }
  return y;
}

template <class S>
VecT<S> Hessian::apply_mode2(const VecT<S>& u, const VecT<S>& v) const {
  require(u.size() == n_ && v.size() == n_, ErrorCode::DimensionMismatch, "Hessian::apply_mode2 length");
  VecT<S> y = VecT<S>::Zero(n_);
  if (storage_ == Storage::Structured) {
    for (const auto& p : pairs_) {
      const VecT<S> au = spmul<S>(p.A, u);
      y += spmul_t<S>(p.B, VecT<S>(au.cwiseProduct(v)));
    }
    return y;
  }
  // H^(2)(u ⊗ v)_j = Σ_{i,k} X(i,j,k) u_k v_i with X(i,j,k) = H1(i, k·n + j)
  for (Index c = 0; c < H1_.outerSize(); ++c) {
    const Index k = c / n_, j = c % n_;
    if (u[k] == S(0)) continue;
    S acc(0);
    for (SpMat::InnerIterator it(H1_, c); it; ++it) acc += it.value() * v[it.row()];
    y[j] += acc * u[k];
  }
  return y;
}

template <class S>
MatT<S> Hessian::apply_cols(const MatT<S>& U, const MatT<S>& V) const {
  require(U.rows() == n_ && V.rows() == n_, ErrorCode::DimensionMismatch, "Hessian::apply_cols rows");
  const Index cu = U.cols(), cv = V.cols();
  MatT<S> out = MatT<S>::Zero(n_, cu * cv);
  if (storage_ == Storage::Structured) {
    for (const auto& p : pairs_) {
      const MatT<S> AU = spmul<S>(p.A, U), BV = spmul<S>(p.B, V);
      for (Index a = 0; a < cu; ++a)
        for (Index b = 0; b < cv; ++b) out.col(a * cv + b) += AU.col(a).cwiseProduct(BV.col(b));
    }
    return out;
  }
  for (Index a = 0; a < cu; ++a)
    for (Index b = 0; b < cv; ++b)
      out.col(a * cv + b) = apply<S>(VecT<S>(U.col(a)), VecT<S>(V.col(b)));
  return out;
}

template <class S>
MatT<S> Hessian::apply_mode2_cols(const MatT<S>& U, const MatT<S>& V) const {
  require(U.rows() == n_ && V.rows() == n_, ErrorCode::DimensionMismatch, "Hessian::apply_mode2_cols rows");
  const Index cu = U.cols(), cv = V.cols();
  MatT<S> out = MatT<S>::Zero(n_, cu * cv);
  if (storage_ == Storage::Structured) {
    for (const auto& p : pairs_) {
      const MatT<S> AU = spmul<S>(p.A, U);
      MatT<S> prod(n_, cu * cv);
      for (Index a = 0; a < cu; ++a)
        for (Index b = 0; b < cv; ++b) prod.col(a * cv + b) = AU.col(a).cwiseProduct(V.col(b));
      out += spmul_t<S>(p.B, prod);
    }
    return out;
  }
  for (Index a = 0; a < cu; ++a)
    for (Index b = 0; b < cv; ++b)
      out.col(a * cv + b) = apply_mode2<S>(VecT<S>(U.col(a)), VecT<S>(V.col(b)));
  return out;
}

template <class S>
MatT<S> Hessian::congruence(const MatT<S>& V, const MatT<S>& W) const {
  require(V.rows() == n_ && W.rows() == n_ && V.cols() == W.cols(), ErrorCode::DimensionMismatch,
          "Hessian::congruence: V, W must be n x r");
  const Index r = V.cols();
  if (storage_ == Storage::Structured) return W.transpose() * apply_cols<S>(V, V);
  // Y^(1) = Wᵀ H^(1); Z^(2) = Vᵀ Y^(2); X^(3) = Vᵀ Z^(3); return X^(1).
  const MatT<S> Y1 = spmul_t<S>(H1_, W).transpose();
  const Tensor3<S> Y = Tensor3<S>::from_matricization(1, Y1, r, n_, n_);
  const MatT<S> Vt = V.transpose();
  return Y.mode_product(2, Vt).mode_product(3, Vt).matricize(1);
}

SpMat Hessian::jacobian(const Vec& x) const {
  require(x.size() == n_, ErrorCode::DimensionMismatch, "Hessian::jacobian length");
  SpMat J(n_, n_);
  if (storage_ == Storage::Structured) {
    for (const auto& p : pairs_) {
      const Vec ax = p.A * x, bx = p.B * x;
      J += SpMat(bx.asDiagonal() * p.A) + SpMat(ax.asDiagonal() * p.B);
    }
    return J;
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (Index c = 0; c < H1_.outerSize(); ++c) {
    const Index k = c / n_, j = c % n_;
    for (SpMat::InnerIterator it(H1_, c); it; ++it) {
      trip.emplace_back(it.row(), k, it.value() * x[j]);
      trip.emplace_back(it.row(), j, it.value() * x[k]);
    }
  }
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

Mat Hessian::gram(const Mat& P, const Mat& Q) const {
  require(P.rows() == n_ && P.cols() == n_ && Q.rows() == n_ && Q.cols() == n_,
          ErrorCode::DimensionMismatch, "Hessian::gram: P, Q must be n x n");
  Mat G = Mat::Zero(n_, n_);
  if (storage_ == Storage::Structured) {
    // H(P⊗Q)Hᵀ = Σ_{p,p'} (A_p P A_p'ᵀ) ∘ (B_p Q B_p'ᵀ)
    std::vector<Mat> AP, BQ;
    for (const auto& p : pairs_) {
      AP.push_back(p.A * P);
      BQ.push_back(p.B * Q);
    }
    for (std::size_t a = 0; a < pairs_.size(); ++a)
      for (std::size_t b = 0; b < pairs_.size(); ++b) {
        const Mat left = AP[a] * pairs_[b].A.transpose();
        const Mat right = BQ[a] * pairs_[b].B.transpose();
        G += left.cwiseProduct(right);
      }
    return G;
  }
  // H(P⊗Q)Hᵀ = Σ_{k,k'} P(k,k') H_k Q H_k'ᵀ with H_k the k-th n×n block column.
  std::vector<SpMat> blocks;
  for (Index k = 0; k < n_; ++k) blocks.push_back(H1_.middleCols(k * n_, n_));
  for (Index k = 0; k < n_; ++k) {
    if (blocks[static_cast<std::size_t>(k)].nonZeros() == 0) continue;
    Mat Sk = Mat::Zero(n_, n_);
    for (Index kp = 0; kp < n_; ++kp)
      if (P(k, kp) != 0.0 && blocks[static_cast<std::size_t>(kp)].nonZeros() > 0)
        Sk += P(k, kp) * Mat(blocks[static_cast<std::size_t>(kp)]);
    G += (blocks[static_cast<std::size_t>(k)] * Q) * Sk.transpose();
  }
  return G;
}

Mat Hessian::gram_mode2(const Mat& P, const Mat& Q) const {
  require(P.rows() == n_ && P.cols() == n_ && Q.rows() == n_ && Q.cols() == n_,
          ErrorCode::DimensionMismatch, "Hessian::gram_mode2: P, Q must be n x n");
  Mat G = Mat::Zero(n_, n_);
  if (storage_ == Storage::Structured) {
    // H^(2)(P⊗Q)H^(2)ᵀ = Σ_{p,p'} B_pᵀ [Q ∘ (A_p P A_p'ᵀ)] B_p'
    std::vector<Mat> AP;
    for (const auto& p : pairs_) AP.push_back(p.A * P);
    for (std::size_t a = 0; a < pairs_.size(); ++a)
      for (std::size_t b = 0; b < pairs_.size(); ++b) {
        const Mat inner = Q.cwiseProduct(AP[a] * pairs_[b].A.transpose());
        G += pairs_[a].B.transpose() * (inner * pairs_[b].B);
      }
    return G;
  }
  // H^(2) = [H_0ᵀ, ..., H_{n-1}ᵀ] ⇒ H^(2)(P⊗Q)H^(2)ᵀ = Σ_{k,k'} P(k,k') H_kᵀ Q H_k'
  std::vector<SpMat> blocks;
  for (Index k = 0; k < n_; ++k) blocks.push_back(H1_.middleCols(k * n_, n_));
  for (Index k = 0; k < n_; ++k) {
    if (blocks[static_cast<std::size_t>(k)].nonZeros() == 0) continue;
    Mat Sk = Mat::Zero(n_, n_);
    for (Index kp = 0; kp < n_; ++kp)
      if (P(k, kp) != 0.0 && blocks[static_cast<std::size_t>(kp)].nonZeros() > 0)
        Sk += P(k, kp) * Mat(blocks[static_cast<std::size_t>(kp)]);
    G += blocks[static_cast<std::size_t>(k)].transpose() * (Q * Sk);
  }
  return G;
}

Hessian Hessian::scaled(double gamma) const {
  Hessian h = *this;
  if (storage_ == Storage::Matricized) {
    h.H1_ *= gamma;
  } else {
    for (auto& p : h.pairs_) p.A *= gamma;
  }
  return h;
}

Hessian Hessian::symmetrized() const {
  if (symmetric_) return *this;
  if (storage_ == Storage::Matricized) {
    std::vector<Eigen::Triplet<double>> trip;
    for (Index c = 0; c < H1_.outerSize(); ++c) {
      const Index k = c / n_, j = c % n_;
      for (SpMat::InnerIterator it(H1_, c); it; ++it) {
        trip.emplace_back(it.row(), c, 0.5 * it.value());
        trip.emplace_back(it.row(), j * n_ + k, 0.5 * it.value());
      }
    }
    SpMat H(n_, n_ * n_);
    H.setFromTriplets(trip.begin(), trip.end());
    Hessian h = from_matricized(H);
    h.symmetric_ = true;
    return h;
  }
  std::vector<FactorPair> pairs;
  for (const auto& p : pairs_) {
    pairs.push_back({SpMat(0.5 * p.A), p.B});
    pairs.push_back({SpMat(0.5 * p.B), p.A});
  }
  Hessian h = from_pairs(n_, std::move(pairs));
  h.symmetric_ = true;
  return h;
}

double Hessian::norm() const {
  if (storage_ == Storage::Matricized) return H1_.norm();
  return mode1().norm();
}

Hessian block_diag(const Hessian& H1, const Hessian& H2) {
  const Index n1 = H1.n(), n2 = H2.n(), n = n1 + n2;
  std::vector<FactorPair> pairs;
  for (const auto& p : H1.as_pairs()) pairs.push_back({embed(p.A, n, 0), embed(p.B, n, 0)});
  for (const auto& p : H2.as_pairs()) pairs.push_back({embed(p.A, n, n1), embed(p.B, n, n1)});
  return Hessian::from_pairs(n, std::move(pairs));
}

Hessian symmetrize(const Hessian& h) { return h.symmetrized(); }

#define QBMOR_INSTANTIATE_HESSIAN(S)                                                   \
  template VecT<S> Hessian::apply<S>(const VecT<S>&, const VecT<S>&) const;            \
  template VecT<S> Hessian::apply_mode2<S>(const VecT<S>&, const VecT<S>&) const;      \
  template MatT<S> Hessian::apply_cols<S>(const MatT<S>&, const MatT<S>&) const;       \
  template MatT<S> Hessian::apply_mode2_cols<S>(const MatT<S>&, const MatT<S>&) const; \
  template MatT<S> Hessian::congruence<S>(const MatT<S>&, const MatT<S>&) const;

QBMOR_INSTANTIATE_HESSIAN(double)
QBMOR_INSTANTIATE_HESSIAN(cplx)

}  // namespace qbmor
