/// \file kron_tensor.hpp
/// \brief Kronecker-product and order-3 tensor primitives: permutation
///        matrices stored as index maps, mode-μ matricizations, and the
///        Hessian of a quadratic-bilinear system with matrix-free application.
///
/// Index conventions (0-based throughout):
///  - Kronecker vectors: (u ⊗ v)[a·len(v) + b] = u[a]·v[b].
///  - An order-3 tensor X of size d1×d2×d3 is stored column-major, i.e. the
///    entry X(i,j,k) lives at i + j·d1 + k·d1·d2. This is exactly the storage
///    of its mode-1 matricization X^(1) = [X_1, ..., X_{d3}] (frontal slices).
///  - X^(1)(i, j + k·d2) = X(i,j,k)
///  - X^(2)(j, i + k·d1) = X(i,j,k)   (X^(2) = [X_1ᵀ, ..., X_{d3}ᵀ])
///  - X^(3)(k, i + j·d1) = X(i,j,k)   (row k is vec(X_k)ᵀ)
///  - For a Hessian, H(u ⊗ v)_i = Σ_{j,k} X(i,j,k) u_k v_j.
#ifndef QBMOR_KRON_TENSOR_HPP
#define QBMOR_KRON_TENSOR_HPP

#include <vector>

#include <qbmor/errors.hpp>
#include <qbmor/types.hpp>

namespace qbmor {

// ---------------------------------------------------------------------------
// Permutation matrices
// ---------------------------------------------------------------------------

/// \brief A permutation matrix P of size q stored as an index map: row i has
///        its single unit entry in column map[i], so (P x)_i = x_{map[i]}.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<Index> map);

  /// \brief Identity permutation of size q.
  static Permutation identity(Index q);

  Index size() const { return static_cast<Index>(map_.size()); }
  Index operator[](Index i) const { return map_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& map() const { return map_; }

  /// \brief True if the map is a bijection on {0..q-1}.
  bool is_bijection() const;

  /// \brief Returns P x (rows of x permuted); x may have several columns.
  template <class S>
  MatT<S> apply(const MatT<S>& x) const {
    require(x.rows() == size(), ErrorCode::DimensionMismatch, "Permutation::apply size");
    MatT<S> y(x.rows(), x.cols());
    for (Index i = 0; i < size(); ++i) y.row(i) = x.row(map_[static_cast<std::size_t>(i)]);
    return y;
  }
  /// \brief Returns Pᵀ x.
  template <class S>
  MatT<S> apply_transpose(const MatT<S>& x) const {
    require(x.rows() == size(), ErrorCode::DimensionMismatch, "Permutation::apply_transpose size");
    MatT<S> y(x.rows(), x.cols());
    for (Index i = 0; i < size(); ++i) y.row(map_[static_cast<std::size_t>(i)]) = x.row(i);
    return y;
  }

  /// \brief The transpose (= inverse) permutation.
  Permutation transpose() const;
  /// \brief Dense materialization (tests only).
  Mat dense() const;
  /// \brief Sparse materialization.
  SpMat sparse() const;

 private:
  std::vector<Index> map_;
};

/// \brief Kronecker product P ⊗ Q of two permutations.
Permutation kron(const Permutation& P, const Permutation& Q);
/// \brief Block-diagonal blkdiag(P, Q).
Permutation block_diag(const Permutation& P, const Permutation& Q);

/// \brief Commutation matrix S of size nm with S(u ⊗ v) = v ⊗ u, |u| = n, |v| = m.
Permutation commutation_matrix(Index n, Index m);

/// \brief T_(n,m) of size n²m² with vec(X ⊗ Y) = T (vec X ⊗ vec Y), X, Y n×m.
Permutation perm_T(Index n, Index m);

/// \brief M_pqr = [I_p ⊗ [I_q; 0], I_p ⊗ [0; I_r]] of size p(q+r); satisfies
///        Mᵀ (A ⊗ blkdiag(B, C)) M = blkdiag(A ⊗ B, A ⊗ C).
Permutation perm_M(Index p, Index q, Index r);

// ---------------------------------------------------------------------------
// Dense order-3 tensors
// ---------------------------------------------------------------------------

/// \brief Dense order-3 tensor in mode-1 (column-major) storage.
template <class S>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(Index d1, Index d2, Index d3) : d_{d1, d2, d3}, data_(VecT<S>::Zero(d1 * d2 * d3)) {}

  /// \brief Builds a tensor from its mode-mu matricization.
  static Tensor3 from_matricization(int mu, const MatT<S>& M, Index d1, Index d2, Index d3);

  Index dim(int mode) const { return d_[mode - 1]; }
  S& operator()(Index i, Index j, Index k) { return data_[i + j * d_[0] + k * d_[0] * d_[1]]; }
  const S& operator()(Index i, Index j, Index k) const {
    return data_[i + j * d_[0] + k * d_[0] * d_[1]];
  }

  /// \brief Mode-mu matricization X^(mu).
  MatT<S> matricize(int mu) const;
  /// \brief Mode-mu product X ×_mu A, i.e. Z^(mu) = A X^(mu).
  Tensor3 mode_product(int mu, const MatT<S>& A) const;

 private:
  Index d_[3] = {0, 0, 0};
  VecT<S> data_;
};

/// \brief Mode-mu matricization of an n×n×n tensor given by its mode-1 matrix.
template <class S>
MatT<S> mode_matricize(const MatT<S>& H1, int mu);

/// \brief Dense symmetrization ½(H + H·S_(n,n)) of an n×n² mode-1 matrix.
template <class S>
MatT<S> symmetrize_dense(const MatT<S>& H1);

/// \brief Dense tensor congruence L · H1 · (R ⊗ R) evaluated through mode
///        products (H1 is d×k², L is q×d, R is k×s; result q×s²).
template <class S>
MatT<S> dense_congruence(const MatT<S>& H1, const MatT<S>& L, const MatT<S>& R);

// ---------------------------------------------------------------------------
// Hessian
// ---------------------------------------------------------------------------

/// \brief One Hadamard factor pair: contributes (A u) ∘ (B v) to H(u ⊗ v).
struct FactorPair {
  SpMat A;
  SpMat B;
};

/// \brief The Hessian H (n × n² mode-1 matricization) of a QB system.
///
/// Two storages are supported:
///  - Matricized: an explicit sparse n×n² mode-1 matrix (tests, tiny systems,
///    reduced models);
///  - Structured: a list of factor pairs with H(i,:) = Σ_j A_j(i,:) ⊗ B_j(i,:),
///    i.e. H(u ⊗ v) = Σ_j (A_j u) ∘ (B_j v). Default for benchmark models.
class Hessian {
 public:
  enum class Storage { Matricized, Structured };

  Hessian() = default;
  /// \brief The zero Hessian of dimension n (structured, no pairs).
  static Hessian zero(Index n);
  /// \brief Wraps an explicit n×n² mode-1 matrix.
  static Hessian from_matricized(const SpMat& H1);
  static Hessian from_matricized(const Mat& H1);
  /// \brief Wraps a list of n×n factor pairs.
  static Hessian from_pairs(Index n, std::vector<FactorPair> pairs);

  Index n() const { return n_; }
  Storage storage() const { return storage_; }
  /// \brief True if H(u ⊗ v) = H(v ⊗ u) holds (checked at construction).
  bool symmetric() const { return symmetric_; }
  bool is_zero() const;
  const SpMat& matricized() const { return H1_; }
  const std::vector<FactorPair>& pairs() const { return pairs_; }

  /// \brief Sparse n×n² mode-1 matrix (expanded for structured storage).
  SpMat mode1() const;
  /// \brief Dense mode-mu matricization (small n only).
  Mat dense_mode(int mu) const;
  /// \brief Equivalent factor-pair list (matricized storage yields n pairs).
  std::vector<FactorPair> as_pairs() const;

  /// \brief H(u ⊗ v).
  template <class S>
  VecT<S> apply(const VecT<S>& u, const VecT<S>& v) const;
  /// \brief H^(2)(u ⊗ v).
  template <class S>
  VecT<S> apply_mode2(const VecT<S>& u, const VecT<S>& v) const;
  /// \brief H(U ⊗ V): n × (cols(U)·cols(V)), column a·cols(V)+b = H(u_a ⊗ v_b).
  template <class S>
  MatT<S> apply_cols(const MatT<S>& U, const MatT<S>& V) const;
  /// \brief H^(2)(U ⊗ V) with the same column ordering as apply_cols.
  template <class S>
  MatT<S> apply_mode2_cols(const MatT<S>& U, const MatT<S>& V) const;
  /// \brief Wᵀ H (V ⊗ V). Matricized storage follows the three-step
  ///        mode-product route (Y = H ×1 Wᵀ, Z = Y ×2 Vᵀ, X = Z ×3 Vᵀ);
  ///        structured storage evaluates H(V ⊗ V) row by row from the factor
  ///        pairs and multiplies by Wᵀ.
  template <class S>
  MatT<S> congruence(const MatT<S>& V, const MatT<S>& W) const;

  /// \brief d/dx H(x ⊗ x) = H(I ⊗ x) + H(x ⊗ I) as a sparse n×n matrix.
  SpMat jacobian(const Vec& x) const;

  /// \brief H(P ⊗ Q) Hᵀ for dense n×n P, Q (never forms P ⊗ Q).
  Mat gram(const Mat& P, const Mat& Q) const;
  /// \brief H^(2)(P ⊗ Q) H^(2)ᵀ for dense n×n P, Q.
  Mat gram_mode2(const Mat& P, const Mat& Q) const;

  /// \brief γ·H.
  Hessian scaled(double gamma) const;
  /// \brief ½(H + H·S): symmetric part with identical quadratic form. Returns
  ///        *this unchanged when already symmetric (idempotent).
  Hessian symmetrized() const;
  /// \brief Frobenius norm of the mode-1 matricization.
  double norm() const;

 private:
  bool detect_symmetry() const;

  Index n_ = 0;
  Storage storage_ = Storage::Structured;
  bool symmetric_ = true;
  SpMat H1_;
  std::vector<FactorPair> pairs_;
};

/// \brief Hessian of a stacked state [x; x̂] whose first n1 rows evaluate
///        H1(x ⊗ x) and whose last n2 rows evaluate H2(x̂ ⊗ x̂); this is the
///        error-system Hessian [H·F; Ĥ·F̂], stored structured.
Hessian block_diag(const Hessian& H1, const Hessian& H2);

/// \brief Symmetrizes (free-function form of Hessian::symmetrized).
Hessian symmetrize(const Hessian& h);

}  // namespace qbmor

#endif  // QBMOR_KRON_TENSOR_HPP
