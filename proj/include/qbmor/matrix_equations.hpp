/// \file matrix_equations.hpp
/// \brief Spectral decomposition, Lyapunov solver (Bartels-Stewart on a Schur
///        form), column-decoupled Sylvester solver for diagonal right
///        coefficients, and basis utilities.
#ifndef QBMOR_MATRIX_EQUATIONS_HPP
#define QBMOR_MATRIX_EQUATIONS_HPP

#include <random>
#include <vector>

#include <qbmor/errors.hpp>
#include <qbmor/types.hpp>

namespace qbmor {

/// \brief Â = R diag(Λ) R⁻¹ with Λ sorted as in eigen_order.
struct SpectralFactors {
  CMat R;
  CMat Rinv;
  CVec lambda;
  double cond = 1.0;  ///< 2-norm condition number of R
};

/// \brief Eigendecomposition of a real square matrix.
/// \throws Error(NonDiagonalizable) when cond(R) > cond_limit.
SpectralFactors spectral_decompose(const Mat& A, double cond_limit = 1e12);

/// \brief Permutation that sorts eigenvalues by (real part, |imaginary part|,
///        imaginary part); conjugate pairs are adjacent with Im < 0 first.
std::vector<Index> eigen_order(const CVec& lambda);

/// \brief Solves A X + X Aᵀ + Q = 0 for Hurwitz A; the result is symmetrized.
/// \throws Error(NotStable) if some eigenvalue of A has nonnegative real part.
Mat solve_lyapunov(const Mat& A, const Mat& Q);

/// \brief Solves −E V diag(Λ) − A V = Rhs column-wise as
///        v_i = −(A + λ_i E)⁻¹ rhs_i (E = I when null). With transpose=true
///        the operators Aᵀ, Eᵀ are used instead. Columns whose shift and
///        right-hand side are the exact conjugates of the previous column are
///        returned as exact conjugates.
/// \throws Error(SingularShift) when a shifted matrix is numerically singular.
CMat solve_sylvester_shifted(const SpMat& A, const CVec& lambda, const CMat& rhs,
                             const SpMat* E = nullptr, bool transpose = false);
/// \brief Dense counterpart of solve_sylvester_shifted (complex A allowed).
CMat solve_sylvester_shifted(const CMat& A, const CVec& lambda, const CMat& rhs);

/// \brief Reflects eigenvalues with positive real part to the left half plane
///        and shifts purely imaginary ones by −imag_shift.
CVec reflect_unstable(const CVec& lambda, double imag_shift = 1e-8);

/// \brief Real basis spanning the same real space as the complex columns of
///        Vc: real λ keep Re v; a conjugate pair (adjacent) is replaced by
///        (Re v, Im v) of its first member.
/// \throws Error(PairingViolation) if a non-real λ is not followed by its conjugate.
Mat realify_basis(const CMat& Vc, const CVec& lambda);

/// \brief Transformation T with realify_basis(Vc) = Vc · T (r×r, complex).
CMat realify_transform(const CVec& lambda);

/// \brief Symmetric PSD square root factor L (n×k) with P ≈ L Lᵀ obtained by
///        eigendecomposition; eigenvalues below n·eps·max|λ| are clipped at 0 and
///        columns for zero eigenvalues are dropped.
Mat psd_factor(const Mat& P);

/// \brief Orthonormal basis of range(V) by column-pivoted QR; if the numerical
///        rank is below cols(V), the basis is padded with random orthonormal
///        complements drawn from rng and *padded is set.
Mat orth(const Mat& V, std::mt19937_64& rng, bool* padded = nullptr);

/// \brief 2-norm condition number via SVD.
double cond2(const Mat& A);
double cond2(const CMat& A);

/// \brief Spectral abscissa max Re λ(A).
double spectral_abscissa(const Mat& A);

}  // namespace qbmor

#endif  // QBMOR_MATRIX_EQUATIONS_HPP
