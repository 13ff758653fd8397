/// \file reduction_baselines.hpp
/// \brief Square-root balanced truncation of QB systems based on the
///        truncated Gramians.
#ifndef QBMOR_REDUCTION_BASELINES_HPP
#define QBMOR_REDUCTION_BASELINES_HPP

#include <qbmor/gramians_norms.hpp>

namespace qbmor {

/// \brief Reduced model and the singular values of L_Qᵀ L_P (non-increasing).
struct BalancedTruncation {
  ReducedModel red;
  Vec hsv;
  Mat V, W;  ///< projection bases with WᵀV = I_r
};

/// \brief P_T = L_P L_Pᵀ, Q_T = L_Q L_Qᵀ (eigen square roots), L_QᵀL_P = UΣZᵀ,
///        V = L_P Z_r Σ_r^{-1/2}, W = L_Q U_r Σ_r^{-1/2}, reduced model = project(sys, V, W).
///        With gamma ≠ 1 the Gramians are those of the rescaled system
///        (H → γH, N_k → γN_k, B → B/γ), which has the same input-output map
///        but balances the linear and nonlinear contributions differently; the
///        original matrices are projected, as in TQB-IRKA.
/// \throws Error(NotStable); Error(RankDeficient) if σ_r < 1e-14·σ_1 or fewer
///         than r singular values exist; Error(NonPositiveGamma) if gamma ≤ 0.
BalancedTruncation balanced_truncation(const QBSystem& sys, Index r, double gamma = 1.0);

}  // namespace qbmor

#endif  // QBMOR_REDUCTION_BASELINES_HPP
