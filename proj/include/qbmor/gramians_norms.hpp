/// \file gramians_norms.hpp
/// \brief Truncated and quadratic-type Gramians of QB systems and the H2-type
///        norms built on them, including the truncated H2 norm of the error
///        system between a full and a reduced model.
#ifndef QBMOR_GRAMIANS_NORMS_HPP
#define QBMOR_GRAMIANS_NORMS_HPP

#include <qbmor/qb_core.hpp>

namespace qbmor {

/// \brief Linear Gramians P_l, Q_l and truncated Gramians P_T, Q_T:
///   A P_l + P_l Aᵀ + BBᵀ = 0,  Aᵀ Q_l + Q_l A + CᵀC = 0,
///   A P_T + P_T Aᵀ + Σ N_k P_l N_kᵀ + H(P_l⊗P_l)Hᵀ + BBᵀ = 0,
///   Aᵀ Q_T + Q_T A + Σ N_kᵀ Q_l N_k + H^(2)(P_l⊗Q_l)H^(2)ᵀ + CᵀC = 0.
struct GramianBundle {
  Mat Pl, Ql, PT, QT;
};

/// \throws Error(NotStable) if A is not Hurwitz; Error(Unsupported) if E is set.
GramianBundle truncated_gramians(const QBSystem& sys);

/// \brief Quadratic-type Gramians from Picard iteration seeded at P_l:
///   P ← lyap(A, H(P⊗P)Hᵀ + Σ N_k P N_kᵀ + BBᵀ), then with the converged P
///   Q ← lyap(Aᵀ, H^(2)(P⊗Q)H^(2)ᵀ + Σ N_kᵀ Q N_k + CᵀC),
///   stopping when ‖X_new − X‖_F ≤ tol·‖X_new‖_F.
struct QuadraticGramians {
  Mat P, Q;
  int iterations_P = 0;
  int iterations_Q = 0;
};

/// \throws Error(NoConvergence) after maxit sweeps or on divergence.
QuadraticGramians quadratic_gramians(const QBSystem& sys, double tol = 1e-10, int maxit = 50);

/// \brief A norm together with its dual-trace counterpart.
struct NormReport {
  double value = 0.0;    ///< sqrt(trace(C X Cᵀ)) with the controllability Gramian
  double dual = 0.0;     ///< sqrt(trace(Bᵀ Y B)) with the observability Gramian
  double rel_gap = 0.0;  ///< |value² − dual²| / max(value², dual², tiny)
};

/// \brief Truncated H2 norm from the truncated Gramians (three leading
///        Volterra kernels).
NormReport truncated_h2_norm(const QBSystem& sys);
/// \brief Squared truncated H2 norm via trace(C P_T Cᵀ), without the square
///        root (useful when the norm is at round-off level).
double truncated_h2_norm_squared(const QBSystem& sys);

/// \brief H2 norm from the quadratic-type Gramians.
/// \throws Error(NoConvergence) as quadratic_gramians.
NormReport h2_norm(const QBSystem& sys, double tol = 1e-10, int maxit = 50);

/// \brief Error system with state [x; x̂]: A^e = blkdiag(A, Â),
///        H^e = [H·F; Ĥ·F̂] (structured), N^e_k = blkdiag(N_k, N̂_k),
///        B^e = [B; B̂], C^e = [C, −Ĉ].
QBSystem error_system(const QBSystem& sys, const ReducedModel& red);

/// \brief Truncated H2 norm of the error system.
/// \throws Error(NotStable) if A or Â is not Hurwitz.
NormReport truncated_h2_error(const QBSystem& sys, const ReducedModel& red);

}  // namespace qbmor

#endif  // QBMOR_GRAMIANS_NORMS_HPP
