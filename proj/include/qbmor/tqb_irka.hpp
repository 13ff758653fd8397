/// \file tqb_irka.hpp
/// \brief Truncated-H2 quasi-optimal iteration for QB systems: Sylvester-based
///        basis construction from the spectral data of the current reduced
///        model, Petrov-Galerkin projection and fixed-point control.
#ifndef QBMOR_TQB_IRKA_HPP
#define QBMOR_TQB_IRKA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <qbmor/qb_core.hpp>

namespace qbmor {

/// \brief How the first reduced model is chosen.
enum class InitKind { Random, LinearIrka, User };

/// \brief Iteration parameters.
struct IrkaConfig {
  Index r = 2;                  ///< reduced order (1 ≤ r ≤ n)
  double tol = 1e-5;            ///< relative eigenvalue-change tolerance
  int maxit = 100;              ///< maximum number of projections
  double gamma = 1.0;           ///< rescaling factor used for basis construction
  InitKind init = InitKind::Random;
  std::uint64_t seed = 0;       ///< seed of all random choices
  std::optional<ReducedModel> user_init;  ///< used when init == User
  bool reflect_unstable = true; ///< mirror unstable reduced eigenvalues
  double imag_shift = 1e-8;     ///< shift applied to purely imaginary eigenvalues
  double shift = 0.0;           ///< basis construction uses A − shift·I (0: off)
  int stagnation_window = 10;   ///< consecutive increases before damping
};

/// \brief Iteration history and outcome.
struct IrkaReport {
  int iterations = 0;
  std::vector<double> eig_change_history;
  bool converged = false;
  CVec final_eigs;
  double wall_time = 0.0;  ///< seconds (not part of deterministic output)
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
};

/// \brief Complex Sylvester solutions V1, V2, W1, W2 (n×r) for given spectral data.
struct ComplexBases {
  CMat V1, V2, W1, W2;
  CVec lambda;
};

/// \brief Real projection bases: V = V1 + V2, W = W1 + W2 (realified) and
///        their orthonormalized copies; the complex solutions are kept for
///        diagnostics.
struct ProjectionBases {
  Mat V1, V2, W1, W2, V, W;
  Mat Vorth, Worth;
  double cond_WtV = 1.0;  ///< condition number of Worthᵀ Vorth
  ComplexBases complex;
};

/// \brief Solves −V1Λ − AV1 = BB̃ᵀ, −V2Λ − AV2 = H(V1⊗V1)H̃ᵀ + Σ N_kV1Ñ_kᵀ,
///        −W1Λ − AᵀW1 = CᵀC̃, −W2Λ − AᵀW2 = 2H^(2)(V1⊗W1)H̃^(2)ᵀ + Σ N_kᵀW1Ñ_k
///        (E-weighted when sys has E), column by column.
/// \throws Error(SingularShift).
ComplexBases solve_complex_bases(const QBSystem& sys, const SpectralData& sd);

/// \brief Real bases from the spectral data of red: the spectral transform is
///        taken of rescale(red, gamma) and the equations are solved for
///        rescale(sys, gamma).
ProjectionBases solve_bases(const QBSystem& sys, const ReducedModel& red, double gamma = 1.0,
                            bool reflect = true, std::uint64_t seed = 0);
/// \brief Real bases from precomputed spectral data.
ProjectionBases solve_bases(const QBSystem& sys, const SpectralData& sd, std::uint64_t seed = 0);

/// \brief Solutions of the reduced analogues of the basis equations (all r×r).
struct HatBases {
  CMat V1, V2, W1, W2;
  CMat V() const { return V1 + V2; }
  CMat W() const { return W1 + W2; }
};

/// \brief Reduced-order basis equations with (Â, Ĥ, N̂, B̂, Ĉ) in place of the
///        full matrices and the given spectral data (Λ, B̃, C̃, Ñ, H̃).
/// \throws Error(SingularShift) when some −λ_i is an eigenvalue of Â.
HatBases reduced_hat_bases(const ComplexReduced& red, const SpectralData& sd);
/// \brief Same with the spectral data of red itself.
HatBases reduced_hat_bases(const ReducedModel& red, bool reflect = true);

/// \brief Initial reduced model of order r with m inputs and p outputs.
///        Random: Â = −D − 0.1SSᵀ + K (D log-uniform on [0.1, 10], K skew),
///        Ĥ (symmetrized) and N̂_k of Frobenius norm 0.1, B̂, Ĉ standard normal.
///        LinearIrka requires sys and returns the linear fixed point with
///        Ĥ = 0, N̂ = 0.
ReducedModel initial_guess(Index r, Index m, Index p, InitKind kind, std::uint64_t seed,
                           const QBSystem* sys = nullptr);

/// \brief Result of a reduction run.
struct IrkaResult {
  ReducedModel red;
  ProjectionBases bases;
  IrkaReport report;
};

/// \brief Runs the iteration. On reaching maxit the best iterate (smallest
///        eigenvalue change) is returned with report.converged = false.
/// \throws Error(NonDiagonalizable) if a reduced Â stays defective after one
///         perturbed retry; Error(InvalidArgument) for bad configurations.
IrkaResult tqb_irka(const QBSystem& sys, const IrkaConfig& cfg);

/// \brief Relative change max_i |λ_i − μ_i| / |μ_i| between eigenvalue lists
///        under the best of the sorted pairing and an optimal assignment.
double eigenvalue_change(const CVec& lambda_new, const CVec& lambda_old);

/// \brief Optimal assignment (Hungarian method) minimizing Σ cost(i, perm[i]).
std::vector<Index> optimal_assignment(const Mat& cost);

}  // namespace qbmor

#endif  // QBMOR_TQB_IRKA_HPP
