/// \file diagnostics.hpp
/// \brief First-order optimality diagnostics of a reduced QB model: the
///        left-hand sides Φ_X of the interpolation-type optimality conditions,
///        their reduced counterparts, the perturbations ε_X = Φ_X − Φ̂_X, the
///        auxiliary Sylvester solves that express them, and relative measures
///        E_X = ‖ε_X‖₂ / ‖Φ_X‖₂.
///
/// All quantities live in the eigen-coordinates of the reduced Â (complex
/// arithmetic, plain transposes). The reduced side is evaluated with the model
/// obtained by projecting the (γ-scaled) full system onto the raw bases
/// V = V1 + V2, W = W1 + W2 built from the spectral data of the given
/// reduced model; at a fixed point of the iteration that model is similar to
/// the given one (see ResidualReport::fixed_point_gap).
#ifndef QBMOR_DIAGNOSTICS_HPP
#define QBMOR_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include <qbmor/tqb_irka.hpp>

namespace qbmor {

/// \brief Optimality-condition sides and relative perturbation measures.
///
/// A family whose Φ_X vanishes identically (for instance Φ_N and Φ_H when the
/// output does not observe the states that N and H drive) is measured against
/// the reduced-side factor scale instead (see relative_measure), and a note is
/// recorded.
///
/// Layouts: Φ_C is r×p with Φ_C(i,j) = (CV)(j,i); Φ_B is r×m with
/// Φ_B(i,j) = (BᵀW)(j,i); Φ_N is the mode-1 matricization r×(r·m) with column
/// j + k·r holding W1(:,i)ᵀN_kV1(:,j); Φ_H is r×r² with column j·r + l holding
/// W1(:,i)ᵀH(V1(:,j)⊗V1(:,l)); Φ_Λ(i) = W1(:,i)ᵀV(:,i) + W2(:,i)ᵀV1(:,i).
struct ResidualReport {
  double E_C = 0.0, E_B = 0.0, E_N = 0.0, E_H = 0.0, E_lambda = 0.0;
  CMat Phi_C, Phi_B, Phi_N, Phi_H;
  CVec Phi_lambda;
  CMat Eps_C, Eps_B, Eps_N, Eps_H;
  CVec Eps_lambda;
  double fixed_point_gap = 0.0;  ///< eigenvalue change between red and the raw projection
  bool degraded = false;         ///< reduced-side solves failed; E_X are NaN
  std::vector<std::string> notes;
};

/// \brief Everything the diagnostics are computed from.
struct DiagnosticData {
  QBSystem sys_scaled;     ///< rescale(sys, gamma)
  SpectralData sd;         ///< spectral data of rescale(red, gamma)
  ComplexBases full;       ///< V1, V2, W1, W2 of sys_scaled
  ComplexReduced red_raw;  ///< projection of sys_scaled onto V, W
  HatBases hat;            ///< reduced-side bases of red_raw
  bool hat_ok = true;
};

/// \brief Builds DiagnosticData. E ≠ I is not supported (Unsupported).
DiagnosticData diagnostic_data(const QBSystem& sys, const ReducedModel& red, double gamma = 1.0,
                               bool reflect = true);

/// \brief Φ_X, Φ̂_X, ε_X = Φ_X − Φ̂_X and E_X.
ResidualReport optimality_residuals(const DiagnosticData& data);
ResidualReport optimality_residuals(const QBSystem& sys, const ReducedModel& red, double gamma = 1.0,
                                    bool reflect = true);

/// \brief Solutions of the perturbation equations (G = WᵀV, Π = VG⁻¹Wᵀ):
///   ε_vΛ + ΠA ε_v = (Π − Π_v)(AV1 + BB̃ᵀ)                  (ε_v = V1 − V V̂1),
///   ε_wΛ + ΠᵀAᵀε_w = (Πᵀ − Π_w)(AᵀW1 + CᵀC̃)              (ε_w = W1 − W G⁻ᵀŴ1),
///   Γ_vΛ + ÂΓ_v = G⁻¹Wᵀ[Σ N_kε_vÑ_kᵀ + H(ε_v⊗V1 + V1⊗ε_v − ε_v⊗ε_v)H̃ᵀ]     (Γ_v = V̂ − I),
///   Γ_wΛ + ÂᵀΓ_w = Vᵀ[Σ N_kᵀε_wÑ_k + 2H^(2)(ε_v⊗W1 + V1⊗ε_w − ε_v⊗ε_w)H̃^(2)ᵀ] (Γ_w = Ŵ − VᵀW),
/// with Π_v = V1(WᵀV1)⁻¹Wᵀ, Π_w = W1(VᵀW1)⁻¹Vᵀ and Â the raw projection.
struct PerturbationSolution {
  CMat eps_v, eps_w, Gamma_v, Gamma_w;
};

/// \throws Error(ProjectorSingular) if WᵀV1 or VᵀW1 has condition > 1e13;
///         Error(SingularShift) if a shifted operator is singular.
PerturbationSolution perturbation_solves(const DiagnosticData& data);

/// \brief ε_X assembled from a PerturbationSolution by the closed-form
///        expressions (ε_C = −(CVΓ_v)ᵀ, ε_B = −Γ_wᵀG⁻¹WᵀB, ε_N, ε_H, ε_Λ);
///        Φ_X are filled as in optimality_residuals.
ResidualReport perturbation_formulas(const DiagnosticData& data, const PerturbationSolution& sol);

/// \brief Maximum relative discrepancy per family between the Sylvester route
///        and the explicit Kronecker-form route.
struct BruteforceReport {
  double rel_C = 0.0, rel_B = 0.0, rel_N = 0.0, rel_H = 0.0, rel_lambda = 0.0;
  double max() const;
};

/// \brief Recomputes V1, V2, W1, W2 from the vectorized Kronecker systems
///        (−Λ⊗I − I⊗A) vec X = ... and compares Φ_X.
/// \throws Error(TooLarge) when n > 30 or r > 4.
BruteforceReport verify_against_bruteforce(const QBSystem& sys, const ReducedModel& red, double gamma = 1.0,
                                           bool reflect = true);

/// \brief Relative measure ‖num‖₂/‖den‖₂ with a zero-denominator guard. The
///        denominator counts as vanishing when ‖den‖₂ ≤ max(floor, 1e-13·scale);
///        the measure is then ‖num‖₂/scale (the perturbation relative to the
///        magnitude of the factors that produce it) when scale > 0, otherwise
///        0 if ‖num‖₂ ≤ floor and +∞ if not.
double relative_measure(const CMat& num, const CMat& den, double floor, double scale = 0.0);

}  // namespace qbmor

#endif  // QBMOR_DIAGNOSTICS_HPP
