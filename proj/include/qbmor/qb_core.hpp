/// \file qb_core.hpp
/// \brief Quadratic-bilinear (QB) system representation
///        ẋ = Ax + H(x⊗x) + Σ_k N_k x u_k + Bu, y = Cx (optionally E ẋ = ...),
///        Petrov-Galerkin projection, rescaling and right-hand-side evaluation.
#ifndef QBMOR_QB_CORE_HPP
#define QBMOR_QB_CORE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <qbmor/kron_tensor.hpp>
#include <qbmor/matrix_equations.hpp>

namespace qbmor {

/// \brief Full-order QB system. Immutable after construction; the constructor
///        validates dimensions and symmetrizes the Hessian.
class QBSystem {
 public:
  QBSystem() = default;
  /// \param N  one n×n matrix per input (an empty list means all zero)
  /// \param E  optional invertible mass matrix (absent means identity)
  QBSystem(SpMat A, Hessian H, std::vector<SpMat> N, Mat B, Mat C, std::optional<SpMat> E = std::nullopt);

  Index n() const { return A_.rows(); }
  Index m() const { return B_.cols(); }
  Index p() const { return C_.rows(); }
  const SpMat& A() const { return A_; }
  const Hessian& H() const { return H_; }
  const std::vector<SpMat>& N() const { return N_; }
  const Mat& B() const { return B_; }
  const Mat& C() const { return C_; }
  const std::optional<SpMat>& E() const { return E_; }
  bool has_E() const { return E_.has_value(); }
  /// \brief True when H = 0 and all N_k = 0.
  bool is_linear() const;

  /// \brief Free-form labels (model name, parameters, ...), serialized verbatim.
  std::map<std::string, std::string> meta;

 private:
  SpMat A_;
  Hessian H_;
  std::vector<SpMat> N_;
  Mat B_, C_;
  std::optional<SpMat> E_;
};

/// \brief Reduced QB model with dense matrices; Ĥ is r×r² (mode-1) and
///        symmetric as an order-3 tensor. The reduced mass matrix is I.
struct ReducedModel {
  Mat A;
  Mat H;
  std::vector<Mat> N;
  Mat B;
  Mat C;
  std::map<std::string, std::string> meta;

  Index r() const { return A.rows(); }
  /// \brief The reduced model as a (small) QBSystem, e.g. for simulation.
  QBSystem as_system() const;
};

/// \brief Complex-valued reduced model (used by diagnostics in eigen-coordinates).
struct ComplexReduced {
  CMat A;
  CMat H;
  std::vector<CMat> N;
  CMat B;
  CMat C;
  Index r() const { return A.rows(); }
  static ComplexReduced from(const ReducedModel& red);
};

/// \brief Spectral factors of Â and the transformed reduced matrices
///        B̃ = R⁻¹B̂, C̃ = ĈR, Ñ_k = R⁻¹N̂_kR, H̃ = R⁻¹Ĥ(R⊗R).
struct SpectralData {
  SpectralFactors factors;  ///< eigendecomposition of Â
  CVec lambda;              ///< eigenvalues actually used (after reflection)
  CMat Bt, Ct, Ht, Ht2;     ///< B̃, C̃, H̃ (mode-1) and H̃^(2)
  std::vector<CMat> Nt;     ///< Ñ_k
  Index r() const { return lambda.size(); }
};

/// \brief Computes SpectralData for red; eigenvalues with positive real part
///        are mirrored when reflect is set.
SpectralData spectral_transform(const ReducedModel& red, bool reflect = true, double imag_shift = 1e-8,
                                double cond_limit = 1e12);

/// \brief Petrov-Galerkin projection Â = G⁻¹WᵀAV, Ĥ = G⁻¹WᵀH(V⊗V),
///        N̂_k = G⁻¹WᵀN_kV, B̂ = G⁻¹WᵀB, Ĉ = CV with G = WᵀV (WᵀEV if E given).
/// \throws Error(SingularGram) when cond(G) > 1e13.
ReducedModel project(const QBSystem& sys, const Mat& V, const Mat& W);
/// \brief Complex projection with plain transposes (same formulas).
ComplexReduced project(const QBSystem& sys, const CMat& V, const CMat& W);

/// \brief Scaled system with H ← γH, N_k ← γN_k (A, B, C, E unchanged).
QBSystem rescale(const QBSystem& sys, double gamma);
ReducedModel rescale(const ReducedModel& red, double gamma);

/// \brief Ax + H(x⊗x) + Σ N_k x u_k + Bu (the E-free right-hand side).
Vec rhs(const QBSystem& sys, const Vec& x, const Vec& u);
/// \brief A + H(I⊗x) + H(x⊗I) + Σ N_k u_k (= A + 2H(I⊗x) + ... for symmetric H).
SpMat jacobian(const QBSystem& sys, const Vec& x, const Vec& u);

/// \brief Linear transfer function C(sE − A)⁻¹B of the linear part at s.
CMat transfer_function(const QBSystem& sys, cplx s);
/// \brief Derivative d/ds of the linear transfer function at s.
CMat transfer_derivative(const QBSystem& sys, cplx s);

}  // namespace qbmor

#endif  // QBMOR_QB_CORE_HPP
