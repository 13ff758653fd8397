/// \file support.hpp
/// \brief Shared fixtures and independent oracles for the qbmor tests: random
///        stable QB systems, explicit Kronecker products (Eigen's
///        KroneckerProduct module, not the library's helpers), and a
///        matrix-exponential quadrature for the truncated H2 norm.
#ifndef QBMOR_TESTS_SUPPORT_HPP
#define QBMOR_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <qbmor/qb_core.hpp>

namespace qbmor::test {

/// \brief Standard normal matrix.
inline Mat randn(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = nd(rng);
  return M;
}

inline Vec randn(Index n, std::mt19937_64& rng) { return randn(n, 1, rng).col(0); }

/// \brief Explicit Kronecker product via Eigen's unsupported module.
template <class Derived1, class Derived2>
auto kron_oracle(const Eigen::MatrixBase<Derived1>& X, const Eigen::MatrixBase<Derived2>& Y) {
  using S = typename Derived1::Scalar;
  return MatT<S>(Eigen::kroneckerProduct(X.derived().eval(), Y.derived().eval()).eval());
}

/// \brief Column-major vec.
template <class Derived>
auto vec_oracle(const Eigen::MatrixBase<Derived>& X) {
  using S = typename Derived::Scalar;
  MatT<S> Xe = X;
  return VecT<S>(Eigen::Map<const VecT<S>>(Xe.data(), Xe.size()));
}

/// \brief Hurwitz matrix −(αI + SSᵀ/n) + (K − Kᵀ)/2: Re λ ≤ −α.
inline Mat random_stable(Index n, std::mt19937_64& rng, double alpha = 1.0, double spread = 1.0) {
  const Mat S = randn(n, n, rng);
  const Mat K = randn(n, n, rng);
  return -(alpha * Mat::Identity(n, n) + spread * S * S.transpose() / static_cast<double>(n)) +
         0.5 * (K - K.transpose());
}

/// \brief Dense random n×n² Hessian with Frobenius norm `scale` (not symmetrized).
inline Mat random_hessian(Index n, std::mt19937_64& rng, double scale) {
  Mat H = randn(n, n * n, rng);
  return scale * H / H.norm();
}

/// \brief Dense symmetric part ½(H + H·S) computed entrywise from the tensor
///        definition X(i,j,k) = H(i, j + k·n).
inline Mat symmetric_part(const Mat& H) {
  const Index n = H.rows();
  Mat out(n, n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) out(i, j + k * n) = 0.5 * (H(i, j + k * n) + H(i, k + j * n));
  return out;
}

/// \brief Random QB system with dense (matricized) Hessian.
inline QBSystem random_qb(Index n, Index m, Index p, std::mt19937_64& rng, double hscale = 0.5,
                          double nscale = 0.5, double alpha = 1.0) {
  const Mat A = random_stable(n, rng, alpha);
  const Mat H = random_hessian(n, rng, hscale);
  std::vector<SpMat> N;
  for (Index k = 0; k < m; ++k) {
    Mat Nk = randn(n, n, rng);
    N.push_back((nscale * Nk / Nk.norm()).sparseView());
  }
  return QBSystem(A.sparseView(), Hessian::from_matricized(H), N, randn(n, m, rng), randn(p, n, rng));
}

/// \brief Linear random system (H = 0, N = 0).
inline QBSystem random_linear(Index n, Index m, Index p, std::mt19937_64& rng, double alpha = 0.5) {
  const Mat A = random_stable(n, rng, alpha);
  return QBSystem(A.sparseView(), Hessian::zero(n), {}, randn(n, m, rng), randn(p, n, rng));
}

/// \brief Squared truncated H2 norm from the kernel definition
///          Σ_{i=1}^{3} ∫…∫ ‖f_i(t_1,…,t_i)‖_F² dt,
///        f_1 = C e^{At₁}B, f_2 = C e^{At₂}[N_1..N_m](I⊗e^{At₁}B),
///        f_3 = C e^{At₃}H(e^{At₂}B ⊗ e^{At₁}B),
///        evaluated with matrix exponentials on composite Gauss-Legendre grids
///        over [0, T*], T* = 40/|Re λ_max(A)|. The outermost integral is
///        separated as ∫ ‖C e^{At}X‖² dt = trace(Xᵀ M X) with
///        M = ∫ e^{Aᵀt}CᵀC e^{At} dt (same quadrature, no Lyapunov solve).
///        Panels are doubled until two successive values agree to 1e-8.
class KernelQuadrature {
 public:
  explicit KernelQuadrature(const QBSystem& sys) : sys_(sys) {}

  double value() const {
    const Mat A = Mat(sys_.A());
    const Eigen::EigenSolver<Mat> es(A);
    const double abscissa = es.eigenvalues().real().maxCoeff();
    const double T = 40.0 / std::abs(abscissa);
    double prev = -1.0;
    for (int panels = 32; panels <= 4096; panels *= 2) {
      const double v = evaluate(A, T, panels);
      if (prev > 0.0 && std::abs(v - prev) <= 1e-8 * std::abs(v)) return v;
      prev = v;
    }
    return prev;
  }

 private:
  double evaluate(const Mat& A, double T, int panels) const {
    // 8-point Gauss-Legendre rule on [-1, 1].
    static const double x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                0.7966664774136267,  0.9602898564975363};
    static const double w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                0.2223810344533745, 0.1012285362903763};
    const double hp = T / panels;
    std::vector<double> t, wt;
    for (int p = 0; p < panels; ++p)
      for (int q = 0; q < 8; ++q) {
        t.push_back(hp * (p + 0.5 * (x[q] + 1.0)));
        wt.push_back(0.5 * hp * w[q]);
      }
    const Index n = A.rows();
    const Mat B = sys_.B(), C = sys_.C();
    const Mat H1 = Mat(sys_.H().mode1());
    std::vector<Mat> E(t.size());
    Mat M = Mat::Zero(n, n);
    for (std::size_t a = 0; a < t.size(); ++a) {
      E[a] = (A * t[a]).exp();
      const Mat CE = C * E[a];
      M += wt[a] * CE.transpose() * CE;
    }
    double r1 = (B.transpose() * M * B).trace();
    double r2 = 0.0;
    for (std::size_t a = 0; a < t.size(); ++a) {
      const Mat EB = E[a] * B;
      for (const SpMat& Nk : sys_.N()) {
        const Mat X = Mat(Nk) * EB;
        r2 += wt[a] * (X.transpose() * M * X).trace();
      }
    }
    double r3 = 0.0;
    if (!sys_.H().is_zero()) {
      std::vector<Mat> EB(t.size());
      for (std::size_t a = 0; a < t.size(); ++a) EB[a] = E[a] * B;
      for (std::size_t a = 0; a < t.size(); ++a)
        for (std::size_t b = 0; b < t.size(); ++b) {
          const Mat X = H1 * kron_oracle(EB[b], EB[a]);
          r3 += wt[a] * wt[b] * (X.transpose() * M * X).trace();
        }
    }
    return r1 + r2 + r3;
  }

  const QBSystem& sys_;
};

/// \brief Relative difference ‖a − b‖_F / max(‖b‖_F, tiny).
template <class D1, class D2>
double rel_diff(const Eigen::MatrixBase<D1>& a, const Eigen::MatrixBase<D2>& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace qbmor::test

#endif  // QBMOR_TESTS_SUPPORT_HPP
