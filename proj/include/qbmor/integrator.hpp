/// \file integrator.hpp
/// \brief Adaptive L-stable TR-BDF2 integrator (trapezoidal stage followed by
///        a BDF2 stage) for stiff ODEs M ẋ = f(t, x), with modified Newton
///        iterations on a sparse Jacobian, step-doubling error control and
///        cubic Hermite dense output.
#ifndef QBMOR_INTEGRATOR_HPP
#define QBMOR_INTEGRATOR_HPP

#include <functional>
#include <optional>

#include <qbmor/errors.hpp>
#include <qbmor/types.hpp>

namespace qbmor {

/// \brief An initial-value problem M ẋ = f(t, x), y = output · x.
struct OdeProblem {
  Index n = 0;
  std::function<Vec(double, const Vec&)> f;
  std::function<SpMat(double, const Vec&)> jacobian;  ///< ∂f/∂x
  std::optional<SpMat> mass;                          ///< M (identity when absent)
  Mat output;                                         ///< p×n output map
};

/// \brief Step-size control parameters.
struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 0.0;   ///< initial step (0: 1e-4·T)
  double h_min = 1e-12;  ///< abort threshold for repeated step halving
  double h_max = 0.0;    ///< maximum step (0: T/10)
  int max_newton = 12;
  long max_steps = 50'000'000;
};

/// \brief Sampled solution.
struct Trajectory {
  Vec times;       ///< sample times (strictly increasing)
  Mat outputs;     ///< p × samples
  Mat states;      ///< n × samples (empty unless requested)
  long steps = 0;  ///< accepted steps
  long rejected = 0;
  long newton_iterations = 0;
};

/// \brief Integrates from x0 at t = 0 to T and samples the output at
///        `samples` equidistant times 0, T/(samples−1), ..., T.
/// \throws Error(NewtonDivergence) when the step size falls below h_min;
///         Error(NonFiniteState) when the state becomes non-finite at h_min.
Trajectory integrate(const OdeProblem& prob, const Vec& x0, double T, Index samples,
                     const IntegratorOptions& opts = {}, bool keep_states = false);

}  // namespace qbmor

#endif  // QBMOR_INTEGRATOR_HPP
