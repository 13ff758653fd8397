/// \file benchmarks.hpp
/// \brief Benchmark QB models (Chafee-Infante and FitzHugh-Nagumo, both lifted
///        from cubic to quadratic-bilinear form), canonical input signals,
///        simulation of full and reduced models, and output error metrics.
#ifndef QBMOR_BENCHMARKS_HPP
#define QBMOR_BENCHMARKS_HPP

#include <functional>
#include <ostream>
#include <string>

#include <qbmor/integrator.hpp>
#include <qbmor/qb_core.hpp>

namespace qbmor {

/// \brief A named input signal t ↦ u(t) ∈ R^m.
struct InputSignal {
  std::string kind;
  Index m = 1;
  std::function<Vec(double)> eval;

  Vec operator()(double t) const { return eval(t); }

  /// u₁(t) = (1 + sin(πt)) e^{−t/5} (Chafee-Infante, m = 1).
  static InputSignal ci_u1();
  /// u₂(t) = 25 (1 + sin(πt)) (Chafee-Infante, m = 1).
  static InputSignal ci_u2();
  /// (i₀(t), 1) with i₀(t) = 50 (sin(2πt) − 1) (FitzHugh-Nagumo, m = 2).
  static InputSignal fhn_i0_sin();
  /// (i₀(t), 1) with i₀(t) = 5·10⁴ t³ e^{−15t} (FitzHugh-Nagumo, m = 2).
  static InputSignal fhn_i0_bump();
  /// Constant input.
  static InputSignal constant(const Vec& value);
  /// Piecewise-linear interpolation of a table (times increasing, values m×len),
  /// held constant outside the table range.
  static InputSignal table(const Vec& times, const Mat& values);
  /// The signal γ·u(t).
  InputSignal scaled(double gamma) const;
  /// Looks up a named signal: ci_u1, ci_u2, fhn_i0_sin, fhn_i0_bump.
  /// \throws Error(InvalidArgument) for unknown names.
  static InputSignal by_name(const std::string& name);
};

/// \brief Chafee-Infante v_t + v³ = v_xx + v on (0, 1), v(0, t) = u(t),
///        v_x(1, t) = 0, lifted with w = v²; n = 2k, m = p = 1, structured Hessian.
/// \throws Error(InvalidArgument) if k < 3.
QBSystem chafee_infante(Index k);

/// \brief FitzHugh-Nagumo εv_t = ε²v_xx + v(v − 0.1)(1 − v) − w + q,
///        w_t = 0.5 v − 2 w + q on (0, 0.3), v_x(0, t) = i₀(t), v_x(L, t) = 0,
///        lifted with z = v²; n = 3k, inputs (i₀, 1), outputs (v(0), w(0)).
/// \throws Error(InvalidArgument) if k < 3.
QBSystem fitzhugh_nagumo(Index k);

/// \brief The unlifted cubic FitzHugh-Nagumo ODE (state (v; w), n = 2k) driven
///        by u, with the same outputs as the lifted model.
OdeProblem fitzhugh_nagumo_cubic(Index k, const InputSignal& u);

/// \brief ODE problem of a QB system driven by u.
OdeProblem ode_problem(const QBSystem& sys, const InputSignal& u);

/// \brief Simulates from x(0) = x0 (zero when empty) on [0, T] with outputs at
///        `samples` equidistant points.
Trajectory simulate(const QBSystem& sys, const InputSignal& u, double T, Index samples = 500,
                    const IntegratorOptions& opts = {}, bool keep_states = false, const Vec& x0 = Vec());
Trajectory simulate(const ReducedModel& red, const InputSignal& u, double T, Index samples = 500,
                    const IntegratorOptions& opts = {}, bool keep_states = false);

/// \brief Relative output errors: mean_t ‖y − ŷ‖₂ / max_t ‖y‖₂ and
///        max_t ‖y − ŷ‖₂ / max_t ‖y‖₂.
struct OutputErrors {
  double mean_rel = 0.0;
  double linf_rel = 0.0;
};
/// \throws Error(GridMismatch) if the sample grids or output counts differ.
OutputErrors output_errors(const Trajectory& y, const Trajectory& yhat);

/// \brief Writes "t,y_1,...,y_p" rows with 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& tr);

/// \brief max_t ‖w − v∘v‖∞ / (1 + max_t ‖v‖∞²) for a trajectory with states,
///        where v = states[v_offset : v_offset+k], w = states[w_offset : w_offset+k].
double lift_residual(const Trajectory& tr, Index k, Index v_offset, Index w_offset);

}  // namespace qbmor

#endif  // QBMOR_BENCHMARKS_HPP
