#include <qbmor/integrator.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/SparseLU>

namespace qbmor {

namespace {

enum class StepStatus { Ok, NewtonFailed, NonFinite };

class Stepper {
 public:
  Stepper(const OdeProblem& p, const IntegratorOptions& o) : p_(p), o_(o) {
    if (p.mass) {
      M_ = *p.mass;
      M_.makeCompressed();
      mass_lu_.compute(M_);
      require(mass_lu_.info() == Eigen::Success, ErrorCode::Unsupported, "integrate: singular mass matrix");
    } else {
      M_ = SpMat(p.n, p.n);
      M_.setIdentity();
    }
  }

  /// ẋ = M⁻¹ f(t, x).
  Vec derivative(double t, const Vec& x) const {
    Vec fx = p_.f(t, x);
    return p_.mass ? Vec(mass_lu_.solve(fx)) : fx;
  }

  /// One TR-BDF2 step of size h from (t, x): a trapezoidal stage to
  /// t + γh followed by a BDF2 stage to t + h (γ = 2 − √2). Both stages solve
  /// M z − d·h·f(t_z, z) = rhs with d = γ/2, so one Newton matrix serves both.
  StepStatus step(double t, const Vec& x, const Vec& xdot, double h, Vec& out, long& newton) const {
    const double g = 2.0 - std::sqrt(2.0);
    const double d = 0.5 * g;
    const double dh = d * h;
    const Vec fx = p_.mass ? Vec(M_ * xdot) : xdot;
    Vec z = x + g * h * xdot;
    const Vec rhs1 = M_ * x + dh * fx;
    Factor lu;
    StepStatus st = solve_stage(t + g * h, dh, rhs1, z, lu, newton);
    if (st != StepStatus::Ok) return st;
    const double c1 = 1.0 / (g * (2.0 - g)), c0 = (1.0 - g) * (1.0 - g) / (g * (2.0 - g));
    const Vec rhs2 = M_ * (c1 * z - c0 * x);
    Vec y = z + (1.0 - g) * h * derivative(t + g * h, z);
    if (!y.allFinite()) y = z;
    st = solve_stage(t + h, dh, rhs2, y, lu, newton);
    if (st != StepStatus::Ok) return st;
    out = std::move(y);
    return StepStatus::Ok;
  }

  double weighted_norm(const Vec& e, const Vec& a, const Vec& b) const {
    double m = 0.0;
    for (Index i = 0; i < e.size(); ++i) {
      const double w = o_.atol + o_.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
      m = std::max(m, std::abs(e[i]) / w);
    }
    return m;
  }

 private:
  using Factor = std::optional<Eigen::SparseLU<SpMat>>;

  /// Modified Newton for M y − dh·f(ts, y) = rhs; the factorization in lu is
  /// reused when present and refreshed once at the current iterate on stalls.
  StepStatus solve_stage(double ts, double dh, const Vec& rhs, Vec& y, Factor& lu, long& newton) const {
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (!lu || attempt > 0) {
        SpMat J = M_ - dh * p_.jacobian(ts, y);
        J.makeCompressed();
        lu.emplace();
        lu->compute(J);
        if (lu->info() != Eigen::Success) {
          lu.reset();
          return StepStatus::NewtonFailed;
        }
      }
      double prev = std::numeric_limits<double>::infinity();
      for (int it = 0; it < o_.max_newton; ++it) {
        ++newton;
        const Vec F = M_ * y - dh * p_.f(ts, y) - rhs;
        if (!F.allFinite()) return StepStatus::NonFinite;
        const Vec delta = lu->solve(F);
        y -= delta;
        if (!y.allFinite()) return StepStatus::NonFinite;
        const double nd = weighted_norm(delta, y, y);
        if (nd <= 1e-3) return StepStatus::Ok;
        if (it > 0 && nd > 0.9 * prev) break;  // stalled
        prev = nd;
      }
    }
    return StepStatus::NewtonFailed;
  }
  const OdeProblem& p_;
  const IntegratorOptions& o_;
  SpMat M_;
  Eigen::SparseLU<SpMat> mass_lu_;
};

Vec hermite(double t0, const Vec& x0, const Vec& d0, double t1, const Vec& x1, const Vec& d1, double ts) {
  const double h = t1 - t0;
  const double s = (ts - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * x0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * x1 + (s3 - s2) * h * d1;
}

}  // namespace

Trajectory integrate(const OdeProblem& prob, const Vec& x0, double T, Index samples, const IntegratorOptions& opts,
                     bool keep_states) {
  require(T > 0.0, ErrorCode::InvalidArgument, "integrate: T must be positive");
  require(samples >= 2, ErrorCode::InvalidArgument, "integrate: at least two samples required");
  require(x0.size() == prob.n && prob.output.cols() == prob.n, ErrorCode::DimensionMismatch,
          "integrate: state/output dimension mismatch");
  const Stepper stepper(prob, opts);
  Trajectory tr;
  tr.times = Vec::LinSpaced(samples, 0.0, T);
  tr.times[samples - 1] = T;
  tr.outputs.resize(prob.output.rows(), samples);
  if (keep_states) tr.states.resize(prob.n, samples);

  auto record = [&](Index j, const Vec& x) {
    tr.outputs.col(j) = prob.output * x;
    if (keep_states) tr.states.col(j) = x;
  };

  double t = 0.0;
  Vec x = x0;
  Vec xd = stepper.derivative(t, x);
  require(xd.allFinite(), ErrorCode::NonFiniteState, "integrate: non-finite initial derivative");
  record(0, x);
  Index next = 1;
  const double h_max = opts.h_max > 0.0 ? opts.h_max : T / 10.0;
  double h = opts.h_init > 0.0 ? opts.h_init : 1e-4 * T;

  while (next < samples) {
    if (tr.steps + tr.rejected >= opts.max_steps)
      throw Error(ErrorCode::NewtonDivergence, "integrate: step budget exhausted");
    h = std::min({h, h_max, T - t});
    const bool final_step = (t + h >= T);
    Vec x_full, x_half, x_two;
    StepStatus st = stepper.step(t, x, xd, h, x_full, tr.newton_iterations);
    if (st == StepStatus::Ok) st = stepper.step(t, x, xd, 0.5 * h, x_half, tr.newton_iterations);
    if (st == StepStatus::Ok) {
      const Vec xd_half = stepper.derivative(t + 0.5 * h, x_half);
      st = xd_half.allFinite() ? stepper.step(t + 0.5 * h, x_half, xd_half, 0.5 * h, x_two, tr.newton_iterations)
                               : StepStatus::NonFinite;
    }
    if (st != StepStatus::Ok) {
      ++tr.rejected;
      h *= 0.25;
      if (h < opts.h_min)
        throw Error(st == StepStatus::NonFinite ? ErrorCode::NonFiniteState : ErrorCode::NewtonDivergence,
                    "integrate: step size fell below the minimum at t = " + std::to_string(t));
      continue;
    }
    const double err = stepper.weighted_norm(x_two - x_full, x, x_two) / 3.0;
    if (!(err <= 1.0)) {
      ++tr.rejected;
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::cbrt(1.0 / err)) : 0.2;
      h *= fac;
      if (h < opts.h_min)
        throw Error(ErrorCode::NewtonDivergence,
                    "integrate: error control drove the step below the minimum at t = " + std::to_string(t));
      continue;
    }
    const double t_new = final_step ? T : t + h;
    // Local Richardson extrapolation of the two second-order results.
    x_two += (x_two - x_full) / 3.0;
    const Vec xd_new = stepper.derivative(t_new, x_two);
    if (!xd_new.allFinite()) throw Error(ErrorCode::NonFiniteState, "integrate: non-finite state");
    while (next < samples && tr.times[next] <= t_new) {
      if (tr.times[next] == t_new) record(next, x_two);
      else record(next, hermite(t, x, xd, t_new, x_two, xd_new, tr.times[next]));
      ++next;
    }
    ++tr.steps;
    t = t_new;
    x = x_two;
    xd = xd_new;
    const double fac = err > 0.0 ? std::min(2.0, std::max(0.2, 0.9 * std::cbrt(1.0 / err))) : 2.0;
    h *= fac;
  }
  return tr;
}

}  // namespace qbmor
