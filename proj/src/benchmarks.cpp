#include <qbmor/benchmarks.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace qbmor {

namespace {

using Trip = Eigen::Triplet<double>;

/// n×n matrix with entries (rows[i], cols[i]) = vals[i].
SpMat from_triplets(Index n, const std::vector<Trip>& t) {
  SpMat M(n, n);
  M.setFromTriplets(t.begin(), t.end());
  M.makeCompressed();
  return M;
}

/// Selector with row (row0 + i) picking column (col0 + i) scaled by s, i < k.
SpMat selector(Index n, Index k, Index row0, Index col0, double s) {
  std::vector<Trip> t;
  for (Index i = 0; i < k; ++i) t.emplace_back(row0 + i, col0 + i, s);
  return from_triplets(n, t);
}

/// Row (row0 + i) evaluates (Xv)_i = v_{i−1} + v_{i+1} (neighbours inside the block at col0).
SpMat neighbour_sum(Index n, Index k, Index row0, Index col0) {
  std::vector<Trip> t;
  for (Index i = 0; i < k; ++i) {
    if (i > 0) t.emplace_back(row0 + i, col0 + i - 1, 1.0);
    if (i + 1 < k) t.emplace_back(row0 + i, col0 + i + 1, 1.0);
  }
  return from_triplets(n, t);
}

/// Adds s·(Ax)∘(Bx) as the two symmetric factor pairs (½sA, B) and (½sB, A).
void add_symmetric(std::vector<FactorPair>& pairs, const SpMat& A, const SpMat& B, double s) {
  pairs.push_back({SpMat(0.5 * s * A), B});
  pairs.push_back({SpMat(0.5 * s * B), A});
}

/// Finite-difference Laplacian diagonal for the cell/node layouts used below.
Vec laplacian_diagonal(Index k, double h, bool left_neumann) {
  Vec d = Vec::Constant(k, -2.0 / (h * h));
  d[k - 1] = -1.0 / (h * h);
  if (left_neumann) d[0] = -1.0 / (h * h);
  return d;
}

}  // namespace

InputSignal InputSignal::ci_u1() {
  return {"ci_u1", 1, [](double t) {
            Vec u(1);
            u[0] = (1.0 + std::sin(std::numbers::pi * t)) * std::exp(-t / 5.0);
            return u;
          }};
}

InputSignal InputSignal::ci_u2() {
  return {"ci_u2", 1, [](double t) {
            Vec u(1);
            u[0] = 25.0 * (1.0 + std::sin(std::numbers::pi * t));
            return u;
          }};
}

InputSignal InputSignal::fhn_i0_sin() {
  return {"fhn_i0_sin", 2, [](double t) {
            Vec u(2);
            u << 50.0 * (std::sin(2.0 * std::numbers::pi * t) - 1.0), 1.0;
            return u;
          }};
}

InputSignal InputSignal::fhn_i0_bump() {
  return {"fhn_i0_bump", 2, [](double t) {
            Vec u(2);
            u << 5e4 * t * t * t * std::exp(-15.0 * t), 1.0;
            return u;
          }};
}

InputSignal InputSignal::constant(const Vec& value) {
  return {"constant", value.size(), [value](double) { return value; }};
}

InputSignal InputSignal::table(const Vec& times, const Mat& values) {
  require(times.size() >= 1 && values.cols() == times.size(), ErrorCode::DimensionMismatch,
          "InputSignal::table: one column per time required");
  for (Index i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], ErrorCode::InvalidArgument, "InputSignal::table: times must increase");
  return {"table", values.rows(), [times, values](double t) -> Vec {
            const Index len = times.size();
            if (t <= times[0]) return values.col(0);
            if (t >= times[len - 1]) return values.col(len - 1);
            const auto it = std::upper_bound(times.data(), times.data() + len, t);
            const Index j = static_cast<Index>(it - times.data());
            const double s = (t - times[j - 1]) / (times[j] - times[j - 1]);
            return (1.0 - s) * values.col(j - 1) + s * values.col(j);
          }};
}

InputSignal InputSignal::scaled(double gamma) const {
  auto inner = eval;
  return {kind + "*gamma", m, [inner, gamma](double t) -> Vec { return gamma * inner(t); }};
}

InputSignal InputSignal::by_name(const std::string& name) {
  if (name == "ci_u1") return ci_u1();
  if (name == "ci_u2") return ci_u2();
  if (name == "fhn_i0_sin") return fhn_i0_sin();
  if (name == "fhn_i0_bump") return fhn_i0_bump();
  throw Error(ErrorCode::InvalidArgument, "unknown input signal '" + name + "'");
}

QBSystem chafee_infante(Index k) {
  require(k >= 3, ErrorCode::InvalidArgument, "chafee_infante: k >= 3 required");
  const Index n = 2 * k;
  const double h = 1.0 / static_cast<double>(k);
  const double ih2 = 1.0 / (h * h);
  // Nodes x_i = i·h, i = 1..k; v(0) = u eliminated; v_x(1) = 0 via v_{k+1} = v_k.
  const Vec D = laplacian_diagonal(k, h, false);
  std::vector<Trip> a;
  for (Index i = 0; i < k; ++i) {
    a.emplace_back(i, i, D[i] + 1.0);
    if (i > 0) a.emplace_back(i, i - 1, ih2);
    if (i + 1 < k) a.emplace_back(i, i + 1, ih2);
    a.emplace_back(k + i, k + i, 2.0 + 2.0 * D[i]);
  }
  SpMat A = from_triplets(n, a);

  std::vector<FactorPair> pairs;
  // v-rows: −v_i w_i.
  add_symmetric(pairs, selector(n, k, 0, 0, 1.0), selector(n, k, 0, k, 1.0), -1.0);
  // w-rows: −2 w_i² + (2/h²) v_i (Xv)_i.
  pairs.push_back({selector(n, k, k, k, -2.0), selector(n, k, k, k, 1.0)});
  add_symmetric(pairs, selector(n, k, k, 0, 1.0), neighbour_sum(n, k, k, 0), 2.0 * ih2);

  Mat B = Mat::Zero(n, 1);
  B(0, 0) = ih2;
  SpMat N1 = from_triplets(n, {Trip(k, 0, 2.0 * ih2)});
  Mat C = Mat::Zero(1, n);
  C(0, k - 1) = 1.0;
  QBSystem sys(std::move(A), Hessian::from_pairs(n, std::move(pairs)), {N1}, std::move(B), std::move(C));
  sys.meta["model"] = "chafee";
  sys.meta["k"] = std::to_string(k);
  return sys;
}

namespace {

constexpr double kFhnEps = 0.015;
constexpr double kFhnL = 0.3;
constexpr double kFhnQ = 0.05;

}  // namespace

QBSystem fitzhugh_nagumo(Index k) {
  require(k >= 3, ErrorCode::InvalidArgument, "fitzhugh_nagumo: k >= 3 required");
  const double eps = kFhnEps, q = kFhnQ;
  const Index n = 3 * k;
  const Index V = 0, W = k, Z = 2 * k;
  const double h = kFhnL / static_cast<double>(k);
  const double ih2 = 1.0 / (h * h);
  // Cell centres; v_x(0) = i0 via v_0 = v_1 − h·i0, v_x(L) = 0 via v_{k+1} = v_k.
  const Vec D = laplacian_diagonal(k, h, true);
  std::vector<Trip> a;
  for (Index i = 0; i < k; ++i) {
    a.emplace_back(V + i, V + i, eps * D[i] - 0.1 / eps);
    if (i > 0) a.emplace_back(V + i, V + i - 1, eps * ih2);
    if (i + 1 < k) a.emplace_back(V + i, V + i + 1, eps * ih2);
    a.emplace_back(V + i, W + i, -1.0 / eps);
    a.emplace_back(V + i, Z + i, 1.1 / eps);
    a.emplace_back(W + i, V + i, 0.5);
    a.emplace_back(W + i, W + i, -2.0);
    a.emplace_back(Z + i, Z + i, 2.0 * eps * D[i] - 0.2 / eps);
  }
  SpMat A = from_triplets(n, a);

  std::vector<FactorPair> pairs;
  // v-rows: −(1/ε) v_i z_i.
  add_symmetric(pairs, selector(n, k, V, V, 1.0), selector(n, k, V, Z, 1.0), -1.0 / eps);
  // z-rows: (2ε/h²) v_i(Xv)_i − (2/ε) z_i² + (2.2/ε) v_i z_i − (2/ε) v_i w_i.
  add_symmetric(pairs, selector(n, k, Z, V, 1.0), neighbour_sum(n, k, Z, V), 2.0 * eps * ih2);
  pairs.push_back({selector(n, k, Z, Z, -2.0 / eps), selector(n, k, Z, Z, 1.0)});
  add_symmetric(pairs, selector(n, k, Z, V, 1.0), selector(n, k, Z, Z, 1.0), 2.2 / eps);
  add_symmetric(pairs, selector(n, k, Z, V, 1.0), selector(n, k, Z, W, 1.0), -2.0 / eps);

  Mat B = Mat::Zero(n, 2);
  B(V, 0) = -eps / h;
  for (Index i = 0; i < k; ++i) {
    B(V + i, 1) = q / eps;
    B(W + i, 1) = q;
  }
  SpMat N1 = from_triplets(n, {Trip(Z, V, -2.0 * eps / h)});
  SpMat N2 = selector(n, k, Z, V, 2.0 * q / eps);
  Mat C = Mat::Zero(2, n);
  C(0, V) = 1.0;
  C(1, W) = 1.0;
  QBSystem sys(std::move(A), Hessian::from_pairs(n, std::move(pairs)), {N1, N2}, std::move(B), std::move(C));
  sys.meta["model"] = "fhn";
  sys.meta["k"] = std::to_string(k);
  return sys;
}

OdeProblem fitzhugh_nagumo_cubic(Index k, const InputSignal& u) {
  require(k >= 3, ErrorCode::InvalidArgument, "fitzhugh_nagumo_cubic: k >= 3 required");
  require(u.m == 2, ErrorCode::DimensionMismatch, "fitzhugh_nagumo_cubic: two inputs required");
  const double eps = kFhnEps, q = kFhnQ;
  const double h = kFhnL / static_cast<double>(k);
  const double ih2 = 1.0 / (h * h);
  const Vec D = laplacian_diagonal(k, h, true);
  std::vector<Trip> l;
  for (Index i = 0; i < k; ++i) {
    l.emplace_back(i, i, D[i]);
    if (i > 0) l.emplace_back(i, i - 1, ih2);
    if (i + 1 < k) l.emplace_back(i, i + 1, ih2);
  }
  SpMat Lap(k, k);
  Lap.setFromTriplets(l.begin(), l.end());

  OdeProblem p;
  p.n = 2 * k;
  p.f = [=](double t, const Vec& x) {
    const Vec uu = u(t);
    const auto v = x.head(k).array();
    const auto w = x.tail(k).array();
    Vec f(2 * k);
    f.head(k) = eps * (Lap * x.head(k)).array() + (v * (v - 0.1) * (1.0 - v) - w + q) / eps;
    f[0] += -eps / h * uu[0];
    f.head(k).array() += (uu[1] - 1.0) * q / eps;
    f.tail(k) = 0.5 * v - 2.0 * w + q * uu[1];
    return f;
  };
  p.jacobian = [=](double, const Vec& x) {
    std::vector<Trip> t;
    for (int o = 0; o < Lap.outerSize(); ++o)
      for (SpMat::InnerIterator it(Lap, o); it; ++it) t.emplace_back(it.row(), it.col(), eps * it.value());
    for (Index i = 0; i < k; ++i) {
      const double v = x[i];
      t.emplace_back(i, i, (-3.0 * v * v + 2.2 * v - 0.1) / eps);
      t.emplace_back(i, k + i, -1.0 / eps);
      t.emplace_back(k + i, i, 0.5);
      t.emplace_back(k + i, k + i, -2.0);
    }
    SpMat J(2 * k, 2 * k);
    J.setFromTriplets(t.begin(), t.end());
    return J;
  };
  p.output = Mat::Zero(2, 2 * k);
  p.output(0, 0) = 1.0;
  p.output(1, k) = 1.0;
  return p;
}

OdeProblem ode_problem(const QBSystem& sys, const InputSignal& u) {
  require(u.m == sys.m(), ErrorCode::DimensionMismatch, "simulate: input dimension differs from the system");
  OdeProblem p;
  p.n = sys.n();
  const QBSystem* s = &sys;
  p.f = [s, u](double t, const Vec& x) { return rhs(*s, x, u(t)); };
  p.jacobian = [s, u](double t, const Vec& x) { return jacobian(*s, x, u(t)); };
  p.mass = sys.E();
  p.output = sys.C();
  return p;
}

Trajectory simulate(const QBSystem& sys, const InputSignal& u, double T, Index samples, const IntegratorOptions& opts,
                    bool keep_states, const Vec& x0) {
  const Vec init = x0.size() == 0 ? Vec(Vec::Zero(sys.n())) : x0;
  return integrate(ode_problem(sys, u), init, T, samples, opts, keep_states);
}

Trajectory simulate(const ReducedModel& red, const InputSignal& u, double T, Index samples,
                    const IntegratorOptions& opts, bool keep_states) {
  const QBSystem sys = red.as_system();
  return simulate(sys, u, T, samples, opts, keep_states);
}

OutputErrors output_errors(const Trajectory& y, const Trajectory& yhat) {
  require(y.times.size() == yhat.times.size() && y.outputs.rows() == yhat.outputs.rows() &&
              y.outputs.cols() == yhat.outputs.cols(),
          ErrorCode::GridMismatch, "output_errors: trajectories have different shapes");
  for (Index j = 0; j < y.times.size(); ++j)
    require(std::abs(y.times[j] - yhat.times[j]) <= 1e-12 * std::max(1.0, std::abs(y.times[j])),
            ErrorCode::GridMismatch, "output_errors: sample times differ");
  const Index s = y.outputs.cols();
  double ymax = 0.0, emax = 0.0, esum = 0.0;
  for (Index j = 0; j < s; ++j) {
    ymax = std::max(ymax, y.outputs.col(j).norm());
    const double e = (y.outputs.col(j) - yhat.outputs.col(j)).norm();
    emax = std::max(emax, e);
    esum += e;
  }
  OutputErrors out;
  if (ymax == 0.0) {
    out.mean_rel = out.linf_rel = (emax == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    return out;
  }
  out.mean_rel = esum / static_cast<double>(s) / ymax;
  out.linf_rel = emax / ymax;
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  out << 't';
  for (Index i = 0; i < tr.outputs.rows(); ++i) out << ",y_" << i + 1;
  out << '\n';
  char buf[40];
  for (Index j = 0; j < tr.times.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", tr.times[j]);
    out << buf;
    for (Index i = 0; i < tr.outputs.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", tr.outputs(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

double lift_residual(const Trajectory& tr, Index k, Index v_offset, Index w_offset) {
  require(tr.states.rows() >= std::max(v_offset, w_offset) + k, ErrorCode::DimensionMismatch,
          "lift_residual: trajectory has no (or too small) states");
  double worst = 0.0;
  for (Index j = 0; j < tr.states.cols(); ++j) {
    const Vec v = tr.states.col(j).segment(v_offset, k);
    const Vec w = tr.states.col(j).segment(w_offset, k);
    const double vmax = v.cwiseAbs().maxCoeff();
    worst = std::max(worst, (w - v.cwiseProduct(v)).cwiseAbs().maxCoeff() / (1.0 + vmax * vmax));
  }
  return worst;
}

}  // namespace qbmor
