#include <qbmor/tqb_irka.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

namespace qbmor {

namespace {

CMat spmul(const SpMat& A, const CMat& X) { return A.cast<cplx>() * X; }

CVec sorted_eigs(const Mat& A) {
  if (A.rows() == 0) return CVec(0);
  Eigen::EigenSolver<Mat> es(A, false);
  require(es.info() == Eigen::Success, ErrorCode::SolverBreakdown, "eigenvalue computation failed");
  const CVec lam = es.eigenvalues();
  const auto order = eigen_order(lam);
  CVec out(lam.size());
  for (Index i = 0; i < lam.size(); ++i) out[i] = lam[order[static_cast<std::size_t>(i)]];
  return out;
}

Mat random_normal(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = nd(rng);
  return M;
}

Mat scaled_to(const Mat& M, double target) {
  const double nrm = M.norm();
  return nrm > 0.0 ? Mat(M * (target / nrm)) : M;
}

/// Spectral transform of the γ-scaled reduced model; a defective Â is
/// perturbed once by small random symmetric noise before giving up.
SpectralData transform_with_retry(const ReducedModel& red_scaled, const IrkaConfig& cfg, std::mt19937_64& rng,
                                  std::vector<std::string>& warnings) {
  try {
    return spectral_transform(red_scaled, cfg.reflect_unstable, cfg.imag_shift);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonDiagonalizable) throw;
  }
  ReducedModel perturbed = red_scaled;
  Mat S = random_normal(red_scaled.r(), red_scaled.r(), rng);
  S = 0.5 * (S + S.transpose());
  perturbed.A += scaled_to(S, 1e-10 * std::max(red_scaled.A.norm(), 1.0));
  warnings.push_back("reduced A nearly defective; perturbed once");
  return spectral_transform(perturbed, cfg.reflect_unstable, cfg.imag_shift);
}

QBSystem basis_system(const QBSystem& sys, const IrkaConfig& cfg) {
  QBSystem scaled = rescale(sys, cfg.gamma);
  if (cfg.shift == 0.0) return scaled;
  SpMat I(sys.n(), sys.n());
  I.setIdentity();
  SpMat As = sys.A() - cfg.shift * (sys.has_E() ? *sys.E() : I);
  return QBSystem(As, scaled.H(), scaled.N(), scaled.B(), scaled.C(), scaled.E());
}

void validate_config(const QBSystem& sys, const IrkaConfig& cfg) {
  require(cfg.r >= 1 && cfg.r <= sys.n(), ErrorCode::InvalidArgument, "reduced order must satisfy 1 <= r <= n");
  require(cfg.tol > 0.0 && cfg.tol < 1.0, ErrorCode::InvalidArgument, "tol must lie in (0, 1)");
  require(cfg.maxit >= 1, ErrorCode::InvalidArgument, "maxit must be positive");
  require(cfg.gamma > 0.0, ErrorCode::NonPositiveGamma, "gamma must be positive");
  require(cfg.stagnation_window >= 1, ErrorCode::InvalidArgument, "stagnation window must be positive");
}

}  // namespace

std::vector<Index> optimal_assignment(const Mat& cost) {
  // Hungarian method with potentials (rows assigned to columns), O(n³).
  const Index n = cost.rows();
  require(cost.cols() == n, ErrorCode::DimensionMismatch, "optimal_assignment: square cost required");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> match(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> perm(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) perm[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return perm;
}

double eigenvalue_change(const CVec& lambda_new, const CVec& lambda_old) {
  require(lambda_new.size() == lambda_old.size(), ErrorCode::DimensionMismatch, "eigenvalue_change: length mismatch");
  const Index r = lambda_new.size();
  if (r == 0) return 0.0;
  auto rel = [&](Index i, Index j) {
    return std::abs(lambda_new[i] - lambda_old[j]) / std::max(std::abs(lambda_old[j]), 1e-300);
  };
  double sorted = 0.0;
  for (Index i = 0; i < r; ++i) sorted = std::max(sorted, rel(i, i));
  Mat cost(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j) cost(i, j) = rel(i, j);
  const auto perm = optimal_assignment(cost);
  double assigned = 0.0;
  for (Index i = 0; i < r; ++i) assigned = std::max(assigned, rel(i, perm[static_cast<std::size_t>(i)]));
  return std::min(sorted, assigned);
}

ComplexBases solve_complex_bases(const QBSystem& sys, const SpectralData& sd) {
  const Index r = sd.r();
  require(sd.Bt.rows() == r && sd.Bt.cols() == sys.m() && sd.Ct.rows() == sys.p() &&
              static_cast<Index>(sd.Nt.size()) == sys.m(),
          ErrorCode::DimensionMismatch, "solve_bases: spectral data does not match the system");
  const SpMat* E = sys.has_E() ? &*sys.E() : nullptr;
  ComplexBases b;
  b.lambda = sd.lambda;

  b.V1 = solve_sylvester_shifted(sys.A(), sd.lambda, CMat(sys.B().cast<cplx>() * sd.Bt.transpose()), E, false);
  CMat rhs = CMat::Zero(sys.n(), r);
  if (!sys.H().is_zero()) rhs += sys.H().apply_cols<cplx>(b.V1, b.V1) * sd.Ht.transpose();
  for (Index k = 0; k < sys.m(); ++k)
    rhs += spmul(sys.N()[static_cast<std::size_t>(k)], b.V1) * sd.Nt[static_cast<std::size_t>(k)].transpose();
  b.V2 = solve_sylvester_shifted(sys.A(), sd.lambda, rhs, E, false);

  b.W1 = solve_sylvester_shifted(sys.A(), sd.lambda, CMat(sys.C().transpose().cast<cplx>() * sd.Ct), E, true);
  rhs = CMat::Zero(sys.n(), r);
  if (!sys.H().is_zero()) rhs += 2.0 * sys.H().apply_mode2_cols<cplx>(b.V1, b.W1) * sd.Ht2.transpose();
  for (Index k = 0; k < sys.m(); ++k)
    rhs += spmul(SpMat(sys.N()[static_cast<std::size_t>(k)].transpose()), b.W1) * sd.Nt[static_cast<std::size_t>(k)];
  b.W2 = solve_sylvester_shifted(sys.A(), sd.lambda, rhs, E, true);
  return b;
}

ProjectionBases solve_bases(const QBSystem& sys, const SpectralData& sd, std::uint64_t seed) {
  ProjectionBases pb;
  pb.complex = solve_complex_bases(sys, sd);
  const CVec& lam = sd.lambda;
  pb.V1 = realify_basis(pb.complex.V1, lam);
  pb.V2 = realify_basis(pb.complex.V2, lam);
  pb.W1 = realify_basis(pb.complex.W1, lam);
  pb.W2 = realify_basis(pb.complex.W2, lam);
  pb.V = pb.V1 + pb.V2;
  pb.W = pb.W1 + pb.W2;
  std::mt19937_64 rng(seed);
  pb.Vorth = orth(pb.V, rng);
  pb.Worth = orth(pb.W, rng);
  pb.cond_WtV = cond2(Mat(pb.Worth.transpose() * pb.Vorth));
  return pb;
}

ProjectionBases solve_bases(const QBSystem& sys, const ReducedModel& red, double gamma, bool reflect,
                            std::uint64_t seed) {
  const SpectralData sd = spectral_transform(rescale(red, gamma), reflect);
  return solve_bases(rescale(sys, gamma), sd, seed);
}

HatBases reduced_hat_bases(const ComplexReduced& red, const SpectralData& sd) {
  const Index r = red.r();
  require(sd.r() == r, ErrorCode::DimensionMismatch, "reduced_hat_bases: spectral data order differs");
  const Index m = red.B.cols();
  HatBases h;
  h.V1 = solve_sylvester_shifted(red.A, sd.lambda, CMat(red.B * sd.Bt.transpose()));
  CMat rhs = red.H * kron<cplx>(h.V1, h.V1) * sd.Ht.transpose();
  for (Index k = 0; k < m; ++k)
    rhs += red.N[static_cast<std::size_t>(k)] * h.V1 * sd.Nt[static_cast<std::size_t>(k)].transpose();
  h.V2 = solve_sylvester_shifted(red.A, sd.lambda, rhs);

  const CMat At = red.A.transpose();
  h.W1 = solve_sylvester_shifted(At, sd.lambda, CMat(red.C.transpose() * sd.Ct));
  const CMat H2 = mode_matricize<cplx>(red.H, 2);
  rhs = 2.0 * H2 * kron<cplx>(h.V1, h.W1) * sd.Ht2.transpose();
  for (Index k = 0; k < m; ++k)
    rhs += red.N[static_cast<std::size_t>(k)].transpose() * h.W1 * sd.Nt[static_cast<std::size_t>(k)];
  h.W2 = solve_sylvester_shifted(At, sd.lambda, rhs);
  return h;
}

HatBases reduced_hat_bases(const ReducedModel& red, bool reflect) {
  return reduced_hat_bases(ComplexReduced::from(red), spectral_transform(red, reflect));
}

ReducedModel initial_guess(Index r, Index m, Index p, InitKind kind, std::uint64_t seed, const QBSystem* sys) {
  require(r >= 1 && m >= 1 && p >= 1, ErrorCode::InvalidArgument, "initial_guess: positive dimensions required");
  if (kind == InitKind::LinearIrka) {
    require(sys != nullptr, ErrorCode::InvalidArgument, "linear-irka initialization needs the full system");
    QBSystem lin(sys->A(), Hessian::zero(sys->n()), {}, sys->B(), sys->C(), sys->E());
    IrkaConfig cfg;
    cfg.r = r;
    cfg.tol = 1e-8;
    cfg.seed = seed;
    ReducedModel red = tqb_irka(lin, cfg).red;
    red.H = Mat::Zero(r, r * r);
    red.N.assign(static_cast<std::size_t>(m), Mat::Zero(r, r));
    return red;
  }
  require(kind == InitKind::Random, ErrorCode::InvalidArgument, "initial_guess: user models are passed directly");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(std::log(0.1), std::log(10.0));
  Mat D = Mat::Zero(r, r);
  for (Index i = 0; i < r; ++i) D(i, i) = std::exp(ud(rng));
  const Mat S = random_normal(r, r, rng);
  const Mat G = random_normal(r, r, rng);
  ReducedModel red;
  red.A = -D - 0.1 * S * S.transpose() + 0.5 * (G - G.transpose());
  red.H = scaled_to(symmetrize_dense<double>(random_normal(r, r * r, rng)), 0.1);
  for (Index k = 0; k < m; ++k) red.N.push_back(scaled_to(random_normal(r, r, rng), 0.1));
  red.B = random_normal(r, m, rng);
  red.C = random_normal(p, r, rng);
  return red;
}

IrkaResult tqb_irka(const QBSystem& sys, const IrkaConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_config(sys, cfg);
  IrkaReport report;
  report.seed = cfg.seed;

  ReducedModel red;
  if (cfg.init == InitKind::User) {
    require(cfg.user_init.has_value(), ErrorCode::InvalidArgument, "user initialization requested without a model");
    red = *cfg.user_init;
    require(red.r() == cfg.r && red.B.cols() == sys.m() && red.C.rows() == sys.p() &&
                static_cast<Index>(red.N.size()) == sys.m() && red.H.rows() == cfg.r &&
                red.H.cols() == cfg.r * cfg.r,
            ErrorCode::DimensionMismatch, "user initial model has wrong dimensions");
  } else {
    red = initial_guess(cfg.r, sys.m(), sys.p(), cfg.init, cfg.seed, &sys);
  }

  const QBSystem sys_b = basis_system(sys, cfg);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  CVec lam_old = sorted_eigs(red.A);

  IrkaResult best;
  double best_change = std::numeric_limits<double>::infinity();
  double prev_change = std::numeric_limits<double>::infinity();
  double theta = 1.0;
  int increases = 0;
  bool have_best = false;

  for (int it = 1; it <= cfg.maxit; ++it) {
    const SpectralData sd = transform_with_retry(rescale(red, cfg.gamma), cfg, rng, report.warnings);
    ProjectionBases bases = solve_bases(sys_b, sd, rng());
    ReducedModel projected = project(sys, bases.Vorth, bases.Worth);
    projected.meta = red.meta;
    // Damping only steers the next shifts; the returned model is always the
    // undamped projection.
    ReducedModel red_new = projected;
    if (theta < 1.0) red_new.A = theta * red_new.A + (1.0 - theta) * red.A;
    const CVec lam_new = sorted_eigs(red_new.A);
    const CVec lam_projected = theta < 1.0 ? sorted_eigs(projected.A) : lam_new;
    const double change = eigenvalue_change(lam_new, lam_old);
    report.eig_change_history.push_back(change);
    report.iterations = it;

    if (!have_best || change < best_change) {
      best_change = change;
      best.red = projected;
      best.bases = bases;
      best.report.final_eigs = lam_projected;
      have_best = true;
    }
    if (change <= cfg.tol) {
      report.converged = true;
      best.red = std::move(projected);
      best.bases = std::move(bases);
      best.report.final_eigs = lam_projected;
      break;
    }
    if (change > prev_change) {
      if (++increases >= cfg.stagnation_window) {
        theta *= 0.5;
        increases = 0;
        report.warnings.push_back("eigenvalue change increased " + std::to_string(cfg.stagnation_window) +
                                  " times in a row at iteration " + std::to_string(it) + "; damping theta = " +
                                  std::to_string(theta));
      }
    } else {
      increases = 0;
      theta = 1.0;
    }
    prev_change = change;
    red = std::move(red_new);
    lam_old = lam_new;
  }

  if (!report.converged)
    report.warnings.push_back("maximum number of iterations reached; returning the iterate with the smallest change");
  if (best.bases.cond_WtV > 1e10)
    report.warnings.push_back("ill-conditioned W^T V (cond " + std::to_string(best.bases.cond_WtV) + ")");
  report.final_eigs = best.report.final_eigs;
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  best.red.meta["method"] = "tqb-irka";
  best.report = std::move(report);
  return best;
}

}  // namespace qbmor
