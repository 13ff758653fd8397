#include <qbmor/diagnostics.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace qbmor {

namespace {

CMat sp(const SpMat& A) { return CMat(A.cast<cplx>()); }

struct Sides {
  CMat C, B, N, H;
  CVec L;
};

CVec lambda_side(const CMat& V1, const CMat& V, const CMat& W1, const CMat& W2) {
  CVec L(V1.cols());
  for (Index i = 0; i < V1.cols(); ++i)
    L[i] = (W1.col(i).transpose() * V.col(i))(0, 0) + (W2.col(i).transpose() * V1.col(i))(0, 0);
  return L;
}

Sides full_sides(const QBSystem& s, const ComplexBases& b) {
  const Index r = b.V1.cols(), m = s.m();
  const CMat V = b.V1 + b.V2, W = b.W1 + b.W2;
  Sides out;
  out.C = (s.C().cast<cplx>() * V).transpose();
  out.B = W.transpose() * s.B().cast<cplx>();
  out.N = CMat(r, r * m);
  for (Index k = 0; k < m; ++k)
    out.N.middleCols(k * r, r) = b.W1.transpose() * (s.N()[static_cast<std::size_t>(k)].cast<cplx>() * b.V1);
  out.H = s.H().is_zero() ? CMat(CMat::Zero(r, r * r)) : CMat(b.W1.transpose() * s.H().apply_cols<cplx>(b.V1, b.V1));
  out.L = lambda_side(b.V1, V, b.W1, b.W2);
  return out;
}

Sides hat_sides(const ComplexReduced& red, const HatBases& h) {
  const Index r = red.r(), m = red.B.cols();
  Sides out;
  out.C = (red.C * h.V()).transpose();
  out.B = h.W().transpose() * red.B;
  out.N = CMat(r, r * m);
  for (Index k = 0; k < m; ++k)
    out.N.middleCols(k * r, r) = h.W1.transpose() * red.N[static_cast<std::size_t>(k)] * h.V1;
  out.H = h.W1.transpose() * red.H * kron<cplx>(h.V1, h.V1);
  out.L = lambda_side(h.V1, h.V(), h.W1, h.W2);
  return out;
}

double norm2(const CMat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(M);
  return svd.singularValues()[0];
}

double family_floor(const Sides& s) {
  const double scale = std::max({norm2(s.C), norm2(s.B), norm2(s.N), norm2(s.H), s.L.norm()});
  return 1e-14 * scale;
}

/// Factor scales of the reduced-side products (Frobenius norms), e.g.
/// ‖Ŵ1‖‖Ĥ‖‖V̂1‖² for the Hessian family: the magnitude at which rounding
/// errors of Φ̂_X occur.
struct FamilyScales {
  double C = 0.0, B = 0.0, N = 0.0, H = 0.0, L = 0.0;
};

FamilyScales hat_scales(const ComplexReduced& red, const HatBases& h) {
  FamilyScales s;
  const double v = h.V().norm(), w = h.W().norm(), v1 = h.V1.norm(), w1 = h.W1.norm();
  s.C = red.C.norm() * v;
  s.B = red.B.norm() * w;
  for (const CMat& N : red.N) s.N += w1 * N.norm() * v1;
  s.H = w1 * red.H.norm() * v1 * v1;
  s.L = w1 * v + h.W2.norm() * v1;
  return s;
}

void fill_measures(ResidualReport& rep, double floor, const FamilyScales& sc) {
  auto measure = [&](const CMat& num, const CMat& den, double scale, const char* name) {
    const double den_norm = norm2(den);
    if (den_norm <= std::max(floor, 1e-13 * scale) && scale > 0.0 && num.size() > 0) {
      rep.notes.push_back(std::string("Phi_") + name + " vanishes; E_" + name +
                          " measured against the reduced-side factor scale");
    }
    return relative_measure(num, den, floor, scale);
  };
  rep.E_C = measure(rep.Eps_C, rep.Phi_C, sc.C, "C");
  rep.E_B = measure(rep.Eps_B, rep.Phi_B, sc.B, "B");
  rep.E_N = measure(rep.Eps_N, rep.Phi_N, sc.N, "N");
  rep.E_H = measure(rep.Eps_H, rep.Phi_H, sc.H, "H");
  rep.E_lambda = measure(CMat(rep.Eps_lambda), CMat(rep.Phi_lambda), sc.L, "lambda");
}

CVec sorted_eigs(const CMat& A) {
  if (A.rows() == 0) return CVec(0);
  Eigen::ComplexEigenSolver<CMat> es(A, false);
  require(es.info() == Eigen::Success, ErrorCode::SolverBreakdown, "eigenvalue computation failed");
  const CVec lam = es.eigenvalues();
  const auto order = eigen_order(lam);
  CVec out(lam.size());
  for (Index i = 0; i < lam.size(); ++i) out[i] = lam[order[static_cast<std::size_t>(i)]];
  return out;
}

/// Solves X diag(λ) + U G⁻¹ Y X = R column-wise through the Woodbury identity
/// (λI + U G⁻¹ Y)⁻¹ = λ⁻¹[I − U(λG + YU)⁻¹Y].
CMat solve_low_rank_shifted(const CMat& U, const CMat& G, const CMat& Y, const CVec& lambda, const CMat& R) {
  const CMat YU = Y * U;
  CMat X(R.rows(), R.cols());
  for (Index i = 0; i < R.cols(); ++i) {
    const cplx lam = lambda[i];
    if (lam == cplx(0.0, 0.0)) throw Error(ErrorCode::SingularShift, "zero shift in low-rank solve");
    Eigen::FullPivLU<CMat> lu(lam * G + YU);
    if (!lu.isInvertible()) throw Error(ErrorCode::SingularShift, "shifted projected operator is singular");
    const CVec b = R.col(i);
    X.col(i) = (b - U * lu.solve(CVec(Y * b))) / lam;
  }
  return X;
}

}  // namespace

double relative_measure(const CMat& num, const CMat& den, double floor, double scale) {
  const double a = norm2(num), b = norm2(den);
  if (b > std::max(floor, 1e-13 * scale)) return a / b;
  if (scale > 0.0) return a / scale;
  return a <= floor ? 0.0 : std::numeric_limits<double>::infinity();
}

double BruteforceReport::max() const { return std::max({rel_C, rel_B, rel_N, rel_H, rel_lambda}); }

DiagnosticData diagnostic_data(const QBSystem& sys, const ReducedModel& red, double gamma, bool reflect) {
  require(!sys.has_E(), ErrorCode::Unsupported, "diagnostics are implemented for E = I only");
  DiagnosticData d;
  d.sys_scaled = rescale(sys, gamma);
  d.sd = spectral_transform(rescale(red, gamma), reflect);
  d.full = solve_complex_bases(d.sys_scaled, d.sd);
  d.red_raw = project(d.sys_scaled, CMat(d.full.V1 + d.full.V2), CMat(d.full.W1 + d.full.W2));
  try {
    d.hat = reduced_hat_bases(d.red_raw, d.sd);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularShift) throw;
    d.hat_ok = false;
  }
  return d;
}

ResidualReport optimality_residuals(const DiagnosticData& d) {
  ResidualReport rep;
  const Sides f = full_sides(d.sys_scaled, d.full);
  rep.Phi_C = f.C;
  rep.Phi_B = f.B;
  rep.Phi_N = f.N;
  rep.Phi_H = f.H;
  rep.Phi_lambda = f.L;
  if (!d.hat_ok) {
    rep.degraded = true;
    rep.notes.push_back("reduced-side Sylvester solve singular; perturbations unavailable");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.E_C = rep.E_B = rep.E_N = rep.E_H = rep.E_lambda = nan;
    return rep;
  }
  const Sides h = hat_sides(d.red_raw, d.hat);
  rep.Eps_C = f.C - h.C;
  rep.Eps_B = f.B - h.B;
  rep.Eps_N = f.N - h.N;
  rep.Eps_H = f.H - h.H;
  rep.Eps_lambda = f.L - h.L;
  fill_measures(rep, family_floor(f), hat_scales(d.red_raw, d.hat));
  return rep;
}

ResidualReport optimality_residuals(const QBSystem& sys, const ReducedModel& red, double gamma, bool reflect) {
  const DiagnosticData d = diagnostic_data(sys, red, gamma, reflect);
  ResidualReport rep = optimality_residuals(d);
  rep.fixed_point_gap = eigenvalue_change(sorted_eigs(d.red_raw.A), sorted_eigs(red.A.cast<cplx>()));
  return rep;
}

PerturbationSolution perturbation_solves(const DiagnosticData& d) {
  require(d.hat_ok, ErrorCode::DegradedDiagnostics, "reduced-side bases unavailable");
  const QBSystem& s = d.sys_scaled;
  const SpectralData& sd = d.sd;
  const CMat& V1 = d.full.V1;
  const CMat& W1 = d.full.W1;
  const CMat V = d.full.V1 + d.full.V2;
  const CMat W = d.full.W1 + d.full.W2;
  const CMat A = sp(s.A());
  const CMat Bc = s.B().cast<cplx>(), Cc = s.C().cast<cplx>();
  const Index m = s.m();

  const CMat G = W.transpose() * V;
  const CMat WtV1 = W.transpose() * V1;
  const CMat VtW1 = V.transpose() * W1;
  require(cond2(WtV1) <= 1e13 && cond2(VtW1) <= 1e13, ErrorCode::ProjectorSingular,
          "W^T V1 or V^T W1 is numerically singular");
  const Eigen::FullPivLU<CMat> Glu(G), Gtlu(CMat(G.transpose()));
  auto Pi = [&](const CMat& X) { return CMat(V * Glu.solve(CMat(W.transpose() * X))); };
  auto PiT = [&](const CMat& X) { return CMat(W * Gtlu.solve(CMat(V.transpose() * X))); };
  auto Pi_v = [&](const CMat& X) { return CMat(V1 * WtV1.fullPivLu().solve(CMat(W.transpose() * X))); };
  auto Pi_w = [&](const CMat& X) { return CMat(W1 * VtW1.fullPivLu().solve(CMat(V.transpose() * X))); };

  PerturbationSolution sol;
  const CMat Rv = A * V1 + Bc * sd.Bt.transpose();
  sol.eps_v = solve_low_rank_shifted(V, G, CMat(W.transpose() * A), sd.lambda, CMat(Pi(Rv) - Pi_v(Rv)));
  const CMat Rw = A.transpose() * W1 + Cc.transpose() * sd.Ct;
  sol.eps_w = solve_low_rank_shifted(W, CMat(G.transpose()), CMat(V.transpose() * A.transpose()), sd.lambda,
                                     CMat(PiT(Rw) - Pi_w(Rw)));

  const CMat& ev = sol.eps_v;
  const CMat& ew = sol.eps_w;
  CMat inner = CMat::Zero(s.n(), sd.r());
  for (Index k = 0; k < m; ++k)
    inner += s.N()[static_cast<std::size_t>(k)].cast<cplx>() * ev * sd.Nt[static_cast<std::size_t>(k)].transpose();
  if (!s.H().is_zero())
    inner += (s.H().apply_cols<cplx>(ev, V1) + s.H().apply_cols<cplx>(V1, ev) - s.H().apply_cols<cplx>(ev, ev)) *
             sd.Ht.transpose();
  sol.Gamma_v = solve_sylvester_shifted(d.red_raw.A, sd.lambda, CMat(-Glu.solve(CMat(W.transpose() * inner))));

  inner = CMat::Zero(s.n(), sd.r());
  for (Index k = 0; k < m; ++k)
    inner += SpMat(s.N()[static_cast<std::size_t>(k)].transpose()).cast<cplx>() * ew *
             sd.Nt[static_cast<std::size_t>(k)];
  if (!s.H().is_zero())
    inner += 2.0 *
             (s.H().apply_mode2_cols<cplx>(ev, W1) + s.H().apply_mode2_cols<cplx>(V1, ew) -
              s.H().apply_mode2_cols<cplx>(ev, ew)) *
             sd.Ht2.transpose();
  sol.Gamma_w = solve_sylvester_shifted(CMat(d.red_raw.A.transpose()), sd.lambda, CMat(-(V.transpose() * inner)));
  return sol;
}

ResidualReport perturbation_formulas(const DiagnosticData& d, const PerturbationSolution& sol) {
  const QBSystem& s = d.sys_scaled;
  const CMat& V1 = d.full.V1;
  const CMat& W1 = d.full.W1;
  const CMat V = d.full.V1 + d.full.V2;
  const CMat W = d.full.W1 + d.full.W2;
  const Index r = V1.cols(), m = s.m();
  const CMat& ev = sol.eps_v;
  const CMat& ew = sol.eps_w;
  const Sides f = full_sides(s, d.full);

  ResidualReport rep;
  rep.Phi_C = f.C;
  rep.Phi_B = f.B;
  rep.Phi_N = f.N;
  rep.Phi_H = f.H;
  rep.Phi_lambda = f.L;
  const CMat Cc = s.C().cast<cplx>();
  rep.Eps_C = -(Cc * V * sol.Gamma_v).transpose();
  const CMat G = W.transpose() * V;
  rep.Eps_B = -(sol.Gamma_w.transpose() * G.fullPivLu().solve(CMat(W.transpose() * s.B().cast<cplx>())));
  rep.Eps_N = CMat(r, r * m);
  for (Index k = 0; k < m; ++k) {
    const CMat N = sp(s.N()[static_cast<std::size_t>(k)]);
    rep.Eps_N.middleCols(k * r, r) = ew.transpose() * N * (V1 - ev) + W1.transpose() * N * ev;
  }
  if (s.H().is_zero()) {
    rep.Eps_H = CMat::Zero(r, r * r);
  } else {
    const CMat V1m = V1 - ev;
    rep.Eps_H = (W1 - ew).transpose() * (s.H().apply_cols<cplx>(ev, V1m) + s.H().apply_cols<cplx>(V1, ev)) +
                ew.transpose() * s.H().apply_cols<cplx>(V1, V1);
  }
  const CMat What = d.hat.W(), Vhat = d.hat.V();
  const CMat L = -What.transpose() * sol.Gamma_v - sol.Gamma_w.transpose() * (Vhat - sol.Gamma_v) -
                 d.full.W2.transpose() * d.full.V2 + d.hat.W2.transpose() * d.hat.V2;
  rep.Eps_lambda = L.diagonal();
  fill_measures(rep, family_floor(f), hat_scales(d.red_raw, d.hat));
  return rep;
}

BruteforceReport verify_against_bruteforce(const QBSystem& sys, const ReducedModel& red, double gamma,
                                           bool reflect) {
  require(sys.n() <= 30 && red.r() <= 4, ErrorCode::TooLarge, "Kronecker-form check limited to n <= 30, r <= 4");
  require(!sys.has_E(), ErrorCode::Unsupported, "Kronecker-form check implemented for E = I only");
  const QBSystem s = rescale(sys, gamma);
  const SpectralData sd = spectral_transform(rescale(red, gamma), reflect);
  const Index n = s.n(), r = sd.r(), m = s.m(), p = s.p();
  const CMat A = sp(s.A());
  const CMat In = CMat::Identity(n, n);
  const CMat Lam = sd.lambda.asDiagonal();
  const CMat L = -kron<cplx>(Lam, In) - kron<cplx>(CMat::Identity(r, r), A);
  const CMat Lt = -kron<cplx>(Lam, In) - kron<cplx>(CMat::Identity(r, r), CMat(A.transpose()));
  const Eigen::FullPivLU<CMat> Llu(L), Ltlu(Lt);
  auto unvec = [n, r](const CVec& x) { return CMat(Eigen::Map<const CMat>(x.data(), n, r)); };
  auto vecc = [](const CMat& X) { return CVec(Eigen::Map<const CVec>(X.data(), X.size())); };

  ComplexBases bf;
  const CVec Im = vecc(CMat::Identity(m, m)), Ip = vecc(CMat::Identity(p, p));
  const CVec v1 = Llu.solve(CVec(kron<cplx>(sd.Bt, s.B().cast<cplx>()) * Im));
  const CVec w1 = Ltlu.solve(CVec(kron<cplx>(CMat(sd.Ct.transpose()), CMat(s.C().transpose().cast<cplx>())) * Ip));
  CVec rv = CVec::Zero(n * r), rw = CVec::Zero(n * r);
  for (Index k = 0; k < m; ++k) {
    const CMat N = sp(s.N()[static_cast<std::size_t>(k)]);
    const CMat& Nt = sd.Nt[static_cast<std::size_t>(k)];
    rv += kron<cplx>(Nt, N) * v1;
    rw += kron<cplx>(CMat(Nt.transpose()), CMat(N.transpose())) * w1;
  }
  if (!s.H().is_zero()) {
    const CMat H1 = s.H().dense_mode(1).cast<cplx>();
    const CMat H2 = s.H().dense_mode(2).cast<cplx>();
    const Permutation T = perm_T(n, r);
    rv += kron<cplx>(sd.Ht, H1) * T.apply<cplx>(kron<cplx>(CMat(v1), CMat(v1)));
    rw += 2.0 * kron<cplx>(sd.Ht2, H2) * T.apply<cplx>(kron<cplx>(CMat(v1), CMat(w1)));
  }
  bf.V1 = unvec(v1);
  bf.W1 = unvec(w1);
  bf.V2 = unvec(Llu.solve(rv));
  bf.W2 = unvec(Ltlu.solve(rw));

  const Sides a = full_sides(s, solve_complex_bases(s, sd));
  const Sides b = full_sides(s, bf);
  auto rel = [](const CMat& x, const CMat& y) {
    const double den = std::max(y.norm(), 1e-300);
    return (x - y).norm() / den;
  };
  BruteforceReport rep;
  rep.rel_C = a.C.norm() == 0.0 && b.C.norm() == 0.0 ? 0.0 : rel(b.C, a.C);
  rep.rel_B = a.B.norm() == 0.0 && b.B.norm() == 0.0 ? 0.0 : rel(b.B, a.B);
  rep.rel_N = a.N.norm() == 0.0 && b.N.norm() == 0.0 ? 0.0 : rel(b.N, a.N);
  rep.rel_H = a.H.norm() == 0.0 && b.H.norm() == 0.0 ? 0.0 : rel(b.H, a.H);
  rep.rel_lambda = a.L.norm() == 0.0 && b.L.norm() == 0.0 ? 0.0 : rel(CMat(b.L), CMat(a.L));
  return rep;
}

}  // namespace qbmor
