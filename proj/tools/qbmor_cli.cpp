/// \file qbmor_cli.cpp
/// \brief Command-line driver: benchmark generation, reduction (TQB-IRKA or
///        balanced truncation), residual/norm reports, simulations and order
///        sweeps. Primary outputs are deterministic; timings go to stderr.
///
/// Exit codes: 0 success, 1 usage or I/O error, 2 non-convergence (the model
/// is still written), 3 numerical failure.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <qbmor/benchmarks.hpp>
#include <qbmor/diagnostics.hpp>
#include <qbmor/gramians_norms.hpp>
#include <qbmor/io.hpp>
#include <qbmor/reduction_baselines.hpp>
#include <qbmor/tqb_irka.hpp>

namespace fs = std::filesystem;
using namespace qbmor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitNumerical = 3;

/// Formats a double with 17 significant digits.
std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Key-value report accumulated in insertion order.
class KeyValue {
 public:
  template <class T>
  void add(const std::string& key, const T& value) {
    std::ostringstream os;
    if constexpr (std::is_floating_point_v<T>) os << num(value);
    else os << value;
    out_ << key << " = " << os.str() << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

void emit(const std::string& text, const std::string& path) {
  std::cout << text;
  if (!path.empty()) {
    const fs::path parent = fs::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) fs::create_directories(parent, ec);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    f << text;
  }
}

class Timer {
 public:
  explicit Timer(std::string label) : label_(std::move(label)), t0_(std::chrono::steady_clock::now()) {}
  ~Timer() {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    std::fprintf(stderr, "[%s] wall time %.3f s\n", label_.c_str(), s);
  }

 private:
  std::string label_;
  std::chrono::steady_clock::time_point t0_;
};

InitKind parse_init(const std::string& s) {
  if (s == "random") return InitKind::Random;
  if (s == "linear") return InitKind::LinearIrka;
  if (s == "user") return InitKind::User;
  throw Error(ErrorCode::InvalidArgument, "unknown --init '" + s + "'");
}

// ---------------------------------------------------------------- generate --

struct GenerateArgs {
  std::string model;
  Index k = 100;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  Timer timer("generate");
  QBSystem sys;
  if (a.model == "chafee") sys = chafee_infante(a.k);
  else if (a.model == "fhn") sys = fitzhugh_nagumo(a.k);
  else throw Error(ErrorCode::InvalidArgument, "unknown model '" + a.model + "'");
  save_system(a.out, sys);
  KeyValue kv;
  kv.add("model", a.model);
  kv.add("k", a.k);
  kv.add("n", sys.n());
  kv.add("m", sys.m());
  kv.add("p", sys.p());
  emit(kv.str(), "");
  return kExitOk;
}

// ------------------------------------------------------------------ reduce --

struct ReduceArgs {
  std::string system;
  std::string method = "tqb-irka";
  Index r = 10;
  double tol = 1e-5;
  int maxit = 100;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  std::string init = "random";
  std::string init_model;
  double shift = 0.0;
  bool no_reflect = false;
  std::string out;
};

std::string irka_report_text(const IrkaConfig& cfg, const IrkaResult& res) {
  KeyValue kv;
  kv.add("method", "tqb-irka");
  kv.add("r", cfg.r);
  kv.add("seed", cfg.seed);
  kv.add("init", cfg.init == InitKind::Random ? "random" : cfg.init == InitKind::LinearIrka ? "linear" : "user");
  kv.add("gamma", cfg.gamma);
  kv.add("tol", cfg.tol);
  kv.add("maxit", cfg.maxit);
  kv.add("shift", cfg.shift);
  kv.add("converged", res.report.converged ? "true" : "false");
  kv.add("iterations", res.report.iterations);
  const auto& h = res.report.eig_change_history;
  kv.add("final_eig_change", h.empty() ? 0.0 : h.back());
  kv.add("cond_WtV", res.bases.cond_WtV);
  for (std::size_t i = 0; i < h.size(); ++i) kv.add("eig_change." + std::to_string(i + 1), h[i]);
  for (Index i = 0; i < res.report.final_eigs.size(); ++i) {
    kv.add("eig." + std::to_string(i + 1) + ".re", res.report.final_eigs[i].real());
    kv.add("eig." + std::to_string(i + 1) + ".im", res.report.final_eigs[i].imag());
  }
  for (std::size_t i = 0; i < res.report.warnings.size(); ++i)
    kv.add("warning." + std::to_string(i + 1), res.report.warnings[i]);
  return kv.str();
}

int cmd_reduce(const ReduceArgs& a) {
  const QBSystem sys = load_system(a.system);
  if (a.method == "bt") {
    Timer timer("reduce bt");
    BalancedTruncation bt = balanced_truncation(sys, a.r, a.gamma);
    bt.red.meta["gamma"] = num(a.gamma);
    save_reduced(a.out, bt.red);
    KeyValue kv;
    kv.add("method", "bt");
    kv.add("r", a.r);
    kv.add("gamma", a.gamma);
    for (Index i = 0; i < bt.hsv.size(); ++i) kv.add("hsv." + std::to_string(i + 1), bt.hsv[i]);
    emit(kv.str(), (fs::path(a.out) / "report.txt").string());
    return kExitOk;
  }
  if (a.method != "tqb-irka") throw Error(ErrorCode::InvalidArgument, "unknown --method '" + a.method + "'");
  Timer timer("reduce tqb-irka");
  IrkaConfig cfg;
  cfg.r = a.r;
  cfg.tol = a.tol;
  cfg.maxit = a.maxit;
  cfg.gamma = a.gamma;
  cfg.seed = a.seed;
  cfg.init = parse_init(a.init);
  cfg.shift = a.shift;
  cfg.reflect_unstable = !a.no_reflect;
  if (cfg.init == InitKind::User) {
    if (a.init_model.empty()) throw Error(ErrorCode::InvalidArgument, "--init user requires --init-model");
    cfg.user_init = load_reduced(a.init_model);
  }
  IrkaResult res = tqb_irka(sys, cfg);
  res.red.meta["gamma"] = num(cfg.gamma);
  res.red.meta["seed"] = std::to_string(cfg.seed);
  res.red.meta["converged"] = res.report.converged ? "true" : "false";
  save_reduced(a.out, res.red);
  emit(irka_report_text(cfg, res), (fs::path(a.out) / "report.txt").string());
  return res.report.converged ? kExitOk : kExitNoConvergence;
}

// ------------------------------------------------------------------ report --

struct ReportArgs {
  std::string system;
  std::string reduced;
  std::string what = "residuals";
  std::string input;
  double T = 10.0;
  Index samples = 500;
  double gamma = 0.0;  // 0: take it from the reduced model's metadata
  std::string out;
};

int cmd_report(const ReportArgs& a) {
  Timer timer("report " + a.what);
  const QBSystem sys = load_system(a.system);
  const ReducedModel red = load_reduced(a.reduced);
  KeyValue kv;
  kv.add("what", a.what);
  kv.add("n", sys.n());
  kv.add("r", red.r());
  if (a.what == "residuals") {
    double gamma = a.gamma;
    if (gamma <= 0.0) {
      const auto it = red.meta.find("gamma");
      gamma = it != red.meta.end() ? std::stod(it->second) : 1.0;
    }
    const ResidualReport rep = optimality_residuals(sys, red, gamma);
    kv.add("gamma", gamma);
    kv.add("E_C", rep.E_C);
    kv.add("E_B", rep.E_B);
    kv.add("E_N", rep.E_N);
    kv.add("E_H", rep.E_H);
    kv.add("E_lambda", rep.E_lambda);
    kv.add("fixed_point_gap", rep.fixed_point_gap);
    kv.add("degraded", rep.degraded ? "true" : "false");
    for (std::size_t i = 0; i < rep.notes.size(); ++i) kv.add("note." + std::to_string(i + 1), rep.notes[i]);
    emit(kv.str(), a.out.empty() ? "" : (fs::path(a.out) / "residuals.txt").string());
    return kExitOk;
  }
  if (a.what == "h2err") {
    const NormReport err = truncated_h2_error(sys, red);
    const NormReport full = truncated_h2_norm(sys);
    kv.add("h2err", err.value);
    kv.add("h2err_dual", err.dual);
    kv.add("h2norm", full.value);
    kv.add("h2err_rel", full.value > 0.0 ? err.value / full.value : 0.0);
    emit(kv.str(), a.out.empty() ? "" : (fs::path(a.out) / "h2err.txt").string());
    return kExitOk;
  }
  if (a.what == "simulate") {
    if (a.input.empty()) throw Error(ErrorCode::InvalidArgument, "--input is required for simulate");
    const InputSignal u = InputSignal::by_name(a.input);
    auto full_future = std::async(std::launch::async, [&] { return simulate(sys, u, a.T, a.samples); });
    const Trajectory yr = simulate(red, u, a.T, a.samples);
    const Trajectory yf = full_future.get();
    const OutputErrors e = output_errors(yf, yr);
    kv.add("input", a.input);
    kv.add("T", a.T);
    kv.add("samples", a.samples);
    kv.add("mean_rel", e.mean_rel);
    kv.add("linf_rel", e.linf_rel);
    if (!a.out.empty()) {
      fs::create_directories(a.out);
      std::ofstream ff(fs::path(a.out) / "full.csv", std::ios::binary);
      std::ofstream fr(fs::path(a.out) / "reduced.csv", std::ios::binary);
      if (!ff || !fr) throw Error(ErrorCode::Io, "cannot write trajectories into '" + a.out + "'");
      write_trajectory_csv(ff, yf);
      write_trajectory_csv(fr, yr);
    }
    emit(kv.str(), a.out.empty() ? "" : (fs::path(a.out) / "errors.txt").string());
    return kExitOk;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown --what '" + a.what + "'");
}

// ------------------------------------------------------------------- sweep --

struct SweepArgs {
  std::string system;
  std::string method = "tqb-irka";
  Index rmin = 2, rmax = 10;
  double tol = 1e-5;
  int maxit = 100;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  std::string init = "random";
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  Timer timer("sweep");
  if (a.rmin < 1 || a.rmax < a.rmin) throw Error(ErrorCode::InvalidArgument, "invalid order range");
  const QBSystem sys = load_system(a.system);
  std::ostringstream csv;
  csv << "r,h2err,h2err_rel,iterations,converged\n";
  const double full = truncated_h2_norm(sys).value;
  bool all_converged = true;
  for (Index r = a.rmin; r <= a.rmax; ++r) {
    ReducedModel red;
    int iterations = 0;
    bool converged = true;
    if (a.method == "bt") {
      red = balanced_truncation(sys, r, a.gamma).red;
    } else if (a.method == "tqb-irka") {
      IrkaConfig cfg;
      cfg.r = r;
      cfg.tol = a.tol;
      cfg.maxit = a.maxit;
      cfg.gamma = a.gamma;
      cfg.seed = a.seed;
      cfg.init = parse_init(a.init);
      IrkaResult res = tqb_irka(sys, cfg);
      red = std::move(res.red);
      iterations = res.report.iterations;
      converged = res.report.converged;
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown --method '" + a.method + "'");
    }
    all_converged = all_converged && converged;
    const double err = truncated_h2_error(sys, red).value;
    csv << r << ',' << num(err) << ',' << num(full > 0.0 ? err / full : 0.0) << ',' << iterations << ','
        << (converged ? 1 : 0) << '\n';
  }
  std::cout << "# seed = " << a.seed << '\n';
  emit(csv.str(), a.out);
  return all_converged ? kExitOk : kExitNoConvergence;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::Io:
    case ErrorCode::Unsupported:
    case ErrorCode::NonPositiveGamma:
    case ErrorCode::TooLarge:
      return kExitUsage;
    case ErrorCode::NoConvergence:
    case ErrorCode::MaxIterationsExceeded:
      return kExitNoConvergence;
    default:
      return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qbmor: model reduction of quadratic-bilinear control systems"};
  app.require_subcommand(1);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Write a benchmark system (manifest + MatrixMarket files)");
  gen->add_option("model", ga.model, "Benchmark model")->required()->check(CLI::IsMember({"chafee", "fhn"}));
  gen->add_option("--k", ga.k, "Number of grid points")->check(CLI::Range(3, 1000000));
  gen->add_option("--out", ga.out, "Output directory")->required();

  ReduceArgs ra;
  auto* red = app.add_subcommand("reduce", "Reduce a system and write the reduced model and report");
  red->add_option("--system", ra.system, "System directory")->required();
  red->add_option("--method", ra.method, "Reduction method")->check(CLI::IsMember({"tqb-irka", "bt"}));
  red->add_option("--r", ra.r, "Reduced order")->required()->check(CLI::PositiveNumber);
  red->add_option("--tol", ra.tol, "Relative eigenvalue-change tolerance");
  red->add_option("--maxit", ra.maxit, "Maximum number of iterations");
  red->add_option("--gamma", ra.gamma, "Rescaling factor for basis construction");
  red->add_option("--seed", ra.seed, "Random seed");
  red->add_option("--init", ra.init, "Initial guess")->check(CLI::IsMember({"random", "linear", "user"}));
  red->add_option("--init-model", ra.init_model, "Reduced model directory used with --init user");
  red->add_option("--shift", ra.shift, "Build bases with A - shift*I (e.g. 0.01 for unstable A)");
  red->add_flag("--no-reflect", ra.no_reflect, "Do not mirror unstable reduced eigenvalues");
  red->add_option("--out", ra.out, "Output directory")->required();

  ReportArgs pa;
  auto* rep = app.add_subcommand("report", "Residuals, truncated H2 error or simulation comparison");
  rep->add_option("--system", pa.system, "System directory")->required();
  rep->add_option("--reduced", pa.reduced, "Reduced model directory")->required();
  rep->add_option("--what", pa.what, "Report kind")->check(CLI::IsMember({"residuals", "h2err", "simulate"}));
  rep->add_option("--input", pa.input, "Input signal (ci_u1, ci_u2, fhn_i0_sin, fhn_i0_bump)");
  rep->add_option("--T", pa.T, "Simulation horizon")->check(CLI::PositiveNumber);
  rep->add_option("--samples", pa.samples, "Output samples")->check(CLI::Range(2, 100000000));
  rep->add_option("--gamma", pa.gamma, "Rescaling factor (default: the reduced model's)");
  rep->add_option("--out", pa.out, "Output directory for report files and CSV trajectories");

  SweepArgs sa;
  auto* sw = app.add_subcommand("sweep", "Truncated H2 error versus reduced order (CSV)");
  sw->add_option("--system", sa.system, "System directory")->required();
  sw->add_option("--method", sa.method, "Reduction method")->check(CLI::IsMember({"tqb-irka", "bt"}));
  sw->add_option("--rmin", sa.rmin, "Smallest order")->check(CLI::PositiveNumber);
  sw->add_option("--rmax", sa.rmax, "Largest order")->check(CLI::PositiveNumber);
  sw->add_option("--tol", sa.tol, "Relative eigenvalue-change tolerance");
  sw->add_option("--maxit", sa.maxit, "Maximum number of iterations");
  sw->add_option("--gamma", sa.gamma, "Rescaling factor for basis construction");
  sw->add_option("--seed", sa.seed, "Random seed");
  sw->add_option("--init", sa.init, "Initial guess")->check(CLI::IsMember({"random", "linear"}));
  sw->add_option("--out", sa.out, "CSV output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(ga);
    if (*red) return cmd_reduce(ra);
    if (*rep) return cmd_report(pa);
    if (*sw) return cmd_sweep(sa);
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error [Io]: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
