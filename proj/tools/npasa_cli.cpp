#include "npasa/driver.hpp"
#include "npasa/estimators.hpp"
#include "npasa/oracle.hpp"
#include "npasa/projection.hpp"
#include "npasa/subsolve.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

namespace {

using namespace npasa;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitIterationCap = 2;
constexpr int kExitCheckFailure = 3;

struct ProblemSelection {
  std::string file;
  std::string corpus_name;
};

struct LoadedProblem {
  NlpProblem problem;
  std::string name;
  Vector x0;
  Vector lambda0;
};

Vector parse_vector_flag(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  Vector v(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

LoadedProblem load_selection(const ProblemSelection& sel) {
  LoadedProblem out;
  if (!sel.corpus_name.empty()) {
    const CorpusProblem& cp = corpus_problem(sel.corpus_name);
    out.problem = cp.problem;
    out.name = cp.name;
    out.x0 = cp.default_x0;
    out.lambda0 = cp.default_lambda0;
    return out;
  }
  const QuadraticNlpSpec spec = load_spec_file(sel.file);
  out.problem = spec.to_problem();
  out.name = spec.name;
  out.x0 = project(out.problem.omega, Vector::Zero(out.problem.n)).y_star;
  out.lambda0 = Vector::Zero(out.problem.ell);
  return out;
}

void add_config_flags(CLI::App* cmd, SolverConfig& config) {
  cmd->add_option("--eps", config.eps, "termination tolerance on E_m1 and E_c");
  cmd->add_option("--theta", config.theta, "phase branching ratio in (0,1)");
  cmd->add_option("--phi", config.phi, "penalty growth factor > 1");
  cmd->add_option("--lambda-bar", config.lambda_bar, "multiplier safeguard half-width");
  cmd->add_option("--q0", config.q0, "initial augmented-Lagrangian penalty");
  cmd->add_option("--alpha", config.alpha, "constraint-step slack threshold");
  cmd->add_option("--beta", config.beta, "constraint-step penalty floor");
  cmd->add_option("--sigma", config.sigma, "Armijo backtracking factor");
  cmd->add_option("--tau", config.tau, "Armijo decrease parameter");
  cmd->add_option("--p-init", config.p_init, "multiplier-step penalty");
  cmd->add_option("--delta", config.delta, "multiplier-step decrease factor");
  cmd->add_option("--gamma", config.gamma, "multiplier estimation regularizer");
  cmd->add_option("--inner-tol", config.inner_tol, "inner stationarity tolerance");
  cmd->add_option("--max-outer", config.max_outer, "outer iteration cap");
  cmd->add_option("--max-constraint-iters", config.max_constraint_iters, "constraint-step iteration cap");
  cmd->add_option("--max-multiplier-iters", config.max_multiplier_iters, "multiplier-step iteration cap");
  cmd->add_option("--max-backtracks", config.max_backtracks, "line-search backtrack cap");
  cmd->add_option("--s-min", config.s_min, "line-search floor");
}

int cmd_solve(const ProblemSelection& sel, const std::string& x0_text, const std::string& lambda0_text,
              const std::string& log_path, const SolverConfig& config) {
  const LoadedProblem lp = load_selection(sel);
  const Vector x0 = x0_text.empty() ? lp.x0 : parse_vector_flag(x0_text);
  const Vector lambda0 = lambda0_text.empty() ? lp.lambda0 : parse_vector_flag(lambda0_text);
  if (x0.size() != lp.problem.n) throw std::invalid_argument("--x0 has wrong length");
  if (lambda0.size() != lp.problem.ell) throw std::invalid_argument("--lambda0 has wrong length");
  const Vector mu0 = Vector::Zero(lp.problem.omega.stacked_size());

  const SolveOutcome out = npasa_solve(lp.problem, x0, lambda0, mu0, config);
  if (!log_path.empty()) write_log_file(log_path, out.log);

  std::printf("problem           %s\n", lp.name.c_str());
  std::printf("status            %s\n", out.status == SolveStatus::Converged ? "Converged" : "MaxOuterIterations");
  std::printf("outer iterations  %zu (phase one %d, phase two %d)\n", out.log.size(), out.phase1_steps,
              out.phase2_steps);
  std::printf("final E1          %.12e\n", out.final_e1);
  std::printf("final E_m1        %.12e\n", out.final_em1);
  std::printf("x                ");
  for (int i = 0; i < out.final_iterate.x.size(); ++i) std::printf(" %.12g", out.final_iterate.x[i]);
  std::printf("\nlambda           ");
  for (int i = 0; i < out.final_iterate.lambda.size(); ++i) std::printf(" %.12g", out.final_iterate.lambda[i]);
  std::printf("\nevaluations       f=%ld grad=%ld h=%ld jac=%ld\n", out.counters.f_evals, out.counters.grad_evals,
              out.counters.h_evals, out.counters.jac_evals);
  return out.status == SolveStatus::Converged ? kExitOk : kExitIterationCap;
}

int cmd_corpus(const std::string& dump_dir) {
  std::printf("%-16s %3s %3s  %-22s %s\n", "name", "n", "ell", "x*", "lambda*");
  for (const auto& cp : corpus()) {
    std::ostringstream xs, ls;
    xs << cp.x_star.transpose();
    ls << cp.lambda_star.transpose();
    std::printf("%-16s %3d %3d  %-22s %s\n", cp.name.c_str(), cp.problem.n, cp.problem.ell, xs.str().c_str(),
                ls.str().c_str());
  }
  if (!dump_dir.empty()) {
    std::filesystem::create_directories(dump_dir);
    int written = 0;
    for (const auto& cp : corpus()) {
      if (!cp.quadratic) continue;
      save_spec_file(*cp.quadratic, dump_dir + "/" + cp.name + ".nlp");
      ++written;
    }
    std::printf("wrote %d problem files to %s\n", written, dump_dir.c_str());
  }
  return kExitOk;
}

int cmd_check(const ProblemSelection& sel, double fd_step, int samples) {
  const LoadedProblem lp = load_selection(sel);
  const NlpProblem& p = lp.problem;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  bool all_ok = true;
  std::printf("%-34s %-12s %-12s %s\n", "check", "worst", "tolerance", "result");
  auto report = [&](const std::string& name, double worst, double tol) {
    const bool ok = worst <= tol;
    all_ok = all_ok && ok;
    std::printf("%-34s %-12.3e %-12.3e %s\n", name.c_str(), worst, tol, ok ? "ok" : "FAIL");
  };

  std::vector<Vector> points;
  for (int i = 0; i < samples; ++i) {
    Vector x = lp.x0;
    for (int j = 0; j < p.n; ++j) x[j] += 0.5 * unit(rng);
    if (!p.omega.is_feasible(x, 1e-9)) x = project(p.omega, x).y_star;
    points.push_back(x);
  }

  double worst_grad = 0;
  for (const auto& x : points) {
    const Vector g = p.eval_grad_f(x);
    const Vector g_fd = oracle::finite_diff_gradient(p.f, x, fd_step);
    worst_grad = std::max(worst_grad, (g - g_fd).norm() / (1.0 + g.norm()));
  }
  report("objective gradient vs FD", worst_grad, 5e-6);

  for (int j = 0; j < p.ell; ++j) {
    double worst = 0;
    for (const auto& x : points) {
      const Matrix J = p.eval_jac_h(x);
      const Matrix J_fd = oracle::finite_diff_jacobian(p.h, x, fd_step);
      worst = std::max(worst, (J.row(j) - J_fd.row(j)).norm() / (1.0 + J.row(j).norm()));
    }
    report("constraint " + std::to_string(j) + " jacobian vs FD", worst, 5e-6);
  }

  double worst_kkt = 0;
  double worst_feas = 0;
  for (const auto& x : points) {
    for (int rep = 0; rep < 4; ++rep) {
      Vector c = x;
      for (int j = 0; j < p.n; ++j) c[j] += 2.0 * unit(rng);
      const ProjectionResult pr = project(p.omega, c);
      worst_kkt = std::max(worst_kkt, pr.kkt_residual);
      const Vector r = p.omega.stacked_residual(pr.y_star);
      for (int i = 0; i < r.size(); ++i) worst_feas = std::max(worst_feas, r[i]);
    }
  }
  report("projection KKT residual sweep", worst_kkt, 1e-8);
  report("projected points feasible", std::max(worst_feas, 0.0), 1e-8);

  return all_ok ? kExitOk : kExitCheckFailure;
}

int cmd_rate(const std::string& log_path, int window) {
  const std::vector<LogRecord> log = read_log_file(log_path);
  std::vector<double> e1s, hs;
  for (const auto& rec : log) {
    if (!rec.accepted) continue;
    if (rec.e1 > 0) e1s.push_back(rec.e1);
    const double h = std::sqrt(std::max(rec.ec, 0.0));
    if (h > 0) hs.push_back(h);
  }
  bool any = false;
  const auto fit_and_print = [&](const char* label, const std::vector<double>& series) {
    const int w = window > 0 ? std::min<int>(window, static_cast<int>(series.size()))
                             : static_cast<int>(series.size());
    try {
      const RateFit fit = fit_convergence_order(series, w);
      std::printf("%-6s tail: order %.3f  constant %.4g  (%d pairs)\n", label, fit.order, fit.constant, fit.pairs);
      any = true;
    } catch (const std::invalid_argument& e) {
      std::printf("%-6s tail: %s\n", label, e.what());
    }
  };
  fit_and_print("E1", e1s);
  fit_and_print("||h||", hs);
  if (!any) throw std::invalid_argument("log has no fittable tail");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NPASA nonlinear programming solver toolkit"};
  app.require_subcommand(1);

  ProblemSelection sel;
  SolverConfig config;
  std::string x0_text, lambda0_text, log_path, dump_dir;
  double fd_step = 1e-5;
  int samples = 25;
  int window = 0;

  auto add_problem_flags = [&sel](CLI::App* cmd) {
    auto* file = cmd->add_option("--problem", sel.file, "problem file path");
    auto* name = cmd->add_option("--corpus-name", sel.corpus_name, "built-in corpus problem name");
    file->excludes(name);
    name->excludes(file);
  };

  CLI::App* solve = app.add_subcommand("solve", "run the solver on a problem");
  add_problem_flags(solve);
  solve->add_option("--x0", x0_text, "initial point, comma separated");
  solve->add_option("--lambda0", lambda0_text, "initial equality multipliers, comma separated");
  solve->add_option("--log", log_path, "write the iterate log (JSON lines) here");
  add_config_flags(solve, config);

  CLI::App* corpus_cmd = app.add_subcommand("corpus", "list the built-in problems");
  corpus_cmd->add_option("--dump", dump_dir, "write the quadratic corpus problems as files");

  CLI::App* check = app.add_subcommand("check", "derivative and projection checks");
  add_problem_flags(check);
  check->add_option("--fd-step", fd_step, "central difference step")->check(CLI::Range(1e-8, 1e-4));
  check->add_option("--samples", samples, "number of sample points");

  CLI::App* rate = app.add_subcommand("rate", "fit convergence orders from an iterate log");
  rate->add_option("--log", log_path, "iterate log path")->required();
  rate->add_option("--window", window, "trailing window length (default: whole tail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (solve->parsed()) {
      if (sel.file.empty() && sel.corpus_name.empty())
        throw std::invalid_argument("one of --problem or --corpus-name is required");
      config.validate();
      return cmd_solve(sel, x0_text, lambda0_text, log_path, config);
    }
    if (corpus_cmd->parsed()) return cmd_corpus(dump_dir);
    if (check->parsed()) {
      if (sel.file.empty() && sel.corpus_name.empty())
        throw std::invalid_argument("one of --problem or --corpus-name is required");
      return cmd_check(sel, fd_step, samples);
    }
    if (rate->parsed()) return cmd_rate(log_path, window);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  }
  return kExitInputError;
}
