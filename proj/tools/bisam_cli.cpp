// Command-line harness: generate benchmark instances, run and compare the
// bilevel solvers, trace convergence, and audit operator properties.
//
// Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 audit failure.

#include "bisam/bisam.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace bisam;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitAudit = 3;
constexpr int kRefProtocolVersion = 1;

struct Options {
  std::string problem = "toy";
  int m = 100;
  int n = 500;
  double mu = 0.5;
  double delta = 0.01;
  std::uint64_t seed = 1;
  int runs = 100;
  std::string solver = "ibigsam";
  double inertia_alpha = 3.0;
  double kappa = 0.1;
  double lambda = 0.0;  // 0 = default 1/L_f
  double gamma = 0.0;   // 0 = default 2/(L_h+sigma)
  int max_iter = 10000;
  std::string stop = "dist";
  double tol = 1e-3;
  int ref_iters = 1000;
  std::string out;
  bool moreau = false;
  std::string inject_fault;
  std::vector<double> grid;
};

struct NamedProblem {
  BilevelProblem problem;
  std::optional<InstanceData> instance;  // absent for the toy fixture
};

NamedProblem make_problem(const Options& opt, std::uint64_t seed) {
  NamedProblem np;
  if (opt.problem == "toy") {
    np.problem = toy_bilevel();
  } else if (opt.problem == "nnls") {
    IllConditionedSpec spec;
    spec.rows = opt.m;
    spec.cols = opt.n;
    spec.seed = seed;
    np.instance = gen_nnls_data(spec, opt.delta);
    np.problem = problem_from_nnls(*np.instance);
  } else if (opt.problem == "lasso") {
    np.instance = gen_lasso_data(opt.m, opt.n, opt.mu, opt.delta, seed);
    np.problem = problem_from_lasso(*np.instance);
  } else {
    throw CLI::ValidationError("--problem must be toy, nnls or lasso");
  }
  return np;
}

SolverConfig make_config(const Options& opt, const BilevelProblem& problem) {
  SolverConfig config = default_config(problem);
  if (opt.lambda > 0.0) config.lambda = opt.lambda;
  if (opt.gamma > 0.0) config.gamma = opt.gamma;
  config.inertia_alpha = opt.inertia_alpha;
  config.kappa = opt.kappa;
  config.max_iterations = opt.max_iter;
  config.use_moreau_outer = opt.moreau;
  config.seed = opt.seed;
  return config;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string instance_digest(const InstanceData& d, int ref_iters) {
  std::ostringstream os;
  os.precision(17);
  os << "v" << kRefProtocolVersion << ':' << ref_iters << ':' << d.kind << ':'
     << d.a.rows() << 'x' << d.a.cols() << ':' << d.mu << ':' << d.delta << ':'
     << d.seed << ':';
  for (Eigen::Index i = 0; i < d.b.size(); ++i) os << d.b[i] << ',';
  return std::to_string(fnv1a(os.str()));
}

std::filesystem::path output_dir(const Options& opt) {
  if (opt.out.empty()) return std::filesystem::current_path();
  const auto parent = std::filesystem::path(opt.out).parent_path();
  return parent.empty() ? std::filesystem::current_path() : parent;
}

// Reference phi*/x* from a capped baseline run, cached per instance digest.
Reference reference_for(const Options& opt, const NamedProblem& np,
                        const SolverConfig& config) {
  if (!np.instance)
    return compute_reference(np.problem, config, opt.ref_iters);
  const std::string digest = instance_digest(*np.instance, opt.ref_iters);
  const auto cache_path = output_dir(opt) / ("bisam_ref_" + digest + ".txt");
  std::ifstream in(cache_path);
  if (in) {
    Reference ref;
    Eigen::Index n = 0;
    in >> ref.inner_optimum >> n;
    if (in && n == np.problem.inner_smooth.dimension) {
      ref.solution.resize(n);
      for (Eigen::Index i = 0; i < n && in; ++i) in >> ref.solution[i];
      if (in) return ref;
    }
  }
  Reference ref = compute_reference(np.problem, config, opt.ref_iters);
  std::ofstream out(cache_path);
  if (out) {
    out.precision(17);
    out << ref.inner_optimum << '\n' << ref.solution.size() << '\n';
    for (Eigen::Index i = 0; i < ref.solution.size(); ++i)
      out << ref.solution[i] << '\n';
  }
  return ref;
}

StoppingRule make_stopping(const Options& opt, const Reference& ref) {
  StoppingRule rule;
  rule.tolerance = opt.tol;
  if (opt.stop == "relgap") {
    rule.kind = StoppingRule::Kind::relative_inner_gap;
    rule.reference_value = ref.inner_optimum;
    rule.reference_point = ref.solution;
  } else if (opt.stop == "dist") {
    rule.kind = StoppingRule::Kind::distance_to_reference;
    rule.reference_point = ref.solution;
  } else if (opt.stop == "cap") {
    rule.kind = StoppingRule::Kind::iteration_cap_only;
  } else {
    throw CLI::ValidationError("--stop must be relgap, dist or cap");
  }
  return rule;
}

int cmd_run(const Options& opt) {
  NamedProblem np = make_problem(opt, opt.seed);
  SolverConfig config = make_config(opt, np.problem);
  const Reference ref = reference_for(opt, np, config);
  config.stopping = make_stopping(opt, ref);

  const Vector x0 = Vector::Zero(np.problem.inner_smooth.dimension);
  SolverResult result;
  if (opt.solver == "ibigsam")
    result = ibig_sam_run(np.problem, config, x0, x0);
  else if (opt.solver == "bigsam")
    result = big_sam_run(np.problem, config, x0);
  else
    throw CLI::ValidationError("--solver must be ibigsam or bigsam");

  const std::string out = opt.out.empty() ? "trace.csv" : opt.out;
  write_trace_csv(out, result.trace);
  std::cout << "solver " << opt.solver << " stopped after "
            << result.iterations_used << " iterations ("
            << (result.stop_reason == StopReason::tolerance_met ? "tolerance met"
                                                                : "iteration cap")
            << "), trace written to " << out << '\n';
  std::cout << "final inner objective " << result.trace.back().inner_objective
            << ", outer objective " << result.trace.back().outer_objective << '\n';
  if (config.stopping.reference_point)
    std::cout << "distance to reference "
              << (result.solution - *config.stopping.reference_point).norm()
              << '\n';
  return kExitOk;
}

int cmd_compare(const Options& opt) {
  if (opt.runs < 1) throw CLI::ValidationError("--runs must be >= 1");
  if (opt.problem == "toy")
    throw CLI::ValidationError("compare expects a generated problem (nnls or lasso)");
  StoppingRule::Kind kind;
  if (opt.stop == "relgap")
    kind = StoppingRule::Kind::relative_inner_gap;
  else if (opt.stop == "dist")
    kind = StoppingRule::Kind::distance_to_reference;
  else
    throw CLI::ValidationError("compare needs --stop relgap or dist");

  const RunSummary summary = run_comparison(
      [&](std::uint64_t seed) { return make_problem(opt, seed).problem; }, kind,
      opt.tol, opt.runs, opt.seed, opt.inertia_alpha, opt.max_iter,
      opt.ref_iters, opt.problem);
  std::cout << summary_table(summary);
  const double improvement =
      1.0 - summary.mean_iterations_ibig / summary.mean_iterations_big;
  std::cout << "  mean iteration improvement: " << improvement * 100.0 << "%\n";
  if (!opt.out.empty()) {
    std::ofstream out(opt.out);
    if (!out) throw std::runtime_error("cannot open " + opt.out);
    out << summary_csv(summary);
    std::cout << "per-run records written to " << opt.out << '\n';
  }
  return kExitOk;
}

int cmd_path(const Options& opt) {
  if (opt.grid.empty())
    throw CLI::ValidationError("--grid must list at least one lambda");
  NamedProblem np = make_problem(opt, opt.seed);
  const auto path = tikhonov_path(np.problem, opt.grid);
  const std::string out = opt.out.empty() ? "path.csv" : opt.out;
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot open " + out);
  os.precision(17);
  os << "lambda,phi,h";
  for (Eigen::Index i = 0; i < np.problem.inner_smooth.dimension; ++i)
    os << ",x" << i;
  os << '\n';
  for (const PathPoint& pt : path) {
    os << pt.lambda << ',' << pt.inner_objective << ',' << pt.outer_objective;
    for (Eigen::Index i = 0; i < pt.minimizer.size(); ++i)
      os << ',' << pt.minimizer[i];
    os << '\n';
  }
  std::cout << "path with " << path.size() << " points written to " << out << '\n';
  return kExitOk;
}

int cmd_validate(const Options& opt) {
  NamedProblem np = make_problem(opt, opt.seed);
  BilevelProblem problem = np.problem;
  if (opt.inject_fault == "gradient") {
    const auto good = problem.inner_smooth.gradient;
    problem.inner_smooth.gradient = [good](const Vector& x) {
      Vector g = good(x);
      g[0] *= 1.01;
      return g;
    };
  } else if (!opt.inject_fault.empty()) {
    throw CLI::ValidationError("--inject-fault supports: gradient");
  }
  SolverConfig config = make_config(opt, problem);

  std::vector<AuditReport> reports;
  reports.push_back(gradient_fd_check(problem.inner_smooth, 20, opt.seed));
  reports.push_back(gradient_fd_check(problem.outer, 20, opt.seed + 1));
  reports.push_back(lipschitz_gradient_audit(
      problem.inner_smooth.gradient, problem.inner_smooth.lipschitz_grad,
      problem.inner_smooth.dimension, 100, opt.seed + 2));
  reports.push_back(strong_monotonicity_audit(problem.outer, 100, opt.seed + 3));
  reports.push_back(averagedness_audit(problem, config.lambda, 100, opt.seed + 4));
  reports.push_back(contraction_audit(problem.outer, config.gamma, 100,
                                      opt.seed + 5));
  reports.push_back(prox_audit(
      problem.inner_nonsmooth, config.lambda, 100, opt.seed + 6, 6,
      opt.problem == "nnls" ? nonnegative_indicator_value
                            : std::function<double(const Vector&)>{}));

  std::ostringstream csv;
  csv << AuditReport::csv_header() << '\n';
  bool all_pass = true;
  for (const AuditReport& r : reports) {
    csv << r.csv_row() << '\n';
    all_pass &= r.pass();
  }
  if (!opt.out.empty()) {
    std::ofstream os(opt.out);
    if (!os) throw std::runtime_error("cannot open " + opt.out);
    os << csv.str();
  }
  std::cout << csv.str();
  return all_pass ? kExitOk : kExitAudit;
}

void add_common_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--problem", opt.problem, "toy, nnls or lasso");
  cmd->add_option("--m", opt.m, "rows of the operator");
  cmd->add_option("--n", opt.n, "columns of the operator");
  cmd->add_option("--mu", opt.mu, "l1 weight for lasso");
  cmd->add_option("--delta", opt.delta, "observation noise scale");
  cmd->add_option("--seed", opt.seed, "base RNG seed");
  cmd->add_option("--solver", opt.solver, "ibigsam or bigsam");
  cmd->add_option("--inertia-alpha", opt.inertia_alpha, "alpha in the inertia rule, >= 3");
  cmd->add_option("--kappa", opt.kappa, "averaging schedule constant");
  cmd->add_option("--lambda", opt.lambda, "inner step size (default 1/L_f)");
  cmd->add_option("--gamma", opt.gamma, "outer step size (default 2/(L_h+sigma))");
  cmd->add_option("--max-iter", opt.max_iter, "iteration cap");
  cmd->add_option("--stop", opt.stop, "relgap, dist or cap");
  cmd->add_option("--tol", opt.tol, "stopping tolerance");
  cmd->add_option("--ref-iters", opt.ref_iters, "reference run length");
  cmd->add_option("--out", opt.out, "output file");
  cmd->add_flag("--moreau", opt.moreau, "use the proximal outer step");
  cmd->set_config("--config");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilevel sequential averaging solvers and benchmark harness"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* run = app.add_subcommand("run", "run one solver and write a trace CSV");
  add_common_flags(run, opt);
  CLI::App* compare =
      app.add_subcommand("compare", "run both solvers over seeded instances");
  add_common_flags(compare, opt);
  compare->add_option("--runs", opt.runs, "number of seeded runs");
  CLI::App* path =
      app.add_subcommand("path", "trace the regularization path of phi + lambda*h");
  add_common_flags(path, opt);
  path->add_option("--grid", opt.grid, "decreasing lambda grid")->delimiter(',');
  CLI::App* validate =
      app.add_subcommand("validate", "audit operator properties of an instance");
  add_common_flags(validate, opt);
  validate->add_option("--inject-fault", opt.inject_fault,
                       "canary fault to inject (gradient)");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(opt);
    if (compare->parsed()) return cmd_compare(opt);
    if (path->parsed()) return cmd_path(opt);
    if (validate->parsed()) return cmd_validate(opt);
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}
