#ifndef BISAM_BENCH_HPP
#define BISAM_BENCH_HPP

#include "bisam/diagnostics.hpp"
#include "bisam/problems.hpp"
#include "bisam/solvers.hpp"

#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bisam {

/// Paper-style defaults: lambda = 1/L_f, gamma = 2/(L_h + sigma).
inline SolverConfig default_config(const BilevelProblem& problem) {
  SolverConfig config;
  config.lambda = 1.0 / problem.inner_smooth.lipschitz_grad;
  config.gamma =
      2.0 / (problem.outer.lipschitz_grad + problem.outer.strong_convexity);
  return config;
}

struct Reference {
  Vector solution;
  double inner_optimum = 0.0;  // phi at the reference point
};

/// Reference phi* and x* from a capped baseline run (no stopping rule).
inline Reference compute_reference(const BilevelProblem& problem,
                                   const SolverConfig& base, int iterations = 1000) {
  SolverConfig config = base;
  config.max_iterations = iterations;
  config.stopping = StoppingRule{};  // cap only
  const Vector x0 = Vector::Zero(problem.inner_smooth.dimension);
  const SolverResult res = big_sam_run(problem, config, x0);
  return Reference{res.solution, inner_objective(problem, res.solution)};
}

struct RunRecord {
  std::uint64_t seed = 0;
  int iterations_ibig = 0;
  int iterations_big = 0;
  double seconds_ibig = 0.0;
  double seconds_big = 0.0;
  double final_dist_ibig = 0.0;
  double final_dist_big = 0.0;
  bool trace_audits_pass = false;
};

struct RunSummary {
  std::string problem_id;
  std::vector<RunRecord> records;
  double mean_iterations_ibig = 0.0;
  double mean_iterations_big = 0.0;
  double mean_seconds_ibig = 0.0;
  double mean_seconds_big = 0.0;
  double win_rate = 0.0;  // fraction of seeds with iterations_ibig <= iterations_big
  bool all_trace_audits_pass = false;
};

/// Runs both solvers on per-seed instances and aggregates. The factory maps
/// a seed to a (problem, stopping) pair; `ref_iters` fixes the reference
/// protocol. Per-run seeds are base_seed, base_seed+1, ...
inline RunSummary run_comparison(
    const std::function<BilevelProblem(std::uint64_t)>& make_problem,
    StoppingRule::Kind stop_kind, double tolerance, int runs,
    std::uint64_t base_seed, double inertia_alpha, int max_iterations,
    int ref_iters = 1000, const std::string& problem_id = "") {
  if (runs < 1) throw std::invalid_argument("run_comparison: runs must be >= 1");
  RunSummary summary;
  summary.problem_id = problem_id;
  summary.all_trace_audits_pass = true;
  int wins = 0;
  for (int r = 0; r < runs; ++r) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
    const BilevelProblem problem = make_problem(seed);
    SolverConfig config = default_config(problem);
    config.inertia_alpha = inertia_alpha;
    config.max_iterations = max_iterations;
    config.seed = seed;
    const Reference ref = compute_reference(problem, config, ref_iters);
    config.stopping.kind = stop_kind;
    config.stopping.tolerance = tolerance;
    config.stopping.reference_value = ref.inner_optimum;
    config.stopping.reference_point = ref.solution;

    const Vector x0 = Vector::Zero(problem.inner_smooth.dimension);
    const SolverResult ibig = ibig_sam_run(problem, config, x0, x0);
    const SolverResult big = big_sam_run(problem, config, x0);

    RunRecord rec;
    rec.seed = seed;
    rec.iterations_ibig = ibig.iterations_used;
    rec.iterations_big = big.iterations_used;
    rec.seconds_ibig = ibig.trace.back().elapsed_seconds;
    rec.seconds_big = big.trace.back().elapsed_seconds;
    rec.final_dist_ibig = (ibig.solution - ref.solution).norm();
    rec.final_dist_big = (big.solution - ref.solution).norm();
    rec.trace_audits_pass = trace_audit(ibig.trace, config).pass() &&
                            trace_audit(big.trace, config).pass();
    summary.all_trace_audits_pass &= rec.trace_audits_pass;
    if (rec.iterations_ibig <= rec.iterations_big) ++wins;
    summary.records.push_back(rec);
  }
  const double n = static_cast<double>(summary.records.size());
  for (const RunRecord& rec : summary.records) {
    summary.mean_iterations_ibig += rec.iterations_ibig / n;
    summary.mean_iterations_big += rec.iterations_big / n;
    summary.mean_seconds_ibig += rec.seconds_ibig / n;
    summary.mean_seconds_big += rec.seconds_big / n;
  }
  summary.win_rate = wins / n;
  return summary;
}

inline std::string summary_csv(const RunSummary& s) {
  std::ostringstream os;
  os.precision(12);
  os << "seed,iterations_ibigsam,iterations_bigsam,seconds_ibigsam,"
        "seconds_bigsam,final_dist_ibigsam,final_dist_bigsam\n";
  for (const RunRecord& rec : s.records)
    os << rec.seed << ',' << rec.iterations_ibig << ',' << rec.iterations_big
       << ',' << rec.seconds_ibig << ',' << rec.seconds_big << ','
       << rec.final_dist_ibig << ',' << rec.final_dist_big << '\n';
  return os.str();
}

inline std::string summary_table(const RunSummary& s) {
  std::ostringstream os;
  os.precision(6);
  os << "problem: " << s.problem_id << "  runs: " << s.records.size() << '\n';
  os << "  solver     mean iterations   mean seconds\n";
  os << "  ibigsam    " << s.mean_iterations_ibig << "            "
     << s.mean_seconds_ibig << '\n';
  os << "  bigsam     " << s.mean_iterations_big << "            "
     << s.mean_seconds_big << '\n';
  os << "  win rate (ibigsam <= bigsam iterations): " << s.win_rate << '\n';
  return os.str();
}

}  // namespace bisam

#endif
