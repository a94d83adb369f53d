#ifndef BISAM_SOLVERS_HPP
#define BISAM_SOLVERS_HPP

#include "bisam/operators.hpp"
#include "bisam/problem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bisam {

struct StoppingRule {
  enum class Kind { relative_inner_gap, distance_to_reference, iteration_cap_only };
  Kind kind = Kind::iteration_cap_only;
  double tolerance = 0.0;
  std::optional<double> reference_value;   // phi*, for relative_inner_gap
  std::optional<Vector> reference_point;   // x*, for distance_to_reference
};

struct SolverConfig {
  double lambda = 0.0;
  double gamma = 0.0;
  double inertia_alpha = 3.0;     // alpha in the theta_bar rule, >= 3
  double kappa = 0.1;             // alpha_n = 2*kappa / (n*(1-beta))
  double epsilon_exponent = 0.01; // eps_n = alpha_n / n^exponent
  // When set, overrides the ratio schedule with eps_n = c / n^2.
  std::optional<double> epsilon_inverse_square_c;
  int max_iterations = 1000;
  StoppingRule stopping;
  bool use_moreau_outer = false;
  bool force_zero_inertia = false;  // theta_n := 0 every step
  std::uint64_t seed = 0;
};

struct TraceRow {
  int n = 0;
  double theta = 0.0;
  double alpha = 0.0;
  double eps = 0.0;
  double inner_objective = 0.0;  // phi(x_{n+1})
  double outer_objective = 0.0;  // h(x_{n+1})
  double dist_to_reference = std::numeric_limits<double>::quiet_NaN();
  double inertia_magnitude = 0.0;  // theta_n * ||x_n - x_{n-1}||
  double elapsed_seconds = 0.0;    // cumulative, iterate loop only
};

using IterationTrace = std::vector<TraceRow>;

enum class StopReason { tolerance_met, iteration_cap };

struct SolverResult {
  Vector solution;
  int iterations_used = 0;
  StopReason stop_reason = StopReason::iteration_cap;
  IterationTrace trace;
};

/// Upper inertia bound: min((n-1)/(n+alpha-1), eps_n/||x_n - x_prev||),
/// dropping the second term when x_n == x_prev (exact bitwise equality).
inline double theta_bar(int n, double inertia_alpha, double eps_n,
                        const Vector& x_n, const Vector& x_prev) {
  const double frac = (n - 1.0) / (n + inertia_alpha - 1.0);
  const double dist = (x_n - x_prev).norm();
  if (dist == 0.0) return frac;
  return std::min(frac, eps_n / dist);
}

/// alpha_n = 2*kappa / (n*(1-beta)), clamped into (0, 1).
inline double alpha_schedule(int n, double kappa, double beta) {
  const double raw = 2.0 * kappa / (n * (1.0 - beta));
  const double cap = 1.0 - 1e-6;
  return raw < cap ? raw : cap;
}

/// eps_n = alpha_n / n^exponent. exponent = 0 degenerates to eps_n = alpha_n,
/// which drops the o(alpha_n) decay; callers are expected to warn.
inline double epsilon_schedule(int n, double alpha_n, double exponent) {
  return alpha_n / std::pow(static_cast<double>(n), exponent);
}

namespace detail {

inline void check_run_inputs(const BilevelProblem& problem,
                             const SolverConfig& config, const Vector& x0) {
  auto report = validate_problem(problem);
  if (!report.empty())
    throw std::invalid_argument("solver: invalid problem: " + report.front());
  if (x0.size() != problem.inner_smooth.dimension)
    throw std::invalid_argument("solver: start point dimension mismatch");
  if (config.max_iterations <= 0)
    throw std::invalid_argument("solver: max_iterations must be positive");
  if (config.inertia_alpha < 3.0)
    throw std::invalid_argument("solver: inertia_alpha must be >= 3");
  if (config.stopping.kind == StoppingRule::Kind::relative_inner_gap) {
    if (!config.stopping.reference_value || !(*config.stopping.reference_value > 0.0))
      throw std::invalid_argument("solver: relative_inner_gap needs reference phi* > 0");
  }
  if (config.stopping.kind == StoppingRule::Kind::distance_to_reference) {
    if (!config.stopping.reference_point ||
        config.stopping.reference_point->size() != x0.size())
      throw std::invalid_argument("solver: distance stopping needs matching reference point");
  }
}

inline bool stop_satisfied(const StoppingRule& rule, const BilevelProblem& problem,
                           const Vector& x) {
  switch (rule.kind) {
    case StoppingRule::Kind::relative_inner_gap: {
      const double phi = inner_objective(problem, x);
      return (phi - *rule.reference_value) / *rule.reference_value <= rule.tolerance;
    }
    case StoppingRule::Kind::distance_to_reference:
      return (x - *rule.reference_point).norm() <= rule.tolerance;
    case StoppingRule::Kind::iteration_cap_only:
      return false;
  }
  return false;
}

inline double epsilon_for(const SolverConfig& config, int n, double alpha_n) {
  if (config.epsilon_inverse_square_c)
    return *config.epsilon_inverse_square_c / (static_cast<double>(n) * n);
  return epsilon_schedule(n, alpha_n, config.epsilon_exponent);
}

}  // namespace detail

/// One update of the inertial scheme from the pair (x_prev, x_n) with a
/// given theta. Exposed separately so the zero-inertia degeneracy can be
/// checked against the baseline map.
inline Vector ibig_sam_step(const BilevelProblem& problem, const SolverConfig& config,
                            double alpha_n, double theta, const Vector& x_n,
                            const Vector& x_prev) {
  const Vector y = x_n + theta * (x_n - x_prev);
  const Vector s = prox_grad_map(problem, config.lambda, y);
  const Vector z = config.use_moreau_outer
                       ? moreau_outer_step(problem.outer, config.gamma, y)
                       : outer_step(problem.outer, config.gamma, y);
  return alpha_n * z + (1.0 - alpha_n) * s;
}

/// One update of the baseline sequential averaging scheme.
inline Vector big_sam_step(const BilevelProblem& problem, const SolverConfig& config,
                           double alpha_n, const Vector& x) {
  const Vector s = prox_grad_map(problem, config.lambda, x);
  const Vector z = config.use_moreau_outer
                       ? moreau_outer_step(problem.outer, config.gamma, x)
                       : outer_step(problem.outer, config.gamma, x);
  return alpha_n * z + (1.0 - alpha_n) * s;
}

namespace detail {

template <typename StepFn>
SolverResult run_loop(const BilevelProblem& problem, const SolverConfig& config,
                      Vector x, StepFn&& step) {
  SolverResult result;
  result.trace.reserve(
      static_cast<std::size_t>(std::min(config.max_iterations, 4096)));
  const double beta =
      averaged_beta(config.lambda, problem.inner_smooth.lipschitz_grad);
  const auto t0 = std::chrono::steady_clock::now();
  for (int n = 1; n <= config.max_iterations; ++n) {
    const double alpha_n = alpha_schedule(n, config.kappa, beta);
    const double eps_n = epsilon_for(config, n, alpha_n);
    TraceRow row;
    row.n = n;
    row.alpha = alpha_n;
    row.eps = eps_n;
    x = step(n, alpha_n, eps_n, x, row);
    if (!x.allFinite())
      throw std::runtime_error("solver: non-finite iterate at iteration " +
                               std::to_string(n));
    row.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.inner_objective = inner_objective(problem, x);
    row.outer_objective = problem.outer.value(x);
    if (config.stopping.reference_point)
      row.dist_to_reference = (x - *config.stopping.reference_point).norm();
    result.trace.push_back(row);
    result.iterations_used = n;
    if (stop_satisfied(config.stopping, problem, x)) {
      result.stop_reason = StopReason::tolerance_met;
      result.solution = x;
      return result;
    }
  }
  result.stop_reason = StopReason::iteration_cap;
  result.solution = x;
  return result;
}

}  // namespace detail

/// Inertial scheme: y_n = x_n + theta_n (x_n - x_{n-1}), then the averaged
/// prox-grad / contraction update. theta_n is taken equal to its bound.
inline SolverResult ibig_sam_run(const BilevelProblem& problem,
                                 const SolverConfig& config, const Vector& x0,
                                 const Vector& x1) {
  detail::check_run_inputs(problem, config, x0);
  if (x1.size() != x0.size())
    throw std::invalid_argument("solver: x1 dimension mismatch");
  const double lf = problem.inner_smooth.lipschitz_grad;
  if (!(config.lambda > 0.0 && config.lambda < 2.0 / lf))
    throw std::invalid_argument("solver: lambda must lie in (0, 2/L_f)");
  Vector x_prev = x0;
  return detail::run_loop(
      problem, config, x1,
      [&](int n, double alpha_n, double eps_n, const Vector& x_n, TraceRow& row) {
        const double theta =
            config.force_zero_inertia
                ? 0.0
                : theta_bar(n, config.inertia_alpha, eps_n, x_n, x_prev);
        row.theta = theta;
        row.inertia_magnitude = theta * (x_n - x_prev).norm();
        Vector next = ibig_sam_step(problem, config, alpha_n, theta, x_n, x_prev);
        x_prev = x_n;
        return next;
      });
}

/// Baseline scheme without inertia; lambda restricted to (0, 1/L_f].
inline SolverResult big_sam_run(const BilevelProblem& problem,
                                const SolverConfig& config, const Vector& x0) {
  detail::check_run_inputs(problem, config, x0);
  const double lf = problem.inner_smooth.lipschitz_grad;
  if (!(config.lambda > 0.0 && config.lambda <= 1.0 / lf))
    throw std::invalid_argument("solver: lambda must lie in (0, 1/L_f] for the baseline");
  return detail::run_loop(
      problem, config, x0,
      [&](int /*n*/, double alpha_n, double /*eps_n*/, const Vector& x, TraceRow& row) {
        row.theta = 0.0;
        row.inertia_magnitude = 0.0;
        return big_sam_step(problem, config, alpha_n, x);
      });
}

struct PathPoint {
  double lambda = 0.0;
  Vector minimizer;
  double inner_objective = 0.0;
  double outer_objective = 0.0;
};

/// Regularization path: for each lambda, minimizes phi + lambda*h by plain
/// prox-grad with step 1/(L_f + lambda*L_h), warm-starting from the
/// previous minimizer. Stops on relative objective change <= rel_tol.
inline std::vector<PathPoint> tikhonov_path(const BilevelProblem& problem,
                                            const std::vector<double>& lambdas,
                                            double rel_tol = 1e-10,
                                            int max_inner_iterations = 100000) {
  auto report = validate_problem(problem);
  if (!report.empty())
    throw std::invalid_argument("tikhonov_path: invalid problem: " + report.front());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0))
      throw std::invalid_argument("tikhonov_path: lambdas must be positive");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
      throw std::invalid_argument("tikhonov_path: lambdas must be strictly decreasing");
  }
  std::vector<PathPoint> path;
  path.reserve(lambdas.size());
  Vector x = Vector::Zero(problem.inner_smooth.dimension);
  for (double lam : lambdas) {
    const double lip =
        problem.inner_smooth.lipschitz_grad + lam * problem.outer.lipschitz_grad;
    const double step = 1.0 / lip;
    auto objective = [&](const Vector& u) {
      return inner_objective(problem, u) + lam * problem.outer.value(u);
    };
    double prev_obj = objective(x);
    for (int it = 0; it < max_inner_iterations; ++it) {
      const Vector grad = problem.inner_smooth.gradient(x) +
                          lam * problem.outer.gradient(x);
      x = problem.inner_nonsmooth.prox(x - step * grad, step);
      if (!x.allFinite())
        throw std::runtime_error("tikhonov_path: non-finite iterate");
      const double obj = objective(x);
      if (std::abs(prev_obj - obj) <= rel_tol * (1.0 + std::abs(obj))) break;
      prev_obj = obj;
    }
    PathPoint pt;
    pt.lambda = lam;
    pt.minimizer = x;
    pt.inner_objective = inner_objective(problem, x);
    pt.outer_objective = problem.outer.value(x);
    path.push_back(std::move(pt));
  }
  return path;
}

}  // namespace bisam

#endif
