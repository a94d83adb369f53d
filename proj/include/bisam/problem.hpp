#ifndef BISAM_PROBLEM_HPP
#define BISAM_PROBLEM_HPP

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace bisam {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Smooth convex function with a known gradient Lipschitz constant.
struct SmoothOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double lipschitz_grad = 0.0;  // L_f
  Eigen::Index dimension = 0;
};

/// Proper lsc convex function accessed through its scaled proximal map,
/// prox(x, t) = argmin_u t*g(u) + 0.5*||u - x||^2.
///
/// `value` may be null and may return +infinity (indicator functions).
/// Solvers only call prox; `value` feeds objective reporting and audits.
struct ProxOracle {
  std::function<Vector(const Vector&, double)> prox;
  std::function<double(const Vector&)> value;  // optional
  Eigen::Index dimension = 0;
};

/// Strongly convex smooth outer objective.
struct OuterOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double strong_convexity = 0.0;  // sigma
  double lipschitz_grad = 0.0;    // L_h
  std::function<Vector(const Vector&, double)> prox;  // optional, Moreau variant
  Eigen::Index dimension = 0;
};

/// The bilevel triple: minimize outer over the minimizers of f + g.
struct BilevelProblem {
  SmoothOracle inner_smooth;    // f
  ProxOracle inner_nonsmooth;   // g
  OuterOracle outer;            // h
  std::optional<double> reference_inner_optimum;  // phi*
  std::optional<Vector> reference_solution;       // x*
};

/// Checks the structural constants. Violations are data, not failures.
inline std::vector<std::string> validate_problem(const BilevelProblem& p) {
  std::vector<std::string> report;
  const auto n = p.inner_smooth.dimension;
  if (n <= 0) report.push_back("inner_smooth dimension must be positive");
  if (p.inner_nonsmooth.dimension != n)
    report.push_back("dimension mismatch between inner_smooth and inner_nonsmooth");
  if (p.outer.dimension != n)
    report.push_back("dimension mismatch between inner_smooth and outer");
  if (!(p.inner_smooth.lipschitz_grad > 0.0))
    report.push_back("lipschitz_grad of inner_smooth must be positive");
  if (!(p.outer.lipschitz_grad > 0.0))
    report.push_back("lipschitz_grad of outer must be positive");
  if (!(p.outer.strong_convexity > 0.0))
    report.push_back("strong_convexity must be positive");
  else if (p.outer.strong_convexity > p.outer.lipschitz_grad)
    report.push_back("strong_convexity must not exceed lipschitz_grad of outer");
  if (p.reference_solution && p.reference_solution->size() != n)
    report.push_back("reference_solution dimension mismatch");
  return report;
}

/// Inner objective for reporting: f(x) + g(x) when g exposes a value,
/// f(x) alone otherwise.
inline double inner_objective(const BilevelProblem& p, const Vector& x) {
  double v = p.inner_smooth.value(x);
  if (p.inner_nonsmooth.value) v += p.inner_nonsmooth.value(x);
  return v;
}

}  // namespace bisam

#endif
