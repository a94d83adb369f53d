#ifndef BISAM_OPERATORS_HPP
#define BISAM_OPERATORS_HPP

#include "bisam/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace bisam {

/// Componentwise shrinkage: sgn(x_k) * max(|x_k| - mu, 0).
/// Entries with |x_k| = mu map to exactly 0.
inline Vector soft_threshold(const Vector& x, double mu) {
  if (mu < 0.0) throw std::invalid_argument("soft_threshold: mu must be nonnegative");
  Vector out(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double a = std::abs(x[k]) - mu;
    out[k] = a > 0.0 ? (x[k] > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

/// Euclidean projection onto the nonnegative orthant.
inline Vector project_nonnegative(const Vector& x) {
  return x.cwiseMax(0.0);
}

/// Averagedness constant of the prox-grad map: (2 + lambda*L_f) / 4.
inline double averaged_beta(double lambda, double lipschitz_grad) {
  if (!(lipschitz_grad > 0.0))
    throw std::invalid_argument("averaged_beta: L must be positive");
  if (!(lambda > 0.0 && lambda < 2.0 / lipschitz_grad))
    throw std::invalid_argument("averaged_beta: lambda must lie in (0, 2/L)");
  return (2.0 + lambda * lipschitz_grad) / 4.0;
}

/// Contraction factor of I - gamma*grad h: sqrt(1 - 2*gamma*sigma*L_h/(sigma+L_h)).
inline double contraction_factor(double gamma, double sigma, double lipschitz_grad) {
  if (!(sigma > 0.0 && sigma <= lipschitz_grad))
    throw std::invalid_argument("contraction_factor: need 0 < sigma <= L_h");
  if (!(gamma > 0.0 && gamma <= 2.0 / (sigma + lipschitz_grad)))
    throw std::invalid_argument("contraction_factor: gamma must lie in (0, 2/(sigma+L_h)]");
  const double t = 1.0 - 2.0 * gamma * sigma * lipschitz_grad / (sigma + lipschitz_grad);
  return std::sqrt(t > 0.0 ? t : 0.0);
}

/// Step sizes with their derived constants, validated once at configuration.
struct StepParameters {
  double lambda = 0.0;
  double gamma = 0.0;
  double beta = 0.0;  // averagedness of the prox-grad map
  double eta = 0.0;   // contraction factor of the outer step
};

/// `baseline_range` restricts lambda to (0, 1/L_f] as the non-inertial
/// scheme requires; otherwise (0, 2/L_f).
inline StepParameters make_step_parameters(double lambda, double gamma,
                                           double lipschitz_grad_inner,
                                           double strong_convexity,
                                           double lipschitz_grad_outer,
                                           bool baseline_range = false) {
  if (baseline_range) {
    if (!(lambda > 0.0 && lambda <= 1.0 / lipschitz_grad_inner))
      throw std::invalid_argument("lambda must lie in (0, 1/L_f] for the baseline scheme");
  }
  StepParameters p;
  p.lambda = lambda;
  p.gamma = gamma;
  p.beta = averaged_beta(lambda, lipschitz_grad_inner);
  p.eta = contraction_factor(gamma, strong_convexity, lipschitz_grad_outer);
  return p;
}

/// Prox-grad map T_lambda(x) = prox_{lambda g}(x - lambda*grad f(x)).
inline Vector prox_grad_map(const BilevelProblem& problem, double lambda,
                            const Vector& x) {
  const double lf = problem.inner_smooth.lipschitz_grad;
  if (!(lambda > 0.0 && lambda < 2.0 / lf))
    throw std::invalid_argument("prox_grad_map: lambda must lie in (0, 2/L_f)");
  return problem.inner_nonsmooth.prox(x - lambda * problem.inner_smooth.gradient(x),
                                      lambda);
}

/// Outer contraction step S_gamma(x) = x - gamma*grad h(x).
inline Vector outer_step(const OuterOracle& h, double gamma, const Vector& x) {
  if (!(gamma > 0.0 && gamma <= 2.0 / (h.lipschitz_grad + h.strong_convexity)))
    throw std::invalid_argument("outer_step: gamma must lie in (0, 2/(L_h+sigma)]");
  return x - gamma * h.gradient(x);
}

/// Moreau-envelope variant of the outer step: prox_{gamma h}(y).
inline Vector moreau_outer_step(const OuterOracle& h, double gamma, const Vector& y) {
  if (!h.prox) throw std::invalid_argument("moreau_outer_step: outer oracle has no prox");
  if (!(gamma > 0.0)) throw std::invalid_argument("moreau_outer_step: gamma must be positive");
  return h.prox(y, gamma);
}

}  // namespace bisam

#endif
