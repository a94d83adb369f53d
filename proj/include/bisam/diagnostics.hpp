#ifndef BISAM_DIAGNOSTICS_HPP
#define BISAM_DIAGNOSTICS_HPP

#include "bisam/operators.hpp"
#include "bisam/problem.hpp"
#include "bisam/rng.hpp"
#include "bisam/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>

namespace bisam {

/// Result of a sampled property check. fail <=> worst violation > tolerance.
struct AuditReport {
  std::string check;
  int samples = 0;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  int worst_sample = -1;  // argmax-violating sample index, -1 if none
  bool pass() const { return worst_violation <= tolerance; }

  std::string csv_row() const {
    std::ostringstream os;
    os.precision(12);
    os << check << ',' << samples << ',' << worst_violation << ',' << tolerance
       << ',' << worst_sample << ',' << (pass() ? "pass" : "fail");
    return os.str();
  }
  static std::string csv_header() {
    return "check,samples,worst_violation,tolerance,worst_sample,status";
  }
};

namespace detail {

// Sample points with entries uniform in [-10,10]/sqrt(n) so norms stay O(1)
// across dimensions.
inline Vector audit_point(Rng& rng, Eigen::Index n) {
  return rng.uniform_vector(n, -10.0, 10.0) / std::sqrt(static_cast<double>(n));
}

inline void record(AuditReport& report, int sample, double violation) {
  if (violation > report.worst_violation) {
    report.worst_violation = violation;
    report.worst_sample = sample;
  }
}

}  // namespace detail

/// Central finite differences against the declared gradient, relative error
/// at step 1e-6*(1+||x||).
inline AuditReport gradient_fd_check(
    const std::function<double(const Vector&)>& value,
    const std::function<Vector(const Vector&)>& gradient, Eigen::Index dim,
    int samples = 20, std::uint64_t seed = 0, double tolerance = 1e-5) {
  AuditReport report{.check = "gradient_fd", .samples = samples,
                     .tolerance = tolerance};
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector x = detail::audit_point(rng, dim);
    const double step = 1e-6 * (1.0 + x.norm());
    const Vector g = gradient(x);
    Vector fd(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      Vector xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      fd[i] = (value(xp) - value(xm)) / (2.0 * step);
    }
    const double rel = (fd - g).norm() / std::max(1.0, g.norm());
    detail::record(report, s, rel);
  }
  return report;
}

inline AuditReport gradient_fd_check(const SmoothOracle& f, int samples = 20,
                                     std::uint64_t seed = 0) {
  return gradient_fd_check(f.value, f.gradient, f.dimension, samples, seed);
}

inline AuditReport gradient_fd_check(const OuterOracle& h, int samples = 20,
                                     std::uint64_t seed = 0) {
  return gradient_fd_check(h.value, h.gradient, h.dimension, samples, seed);
}

/// Sampled Lipschitz bound ||grad(x)-grad(y)|| <= L ||x-y||, relative slack.
inline AuditReport lipschitz_gradient_audit(
    const std::function<Vector(const Vector&)>& gradient, double lipschitz,
    Eigen::Index dim, int samples = 100, std::uint64_t seed = 0,
    double tolerance = 1e-8) {
  AuditReport report{.check = "lipschitz_gradient", .samples = samples,
                     .tolerance = tolerance};
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector x = detail::audit_point(rng, dim);
    const Vector y = detail::audit_point(rng, dim);
    const double lhs = (gradient(x) - gradient(y)).norm();
    const double rhs = lipschitz * (x - y).norm();
    detail::record(report, s, (lhs - rhs) / std::max(1.0, rhs));
  }
  return report;
}

/// Sampled strong monotonicity <grad(x)-grad(y), x-y> >= sigma ||x-y||^2.
inline AuditReport strong_monotonicity_audit(const OuterOracle& h,
                                             int samples = 100,
                                             std::uint64_t seed = 0,
                                             double tolerance = 1e-8) {
  AuditReport report{.check = "strong_monotonicity", .samples = samples,
                     .tolerance = tolerance};
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector x = detail::audit_point(rng, h.dimension);
    const Vector y = detail::audit_point(rng, h.dimension);
    const double lhs = (h.gradient(x) - h.gradient(y)).dot(x - y);
    const double rhs = h.strong_convexity * (x - y).squaredNorm();
    detail::record(report, s, (rhs - lhs) / std::max(1.0, rhs));
  }
  return report;
}

/// Sampled convexity of a value oracle along random segments.
inline AuditReport convexity_audit(const std::function<double(const Vector&)>& value,
                                   Eigen::Index dim, int samples = 100,
                                   std::uint64_t seed = 0, double tolerance = 1e-8) {
  AuditReport report{.check = "convexity", .samples = samples,
                     .tolerance = tolerance};
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector x = detail::audit_point(rng, dim);
    const Vector y = detail::audit_point(rng, dim);
    const double t = rng.uniform();
    const double lhs = value(t * x + (1.0 - t) * y);
    const double rhs = t * value(x) + (1.0 - t) * value(y);
    detail::record(report, s, (lhs - rhs) / (1.0 + std::abs(rhs)));
  }
  return report;
}

/// Residual nonexpansiveness of the prox-grad map: with beta = (2+lambda*L_f)/4
/// and T = (T_lambda - (1-beta) I)/beta, checks ||Tx-Ty|| <= ||x-y||.
inline AuditReport averagedness_audit(const BilevelProblem& problem, double lambda,
                                      int samples = 100, std::uint64_t seed = 0,
                                      double tolerance = 1e-8) {
  AuditReport report{.check = "averagedness", .samples = samples,
                     .tolerance = tolerance};
  const double beta = averaged_beta(lambda, problem.inner_smooth.lipschitz_grad);
  const auto residual = [&](const Vector& x) {
    return Vector((prox_grad_map(problem, lambda, x) - (1.0 - beta) * x) / beta);
  };
  Rng rng(seed);
  const Eigen::Index n = problem.inner_smooth.dimension;
  for (int s = 0; s < samples; ++s) {
    const Vector x = detail::audit_point(rng, n);
    const Vector y = detail::audit_point(rng, n);
    const double lhs = (residual(x) - residual(y)).norm();
    const double rhs = (x - y).norm();
    detail::record(report, s, (lhs - rhs) / std::max(1.0, rhs));
  }
  return report;
}

/// Contraction of the outer step with the factor from contraction_factor.
inline AuditReport contraction_audit(const OuterOracle& h, double gamma,
                                     int samples = 100, std::uint64_t seed = 0,
                                     double tolerance = 1e-8) {
  AuditReport report{.check = "contraction", .samples = samples,
                     .tolerance = tolerance};
  const double eta =
      contraction_factor(gamma, h.strong_convexity, h.lipschitz_grad);
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector x = detail::audit_point(rng, h.dimension);
    const Vector y = detail::audit_point(rng, h.dimension);
    const double lhs = (outer_step(h, gamma, x) - outer_step(h, gamma, y)).norm();
    const double rhs = eta * (x - y).norm();
    detail::record(report, s, (lhs - rhs) / std::max(1.0, rhs));
  }
  return report;
}

namespace detail {

// Coordinate-wise minimization of t*g(u) + 0.5||u-x||^2 by coarse grid scan
// plus golden-section refinement; exact for separable convex g, a few cyclic
// sweeps otherwise. Handles +infinity values (indicators).
inline Vector brute_force_prox(const std::function<double(const Vector&)>& g_value,
                               const Vector& x, double scale) {
  const auto objective = [&](const Vector& u) {
    const double gv = g_value ? g_value(u) : 0.0;
    return scale * gv + 0.5 * (u - x).squaredNorm();
  };
  Vector u = Vector::Zero(x.size());
  const double radius = x.cwiseAbs().maxCoeff() + scale + 1.0;
  const int grid = 4001;
  const double gold = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const auto line = [&](double t) {
        Vector w = u;
        w[k] = t;
        return objective(w);
      };
      double best_t = u[k], best_v = line(best_t);
      const double lo = x[k] - radius, hi = x[k] + radius;
      const double h = (hi - lo) / (grid - 1);
      for (int i = 0; i < grid; ++i) {
        const double t = lo + i * h;
        const double v = line(t);
        if (v < best_v) {
          best_v = v;
          best_t = t;
        }
      }
      double a = best_t - h, b = best_t + h;
      double c = b - gold * (b - a), d = a + gold * (b - a);
      double fc = line(c), fd = line(d);
      while (b - a > 1e-10) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - gold * (b - a);
          fc = line(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + gold * (b - a);
          fd = line(d);
        }
      }
      // the midpoint may fall a hair outside the domain of an indicator
      // (making u infeasible for later sweeps); keep the best finite candidate
      u[k] = best_t;
      double best = line(best_t);
      for (double t : {0.5 * (a + b), a, b}) {
        const double v = line(t);
        if (v < best) {
          best = v;
          u[k] = t;
        }
      }
    }
  }
  return u;
}

}  // namespace detail

/// Firm nonexpansiveness of the prox, plus (for dimension <= cap) agreement
/// with a brute-force minimizer of scale*g(u) + 0.5||u-x||^2. A separate
/// `true_value` can supply the extended value of g when the oracle's own
/// value field is a reporting convention (e.g. indicators reporting 0).
inline AuditReport prox_audit(const ProxOracle& g, double scale,
                              int samples = 100, std::uint64_t seed = 0,
                              int brute_force_dim_cap = 6,
                              std::function<double(const Vector&)> true_value = {},
                              double firm_tolerance = 1e-8,
                              double brute_tolerance = 1e-6) {
  AuditReport report{.check = "prox_firm_nonexpansive", .samples = samples,
                     .tolerance = firm_tolerance};
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector x = detail::audit_point(rng, g.dimension);
    const Vector y = detail::audit_point(rng, g.dimension);
    const Vector px = g.prox(x, scale);
    const Vector py = g.prox(y, scale);
    const double lhs = (px - py).squaredNorm();
    const double rhs = (px - py).dot(x - y);
    detail::record(report, s, (lhs - rhs) / (1.0 + std::abs(lhs)));
  }
  if (g.dimension <= brute_force_dim_cap) {
    report.check = "prox_firm_nonexpansive+brute_force";
    const auto& value = true_value ? true_value : g.value;
    AuditReport brute{.check = "brute", .tolerance = brute_tolerance};
    const int brute_samples = std::min(samples, 10);
    for (int s = 0; s < brute_samples; ++s) {
      const Vector x = detail::audit_point(rng, g.dimension);
      const Vector u = g.prox(x, scale);
      const Vector v = detail::brute_force_prox(value, x, scale);
      detail::record(brute, s, (u - v).norm());
    }
    // fold the brute-force result in on its own tolerance scale
    if (brute.worst_violation > brute_tolerance) {
      report.worst_violation =
          std::max(report.worst_violation, brute.worst_violation);
      report.tolerance = std::min(report.tolerance, brute_tolerance);
      report.worst_sample = brute.worst_sample;
    }
  }
  return report;
}

/// Structural checks over a completed trace: monotone gapless n, theta within
/// its bound, inertia magnitude within eps_n, alpha in (0,1).
inline AuditReport trace_audit(const IterationTrace& trace,
                               const SolverConfig& config,
                               double tolerance = 1e-12) {
  AuditReport report{.check = "trace", .samples = static_cast<int>(trace.size()),
                     .tolerance = tolerance};
  if (trace.empty()) {
    report.worst_violation = std::numeric_limits<double>::infinity();
    report.worst_sample = 0;
    return report;
  }
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceRow& row = trace[i];
    const int expected_n = static_cast<int>(i) + trace.front().n;
    if (row.n != expected_n) {
      detail::record(report, static_cast<int>(i),
                     std::numeric_limits<double>::infinity());
      continue;
    }
    const double frac = (row.n - 1.0) / (row.n + config.inertia_alpha - 1.0);
    detail::record(report, static_cast<int>(i), row.theta - frac);
    detail::record(report, static_cast<int>(i), row.inertia_magnitude - row.eps);
    detail::record(report, static_cast<int>(i), -row.alpha);
    detail::record(report, static_cast<int>(i), row.alpha - 1.0);
  }
  return report;
}

}  // namespace bisam

#endif
