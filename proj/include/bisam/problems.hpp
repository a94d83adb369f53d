#ifndef BISAM_PROBLEMS_HPP
#define BISAM_PROBLEMS_HPP

#include "bisam/operators.hpp"
#include "bisam/problem.hpp"
#include "bisam/rng.hpp"

#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bisam {

/// Spectral norm ||A||_2 by power iteration on A^T A with a seeded start.
/// Stops when the Rayleigh-quotient residual drops below the relative
/// tolerance; returns the last estimate if max_iter is exhausted.
inline double spectral_norm(const Matrix& a, double tolerance = 1e-8,
                            int max_iter = 10000, std::uint64_t seed = 12345) {
  if (a.size() == 0 || a.norm() == 0.0)
    throw std::invalid_argument("spectral_norm: matrix must be nonzero");
  Rng rng(seed);
  Vector v = rng.normal_vector(a.cols());
  v.normalize();
  double rayleigh = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = a.transpose() * (a * v);
    const double norm = w.norm();
    if (norm == 0.0) {
      // start vector fell in the null space, re-seed
      v = rng.normal_vector(a.cols());
      v.normalize();
      continue;
    }
    rayleigh = v.dot(w);
    if ((w - rayleigh * v).norm() <= tolerance * rayleigh)
      return std::sqrt(rayleigh);
    v = w / norm;
  }
  return std::sqrt(rayleigh);
}

struct IllConditionedSpec {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  double smallest_singular = 1e-6;
  double largest_singular = 1.0;
  std::uint64_t seed = 0;
};

/// A = U diag(s) V^T with orthonormal U, V from QR of Gaussian matrices and
/// geometrically spaced singular values. Deterministic per seed.
inline Matrix gen_ill_conditioned(const IllConditionedSpec& spec) {
  if (spec.rows < 2 || spec.cols < 2)
    throw std::invalid_argument("gen_ill_conditioned: need rows, cols >= 2");
  if (!(spec.smallest_singular > 0.0 &&
        spec.smallest_singular <= spec.largest_singular))
    throw std::invalid_argument("gen_ill_conditioned: need 0 < smallest <= largest");
  const Eigen::Index k = std::min(spec.rows, spec.cols);
  Rng rng(spec.seed);
  Matrix gu = rng.normal_matrix(spec.rows, k);
  Matrix gv = rng.normal_matrix(spec.cols, k);
  Matrix u = Eigen::HouseholderQR<Matrix>(gu).householderQ() *
             Matrix::Identity(spec.rows, k);
  Matrix v = Eigen::HouseholderQR<Matrix>(gv).householderQ() *
             Matrix::Identity(spec.cols, k);
  Vector s(k);
  const double ratio = spec.smallest_singular / spec.largest_singular;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double t = k > 1 ? static_cast<double>(i) / static_cast<double>(k - 1) : 0.0;
    s[i] = spec.largest_singular * std::pow(ratio, t);
  }
  return u * s.asDiagonal() * v.transpose();
}

struct OuterQuadratic {
  Matrix q;
  double sigma = 1.0;   // smallest eigenvalue, 1 by construction
  double lipschitz = 0.0;  // largest eigenvalue
};

/// Q = L^T L + I with L the (n-1) x n first-difference matrix.
inline OuterQuadratic gen_outer_quadratic(Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("gen_outer_quadratic: need n >= 2");
  Matrix l = Matrix::Zero(n - 1, n);
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    l(i, i) = 1.0;
    l(i, i + 1) = -1.0;
  }
  OuterQuadratic out;
  out.q = l.transpose() * l + Matrix::Identity(n, n);
  out.sigma = 1.0;
  // L^T L is the free-boundary difference Laplacian; its eigenvalues are
  // 2 - 2 cos(k*pi/n), so ||Q|| = 3 + 2 cos(pi/n) exactly. Power iteration
  // stalls on the clustered top of this spectrum for large n.
  out.lipschitz = 3.0 + 2.0 * std::cos(std::numbers::pi / static_cast<double>(n));
  return out;
}

/// Oracle for h(x) = 0.5 x^T Q x, with prox_{gamma h}(y) = (I + gamma Q)^{-1} y.
inline OuterOracle make_quadratic_outer(const OuterQuadratic& quad) {
  const Matrix q = quad.q;
  const Eigen::Index n = q.rows();
  OuterOracle h;
  h.dimension = n;
  h.strong_convexity = quad.sigma;
  h.lipschitz_grad = quad.lipschitz;
  h.value = [q](const Vector& x) { return 0.5 * x.dot(q * x); };
  h.gradient = [q](const Vector& x) { return Vector(q * x); };
  h.prox = [q, n](const Vector& y, double gamma) {
    Matrix m = Matrix::Identity(n, n) + gamma * q;
    return Vector(m.ldlt().solve(y));
  };
  return h;
}

/// Least-squares smooth part f(x) = 0.5 ||Ax - b||^2 with L_f = ||A^T A||.
inline SmoothOracle make_least_squares(const Matrix& a, const Vector& b) {
  SmoothOracle f;
  f.dimension = a.cols();
  f.lipschitz_grad = std::pow(spectral_norm(a), 2);
  f.value = [a, b](const Vector& x) { return 0.5 * (a * x - b).squaredNorm(); };
  f.gradient = [a, b](const Vector& x) { return Vector(a.transpose() * (a * x - b)); };
  return f;
}

/// Extended value of the nonnegative-orthant indicator. Kept out of the
/// shipped ProxOracle (which reports 0 so that objective traces measure the
/// smooth part, as the iterates are only asymptotically feasible); used by
/// the brute-force prox audits.
inline double nonnegative_indicator_value(const Vector& x) {
  return (x.array() >= 0.0).all() ? 0.0
                                  : std::numeric_limits<double>::infinity();
}

/// Serializable description of a generated instance.
struct InstanceData {
  std::string kind;  // "nnls" or "lasso"
  Matrix a;
  Vector b;
  Vector x_true;
  double mu = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

/// Nonnegative least squares over an ill-conditioned operator:
/// inner 0.5||Ax-b||^2 + indicator(x >= 0), outer 0.5 x^T Q x.
inline InstanceData gen_nnls_data(const IllConditionedSpec& spec, double noise_scale) {
  if (noise_scale < 0.0)
    throw std::invalid_argument("gen_nnls_data: noise_scale must be nonnegative");
  InstanceData d;
  d.kind = "nnls";
  d.seed = spec.seed;
  d.delta = noise_scale;
  d.a = gen_ill_conditioned(spec);
  Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);  // independent stream from the matrix
  d.x_true = rng.normal_vector(spec.cols).cwiseAbs();
  d.b = d.a * d.x_true + noise_scale * rng.normal_vector(spec.rows);
  return d;
}

inline BilevelProblem problem_from_nnls(const InstanceData& d) {
  BilevelProblem p;
  p.inner_smooth = make_least_squares(d.a, d.b);
  p.inner_nonsmooth.dimension = d.a.cols();
  p.inner_nonsmooth.prox = [](const Vector& x, double) { return project_nonnegative(x); };
  p.inner_nonsmooth.value = [](const Vector&) { return 0.0; };
  p.outer = make_quadratic_outer(gen_outer_quadratic(d.a.cols()));
  return p;
}

inline BilevelProblem gen_nnls(const IllConditionedSpec& spec, double noise_scale) {
  return problem_from_nnls(gen_nnls_data(spec, noise_scale));
}

/// LASSO inner problem 0.5||Ax-b||^2 + mu||x||_1 with a planted sparse
/// solution (10% density), outer 0.5 x^T Q x.
inline InstanceData gen_lasso_data(Eigen::Index m, Eigen::Index n, double mu,
                                   double noise_scale, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("gen_lasso_data: need m, n >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("gen_lasso_data: mu must be positive");
  if (noise_scale < 0.0)
    throw std::invalid_argument("gen_lasso_data: noise_scale must be nonnegative");
  InstanceData d;
  d.kind = "lasso";
  d.seed = seed;
  d.mu = mu;
  d.delta = noise_scale;
  Rng rng(seed);
  d.a = rng.normal_matrix(m, n);
  // plant: 10% of the entries carry standard normal values
  d.x_true = Vector::Zero(n);
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const Eigen::Index nnz = std::max<Eigen::Index>(1, n / 10);
  for (Eigen::Index i = 0; i < nnz; ++i) {
    const Eigen::Index j = i + static_cast<Eigen::Index>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
    d.x_true[idx[i]] = rng.normal();
  }
  d.b = d.a * d.x_true + noise_scale * rng.normal_vector(m);
  return d;
}

inline BilevelProblem problem_from_lasso(const InstanceData& d) {
  BilevelProblem p;
  p.inner_smooth = make_least_squares(d.a, d.b);
  const double mu = d.mu;
  p.inner_nonsmooth.dimension = d.a.cols();
  p.inner_nonsmooth.prox = [mu](const Vector& x, double scale) {
    return soft_threshold(x, scale * mu);
  };
  p.inner_nonsmooth.value = [mu](const Vector& x) {
    return mu * x.lpNorm<1>();
  };
  p.outer = make_quadratic_outer(gen_outer_quadratic(d.a.cols()));
  return p;
}

inline BilevelProblem gen_lasso(Eigen::Index m, Eigen::Index n, double mu,
                                double noise_scale, std::uint64_t seed) {
  return problem_from_lasso(gen_lasso_data(m, n, mu, noise_scale, seed));
}

/// Scalar fixture: inner min x^2 (so X* = {0}), outer (x-1)^2. The bilevel
/// solution is 0; the minimizer of phi + lambda*h is lambda/(1+lambda).
inline BilevelProblem toy_bilevel() {
  BilevelProblem p;
  p.inner_smooth.dimension = 1;
  p.inner_smooth.lipschitz_grad = 2.0;
  p.inner_smooth.value = [](const Vector& x) { return x[0] * x[0]; };
  p.inner_smooth.gradient = [](const Vector& x) {
    return Vector::Constant(1, 2.0 * x[0]);
  };
  p.inner_nonsmooth.dimension = 1;
  p.inner_nonsmooth.prox = [](const Vector& x, double) { return x; };
  p.inner_nonsmooth.value = [](const Vector&) { return 0.0; };
  p.outer.dimension = 1;
  p.outer.strong_convexity = 2.0;
  p.outer.lipschitz_grad = 2.0;
  p.outer.value = [](const Vector& x) { return (x[0] - 1.0) * (x[0] - 1.0); };
  p.outer.gradient = [](const Vector& x) {
    return Vector::Constant(1, 2.0 * (x[0] - 1.0));
  };
  p.outer.prox = [](const Vector& y, double gamma) {
    return Vector::Constant(1, (2.0 * gamma + y[0]) / (1.0 + 2.0 * gamma));
  };
  p.reference_solution = Vector::Zero(1);
  p.reference_inner_optimum = 0.0;
  return p;
}

// --- plain-text instance serialization -------------------------------------

/// Writes a matrix-market-style text file: a header with kind, dims, mu,
/// delta, seed, then A row-major, then b, then x_true, one entry per line.
inline void save_instance(const InstanceData& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_instance: cannot open " + path);
  out.precision(17);
  out << "%%bisam instance 1\n";
  out << d.kind << ' ' << d.a.rows() << ' ' << d.a.cols() << ' ' << d.mu << ' '
      << d.delta << ' ' << d.seed << '\n';
  for (Eigen::Index i = 0; i < d.a.rows(); ++i)
    for (Eigen::Index j = 0; j < d.a.cols(); ++j) out << d.a(i, j) << '\n';
  for (Eigen::Index i = 0; i < d.b.size(); ++i) out << d.b[i] << '\n';
  for (Eigen::Index i = 0; i < d.x_true.size(); ++i) out << d.x_true[i] << '\n';
}

inline InstanceData load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_instance: cannot open " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != "%%bisam instance 1")
    throw std::runtime_error("load_instance: bad header in " + path);
  InstanceData d;
  Eigen::Index m = 0, n = 0;
  in >> d.kind >> m >> n >> d.mu >> d.delta >> d.seed;
  if (!in || m < 1 || n < 1)
    throw std::runtime_error("load_instance: malformed header in " + path);
  d.a.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) in >> d.a(i, j);
  d.b.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) in >> d.b[i];
  d.x_true.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) in >> d.x_true[i];
  if (!in) throw std::runtime_error("load_instance: truncated file " + path);
  return d;
}

inline BilevelProblem problem_from_instance(const InstanceData& d) {
  if (d.kind == "nnls") return problem_from_nnls(d);
  if (d.kind == "lasso") return problem_from_lasso(d);
  throw std::invalid_argument("problem_from_instance: unknown kind " + d.kind);
}

}  // namespace bisam

#endif
