#include "bisam/diagnostics.hpp"
#include "bisam/problem.hpp"
#include "bisam/problems.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

using namespace bisam;

namespace {

bool mentions(const std::vector<std::string>& report, const std::string& needle) {
  return std::any_of(report.begin(), report.end(), [&](const std::string& s) {
    return s.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("validate_problem accepts a well-formed LASSO instance") {
  BilevelProblem p = gen_lasso(12, 20, 0.5, 0.01, 1);
  CHECK(validate_problem(p).empty());
}

TEST_CASE("validate_problem flags nonpositive strong convexity") {
  BilevelProblem p = toy_bilevel();
  p.outer.strong_convexity = 0.0;
  CHECK(mentions(validate_problem(p), "strong_convexity must be positive"));
}

TEST_CASE("validate_problem flags dimension mismatch") {
  BilevelProblem p = gen_lasso(5, 5, 0.5, 0.0, 2);
  p.outer.dimension = 6;
  CHECK(mentions(validate_problem(p), "dimension mismatch"));
}

TEST_CASE("validate_problem flags sigma above L_h") {
  BilevelProblem p = toy_bilevel();
  p.outer.strong_convexity = 5.0;
  CHECK(mentions(validate_problem(p), "must not exceed"));
}

TEST_CASE("shipped smooth oracles satisfy the sampled Lipschitz audit") {
  BilevelProblem lasso = gen_lasso(10, 15, 0.5, 0.01, 3);
  CHECK(lipschitz_gradient_audit(lasso.inner_smooth.gradient,
                                 lasso.inner_smooth.lipschitz_grad,
                                 lasso.inner_smooth.dimension, 100, 7)
            .pass());
  CHECK(lipschitz_gradient_audit(lasso.outer.gradient, lasso.outer.lipschitz_grad,
                                 lasso.outer.dimension, 100, 8)
            .pass());
}

TEST_CASE("shipped outer oracles are strongly monotone at sigma") {
  BilevelProblem nnls =
      gen_nnls(IllConditionedSpec{.rows = 10, .cols = 10, .seed = 4}, 0.01);
  CHECK(strong_monotonicity_audit(nnls.outer, 100, 9).pass());
  CHECK(strong_monotonicity_audit(toy_bilevel().outer, 100, 10).pass());
}

TEST_CASE("shipped value oracles are convex along sampled segments") {
  BilevelProblem lasso = gen_lasso(8, 12, 0.5, 0.01, 5);
  CHECK(convexity_audit(lasso.inner_smooth.value, 12, 100, 11).pass());
  CHECK(convexity_audit(lasso.outer.value, 12, 100, 12).pass());
}

TEST_CASE("shipped gradients agree with central finite differences") {
  BilevelProblem lasso = gen_lasso(10, 14, 0.5, 0.01, 6);
  CHECK(gradient_fd_check(lasso.inner_smooth, 20, 13).pass());
  CHECK(gradient_fd_check(lasso.outer, 20, 14).pass());
  CHECK(gradient_fd_check(toy_bilevel().inner_smooth, 20, 15).pass());
}

TEST_CASE("prox oracles are firmly nonexpansive") {
  BilevelProblem lasso = gen_lasso(8, 5, 0.5, 0.01, 7);
  CHECK(prox_audit(lasso.inner_nonsmooth, 0.7, 100, 16).pass());
  BilevelProblem nnls =
      gen_nnls(IllConditionedSpec{.rows = 6, .cols = 5, .smallest_singular = 0.1,
                                  .seed = 8},
               0.0);
  CHECK(prox_audit(nnls.inner_nonsmooth, 0.7, 100, 17, 6,
                   nonnegative_indicator_value)
            .pass());
}

TEST_CASE("inner_objective sums smooth and nonsmooth parts") {
  BilevelProblem lasso = gen_lasso(6, 4, 0.5, 0.0, 9);
  Vector x = Vector::Constant(4, 1.0);
  const double expected = lasso.inner_smooth.value(x) + 0.5 * 4.0;
  CHECK(inner_objective(lasso, x) == Catch::Approx(expected));
}
