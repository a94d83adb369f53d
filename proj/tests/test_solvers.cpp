#include "bisam/bench.hpp"
#include "bisam/diagnostics.hpp"
#include "bisam/problems.hpp"
#include "bisam/solvers.hpp"
#include "bisam/trace_io.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace bisam;

// frozen golden value; see "golden iteration count" test below
#ifndef BISAM_GOLDEN_LASSO_ITERS
#define BISAM_GOLDEN_LASSO_ITERS 546
#endif

TEST_CASE("theta_bar rule") {
  const Vector a = Vector::Constant(1, 1.0);
  const Vector b = Vector::Constant(1, 2.0);
  CHECK(theta_bar(1, 3.0, 0.5, a, b) == 0.0);       // (n-1)/(n+alpha-1) = 0 at n=1
  CHECK(theta_bar(4, 3.0, 1e9, a, a) == 0.5);       // equal iterates: 3/6
  CHECK(theta_bar(2, 3.0, 0.01, a, b) == 0.01);     // min(0.25, 0.01/1)
  CHECK(theta_bar(1000, 3.0, 1e9, a, b) < 1.0);
}

TEST_CASE("alpha_schedule values and clamp") {
  CHECK(alpha_schedule(1, 0.1, 0.75) == Catch::Approx(0.8));
  CHECK(alpha_schedule(2, 0.1, 0.75) == Catch::Approx(0.4));
  CHECK(alpha_schedule(1, 0.1, 0.95) == 1.0 - 1e-6);  // raw 4.0, clamped
}

TEST_CASE("epsilon_schedule values") {
  CHECK(epsilon_schedule(1, 0.8, 0.01) == 0.8);
  // independent evaluation of 1024^(-0.01)
  const double expected = 0.5 * std::exp(-0.01 * std::log(1024.0));
  CHECK(epsilon_schedule(1024, 0.5, 0.01) == Catch::Approx(expected).epsilon(1e-12));
  CHECK(epsilon_schedule(50, 0.3, 0.0) == 0.3);  // degenerate exponent
}

TEST_CASE("schedule laws over a long horizon") {
  const double beta = 0.75;
  double partial = 0.0;
  double prev_alpha = 1.0;
  bool in_unit_interval = true;
  bool ratio_matches = true;
  for (int n = 1; n <= 1000000; ++n) {
    const double a = alpha_schedule(n, 0.1, beta);
    in_unit_interval &= a > 0.0 && a < 1.0;
    prev_alpha = a;
    partial += a;
    const double e = epsilon_schedule(n, a, 0.01);
    ratio_matches &= std::abs(e / a - std::pow(n, -0.01)) < 1e-14;
  }
  CHECK(in_unit_interval);
  CHECK(ratio_matches);
  CHECK(partial > 11.0);  // ~0.8 * ln(1e6), grows without bound
  CHECK(prev_alpha < 1e-5);
}

namespace {

SolverConfig toy_config(const BilevelProblem& toy) {
  SolverConfig config = default_config(toy);
  config.kappa = 0.05;
  config.max_iterations = 5000;
  return config;
}

}  // namespace

TEST_CASE("both solvers reach the toy bilevel solution") {
  BilevelProblem toy = toy_bilevel();
  SolverConfig config = toy_config(toy);
  config.stopping.kind = StoppingRule::Kind::distance_to_reference;
  config.stopping.tolerance = 1e-4;
  config.stopping.reference_point = Vector::Zero(1);

  const Vector x0 = Vector::Zero(1);
  const SolverResult ib = ibig_sam_run(toy, config, x0, x0);
  CHECK(std::abs(ib.solution[0]) <= 1e-4);
  CHECK(ib.stop_reason == StopReason::tolerance_met);
  const SolverResult bg = big_sam_run(toy, config, x0);
  CHECK(std::abs(bg.solution[0]) <= 1e-4);
}

TEST_CASE("zero inertia reproduces the baseline iterate sequence") {
  BilevelProblem p = gen_lasso(8, 12, 0.5, 0.01, 21);
  SolverConfig config = default_config(p);
  config.max_iterations = 50;
  config.force_zero_inertia = true;
  const Vector x0 = Vector::Zero(12);
  const SolverResult ib = ibig_sam_run(p, config, x0, x0);
  config.force_zero_inertia = false;
  const SolverResult bg = big_sam_run(p, config, x0);
  REQUIRE(ib.trace.size() == bg.trace.size());
  CHECK((ib.solution - bg.solution).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < ib.trace.size(); ++i)
    CHECK(ib.trace[i].inner_objective == bg.trace[i].inner_objective);
}

TEST_CASE("one-step zero-inertia map equals the baseline map") {
  BilevelProblem p = gen_nnls(
      IllConditionedSpec{.rows = 10, .cols = 10, .smallest_singular = 0.01,
                         .seed = 22},
      0.01);
  SolverConfig config = default_config(p);
  Rng rng(23);
  for (int s = 0; s < 20; ++s) {
    const Vector x = rng.normal_vector(10);
    const Vector a = ibig_sam_step(p, config, 0.3, 0.0, x, rng.normal_vector(10));
    const Vector b = big_sam_step(p, config, 0.3, x);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("inertial bound holds on every traced iteration") {
  BilevelProblem p = gen_lasso(10, 20, 0.5, 0.01, 24);
  SolverConfig config = default_config(p);
  config.max_iterations = 200;
  const Vector x0 = Vector::Zero(20);
  const SolverResult res = ibig_sam_run(p, config, x0, x0);
  int previous_n = 0;
  for (const TraceRow& row : res.trace) {
    CHECK(row.n == previous_n + 1);
    previous_n = row.n;
    CHECK(row.inertia_magnitude <= row.eps * (1.0 + 1e-12));
  }
  CHECK(trace_audit(res.trace, config).pass());
}

TEST_CASE("inverse-square epsilon gives O(1/n^2) inertia") {
  BilevelProblem p = gen_lasso(10, 20, 0.5, 0.01, 25);
  SolverConfig config = default_config(p);
  config.max_iterations = 300;
  config.epsilon_inverse_square_c = 1.0;
  const Vector x0 = Vector::Zero(20);
  const SolverResult res = ibig_sam_run(p, config, x0, x0);
  double worst = 0.0;
  for (const TraceRow& row : res.trace)
    worst = std::max(worst, row.n * static_cast<double>(row.n) * row.inertia_magnitude);
  CHECK(worst <= 1.0 + 1e-12);
}

TEST_CASE("identical inputs give identical traces") {
  BilevelProblem p = gen_lasso(8, 16, 0.5, 0.01, 26);
  SolverConfig config = default_config(p);
  config.max_iterations = 80;
  const Vector x0 = Vector::Zero(16);
  const SolverResult a = ibig_sam_run(p, config, x0, x0);
  const SolverResult b = ibig_sam_run(p, config, x0, x0);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(trace_row_csv(a.trace[i], /*include_seconds=*/false) ==
          trace_row_csv(b.trace[i], /*include_seconds=*/false));
  }
}

TEST_CASE("variational-inequality optimality at the toy solution") {
  BilevelProblem toy = toy_bilevel();
  SolverConfig config = toy_config(toy);
  config.stopping.kind = StoppingRule::Kind::distance_to_reference;
  config.stopping.tolerance = 1e-4;
  config.stopping.reference_point = Vector::Zero(1);
  config.max_iterations = 10000;
  const Vector x0 = Vector::Zero(1);
  const SolverResult res = ibig_sam_run(toy, config, x0, x0);
  // X* = {0}: the VI reduces to <grad h(z), 0 - z> >= -1e-6
  const Vector z = res.solution;
  CHECK(toy.outer.gradient(z).dot(Vector::Zero(1) - z) >= -1e-6);
}

TEST_CASE("baseline with zero averaging weight is plain prox-grad") {
  BilevelProblem p = gen_lasso(10, 14, 0.5, 0.01, 27);
  SolverConfig config = default_config(p);
  config.kappa = 0.0;  // alpha_n = 0: pure inner prox-grad
  config.max_iterations = 100;
  const Vector x0 = Vector::Zero(14);
  const SolverResult res = big_sam_run(p, config, x0);
  double prev = std::numeric_limits<double>::infinity();
  for (const TraceRow& row : res.trace) {
    CHECK(row.inner_objective <= prev + 1e-12);
    prev = row.inner_objective;
  }
}

TEST_CASE("moreau outer variant reaches the same toy limit") {
  BilevelProblem toy = toy_bilevel();
  SolverConfig config = toy_config(toy);
  config.use_moreau_outer = true;
  config.stopping.kind = StoppingRule::Kind::distance_to_reference;
  config.stopping.tolerance = 1e-4;
  config.stopping.reference_point = Vector::Zero(1);
  const Vector x0 = Vector::Zero(1);
  const SolverResult res = ibig_sam_run(toy, config, x0, x0);
  CHECK(std::abs(res.solution[0]) <= 1e-4);
}

TEST_CASE("solver rejects invalid configurations") {
  BilevelProblem toy = toy_bilevel();
  SolverConfig config = default_config(toy);
  config.inertia_alpha = 2.0;
  CHECK_THROWS_AS(ibig_sam_run(toy, config, Vector::Zero(1), Vector::Zero(1)),
                  std::invalid_argument);
  config = default_config(toy);
  CHECK_THROWS_AS(ibig_sam_run(toy, config, Vector::Zero(2), Vector::Zero(2)),
                  std::invalid_argument);
  config.lambda = 0.8;  // above 1/L_f = 0.5, legal for inertial only
  CHECK_NOTHROW(ibig_sam_run(toy, config, Vector::Zero(1), Vector::Zero(1)));
  CHECK_THROWS_AS(big_sam_run(toy, config, Vector::Zero(1)), std::invalid_argument);
}

TEST_CASE("tikhonov_path on the toy problem") {
  BilevelProblem toy = toy_bilevel();
  const std::vector<double> grid{1.0, 0.1, 0.01, 1e-3, 1e-4};
  const auto path = tikhonov_path(toy, grid);
  REQUIRE(path.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // minimizer of x^2 + lambda (x-1)^2 is lambda/(1+lambda)
    const double expected = grid[i] / (1.0 + grid[i]);
    CHECK(path[i].minimizer[0] == Catch::Approx(expected).margin(1e-6));
  }
  CHECK(std::abs(path.back().minimizer[0]) <= 1e-3);  // path end near bilevel optimum
}

TEST_CASE("tikhonov_path endpoint agrees with the inertial solver on NNLS") {
  BilevelProblem p = gen_nnls(
      IllConditionedSpec{.rows = 20, .cols = 20, .smallest_singular = 0.3,
                         .seed = 28},
      0.01);
  SolverConfig config = default_config(p);
  config.max_iterations = 20000;
  const Vector x0 = Vector::Zero(20);
  const SolverResult res = ibig_sam_run(p, config, x0, x0);
  const auto path = tikhonov_path(p, {1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
  CHECK((path.back().minimizer - res.solution).norm() <= 1e-2);
}

TEST_CASE("tikhonov_path rejects a non-decreasing grid") {
  BilevelProblem toy = toy_bilevel();
  CHECK_THROWS_AS(tikhonov_path(toy, {0.1, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(tikhonov_path(toy, {0.1, -0.5}), std::invalid_argument);
}

TEST_CASE("golden iteration count on the seeded benchmark instance") {
  // frozen from the first verified run of this configuration
  BilevelProblem p = gen_lasso(100, 500, 0.5, 0.01, 1);
  SolverConfig config = default_config(p);
  config.max_iterations = 2000;
  const Reference ref = compute_reference(p, config, 1000);
  config.stopping.kind = StoppingRule::Kind::relative_inner_gap;
  config.stopping.tolerance = 1e-2;
  config.stopping.reference_value = ref.inner_optimum;
  const Vector x0 = Vector::Zero(500);
  const SolverResult res = ibig_sam_run(p, config, x0, x0);
  CHECK(res.stop_reason == StopReason::tolerance_met);
  CHECK(res.iterations_used == BISAM_GOLDEN_LASSO_ITERS);
}
