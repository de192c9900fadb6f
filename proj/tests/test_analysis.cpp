#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "dodlab/analysis.hpp"
#include "dodlab/error.hpp"

using namespace dodlab;

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](int i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](int i) { if (i == 7) throw std::runtime_error("x"); }), std::runtime_error);
  parallel_for(0, 4, [](int) { FAIL("no tasks expected"); });
}

TEST_CASE("job count resolution") {
  CHECK(resolve_jobs(3) == 3);
  CHECK_THROWS_AS(resolve_jobs(0), std::invalid_argument);
  ::setenv("DODLAB_JOBS", "5", 1);
  CHECK(resolve_jobs(std::nullopt) == 5);
  ::setenv("DODLAB_JOBS", "five", 1);
  CHECK_THROWS_AS(resolve_jobs(std::nullopt), std::invalid_argument);
  ::unsetenv("DODLAB_JOBS");
  CHECK(resolve_jobs(std::nullopt) >= 1);
}

TEST_CASE("sweep rows, ordering and determinism") {
  SweepSpec spec;
  spec.kind = NodeKind::GaussLegendre;
  spec.degrees = {0, 1};
  spec.alphas = {1e-4, 1e-2, 0.3};
  spec.lambdas = {1.0, 0.3};
  spec.include_optimized = true;
  spec.grid.n_background = 20;
  spec.grid.cut_cell = 10;
  const auto serial = opnorm_sweep(spec, 1);
  const auto parallel = opnorm_sweep(spec, 3);
  REQUIRE(serial.size() == 2 * 3 * 3);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].ok);
    CHECK(serial[i].norm_dod == parallel[i].norm_dod);
    CHECK(serial[i].p == parallel[i].p);
    CHECK(serial[i].quotient == doctest::Approx(serial[i].norm_dod / serial[i].norm_background));
  }
  CHECK(serial[0].p == 0);
  CHECK(serial[0].lambda_c == 1.0);
  CHECK(serial[0].alpha == 1e-4);
  CHECK(serial[8].lambda_c == shipped_optimized_lambda(NodeKind::GaussLegendre, 0).value());

  // p = 0, lambda = 1: stabilized norms nearly independent of alpha.
  CHECK(serial[0].norm_dod / serial[1].norm_dod == doctest::Approx(1.0).epsilon(0.2));

  const double uniform = global_operator_norm(assemble(make_uniform_mesh({0, 1}, 20), make_rule(NodeKind::GaussLegendre, 1), {}, {}));
  CHECK(serial[9].norm_background == doctest::Approx(uniform).epsilon(1e-14));

  SweepSpec bad = spec;
  bad.alphas.clear();
  CHECK_THROWS_AS(opnorm_sweep(bad), std::invalid_argument);
  bad = spec;
  bad.alphas = {0.7};
  CHECK_THROWS_AS(opnorm_sweep(bad), std::invalid_argument);
}

TEST_CASE("failed sweep points are flagged") {
  SweepSpec spec;
  spec.kind = NodeKind::GaussLegendre;
  spec.degrees = {1};
  spec.alphas = {0.2};
  spec.lambdas = {1.0};
  spec.grid.n_background = 10;
  spec.grid.cut_cell = 5;
  spec.norm.force_iterative = true;
  spec.norm.max_iterations = 1;
  const auto rows = opnorm_sweep(spec);
  REQUIRE(rows.size() == 1);
  CHECK(!rows[0].ok);
  CHECK(!rows[0].error.empty());
}

TEST_CASE("unstabilized norm doubles when alpha halves") {
  GridSpec grid;
  const auto rule = make_rule(NodeKind::GaussLegendre, 2);
  const double a = global_operator_norm(build_operator(grid, NodeKind::GaussLegendre, 2, 1e-4, {1.0, false}));
  const double b = global_operator_norm(build_operator(grid, NodeKind::GaussLegendre, 2, 5e-5, {1.0, false}));
  CHECK(b / a == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("optimizer on a small grid") {
  OptimizerOptions opt;
  opt.lambda_grid = 11;
  opt.alpha_grid = 6;
  opt.grid.n_background = 10;
  opt.grid.cut_cell = 5;
  opt.tolerance = 1e-3;
  const auto r0 = optimize_lambda(0, NodeKind::GaussLegendre, opt);
  CHECK(r0.lambda_star == 1.0);
  const auto r2 = optimize_lambda(2, NodeKind::GaussLegendre, opt);
  CHECK(r2.lambda_star >= opt.lambda_lo);
  CHECK(r2.lambda_star <= opt.lambda_hi);
  CHECK(r2.minmax_norm <= r2.coarse_minmax_norm);
  CHECK(r2.bracket_width < opt.tolerance);
  const auto [worst, at] = worst_case_norm(opt.grid, NodeKind::GaussLegendre, 2, r2.lambda_star,
                                           linspace(opt.alpha_lo, opt.alpha_hi, opt.alpha_grid), opt.norm, 2);
  CHECK(worst == r2.minmax_norm);
  CHECK(at == r2.worst_alpha);
  const auto again = optimize_lambda(2, NodeKind::GaussLegendre, opt, 2);
  CHECK(again.lambda_star == r2.lambda_star);
  CHECK_THROWS_AS(optimize_lambda(-1, NodeKind::GaussLegendre, opt), std::invalid_argument);
}

TEST_CASE("linspace endpoints") {
  const auto v = linspace(0.01, 0.5, 51);
  CHECK(v.size() == 51);
  CHECK(v.front() == 0.01);
  CHECK(v.back() == 0.5);
  CHECK(linspace(2.0, 3.0, 1) == std::vector<double>{2.0});
}

TEST_CASE("lambda table lookup and override") {
  LambdaTable table;
  CHECK(table.lookup(NodeKind::GaussLegendre, 0) == 1.0);
  CHECK(table.lookup(NodeKind::GaussLobattoLegendre, 0) == 1.0);
  CHECK_THROWS_AS(table.lookup(NodeKind::GaussLegendre, 12), std::invalid_argument);
  const std::string path = "lambda_override_test.csv";
  {
    std::ofstream os(path);
    os << "kind,p,lambda_star,worst_alpha,minmax_norm\r\ngl,2,0.5,0.4,10\r\n";
  }
  const auto over = LambdaTable::from_csv(path);
  CHECK(over.lookup(NodeKind::GaussLegendre, 2) == 0.5);
  CHECK(over.lookup(NodeKind::GaussLegendre, 3) == table.lookup(NodeKind::GaussLegendre, 3));
  std::remove(path.c_str());
  CHECK_THROWS_AS(LambdaTable::from_csv("does/not/exist.csv"), std::invalid_argument);
}

TEST_CASE("sharp CFL search brackets and verification") {
  CflSearchOptions opt;
  opt.grid.n_background = 20;
  opt.grid.cut_cell = 10;
  opt.periods = 20;
  const auto r = sharp_cfl_search(ssprk33(), 1, NodeKind::GaussLegendre, 0.2, {1.0, true}, "1", opt);
  CHECK(r.sharp_cfl > 0.0);
  CHECK(r.unstable_cfl / r.sharp_cfl - 1.0 <= 1e-3);
  const auto op = build_operator(opt.grid, NodeKind::GaussLegendre, 1, 0.2, {1.0, true});
  CHECK(is_energy_stable(ssprk33(), op, r.sharp_cfl, opt));
  CHECK(!is_energy_stable(ssprk33(), op, r.unstable_cfl, opt));

  // Halving the tolerance refines without contradicting the old bracket.
  CflSearchOptions finer = opt;
  finer.rel_tol = 5e-4;
  finer.bracket = std::make_pair(r.sharp_cfl, r.unstable_cfl);
  const auto f = sharp_cfl_search(ssprk33(), 1, NodeKind::GaussLegendre, 0.2, {1.0, true}, "1", finer);
  CHECK(f.sharp_cfl >= r.sharp_cfl);
  CHECK(f.unstable_cfl <= r.unstable_cfl);

  CflSearchOptions bad = opt;
  bad.bracket = std::make_pair(r.unstable_cfl * 2, r.unstable_cfl * 4);
  try {
    sharp_cfl_search(ssprk33(), 1, NodeKind::GaussLegendre, 0.2, {1.0, true}, "1", bad);
    FAIL("expected a bracket error");
  } catch (const BracketError& e) {
    CHECK(!e.lo_stable());
    CHECK(!e.hi_stable());
    CHECK(e.lo() == r.unstable_cfl * 2);
  }
}

TEST_CASE("scaling fit") {
  const std::vector<double> xs = {0.1, 0.3, 1.0, 4.0};
  std::vector<double> lin, quad;
  for (double x : xs) {
    lin.push_back(x);
    quad.push_back(3 * x * x);
  }
  CHECK(std::abs(scaling_fit(xs, lin).exponent - 1.0) <= 1e-12);
  const auto q = scaling_fit(xs, quad);
  CHECK(std::abs(q.exponent - 2.0) <= 1e-12);
  CHECK(q.prefactor == doctest::Approx(3.0));
  CHECK(q.residual <= 1e-12);
  CHECK_THROWS_AS(scaling_fit({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(scaling_fit({1.0, 2.0, 3.0}, {1.0, -2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(scaling_fit({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("extension norm: ||I||^(1/p) is affine in alpha") {
  for (int p = 1; p <= 8; ++p) {
    CAPTURE(p);
    const auto rule = make_rule(NodeKind::GaussLegendre, p);
    std::vector<double> xs, ys, roots;
    for (int i = 1; i <= 10; ++i) {
      const double a = 0.05 * i;
      xs.push_back(a);
      ys.push_back(interpolation_norm(rule, a));
      roots.push_back(std::pow(ys.back(), 1.0 / p));
    }
    // Straight-line fit of roots against alpha.
    Eigen::MatrixXd a(xs.size(), 2);
    Eigen::VectorXd b(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      a(i, 0) = 1.0;
      a(i, 1) = xs[i];
      b(i) = roots[i];
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
    const double ss_res = (a * coef - b).squaredNorm();
    const double ss_tot = (b.array() - b.mean()).matrix().squaredNorm();
    CHECK(coef(1) > 0.0);
    CHECK(1.0 - ss_res / ss_tot > 0.999);
    if (p == 4) {
      MESSAGE("pure power-law exponent of ||I|| at p=4: " << scaling_fit(xs, ys).exponent);
    }
  }
}

TEST_CASE("advection runs measure the error against the shifted exact solution") {
  RunSpec spec;
  spec.method = ssprk33();
  spec.p = 2;
  spec.cfl = 0.1;
  spec.n_background = 10;
  spec.alpha = 0.3;
  const auto constant = run_advection(spec, [](double) { return 1.0; });
  CHECK(constant.error <= 1e-12);
  const auto sine = run_advection(spec, [](double x) { return std::sin(2 * std::numbers::pi * x); });
  CHECK(sine.stable);
  CHECK(sine.steps == 100);
  spec.n_background = 20;
  const auto fine = run_advection(spec, [](double x) { return std::sin(2 * std::numbers::pi * x); });
  CHECK(fine.steps == 2 * sine.steps);
  CHECK(fine.error < sine.error / 6);
  CHECK_THROWS_AS(fitted_order({10, 20}, {sine.error, fine.error}), std::invalid_argument);
}
