#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "dodlab/error.hpp"
#include "dodlab/norms.hpp"

using namespace dodlab;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  return a;
}

Eigen::VectorXd random_weights(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.1, 3.0);
  Eigen::VectorXd w(n);
  for (auto& v : w) v = u(rng);
  return w;
}

// ||A||_M^2 is the top eigenvalue of A^T M A x = mu M x.
double generalized_oracle(const Eigen::VectorXd& w, const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd m = w.asDiagonal();
  const Eigen::MatrixXd lhs = a.transpose() * m * a;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(lhs, m, Eigen::EigenvaluesOnly);
  return std::sqrt(es.eigenvalues().maxCoeff());
}

}  // namespace

TEST_CASE("weighted vector norm") {
  CHECK(norm(WeightedNorm(Eigen::Vector2d(1, 1)), Eigen::Vector2d(3, 4)) == doctest::Approx(5.0));
  CHECK(norm(WeightedNorm(Eigen::Vector2d(2, 7)), Eigen::Vector2d(0, 0)) == 0.0);
  const auto gll = make_rule(NodeKind::GaussLobattoLegendre, 2);
  const WeightedNorm w(Eigen::Map<const Eigen::VectorXd>(gll.weights.data(), 3));
  CHECK(norm(w, Eigen::Vector3d(1, 1, 1)) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(WeightedNorm(Eigen::Vector2d(1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(norm(w, Eigen::Vector2d(1, 1)), std::invalid_argument);
}

TEST_CASE("operator norm basics") {
  std::mt19937_64 rng(3);
  const auto w = random_weights(rng, 6);
  const WeightedNorm wn(w);
  CHECK(operator_norm(wn, Eigen::MatrixXd::Identity(6, 6)) == doctest::Approx(1.0));
  Eigen::VectorXd d(6);
  d << 0.5, -4.0, 2.0, 1.0, 3.5, -0.1;
  CHECK(operator_norm(wn, Eigen::MatrixXd(d.asDiagonal())) == doctest::Approx(4.0));
  CHECK_THROWS_AS(operator_norm(wn, Eigen::MatrixXd::Identity(5, 5)), std::invalid_argument);
}

TEST_CASE("operator norm against Monte-Carlo and generalized eigenvalue oracles") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  const Eigen::MatrixXd a = random_matrix(rng, 5);
  const Eigen::VectorXd w = random_weights(rng, 5);
  const double value = operator_norm(WeightedNorm(w), a);
  CHECK(value == doctest::Approx(generalized_oracle(w, a)).epsilon(1e-10));

  double best = 0.0;
  // An isolated top singular value needs far more than 1e5 draws in 5D.
  for (int s = 0; s < 4000000; ++s) {
    Eigen::VectorXd u(5);
    // Uniform direction on the M-unit sphere.
    for (auto& v : u) v = normal(rng);
    u = u.cwiseQuotient(w.cwiseSqrt());
    const double ratio = std::sqrt((a * u).cwiseAbs2().dot(w) / u.cwiseAbs2().dot(w));
    best = std::max(best, ratio);
  }
  CHECK(best <= value * (1 + 1e-12));
  CHECK(best >= value * (1 - 1e-3));
}

TEST_CASE("matrix norm axioms and the adjoint identity") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 6;
    const Eigen::MatrixXd a = random_matrix(rng, n), b = random_matrix(rng, n);
    const WeightedNorm w(random_weights(rng, n));
    CHECK(operator_norm(w, a + b) <= operator_norm(w, a) + operator_norm(w, b) + 1e-12);
    CHECK(operator_norm(w, a * b) <= operator_norm(w, a) * operator_norm(w, b) * (1 + 1e-12));
  }
  for (int p = 0; p <= 5; ++p) {
    const auto rule = make_rule(NodeKind::GaussLegendre, p);
    const WeightedNorm w(Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), p + 1));
    for (int trial = 0; trial < 100; ++trial) {
      const auto [x, y] = adjoint_norm_check(w, random_matrix(rng, p + 1));
      CHECK(std::abs(x - y) <= 1e-10 * x);
    }
  }
  const WeightedNorm unit(Eigen::VectorXd::Ones(4));
  Eigen::MatrixXd s = random_matrix(rng, 4);
  s = (s + s.transpose()).eval();
  const auto [x, y] = adjoint_norm_check(unit, s);
  CHECK(x == doctest::Approx(y));
}

TEST_CASE("global norm: dense path, power iteration and oracle agree") {
  const auto mesh = make_mesh({0, 1}, 20, 10, 0.13);
  for (int p : {0, 2, 4}) {
    const auto op = assemble(mesh, make_rule(NodeKind::GaussLegendre, p), {}, {0.5, true});
    const double dense = global_operator_norm(op);
    CHECK(dense == doctest::Approx(generalized_oracle(op.mass(), op.dense())).epsilon(1e-9));
    NormOptions it;
    it.force_iterative = true;
    it.max_iterations = 200000;
    CHECK(global_operator_norm(op, it) == doctest::Approx(dense).epsilon(1e-8));
  }
  NormOptions tiny;
  tiny.force_iterative = true;
  tiny.max_iterations = 2;
  const auto op = assemble(mesh, make_rule(NodeKind::GaussLegendre, 3), {}, {});
  CHECK_THROWS_AS(global_operator_norm(op, tiny), NonConvergenceError);
}

TEST_CASE("small-cell scaling of the unstabilized operator") {
  const auto rule = make_rule(NodeKind::GaussLegendre, 0);
  auto n = [&](double alpha, bool on) {
    return global_operator_norm(assemble(make_mesh({0, 1}, 50, 25, alpha), rule, {}, {1.0, on}));
  };
  const double ratio = n(1e-4, false) / n(2e-4, false);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));
  const double big = n(1e-6, true), mid = n(0.25, true);
  CHECK(big / mid < 3.0);
}

TEST_CASE("background norm is homogeneous in 1/dx") {
  for (auto kind : {NodeKind::GaussLegendre, NodeKind::GaussLobattoLegendre}) {
    const auto rule = make_rule(kind, 3);
    const double coarse = global_operator_norm(assemble(make_uniform_mesh({0, 1}, 20), rule, {}, {}));
    const double fine = global_operator_norm(assemble(make_uniform_mesh({0, 1}, 40), rule, {}, {}));
    CHECK(std::abs(fine / coarse - 2.0) <= 1e-6);
  }
  const auto zero = assemble(make_uniform_mesh({0, 1}, 4), make_rule(NodeKind::GaussLegendre, 0), {}, {});
  CHECK(global_operator_norm(zero) > 0.0);
}

TEST_CASE("block norm report") {
  const auto rule = make_rule(NodeKind::GaussLegendre, 4);
  const auto off = assemble(make_mesh({0, 1}, 50, 25, 0.45), rule, {}, {1.0, false});
  const auto rep_off = block_norm_report(off);
  CHECK(rep_off.at("L_(c-1)R") == 0.0);
  CHECK(rep_off.at("L_(c+1)LL") == 0.0);
  CHECK(rep_off.at("star") == 0.0);
  CHECK(rep_off.size() == 11);

  const auto on = assemble(make_mesh({0, 1}, 50, 25, 0.45), rule, {}, {1.0, true});
  const auto rep = block_norm_report(on);
  // (star) is a summand of L_(c-1); it should account for that block's norm
  // and beat every other block.
  for (const auto& [name, value] : rep) {
    if (name != "star" && name != "L_(c-1)") CHECK(rep.at("star") > value);
  }
  CHECK(rep.at("star") >= 0.99 * rep.at("L_(c-1)"));
  CHECK(rep.at("L_(c-1)L") == doctest::Approx(rep.at("L_nL")).epsilon(1e-12));
}

TEST_CASE("extension norms") {
  for (int p = 1; p <= 8; ++p) {
    for (auto kind : {NodeKind::GaussLegendre, NodeKind::GaussLobattoLegendre}) {
      const auto rule = make_rule(kind, p);
      const auto ops = build_operators(rule);
      const WeightedNorm w(ops.mass);
      CHECK(derivative_interpolation_norm(rule, 0.0) <= 1e-10 * operator_norm(w, ops.derivative));
      CHECK(interpolation_norm(rule, 0.5) > interpolation_norm(rule, 0.1));
      CHECK(outflow_extrapolation_norm(rule, 0.3) > 0.0);
    }
  }
  const auto gll = make_rule(NodeKind::GaussLobattoLegendre, 3);
  MESSAGE("||I|| at alpha = 0, GLL p=3: " << interpolation_norm(gll, 0.0));
}
