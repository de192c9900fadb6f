#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "dodlab/quadrature.hpp"
#include "oracle.hpp"

using namespace dodlab;

namespace {

double integrate(const QuadratureRule& r, const std::function<double(double)>& f) {
  double s = 0.0;
  for (int j = 0; j < r.size(); ++j) s += r.weights[j] * f(r.nodes[j]);
  return s;
}

// Golub-Welsch: GL nodes are eigenvalues of the Jacobi matrix.
Eigen::VectorXd golub_welsch_nodes(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = j(k - 1, k) = b;
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(j).eigenvalues();
}

}  // namespace

TEST_CASE("closed-form rules") {
  const auto gl1 = make_rule(NodeKind::GaussLegendre, 1);
  CHECK(gl1.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(gl1.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(gl1.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gl1.weights[1] == doctest::Approx(1.0).epsilon(1e-15));

  const auto gll2 = make_rule(NodeKind::GaussLobattoLegendre, 2);
  CHECK(gll2.nodes[0] == -1.0);
  CHECK(gll2.nodes[1] == 0.0);
  CHECK(gll2.nodes[2] == 1.0);
  CHECK(gll2.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(gll2.weights[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));

  const auto gl0 = make_rule(NodeKind::GaussLegendre, 0);
  CHECK(gl0.nodes[0] == 0.0);
  CHECK(gl0.weights[0] == doctest::Approx(2.0));
}

TEST_CASE("invalid degrees are rejected") {
  CHECK_THROWS_AS(make_rule(NodeKind::GaussLobattoLegendre, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_rule(NodeKind::GaussLegendre, -1), std::invalid_argument);
  CHECK_THROWS_AS(make_rule(NodeKind::GaussLegendre, 31), std::invalid_argument);
  CHECK_NOTHROW(make_rule(NodeKind::GaussLegendre, 40, 40));
  CHECK(parse_node_kind("GL") == NodeKind::GaussLegendre);
  CHECK(parse_node_kind("gll") == NodeKind::GaussLobattoLegendre);
  CHECK_THROWS_AS(parse_node_kind("chebyshev"), std::invalid_argument);
}

TEST_CASE("structural invariants up to degree 30") {
  for (auto kind : {NodeKind::GaussLegendre, NodeKind::GaussLobattoLegendre}) {
    for (int p = (kind == NodeKind::GaussLegendre ? 0 : 1); p <= 30; ++p) {
      CAPTURE(p);
      const auto r = make_rule(kind, p);
      REQUIRE(r.size() == p + 1);
      double sum = 0.0;
      for (int j = 0; j <= p; ++j) {
        CHECK(r.weights[j] > 0.0);
        CHECK(std::abs(r.nodes[j] + r.nodes[p - j]) <= 1e-13);
        CHECK(std::abs(r.weights[j] - r.weights[p - j]) <= 1e-13);
        if (j > 0) CHECK(r.nodes[j] > r.nodes[j - 1]);
        sum += r.weights[j];
      }
      CHECK(std::abs(sum - 2.0) <= 1e-12);
      if (kind == NodeKind::GaussLobattoLegendre) {
        CHECK(r.nodes.front() == -1.0);
        CHECK(r.nodes.back() == 1.0);
      }
    }
  }
}

// Residuals are measured relative to max|P'| on [-1, 1], i.e. p(p+1)/2, so
// the check is on node position rather than on evaluation round-off.
TEST_CASE("nodes are roots to 1e-14") {
  for (int p = 1; p <= 30; ++p) {
    const auto gl = make_rule(NodeKind::GaussLegendre, p);
    for (double x : gl.nodes) {
      const double scale = (p + 1) * (p + 2) / 2.0;
      CHECK(std::abs(legendre_and_derivative(p + 1, x).first) / scale < 1e-14);
    }
    const auto gll = make_rule(NodeKind::GaussLobattoLegendre, p);
    for (int j = 1; j < p; ++j) {
      const double x = gll.nodes[j];
      const double scale = p * (p + 1) / 2.0;
      CHECK(std::abs((1 - x * x) * legendre_and_derivative(p, x).second) / scale < 1e-14);
    }
  }
}

TEST_CASE("GL nodes agree with the Golub-Welsch eigenvalue oracle") {
  for (int p : {1, 4, 9, 20, 30}) {
    const auto r = make_rule(NodeKind::GaussLegendre, p);
    const Eigen::VectorXd ref = golub_welsch_nodes(p + 1);
    for (int j = 0; j <= p; ++j) CHECK(r.nodes[j] == doctest::Approx(ref(j)).epsilon(1e-13).scale(1.0));
  }
}

TEST_CASE("GLL weights solve the moment system") {
  for (int p : {1, 2, 5, 8, 12}) {
    CAPTURE(p);
    const auto r = make_rule(NodeKind::GaussLobattoLegendre, p);
    // Exactness to degree p fixes the weights: V^T w = moments.
    Eigen::MatrixXd v(p + 1, p + 1);
    Eigen::VectorXd moments(p + 1);
    for (int k = 0; k <= p; ++k) {
      for (int j = 0; j <= p; ++j) v(k, j) = legendre_and_derivative(k, r.nodes[j]).first;
      moments(k) = k == 0 ? 2.0 : 0.0;
    }
    const Eigen::VectorXd w = v.fullPivLu().solve(moments);
    for (int j = 0; j <= p; ++j) CHECK(r.weights[j] == doctest::Approx(w(j)).epsilon(1e-12));
  }
}

TEST_CASE("GL 10 integrates x^20 like the Romberg oracle") {
  const auto r = make_rule(NodeKind::GaussLegendre, 10);
  const auto f = [](double x) { return std::pow(x, 20); };
  const double ref = oracle::romberg(f, -1.0, 1.0);
  CHECK(std::abs(ref - 2.0 / 21.0) < 1e-13);
  CHECK(std::abs(integrate(r, f) - ref) < 1e-12);
}

TEST_CASE("random polynomials are integrated exactly to the rule's degree") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (auto kind : {NodeKind::GaussLegendre, NodeKind::GaussLobattoLegendre}) {
    for (int p = (kind == NodeKind::GaussLegendre ? 0 : 1); p <= 30; ++p) {
      const int deg = kind == NodeKind::GaussLegendre ? 2 * p + 1 : 2 * p - 1;
      // Legendre expansion keeps the polynomial well scaled at high degree.
      std::vector<double> c(deg + 1);
      for (auto& v : c) v = coef(rng);
      const auto f = [&](double x) {
        double s = 0.0;
        for (int k = 0; k <= deg; ++k) s += c[k] * legendre_and_derivative(k, x).first;
        return s;
      };
      const double exact = 2.0 * c[0];
      const auto r = make_rule(kind, p);
      CAPTURE(p);
      CHECK(std::abs(integrate(r, f) - exact) <= 1e-11 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("weight quotient and node distance examples") {
  CHECK(weight_quotient_max(make_rule(NodeKind::GaussLegendre, 1)) == doctest::Approx(1.0));
  CHECK(weight_quotient_max(make_rule(NodeKind::GaussLobattoLegendre, 2)) == doctest::Approx(4.0));
  CHECK(min_node_distance(make_rule(NodeKind::GaussLobattoLegendre, 2)) == doctest::Approx(1.0));
  CHECK(min_node_distance(make_rule(NodeKind::GaussLegendre, 1)) == doctest::Approx(2.0 / std::sqrt(3.0)));
  CHECK_THROWS_AS(min_node_distance(make_rule(NodeKind::GaussLegendre, 0)), std::invalid_argument);
}

TEST_CASE("GL node enclosure by trigonometric bounds") {
  for (int p = 1; p <= 30; ++p) {
    const auto r = make_rule(NodeKind::GaussLegendre, p);
    for (int j = 1; j <= p + 1; ++j) {
      const double x = r.nodes[j - 1];
      if (!(x < 0.0)) continue;
      const double theta = std::acos(-x);
      CHECK(theta > (j - 0.5) * std::numbers::pi / (p + 1));
      CHECK(theta < j * std::numbers::pi / (p + 2));
    }
  }
}
