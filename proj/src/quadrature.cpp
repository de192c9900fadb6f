#include "dodlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dodlab {

namespace {

constexpr int kMaxNewtonIterations = 100;

// Newton on f with derivative df, started from x. Stops once the update is
// at rounding level; two extra sweeps polish the last bit.
template <typename F>
double newton(F&& f_and_df, double x) {
  int polish = 2;
  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    auto [f, df] = f_and_df(x);
    const double dx = f / df;
    x -= dx;
    if (std::abs(dx) <= 4.0 * std::numeric_limits<double>::epsilon()) {
      if (polish-- == 0) {
        return x;
      }
    }
  }
  return x;
}

void mirror(std::vector<double>& nodes, std::vector<double>& weights) {
  const int n = static_cast<int>(nodes.size());
  for (int j = 0; j < n / 2; ++j) {
    const double x = 0.5 * (nodes[j] - nodes[n - 1 - j]);
    nodes[j] = x;
    nodes[n - 1 - j] = -x;
    const double w = 0.5 * (weights[j] + weights[n - 1 - j]);
    weights[j] = w;
    weights[n - 1 - j] = w;
  }
  if (n % 2 == 1) {
    nodes[n / 2] = 0.0;
  }
}

QuadratureRule gauss_legendre(int p) {
  const int n = p + 1;
  QuadratureRule rule{NodeKind::GaussLegendre, p, std::vector<double>(n),
                      std::vector<double>(n)};
  for (int j = 0; j < n; ++j) {
    const double guess =
        -std::cos((2.0 * j + 1.0) * std::numbers::pi / (2.0 * n));
    const double x = newton(
        [n](double t) { return legendre_and_derivative(n, t); }, guess);
    const double dl = legendre_and_derivative(n, x).second;
    rule.nodes[j] = x;
    rule.weights[j] = 2.0 / ((1.0 - x * x) * dl * dl);
  }
  mirror(rule.nodes, rule.weights);
  return rule;
}

QuadratureRule gauss_lobatto_legendre(int p) {
  const int n = p + 1;
  QuadratureRule rule{NodeKind::GaussLobattoLegendre, p, std::vector<double>(n),
                      std::vector<double>(n)};
  const double pp1 = p * (p + 1.0);
  rule.nodes.front() = -1.0;
  rule.nodes.back() = 1.0;
  for (int j = 1; j < p; ++j) {
    const double guess = -std::cos(std::numbers::pi * j / p);
    // Interior nodes are the roots of L_p'; L_p'' from the Legendre ODE.
    rule.nodes[j] = newton(
        [p, pp1](double t) {
          auto [l, dl] = legendre_and_derivative(p, t);
          const double d2l = (2.0 * t * dl - pp1 * l) / (1.0 - t * t);
          return std::pair{dl, d2l};
        },
        guess);
  }
  for (int j = 0; j < n; ++j) {
    const double l = legendre_and_derivative(p, rule.nodes[j]).first;
    rule.weights[j] = 2.0 / (pp1 * l * l);
  }
  mirror(rule.nodes, rule.weights);
  rule.nodes.front() = -1.0;
  rule.nodes.back() = 1.0;
  return rule;
}

}  // namespace

std::string to_string(NodeKind kind) {
  return kind == NodeKind::GaussLegendre ? "gl" : "gll";
}

NodeKind parse_node_kind(std::string_view text) {
  if (text == "gl" || text == "GL" || text == "gauss-legendre") {
    return NodeKind::GaussLegendre;
  }
  if (text == "gll" || text == "GLL" || text == "gauss-lobatto-legendre") {
    return NodeKind::GaussLobattoLegendre;
  }
  throw std::invalid_argument("unknown node kind '" + std::string(text) +
                              "' (expected gl or gll)");
}

std::pair<double, double> legendre_and_derivative(int n, double x) {
  if (n == 0) {
    return {1.0, 0.0};
  }
  double l_prev = 1.0, l = x;
  double dl_prev = 0.0, dl = 1.0;
  for (int k = 1; k < n; ++k) {
    const double l_next = ((2.0 * k + 1.0) * x * l - k * l_prev) / (k + 1.0);
    // L'_{k+1} = L'_{k-1} + (2k+1) L_k holds on the closed interval.
    const double dl_next = dl_prev + (2.0 * k + 1.0) * l;
    l_prev = l;
    l = l_next;
    dl_prev = dl;
    dl = dl_next;
  }
  return {l, dl};
}

QuadratureRule make_rule(NodeKind kind, int p, int max_degree) {
  if (p < 0) {
    throw std::invalid_argument("quadrature degree must be nonnegative");
  }
  if (p > max_degree) {
    throw std::invalid_argument("quadrature degree " + std::to_string(p) +
                                " exceeds the maximum " +
                                std::to_string(max_degree));
  }
  if (kind == NodeKind::GaussLegendre) {
    return gauss_legendre(p);
  }
  if (p == 0) {
    throw std::invalid_argument("Gauss-Lobatto-Legendre rules need p >= 1");
  }
  return gauss_lobatto_legendre(p);
}

double weight_quotient_max(const QuadratureRule& rule) {
  const auto [lo, hi] =
      std::minmax_element(rule.weights.begin(), rule.weights.end());
  return *hi / *lo;
}

double min_node_distance(const QuadratureRule& rule) {
  if (rule.nodes.size() < 2) {
    throw std::invalid_argument("node distance needs at least two nodes");
  }
  double gap = rule.nodes[1] - rule.nodes[0];
  for (std::size_t j = 2; j < rule.nodes.size(); ++j) {
    gap = std::min(gap, rule.nodes[j] - rule.nodes[j - 1]);
  }
  return gap;
}

}  // namespace dodlab
