#ifndef DODLAB_QUADRATURE_HPP_
#define DODLAB_QUADRATURE_HPP_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dodlab {

enum class NodeKind { GaussLegendre, GaussLobattoLegendre };

/// Short lowercase tag used in tables and on the command line ("gl"/"gll").
std::string to_string(NodeKind kind);

/// Accepts "gl", "gll", "gauss-legendre", "gauss-lobatto-legendre".
NodeKind parse_node_kind(std::string_view text);

/**
 * @brief Nodes and weights of a (p+1)-point rule on the reference element
 * [-1, 1].
 *
 * Nodes are strictly increasing and symmetric about 0; weights are positive,
 * symmetric and sum to 2. GL integrates polynomials of degree 2p+1 exactly,
 * GLL those of degree 2p-1 and contains both endpoints.
 */
struct QuadratureRule {
  NodeKind kind = NodeKind::GaussLegendre;
  int degree = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return degree + 1; }
};

inline constexpr int kDefaultMaxDegree = 30;

/// Builds the GL or GLL rule of polynomial degree p. GLL needs p >= 1.
/// Throws std::invalid_argument for p < 0, GLL with p = 0, or p > max_degree.
QuadratureRule make_rule(NodeKind kind, int p,
                         int max_degree = kDefaultMaxDegree);

/// max_{i,j} w_i / w_j.
double weight_quotient_max(const QuadratureRule& rule);

/// Smallest gap between adjacent nodes. Needs at least two nodes.
double min_node_distance(const QuadratureRule& rule);

/// Legendre polynomial L_n and its derivative at x, by the three-term
/// recurrence.
std::pair<double, double> legendre_and_derivative(int n, double x);

}  // namespace dodlab

#endif  // DODLAB_QUADRATURE_HPP_
