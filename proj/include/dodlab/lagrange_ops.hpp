#ifndef DODLAB_LAGRANGE_OPS_HPP_
#define DODLAB_LAGRANGE_OPS_HPP_

#include <Eigen/Dense>

#include "dodlab/quadrature.hpp"

namespace dodlab {

/**
 * @brief Reference-element matrices of the nodal Lagrange basis on a rule.
 *
 * `derivative(l, j)` is l_j'(x_l); `right`/`left` evaluate the basis at +1/-1;
 * `mass` holds the diagonal of M_R (the rule weights).
 */
struct LagrangeOperators {
  QuadratureRule rule;
  Eigen::MatrixXd derivative;
  Eigen::RowVectorXd right;
  Eigen::RowVectorXd left;
  Eigen::VectorXd mass;

  int size() const { return rule.size(); }
  /// R^T R, the outflow-face coupling of a cell with itself.
  Eigen::MatrixXd boundary_right() const;
  /// L^T R, the inflow coupling to the upwind neighbour.
  Eigen::MatrixXd boundary_left() const;
};

/**
 * @brief Extension of a reference-element polynomial onto the reference cut
 * cell [1, 1 + 2 alpha].
 *
 * `interpolation(l, k)` = l_k(xi_l) with xi_l = 1 + alpha (1 + x_l), and
 * `outflow(k)` = l_k(1 + 2 alpha).
 */
struct CutInterpolation {
  Eigen::MatrixXd interpolation;
  Eigen::RowVectorXd outflow;
  double alpha = 0.0;
};

/// Barycentric weights 1 / prod_{m != j} (x_j - x_m).
Eigen::VectorXd barycentric_weights(const QuadratureRule& rule);

/// Row of basis values l_k(t). Exact unit row when t hits a node.
Eigen::RowVectorXd lagrange_row(const QuadratureRule& rule,
                                const Eigen::VectorXd& bary, double t);

LagrangeOperators build_operators(const QuadratureRule& rule);

/// Throws std::invalid_argument unless 0 <= alpha <= 1/2.
CutInterpolation build_cut_interpolation(const QuadratureRule& rule,
                                         double alpha);

}  // namespace dodlab

#endif  // DODLAB_LAGRANGE_OPS_HPP_
