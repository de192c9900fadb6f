#include "dodlab/lagrange_ops.hpp"

#include <stdexcept>

namespace dodlab {

Eigen::MatrixXd LagrangeOperators::boundary_right() const {
  return right.transpose() * right;
}

Eigen::MatrixXd LagrangeOperators::boundary_left() const {
  return left.transpose() * right;
}

Eigen::VectorXd barycentric_weights(const QuadratureRule& rule) {
  const int n = rule.size();
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m < n; ++m) {
      if (m != j) {
        w(j) /= rule.nodes[j] - rule.nodes[m];
      }
    }
  }
  return w;
}

Eigen::RowVectorXd lagrange_row(const QuadratureRule& rule,
                                const Eigen::VectorXd& bary, double t) {
  const int n = rule.size();
  Eigen::RowVectorXd row(n);
  double denom = 0.0;
  for (int k = 0; k < n; ++k) {
    const double diff = t - rule.nodes[k];
    if (diff == 0.0) {
      row.setZero();
      row(k) = 1.0;
      return row;
    }
    row(k) = bary(k) / diff;
    denom += row(k);
  }
  return row / denom;
}

LagrangeOperators build_operators(const QuadratureRule& rule) {
  const int n = rule.size();
  const Eigen::VectorXd bary = barycentric_weights(rule);

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i != j) {
        d(i, j) = bary(j) / bary(i) / (rule.nodes[i] - rule.nodes[j]);
        row_sum += d(i, j);
      }
    }
    d(i, i) = -row_sum;
  }

  return LagrangeOperators{
      rule, std::move(d), lagrange_row(rule, bary, 1.0),
      lagrange_row(rule, bary, -1.0),
      Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), n)};
}

CutInterpolation build_cut_interpolation(const QuadratureRule& rule,
                                         double alpha) {
  if (!(alpha >= 0.0 && alpha <= 0.5)) {
    throw std::invalid_argument("cut-cell factor must lie in [0, 1/2]");
  }
  const int n = rule.size();
  const Eigen::VectorXd bary = barycentric_weights(rule);
  CutInterpolation cut{Eigen::MatrixXd(n, n), Eigen::RowVectorXd(n), alpha};
  for (int l = 0; l < n; ++l) {
    cut.interpolation.row(l) =
        lagrange_row(rule, bary, 1.0 + alpha * (1.0 + rule.nodes[l]));
  }
  cut.outflow = lagrange_row(rule, bary, 1.0 + 2.0 * alpha);
  return cut;
}

}  // namespace dodlab
