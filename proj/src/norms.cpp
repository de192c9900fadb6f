#include "dodlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "dodlab/error.hpp"
#include "dodlab/lagrange_ops.hpp"

namespace dodlab {

namespace {

double largest_singular_value(const Eigen::MatrixXd& a) {
  if (a.size() == 0) {
    return 0.0;
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(a.cols(), a.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                     Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

Eigen::VectorXd reference_weights(const QuadratureRule& rule) {
  return Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), rule.size());
}

double iterative_norm(const GlobalOperator& op, const NormOptions& options) {
  const Eigen::VectorXd sqrt_m = op.mass().cwiseSqrt();
  const Eigen::VectorXd inv_sqrt_m = sqrt_m.cwiseInverse();
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;

  StateVector v(op.size()), w(op.size()), tmp(op.size());
  double best = 0.0;
  for (int restart = 0; restart < options.restarts; ++restart) {
    bool converged = false;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      v(k) = normal(rng);
    }
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < options.max_iterations; ++it) {
      // w = A^T A v with A = M^1/2 L M^-1/2.
      op.apply(inv_sqrt_m.cwiseProduct(v), tmp);
      tmp = sqrt_m.cwiseProduct(tmp);
      const double next = tmp.norm();
      op.apply_transpose(sqrt_m.cwiseProduct(tmp), w);
      w = inv_sqrt_m.cwiseProduct(w);
      const double wn = w.norm();
      if (wn == 0.0) {
        estimate = 0.0;
        converged = true;
        break;
      }
      v = w / wn;
      if (std::abs(next - estimate) <= options.tolerance * next) {
        estimate = next;
        converged = true;
        break;
      }
      estimate = next;
    }
    if (!converged) {
      throw NonConvergenceError(
          "power iteration for ||L||_M did not converge in " +
          std::to_string(options.max_iterations) + " iterations");
    }
    best = std::max(best, estimate);
  }
  return best;
}

}  // namespace

WeightedNorm::WeightedNorm(Eigen::VectorXd diag) : diag_(std::move(diag)) {
  if (!(diag_.size() == 0 || diag_.minCoeff() > 0.0)) {
    throw std::invalid_argument("norm weights must be positive");
  }
}

double norm(const WeightedNorm& w, const Eigen::VectorXd& u) {
  if (u.size() != w.size()) {
    throw std::invalid_argument("vector and weights differ in length");
  }
  return std::sqrt(u.cwiseAbs2().dot(w.diag()));
}

double operator_norm(const WeightedNorm& w, const Eigen::MatrixXd& a) {
  if (a.rows() != w.size() || a.cols() != w.size()) {
    throw std::invalid_argument("matrix and weights differ in dimension");
  }
  const Eigen::VectorXd s = w.diag().cwiseSqrt();
  return largest_singular_value(s.asDiagonal() * a * s.cwiseInverse().asDiagonal());
}

std::pair<double, double> adjoint_norm_check(const WeightedNorm& w,
                                             const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd adjoint =
      w.diag().cwiseInverse().asDiagonal() * a.transpose() * w.diag().asDiagonal();
  return {operator_norm(w, a), operator_norm(w, adjoint)};
}

double global_operator_norm(const GlobalOperator& op,
                            const NormOptions& options) {
  if (options.force_iterative || op.size() > options.dense_cutoff) {
    return iterative_norm(op, options);
  }
  const Eigen::VectorXd s = op.mass().cwiseSqrt();
  return largest_singular_value(s.asDiagonal() * op.dense() *
                                s.cwiseInverse().asDiagonal());
}

std::map<std::string, double> block_norm_report(const GlobalOperator& op) {
  if (!op.mesh().cut) {
    throw std::logic_error("block report needs a cut mesh");
  }
  const WeightedNorm w(reference_weights(op.rule()));
  std::map<std::string, double> report;
  for (auto which : kStabilizedBlocks) {
    report[std::string(block_name(which))] =
        operator_norm(w, op.stabilized_block(which));
  }
  // A background cell well away from the stencil c-1..c+2.
  const int c = *op.mesh().cut;
  const int n = op.num_cells();
  const int far = (c + n / 2) % n;
  report["L_n"] = operator_norm(w, op.block(far, far));
  report["L_nL"] = operator_norm(w, op.block(far, (far + n - 1) % n));

  const auto& ref = op.reference();
  const Eigen::MatrixXd& ext = op.cut_interpolation()->interpolation;
  const double s_prev = 2.0 * op.advection().speed / op.mesh().widths[c - 1];
  const Eigen::MatrixXd star =
      s_prev * op.eta() * ref.mass.cwiseInverse().asDiagonal() *
      (ext.transpose() * ref.derivative.transpose() * ref.mass.asDiagonal() *
       ext);
  report["star"] = operator_norm(w, star);
  return report;
}

double interpolation_norm(const QuadratureRule& rule, double alpha) {
  return operator_norm(WeightedNorm(reference_weights(rule)),
                       build_cut_interpolation(rule, alpha).interpolation);
}

double derivative_interpolation_norm(const QuadratureRule& rule,
                                     double alpha) {
  const auto ops = build_operators(rule);
  return operator_norm(
      WeightedNorm(reference_weights(rule)),
      ops.derivative * build_cut_interpolation(rule, alpha).interpolation);
}

double outflow_extrapolation_norm(const QuadratureRule& rule, double alpha) {
  const auto ops = build_operators(rule);
  return operator_norm(
      WeightedNorm(reference_weights(rule)),
      ops.left.transpose() * build_cut_interpolation(rule, alpha).outflow);
}

}  // namespace dodlab
