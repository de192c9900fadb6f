#ifndef DODLAB_NORMS_HPP_
#define DODLAB_NORMS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "dodlab/global_operator.hpp"
#include "dodlab/quadrature.hpp"

namespace dodlab {

/// ||u||_M = sqrt(u^T M u) for a positive diagonal M.
class WeightedNorm {
 public:
  /// Throws std::invalid_argument on a nonpositive entry.
  explicit WeightedNorm(Eigen::VectorXd diag);

  const Eigen::VectorXd& diag() const { return diag_; }
  Eigen::Index size() const { return diag_.size(); }

 private:
  Eigen::VectorXd diag_;
};

double norm(const WeightedNorm& w, const Eigen::VectorXd& u);

/// Induced norm max ||A u||_M / ||u||_M = sigma_max(M^1/2 A M^-1/2).
double operator_norm(const WeightedNorm& w, const Eigen::MatrixXd& a);

/// (||A||_M, ||M^-1 A^T M||_M); the second is the M-adjoint of A.
std::pair<double, double> adjoint_norm_check(const WeightedNorm& w,
                                             const Eigen::MatrixXd& a);

struct NormOptions {
  /// Operators with more unknowns use power iteration.
  int dense_cutoff = GlobalOperator::kMaxDenseSize;
  bool force_iterative = false;
  int max_iterations = 10000;
  double tolerance = 1e-10;
  int restarts = 3;
  std::uint64_t seed = 20240521;
};

/// ||L||_M for the global mass matrix. The iterative path throws
/// NonConvergenceError when no restart meets the tolerance.
double global_operator_norm(const GlobalOperator& op,
                            const NormOptions& options = {});

/**
 * M_R-weighted norms of the stabilised blocks (keys as block_name()), of a
 * background block "L_n" / "L_nL" away from the cut, and of the J^1 part of
 * L_(c-1), "star" = S_(c-1) M^-1 eta I^T D^T M I.
 */
std::map<std::string, double> block_norm_report(const GlobalOperator& op);

/// ||I||, ||D I|| and ||L^T B_J|| in the M_R norm of the rule.
double interpolation_norm(const QuadratureRule& rule, double alpha);
double derivative_interpolation_norm(const QuadratureRule& rule, double alpha);
double outflow_extrapolation_norm(const QuadratureRule& rule, double alpha);

}  // namespace dodlab

#endif  // DODLAB_NORMS_HPP_
