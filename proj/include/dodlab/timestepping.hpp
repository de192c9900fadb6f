#ifndef DODLAB_TIMESTEPPING_HPP_
#define DODLAB_TIMESTEPPING_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dodlab/global_operator.hpp"

namespace dodlab {

/**
 * @brief Explicit Runge-Kutta method in Shu-Osher form.
 *
 * With y_0 = u^n, stage i = 1..s is
 *   y_i = sum_{k<i} alpha(i-1, k) y_k + dt * beta(i-1, k) * F(y_k),
 * and u^{n+1} = y_s. For the SSP methods every row of alpha is a convex
 * combination. `monotonicity_cfl` is the constant C with which
 * dt ||L||_M <= C keeps ||u||_M nonincreasing for semibounded L, where known.
 */
struct RKMethod {
  std::string name;
  int stages = 0;
  int order = 0;
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd beta;
  std::optional<double> monotonicity_cfl;
};

RKMethod explicit_euler();
RKMethod ssprk22();
RKMethod ssprk33();
RKMethod ssprk104();

/// "euler", "ssprk22", "ssprk33", "ssprk104" (also "SSPRK(3,3)" style).
RKMethod method_by_name(std::string_view name);

/// Coefficients c_0..c_s of the stability polynomial R(z) = sum c_k z^k.
std::vector<double> stability_polynomial(const RKMethod& method);

/// True when R(z) agrees with exp(z) through z^order (to rounding).
bool satisfies_order_conditions(const RKMethod& method, double tol = 1e-13);

/// Reusable stage storage for repeated steps of one method and size.
class RungeKuttaStepper {
 public:
  RungeKuttaStepper(RKMethod method, Eigen::Index size);

  const RKMethod& method() const { return method_; }

  /// Advances u in place by dt. rhs(x, out) must write F(x) into out.
  template <typename Rhs>
  void step(Rhs&& rhs, StateVector& u, double dt);

 private:
  RKMethod method_;
  std::vector<StateVector> y_;
  std::vector<StateVector> f_;
  std::vector<bool> needs_rhs_;
};

StateVector step(const RKMethod& method, const GlobalOperator& op,
                 const StateVector& u, double dt);

enum class EvolveStatus {
  kCompleted,
  /// Non-finite entry or ||u||_M above blowup_ratio * ||u0||_M.
  kBlowUp,
  /// ||u||_M rose above abort_above_ratio * ||u0||_M.
  kEnergyThresholdExceeded,
};

struct EvolveOptions {
  int record_every = 1;
  double blowup_ratio = 1e3;
  std::optional<double> abort_above_ratio;
};

/// Recorded ||u||_M history. max_energy_ratio and max_step_increase cover
/// every step, recorded or not.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> energies;
  StateVector final_state;
  EvolveStatus status = EvolveStatus::kCompleted;
  long steps = 0;
  double max_energy_ratio = 1.0;
  double max_step_increase = 0.0;

  bool stable() const { return status == EvolveStatus::kCompleted; }
};

/// Steps u0 to time T; the last step is shortened to land on T exactly.
Trajectory evolve(const RKMethod& method, const GlobalOperator& op,
                  const StateVector& u0, double dt, double final_time,
                  const EvolveOptions& options = {});

template <typename Rhs>
void RungeKuttaStepper::step(Rhs&& rhs, StateVector& u, double dt) {
  const int s = method_.stages;
  y_[0] = u;
  if (needs_rhs_[0]) {
    rhs(y_[0], f_[0]);
  }
  for (int i = 1; i <= s; ++i) {
    StateVector& yi = (i == s) ? u : y_[i];
    yi.setZero();
    for (int k = 0; k < i; ++k) {
      const double a = method_.alpha(i - 1, k);
      const double b = method_.beta(i - 1, k);
      if (a != 0.0) {
        yi.noalias() += a * y_[k];
      }
      if (b != 0.0) {
        yi.noalias() += (dt * b) * f_[k];
      }
    }
    if (i < s && needs_rhs_[i]) {
      rhs(yi, f_[i]);
    }
  }
}

}  // namespace dodlab

#endif  // DODLAB_TIMESTEPPING_HPP_
