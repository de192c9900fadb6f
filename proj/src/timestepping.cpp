#include "dodlab/timestepping.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dodlab {

namespace {

RKMethod make_method(std::string name, int stages, int order,
                     std::optional<double> cfl) {
  return RKMethod{std::move(name), stages, order,
                  Eigen::MatrixXd::Zero(stages, stages),
                  Eigen::MatrixXd::Zero(stages, stages), cfl};
}

std::string normalized(std::string_view name) {
  std::string out;
  for (char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  return out;
}

}  // namespace

RKMethod explicit_euler() {
  RKMethod m = make_method("euler", 1, 1, std::nullopt);
  m.alpha(0, 0) = 1.0;
  m.beta(0, 0) = 1.0;
  return m;
}

RKMethod ssprk22() {
  RKMethod m = make_method("ssprk22", 2, 2, std::nullopt);
  m.alpha(0, 0) = 1.0;
  m.beta(0, 0) = 1.0;
  m.alpha(1, 0) = 0.5;
  m.alpha(1, 1) = 0.5;
  m.beta(1, 1) = 0.5;
  return m;
}

RKMethod ssprk33() {
  RKMethod m = make_method("ssprk33", 3, 3, 1.0);
  m.alpha(0, 0) = 1.0;
  m.beta(0, 0) = 1.0;
  m.alpha(1, 0) = 0.75;
  m.alpha(1, 1) = 0.25;
  m.beta(1, 1) = 0.25;
  m.alpha(2, 0) = 1.0 / 3.0;
  m.alpha(2, 2) = 2.0 / 3.0;
  m.beta(2, 2) = 2.0 / 3.0;
  return m;
}

RKMethod ssprk104() {
  // Ketcheson's ten-stage fourth-order method: two chains of five forward
  // Euler steps of size dt/6, joined by convex combinations with u^n.
  RKMethod m = make_method("ssprk104", 10, 4, 0.67493);
  const double h = 1.0 / 6.0;
  for (int i = 1; i <= 4; ++i) {
    m.alpha(i - 1, i - 1) = 1.0;
    m.beta(i - 1, i - 1) = h;
  }
  m.alpha(4, 0) = 0.6;
  m.alpha(4, 4) = 0.4;
  m.beta(4, 4) = 0.4 * h;
  for (int i = 6; i <= 9; ++i) {
    m.alpha(i - 1, i - 1) = 1.0;
    m.beta(i - 1, i - 1) = h;
  }
  m.alpha(9, 0) = 1.0 / 25.0;
  m.alpha(9, 4) = 9.0 / 25.0;
  m.beta(9, 4) = 9.0 / 25.0 * h;
  m.alpha(9, 9) = 0.6;
  m.beta(9, 9) = 0.6 * h;
  return m;
}

RKMethod method_by_name(std::string_view name) {
  const std::string key = normalized(name);
  if (key == "euler" || key == "expliciteuler" || key == "ssprk11") {
    return explicit_euler();
  }
  if (key == "ssprk22") {
    return ssprk22();
  }
  if (key == "ssprk33") {
    return ssprk33();
  }
  if (key == "ssprk104") {
    return ssprk104();
  }
  throw std::invalid_argument("unknown Runge-Kutta method '" +
                              std::string(name) + "'");
}

std::vector<double> stability_polynomial(const RKMethod& method) {
  const int s = method.stages;
  // Stage k as a polynomial in z, applied to u' = lambda u with z = lambda dt.
  std::vector<std::vector<double>> y(s + 1, std::vector<double>(s + 1, 0.0));
  y[0][0] = 1.0;
  for (int i = 1; i <= s; ++i) {
    for (int k = 0; k < i; ++k) {
      const double a = method.alpha(i - 1, k);
      const double b = method.beta(i - 1, k);
      for (int d = 0; d <= s; ++d) {
        y[i][d] += a * y[k][d];
        if (d + 1 <= s) {
          y[i][d + 1] += b * y[k][d];
        }
      }
    }
  }
  return y[s];
}

bool satisfies_order_conditions(const RKMethod& method, double tol) {
  const auto coeffs = stability_polynomial(method);
  double factorial = 1.0;
  for (int k = 0; k <= method.order; ++k) {
    if (k > 0) {
      factorial *= k;
    }
    if (std::abs(coeffs[k] - 1.0 / factorial) > tol) {
      return false;
    }
  }
  return true;
}

RungeKuttaStepper::RungeKuttaStepper(RKMethod method, Eigen::Index size)
    : method_(std::move(method)),
      y_(method_.stages, StateVector::Zero(size)),
      f_(method_.stages, StateVector::Zero(size)),
      needs_rhs_(method_.stages, false) {
  for (int k = 0; k < method_.stages; ++k) {
    for (int i = 0; i < method_.stages; ++i) {
      if (method_.beta(i, k) != 0.0) {
        needs_rhs_[k] = true;
      }
    }
  }
}

StateVector step(const RKMethod& method, const GlobalOperator& op,
                 const StateVector& u, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("time step must be positive");
  }
  RungeKuttaStepper stepper(method, u.size());
  StateVector out = u;
  stepper.step([&](const StateVector& x, StateVector& f) { op.apply(x, f); },
               out, dt);
  return out;
}

Trajectory evolve(const RKMethod& method, const GlobalOperator& op,
                  const StateVector& u0, double dt, double final_time,
                  const EvolveOptions& options) {
  if (!(dt > 0.0) || !(final_time > 0.0)) {
    throw std::invalid_argument("time step and final time must be positive");
  }
  if (u0.size() != op.size()) {
    throw std::invalid_argument("initial state does not match operator size");
  }
  const Eigen::VectorXd& mass = op.mass();
  const auto energy = [&](const StateVector& u) {
    return std::sqrt(u.cwiseAbs2().dot(mass));
  };

  Trajectory traj;
  traj.final_state = u0;
  const double e0 = energy(u0);
  traj.times.push_back(0.0);
  traj.energies.push_back(e0);

  RungeKuttaStepper stepper(method, u0.size());
  const auto rhs = [&](const StateVector& x, StateVector& f) { op.apply(x, f); };
  const double t_eps = 1e-12 * final_time;
  const int record_every = std::max(1, options.record_every);

  StateVector& u = traj.final_state;
  double t = 0.0;
  double e_prev = e0;
  long k = 0;
  while (final_time - t > t_eps) {
    double t_next = static_cast<double>(k + 1) * dt;
    if (t_next > final_time - t_eps) {
      t_next = final_time;
    }
    stepper.step(rhs, u, t_next - t);
    t = t_next;
    ++k;

    const double e = energy(u);
    traj.steps = k;
    if (!std::isfinite(e) || e > options.blowup_ratio * e0) {
      traj.status = EvolveStatus::kBlowUp;
    } else if (e0 > 0.0) {
      traj.max_energy_ratio = std::max(traj.max_energy_ratio, e / e0);
    }
    traj.max_step_increase = std::max(traj.max_step_increase, e - e_prev);
    e_prev = e;
    if (traj.status == EvolveStatus::kCompleted && options.abort_above_ratio &&
        e > *options.abort_above_ratio * e0) {
      traj.status = EvolveStatus::kEnergyThresholdExceeded;
    }
    const bool last = final_time - t <= t_eps;
    if (k % record_every == 0 || last ||
        traj.status != EvolveStatus::kCompleted) {
      traj.times.push_back(t);
      traj.energies.push_back(e);
    }
    if (traj.status != EvolveStatus::kCompleted) {
      break;
    }
  }
  return traj;
}

}  // namespace dodlab
