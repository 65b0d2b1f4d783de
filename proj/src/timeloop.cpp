#include "dgflow/timeloop.hpp"

#include <algorithm>
#include <cmath>

#include "dgflow/diagnostics.hpp"
#include "dgflow/error.hpp"

namespace dgflow {

using Eigen::VectorXd;

int stage_count(IntegratorKind kind) {
  switch (kind) {
    case IntegratorKind::ForwardEuler: return 1;
    case IntegratorKind::TVDRK3: return 3;
    case IntegratorKind::RK4: return 4;
  }
  return 0;
}

std::string to_string(IntegratorKind kind) {
  switch (kind) {
    case IntegratorKind::ForwardEuler: return "euler";
    case IntegratorKind::TVDRK3: return "rk3";
    case IntegratorKind::RK4: return "rk4";
  }
  return "?";
}

IntegratorKind parse_integrator(const std::string& name) {
  if (name == "euler" || name == "forward_euler") return IntegratorKind::ForwardEuler;
  if (name == "rk3" || name == "tvdrk3" || name == "ssprk3") return IntegratorKind::TVDRK3;
  if (name == "rk4") return IntegratorKind::RK4;
  throw ConfigError("unknown integrator '" + name + "'");
}

double default_c_conv(int k) { return 0.5 / (2 * k + 1); }

// 1.6 / C_k, where C_k = rho h^2 / (nu k^4) is the measured spectral radius
// of the projected SIP operator on periodic_box meshes (alpha = 2, h = min
// diameter): C_k = 978, 234, 128, 91, 73, 62 for k = 1..6. dt rho = 1.6 sits
// inside the real stability intervals of TVD-RK3 (2.51) and RK4 (2.78).
double default_c_visc(int k) {
  static constexpr double table[] = {0.0016, 0.0068, 0.0125, 0.0175, 0.022, 0.0255};
  return table[std::clamp(k, 1, 6) - 1];
}

double cfl_dt(double h, int k, double vmax, double nu, double c_conv, double c_visc) {
  double dt = std::numeric_limits<double>::infinity();
  if (vmax > 0) dt = std::min(dt, c_conv * h / (k * k * vmax));
  if (nu > 0) dt = std::min(dt, c_visc * h * h / (double(k) * k * k * k * nu));
  return dt;
}

double compute_dt(const StateVector& u, const StepControl& control, const ProblemData& data, double t) {
  const Space& sp = *u.space;
  const int k = sp.degree();
  double dt = control.dt;
  if (!control.fixed) {
    if (!u.coeffs.allFinite()) throw NumericalError("compute_dt: non-finite state");
    const double cc = control.c_conv > 0 ? control.c_conv : default_c_conv(k);
    const double cb = control.c_visc > 0 ? control.c_visc : default_c_visc(k);
    dt = cfl_dt(sp.min_diameter(), k, max_velocity(u), data.nu, cc, cb);
  }
  dt = std::clamp(dt, control.dt_min, control.dt_max);
  if (!std::isfinite(dt) || dt <= 0) throw ConfigError("compute_dt: no finite step size (set dt_max)");
  const double remaining = control.t_end - t;
  // absorb round-off so fixed steps land on t_end without a sliver step
  if (dt >= remaining * (1 - 1e-10)) dt = remaining;
  return dt;
}

TimeStepper::TimeStepper(const HybridSystem& system, IntegratorKind kind, Exec exec)
    : sys_(system), kind_(kind), exec_(exec) {}

VectorXd TimeStepper::residual(const StateVector& u, double t) const {
  return spatial_residual(u, sys_.data(), t, exec_);
}

StateVector TimeStepper::solve(const VectorXd& F, double t_stage, double dt, int stage) const {
  StageSolution s = sys_.solve(F, t_stage, dt);
  s.u.time = t_stage;
  pressure_ = s.pressure();
  if (observer_) observer_(s.u, stage);
  return std::move(s.u);
}

StateVector TimeStepper::step(const StateVector& u, double dt) const {
  if (!(dt > 0)) throw Error("time step must be positive");
  const Space& sp = sys_.space();
  const double t = u.time;
  const VectorXd Mu = apply_mass(sp, u.coeffs);
  switch (kind_) {
    case IntegratorKind::ForwardEuler:
      return solve(Mu + dt * residual(u, t), t + dt, dt, 0);
    case IntegratorKind::TVDRK3: {
      const StateVector u1 = solve(Mu + dt * residual(u, t), t + dt, dt, 0);
      const VectorXd F2 = 0.75 * Mu + 0.25 * (apply_mass(sp, u1.coeffs) + dt * residual(u1, t + dt));
      const StateVector u2 = solve(F2, t + 0.5 * dt, dt, 1);
      const VectorXd F3 = Mu / 3 + (2.0 / 3) * (apply_mass(sp, u2.coeffs) + dt * residual(u2, t + 0.5 * dt));
      return solve(F3, t + dt, dt, 2);
    }
    case IntegratorKind::RK4: {
      const VectorXd L1 = residual(u, t);
      const StateVector u2 = solve(Mu + 0.5 * dt * L1, t + 0.5 * dt, dt, 0);
      const VectorXd L2 = residual(u2, t + 0.5 * dt);
      const StateVector u3 = solve(Mu + 0.5 * dt * L2, t + 0.5 * dt, dt, 1);
      const VectorXd L3 = residual(u3, t + 0.5 * dt);
      const StateVector u4 = solve(Mu + dt * L3, t + dt, dt, 2);
      const VectorXd L4 = residual(u4, t + dt);
      return solve(Mu + (dt / 6) * (L1 + 2 * L2 + 2 * L3 + L4), t + dt, dt, 3);
    }
  }
  throw Error("unknown integrator");
}

SimState simulate(const TimeStepper& stepper, const StateVector& u0, const StepControl& control,
                  const StepObserver& on_step, SimState* last_good) {
  if (!(control.t_end >= u0.time)) throw ConfigError("end time before start time");
  const double limit = 1e6 * std::max(std::sqrt(energy(u0)), 1.0);
  SimState state{u0, u0.time, 0, 0};
  if (last_good) *last_good = state;
  while (state.t < control.t_end) {
    const double dt = compute_dt(state.u, control, stepper.system().data(), state.t);
    StateVector next = stepper.step(state.u, dt);
    const double norm = std::sqrt(energy(next));
    if (!next.coeffs.allFinite() || !(norm <= limit))
      throw NumericalError("blow-up at t = " + std::to_string(state.t + dt) + " (step " +
                           std::to_string(state.step + 1) + ", ||u|| = " + std::to_string(norm) + ")");
    state.t = dt == control.t_end - state.t ? control.t_end : state.t + dt;
    next.time = state.t;
    state.u = std::move(next);
    state.dt = dt;
    ++state.step;
    if (last_good) *last_good = state;
    if (on_step && !on_step(state)) break;
  }
  return state;
}

}  // namespace dgflow
