#pragma once

#include <functional>
#include <limits>
#include <string>

#include "dgflow/forms.hpp"
#include "dgflow/solver.hpp"

namespace dgflow {

enum class IntegratorKind { ForwardEuler, TVDRK3, RK4 };

int stage_count(IntegratorKind kind);
std::string to_string(IntegratorKind kind);
/// Accepts "euler"/"forward_euler", "rk3"/"tvdrk3", "rk4".
IntegratorKind parse_integrator(const std::string& name);

/// Default CFL constants. The convective one is c_C = 0.5/(2k+1); the
/// viscous one is calibrated against the measured spectral radius of the
/// projected SIP operator.
double default_c_conv(int k);
double default_c_visc(int k);

struct StepControl {
  bool fixed = false;
  double dt = 0;        // fixed mode
  double c_conv = -1;   // < 0: default_c_conv(k)
  double c_visc = -1;   // < 0: default_c_visc(k)
  double dt_min = 1e-12;
  double dt_max = std::numeric_limits<double>::infinity();
  double t_end = 1.0;
};

/// min(c_C h / (k^2 vmax), c_B h^2 / (k^4 nu)); terms with vmax = 0 or nu = 0
/// are skipped (infinity when both are).
double cfl_dt(double h, int k, double vmax, double nu, double c_conv, double c_visc);

/// Step size for the next step from time t: CFL bound (or the fixed dt),
/// clamped to [dt_min, dt_max] and shortened to land exactly on t_end.
double compute_dt(const StateVector& u, const StepControl& control, const ProblemData& data, double t);

/// Called after every stage solve with the stage velocity and stage index.
using StageObserver = std::function<void(const StateVector& u, int stage)>;

/// Explicit Runge-Kutta steps with one hybrid solve per stage.
class TimeStepper {
 public:
  TimeStepper(const HybridSystem& system, IntegratorKind kind, Exec exec = Exec::Parallel);

  /// Advances u (at time u.time) by dt.
  StateVector step(const StateVector& u, double dt) const;
  void set_stage_observer(StageObserver observer) { observer_ = std::move(observer); }
  IntegratorKind kind() const { return kind_; }
  const HybridSystem& system() const { return sys_; }

  /// Pressure w/dt of the last stage solve.
  const Eigen::VectorXd& last_pressure() const { return pressure_; }

 private:
  StateVector solve(const Eigen::VectorXd& F, double t_stage, double dt, int stage) const;
  Eigen::VectorXd residual(const StateVector& u, double t) const;

  const HybridSystem& sys_;
  IntegratorKind kind_;
  Exec exec_;
  StageObserver observer_;
  mutable Eigen::VectorXd pressure_;
};

struct SimState {
  StateVector u;
  double t = 0;
  long step = 0;
  double dt = 0;  // last step size
};

/// Called after every accepted step; returning false stops the run.
using StepObserver = std::function<bool(const SimState& state)>;

/// Time loop from u0 to control.t_end. Throws NumericalError on blow-up
/// (non-finite state or ||u|| > 1e6 max(||u0||, 1)); `last_good` then holds
/// the last accepted state.
SimState simulate(const TimeStepper& stepper, const StateVector& u0, const StepControl& control,
                  const StepObserver& on_step = {}, SimState* last_good = nullptr);

}  // namespace dgflow
