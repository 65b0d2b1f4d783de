#include "dgflow/run.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "dgflow/diagnostics.hpp"
#include "dgflow/error.hpp"
#include "dgflow/solver.hpp"
#include "dgflow/timeloop.hpp"

namespace dgflow {

namespace {

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::string frame_path(const std::string& dir, long step) {
  return (std::filesystem::path(dir) / format("frame_%06ld.vtk", step)).string();
}

}  // namespace

RunResult run_simulation(const RunConfig& config, const RunLog& log) {
  config.validate();
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  const Flow flow = config.make_flow();
  auto space = std::make_shared<const Space>(build_mesh(config.mesh), config.degree);
  const HybridSystem sys(space, config.problem_data());
  TimeStepper stepper(sys, config.integrator);
  const StepControl control = config.step_control();
  const OutputPlan& plan = config.output;

  say(format("mesh %s: %d elements, %d facets, degree %d, %d velocity dofs", config.mesh.c_str(),
             space->num_elements(), space->num_facets(), config.degree, space->num_dofs()));

  std::unique_ptr<CsvWriter> csv;
  if (!plan.csv.empty()) csv = std::make_unique<CsvWriter>(plan.csv);

  RunResult result;
  const double u_scale = [&] {
    const StateVector u0 = project_initial(flow.initial, sys, 0.0);
    result.final.u = u0;
    return std::sqrt(energy(u0));
  }();
  auto emit = [&](const StateVector& u, std::optional<double> dt) {
    const DiagnosticsRow row = sample_diagnostics(u, flow.exact, dt);
    if (!(row.div_norm <= 1e-10 * std::max(1.0, u_scale)))
      throw NumericalError(format("divergence norm %.3e at t=%.6g exceeds round-off", row.div_norm, row.t));
    result.series.push_back(row);
    if (csv) csv->append(row);
    say(format("t=%.6f  kinetic energy %.10e  vmax %.4e", row.t, 0.5 * row.energy, row.vmax));
  };
  auto frame = [&](const StateVector& u, long step, const Eigen::VectorXd* p) {
    if (plan.vtk_dir.empty()) return;
    write_vtk(u, p, frame_path(plan.vtk_dir, step));
  };

  emit(result.final.u, std::nullopt);
  frame(result.final.u, 0, nullptr);

  SimState last_good;
  long last_emitted = 0;
  try {
    result.final = simulate(stepper, result.final.u, control, [&](const SimState& s) {
      const bool done = s.t >= control.t_end * (1 - 1e-14);
      if (s.step % plan.every == 0 || done) {
        emit(s.u, s.dt);
        last_emitted = s.step;
        const Eigen::VectorXd p = cell_pressure(*space, stepper.last_pressure());
        frame(s.u, s.step, &p);
      }
      return true;
    }, &last_good);
  } catch (const NumericalError&) {
    if (!plan.vtk_dir.empty() && last_good.u.space) {
      const std::string path = (std::filesystem::path(plan.vtk_dir) / "last_good.vtk").string();
      write_vtk(last_good.u, nullptr, path);
      say(format("blow-up after step %ld (t=%.6g); last good state written to %s", last_good.step, last_good.t,
                 path.c_str()));
    }
    throw;
  }
  if (last_emitted != result.final.step) emit(result.final.u, result.final.dt);
  if (flow.exact) result.l2_error = l2_error(result.final.u, flow.exact, result.final.t);
  say(format("done: %ld steps to t=%.6g", result.final.step, result.final.t));
  return result;
}

std::vector<StudyPoint> run_study(const RunConfig& config, const RunLog& log) {
  config.validate();
  if (!config.make_flow().exact) throw ConfigError("study: flow '" + config.flow + "' has no closed-form solution");
  const bool temporal = !config.dt_list.empty();
  if (!temporal && config.mesh_sizes.empty()) throw ConfigError("study: set [time] dt_list or [mesh] sizes");
  const std::size_t count = temporal ? config.dt_list.size() : config.mesh_sizes.size();

  std::vector<StudyPoint> points;
  for (std::size_t i = 0; i < count; ++i) {
    RunConfig c = config;
    c.output = {};
    StudyPoint p;
    if (temporal) {
      c.dt = p.dt = config.dt_list[i];
    } else {
      p.cells = config.mesh_sizes[i];
      c.mesh = with_cells(config.mesh, p.cells);
    }
    const RunResult r = run_simulation(c);
    p.steps = r.final.step;
    p.error = *r.l2_error;
    if (!points.empty()) {
      const StudyPoint& q = points.back();
      const double ratio = temporal ? q.dt / p.dt : double(p.cells) / q.cells;
      p.eoc = std::log(q.error / p.error) / std::log(ratio);
    }
    if (log)
      log(temporal ? format("dt=%.6g  steps=%ld  L2 error %.4e  eoc %s", p.dt, p.steps, p.error,
                            p.eoc ? format("%.2f", *p.eoc).c_str() : "-")
                   : format("n=%d  steps=%ld  L2 error %.4e  eoc %s", p.cells, p.steps, p.error,
                            p.eoc ? format("%.2f", *p.eoc).c_str() : "-"));
    points.push_back(p);
  }
  return points;
}

}  // namespace dgflow
