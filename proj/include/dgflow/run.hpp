#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dgflow/config.hpp"
#include "dgflow/output.hpp"

namespace dgflow {

/// Progress messages from the drivers (one line each, no newline).
using RunLog = std::function<void(const std::string&)>;

struct RunResult {
  SimState final;
  std::vector<DiagnosticsRow> series;  // every `output.every` steps plus the last
  std::optional<double> l2_error;      // at t_end, when the flow has a closed form
};

/// One simulation as configured: L2 projection of the initial field, time
/// loop, diagnostics (CSV) and VTK frames per the output plan. On blow-up
/// the last accepted state is written to <vtk>/last_good.vtk (when a VTK
/// directory is set) and the NumericalError is rethrown. Every emitted row
/// must have a divergence norm at round-off level, otherwise NumericalError.
RunResult run_simulation(const RunConfig& config, const RunLog& log = {});

struct StudyPoint {
  int cells = 0;  // spatial study
  double dt = 0;  // temporal study
  long steps = 0;
  double error = 0;
  std::optional<double> eoc;  // against the previous point
};

/// Convergence study: over dt_list (fixed steps) when it is non-empty, else
/// over mesh_sizes. Needs a flow with a closed-form solution.
std::vector<StudyPoint> run_study(const RunConfig& config, const RunLog& log = {});

}  // namespace dgflow
