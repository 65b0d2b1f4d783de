#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dgflow/forms.hpp"
#include "dgflow/mesh.hpp"
#include "dgflow/problems.hpp"
#include "dgflow/timeloop.hpp"

namespace dgflow {

/// Where a run writes its results. Empty paths disable an output.
struct OutputPlan {
  std::string csv;
  std::string vtk_dir;
  int every = 1;  // diagnostics and VTK frames every this many steps

  bool operator==(const OutputPlan&) const = default;
};

/// Everything needed to reproduce a run. The INI form has sections
///   [mesh]     source, degree, sizes
///   [problem]  flow, nu, alpha, penalty, rho, delta
///   [boundary] <label> = noflow | noslip | inflow | outflow
///   [time]     integrator, t_end, dt, c_conv, c_visc, dt_list
///   [output]   csv, vtk, every
/// Numeric values accept arithmetic with pi, e.g. `0.1/4` or `pi/15`.
struct RunConfig {
  std::string preset;
  std::string mesh = "box:8";
  std::vector<int> mesh_sizes;  // cells per row for spatial studies
  int degree = 2;

  std::string flow = "taylor_green";
  double nu = 0.0;
  double alpha = 2.0;
  PenaltyScale penalty = PenaltyScale::TraceInverse;
  double rho = 0.20943951023931953;  // pi/15
  double delta = 0.05;
  std::map<std::string, BCKind> boundaries;

  IntegratorKind integrator = IntegratorKind::TVDRK3;
  double t_end = 1.0;
  double dt = 0.0;  // > 0: fixed step, otherwise CFL-controlled
  double c_conv = -1.0;
  double c_visc = -1.0;
  std::vector<double> dt_list;  // step sizes for temporal studies

  OutputPlan output;

  /// Degree in [1, 6], t_end > 0, known flow and mesh syntax.
  void validate() const;

  Flow make_flow() const;
  ProblemData problem_data() const;
  StepControl step_control() const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses INI text; unknown sections or keys are errors (ConfigError).
RunConfig parse_config(std::istream& in);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// Arithmetic expression with + - * / ^, parentheses and the constant pi.
double evaluate_expression(const std::string& text);

/// Named benchmark configurations.
const std::vector<std::string>& preset_names();
RunConfig preset(const std::string& name);

/// Mesh source syntax:
///   box:N[,jitter=J][,seed=S]   periodic [0,2pi]^2, near-equilateral, edge ~ 2pi/N
///   square:NX[xNY][,jitter=J][,periodic][,length=L][,seed=S]
///                               [0,L]^2 cells split along one diagonal
///   file:PATH or PATH           mesh file
Mesh build_mesh(const std::string& source);
/// The same source with its cell count replaced (generated meshes only).
std::string with_cells(const std::string& source, int n);

std::string to_string(BCKind kind);
BCKind parse_bc_kind(const std::string& name);
std::string to_string(PenaltyScale scale);
PenaltyScale parse_penalty_scale(const std::string& name);

}  // namespace dgflow
