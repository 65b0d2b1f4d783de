// Command-line front end: run a configured simulation, run a convergence
// study, or list the built-in presets.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dgflow/config.hpp"
#include "dgflow/error.hpp"
#include "dgflow/run.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kIO = 4 };

struct Overrides {
  std::string config_file;
  std::string preset;
  std::optional<int> degree;
  std::string mesh;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::string out_dir;
  std::string integrator;
  bool print_config = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_file, "INI configuration file");
  cmd->add_option("-p,--preset", o.preset, "start from a named preset (see `presets`)");
  cmd->add_option("-k,--degree", o.degree, "polynomial degree 1..6");
  cmd->add_option("-m,--mesh", o.mesh, "mesh source, e.g. box:32 or file:mesh.msh");
  cmd->add_option("--dt", o.dt, "fixed time step (0 = CFL-controlled)");
  cmd->add_option("-T,--tend", o.t_end, "final time");
  cmd->add_option("-o,--out", o.out_dir, "output directory for diagnostics.csv and VTK frames");
  cmd->add_option("-i,--integrator", o.integrator, "euler | rk3 | rk4");
  cmd->add_flag("--print-config", o.print_config, "print the effective configuration and exit");
}

// File first, then the preset if no file named one, then flags.
dgflow::RunConfig resolve(const Overrides& o) {
  dgflow::RunConfig c;
  if (!o.config_file.empty()) {
    c = dgflow::load_config(o.config_file);
    if (!o.preset.empty() && o.preset != c.preset) throw dgflow::ConfigError("--preset conflicts with the config file");
  } else if (!o.preset.empty()) {
    c = dgflow::preset(o.preset);
  }
  if (o.degree) c.degree = *o.degree;
  if (!o.mesh.empty()) c.mesh = o.mesh;
  if (o.dt) c.dt = *o.dt;
  if (o.t_end) c.t_end = *o.t_end;
  if (!o.integrator.empty()) c.integrator = dgflow::parse_integrator(o.integrator);
  if (!o.out_dir.empty()) {
    c.output.csv = o.out_dir + "/diagnostics.csv";
    c.output.vtk_dir = o.out_dir;
  }
  c.validate();
  return c;
}

void log_line(const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit divergence-free DG solver for 2D incompressible flow"};
  app.require_subcommand(1);
  Overrides run_opts, study_opts;
  CLI::App* run = app.add_subcommand("run", "run one simulation");
  add_common(run, run_opts);
  CLI::App* study = app.add_subcommand("study", "convergence study over [mesh] sizes or [time] dt_list");
  add_common(study, study_opts);
  CLI::App* presets = app.add_subcommand("presets", "list presets, or print one as INI");
  std::string show;
  presets->add_option("name", show, "preset to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (presets->parsed()) {
      if (show.empty())
        for (const auto& name : dgflow::preset_names()) std::cout << name << '\n';
      else
        std::cout << dgflow::serialize_config(dgflow::preset(show));
      return kOk;
    }
    const bool is_run = run->parsed();
    const dgflow::RunConfig config = resolve(is_run ? run_opts : study_opts);
    if ((is_run ? run_opts : study_opts).print_config) {
      std::cout << dgflow::serialize_config(config);
      return kOk;
    }
    if (is_run) {
      const dgflow::RunResult r = dgflow::run_simulation(config, log_line);
      std::printf("steps %ld  t %.6g  kinetic energy %.10e", r.final.step, r.final.t,
                  0.5 * r.series.back().energy);
      if (r.l2_error) std::printf("  L2 error %.6e", *r.l2_error);
      std::printf("\n");
    } else {
      const auto points = dgflow::run_study(config, log_line);
      std::printf("%-10s %8s %14s %6s\n", config.dt_list.empty() ? "cells" : "dt", "steps", "L2 error", "eoc");
      for (const auto& p : points) {
        if (config.dt_list.empty())
          std::printf("%-10d %8ld %14.6e ", p.cells, p.steps, p.error);
        else
          std::printf("%-10.6g %8ld %14.6e ", p.dt, p.steps, p.error);
        if (p.eoc)
          std::printf("%6.2f\n", *p.eoc);
        else
          std::printf("%6s\n", "-");
      }
    }
    return kOk;
  } catch (const dgflow::IOError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kIO;
  } catch (const dgflow::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumerical;
  } catch (const dgflow::Error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfig;
  }
}
