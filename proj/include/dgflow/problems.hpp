#pragma once

#include <string>

#include "dgflow/mesh.hpp"
#include "dgflow/types.hpp"

namespace dgflow {

/// Analytic flow on the periodic square [0, 2pi]^2.
struct Flow {
  std::string name;
  double nu = 0;
  VectorField initial;
  VectorField exact;   // empty when no closed form is known
  VectorField source;  // empty means f = 0
};

/// u = (-cos x sin y, sin x cos y) exp(-2 nu t). Solves both the Euler
/// (nu = 0) and Navier-Stokes equations with f = 0; the pressure
/// -(cos 2x + cos 2y)/4 exp(-4 nu t) absorbs the nonlinearity.
Flow taylor_green(double nu);

/// u = sin(6 pi t) (sin y, sin 2x) with p = 0 and the induced source.
Flow temporal_manufactured(double nu);

/// Double shear layer of thickness rho perturbed by delta sin x.
Flow shear_layer(double rho, double delta);

inline constexpr double kBoxJitter = 0.05;

/// Jittered periodic square [0, 2pi]^2 of near-equilateral triangles with
/// edge length about 2pi/n: n cells per row and the even row count closest
/// to 2n/sqrt(3).
SquareMeshSpec periodic_box(int n, double jitter = kBoxJitter);

/// Cells per row of periodic_box for mesh size (edge length) h.
int cells_for_mesh_size(double h);

/// Looks up a flow by name: taylor_green, temporal, shear_layer.
Flow make_flow(const std::string& name, double nu, double rho, double delta);

}  // namespace dgflow
