#pragma once

#include "dgflow/space.hpp"
#include "dgflow/types.hpp"

namespace dgflow {

/// ||u||^2 = u^T M u
double energy(const StateVector& u);
/// 1/2 ||u||^2
inline double kinetic_energy(const StateVector& u) { return 0.5 * energy(u); }
/// ||curl_h u||^2 with the elementwise (broken) vorticity.
double enstrophy(const StateVector& u);
/// ||u - exact(t)||_L2 with a quadrature of degree 2k + 4.
double l2_error(const StateVector& u, const VectorField& exact, double t);

struct DivergenceReport {
  double l2 = 0;           // sqrt(sum_T ||div u||_T^2)
  double max_element = 0;  // max_T ||div u||_T
  double max_jump = 0;     // max |[u.n]| at facet quadrature points, interior facets
};
DivergenceReport divergence_report(const StateVector& u);

/// Largest velocity magnitude at element quadrature points and vertices.
double max_velocity(const StateVector& u);

/// sum_F int |u.n| |[u]|^2 over interior facets, |u.n| from the facet average,
/// with the facet rule of the convection form.
double jump_dissipation(const StateVector& u);

/// Elementwise mean vorticity.
Eigen::VectorXd cell_vorticity(const StateVector& u);

}  // namespace dgflow
