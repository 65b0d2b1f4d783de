#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dgflow/space.hpp"
#include "dgflow/types.hpp"

namespace dgflow {

enum class BCKind { NoFlow, WallNoSlip, Inflow, Outflow };

/// Length scale of the interior penalty.
///   TraceInverse: alpha (k+1)(k+2)/2 |F| / min|K|, coercive under distortion
///   FacetLength:  alpha k^2 / |F|, softer; may lose coercivity for small alpha
enum class PenaltyScale { TraceInverse, FacetLength };

struct BoundaryCondition {
  BCKind kind = BCKind::NoFlow;
  /// Boundary velocity for Inflow (normal part enforced, full vector used as
  /// the upwind state and as the viscous Dirichlet value).
  VectorField datum;
};

struct ProblemData {
  double nu = 0.0;
  double alpha = 2.0;  // SIP penalty constant
  PenaltyScale penalty = PenaltyScale::TraceInverse;
  VectorField source;  // empty means f = 0
  /// Conditions per boundary label; unlisted labels are no-flow (free slip).
  std::map<std::string, BoundaryCondition> bcs;

  const BoundaryCondition& bc(const std::string& label) const;
  bool has_outflow() const;
  void validate() const;
};

// Quadrature degrees. The convective integrands are of degree 3k-1 (volume)
// and 3k (facets), viscous ones at most 2k.
inline int convection_quad_degree(int k) { return 3 * k; }
inline int viscous_quad_degree(int k) { return 2 * k; }
inline int source_quad_degree(int k) { return std::max(3 * k, 2 * k + 2); }

/// Interior penalty on a facet of length `length` between elements of areas
/// area_l and area_r (equal for boundary facets). The trace inverse bound on
/// triangles, ||v||_F^2 <= (k+1)(k+2)/2 |F|/|K| ||v||_K^2, keeps the form
/// coercive under element distortion; alpha = 2 is checked for k <= 4.
inline double sip_penalty(PenaltyScale scale, double alpha, int k, double length, double area_l, double area_r) {
  if (scale == PenaltyScale::FacetLength) return alpha * k * k / length;
  return alpha * 0.5 * (k + 1) * (k + 2) * length / std::min(area_l, area_r);
}

struct BlockDiagonal {
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/// DG mass matrix by quadrature (one block per element).
BlockDiagonal assemble_mass(const Space& space);
/// Mass matrix action using the orthonormal structure (M_e = det B_e I).
Eigen::VectorXd apply_mass(const Space& space, const Eigen::VectorXd& x);

/// r . v = C_h(u; u, v) with upwind facet flux.
Eigen::VectorXd apply_convection(const StateVector& u, const ProblemData& data, double t,
                                 Exec exec = Exec::Parallel);
/// r . v = B_h(u, v), the symmetric interior penalty form (affine in u when an
/// inflow boundary carries a nonzero Dirichlet value).
Eigen::VectorXd apply_viscous(const StateVector& u, const ProblemData& data, double t,
                              Exec exec = Exec::Parallel);
/// r . v = (f(t), v)
Eigen::VectorXd apply_source(const Space& space, const ProblemData& data, double t,
                             Exec exec = Exec::Parallel);
/// L(u) . v = (f, v) - C_h(u; u, v) - B_h(u, v)
Eigen::VectorXd spatial_residual(const StateVector& u, const ProblemData& data, double t,
                                 Exec exec = Exec::Parallel);
/// F . v = (u_n, v) + dt L(u_n) . v, the explicit Euler right-hand side.
Eigen::VectorXd assemble_rhs(const StateVector& u_n, double dt, const ProblemData& data, double t,
                             Exec exec = Exec::Parallel);

/// (z, div v) on one element: rows dim P^{k-1}, columns the element's DG dofs.
Eigen::MatrixXd element_divergence(const Space& space, int element);
/// int_{dT} mu (v.n_T) on one element: rows DG dofs, columns the multiplier
/// modes of the three local edges (edge-major), evaluated in the canonical
/// facet parameter so columns map 1:1 to global M(k) dofs.
Eigen::MatrixXd element_trace_coupling(const Space& space, int element);

struct AssembledBlocks {
  BlockDiagonal M;
  Eigen::SparseMatrix<double> D;  // Q(k-1) x Vdg
  Eigen::SparseMatrix<double> T;  // Vdg x M(k)
};

AssembledBlocks assemble_couplings(const Space& space);

/// Right-hand side of the normal-trace constraint: int_F mu (g.n) on inflow
/// facets, zero elsewhere.
Eigen::VectorXd constraint_load(const Space& space, const ProblemData& data, double t);

namespace reference {

// Straightforward serial versions that evaluate bases on the fly and scatter
// facet terms directly into both neighbours. Kept for testing the kernels.
Eigen::VectorXd apply_convection(const StateVector& u, const ProblemData& data, double t);
Eigen::VectorXd apply_viscous(const StateVector& u, const ProblemData& data, double t);

}  // namespace reference

}  // namespace dgflow
