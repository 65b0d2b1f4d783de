#pragma once

#include <atomic>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dgflow/forms.hpp"
#include "dgflow/space.hpp"

namespace dgflow {

enum class LinearSolver { Cholesky, ConjugateGradient };

struct HybridOptions {
  LinearSolver linear_solver = LinearSolver::Cholesky;
  /// Facet whose lowest multiplier mode is pinned when the pressure is only
  /// determined up to a constant.
  int pin_facet = 0;
  double cg_tolerance = 1e-12;
};

/// Result of one mass-inverse solve. With F = M u_n + dt L(u_n), w/dt is the
/// elementwise pressure and lambda/dt the facet pressure.
struct StageSolution {
  StateVector u;
  Eigen::VectorXd w;       // Q(k-1) coefficients, zero mean
  Eigen::VectorXd lambda;  // M(k) coefficients, zero on outflow facets
  double dt = 1.0;

  Eigen::VectorXd pressure() const { return w / dt; }
};

/// Hybrid-mixed realization of the mass inverse over the exactly
/// divergence-free, normal-continuous subspace. Velocity and elementwise
/// pressure are eliminated locally; the facet multiplier solves a sparse SPD
/// system that is factored once and never depends on the time step.
class HybridSystem {
 public:
  HybridSystem(std::shared_ptr<const Space> space, ProblemData data, HybridOptions options = {});
  ~HybridSystem();
  HybridSystem(const HybridSystem&) = delete;
  HybridSystem& operator=(const HybridSystem&) = delete;

  /// Solve with the constraint load taken from the inflow data at time t.
  StageSolution solve(const Eigen::VectorXd& F, double t, double dt = 1.0) const;
  /// Solve with an explicit constraint load G over M(k) dofs.
  StageSolution solve_with_load(const Eigen::VectorXd& F, const Eigen::VectorXd& G, double dt = 1.0) const;

  const Space& space() const { return *space_; }
  std::shared_ptr<const Space> space_ptr() const { return space_; }
  const ProblemData& data() const { return data_; }
  /// Condensed matrix over the free multiplier dofs.
  const Eigen::SparseMatrix<double>& condensed() const { return S_; }
  /// Global M(k) dof -> row of the condensed matrix, or -1 (outflow / pinned).
  const std::vector<int>& free_index() const { return free_; }
  int pinned_dof() const { return pinned_; }
  long solve_count() const { return solves_.load(); }

 private:
  struct Local;
  struct Factor;

  std::shared_ptr<const Space> space_;
  ProblemData data_;
  HybridOptions options_;
  std::unique_ptr<Local> local_;
  std::vector<int> free_;
  int pinned_ = -1;
  Eigen::SparseMatrix<double> S_;
  std::unique_ptr<Factor> factor_;
  mutable std::atomic<long> solves_{0};
};

/// F(v) = (u0, v) followed by a solve: L2 projection onto the
/// divergence-free subspace.
StateVector project_initial(const VectorField& u0, const HybridSystem& sys, double t = 0.0);

struct MixedSolution {
  StateVector u;
  Eigen::VectorXd w;
};

/// Uncondensed BDM x Q(k-1) saddle-point solve (sparse LU). Test oracle.
MixedSolution solve_mixed(std::shared_ptr<const Space> space, const ProblemData& data,
                          const Eigen::VectorXd& F, const Eigen::VectorXd& G);

/// Dense null-space solve over the DG space with homogeneous normal
/// constraints. Test oracle for meshes of at most 50 elements.
StateVector solve_direct_divfree(std::shared_ptr<const Space> space, const ProblemData& data,
                                 const Eigen::VectorXd& F, int* nullspace_dim = nullptr);

/// Zero-mean shift of elementwise Q(k-1) coefficients.
void remove_mean(const Space& space, Eigen::VectorXd& w);

}  // namespace dgflow
