#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "dgflow/basis.hpp"
#include "dgflow/mesh.hpp"
#include "dgflow/quadrature.hpp"

namespace dgflow {

/// Reference basis tabulated at the points of a triangle rule.
struct VolumeTable {
  QuadRule rule;
  Eigen::MatrixXd phi;     // points x functions
  Eigen::MatrixXd dphi_x;  // reference derivatives
  Eigen::MatrixXd dphi_y;
};

/// Reference basis tabulated on a local edge at Gauss points ordered by the
/// canonical facet parameter, so both sides of a facet see the same physical
/// point at the same row.
struct TraceTable {
  std::vector<double> s;
  std::vector<double> weights;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd dphi_x;
  Eigen::MatrixXd dphi_y;
};

/// Mesh, facet topology, element geometry and tabulated reference bases for
/// the vector DG space [P^k]^2 (layout per element: [comp0 | comp1], each
/// dim_p(k) orthonormal reference functions). Immutable after construction
/// apart from the internal table cache.
class Space {
 public:
  Space(Mesh mesh, int degree);

  const Mesh& mesh() const { return mesh_; }
  const FacetTopology& topology() const { return topo_; }
  int degree() const { return degree_; }
  int num_elements() const { return mesh_.num_elements(); }
  int num_facets() const { return topo_.num_facets(); }
  /// dim P^k
  int scalar_size() const { return basis_.size(); }
  int element_dofs() const { return 2 * basis_.size(); }
  int num_dofs() const { return num_elements() * element_dofs(); }

  const ScalarBasis& basis() const { return basis_; }
  const AffineMap& map(int element) const { return maps_[element]; }
  double diameter(int element) const { return diameters_[element]; }
  double min_diameter() const { return min_diameter_; }
  double max_diameter() const { return max_diameter_; }
  double domain_area() const { return area_; }

  /// Tables for rules of the given exactness degree, cached.
  const VolumeTable& volume(int quad_degree) const;
  const TraceTable& trace(int quad_degree, int edge, bool reversed) const;

  /// Velocity and its physical gradient (row i = grad u_i) of a coefficient
  /// vector on an element at a reference point.
  Vec2 value(const Eigen::VectorXd& coeffs, int element, const Vec2& ref) const;
  Mat2 gradient(const Eigen::VectorXd& coeffs, int element, const Vec2& ref) const;

 private:
  Mesh mesh_;
  FacetTopology topo_;
  int degree_;
  ScalarBasis basis_;
  std::vector<AffineMap> maps_;
  std::vector<double> diameters_;
  double min_diameter_ = 0, max_diameter_ = 0, area_ = 0;

  mutable std::mutex cache_mutex_;
  mutable std::map<int, std::unique_ptr<VolumeTable>> volume_cache_;
  mutable std::map<std::array<int, 3>, std::unique_ptr<TraceTable>> trace_cache_;
};

/// Velocity field as DG coefficients; after any hybrid solve it is a member
/// of the exactly divergence-free, normal-continuous subspace.
struct StateVector {
  std::shared_ptr<const Space> space;
  Eigen::VectorXd coeffs;
  double time = 0.0;

  static StateVector zero(std::shared_ptr<const Space> space, double time = 0.0) {
    StateVector u{space, Eigen::VectorXd::Zero(space->num_dofs()), time};
    return u;
  }
};

enum class SpaceKind { Vdg, BDM, Q, M };

/// Global numbering. For element-based spaces `cell_dofs[e]` lists the
/// element's dofs; for M(k) it lists the multiplier dofs of the element's
/// three edges (edge-major, mode-minor). `cell_signs` relates the element's
/// local edge orientation/normal to the global dof (all +1 for Vdg and Q).
struct DofMap {
  SpaceKind kind = SpaceKind::Vdg;
  int degree = 0;
  int num_dofs = 0;
  std::vector<std::vector<int>> cell_dofs;
  std::vector<std::vector<double>> cell_signs;
};

/// Vdg(k): 2 dim P^k per element. Q(m): dim P^m per element (mean-zero
/// constraint handled by the solvers). M(k): k+1 per facet. BDM(k): k+1 per
/// facet plus k^2-1 interior per element; boundary facet dofs are included.
DofMap build_dofmap(SpaceKind kind, int degree, const Mesh& mesh, const FacetTopology& topo);

/// Elementwise L2 projection onto [P^k]^2.
StateVector project_dg(const VectorField& f, std::shared_ptr<const Space> space, double t = 0.0);

}  // namespace dgflow
