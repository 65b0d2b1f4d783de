#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dgflow/mesh.hpp"
#include "dgflow/quadrature.hpp"
#include "dgflow/types.hpp"

namespace dgflow {

inline constexpr int kMaxScalarDegree = 10;
inline constexpr int kMaxBDMDegree = 6;

inline int dim_p(int degree) { return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2; }

/// Orthonormal polynomial basis of P^r on the reference triangle
/// (Dubiner/Koornwinder, built from Jacobi recurrences in a collapse-free
/// polynomial form) or on the unit segment (scaled Legendre).
///
/// Triangle functions are ordered by total degree, so the first dim_p(m)
/// functions span P^m for every m <= r.
class ScalarBasis {
 public:
  ScalarBasis(Domain domain, int degree);

  Domain domain() const { return domain_; }
  int degree() const { return degree_; }
  int size() const { return size_; }

  /// Values at a reference point (segment: point.x() is the parameter).
  Eigen::VectorXd values(const Vec2& ref) const;
  /// Reference gradients, one row per function (segment: column 0 only).
  Eigen::MatrixX2d gradients(const Vec2& ref) const;
  void evaluate(const Vec2& ref, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const;

 private:
  void evaluate_raw(const Vec2& ref, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const;

  Domain domain_;
  int degree_;
  int size_;
  std::vector<int> p_index_, q_index_;
  Eigen::VectorXd scale_;
};

/// Orthonormal Legendre polynomial L_m on [0,1]: int_0^1 L_m L_n = delta_mn.
double legendre01(int m, double s);

/// Local edge j of the reference triangle runs from vertex (j+1)%3 to (j+2)%3.
Vec2 reference_vertex(int i);
Vec2 reference_edge_point(int edge, double s);
/// Outward unit normal and length of reference edge j.
Vec2 reference_edge_normal(int edge);
double reference_edge_length(int edge);

/// BDM(k) element on the reference triangle, expressed in the reference
/// vector DG basis {phi_a e_c}: coefficient layout [comp0 (dim_p(k)) | comp1].
///
/// Degrees of freedom: edge moments int_E (v.n) L_m ds for each edge and
/// m = 0..k (index edge*(k+1)+m), then k^2-1 interior moments against an
/// orthonormal basis of the fields with vanishing normal trace.
class BDMBasis {
 public:
  explicit BDMBasis(int k);

  int degree() const { return k_; }
  int size() const { return static_cast<int>(coeffs_.cols()); }
  int num_edge_dofs() const { return 3 * (k_ + 1); }
  int num_interior_dofs() const { return size() - num_edge_dofs(); }

  /// Column j: reference DG coefficients of basis function j.
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }
  /// Rows: the functionals applied to the reference DG basis.
  const Eigen::MatrixXd& functionals() const { return functionals_; }
  const ScalarBasis& scalar_basis() const { return scalar_; }

  /// Reference values (one row per basis function) and divergences.
  void evaluate(const Vec2& ref, Eigen::MatrixX2d& values, Eigen::VectorXd& divergence) const;

 private:
  int k_;
  ScalarBasis scalar_;
  Eigen::MatrixXd functionals_;
  Eigen::MatrixXd coeffs_;
};

/// Contravariant Piola push-forward of all BDM functions at a reference point:
/// v = B v_ref / det B, div v = div_ref / det B.
void piola_push(const BDMBasis& basis, const AffineMap& map, const Vec2& ref,
                Eigen::MatrixX2d& values, Eigen::VectorXd& divergence);

/// Physical DG coefficients of the pushed-forward BDM functions on an element
/// (columns), in the DG layout [comp0 | comp1].
Eigen::MatrixXd piola_coefficients(const BDMBasis& basis, const AffineMap& map);

}  // namespace dgflow
