// Serial scatter-style evaluation of the convective and viscous forms. Used
// only to cross-check the tabulated kernels.
#include "dgflow/forms.hpp"

namespace dgflow::reference {

namespace {

using Eigen::VectorXd;

struct Side {
  int element;
  Vec2 ref;
};

Side side_point(const Facet& f, bool left, double s) {
  const int edge = left ? f.left_edge : f.right_edge;
  const bool rev = left ? f.left_reversed : f.right_reversed;
  return {left ? f.left : f.right, reference_edge_point(edge, rev ? 1 - s : s)};
}

// Adds w * (value . v + dn . (grad v n)) for the test functions of an element.
void scatter(const Space& sp, VectorXd& r, const Side& side, const Vec2& value, const Vec2& dn,
             const Vec2& n) {
  const int nb = sp.scalar_size();
  VectorXd phi;
  Eigen::MatrixX2d g;
  sp.basis().evaluate(side.ref, phi, g);
  const VectorXd gn = g * (sp.map(side.element).inverse * n);
  for (int i = 0; i < 2; ++i)
    for (int a = 0; a < nb; ++a) r[side.element * 2 * nb + i * nb + a] += value[i] * phi[a] + dn[i] * gn[a];
}

}  // namespace

VectorXd apply_convection(const StateVector& u, const ProblemData& data, double t) {
  const Space& sp = *u.space;
  const int nb = sp.scalar_size(), k = sp.degree();
  VectorXd r = VectorXd::Zero(sp.num_dofs());
  const QuadRule tri = quadrature_rule(Domain::Triangle, 3 * k);
  for (int e = 0; e < sp.num_elements(); ++e) {
    const AffineMap& map = sp.map(e);
    for (std::size_t q = 0; q < tri.size(); ++q) {
      const Vec2 uq = sp.value(u.coeffs, e, tri.points[q]);
      const Eigen::MatrixX2d g = sp.basis().gradients(tri.points[q]) * map.inverse;
      const double w = tri.weights[q] * map.det;
      for (int i = 0; i < 2; ++i)
        for (int a = 0; a < nb; ++a) r[e * 2 * nb + i * nb + a] -= w * uq[i] * uq.dot(g.row(a).transpose());
    }
  }
  const QuadRule seg = quadrature_rule(Domain::Segment, 3 * k);
  for (const Facet& f : sp.topology().facets) {
    for (std::size_t q = 0; q < seg.size(); ++q) {
      const double s = seg.points[q].x(), w = seg.weights[q] * f.length;
      const Side L = side_point(f, true, s);
      const Vec2 uL = sp.value(u.coeffs, L.element, L.ref);
      if (f.is_boundary()) {
        const BoundaryCondition& bc = data.bc(f.label);
        Vec2 up = uL;
        if (bc.kind == BCKind::Inflow) {
          const Vec2 x = sp.map(L.element)(L.ref);
          up = bc.datum(x, t);
        }
        scatter(sp, r, L, w * up.dot(f.normal) * up, Vec2::Zero(), f.normal);
        continue;
      }
      const Side R = side_point(f, false, s);
      const Vec2 uR = sp.value(u.coeffs, R.element, R.ref);
      const double un = 0.5 * (uL + uR).dot(f.normal);
      const Vec2 up = un >= 0 ? uL : uR;
      scatter(sp, r, L, w * un * up, Vec2::Zero(), f.normal);
      scatter(sp, r, R, -w * un * up, Vec2::Zero(), f.normal);
    }
  }
  return r;
}

VectorXd apply_viscous(const StateVector& u, const ProblemData& data, double t) {
  const Space& sp = *u.space;
  const int nb = sp.scalar_size(), k = sp.degree();
  const double nu = data.nu;
  VectorXd r = VectorXd::Zero(sp.num_dofs());
  if (nu == 0) return r;
  const QuadRule tri = quadrature_rule(Domain::Triangle, 2 * k);
  for (int e = 0; e < sp.num_elements(); ++e) {
    const AffineMap& map = sp.map(e);
    for (std::size_t q = 0; q < tri.size(); ++q) {
      const Mat2 gu = sp.gradient(u.coeffs, e, tri.points[q]);
      const Eigen::MatrixX2d g = sp.basis().gradients(tri.points[q]) * map.inverse;
      const double w = tri.weights[q] * map.det;
      for (int i = 0; i < 2; ++i)
        for (int a = 0; a < nb; ++a) r[e * 2 * nb + i * nb + a] += w * nu * gu.row(i).dot(g.row(a));
    }
  }
  const QuadRule seg = quadrature_rule(Domain::Segment, 2 * k);
  for (const Facet& f : sp.topology().facets) {
    const double area_l = element_area(sp.mesh(), f.left);
    const double sigma =
        sip_penalty(data.penalty, data.alpha, k, f.length, area_l, f.is_boundary() ? area_l : element_area(sp.mesh(), f.right));
    const Vec2& n = f.normal;
    for (std::size_t q = 0; q < seg.size(); ++q) {
      const double s = seg.points[q].x(), w = seg.weights[q] * f.length;
      const Side L = side_point(f, true, s);
      const Vec2 uL = sp.value(u.coeffs, L.element, L.ref);
      const Vec2 gL = sp.gradient(u.coeffs, L.element, L.ref) * n;
      if (f.is_boundary()) {
        const BoundaryCondition& bc = data.bc(f.label);
        if (bc.kind != BCKind::WallNoSlip && bc.kind != BCKind::Inflow) continue;
        Vec2 ext = Vec2::Zero();
        if (bc.kind == BCKind::Inflow) ext = bc.datum(sp.map(L.element)(L.ref), t);
        const Vec2 J = uL - ext;
        scatter(sp, r, L, w * nu * (sigma * J - gL), -w * nu * J, n);
        continue;
      }
      const Side R = side_point(f, false, s);
      const Vec2 uR = sp.value(u.coeffs, R.element, R.ref);
      const Vec2 gR = sp.gradient(u.coeffs, R.element, R.ref) * n;
      const Vec2 J = uL - uR, avg = 0.5 * (gL + gR);
      scatter(sp, r, L, w * nu * (sigma * J - avg), -0.5 * w * nu * J, n);
      scatter(sp, r, R, -w * nu * (sigma * J - avg), -0.5 * w * nu * J, n);
    }
  }
  return r;
}

}  // namespace dgflow::reference
