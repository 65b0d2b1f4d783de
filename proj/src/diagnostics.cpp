#include "dgflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "dgflow/forms.hpp"

namespace dgflow {

using Eigen::Index;
using Eigen::VectorXd;

namespace {

VectorXd weights_of(const QuadRule& rule) {
  return Eigen::Map<const VectorXd>(rule.weights.data(), static_cast<Index>(rule.size()));
}

}  // namespace

double energy(const StateVector& u) {
  const Space& sp = *u.space;
  double s = 0;
  for (int e = 0; e < sp.num_elements(); ++e)
    s += sp.map(e).det * u.coeffs.segment(static_cast<Index>(e) * sp.element_dofs(), sp.element_dofs()).squaredNorm();
  return s;
}

double enstrophy(const StateVector& u) {
  const Space& sp = *u.space;
  const VolumeTable& tab = sp.volume(2 * sp.degree());
  const VectorXd w = weights_of(tab.rule);
  const int nb = sp.scalar_size(), nv = sp.element_dofs();
  double s = 0;
#pragma omp parallel for schedule(static) reduction(+ : s)
  for (int e = 0; e < sp.num_elements(); ++e) {
    const Mat2& Bi = sp.map(e).inverse;
    const auto c = u.coeffs.segment(static_cast<Index>(e) * nv, nv);
    // d/dx = Bi(0,0) d0 + Bi(1,0) d1, d/dy = Bi(0,1) d0 + Bi(1,1) d1
    const VectorXd v0 = tab.dphi_x * c.tail(nb), v1 = tab.dphi_y * c.tail(nb);
    const VectorXd u0 = tab.dphi_x * c.head(nb), u1 = tab.dphi_y * c.head(nb);
    const VectorXd curl = (Bi(0, 0) * v0 + Bi(1, 0) * v1) - (Bi(0, 1) * u0 + Bi(1, 1) * u1);
    s += sp.map(e).det * w.dot(curl.cwiseAbs2());
  }
  return s;
}

VectorXd cell_vorticity(const StateVector& u) {
  const Space& sp = *u.space;
  const VolumeTable& tab = sp.volume(sp.degree());
  const VectorXd w = weights_of(tab.rule);
  const int nb = sp.scalar_size(), nv = sp.element_dofs();
  VectorXd out(sp.num_elements());
  for (int e = 0; e < sp.num_elements(); ++e) {
    const Mat2& Bi = sp.map(e).inverse;
    const auto c = u.coeffs.segment(static_cast<Index>(e) * nv, nv);
    const VectorXd curl = (Bi(0, 0) * tab.dphi_x + Bi(1, 0) * tab.dphi_y) * c.tail(nb) -
                          (Bi(0, 1) * tab.dphi_x + Bi(1, 1) * tab.dphi_y) * c.head(nb);
    out[e] = 2 * w.dot(curl);
  }
  return out;
}

double l2_error(const StateVector& u, const VectorField& exact, double t) {
  const Space& sp = *u.space;
  const VolumeTable& tab = sp.volume(2 * sp.degree() + 4);
  const int nb = sp.scalar_size(), nv = sp.element_dofs(), nq = static_cast<int>(tab.rule.size());
  double s = 0;
#pragma omp parallel for schedule(static) reduction(+ : s)
  for (int e = 0; e < sp.num_elements(); ++e) {
    const AffineMap& map = sp.map(e);
    const auto c = u.coeffs.segment(static_cast<Index>(e) * nv, nv);
    const VectorXd a = tab.phi * c.head(nb), b = tab.phi * c.tail(nb);
    double local = 0;
    for (int q = 0; q < nq; ++q) {
      const Vec2 ex = exact(map(tab.rule.points[q]), t);
      local += tab.rule.weights[q] * ((a[q] - ex.x()) * (a[q] - ex.x()) + (b[q] - ex.y()) * (b[q] - ex.y()));
    }
    s += map.det * local;
  }
  return std::sqrt(s);
}

DivergenceReport divergence_report(const StateVector& u) {
  const Space& sp = *u.space;
  const int k = sp.degree(), nb = sp.scalar_size(), nv = sp.element_dofs();
  const VolumeTable& tab = sp.volume(2 * k);
  const VectorXd w = weights_of(tab.rule);
  DivergenceReport rep;
  double sum = 0;
  for (int e = 0; e < sp.num_elements(); ++e) {
    const Mat2& Bi = sp.map(e).inverse;
    const auto c = u.coeffs.segment(static_cast<Index>(e) * nv, nv);
    const VectorXd div = (Bi(0, 0) * tab.dphi_x + Bi(1, 0) * tab.dphi_y) * c.head(nb) +
                         (Bi(0, 1) * tab.dphi_x + Bi(1, 1) * tab.dphi_y) * c.tail(nb);
    const double local = sp.map(e).det * w.dot(div.cwiseAbs2());
    sum += local;
    rep.max_element = std::max(rep.max_element, std::sqrt(local));
  }
  rep.l2 = std::sqrt(sum);
  const int qd = 2 * k;
  for (const Facet& f : sp.topology().facets) {
    if (f.is_boundary()) continue;
    const TraceTable& tl = sp.trace(qd, f.left_edge, f.left_reversed);
    const TraceTable& tr = sp.trace(qd, f.right_edge, f.right_reversed);
    const auto cl = u.coeffs.segment(static_cast<Index>(f.left) * nv, nv);
    const auto cr = u.coeffs.segment(static_cast<Index>(f.right) * nv, nv);
    const VectorXd jn = f.normal.x() * (tl.phi * cl.head(nb) - tr.phi * cr.head(nb)) +
                        f.normal.y() * (tl.phi * cl.tail(nb) - tr.phi * cr.tail(nb));
    rep.max_jump = std::max(rep.max_jump, jn.lpNorm<Eigen::Infinity>());
  }
  return rep;
}

double max_velocity(const StateVector& u) {
  const Space& sp = *u.space;
  const VolumeTable& tab = sp.volume(2 * sp.degree());
  const int nb = sp.scalar_size(), nv = sp.element_dofs();
  Eigen::MatrixXd vert(3, nb);
  for (int i = 0; i < 3; ++i) vert.row(i) = sp.basis().values(reference_vertex(i)).transpose();
  double vmax = 0;
  for (int e = 0; e < sp.num_elements(); ++e) {
    const auto c = u.coeffs.segment(static_cast<Index>(e) * nv, nv);
    const VectorXd a = tab.phi * c.head(nb), b = tab.phi * c.tail(nb);
    const VectorXd va = vert * c.head(nb), vb = vert * c.tail(nb);
    vmax = std::max(vmax, std::sqrt((a.cwiseAbs2() + b.cwiseAbs2()).maxCoeff()));
    vmax = std::max(vmax, std::sqrt((va.cwiseAbs2() + vb.cwiseAbs2()).maxCoeff()));
  }
  return vmax;
}

double jump_dissipation(const StateVector& u) {
  const Space& sp = *u.space;
  const int k = sp.degree();
  // evaluated pointwise, bypassing the tabulated traces; the points are those
  // of the upwind flux since |u.n| is only piecewise smooth
  const QuadRule seg = quadrature_rule(Domain::Segment, convection_quad_degree(k));
  double s = 0;
  for (const Facet& f : sp.topology().facets) {
    if (f.is_boundary()) continue;
    for (std::size_t q = 0; q < seg.size(); ++q) {
      const double t = seg.points[q].x();
      const Vec2 rl = reference_edge_point(f.left_edge, f.left_reversed ? 1 - t : t);
      const Vec2 rr = reference_edge_point(f.right_edge, f.right_reversed ? 1 - t : t);
      const Vec2 ul = sp.value(u.coeffs, f.left, rl), ur = sp.value(u.coeffs, f.right, rr);
      const double un = 0.5 * (ul + ur).dot(f.normal);
      s += seg.weights[q] * f.length * std::abs(un) * (ul - ur).squaredNorm();
    }
  }
  return s;
}

}  // namespace dgflow
