#include "dgflow/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dgflow/error.hpp"

namespace dgflow {

Space::Space(Mesh mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree), basis_(Domain::Triangle, degree) {
  if (degree < 1 || degree > kMaxBDMDegree)
    throw Error("Space: unsupported degree " + std::to_string(degree));
  topo_ = build_facets(mesh_);
  const int nt = mesh_.num_elements();
  maps_.reserve(nt);
  diameters_.reserve(nt);
  min_diameter_ = std::numeric_limits<double>::max();
  for (int e = 0; e < nt; ++e) {
    maps_.push_back(affine_map(mesh_, e));
    diameters_.push_back(element_diameter(mesh_, e));
    min_diameter_ = std::min(min_diameter_, diameters_.back());
    max_diameter_ = std::max(max_diameter_, diameters_.back());
    area_ += 0.5 * maps_.back().det;
  }
}

const VolumeTable& Space::volume(int quad_degree) const {
  std::lock_guard lock(cache_mutex_);
  auto& slot = volume_cache_[quad_degree];
  if (!slot) {
    auto table = std::make_unique<VolumeTable>();
    table->rule = quadrature_rule(Domain::Triangle, quad_degree);
    const int nq = static_cast<int>(table->rule.size()), nb = basis_.size();
    table->phi.resize(nq, nb);
    table->dphi_x.resize(nq, nb);
    table->dphi_y.resize(nq, nb);
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    for (int q = 0; q < nq; ++q) {
      basis_.evaluate(table->rule.points[q], v, g);
      table->phi.row(q) = v.transpose();
      table->dphi_x.row(q) = g.col(0).transpose();
      table->dphi_y.row(q) = g.col(1).transpose();
    }
    slot = std::move(table);
  }
  return *slot;
}

const TraceTable& Space::trace(int quad_degree, int edge, bool reversed) const {
  std::lock_guard lock(cache_mutex_);
  auto& slot = trace_cache_[{quad_degree, edge, reversed ? 1 : 0}];
  if (!slot) {
    auto table = std::make_unique<TraceTable>();
    const QuadRule rule = quadrature_rule(Domain::Segment, quad_degree);
    const int nq = static_cast<int>(rule.size()), nb = basis_.size();
    table->phi.resize(nq, nb);
    table->dphi_x.resize(nq, nb);
    table->dphi_y.resize(nq, nb);
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    for (int q = 0; q < nq; ++q) {
      const double s = rule.points[q].x();
      table->s.push_back(s);
      table->weights.push_back(rule.weights[q]);
      basis_.evaluate(reference_edge_point(edge, reversed ? 1 - s : s), v, g);
      table->phi.row(q) = v.transpose();
      table->dphi_x.row(q) = g.col(0).transpose();
      table->dphi_y.row(q) = g.col(1).transpose();
    }
    slot = std::move(table);
  }
  return *slot;
}

Vec2 Space::value(const Eigen::VectorXd& coeffs, int element, const Vec2& ref) const {
  const int nb = basis_.size();
  const Eigen::VectorXd phi = basis_.values(ref);
  const auto c = coeffs.segment(static_cast<Eigen::Index>(element) * 2 * nb, 2 * nb);
  return Vec2(phi.dot(c.head(nb)), phi.dot(c.tail(nb)));
}

Mat2 Space::gradient(const Eigen::VectorXd& coeffs, int element, const Vec2& ref) const {
  const int nb = basis_.size();
  const Eigen::MatrixX2d g = basis_.gradients(ref) * maps_[element].inverse;
  const auto c = coeffs.segment(static_cast<Eigen::Index>(element) * 2 * nb, 2 * nb);
  Mat2 out;
  out.row(0) = c.head(nb).transpose() * g;
  out.row(1) = c.tail(nb).transpose() * g;
  return out;
}

DofMap build_dofmap(SpaceKind kind, int degree, const Mesh& mesh, const FacetTopology& topo) {
  DofMap map;
  map.kind = kind;
  map.degree = degree;
  const int nt = mesh.num_elements();
  map.cell_dofs.resize(nt);
  map.cell_signs.resize(nt);

  auto element_block = [&](int per_cell) {
    map.num_dofs = nt * per_cell;
    for (int e = 0; e < nt; ++e)
      for (int i = 0; i < per_cell; ++i) {
        map.cell_dofs[e].push_back(e * per_cell + i);
        map.cell_signs[e].push_back(1.0);
      }
  };
  auto facet_dofs = [&](int e, bool flip_with_normal) {
    for (int j = 0; j < 3; ++j) {
      const int f = topo.element_facets[e][j];
      const bool rev = topo.reversed(e, j);
      const double eps = flip_with_normal && !topo.element_is_left[e][j] ? -1.0 : 1.0;
      for (int m = 0; m <= degree; ++m) {
        map.cell_dofs[e].push_back(f * (degree + 1) + m);
        map.cell_signs[e].push_back(eps * (rev && (m % 2) ? -1.0 : 1.0));
      }
    }
  };

  switch (kind) {
    case SpaceKind::Vdg:
      element_block(2 * dim_p(degree));
      break;
    case SpaceKind::Q:
      element_block(dim_p(degree));
      break;
    case SpaceKind::M:
      map.num_dofs = topo.num_facets() * (degree + 1);
      for (int e = 0; e < nt; ++e) facet_dofs(e, false);
      break;
    case SpaceKind::BDM: {
      if (degree < 1) throw Error("build_dofmap: BDM degree must be >= 1");
      const int n_facet = topo.num_facets() * (degree + 1);
      const int n_int = degree * degree - 1;
      map.num_dofs = n_facet + nt * n_int;
      for (int e = 0; e < nt; ++e) {
        facet_dofs(e, true);
        for (int l = 0; l < n_int; ++l) {
          map.cell_dofs[e].push_back(n_facet + e * n_int + l);
          map.cell_signs[e].push_back(1.0);
        }
      }
      break;
    }
  }
  return map;
}

StateVector project_dg(const VectorField& f, std::shared_ptr<const Space> space, double t) {
  const Space& sp = *space;
  StateVector u = StateVector::zero(space, t);
  const VolumeTable& tab = sp.volume(2 * sp.degree() + 4);
  const int nb = sp.scalar_size(), nq = static_cast<int>(tab.rule.size());
  Eigen::MatrixX2d fq(nq, 2);
  for (int e = 0; e < sp.num_elements(); ++e) {
    const AffineMap& map = sp.map(e);
    for (int q = 0; q < nq; ++q) {
      const Vec2 val = f(map(tab.rule.points[q]), t);
      fq.row(q) = tab.rule.weights[q] * val.transpose();
    }
    // orthonormal reference basis: element mass is det(B) I, so the
    // projection is (det B int f phi) / det B
    auto c = u.coeffs.segment(static_cast<Eigen::Index>(e) * 2 * nb, 2 * nb);
    c.head(nb) = tab.phi.transpose() * fq.col(0);
    c.tail(nb) = tab.phi.transpose() * fq.col(1);
  }
  if (!u.coeffs.allFinite()) throw NumericalError("project_dg: non-finite field values");
  return u;
}

}  // namespace dgflow
