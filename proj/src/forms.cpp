#include "dgflow/forms.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dgflow/error.hpp"
#include "internal/blocks.hpp"

namespace dgflow {

namespace {

const BoundaryCondition kNoFlow{};

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index offset(int e, int nv) { return static_cast<Index>(e) * nv; }

// Physical point on a boundary facet at canonical parameter s.
Vec2 facet_point(const Mesh& mesh, const Facet& f, double s) {
  return (1 - s) * mesh.vertices[f.vertices[0]] + s * mesh.vertices[f.vertices[1]];
}

using CMap = Eigen::Map<const MatrixXd>;
using MMap = Eigen::Map<MatrixXd>;

using detail::for_blocks;

// Facet quantities live in per-(element, local edge) slots: slot (j, comp)
// holds an nq x nt array whose column e belongs to edge j of element e.
// Every slot is owned by exactly one facet side, so facet loops never race.
// Rows are in the element's own edge parameter; the Gauss rule is symmetric,
// so a reversed edge reads canonical point q at row nq-1-q.
struct EdgeSlots {
  std::array<MatrixXd, 6> a;
  EdgeSlots(int nq, int nt) {
    for (auto& m : a) m = MatrixXd::Zero(nq, nt);
  }
  double& operator()(int j, int comp, int row, int e) { return a[2 * j + comp](row, e); }
  double operator()(int j, int comp, int row, int e) const { return a[2 * j + comp](row, e); }
};

int local_row(int q, int nq, bool reversed) { return reversed ? nq - 1 - q : q; }

// Per-element B^{-1} and det laid out for column-wise access.
struct Geometry {
  Eigen::Matrix<double, 4, Eigen::Dynamic> binv;  // (00, 01, 10, 11)
  VectorXd det;
  explicit Geometry(const Space& sp) : binv(4, sp.num_elements()), det(sp.num_elements()) {
    for (int e = 0; e < sp.num_elements(); ++e) {
      const AffineMap& m = sp.map(e);
      binv.col(e) << m.inverse(0, 0), m.inverse(0, 1), m.inverse(1, 0), m.inverse(1, 1);
      det[e] = m.det;
    }
  }
};

}  // namespace

const BoundaryCondition& ProblemData::bc(const std::string& label) const {
  auto it = bcs.find(label);
  return it == bcs.end() ? kNoFlow : it->second;
}

bool ProblemData::has_outflow() const {
  for (const auto& [label, c] : bcs)
    if (c.kind == BCKind::Outflow) return true;
  return false;
}

void ProblemData::validate() const {
  if (!(nu >= 0) || !std::isfinite(nu)) throw ConfigError("viscosity must be finite and >= 0");
  if (!(alpha > 0)) throw ConfigError("penalty constant must be positive");
  for (const auto& [label, c] : bcs) {
    if (c.kind == BCKind::Inflow && !c.datum)
      throw ConfigError("inflow boundary '" + label + "' has no datum");
    if (c.kind == BCKind::WallNoSlip && nu == 0)
      throw ConfigError("no-slip boundary '" + label + "' requires nu > 0");
  }
}

VectorXd BlockDiagonal::apply(const VectorXd& x) const {
  VectorXd y(x.size());
  Index pos = 0;
  for (const MatrixXd& b : blocks) {
    y.segment(pos, b.rows()) = b * x.segment(pos, b.cols());
    pos += b.rows();
  }
  return y;
}

BlockDiagonal assemble_mass(const Space& sp) {
  const VolumeTable& tab = sp.volume(2 * sp.degree());
  const int nb = sp.scalar_size();
  const VectorXd w = Eigen::Map<const VectorXd>(tab.rule.weights.data(), tab.rule.size());
  const MatrixXd ref = tab.phi.transpose() * w.asDiagonal() * tab.phi;
  BlockDiagonal M;
  M.blocks.reserve(sp.num_elements());
  for (int e = 0; e < sp.num_elements(); ++e) {
    MatrixXd b = MatrixXd::Zero(2 * nb, 2 * nb);
    b.topLeftCorner(nb, nb) = sp.map(e).det * ref;
    b.bottomRightCorner(nb, nb) = sp.map(e).det * ref;
    M.blocks.push_back(std::move(b));
  }
  return M;
}

VectorXd apply_mass(const Space& sp, const VectorXd& x) {
  const int nv = sp.element_dofs();
  VectorXd y(x.size());
  for (int e = 0; e < sp.num_elements(); ++e)
    y.segment(offset(e, nv), nv) = sp.map(e).det * x.segment(offset(e, nv), nv);
  return y;
}

VectorXd apply_convection(const StateVector& u, const ProblemData& data, double t, Exec exec) {
  const Space& sp = *u.space;
  const int k = sp.degree(), nb = sp.scalar_size(), nv = sp.element_dofs();
  const int nt = sp.num_elements(), nf = sp.num_facets();
  const int qd = convection_quad_degree(k);
  const VolumeTable& vol = sp.volume(qd);
  const VectorXd wref = Eigen::Map<const VectorXd>(vol.rule.weights.data(), vol.rule.size());
  const std::array<const TraceTable*, 3> tab{&sp.trace(qd, 0, false), &sp.trace(qd, 1, false),
                                             &sp.trace(qd, 2, false)};
  const int nqf = static_cast<int>(tab[0]->s.size());
  const FacetTopology& topo = sp.topology();
  const Geometry geo(sp);
  const CMap C(u.coeffs.data(), nv, nt);

  VectorXd r(sp.num_dofs());
  MMap R(r.data(), nv, nt);
  EdgeSlots tv(nqf, nt), flux(nqf, nt);

  for_blocks(nt, exec, [&](int b, int m) {
    const MatrixXd U0 = vol.phi * C.block(0, b, nb, m), U1 = vol.phi * C.block(nb, b, nb, m);
    MatrixXd A0(U0.rows(), m), A1(U0.rows(), m);
    for (int i = 0; i < m; ++i) {
      const auto g = geo.binv.col(b + i);
      const double d = geo.det[b + i];
      // (B^{-1} u) at the points, paired with reference derivatives
      A0.col(i) = d * wref.cwiseProduct(g[0] * U0.col(i) + g[1] * U1.col(i));
      A1.col(i) = d * wref.cwiseProduct(g[2] * U0.col(i) + g[3] * U1.col(i));
    }
    for (int c = 0; c < 2; ++c) {
      const MatrixXd& Uc = c == 0 ? U0 : U1;
      R.block(c * nb, b, nb, m).noalias() =
          -(vol.dphi_x.transpose() * A0.cwiseProduct(Uc) + vol.dphi_y.transpose() * A1.cwiseProduct(Uc));
      for (int j = 0; j < 3; ++j) tv.a[2 * j + c].middleCols(b, m).noalias() = tab[j]->phi * C.block(c * nb, b, nb, m);
    }
  });

#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int fi = 0; fi < nf; ++fi) {
    const Facet& f = topo.facets[fi];
    const int eL = f.left, jL = f.left_edge;
    if (!f.is_boundary()) {
      const int eR = f.right, jR = f.right_edge;
      for (int q = 0; q < nqf; ++q) {
        const int ql = local_row(q, nqf, f.left_reversed), qr = local_row(q, nqf, f.right_reversed);
        const Vec2 uL(tv(jL, 0, ql, eL), tv(jL, 1, ql, eL)), uR(tv(jR, 0, qr, eR), tv(jR, 1, qr, eR));
        const double un = 0.5 * (uL + uR).dot(f.normal);
        const Vec2 up = (un >= 0 ? uL : uR) * (un * tab[0]->weights[q] * f.length);
        for (int c = 0; c < 2; ++c) {
          flux(jL, c, ql, eL) = up[c];
          flux(jR, c, qr, eR) = -up[c];
        }
      }
    } else {
      const BoundaryCondition& bc = data.bc(f.label);
      for (int q = 0; q < nqf; ++q) {
        const int ql = local_row(q, nqf, f.left_reversed);
        Vec2 up(tv(jL, 0, ql, eL), tv(jL, 1, ql, eL));
        if (bc.kind == BCKind::Inflow) up = bc.datum(facet_point(sp.mesh(), f, tab[0]->s[q]), t);
        up *= up.dot(f.normal) * tab[0]->weights[q] * f.length;
        for (int c = 0; c < 2; ++c) flux(jL, c, ql, eL) = up[c];
      }
    }
  }

  for_blocks(nt, exec, [&](int b, int m) {
    for (int c = 0; c < 2; ++c)
      for (int j = 0; j < 3; ++j)
        R.block(c * nb, b, nb, m).noalias() += tab[j]->phi.transpose() * flux.a[2 * j + c].middleCols(b, m);
  });
  return r;
}

VectorXd apply_viscous(const StateVector& u, const ProblemData& data, double t, Exec exec) {
  const Space& sp = *u.space;
  VectorXd r = VectorXd::Zero(sp.num_dofs());
  if (data.nu == 0) return r;
  const int k = sp.degree(), nb = sp.scalar_size(), nv = sp.element_dofs();
  const int nt = sp.num_elements(), nf = sp.num_facets();
  const int qd = viscous_quad_degree(k);
  const double nu = data.nu;
  const VolumeTable& vol = sp.volume(qd);
  const VectorXd wref = Eigen::Map<const VectorXd>(vol.rule.weights.data(), vol.rule.size());
  const std::array<const TraceTable*, 3> tab{&sp.trace(qd, 0, false), &sp.trace(qd, 1, false),
                                             &sp.trace(qd, 2, false)};
  const int nqf = static_cast<int>(tab[0]->s.size());
  const FacetTopology& topo = sp.topology();
  const Geometry geo(sp);
  const CMap C(u.coeffs.data(), nv, nt);
  MMap R(r.data(), nv, nt);
  // traces of values and reference gradients; test-side value and gradient loads
  EdgeSlots tv(nqf, nt), tx(nqf, nt), ty(nqf, nt), fv(nqf, nt), fx(nqf, nt), fy(nqf, nt);

  for_blocks(nt, exec, [&](int b, int m) {
    for (int c = 0; c < 2; ++c) {
      const auto Cc = C.block(c * nb, b, nb, m);
      const MatrixXd G0 = vol.dphi_x * Cc, G1 = vol.dphi_y * Cc;
      MatrixXd H0(G0.rows(), m), H1(G0.rows(), m);
      for (int i = 0; i < m; ++i) {
        const auto g = geo.binv.col(b + i);
        // nu det(B) B^{-1} B^{-T}: reference-gradient metric
        const double s = nu * geo.det[b + i];
        const double m00 = s * (g[0] * g[0] + g[1] * g[1]), m01 = s * (g[0] * g[2] + g[1] * g[3]),
                     m11 = s * (g[2] * g[2] + g[3] * g[3]);
        H0.col(i) = wref.cwiseProduct(m00 * G0.col(i) + m01 * G1.col(i));
        H1.col(i) = wref.cwiseProduct(m01 * G0.col(i) + m11 * G1.col(i));
      }
      R.block(c * nb, b, nb, m).noalias() = vol.dphi_x.transpose() * H0 + vol.dphi_y.transpose() * H1;
      for (int j = 0; j < 3; ++j) {
        tv.a[2 * j + c].middleCols(b, m).noalias() = tab[j]->phi * Cc;
        tx.a[2 * j + c].middleCols(b, m).noalias() = tab[j]->dphi_x * Cc;
        ty.a[2 * j + c].middleCols(b, m).noalias() = tab[j]->dphi_y * Cc;
      }
    }
  });

  // grad(phi) . n on a side is dphi_x m_x + dphi_y m_y with m = B^{-1} n
  auto metric = [&](int e, const Vec2& n) {
    const auto g = geo.binv.col(e);
    return Vec2(g[0] * n.x() + g[1] * n.y(), g[2] * n.x() + g[3] * n.y());
  };

#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int fi = 0; fi < nf; ++fi) {
    const Facet& f = topo.facets[fi];
    const BoundaryCondition* bc = nullptr;
    if (f.is_boundary()) {
      bc = &data.bc(f.label);
      if (bc->kind != BCKind::WallNoSlip && bc->kind != BCKind::Inflow) continue;
    }
    const int eL = f.left, jL = f.left_edge;
    const double sigma = sip_penalty(data.penalty, data.alpha, k, f.length, 0.5 * geo.det[eL],
                                     0.5 * geo.det[f.is_boundary() ? eL : f.right]);
    const Vec2 mL = metric(eL, f.normal);
    if (!f.is_boundary()) {
      const int eR = f.right, jR = f.right_edge;
      const Vec2 mR = metric(eR, f.normal);
      for (int q = 0; q < nqf; ++q) {
        const int ql = local_row(q, nqf, f.left_reversed), qr = local_row(q, nqf, f.right_reversed);
        const double w = tab[0]->weights[q] * f.length;
        for (int c = 0; c < 2; ++c) {
          const double J = tv(jL, c, ql, eL) - tv(jR, c, qr, eR);
          const double g = 0.5 * (mL.x() * tx(jL, c, ql, eL) + mL.y() * ty(jL, c, ql, eL) +
                                  mR.x() * tx(jR, c, qr, eR) + mR.y() * ty(jR, c, qr, eR));
          const double val = w * nu * (sigma * J - g), cons = -0.5 * w * nu * J;
          fv(jL, c, ql, eL) = val;
          fv(jR, c, qr, eR) = -val;
          fx(jL, c, ql, eL) = cons * mL.x();
          fy(jL, c, ql, eL) = cons * mL.y();
          fx(jR, c, qr, eR) = cons * mR.x();
          fy(jR, c, qr, eR) = cons * mR.y();
        }
      }
    } else {
      for (int q = 0; q < nqf; ++q) {
        const int ql = local_row(q, nqf, f.left_reversed);
        const double w = tab[0]->weights[q] * f.length;
        const Vec2 gD =
            bc->kind == BCKind::Inflow ? bc->datum(facet_point(sp.mesh(), f, tab[0]->s[q]), t) : Vec2(0, 0);
        for (int c = 0; c < 2; ++c) {
          const double J = tv(jL, c, ql, eL) - gD[c];
          const double g = mL.x() * tx(jL, c, ql, eL) + mL.y() * ty(jL, c, ql, eL);
          const double cons = -w * nu * J;
          fv(jL, c, ql, eL) = w * nu * (sigma * J - g);
          fx(jL, c, ql, eL) = cons * mL.x();
          fy(jL, c, ql, eL) = cons * mL.y();
        }
      }
    }
  }

  for_blocks(nt, exec, [&](int b, int m) {
    for (int c = 0; c < 2; ++c)
      for (int j = 0; j < 3; ++j) {
        const int s = 2 * j + c;
        R.block(c * nb, b, nb, m).noalias() += tab[j]->phi.transpose() * fv.a[s].middleCols(b, m) +
                                               tab[j]->dphi_x.transpose() * fx.a[s].middleCols(b, m) +
                                               tab[j]->dphi_y.transpose() * fy.a[s].middleCols(b, m);
      }
  });
  return r;
}

VectorXd apply_source(const Space& sp, const ProblemData& data, double t, Exec exec) {
  VectorXd r = VectorXd::Zero(sp.num_dofs());
  if (!data.source) return r;
  const int nb = sp.scalar_size(), nv = sp.element_dofs();
  const VolumeTable& vol = sp.volume(source_quad_degree(sp.degree()));
  const int nq = static_cast<int>(vol.rule.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int e = 0; e < sp.num_elements(); ++e) {
    const AffineMap& map = sp.map(e);
    Eigen::MatrixX2d fq(nq, 2);
    for (int q = 0; q < nq; ++q)
      fq.row(q) = map.det * vol.rule.weights[q] * data.source(map(vol.rule.points[q]), t).transpose();
    r.segment(offset(e, nv), nb) = vol.phi.transpose() * fq.col(0);
    r.segment(offset(e, nv) + nb, nb) = vol.phi.transpose() * fq.col(1);
  }
  return r;
}

VectorXd spatial_residual(const StateVector& u, const ProblemData& data, double t, Exec exec) {
  VectorXd r = apply_source(*u.space, data, t, exec);
  r -= apply_convection(u, data, t, exec);
  r -= apply_viscous(u, data, t, exec);
  if (!r.allFinite()) throw NumericalError("spatial_residual: non-finite residual");
  return r;
}

VectorXd assemble_rhs(const StateVector& u_n, double dt, const ProblemData& data, double t, Exec exec) {
  return apply_mass(*u_n.space, u_n.coeffs) + dt * spatial_residual(u_n, data, t, exec);
}

MatrixXd element_divergence(const Space& sp, int e) {
  const int k = sp.degree(), nb = sp.scalar_size(), nz = dim_p(k - 1);
  const VolumeTable& vol = sp.volume(2 * k - 1);
  const VectorXd w = Eigen::Map<const VectorXd>(vol.rule.weights.data(), vol.rule.size());
  const AffineMap& map = sp.map(e);
  const MatrixXd Z = vol.phi.leftCols(nz);
  const MatrixXd G0 = Z.transpose() * w.asDiagonal() * vol.dphi_x;
  const MatrixXd G1 = Z.transpose() * w.asDiagonal() * vol.dphi_y;
  MatrixXd D(nz, 2 * nb);
  // d/dx_d = sum_c Binv(c, d) d/dxhat_c
  for (int d = 0; d < 2; ++d)
    D.middleCols(d * nb, nb) = map.det * (map.inverse(0, d) * G0 + map.inverse(1, d) * G1);
  return D;
}

MatrixXd element_trace_coupling(const Space& sp, int e) {
  const int k = sp.degree(), nb = sp.scalar_size();
  const FacetTopology& topo = sp.topology();
  const Mesh& mesh = sp.mesh();
  MatrixXd C = MatrixXd::Zero(2 * nb, 3 * (k + 1));
  for (int j = 0; j < 3; ++j) {
    const TraceTable& tab = sp.trace(2 * k, j, topo.reversed(e, j));
    const auto ev = local_edge_vertices(mesh, e, j);
    const Vec2 tvec = mesh.vertices[ev[1]] - mesh.vertices[ev[0]];
    const double len = tvec.norm();
    const Vec2 n(tvec.y() / len, -tvec.x() / len);
    for (std::size_t q = 0; q < tab.s.size(); ++q)
      for (int m = 0; m <= k; ++m) {
        const double w = tab.weights[q] * len * legendre01(m, tab.s[q]);
        C.col(j * (k + 1) + m).head(nb) += w * n.x() * tab.phi.row(q).transpose();
        C.col(j * (k + 1) + m).tail(nb) += w * n.y() * tab.phi.row(q).transpose();
      }
  }
  return C;
}

AssembledBlocks assemble_couplings(const Space& sp) {
  const int k = sp.degree(), nv = sp.element_dofs(), nz = dim_p(k - 1), nt = sp.num_elements();
  const FacetTopology& topo = sp.topology();
  AssembledBlocks out;
  out.M = assemble_mass(sp);
  std::vector<Eigen::Triplet<double>> d, tr;
  for (int e = 0; e < nt; ++e) {
    const MatrixXd De = element_divergence(sp, e);
    for (int a = 0; a < nz; ++a)
      for (int b = 0; b < nv; ++b)
        if (De(a, b) != 0) d.emplace_back(e * nz + a, e * nv + b, De(a, b));
    const MatrixXd Ce = element_trace_coupling(sp, e);
    for (int j = 0; j < 3; ++j) {
      const int f = topo.element_facets[e][j];
      for (int m = 0; m <= k; ++m)
        for (int b = 0; b < nv; ++b) {
          const double v = Ce(b, j * (k + 1) + m);
          if (v != 0) tr.emplace_back(e * nv + b, f * (k + 1) + m, v);
        }
    }
  }
  out.D.resize(nt * nz, sp.num_dofs());
  out.D.setFromTriplets(d.begin(), d.end());
  out.T.resize(sp.num_dofs(), sp.num_facets() * (k + 1));
  out.T.setFromTriplets(tr.begin(), tr.end());
  return out;
}

VectorXd constraint_load(const Space& sp, const ProblemData& data, double t) {
  const int k = sp.degree();
  VectorXd G = VectorXd::Zero(sp.num_facets() * (k + 1));
  const QuadRule seg = quadrature_rule(Domain::Segment, 3 * k + 2);
  for (int fi = 0; fi < sp.num_facets(); ++fi) {
    const Facet& f = sp.topology().facets[fi];
    if (!f.is_boundary()) continue;
    const BoundaryCondition& bc = data.bc(f.label);
    if (bc.kind != BCKind::Inflow) continue;
    for (std::size_t q = 0; q < seg.size(); ++q) {
      const double s = seg.points[q].x();
      const double gn = bc.datum(facet_point(sp.mesh(), f, s), t).dot(f.normal);
      for (int m = 0; m <= k; ++m) G[fi * (k + 1) + m] += seg.weights[q] * f.length * legendre01(m, s) * gn;
    }
  }
  return G;
}

}  // namespace dgflow
