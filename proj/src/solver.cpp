#include "dgflow/solver.hpp"

#include <array>
#include <cmath>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "dgflow/error.hpp"
#include "internal/blocks.hpp"

namespace dgflow {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Element operators for the local elimination, applied in batches. With
// M_e = det I and K = D D^T, eliminating the element velocity and pressure
// gives u_e = P r and w_e = -K^{-1} D r for r = F_e - C lambda_e, where
// P = (I - D^T K^{-1} D) / det. D and C are never stored per element:
//   D = det [B(0,d) G0 + B(1,d) G1]_d   (B = inverse Jacobian)
//   C(:, edge j, mode m) = len_j n_j (+-1)^m R_j(:, m)
// with reference blocks G0, G1 and R_j; only K^{-1} is stored per element.
struct HybridSystem::Local {
  int nb = 0, nz = 0, nm = 0;
  MatrixXd G0, G1;                // nz x nb
  std::array<MatrixXd, 3> R;      // nb x nm, edge moments in local orientation
  VectorXd det;                   // nt
  Eigen::Matrix<double, 4, Eigen::Dynamic> binv;
  Eigen::Matrix<double, 6, Eigen::Dynamic> edge;  // len_j n_j, (j, d) at 2 j + d
  Eigen::Matrix<double, 3, Eigen::Dynamic> flip;  // -1 where the edge runs against the facet
  MatrixXd kinv;                  // nz^2 x nt

  // D r for a block of element columns (r is nv x m)
  MatrixXd divergence(const MatrixXd& r, int b) const {
    const int m = static_cast<int>(r.cols());
    MatrixXd x0 = G0 * r.topRows(nb), x1 = G1 * r.topRows(nb);
    MatrixXd y0 = G0 * r.bottomRows(nb), y1 = G1 * r.bottomRows(nb);
    MatrixXd out(nz, m);
    for (int i = 0; i < m; ++i) {
      const auto g = binv.col(b + i);
      out.col(i) = det[b + i] * (g[0] * x0.col(i) + g[2] * x1.col(i) + g[1] * y0.col(i) + g[3] * y1.col(i));
    }
    return out;
  }

  // -K^{-1} y, elementwise
  MatrixXd pressure(const MatrixXd& y, int b) const {
    MatrixXd out(nz, y.cols());
    for (Index i = 0; i < y.cols(); ++i)
      out.col(i).noalias() = -Eigen::Map<const MatrixXd>(kinv.col(b + i).data(), nz, nz) * y.col(i);
    return out;
  }

  // (r + D^T w) / det
  MatrixXd velocity(const MatrixXd& r, const MatrixXd& w, int b) const {
    const int m = static_cast<int>(r.cols());
    MatrixXd s0(nz, m), s1(nz, m), t0(nz, m), t1(nz, m);
    for (int i = 0; i < m; ++i) {
      const auto g = binv.col(b + i);
      s0.col(i) = g[0] * w.col(i);
      s1.col(i) = g[2] * w.col(i);
      t0.col(i) = g[1] * w.col(i);
      t1.col(i) = g[3] * w.col(i);
    }
    MatrixXd out(r.rows(), m);
    out.topRows(nb).noalias() = G0.transpose() * s0 + G1.transpose() * s1;
    out.bottomRows(nb).noalias() = G0.transpose() * t0 + G1.transpose() * t1;
    for (int i = 0; i < m; ++i) out.col(i) = r.col(i) / det[b + i] + out.col(i);
    return out;
  }

  // P r
  MatrixXd project(const MatrixXd& r, int b) const { return velocity(r, pressure(divergence(r, b), b), b); }

  // C^T v (v is nv x m), rows in local (edge, mode) order
  MatrixXd trace_moments(const MatrixXd& v, int b) const {
    const int m = static_cast<int>(v.cols());
    MatrixXd out(3 * nm, m);
    for (int j = 0; j < 3; ++j) {
      const MatrixXd a0 = R[j].transpose() * v.topRows(nb), a1 = R[j].transpose() * v.bottomRows(nb);
      for (int i = 0; i < m; ++i) {
        const double f = flip(j, b + i);
        double sgn = 1;
        for (int q = 0; q < nm; ++q, sgn *= f)
          out(j * nm + q, i) = sgn * (edge(2 * j, b + i) * a0(q, i) + edge(2 * j + 1, b + i) * a1(q, i));
      }
    }
    return out;
  }

  // C l (l is 3 nm x m)
  MatrixXd lift(const MatrixXd& l, int b) const {
    const int m = static_cast<int>(l.cols());
    MatrixXd out = MatrixXd::Zero(2 * nb, m);
    MatrixXd l0(nm, m), l1(nm, m);
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < m; ++i) {
        const double f = flip(j, b + i);
        double sgn = 1;
        for (int q = 0; q < nm; ++q, sgn *= f) {
          l0(q, i) = sgn * edge(2 * j, b + i) * l(j * nm + q, i);
          l1(q, i) = sgn * edge(2 * j + 1, b + i) * l(j * nm + q, i);
        }
      }
      out.topRows(nb).noalias() += R[j] * l0;
      out.bottomRows(nb).noalias() += R[j] * l1;
    }
    return out;
  }
};

struct HybridSystem::Factor {
  Eigen::SimplicialLLT<SpMat> llt;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  bool use_cg = false;

  VectorXd solve(const VectorXd& b) const {
    if (use_cg) {
      VectorXd x = cg.solve(b);
      if (cg.info() != Eigen::Success) throw NumericalError("hybrid solve: CG did not converge");
      return x;
    }
    return llt.solve(b);
  }
};

HybridSystem::HybridSystem(std::shared_ptr<const Space> space, ProblemData data, HybridOptions options)
    : space_(std::move(space)), data_(std::move(data)), options_(options) {
  const Space& sp = *space_;
  data_.validate();
  const int k = sp.degree(), nm = k + 1, nl = 3 * nm, nt = sp.num_elements();
  const FacetTopology& topo = sp.topology();

  const int nb = sp.scalar_size(), nz = dim_p(k - 1);
  local_ = std::make_unique<Local>();
  Local& L = *local_;
  L.nb = nb;
  L.nz = nz;
  L.nm = nm;
  {
    const VolumeTable& vol = sp.volume(2 * k - 1);
    const VectorXd w = Eigen::Map<const VectorXd>(vol.rule.weights.data(), vol.rule.size());
    const MatrixXd Z = vol.phi.leftCols(nz);
    L.G0 = Z.transpose() * w.asDiagonal() * vol.dphi_x;
    L.G1 = Z.transpose() * w.asDiagonal() * vol.dphi_y;
    for (int j = 0; j < 3; ++j) {
      const TraceTable& tab = sp.trace(2 * k, j, false);
      L.R[j] = MatrixXd::Zero(nb, nm);
      for (std::size_t q = 0; q < tab.s.size(); ++q)
        for (int m = 0; m < nm; ++m)
          L.R[j].col(m) += tab.weights[q] * legendre01(m, tab.s[q]) * tab.phi.row(q).transpose();
    }
  }
  L.det.resize(nt);
  L.binv.resize(4, nt);
  L.edge.resize(6, nt);
  L.flip.resize(3, nt);
  L.kinv.resize(static_cast<Index>(nz) * nz, nt);
  std::vector<MatrixXd> blocks(nt);
  bool singular = false;
#pragma omp parallel for schedule(static) reduction(|| : singular)
  for (int e = 0; e < nt; ++e) {
    const AffineMap& map = sp.map(e);
    L.det[e] = map.det;
    L.binv.col(e) << map.inverse(0, 0), map.inverse(0, 1), map.inverse(1, 0), map.inverse(1, 1);
    for (int j = 0; j < 3; ++j) {
      const auto ev = local_edge_vertices(sp.mesh(), e, j);
      const Vec2 tvec = sp.mesh().vertices[ev[1]] - sp.mesh().vertices[ev[0]];
      // outward normal times length
      L.edge(2 * j, e) = tvec.y();
      L.edge(2 * j + 1, e) = -tvec.x();
      L.flip(j, e) = topo.reversed(e, j) ? -1.0 : 1.0;
    }
    const MatrixXd D = element_divergence(sp, e);
    const MatrixXd C = element_trace_coupling(sp, e);
    const Eigen::LLT<MatrixXd> K(D * D.transpose());
    if (K.info() != Eigen::Success) {
      singular = true;
      continue;
    }
    const MatrixXd Kinv = K.solve(MatrixXd::Identity(nz, nz));
    Eigen::Map<MatrixXd>(L.kinv.col(e).data(), nz, nz) = 0.5 * (Kinv + Kinv.transpose());
    const MatrixXd W = -K.solve(D);
    const MatrixXd P = (MatrixXd::Identity(D.cols(), D.cols()) + D.transpose() * W) / map.det;
    const MatrixXd Se = C.transpose() * P * C;
    blocks[e] = 0.5 * (Se + Se.transpose());
  }
  if (singular) throw NumericalError("build_hybrid: singular local block");

  const int ndof = sp.num_facets() * nm;
  free_.assign(ndof, 0);
  for (int f = 0; f < sp.num_facets(); ++f) {
    const Facet& fc = topo.facets[f];
    if (fc.is_boundary() && data_.bc(fc.label).kind == BCKind::Outflow)
      for (int m = 0; m < nm; ++m) free_[f * nm + m] = -1;
  }
  if (!data_.has_outflow()) {
    if (options_.pin_facet < 0 || options_.pin_facet >= sp.num_facets())
      throw Error("build_hybrid: pin facet out of range");
    pinned_ = options_.pin_facet * nm;
    free_[pinned_] = -1;
  }
  int nfree = 0;
  for (int& i : free_) i = i < 0 ? -1 : nfree++;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nt) * nl * nl);
  for (int e = 0; e < nt; ++e)
    for (int a = 0; a < nl; ++a) {
      const int ra = free_[topo.element_facets[e][a / nm] * nm + a % nm];
      if (ra < 0) continue;
      for (int b = 0; b < nl; ++b) {
        const int rb = free_[topo.element_facets[e][b / nm] * nm + b % nm];
        if (rb >= 0) trip.emplace_back(ra, rb, blocks[e](a, b));
      }
    }
  S_.resize(nfree, nfree);
  S_.setFromTriplets(trip.begin(), trip.end());
  S_.makeCompressed();

  factor_ = std::make_unique<Factor>();
  if (options_.linear_solver == LinearSolver::ConjugateGradient) {
    factor_->use_cg = true;
    factor_->cg.setTolerance(options_.cg_tolerance);
    factor_->cg.compute(S_);
  } else {
    factor_->llt.compute(S_);
    if (factor_->llt.info() != Eigen::Success)
      throw NumericalError("build_hybrid: condensed matrix is not positive definite");
  }
}

HybridSystem::~HybridSystem() = default;

StageSolution HybridSystem::solve(const VectorXd& F, double t, double dt) const {
  return solve_with_load(F, constraint_load(*space_, data_, t), dt);
}

StageSolution HybridSystem::solve_with_load(const VectorXd& F, const VectorXd& G, double dt) const {
  const Space& sp = *space_;
  const int k = sp.degree(), nm = k + 1, nl = 3 * nm, nt = sp.num_elements();
  const int nv = sp.element_dofs(), nz = dim_p(k - 1);
  const FacetTopology& topo = sp.topology();
  if (F.size() != sp.num_dofs()) throw Error("hybrid solve: load has wrong size");
  if (G.size() != static_cast<Index>(free_.size())) throw Error("hybrid solve: constraint load has wrong size");
  if (!F.allFinite() || !G.allFinite()) throw NumericalError("hybrid solve: non-finite load");

  // condensed right-hand side: sum_e C_e^T P_e F_e - G
  const Eigen::Map<const MatrixXd> Fm(F.data(), nv, nt);
  MatrixXd contrib(nl, nt);
  detail::for_blocks(nt, Exec::Parallel, [&](int b, int m) {
    contrib.middleCols(b, m) = local_->trace_moments(local_->project(Fm.middleCols(b, m), b), b);
  });
  VectorXd b = VectorXd::Zero(S_.rows());
  for (int e = 0; e < nt; ++e)
    for (int a = 0; a < nl; ++a) {
      const int g = topo.element_facets[e][a / nm] * nm + a % nm;
      if (free_[g] >= 0) b[free_[g]] += contrib(a, e);
    }
  for (std::size_t g = 0; g < free_.size(); ++g)
    if (free_[g] >= 0) b[free_[g]] -= G[g];

  const VectorXd x = factor_->solve(b);
  ++solves_;

  StageSolution out;
  out.dt = dt;
  out.lambda = VectorXd::Zero(free_.size());
  for (std::size_t g = 0; g < free_.size(); ++g)
    if (free_[g] >= 0) out.lambda[g] = x[free_[g]];
  out.u = StateVector::zero(space_);
  out.w.resize(static_cast<Index>(nt) * nz);
  Eigen::Map<MatrixXd> Um(out.u.coeffs.data(), nv, nt), Wm(out.w.data(), nz, nt);
  detail::for_blocks(nt, Exec::Parallel, [&](int b, int m) {
    MatrixXd le(nl, m);
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < nl; ++a) le(a, i) = out.lambda[topo.element_facets[b + i][a / nm] * nm + a % nm];
    const MatrixXd r = Fm.middleCols(b, m) - local_->lift(le, b);
    const MatrixXd w = local_->pressure(local_->divergence(r, b), b);
    Wm.middleCols(b, m) = w;
    Um.middleCols(b, m) = local_->velocity(r, w, b);
  });

  if (pinned_ >= 0) {
    // a constant shift c of lambda moves w_0 by c / sqrt(2) and leaves u alone
    double num = 0, den = 0;
    for (int e = 0; e < nt; ++e) {
      num += local_->det[e] * out.w[static_cast<Index>(e) * nz];
      den += local_->det[e];
    }
    const double c = -std::sqrt(2.0) * num / den;
    for (int e = 0; e < nt; ++e) out.w[static_cast<Index>(e) * nz] += c / std::sqrt(2.0);
    for (int f = 0; f < sp.num_facets(); ++f) out.lambda[f * nm] += c;
  }
  if (!out.u.coeffs.allFinite()) throw NumericalError("hybrid solve: non-finite solution");
  return out;
}

StateVector project_initial(const VectorField& u0, const HybridSystem& sys, double t) {
  const StateVector dg = project_dg(u0, sys.space_ptr(), t);
  StateVector u = sys.solve(apply_mass(sys.space(), dg.coeffs), t).u;
  u.time = t;
  return u;
}

void remove_mean(const Space& sp, VectorXd& w) {
  const int nz = dim_p(sp.degree() - 1);
  double num = 0, den = 0;
  for (int e = 0; e < sp.num_elements(); ++e) {
    num += sp.map(e).det * w[static_cast<Index>(e) * nz];
    den += sp.map(e).det;
  }
  for (int e = 0; e < sp.num_elements(); ++e) w[static_cast<Index>(e) * nz] -= num / den;
}

MixedSolution solve_mixed(std::shared_ptr<const Space> space, const ProblemData& data, const VectorXd& F,
                          const VectorXd& G) {
  const Space& sp = *space;
  const int k = sp.degree(), nm = k + 1, nt = sp.num_elements(), nv = sp.element_dofs(), nz = dim_p(k - 1);
  const FacetTopology& topo = sp.topology();
  const DofMap dm = build_dofmap(SpaceKind::BDM, k, sp.mesh(), topo);
  const BDMBasis bdm(k);

  // global BDM basis expressed in DG coefficients
  std::vector<Eigen::Triplet<double>> et;
  for (int e = 0; e < nt; ++e) {
    const MatrixXd P = piola_coefficients(bdm, sp.map(e));
    for (int i = 0; i < bdm.size(); ++i)
      for (int a = 0; a < nv; ++a)
        et.emplace_back(e * nv + a, dm.cell_dofs[e][i], dm.cell_signs[e][i] * P(a, i));
  }
  SpMat E(sp.num_dofs(), dm.num_dofs);
  E.setFromTriplets(et.begin(), et.end());

  SpMat Mdg(sp.num_dofs(), sp.num_dofs());
  {
    std::vector<Eigen::Triplet<double>> mt;
    for (int e = 0; e < nt; ++e)
      for (int a = 0; a < nv; ++a) mt.emplace_back(e * nv + a, e * nv + a, sp.map(e).det);
    Mdg.setFromTriplets(mt.begin(), mt.end());
  }
  const AssembledBlocks blocks = assemble_couplings(sp);
  const SpMat A = (SpMat(E.transpose()) * Mdg * E).pruned();
  const SpMat B = (blocks.D * E).pruned();
  const VectorXd rhs_u = E.transpose() * F;

  // boundary facet dofs: fixed for no-flow/inflow, free for outflow
  std::vector<int> col(dm.num_dofs, 0);
  VectorXd fixed = VectorXd::Zero(dm.num_dofs);
  for (int f = 0; f < sp.num_facets(); ++f) {
    const Facet& fc = topo.facets[f];
    if (!fc.is_boundary()) continue;
    const BCKind kind = data.bc(fc.label).kind;
    if (kind == BCKind::Outflow) continue;
    for (int m = 0; m < nm; ++m) {
      col[f * nm + m] = -1;
      if (kind == BCKind::Inflow) fixed[f * nm + m] = G[f * nm + m];
    }
  }
  int nu_free = 0;
  for (int& c : col) c = c < 0 ? -1 : nu_free++;
  const bool mean_fix = !data.has_outflow();
  const int nw = nt * nz, n = nu_free + nw + (mean_fix ? 1 : 0);

  std::vector<Eigen::Triplet<double>> kt;
  VectorXd rhs = VectorXd::Zero(n);
  const VectorXd Afixed = A * fixed, Bfixed = B * fixed;
  for (int i = 0; i < dm.num_dofs; ++i)
    if (col[i] >= 0) rhs[col[i]] = rhs_u[i] - Afixed[i];
  rhs.segment(nu_free, nw) = -Bfixed;
  for (int j = 0; j < A.outerSize(); ++j)
    for (SpMat::InnerIterator it(A, j); it; ++it)
      if (col[it.row()] >= 0 && col[it.col()] >= 0) kt.emplace_back(col[it.row()], col[it.col()], it.value());
  for (int j = 0; j < B.outerSize(); ++j)
    for (SpMat::InnerIterator it(B, j); it; ++it) {
      if (col[it.col()] < 0) continue;
      kt.emplace_back(nu_free + it.row(), col[it.col()], it.value());
      kt.emplace_back(col[it.col()], nu_free + it.row(), -it.value());
    }
  if (mean_fix)
    for (int e = 0; e < nt; ++e) {
      const double m = sp.map(e).det / std::sqrt(2.0);
      kt.emplace_back(n - 1, nu_free + e * nz, m);
      kt.emplace_back(nu_free + e * nz, n - 1, m);
    }
  SpMat K(n, n);
  K.setFromTriplets(kt.begin(), kt.end());
  K.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw NumericalError("solve_mixed: singular saddle-point system");
  const VectorXd x = lu.solve(rhs);

  VectorXd ubdm = fixed;
  for (int i = 0; i < dm.num_dofs; ++i)
    if (col[i] >= 0) ubdm[i] = x[col[i]];
  MixedSolution out;
  out.u = StateVector::zero(space);
  out.u.coeffs = E * ubdm;
  out.w = x.segment(nu_free, nw);
  return out;
}

StateVector solve_direct_divfree(std::shared_ptr<const Space> space, const ProblemData& data, const VectorXd& F,
                                 int* nullspace_dim) {
  const Space& sp = *space;
  if (sp.num_elements() > 50) throw Error("solve_direct_divfree: mesh too large (> 50 elements)");
  const int k = sp.degree(), nm = k + 1, n = sp.num_dofs(), nv = sp.element_dofs();
  const AssembledBlocks blocks = assemble_couplings(sp);
  std::vector<int> rows;
  for (int f = 0; f < sp.num_facets(); ++f) {
    const Facet& fc = sp.topology().facets[f];
    if (fc.is_boundary() && data.bc(fc.label).kind == BCKind::Outflow) continue;
    for (int m = 0; m < nm; ++m) rows.push_back(f * nm + m);
  }
  const MatrixXd Tt = MatrixXd(blocks.T).transpose();
  MatrixXd A(blocks.D.rows() + static_cast<Index>(rows.size()), n);
  A.topRows(blocks.D.rows()) = MatrixXd(blocks.D);
  for (std::size_t i = 0; i < rows.size(); ++i) A.row(blocks.D.rows() + i) = Tt.row(rows[i]);

  Eigen::BDCSVD<MatrixXd> svd(A, Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  int rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++rank;
  const MatrixXd N = svd.matrixV().rightCols(n - rank);
  if (nullspace_dim) *nullspace_dim = n - rank;

  VectorXd mdiag(n);
  for (int e = 0; e < sp.num_elements(); ++e) mdiag.segment(static_cast<Index>(e) * nv, nv).setConstant(sp.map(e).det);
  const MatrixXd NtMN = N.transpose() * mdiag.asDiagonal() * N;
  StateVector u = StateVector::zero(space);
  u.coeffs = N * NtMN.llt().solve(N.transpose() * F);
  return u;
}

}  // namespace dgflow
