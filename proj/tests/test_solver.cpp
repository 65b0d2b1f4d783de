#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dgflow/diagnostics.hpp"
#include "dgflow/error.hpp"
#include "dgflow/solver.hpp"

using namespace dgflow;

namespace {

std::shared_ptr<const Space> from_text(const char* text, int k) {
  std::istringstream in(text);
  return std::make_shared<const Space>(parse_mesh(in), k);
}

std::shared_ptr<const Space> periodic_space(int n, int k, double jitter = 0.15) {
  SquareMeshSpec spec;
  spec.nx = spec.ny = n;
  spec.periodic_x = spec.periodic_y = true;
  spec.jitter = jitter;
  return std::make_shared<const Space>(generate_square(spec), k);
}

Eigen::VectorXd random_load(const Space& sp, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1, 1);
  Eigen::VectorXd F(sp.num_dofs());
  for (Eigen::Index i = 0; i < F.size(); ++i) F[i] = dist(gen);
  return F;
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

int bdm_dim(const Space& sp) {
  const int k = sp.degree();
  return sp.num_facets() * (k + 1) + sp.num_elements() * (k * k - 1);
}

ProblemData channel() {
  ProblemData data;
  data.bcs["left"] = {BCKind::Inflow, [](const Vec2& x, double) { return Vec2(x.y() * (1 - x.y()), 0.3 * x.y()); }};
  data.bcs["right"] = {BCKind::Outflow, {}};
  return data;
}

const char* kReferenceTriangle = "3 1 0 0\n0 0\n1 0\n0 1\n0 1 2\n";
const char* kPeriodicSquare = "4 2 0 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n0 3 1 2 1 0\n0 1 3 2 0 1\n";

}  // namespace

TEST_CASE("condensed matrix on a single triangle is SPD of size 5") {
  const HybridSystem sys(from_text(kReferenceTriangle, 1), ProblemData{});
  const Eigen::MatrixXd S(sys.condensed());
  REQUIRE(S.rows() == 5);
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * S.cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  CHECK(eig.eigenvalues().minCoeff() > 1e-10);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  CHECK(ldlt.vectorD().minCoeff() > 0);
}

TEST_CASE("condensed matrix on the two-triangle periodic square") {
  // three facets after merging periodic pairs: 3 x 2 - 1 pinned
  const HybridSystem sys(from_text(kPeriodicSquare, 1), ProblemData{});
  CHECK(sys.condensed().rows() == 5);
  CHECK(sys.pinned_dof() == 0);
}

TEST_CASE("condensed matrix is symmetric and independent of the time step") {
  auto sp = periodic_space(4, 2);
  const HybridSystem a(sp, ProblemData{}), b(sp, ProblemData{});
  const Eigen::MatrixXd S(a.condensed());
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * S.cwiseAbs().maxCoeff());
  const Eigen::VectorXd F = random_load(*sp, 1);
  const StageSolution s1 = a.solve(F, 0, 0.1), s2 = a.solve(F, 0, 1e-4);
  CHECK((s1.u.coeffs - s2.u.coeffs).norm() == 0.0);
  CHECK((s1.pressure() * 0.1 - s2.pressure() * 1e-4).norm() < 1e-14 * s1.w.norm() + 1e-300);
  const Eigen::MatrixXd Sb(b.condensed());
  CHECK((S - Sb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero load gives zero solution") {
  auto sp = periodic_space(2, 2);
  const HybridSystem sys(sp, ProblemData{});
  const StageSolution s = sys.solve(Eigen::VectorXd::Zero(sp->num_dofs()), 0);
  CHECK(s.u.coeffs.norm() == 0.0);
  CHECK(s.w.norm() == 0.0);
  CHECK(s.lambda.norm() == 0.0);
  CHECK(solve_mixed(sp, ProblemData{}, Eigen::VectorXd::Zero(sp->num_dofs()),
                    Eigen::VectorXd::Zero(sp->num_facets() * 3))
            .u.coeffs.norm() == 0.0);
  CHECK(solve_direct_divfree(sp, ProblemData{}, Eigen::VectorXd::Zero(sp->num_dofs())).coeffs.norm() == 0.0);
}

TEST_CASE("hybrid solution satisfies the divergence and trace equations") {
  for (int k : {1, 2, 3}) {
    auto sp = periodic_space(3, k);
    const HybridSystem sys(sp, ProblemData{});
    const StageSolution s = sys.solve(random_load(*sp, 20 + k), 0);
    const AssembledBlocks blocks = assemble_couplings(*sp);
    const double un = s.u.coeffs.norm();
    CHECK((blocks.D * s.u.coeffs).norm() < 1e-10 * un);
    CHECK((blocks.T.transpose() * s.u.coeffs).norm() < 1e-10 * un);
    const DivergenceReport rep = divergence_report(s.u);
    CHECK(rep.l2 < 1e-10 * (1 + un));
    CHECK(rep.max_jump < 1e-9);
    // momentum equation M u - D^T w + T lambda = F
    const Eigen::VectorXd res = apply_mass(*sp, s.u.coeffs) - blocks.D.transpose() * s.w + blocks.T * s.lambda;
    CHECK(rel(res, random_load(*sp, 20 + k)) < 1e-10);
  }
}

TEST_CASE("solve is a projection") {
  auto sp = periodic_space(3, 2);
  const HybridSystem sys(sp, ProblemData{});
  const StateVector u = sys.solve(random_load(*sp, 4), 0).u;
  const StateVector v = sys.solve(apply_mass(*sp, u.coeffs), 0).u;
  CHECK(rel(v.coeffs, u.coeffs) < 1e-10);
  CHECK(sys.solve_count() == 2);
}

TEST_CASE("hybrid, mixed and direct solves agree") {
  for (int n : {1, 2})
    for (int k : {1, 2}) {
      auto sp = periodic_space(n, k);
      const HybridSystem sys(sp, ProblemData{});
      const Eigen::VectorXd F = random_load(*sp, 100 * n + k);
      const Eigen::VectorXd G = Eigen::VectorXd::Zero(sp->num_facets() * (k + 1));
      const StageSolution h = sys.solve(F, 0, 0.05);
      const MixedSolution m = solve_mixed(sp, ProblemData{}, F, G);
      int dim = 0;
      const StateVector d = solve_direct_divfree(sp, ProblemData{}, F, &dim);
      CHECK(rel(h.u.coeffs, m.u.coeffs) < 1e-9);
      CHECK(rel(d.coeffs, m.u.coeffs) < 1e-9);
      CHECK(dim == bdm_dim(*sp) - sp->num_elements() * dim_p(k - 1) + 1);
      Eigen::VectorXd wm = m.w;
      remove_mean(*sp, wm);
      CHECK(rel(h.w, wm) < 1e-9);
    }
}

TEST_CASE("solution does not depend on the pinned facet") {
  auto sp = periodic_space(3, 2);
  HybridOptions other;
  other.pin_facet = 7;
  const HybridSystem a(sp, ProblemData{}), b(sp, ProblemData{}, other);
  const Eigen::VectorXd F = random_load(*sp, 8);
  const StageSolution sa = a.solve(F, 0), sb = b.solve(F, 0);
  CHECK(rel(sb.u.coeffs, sa.u.coeffs) < 1e-10);
  CHECK(rel(sb.w, sa.w) < 1e-9);
  CHECK(rel(sb.lambda, sa.lambda) < 1e-9);
  HybridOptions bad;
  bad.pin_facet = sp->num_facets();
  CHECK_THROWS_AS(HybridSystem(sp, ProblemData{}, bad), Error);
}

TEST_CASE("inflow and outflow boundaries") {
  SquareMeshSpec spec;
  spec.nx = spec.ny = 3;
  spec.jitter = 0.1;
  auto sp = std::make_shared<const Space>(generate_square(spec), 2);
  const ProblemData data = channel();
  const HybridSystem sys(sp, data);
  CHECK(sys.pinned_dof() == -1);
  const Eigen::VectorXd F = random_load(*sp, 12);
  const Eigen::VectorXd G = constraint_load(*sp, data, 0);
  const StageSolution h = sys.solve(F, 0);
  const MixedSolution m = solve_mixed(sp, data, F, G);
  CHECK(rel(h.u.coeffs, m.u.coeffs) < 1e-9);
  CHECK(rel(h.w, m.w) < 1e-9);
  // normal trace matches the datum on inflow and no-flow facets
  const AssembledBlocks blocks = assemble_couplings(*sp);
  const Eigen::VectorXd tr = blocks.T.transpose() * h.u.coeffs;
  double outflux = 0;
  for (int f = 0; f < sp->num_facets(); ++f) {
    const Facet& fc = sp->topology().facets[f];
    if (fc.is_boundary() && fc.label == "right") {
      outflux += tr[f * 3];
      CHECK(h.lambda.segment(f * 3, 3).norm() == 0.0);
    } else {
      CHECK((tr.segment(f * 3, 3) - G.segment(f * 3, 3)).norm() < 1e-10 * h.u.coeffs.norm());
    }
  }
  // mass balance: what enters on the left leaves on the right (inflow 1/6)
  CHECK(outflux == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
  CHECK(divergence_report(h.u).l2 < 1e-10 * (1 + h.u.coeffs.norm()));
}

TEST_CASE("conjugate gradient fallback agrees with the factorization") {
  auto sp = periodic_space(4, 2);
  HybridOptions cg;
  cg.linear_solver = LinearSolver::ConjugateGradient;
  const HybridSystem a(sp, ProblemData{}), b(sp, ProblemData{}, cg);
  const Eigen::VectorXd F = random_load(*sp, 3);
  CHECK(rel(b.solve(F, 0).u.coeffs, a.solve(F, 0).u.coeffs) < 1e-9);
}

TEST_CASE("initial projection") {
  auto sp = periodic_space(3, 2);
  const HybridSystem sys(sp, ProblemData{});
  const VectorField c = [](const Vec2&, double) { return Vec2(1.0, 0.0); };
  CHECK(l2_error(project_initial(c, sys), c, 0) < 1e-12);

  // a pure gradient projects to a constant-free, divergence-free field
  const VectorField grad = [](const Vec2& x, double) {
    return Vec2(std::cos(2 * M_PI * x.x()), std::sin(2 * M_PI * x.y()));
  };
  const StateVector g = project_initial(grad, sys);
  CHECK(divergence_report(g).l2 < 1e-10 * (1 + g.coeffs.norm()));
  CHECK(divergence_report(g).max_jump < 1e-9);

  // Taylor-Green vortex: projection error of order k + 1
  const VectorField tg = [](const Vec2& x, double) {
    return Vec2(-std::cos(x.x()) * std::sin(x.y()), std::sin(x.x()) * std::cos(x.y()));
  };
  for (int k : {1, 2}) {
    std::vector<double> err;
    for (int n : {4, 8, 16}) {
      SquareMeshSpec spec;
      spec.nx = spec.ny = n;
      spec.x1 = spec.y1 = 2 * M_PI;
      spec.periodic_x = spec.periodic_y = true;
      auto s = std::make_shared<const Space>(generate_square(spec), k);
      const HybridSystem hs(s, ProblemData{});
      err.push_back(l2_error(project_initial(tg, hs), tg, 0));
    }
    const double eoc = std::log2(err[1] / err[2]);
    CHECK(eoc > k + 1 - 0.3);
    CHECK(eoc < k + 1 + 0.5);
  }
}

TEST_CASE("direct null-space oracle refuses large meshes and bad loads are rejected") {
  auto sp = periodic_space(6, 1);
  CHECK_THROWS_AS(solve_direct_divfree(sp, ProblemData{}, Eigen::VectorXd::Zero(sp->num_dofs())), Error);
  const HybridSystem sys(sp, ProblemData{});
  Eigen::VectorXd F = Eigen::VectorXd::Zero(sp->num_dofs());
  F[3] = std::nan("");
  CHECK_THROWS_AS(sys.solve(F, 0), NumericalError);
  CHECK_THROWS_AS(sys.solve(Eigen::VectorXd::Zero(3), 0), Error);
}
