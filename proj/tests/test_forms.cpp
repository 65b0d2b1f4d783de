#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "dgflow/error.hpp"
#include "dgflow/forms.hpp"
#include "dgflow/problems.hpp"

using namespace dgflow;

namespace {

std::shared_ptr<const Space> square_space(int n, int k, bool periodic, double jitter = 0.15) {
  SquareMeshSpec spec;
  spec.nx = spec.ny = n;
  spec.periodic_x = spec.periodic_y = periodic;
  spec.jitter = jitter;
  return std::make_shared<const Space>(generate_square(spec), k);
}

StateVector random_state(std::shared_ptr<const Space> sp, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1, 1);
  StateVector u = StateVector::zero(sp);
  for (Eigen::Index i = 0; i < u.coeffs.size(); ++i) u.coeffs[i] = dist(gen);
  return u;
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// Matrix of a linear residual map by unit vectors.
template <class F>
Eigen::MatrixXd matrix_of(std::shared_ptr<const Space> sp, F&& apply) {
  const int n = sp->num_dofs();
  Eigen::MatrixXd A(n, n);
  StateVector u = StateVector::zero(sp);
  for (int j = 0; j < n; ++j) {
    u.coeffs.setZero();
    u.coeffs[j] = 1;
    A.col(j) = apply(u);
  }
  return A;
}

// Sum of residual entries paired with the constant test field e_i.
double constant_test(const Space& sp, const Eigen::VectorXd& r, int comp) {
  const int nb = sp.scalar_size();
  double s = 0;
  for (int e = 0; e < sp.num_elements(); ++e) s += r[e * 2 * nb + comp * nb] / std::sqrt(2.0);
  return s;
}

ProblemData mixed_walls(double nu) {
  ProblemData data;
  data.nu = nu;
  data.bcs["left"] = {BCKind::Inflow, [](const Vec2& x, double t) { return Vec2(1 + x.y() * t, x.x()); }};
  data.bcs["bottom"] = {BCKind::WallNoSlip, {}};
  data.bcs["right"] = {BCKind::Outflow, {}};
  return data;
}

}  // namespace

TEST_CASE("mass matrix is det(B) times identity") {
  auto sp = square_space(3, 3, false);
  const BlockDiagonal M = assemble_mass(*sp);
  REQUIRE(M.blocks.size() == static_cast<std::size_t>(sp->num_elements()));
  for (int e = 0; e < sp->num_elements(); ++e) {
    const int n = sp->element_dofs();
    CHECK((M.blocks[e] - sp->map(e).det * Eigen::MatrixXd::Identity(n, n)).norm() < 1e-12);
  }
  const StateVector u = random_state(sp, 1);
  CHECK(rel(apply_mass(*sp, u.coeffs), M.apply(u.coeffs)) < 1e-13);
}

TEST_CASE("convection of the zero field vanishes") {
  auto sp = square_space(3, 2, true);
  CHECK(apply_convection(StateVector::zero(sp), ProblemData{}, 0).norm() == 0.0);
}

TEST_CASE("convection of a constant field on a periodic mesh vanishes") {
  auto sp = square_space(4, 3, true);
  const StateVector u = project_dg([](const Vec2&, double) { return Vec2(0.7, -1.3); }, sp);
  CHECK(apply_convection(u, ProblemData{}, 0).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("convection conserves momentum on a periodic mesh") {
  auto sp = square_space(4, 2, true);
  const StateVector u = random_state(sp, 7);
  const Eigen::VectorXd r = apply_convection(u, ProblemData{}, 0);
  REQUIRE(r.norm() > 1e-3);
  CHECK(std::abs(constant_test(*sp, r, 0)) < 1e-12);
  CHECK(std::abs(constant_test(*sp, r, 1)) < 1e-12);
}

TEST_CASE("convection of a smooth field matches the strong form") {
  // u = (sin x, -y cos x) is divergence free; (u.grad)u is
  // (sin x cos x, y sin^2 x + y cos^2 x) = (sin x cos x, y).
  SquareMeshSpec spec;
  spec.nx = spec.ny = 8;
  spec.jitter = 0.1;
  auto exact = [](const Vec2& x, double) { return Vec2(std::sin(x.x()), -x.y() * std::cos(x.x())); };
  ProblemData data;
  for (const char* side : {"left", "right", "bottom", "top"}) data.bcs[side] = {BCKind::Inflow, exact};
  double prev = 0;
  for (int n : {8, 16}) {
    spec.nx = spec.ny = n;
    auto sp = std::make_shared<const Space>(generate_square(spec), 2);
    const StateVector u = project_dg(exact, sp);
    ProblemData strong;
    strong.source = [](const Vec2& x, double) { return Vec2(std::sin(x.x()) * std::cos(x.x()), x.y()); };
    // weak residual minus strong source, measured in the dual norm through M^{-1}
    const Eigen::VectorXd d = apply_convection(u, data, 0) - apply_source(*sp, strong, 0);
    double err = 0;
    for (int e = 0; e < sp->num_elements(); ++e)
      err += d.segment(e * sp->element_dofs(), sp->element_dofs()).squaredNorm() / sp->map(e).det;
    err = std::sqrt(err);
    if (prev > 0) CHECK(prev / err > 3.0);
    prev = err;
  }
}

TEST_CASE("production kernels agree with the serial reference") {
  for (int k : {1, 3}) {
    auto sp = square_space(4, k, false);
    const StateVector u = random_state(sp, 11 + k);
    const ProblemData data = mixed_walls(0.3);
    CHECK(rel(apply_convection(u, data, 0.4), reference::apply_convection(u, data, 0.4)) < 1e-12);
    CHECK(rel(apply_viscous(u, data, 0.4), reference::apply_viscous(u, data, 0.4)) < 1e-12);
  }
  auto sp = square_space(5, 2, true);
  const StateVector u = random_state(sp, 3);
  ProblemData data;
  data.nu = 0.01;
  CHECK(rel(apply_convection(u, data, 0), reference::apply_convection(u, data, 0)) < 1e-12);
  CHECK(rel(apply_viscous(u, data, 0), reference::apply_viscous(u, data, 0)) < 1e-12);
  data.penalty = PenaltyScale::FacetLength;
  CHECK(rel(apply_viscous(u, data, 0), reference::apply_viscous(u, data, 0)) < 1e-12);
}

TEST_CASE("penalty scales") {
  // equilateral pair with unit edges: |F|/|K| = 4/sqrt(3)
  const double area = std::sqrt(3.0) / 4;
  CHECK(sip_penalty(PenaltyScale::TraceInverse, 2.0, 1, 1.0, area, area) == doctest::Approx(6 * 4 / std::sqrt(3.0)));
  CHECK(sip_penalty(PenaltyScale::TraceInverse, 2.0, 1, 1.0, area, area / 2) == doctest::Approx(12 * 4 / std::sqrt(3.0)));
  CHECK(sip_penalty(PenaltyScale::FacetLength, 2.0, 3, 0.5, area, area) == doctest::Approx(36.0));
}

TEST_CASE("parallel and serial execution give identical residuals") {
  auto sp = square_space(6, 2, false);
  const StateVector u = random_state(sp, 5);
  ProblemData data = mixed_walls(0.05);
  data.source = [](const Vec2& x, double t) { return Vec2(x.x() * t, std::cos(x.y())); };
  const Eigen::VectorXd a = spatial_residual(u, data, 0.2, Exec::Serial);
  const Eigen::VectorXd b = spatial_residual(u, data, 0.2, Exec::Parallel);
  CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("viscous form is consistent for polynomial fields") {
  // Dirichlet data equal to u on the whole boundary: B_h(u, v) = (-nu lap u, v).
  const double nu = 0.7;
  auto exact = [](const Vec2& x, double) { return Vec2(x.x() * x.x() + x.y(), x.x() * x.y()); };
  ProblemData data;
  data.nu = nu;
  for (const char* side : {"left", "right", "bottom", "top"}) data.bcs[side] = {BCKind::Inflow, exact};
  auto sp = square_space(3, 2, false);
  const StateVector u = project_dg(exact, sp);
  ProblemData lap;
  lap.source = [nu](const Vec2&, double) { return Vec2(-2 * nu, 0.0); };
  CHECK(rel(apply_viscous(u, data, 0), apply_source(*sp, lap, 0)) < 1e-11);
}

TEST_CASE("viscous operator is symmetric and coercive") {
  auto sp = square_space(2, 2, false, 0.1);
  ProblemData data;
  data.nu = 1.0;
  for (const char* side : {"left", "right", "bottom", "top"}) data.bcs[side] = {BCKind::WallNoSlip, {}};
  const Eigen::MatrixXd A = matrix_of(sp, [&](const StateVector& u) { return apply_viscous(u, data, 0); });
  CHECK((A - A.transpose()).norm() < 1e-11 * A.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (A + A.transpose()));
  CHECK(eig.eigenvalues().minCoeff() > 0);

  // periodic: constants are the only kernel
  auto per = square_space(2, 2, true, 0.1);
  ProblemData pdata;
  pdata.nu = 1.0;
  const Eigen::MatrixXd P = matrix_of(per, [&](const StateVector& u) { return apply_viscous(u, pdata, 0); });
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> peig(0.5 * (P + P.transpose()));
  CHECK(std::abs(peig.eigenvalues()[1]) < 1e-10);
  CHECK(peig.eigenvalues()[2] > 1e-6);
}

TEST_CASE("viscous operator is coercive at alpha = 2 on distorted meshes, k <= 4") {
  ProblemData data;
  data.nu = 1.0;
  for (int k = 1; k <= 4; ++k)
    for (bool offset : {false, true}) {
      CAPTURE(k);
      CAPTURE(offset);
      auto sp = offset ? std::make_shared<const Space>(generate_square(periodic_box(3, 0.2)), k)
                       : square_space(3, k, true, 0.2);
      const Eigen::MatrixXd A = matrix_of(sp, [&](const StateVector& u) { return apply_viscous(u, data, 0); });
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (A + A.transpose()));
      const Eigen::VectorXd& ev = eig.eigenvalues();
      // two constant modes span the kernel; everything else is strictly positive
      CHECK(std::abs(ev[0]) < 1e-10 * ev.maxCoeff());
      CHECK(std::abs(ev[1]) < 1e-10 * ev.maxCoeff());
      CHECK(ev[2] > 1e-4);
    }
}

TEST_CASE("viscous form vanishes for nu = 0 and for constants on periodic meshes") {
  auto sp = square_space(3, 2, true);
  CHECK(apply_viscous(random_state(sp, 2), ProblemData{}, 0).norm() == 0.0);
  ProblemData data;
  data.nu = 2.0;
  const StateVector c = project_dg([](const Vec2&, double) { return Vec2(3, -1); }, sp);
  CHECK(apply_viscous(c, data, 0).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("source of a constant field integrates to the domain area") {
  auto sp = square_space(3, 2, false);
  ProblemData data;
  data.source = [](const Vec2&, double) { return Vec2(1.0, 2.0); };
  const Eigen::VectorXd r = apply_source(*sp, data, 0);
  CHECK(constant_test(*sp, r, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(constant_test(*sp, r, 1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("right-hand side is M u + dt L(u)") {
  auto sp = square_space(3, 2, false);
  const StateVector u = random_state(sp, 9);
  const ProblemData data = mixed_walls(0.1);
  const Eigen::VectorXd F = assemble_rhs(u, 0.01, data, 0.3);
  const Eigen::VectorXd expect = apply_mass(*sp, u.coeffs) + 0.01 * spatial_residual(u, data, 0.3);
  CHECK(rel(F, expect) < 1e-14);
}

TEST_CASE("divergence and trace couplings satisfy the divergence theorem") {
  for (int k : {1, 2, 4}) {
    auto sp = square_space(3, k, false);
    for (int e = 0; e < sp->num_elements(); ++e) {
      const Eigen::MatrixXd D = element_divergence(*sp, e);
      const Eigen::MatrixXd C = element_trace_coupling(*sp, e);
      REQUIRE(D.rows() == dim_p(k - 1));
      REQUIRE(C.cols() == 3 * (k + 1));
      // z_0 = sqrt(2) and L_0 = 1: (z_0, div v) = sqrt(2) int_dT v.n
      Eigen::VectorXd flux = Eigen::VectorXd::Zero(sp->element_dofs());
      for (int j = 0; j < 3; ++j) flux += C.col(j * (k + 1));
      CHECK((D.row(0).transpose() - std::sqrt(2.0) * flux).norm() < 1e-11);
    }
  }
}

TEST_CASE("trace coupling vanishes on interior facets for continuous fields") {
  auto sp = square_space(3, 2, false);
  const StateVector u = project_dg([](const Vec2& x, double) { return Vec2(x.x() * x.y(), x.y() * x.y() - x.x()); }, sp);
  const AssembledBlocks blocks = assemble_couplings(*sp);
  const Eigen::VectorXd lam = blocks.T.transpose() * u.coeffs;
  const int k = sp->degree();
  // boundary: int_F u.n over the whole boundary equals int div u = int (y + 2y) = 3/2
  double boundary = 0;
  for (int f = 0; f < sp->num_facets(); ++f) {
    const Facet& fc = sp->topology().facets[f];
    if (fc.is_boundary())
      boundary += lam[f * (k + 1)];
    else
      CHECK(lam.segment(f * (k + 1), k + 1).norm() < 1e-12);
  }
  CHECK(boundary == doctest::Approx(1.5).epsilon(1e-12));
  const Eigen::VectorXd div = blocks.D * u.coeffs;
  double total = 0;
  for (int e = 0; e < sp->num_elements(); ++e) total += div[e * dim_p(k - 1)] / std::sqrt(2.0);
  CHECK(total == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("constraint load carries the inflow flux") {
  auto sp = square_space(4, 2, false);
  ProblemData data;
  data.bcs["left"] = {BCKind::Inflow, [](const Vec2&, double) { return Vec2(2.0, 5.0); }};
  const Eigen::VectorXd G = constraint_load(*sp, data, 0);
  const int k = 2;
  double total = 0;
  for (int f = 0; f < sp->num_facets(); ++f) {
    total += G[f * (k + 1)];
    CHECK(G.segment(f * (k + 1) + 1, k).norm() < 1e-13);
  }
  CHECK(total == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("problem data validation") {
  ProblemData data;
  data.bcs["left"] = {BCKind::Inflow, {}};
  CHECK_THROWS_AS(data.validate(), ConfigError);
  ProblemData wall;
  wall.bcs["top"] = {BCKind::WallNoSlip, {}};
  CHECK_THROWS_AS(wall.validate(), ConfigError);
  wall.nu = 1e-3;
  CHECK_NOTHROW(wall.validate());
  CHECK(wall.bc("unknown").kind == BCKind::NoFlow);
}
