#include "dgflow/basis.hpp"

#include <cmath>
#include <string>

#include "dgflow/error.hpp"

namespace dgflow {

namespace {

// Jacobi P_n^{(alpha,0)}(z) and derivatives for n = 0..nmax.
void jacobi_alpha0(int nmax, double alpha, double z, std::vector<double>& p, std::vector<double>& dp) {
  p.assign(nmax + 1, 0.0);
  dp.assign(nmax + 1, 0.0);
  p[0] = 1.0;
  if (nmax == 0) return;
  p[1] = 0.5 * ((alpha + 2) * z + alpha);
  dp[1] = 0.5 * (alpha + 2);
  for (int n = 2; n <= nmax; ++n) {
    const double a1 = 2.0 * n * (n + alpha) * (2 * n + alpha - 2);
    const double a2 = (2 * n + alpha - 1) * alpha * alpha;
    const double a3 = (2 * n + alpha - 2) * (2 * n + alpha - 1) * (2 * n + alpha);
    const double a4 = 2.0 * (n + alpha - 1) * (n - 1) * (2 * n + alpha);
    p[n] = ((a2 + a3 * z) * p[n - 1] - a4 * p[n - 2]) / a1;
    dp[n] = ((a2 + a3 * z) * dp[n - 1] + a3 * p[n - 1] - a4 * dp[n - 2]) / a1;
  }
}

}  // namespace

double legendre01(int m, double s) {
  std::vector<double> p, dp;
  jacobi_alpha0(m, 0.0, 2 * s - 1, p, dp);
  return std::sqrt(2.0 * m + 1) * p[m];
}

Vec2 reference_vertex(int i) {
  switch (i % 3) {
    case 0: return Vec2(0, 0);
    case 1: return Vec2(1, 0);
    default: return Vec2(0, 1);
  }
}

Vec2 reference_edge_point(int edge, double s) {
  const Vec2 a = reference_vertex(edge + 1), b = reference_vertex(edge + 2);
  return (1 - s) * a + s * b;
}

Vec2 reference_edge_normal(int edge) {
  const Vec2 t = reference_vertex(edge + 2) - reference_vertex(edge + 1);
  return Vec2(t.y(), -t.x()).normalized();
}

double reference_edge_length(int edge) {
  return (reference_vertex(edge + 2) - reference_vertex(edge + 1)).norm();
}

ScalarBasis::ScalarBasis(Domain domain, int degree) : domain_(domain), degree_(degree) {
  if (degree < 0 || degree > kMaxScalarDegree)
    throw Error("scalar_basis: unsupported degree " + std::to_string(degree));
  if (domain == Domain::Segment) {
    size_ = degree + 1;
    scale_ = Eigen::VectorXd::Ones(size_);
    return;
  }
  size_ = dim_p(degree);
  for (int n = 0; n <= degree; ++n)
    for (int q = 0; q <= n; ++q) {
      p_index_.push_back(n - q);
      q_index_.push_back(q);
    }
  scale_ = Eigen::VectorXd::Ones(size_);
  const QuadRule rule = quadrature_rule(Domain::Triangle, 2 * degree);
  Eigen::VectorXd norms = Eigen::VectorXd::Zero(size_);
  Eigen::VectorXd v;
  Eigen::MatrixX2d g;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    evaluate_raw(rule.points[i], v, g);
    norms += rule.weights[i] * v.cwiseAbs2();
  }
  scale_ = norms.cwiseSqrt().cwiseInverse();
}

void ScalarBasis::evaluate_raw(const Vec2& ref, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const {
  values.resize(size_);
  grads.setZero(size_, 2);
  if (domain_ == Domain::Segment) {
    std::vector<double> p, dp;
    jacobi_alpha0(degree_, 0.0, 2 * ref.x() - 1, p, dp);
    for (int m = 0; m <= degree_; ++m) {
      const double c = std::sqrt(2.0 * m + 1);
      values[m] = c * p[m];
      grads(m, 0) = 2 * c * dp[m];
    }
    return;
  }

  // Q_p = P_p(a) t^p with t = 1 - y and a t = 2x + y - 1 is a polynomial in
  // (x, y); the three-term Legendre recurrence carries over directly.
  const double x = ref.x(), y = ref.y();
  const double at = 2 * x + y - 1, t = 1 - y;
  const int r = degree_;
  std::vector<double> Q(r + 1), Qx(r + 1), Qy(r + 1);
  Q[0] = 1;
  Qx[0] = Qy[0] = 0;
  if (r >= 1) {
    Q[1] = at;
    Qx[1] = 2;
    Qy[1] = 1;
  }
  for (int n = 1; n < r; ++n) {
    const double c1 = (2.0 * n + 1) / (n + 1), c2 = static_cast<double>(n) / (n + 1);
    Q[n + 1] = c1 * at * Q[n] - c2 * t * t * Q[n - 1];
    Qx[n + 1] = c1 * (2 * Q[n] + at * Qx[n]) - c2 * t * t * Qx[n - 1];
    Qy[n + 1] = c1 * (Q[n] + at * Qy[n]) - c2 * (-2 * t * Q[n - 1] + t * t * Qy[n - 1]);
  }
  std::vector<double> P, dP;
  const double z = 2 * y - 1;
  for (int i = 0; i < size_; ++i) {
    const int p = p_index_[i], q = q_index_[i];
    jacobi_alpha0(q, 2.0 * p + 1, z, P, dP);
    values[i] = scale_[i] * Q[p] * P[q];
    grads(i, 0) = scale_[i] * Qx[p] * P[q];
    grads(i, 1) = scale_[i] * (Qy[p] * P[q] + Q[p] * 2 * dP[q]);
  }
}

void ScalarBasis::evaluate(const Vec2& ref, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const {
  evaluate_raw(ref, values, grads);
}

Eigen::VectorXd ScalarBasis::values(const Vec2& ref) const {
  Eigen::VectorXd v;
  Eigen::MatrixX2d g;
  evaluate_raw(ref, v, g);
  return v;
}

Eigen::MatrixX2d ScalarBasis::gradients(const Vec2& ref) const {
  Eigen::VectorXd v;
  Eigen::MatrixX2d g;
  evaluate_raw(ref, v, g);
  return g;
}

BDMBasis::BDMBasis(int k) : k_(k), scalar_(Domain::Triangle, k < 1 ? 0 : k) {
  if (k < 1 || k > kMaxBDMDegree) throw Error("bdm_basis: unsupported degree " + std::to_string(k));
  const int ns = dim_p(k), n = 2 * ns, ne = 3 * (k + 1);

  Eigen::MatrixXd edge(ne, n);
  edge.setZero();
  const QuadRule seg = quadrature_rule(Domain::Segment, 2 * k);
  Eigen::VectorXd phi;
  Eigen::MatrixX2d dphi;
  for (int j = 0; j < 3; ++j) {
    const Vec2 normal = reference_edge_normal(j);
    const double len = reference_edge_length(j);
    for (std::size_t q = 0; q < seg.size(); ++q) {
      const double s = seg.points[q].x();
      scalar_.evaluate(reference_edge_point(j, s), phi, dphi);
      for (int m = 0; m <= k; ++m) {
        const double w = seg.weights[q] * len * legendre01(m, s);
        edge.row(j * (k + 1) + m).head(ns) += w * normal.x() * phi.transpose();
        edge.row(j * (k + 1) + m).tail(ns) += w * normal.y() * phi.transpose();
      }
    }
  }

  functionals_.resize(n, n);
  functionals_.topRows(ne) = edge;
  if (n > ne) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(edge, Eigen::ComputeFullV);
    functionals_.bottomRows(n - ne) = svd.matrixV().rightCols(n - ne).transpose();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(functionals_);
  if (!lu.isInvertible()) throw NumericalError("bdm_basis: functionals are not unisolvent");
  coeffs_ = lu.inverse();
}

void BDMBasis::evaluate(const Vec2& ref, Eigen::MatrixX2d& values, Eigen::VectorXd& divergence) const {
  const int ns = scalar_.size();
  Eigen::VectorXd phi;
  Eigen::MatrixX2d dphi;
  scalar_.evaluate(ref, phi, dphi);
  const auto cx = coeffs_.topRows(ns);
  const auto cy = coeffs_.bottomRows(ns);
  values.resize(size(), 2);
  values.col(0) = cx.transpose() * phi;
  values.col(1) = cy.transpose() * phi;
  divergence = cx.transpose() * dphi.col(0) + cy.transpose() * dphi.col(1);
}

void piola_push(const BDMBasis& basis, const AffineMap& map, const Vec2& ref,
                Eigen::MatrixX2d& values, Eigen::VectorXd& divergence) {
  Eigen::MatrixX2d ref_values;
  Eigen::VectorXd ref_div;
  basis.evaluate(ref, ref_values, ref_div);
  values = ref_values * map.jacobian.transpose() / map.det;
  divergence = ref_div / map.det;
}

Eigen::MatrixXd piola_coefficients(const BDMBasis& basis, const AffineMap& map) {
  const int ns = basis.scalar_basis().size();
  const Eigen::MatrixXd& c = basis.coefficients();
  Eigen::MatrixXd out(2 * ns, basis.size());
  const Mat2& B = map.jacobian;
  out.topRows(ns) = (B(0, 0) * c.topRows(ns) + B(0, 1) * c.bottomRows(ns)) / map.det;
  out.bottomRows(ns) = (B(1, 0) * c.topRows(ns) + B(1, 1) * c.bottomRows(ns)) / map.det;
  return out;
}

}  // namespace dgflow
