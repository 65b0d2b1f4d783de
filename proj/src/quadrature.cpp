#include "dgflow/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dgflow/error.hpp"

namespace dgflow {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Newton on P_n in extended precision; nodes on [-1,1] are then mapped to [0,1].
  for (int i = 0; i < n; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double p0 = 1, p1 = x, dp = 1;
    for (int it = 0; it < 100; ++it) {
      p0 = 1;
      p1 = x;
      for (int m = 2; m <= n; ++m) {
        const long double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    p0 = 1;
    p1 = x;
    for (int m = 2; m <= n; ++m) {
      const long double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    const long double w = 2 / ((1 - x * x) * dp * dp);
    // ascending order on [0,1]
    nodes[n - 1 - i] = static_cast<double>((1 + x) / 2);
    weights[n - 1 - i] = static_cast<double>(w / 2);
  }
}

QuadRule quadrature_rule(Domain domain, int degree) {
  if (degree < 0 || degree > kMaxQuadratureDegree)
    throw Error("quadrature_rule: unsupported degree " + std::to_string(degree));

  QuadRule rule;
  rule.domain = domain;
  rule.exactness_degree = degree;

  if (domain == Domain::Segment) {
    std::vector<double> x, w;
    gauss_legendre(degree / 2 + 1, x, w);
    for (std::size_t i = 0; i < x.size(); ++i) {
      rule.points.emplace_back(x[i], 0.0);
      rule.weights.push_back(w[i]);
    }
    return rule;
  }

  // (xi, eta) in [0,1]^2 -> (x, y) = (xi (1 - eta), eta), Jacobian (1 - eta).
  // The collapsed direction carries one extra degree from the Jacobian.
  std::vector<double> xa, wa, xb, wb;
  gauss_legendre(degree / 2 + 1, xa, wa);
  gauss_legendre((degree + 1) / 2 + 1, xb, wb);
  for (std::size_t j = 0; j < xb.size(); ++j) {
    for (std::size_t i = 0; i < xa.size(); ++i) {
      rule.points.emplace_back(xa[i] * (1 - xb[j]), xb[j]);
      rule.weights.push_back(wa[i] * wb[j] * (1 - xb[j]));
    }
  }
  return rule;
}

}  // namespace dgflow
