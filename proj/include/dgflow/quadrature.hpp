#pragma once

#include <vector>

#include "dgflow/types.hpp"

namespace dgflow {

enum class Domain { Triangle, Segment };

/// Quadrature on the reference triangle {(0,0),(1,0),(0,1)} or the unit
/// segment [0,1]. Segment points are stored as (t, 0).
struct QuadRule {
  Domain domain = Domain::Triangle;
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxQuadratureDegree = 60;

/// Rule exact for polynomials of total degree <= `degree`.
/// Triangle rules are collapsed (Duffy) tensor products of Gauss-Legendre
/// rules, so any degree up to kMaxQuadratureDegree is available.
QuadRule quadrature_rule(Domain domain, int degree);

/// n-point Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace dgflow
