#pragma once

#include <functional>

#include <Eigen/Dense>

namespace dgflow {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Time-dependent vector field f(x, t).
using VectorField = std::function<Vec2(const Vec2&, double)>;

/// Execution policy of the element/facet kernels.
enum class Exec { Serial, Parallel };

}  // namespace dgflow
