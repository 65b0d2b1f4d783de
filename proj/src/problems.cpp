#include "dgflow/problems.hpp"

#include <algorithm>
#include <cmath>

#include "dgflow/error.hpp"

namespace dgflow {

Flow taylor_green(double nu) {
  Flow f;
  f.name = "taylor_green";
  f.nu = nu;
  f.exact = [nu](const Vec2& x, double t) {
    const double d = std::exp(-2 * nu * t);
    return Vec2(-std::cos(x.x()) * std::sin(x.y()) * d, std::sin(x.x()) * std::cos(x.y()) * d);
  };
  f.initial = f.exact;
  return f;
}

Flow temporal_manufactured(double nu) {
  Flow f;
  f.name = "temporal";
  f.nu = nu;
  f.exact = [](const Vec2& x, double t) {
    const double s = std::sin(6 * M_PI * t);
    return Vec2(s * std::sin(x.y()), s * std::sin(2 * x.x()));
  };
  f.initial = f.exact;
  // f = u_t + (u.grad)u - nu lap u
  f.source = [nu](const Vec2& x, double t) {
    const double s = std::sin(6 * M_PI * t), ds = 6 * M_PI * std::cos(6 * M_PI * t);
    const double sy = std::sin(x.y()), cy = std::cos(x.y());
    const double s2x = std::sin(2 * x.x()), c2x = std::cos(2 * x.x());
    return Vec2(ds * sy + s * s * s2x * cy + nu * s * sy, ds * s2x + 2 * s * s * sy * c2x + 4 * nu * s * s2x);
  };
  return f;
}

Flow shear_layer(double rho, double delta) {
  Flow f;
  f.name = "shear_layer";
  f.initial = [rho, delta](const Vec2& x, double) {
    const double y = x.y();
    const double u1 = y <= M_PI ? std::tanh((y - M_PI / 2) / rho) : std::tanh((3 * M_PI / 2 - y) / rho);
    return Vec2(u1, delta * std::sin(x.x()));
  };
  return f;
}

SquareMeshSpec periodic_box(int n, double jitter) {
  SquareMeshSpec spec;
  if (n < 1) throw ConfigError("periodic_box: need at least one cell");
  spec.nx = n;
  spec.ny = 2 * std::max(1, static_cast<int>(std::lround(n / std::sqrt(3.0))));
  spec.x1 = spec.y1 = 2 * M_PI;
  spec.periodic_x = spec.periodic_y = true;
  spec.jitter = jitter;
  spec.pattern = SquarePattern::Offset;
  return spec;
}

int cells_for_mesh_size(double h) {
  if (!(h > 0)) throw ConfigError("mesh size must be positive");
  return std::max(1, static_cast<int>(std::lround(2 * M_PI / h)));
}

Flow make_flow(const std::string& name, double nu, double rho, double delta) {
  Flow f;
  if (name == "taylor_green")
    f = taylor_green(nu);
  else if (name == "temporal")
    f = temporal_manufactured(nu);
  else if (name == "shear_layer")
    f = shear_layer(rho, delta);
  else
    throw ConfigError("unknown flow '" + name + "'");
  f.nu = nu;
  return f;
}

}  // namespace dgflow
