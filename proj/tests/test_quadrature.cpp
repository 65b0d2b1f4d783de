#include <cmath>

#include "doctest.h"
#include "dgflow/error.hpp"
#include "dgflow/quadrature.hpp"

using namespace dgflow;

namespace {

// int over the reference triangle of x^a y^b = a! b! / (a+b+2)!
double monomial_oracle(int a, int b) {
  return std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + 3.0));
}

double integrate(const QuadRule& rule, int a, int b) {
  long double sum = 0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    sum += rule.weights[i] * std::pow(rule.points[i].x(), a) * std::pow(rule.points[i].y(), b);
  return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("triangle rule of degree 0 integrates 1 to 1/2") {
  const QuadRule rule = quadrature_rule(Domain::Triangle, 0);
  CHECK(integrate(rule, 0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("triangle rule of degree 5 on x^2 y^3") {
  const QuadRule rule = quadrature_rule(Domain::Triangle, 5);
  CHECK(std::abs(integrate(rule, 2, 3) - 1.0 / 420.0) < 1e-16);
}

TEST_CASE("segment rule of degree 3 on t^3") {
  const QuadRule rule = quadrature_rule(Domain::Segment, 3);
  double sum = 0;
  for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * std::pow(rule.points[i].x(), 3);
  CHECK(std::abs(sum - 0.25) < 1e-15);
}

TEST_CASE("weights sum to the reference measure") {
  for (int d = 0; d <= 30; ++d) {
    double tri = 0, seg = 0;
    for (double w : quadrature_rule(Domain::Triangle, d).weights) tri += w;
    for (double w : quadrature_rule(Domain::Segment, d).weights) seg += w;
    CHECK(std::abs(tri - 0.5) < 1e-14);
    CHECK(std::abs(seg - 1.0) < 1e-14);
  }
}

TEST_CASE("rules are exact for all monomials up to their degree") {
  for (int d = 0; d <= 24; ++d) {
    const QuadRule tri = quadrature_rule(Domain::Triangle, d);
    const QuadRule seg = quadrature_rule(Domain::Segment, d);
    CHECK(tri.exactness_degree >= d);
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; a + b <= d; ++b) {
        const double exact = monomial_oracle(a, b);
        CHECK(std::abs(integrate(tri, a, b) - exact) <= 1e-13 * exact);
      }
      double s = 0;
      for (std::size_t i = 0; i < seg.size(); ++i) s += seg.weights[i] * std::pow(seg.points[i].x(), a);
      CHECK(std::abs(s - 1.0 / (a + 1)) <= 1e-13 / (a + 1));
    }
  }
}

TEST_CASE("points lie inside the reference domain") {
  const QuadRule tri = quadrature_rule(Domain::Triangle, 12);
  for (const auto& p : tri.points) {
    CHECK(p.x() > 0);
    CHECK(p.y() > 0);
    CHECK(p.x() + p.y() < 1);
  }
}

TEST_CASE("unsupported degree is rejected") {
  CHECK_THROWS_AS(quadrature_rule(Domain::Triangle, -1), Error);
  CHECK_THROWS_AS(quadrature_rule(Domain::Segment, kMaxQuadratureDegree + 1), Error);
}
