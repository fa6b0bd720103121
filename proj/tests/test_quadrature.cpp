#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "toric/quadrature.hpp"

using namespace toric;

namespace {

Polynomial mono(int a, int b, double c = 1.0) { return Polynomial::monomial(2, {a, b}, c); }

// Green's theorem oracle: int_P x^a y^b = boundary integral of x^{a+1} y^b / (a+1) dy (ccw)
double green(const DelzantPolytope& P, int a, int b) {
  const auto& v = P.vertices_d();
  double s = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    Vec p = v[i], q = v[(i + 1) % v.size()];
    auto f = [&](double t) {
      Vec x = p + t * (q - p);
      return std::pow(x[0], a + 1) * std::pow(x[1], b) / (a + 1) * (q[1] - p[1]);
    };
    s += oracle::simpson(f, 0.0, 1.0, 400);
  }
  return s;
}

Polynomial random_poly(std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> U(-1, 1);
  Polynomial p(2);
  for (int d = 0; d <= degree; ++d)
    for (int a = 0; a <= d; ++a) p += mono(a, d - a, U(rng));
  return p;
}

std::vector<PolytopePtr> random_polytopes(std::mt19937_64& rng) {
  std::vector<PolytopePtr> out{unit_square(), standard_simplex(), hirzebruch_trapezoid()};
  std::uniform_real_distribution<double> U(0.2, 1.0);
  for (int i = 0; i < 3; ++i) out.push_back(blowup_polytope(3, U(rng), 1, 1.5));
  out.push_back(unimodular_image(*blowup_polytope(2, 0.5, 1, 2), {{1, 1}, {0, 1}}, {Rational(1, 2), Rational(0)}));
  out.push_back(scaled_polytope(*hirzebruch_trapezoid(), Rational(3, 2)));
  return out;
}

}  // namespace

TEST_CASE("integrate_poly basic values") {
  CHECK(integrate_poly(*unit_square(), Polynomial::constant(2, 1)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(integrate_poly(*unit_square(), mono(1, 0)) == doctest::Approx(0.5).epsilon(1e-15));
  // factorial formula a! b! / (a+b+2)!
  CHECK(integrate_poly(*standard_simplex(), mono(2, 1)) == doctest::Approx(2.0 / 120.0).epsilon(1e-14));
  auto P = standard_simplex();
  double mc = oracle::monte_carlo(*P, [](const Vec& x) { return x[0] * x[0] * x[1]; }, 10000000, 11);
  CHECK(mc == doctest::Approx(1.0 / 60).epsilon(0.01));
  auto I = unit_interval();
  CHECK(integrate_poly(*I, Polynomial::monomial(1, {3})) == doctest::Approx(0.25));
}

TEST_CASE("integrate_poly agrees with a Green's theorem oracle") {
  std::mt19937_64 rng(3);
  for (auto& P : random_polytopes(rng))
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; b <= 4 - a; ++b) {
        double exact = integrate_poly(*P, mono(a, b));
        CHECK(exact == doctest::Approx(green(*P, a, b)).epsilon(1e-10));
      }
}

TEST_CASE("boundary integrals") {
  auto sq = unit_square();
  CHECK(integrate_boundary_poly(*sq, Polynomial::constant(2, 1)).total == doctest::Approx(4.0));
  CHECK(integrate_boundary_poly(*standard_simplex(), Polynomial::constant(2, 1)).total == doctest::Approx(3.0));
  auto by = integrate_boundary_poly(*sq, mono(0, 1));
  CHECK(by.total == doctest::Approx(2.0));
  // per-edge oracle: edges x=0, y=0, x=1, y=1 carry 1/2, 0, 1/2, 1
  REQUIRE(by.per_facet.size() == 4);
  CHECK(by.per_facet[0] == doctest::Approx(0.5));
  CHECK(by.per_facet[1] == doctest::Approx(0.0));
  CHECK(by.per_facet[2] == doctest::Approx(0.5));
  CHECK(by.per_facet[3] == doctest::Approx(1.0));
  std::mt19937_64 rng(5);
  for (auto& P : random_polytopes(rng)) {
    auto one = integrate_boundary_poly(*P, Polynomial::constant(2, 1));
    double perim = 0;
    for (auto& f : P->facets()) {
      Vec a = P->vertices_d()[f.vertices[0]], b = P->vertices_d()[f.vertices[1]];
      perim += (b - a).norm() / f.normal_d.norm();
    }
    CHECK(one.total == doctest::Approx(perim).epsilon(1e-12));
    Polynomial q = random_poly(rng, 4);
    auto bq = integrate_boundary_poly(*P, q);
    double sum = 0, simp = 0;
    for (size_t i = 0; i < bq.per_facet.size(); ++i) {
      sum += bq.per_facet[i];
      auto& f = P->facets()[i];
      Vec a = P->vertices_d()[f.vertices[0]], b = P->vertices_d()[f.vertices[1]];
      simp += oracle::simpson([&](double t) { return q(a + t * (b - a)); }, 0, 1, 4000) * (b - a).norm() /
              f.normal_d.norm();
    }
    CHECK(sum == doctest::Approx(bq.total).epsilon(1e-14));
    CHECK(bq.total == doctest::Approx(simp).epsilon(1e-10));
  }
}

TEST_CASE("integrate_numeric examples") {
  auto sq = unit_square();
  auto one = integrate_numeric(*sq, [](const Vec&) { return 1.0; }, 1e-10);
  CHECK(one.converged);
  CHECK(one.value == doctest::Approx(1.0).epsilon(1e-12));
  auto x2y = integrate_numeric(*sq, [](const Vec& x) { return x[0] * x[0] * x[1]; }, 1e-10);
  CHECK(std::abs(x2y.value - integrate_poly(*sq, mono(2, 1))) <= 1e-10);
  auto lg = integrate_numeric(*unit_interval(), [](const Vec& x) { return std::log(x[0]); }, 1e-8);
  CHECK(lg.converged);
  CHECK(std::abs(lg.value + 1.0) <= 1e-8);
  // facet log singularities in 2D: int log x + log(1-y) over the square = -2
  auto lg2 = integrate_numeric(*sq, [](const Vec& x) { return std::log(x[0]) + std::log(1 - x[1]); }, 1e-9);
  CHECK(lg2.converged);
  CHECK(std::abs(lg2.value + 2.0) <= 1e-9);
  CHECK(lg2.error <= 1e-9);
}

TEST_CASE("integrate_numeric vs exact on random polynomials") {
  std::mt19937_64 rng(9);
  for (auto& P : random_polytopes(rng)) {
    Polynomial q = random_poly(rng, 6);
    auto r = integrate_numeric(*P, [&](const Vec& x) { return q(x); }, 1e-10);
    CHECK(r.converged);
    CHECK(std::abs(r.value - integrate_poly(*P, q)) <= 1e-10);
  }
}

TEST_CASE("tolerance flag when refinement is exhausted") {
  NumericOptions o;
  o.max_cells = 4;
  auto r = integrate_numeric(*unit_square(), [](const Vec& x) { return 1.0 / std::sqrt(x[0]); }, 1e-14, o);
  CHECK_FALSE(r.converged);
}

TEST_CASE("Gauss rules") {
  std::vector<double> x, w;
  gauss_legendre(10, x, w);
  double s = 0;
  for (double v : w) s += v;
  CHECK(s == doctest::Approx(2.0).epsilon(1e-15));
  // the embedded 7-point Gauss rule is exact to degree 13, so one cell suffices
  auto k = integrate_interval([](double t) { return std::pow(t, 13); }, 0, 1, 1e-14);
  CHECK(k.value == doctest::Approx(1.0 / 14).epsilon(1e-14));
  CHECK(k.cells == 1);
  // the 15-point Kronrod rule itself is exact to degree 22
  auto k22 = integrate_interval([](double t) { return std::pow(t, 22); }, 0, 1, 1e-30, {false, 0, 10});
  CHECK(k22.value == doctest::Approx(1.0 / 23).epsilon(1e-14));
}

TEST_CASE("fixed rules are exact to their stated degree") {
  std::mt19937_64 rng(2);
  for (auto& P : random_polytopes(rng)) {
    auto rule = interior_rule(*P, {6, 2, 3});
    for (double w : rule.weights) CHECK(w > 0);
    CHECK(exactness_residual(*P, rule) <= 1e-12);
    auto brule = boundary_rule(*P, {6, 1, 2});
    CHECK(exactness_residual(*P, brule) <= 1e-12);
  }
  auto I = unit_interval();
  auto r1 = interior_rule(*I, {5, 2, 4});
  CHECK(r1.exact_degree == 9);
  CHECK(exactness_residual(*I, r1) <= 1e-12);
}

TEST_CASE("adaptive results are reproducible bit for bit") {
  auto P = blowup_polytope(5, 1, 1, 2);
  auto f = [](const Vec& x) { return std::log(x[0] + 0.1) * std::sin(x[1]); };
  auto a = integrate_numeric(*P, f, 1e-9);
  auto b = integrate_numeric(*P, f, 1e-9);
  CHECK(a.value == b.value);
  CHECK(a.error == b.error);
}
