#pragma once

#include <functional>
#include <vector>

#include "toric/polynomial.hpp"
#include "toric/polytope.hpp"

namespace toric {

// ---- exact integration ----

// integral of q over the simplex spanned by verts (d+1 points) where measure is its d-volume
double integrate_poly_simplex(const std::vector<Vec>& verts, double measure, const Polynomial& q);

double integrate_poly(const DelzantPolytope& P, const Polynomial& q);
// full-dimensional convex cell, Lebesgue measure
double integrate_poly(const ConvexCell& cell, const Polynomial& q);

struct BoundaryIntegral {
  double total = 0.0;
  std::vector<double> per_facet;
};
BoundaryIntegral integrate_boundary_poly(const DelzantPolytope& P, const Polynomial& q);
// part of facet i (a clipped facet_cell) with the lattice measure of that facet
double integrate_facet_piece(const DelzantPolytope& P, int facet, const ConvexCell& piece, const Polynomial& q);

// ---- fan parametrisation ----
// Each facet F spans a piece conv(center, F). n=2: x = (1-r)(v1 + t(v2-v1)) + r c,
// n=1: x = (1-r) v + r c. The facet sits at r=0.
struct FanPiece {
  Vec center, v1, v2;
  double jacobian = 0.0;  // |dx/d(r,t)| at r=0
  int facet = -1;
  Vec point(double r, double t) const;
  double weight(double r) const;
};
std::vector<FanPiece> fan_pieces(const DelzantPolytope& P);

// ---- fixed rules ----
struct RuleOptions {
  int points = 10;       // Gauss-Legendre points per direction and cell
  int uniform = 2;       // uniform cells per direction
  int grade_levels = 8;  // geometric levels (ratio 1/2) toward each facet
};

struct QuadratureRule {
  int dim = 0;
  std::vector<Vec> nodes;
  std::vector<double> weights;
  std::vector<int> facet;  // boundary rules: facet carrying the node
  int exact_degree = 0;    // polynomial degree integrated exactly
  int cells = 0;
  RuleOptions options;

  std::size_t size() const { return nodes.size(); }
  double integrate(const std::vector<double>& values) const { return weighted_sum(weights, values); }
  template <class F>
  double integrate_fn(F&& f) const {
    KahanSum s;
    for (std::size_t i = 0; i < nodes.size(); ++i) s.add(weights[i] * f(nodes[i]));
    return s.value();
  }
};

QuadratureRule interior_rule(const DelzantPolytope& P, const RuleOptions& opts = {});
// weights carry the lattice boundary measure
QuadratureRule boundary_rule(const DelzantPolytope& P, const RuleOptions& opts = {});

// max relative residual of rule vs integrate_poly over all monomials up to rule.exact_degree
double exactness_residual(const DelzantPolytope& P, const QuadratureRule& rule);

// Gauss-Legendre on [-1,1]
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// ---- adaptive integration ----
struct NumericOptions {
  bool relative = false;
  int max_depth = 40;
  std::size_t max_cells = 200000;
};

struct NumericResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;  // false signals ToleranceNotMet; value is the best estimate
  std::size_t cells = 0;
  std::size_t evaluations = 0;
};

using ScalarField = std::function<double(const Vec&)>;

NumericResult integrate_numeric(const DelzantPolytope& P, const ScalarField& f, double tol,
                                const NumericOptions& opts = {});
NumericResult integrate_boundary_numeric(const DelzantPolytope& P, const ScalarField& f, double tol,
                                         const NumericOptions& opts = {});
// 1D adaptive Gauss-Kronrod on [a,b]
NumericResult integrate_interval(const std::function<double(double)>& f, double a, double b, double tol,
                                 const NumericOptions& opts = {});

}  // namespace toric
