#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "toric/linalg.hpp"

namespace toric {

using Rational = boost::multiprecision::cpp_rational;
using RPoint = std::vector<Rational>;
using IntVec = std::vector<long long>;

double to_double(const Rational& r);
Vec to_vec(const RPoint& p);
// exact conversion of a finite double
Rational exact_rational(double v);

struct FacetSpec {
  IntVec normal;
  Rational offset;
};

struct Facet {
  IntVec normal;        // primitive, inward
  Rational offset;      // l(x) = <x, normal> - offset >= 0
  std::vector<int> vertices;  // n=2: endpoints in counter-clockwise order
  Rational lattice_measure;   // measure of the facet in dsigma = Euclidean / |normal|
  double lattice_scale = 1.0; // 1 / |normal|
  Vec normal_d;
  double offset_d = 0.0;
  int input_index = -1;

  double value(const Vec& x) const { return normal_d.dot(x) - offset_d; }
};

class DelzantPolytope {
 public:
  // Validates and builds; throws Error (Unbounded, EmptyInterior, NotDelzant, InvalidInput).
  static DelzantPolytope build(const std::vector<FacetSpec>& facets, std::string label = "");

  int dim() const { return dim_; }
  const std::string& label() const { return label_; }
  const std::vector<Facet>& facets() const { return facets_; }
  // input facets that do not support an (n-1)-face
  const std::vector<FacetSpec>& redundant_facets() const { return redundant_; }
  const std::vector<int>& redundant_input_indices() const { return redundant_index_; }
  const std::vector<RPoint>& vertices() const { return vertices_; }
  const std::vector<Vec>& vertices_d() const { return vertices_d_; }
  // facet indices incident to each vertex (exactly n of them)
  const std::vector<std::vector<int>>& vertex_facets() const { return vertex_facets_; }
  // pairs of facets sharing a vertex
  const std::vector<std::pair<int, int>>& adjacency() const { return adjacency_; }

  const Rational& volume_exact() const { return volume_; }
  double volume() const { return volume_d_; }
  const Rational& boundary_measure_exact() const { return boundary_; }
  double boundary_measure() const { return boundary_d_; }
  // vertex average; strictly interior
  const RPoint& center() const { return center_; }
  Vec center_d() const { return to_vec(center_); }

  bool contains(const RPoint& x) const;
  // strictly inside every facet
  bool interior(const Vec& x) const;
  bool same_as(const DelzantPolytope& other) const;

 private:
  int dim_ = 0;
  std::string label_;
  std::vector<Facet> facets_;
  std::vector<FacetSpec> redundant_;
  std::vector<int> redundant_index_;
  std::vector<RPoint> vertices_;
  std::vector<Vec> vertices_d_;
  std::vector<std::vector<int>> vertex_facets_;
  std::vector<std::pair<int, int>> adjacency_;
  Rational volume_, boundary_;
  double volume_d_ = 0.0, boundary_d_ = 0.0;
  RPoint center_;
};

using PolytopePtr = std::shared_ptr<const DelzantPolytope>;

PolytopePtr build_polytope(const std::vector<FacetSpec>& facets, std::string label = "");

// square [0,s]^2 with corner cuts of depth eps^2 a (y=0 corners) and eps^2 b (y=s corners)
PolytopePtr blowup_polytope(double s, double eps, double a, double b);

PolytopePtr unit_interval();
PolytopePtr unit_square();
PolytopePtr standard_simplex();
// trapezoid {x>=0, 0<=y<=1, x+y<=2}: first Hirzebruch surface
PolytopePtr hirzebruch_trapezoid();
PolytopePtr named_polytope(const std::string& name);

// x -> M x + t with M unimodular
PolytopePtr unimodular_image(const DelzantPolytope& P, const std::vector<IntVec>& M, const RPoint& t);
// lambda * P
PolytopePtr scaled_polytope(const DelzantPolytope& P, const Rational& lambda);

struct Simplex {
  std::vector<Vec> vertices;
  double volume = 0.0;
};

// fan from the first vertex; n=1 returns the segment itself
std::vector<Simplex> triangulate(const DelzantPolytope& P);

// Convex cell in V-representation used for exact piecewise integration.
// dim 2: polygon vertices counter-clockwise; dim 1: segment endpoints (may sit in the plane);
// dim 0: a single point.
struct ConvexCell {
  int dim = 0;
  std::vector<RPoint> vertices;
  bool empty() const { return vertices.empty(); }
};

ConvexCell cell_of(const DelzantPolytope& P);
ConvexCell facet_cell(const DelzantPolytope& P, int facet);
// keep the part where <alpha, x> >= beta
ConvexCell clip(const ConvexCell& cell, const RPoint& alpha, const Rational& beta);
Rational cell_measure(const ConvexCell& cell);  // Euclidean dim-measure
std::vector<Simplex> triangulate(const ConvexCell& cell);

}  // namespace toric
