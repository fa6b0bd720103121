#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "toric/polynomial.hpp"
#include "toric/polytope.hpp"

namespace toric {

// derivatives of a potential at a point; d3[k](i,j) = u_ijk, d4[k][l](i,j) = u_ijkl
struct Jet {
  double value = 0.0;
  Vec grad;
  Mat hess;
  std::array<Mat, kMaxDim> d3;
  std::array<std::array<Mat, kMaxDim>, kMaxDim> d4;
};

// u = 1/2 sum l_i log l_i + p with p a polynomial
class SymplecticPotential {
 public:
  explicit SymplecticPotential(PolytopePtr P);
  SymplecticPotential(PolytopePtr P, Polynomial perturbation);

  const DelzantPolytope& polytope() const { return *P_; }
  const PolytopePtr& polytope_ptr() const { return P_; }
  const Polynomial& perturbation() const { return p_; }
  int dim() const { return P_->dim(); }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
  // order 2, 3 or 4
  Jet jet(const Vec& x, int order) const;

  // Guillemin part alone
  static Jet guillemin_jet(const DelzantPolytope& P, const Vec& x, int order);
  // polynomial part alone, added into j
  void add_perturbation_jet(const Vec& x, int order, Jet& j) const;

  Mat perturbation_hessian(const Vec& x) const;

  SymplecticPotential with_perturbation(Polynomial p) const { return SymplecticPotential(P_, std::move(p)); }

 private:
  void prepare();

  PolytopePtr P_;
  Polynomial p_;
  std::vector<Polynomial> d1_, d2_, d3_, d4_;
};

// random quadratic + cubic in coordinates centred and scaled to P, with a small affine part;
// Hessian of size ~amp, so small amp keeps Guillemin + p convex
Polynomial random_cubic_perturbation(const DelzantPolytope& P, std::mt19937_64& rng, double amp);

// Lie algebra of a subtorus G, spanned by integer directions
class TorusSubgroup {
 public:
  TorusSubgroup(int dim, std::vector<IntVec> directions);
  static TorusSubgroup full(int dim);
  static TorusSubgroup trivial(int dim);

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(directions_.size()); }
  const std::vector<IntVec>& directions() const { return directions_; }
  Vec direction(int i) const;
  std::string describe() const;

 private:
  int dim_;
  std::vector<IntVec> directions_;
};

}  // namespace toric
