#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "toric/linalg.hpp"

namespace toric {

using Exponent = std::array<int, kMaxDim>;

// sparse polynomial in dim variables, terms keyed by exponent
class Polynomial {
 public:
  explicit Polynomial(int dim = 2) : dim_(dim) {}

  static Polynomial constant(int dim, double c);
  static Polynomial variable(int dim, int i);
  static Polynomial monomial(int dim, const std::vector<int>& exponent, double coeff = 1.0);
  // <w, x> + c
  static Polynomial affine(const Vec& w, double c);

  int dim() const { return dim_; }
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const std::map<Exponent, double>& terms() const { return terms_; }

  void add_term(const Exponent& e, double c);
  double coefficient(const Exponent& e) const;

  double operator()(const Vec& x) const;
  Polynomial derivative(int var) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  std::string str() const;

 private:
  int dim_;
  std::map<Exponent, double> terms_;
};

// f(x) = <grad, x> + c0
struct AffineFunction {
  Vec grad;
  double c0 = 0.0;

  AffineFunction() = default;
  AffineFunction(Vec g, double c) : grad(std::move(g)), c0(c) {}
  static AffineFunction constant(int dim, double c) { return {Vec::Zero(dim), c}; }

  int dim() const { return static_cast<int>(grad.size()); }
  double operator()(const Vec& x) const { return grad.dot(x) + c0; }
  Polynomial polynomial() const { return Polynomial::affine(grad, c0); }
};

// pointwise max of affine pieces
struct PLConvexFunction {
  std::vector<AffineFunction> pieces;

  double operator()(const Vec& x) const;
  // max(0, <nu, x> - c)
  static PLConvexFunction crease(const Vec& nu, double c);
  PLConvexFunction plus(const AffineFunction& g) const;
};

}  // namespace toric
