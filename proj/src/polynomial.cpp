#include "toric/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "toric/error.hpp"

namespace toric {

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(Exponent{0, 0, 0}, c);
  return p;
}

Polynomial Polynomial::variable(int dim, int i) {
  Exponent e{0, 0, 0};
  e[i] = 1;
  Polynomial p(dim);
  p.add_term(e, 1.0);
  return p;
}

Polynomial Polynomial::monomial(int dim, const std::vector<int>& exponent, double coeff) {
  if (static_cast<int>(exponent.size()) != dim)
    throw Error(ErrorKind::InvalidInput, "exponent length does not match dimension");
  Exponent e{0, 0, 0};
  for (int i = 0; i < dim; ++i) {
    if (exponent[i] < 0) throw Error(ErrorKind::InvalidInput, "negative exponent");
    e[i] = exponent[i];
  }
  Polynomial p(dim);
  p.add_term(e, coeff);
  return p;
}

Polynomial Polynomial::affine(const Vec& w, double c) {
  int dim = static_cast<int>(w.size());
  Polynomial p = constant(dim, c);
  for (int i = 0; i < dim; ++i) p += variable(dim, i) * w[i];
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
  return d;
}

void Polynomial::add_term(const Exponent& e, double c) {
  if (c == 0.0) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
    return;
  }
  it->second += c;
  if (it->second == 0.0) terms_.erase(it);
}

double Polynomial::coefficient(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::operator()(const Vec& x) const {
  double s = 0.0;
  for (auto& [e, c] : terms_) {
    double t = c;
    for (int i = 0; i < dim_; ++i)
      for (int k = 0; k < e[i]; ++k) t *= x[i];
    s += t;
  }
  return s;
}

Polynomial Polynomial::derivative(int var) const {
  Polynomial d(dim_);
  for (auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponent f = e;
    f[var] -= 1;
    d.add_term(f, c * e[var]);
  }
  return d;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  for (auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial r(a.dim());
  for (auto& [ea, ca] : a.terms())
    for (auto& [eb, cb] : b.terms()) {
      Exponent e{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]};
      r.add_term(e, ca * cb);
    }
  return r;
}

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  static const char* names[] = {"x", "y", "z"};
  std::ostringstream os;
  bool first = true;
  for (auto& [e, c] : terms_) {
    os << (first ? "" : " + ") << c;
    for (int i = 0; i < dim_; ++i) {
      if (e[i] == 0) continue;
      os << "*" << names[i];
      if (e[i] > 1) os << "^" << e[i];
    }
    first = false;
  }
  return os.str();
}

double PLConvexFunction::operator()(const Vec& x) const {
  double m = -INFINITY;
  for (auto& p : pieces) m = std::max(m, p(x));
  return m;
}

PLConvexFunction PLConvexFunction::crease(const Vec& nu, double c) {
  PLConvexFunction f;
  f.pieces.push_back(AffineFunction::constant(static_cast<int>(nu.size()), 0.0));
  f.pieces.push_back(AffineFunction(nu, -c));
  return f;
}

PLConvexFunction PLConvexFunction::plus(const AffineFunction& g) const {
  PLConvexFunction f = *this;
  for (auto& p : f.pieces) {
    p.grad += g.grad;
    p.c0 += g.c0;
  }
  return f;
}

}  // namespace toric
