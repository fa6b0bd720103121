#include "toric/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "toric/error.hpp"

namespace toric {

SymplecticPotential::SymplecticPotential(PolytopePtr P) : P_(std::move(P)), p_(P_->dim()) { prepare(); }

SymplecticPotential::SymplecticPotential(PolytopePtr P, Polynomial perturbation)
    : P_(std::move(P)), p_(std::move(perturbation)) {
  if (p_.dim() != P_->dim()) throw Error(ErrorKind::InvalidInput, "perturbation dimension does not match polytope");
  prepare();
}

void SymplecticPotential::prepare() {
  const int n = dim();
  for (int i = 0; i < n; ++i) d1_.push_back(p_.derivative(i));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d2_.push_back(d1_[i].derivative(j));
  for (int ij = 0; ij < n * n; ++ij)
    for (int k = 0; k < n; ++k) d3_.push_back(d2_[ij].derivative(k));
  for (int ijk = 0; ijk < n * n * n; ++ijk)
    for (int l = 0; l < n; ++l) d4_.push_back(d3_[ijk].derivative(l));
}

Jet SymplecticPotential::guillemin_jet(const DelzantPolytope& P, const Vec& x, int order) {
  const int n = P.dim();
  Jet j;
  j.grad = Vec::Zero(n);
  j.hess = Mat::Zero(n, n);
  if (order >= 3)
    for (int k = 0; k < n; ++k) j.d3[k] = Mat::Zero(n, n);
  if (order >= 4)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) j.d4[k][l] = Mat::Zero(n, n);
  for (const Facet& f : P.facets()) {
    double l = f.value(x);
    const Vec& nu = f.normal_d;
    if (l > 0) j.value += 0.5 * l * std::log(l);
    if (order < 1) continue;
    j.grad += 0.5 * (std::log(l) + 1.0) * nu;
    Mat nn = nu * nu.transpose();
    j.hess += (0.5 / l) * nn;
    if (order >= 3) {
      double c3 = -0.5 / (l * l);
      for (int k = 0; k < n; ++k) j.d3[k] += (c3 * nu[k]) * nn;
    }
    if (order >= 4) {
      double c4 = 1.0 / (l * l * l);
      for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) j.d4[k][m] += (c4 * nu[k] * nu[m]) * nn;
    }
  }
  return j;
}

void SymplecticPotential::add_perturbation_jet(const Vec& x, int order, Jet& j) const {
  if (p_.is_zero()) return;
  const int n = dim();
  j.value += p_(x);
  for (int i = 0; i < n; ++i) j.grad[i] += d1_[i](x);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) j.hess(i, k) += d2_[i * n + k](x);
  if (order >= 3)
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a)
        for (int k = 0; k < n; ++k) j.d3[k](i, a) += d3_[(i * n + a) * n + k](x);
  if (order >= 4)
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) j.d4[k][l](i, a) += d4_[((i * n + a) * n + k) * n + l](x);
}

Mat SymplecticPotential::perturbation_hessian(const Vec& x) const {
  const int n = dim();
  Mat h = Mat::Zero(n, n);
  if (p_.is_zero()) return h;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) h(i, k) = d2_[i * n + k](x);
  return h;
}

Jet SymplecticPotential::jet(const Vec& x, int order) const {
  Jet j = guillemin_jet(*P_, x, order);
  add_perturbation_jet(x, order, j);
  return j;
}

double SymplecticPotential::value(const Vec& x) const {
  double v = 0.0;
  for (const Facet& f : P_->facets()) {
    double l = f.value(x);
    if (l > 0) v += 0.5 * l * std::log(l);
  }
  return v + p_(x);
}

Vec SymplecticPotential::gradient(const Vec& x) const { return jet(x, 1).grad; }

Mat SymplecticPotential::hessian(const Vec& x) const { return jet(x, 2).hess; }

TorusSubgroup::TorusSubgroup(int dim, std::vector<IntVec> directions) : dim_(dim), directions_(std::move(directions)) {
  Eigen::MatrixXd M(dim_, directions_.size());
  for (size_t i = 0; i < directions_.size(); ++i) {
    if (static_cast<int>(directions_[i].size()) != dim_)
      throw Error(ErrorKind::InvalidInput, "group direction has wrong length");
    for (int k = 0; k < dim_; ++k) M(k, i) = static_cast<double>(directions_[i][k]);
  }
  if (!directions_.empty()) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.rank() != static_cast<int>(directions_.size()))
      throw Error(ErrorKind::InvalidInput, "group directions are linearly dependent");
  }
}

TorusSubgroup TorusSubgroup::full(int dim) {
  std::vector<IntVec> d;
  for (int i = 0; i < dim; ++i) {
    IntVec e(dim, 0);
    e[i] = 1;
    d.push_back(e);
  }
  return TorusSubgroup(dim, d);
}

TorusSubgroup TorusSubgroup::trivial(int dim) { return TorusSubgroup(dim, {}); }

Vec TorusSubgroup::direction(int i) const {
  Vec v(dim_);
  for (int k = 0; k < dim_; ++k) v[k] = static_cast<double>(directions_[i][k]);
  return v;
}

std::string TorusSubgroup::describe() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < directions_.size(); ++i) {
    os << (i ? "," : "") << "[";
    for (int k = 0; k < dim_; ++k) os << (k ? "," : "") << directions_[i][k];
    os << "]";
  }
  os << "]";
  return os.str();
}

Polynomial random_cubic_perturbation(const DelzantPolytope& P, std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int n = P.dim();
  double size = 0.0;
  for (auto& v : P.vertices_d()) size = std::max(size, (v - P.center_d()).norm());
  std::vector<Polynomial> X;
  for (int i = 0; i < n; ++i) {
    Vec w = Vec::Zero(n);
    w[i] = 1.0 / size;
    X.push_back(Polynomial::affine(w, -P.center_d()[i] / size));
  }
  Polynomial p = Polynomial::constant(n, 0.0);
  double scale = amp * size * size;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      p += (scale * U(rng)) * (X[i] * X[j]);
      for (int k = j; k < n; ++k) p += (scale * U(rng) / 3.0) * (X[i] * X[j] * X[k]);
    }
  for (int i = 0; i < n; ++i) p += (0.1 * U(rng)) * X[i];
  return p;
}

}  // namespace toric
