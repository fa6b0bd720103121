#include "toric/kenergy.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "toric/error.hpp"
#include "toric/parallel.hpp"

namespace toric {

namespace {

std::string point_str(const Vec& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

Mat inverse_pd(const Mat& G, const Vec* where) {
  Eigen::LLT<Mat> llt(G);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite,
                "Hessian not positive definite" + (where ? " at " + point_str(*where) : std::string()));
  return llt.solve(Mat::Identity(G.rows(), G.cols()));
}

}  // namespace

namespace {

using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

// extended precision: near a slanted facet Hess u has condition ~ 1/l and the
// fourth-derivative terms ~ 1/l^3, so doubles lose about eps/l^2
double abreu_extended(const DelzantPolytope& P, const SymplecticPotential* u, const Vec& x) {
  const int n = P.dim();
  LMat G = LMat::Zero(n, n);
  std::array<LMat, kMaxDim> d3;
  std::array<std::array<LMat, kMaxDim>, kMaxDim> d4;
  for (int k = 0; k < n; ++k) {
    d3[k] = LMat::Zero(n, n);
    for (int m = 0; m < n; ++m) d4[k][m] = LMat::Zero(n, n);
  }
  for (const Facet& f : P.facets()) {
    long double l = -static_cast<long double>(f.offset_d);
    for (int k = 0; k < n; ++k) l += static_cast<long double>(f.normal_d[k]) * x[k];
    if (!(l > 0)) throw Error(ErrorKind::InvalidInput, "point " + point_str(x) + " is not interior");
    LMat nn(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) nn(a, b) = static_cast<long double>(f.normal_d[a]) * f.normal_d[b];
    G += (0.5L / l) * nn;
    for (int k = 0; k < n; ++k) {
      d3[k] += (-0.5L * f.normal_d[k] / (l * l)) * nn;
      for (int m = 0; m < n; ++m)
        d4[k][m] += (static_cast<long double>(f.normal_d[k]) * f.normal_d[m] / (l * l * l)) * nn;
    }
  }
  if (u && !u->perturbation().is_zero()) {
    Jet j;
    j.value = 0.0;
    j.grad = Vec::Zero(n);
    j.hess = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      j.d3[k] = Mat::Zero(n, n);
      for (int m = 0; m < n; ++m) j.d4[k][m] = Mat::Zero(n, n);
    }
    u->add_perturbation_jet(x, 4, j);
    G += j.hess.cast<long double>();
    for (int k = 0; k < n; ++k) {
      d3[k] += j.d3[k].cast<long double>();
      for (int m = 0; m < n; ++m) d4[k][m] += j.d4[k][m].cast<long double>();
    }
  }
  Eigen::LLT<LMat> llt(G);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "Hessian not positive definite at " + point_str(x));
  LMat H = llt.solve(LMat::Identity(n, n));
  std::array<LMat, kMaxDim> HdG;
  for (int k = 0; k < n; ++k) HdG[k] = H * d3[k];
  long double S = 0.0L;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      LMat t1 = HdG[a] * HdG[b] * H;
      LMat t2 = HdG[b] * HdG[a] * H;
      LMat t3 = H * d4[a][b] * H;
      S -= t1(a, b) + t2(a, b) - t3(a, b);
    }
  return static_cast<double>(S);
}

}  // namespace

double abreu_scalar(const SymplecticPotential& u, const Vec& x) { return abreu_extended(u.polytope(), &u, x); }

double complex_laplacian(const SymplecticPotential& u, const Polynomial& f, const Vec& x) {
  const int n = u.dim();
  Jet j = u.jet(x, 3);
  Mat H = inverse_pd(j.hess, &x);
  Vec div = Vec::Zero(n);  // sum_i d_i H_ij
  for (int i = 0; i < n; ++i) {
    Mat dH = -H * j.d3[i] * H;
    for (int k = 0; k < n; ++k) div[k] += dH(i, k);
  }
  double s = 0.0;
  for (int a = 0; a < n; ++a) {
    Polynomial fa = f.derivative(a);
    s += div[a] * fa(x);
    for (int b = 0; b < n; ++b) s += H(a, b) * fa.derivative(b)(x);
  }
  return -0.5 * s;
}

KillingProjector::KillingProjector(const DelzantPolytope& P, const TorusSubgroup& G) : n_(P.dim()) {
  if (G.dim() != n_) throw Error(ErrorKind::InvalidInput, "group dimension does not match polytope");
  const int r = G.rank();
  std::vector<Polynomial> b;
  for (int i = 0; i < r; ++i) {
    w_.push_back(G.direction(i));
    Polynomial lin = Polynomial::affine(w_.back(), 0.0);
    mean_.push_back(integrate_poly(P, lin) / P.volume());
    b.push_back(Polynomial::affine(w_.back(), -mean_.back()));
  }
  gram_ = Eigen::MatrixXd(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j <= i; ++j) gram_(i, j) = gram_(j, i) = integrate_poly(P, b[i] * b[j]);
}

AffineFunction KillingProjector::from_moments(const Eigen::VectorXd& hb) const {
  AffineFunction out = AffineFunction::constant(n_, 0.0);
  if (w_.empty()) return out;
  Eigen::VectorXd c = gram_.ldlt().solve(hb);
  for (size_t i = 0; i < w_.size(); ++i) {
    out.grad += c[i] * w_[i];
    out.c0 -= c[i] * mean_[i];
  }
  return out;
}

AffineFunction KillingProjector::project(const QuadratureRule& rule, const std::vector<double>& values) const {
  Eigen::VectorXd hb(w_.size());
  for (size_t i = 0; i < w_.size(); ++i) {
    KahanSum s;
    for (size_t k = 0; k < rule.size(); ++k) s.add(rule.weights[k] * values[k] * (w_[i].dot(rule.nodes[k]) - mean_[i]));
    hb[static_cast<int>(i)] = s.value();
  }
  return from_moments(hb);
}

AffineFunction project_killing(const DelzantPolytope& P, const TorusSubgroup& G, const Polynomial& h) {
  KillingProjector proj(P, G);
  Eigen::VectorXd hb(G.rank());
  double mean_h = integrate_poly(P, h);
  for (int i = 0; i < G.rank(); ++i) {
    Vec w = G.direction(i);
    double m = integrate_poly(P, Polynomial::affine(w, 0.0)) / P.volume();
    hb[i] = integrate_poly(P, h * Polynomial::affine(w, 0.0)) - m * mean_h;
  }
  return proj.from_moments(hb);
}

AffineFunction project_killing(const DelzantPolytope& P, const TorusSubgroup& G, const ScalarField& h,
                               const QuadratureRule& rule) {
  std::vector<double> v(rule.size());
  for (size_t k = 0; k < rule.size(); ++k) v[k] = h(rule.nodes[k]);
  return KillingProjector(P, G).project(rule, v);
}

EnergyContext::EnergyContext(PolytopePtr P, TorusSubgroup G, EnergyOptions opts)
    : P_(std::move(P)), G_(std::move(G)), opts_(opts), rule_(interior_rule(*P_, opts.rule)), proj_(*P_, G_) {
  const int n = P_->dim();
  chol_.resize(rule_.size());
  parallel_for(rule_.size(), [&](std::size_t i) {
    Jet g = SymplecticPotential::guillemin_jet(*P_, rule_.nodes[i], 2);
    Eigen::LLT<Mat> llt(g.hess);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::NotPositiveDefinite, "Guillemin Hessian not positive definite");
    chol_[i] = llt.matrixL();
  });
  Sbar_ = average_scalar(*P_);
  SymplecticPotential u0(P_);
  ReducedScalar red = reduced(u0);
  A_ = red.projection;
  A_.c0 += Sbar_;

  // E(u_G) = 2 int_dP u_G - int A u_G - int log det Hess u_G
  const DelzantPolytope& poly = *P_;
  const AffineFunction A = A_;
  auto boundary = integrate_boundary_numeric(
      poly, [&](const Vec& x) { return u0.value(x); }, opts_.singular_tol);
  auto interior = integrate_numeric(
      poly,
      [&](const Vec& x) {
        Jet j = SymplecticPotential::guillemin_jet(poly, x, 2);
        Eigen::LLT<Mat> llt(j.hess);
        double logdet = 0.0;
        Mat L = llt.matrixL();
        for (int k = 0; k < n; ++k) logdet += 2.0 * std::log(L(k, k));
        return A(x) * j.value + logdet;
      },
      opts_.singular_tol * std::max(1.0, P_->volume()));
  base_ = 2.0 * boundary.value - interior.value;
  base_diag_.value = base_;
  base_diag_.error = 2.0 * boundary.error + interior.error;
  base_diag_.converged = boundary.converged && interior.converged;
  base_diag_.cells = boundary.cells + interior.cells;
  base_diag_.evaluations = boundary.evaluations + interior.evaluations;
}

void EnergyContext::check(const SymplecticPotential& u) const {
  if (!u.polytope().same_as(*P_)) throw Error(ErrorKind::PolytopeMismatch, "potential lives on a different polytope");
}

std::vector<double> EnergyContext::scalar_at_nodes(const SymplecticPotential& u) const {
  check(u);
  std::vector<double> S(rule_.size());
  parallel_for(rule_.size(), [&](std::size_t i) { S[i] = abreu_extended(*P_, &u, rule_.nodes[i]); });
  return S;
}

ReducedScalar EnergyContext::reduced(const SymplecticPotential& u) const {
  ReducedScalar r;
  r.S = scalar_at_nodes(u);
  r.Sbar = Sbar_;
  r.integral_S = rule_.integrate(r.S);
  r.projection = proj_.project(rule_, r.S);
  r.SG.resize(r.S.size());
  for (size_t i = 0; i < r.S.size(); ++i) r.SG[i] = r.S[i] - Sbar_ - r.projection(rule_.nodes[i]);
  return r;
}

AffineFunction EnergyContext::extremal_field(const SymplecticPotential& u) const {
  AffineFunction a = reduced(u).projection;
  a.c0 += Sbar_;
  return a;
}

double EnergyContext::kenergy(const SymplecticPotential& u) const {
  check(u);
  const Polynomial& p = u.perturbation();
  if (p.is_zero()) return base_;
  const int n = P_->dim();
  double bd = integrate_boundary_poly(*P_, p).total;
  double ap = integrate_poly(*P_, A_.polynomial() * p);
  std::vector<double> logdet(rule_.size());
  parallel_for(rule_.size(), [&](std::size_t i) {
    Mat Hp = u.perturbation_hessian(rule_.nodes[i]);
    const Mat& L = chol_[i];
    // X = L^{-1} Hp L^{-T}
    Mat Y = L.triangularView<Eigen::Lower>().solve(Hp);
    Mat X = L.triangularView<Eigen::Lower>().solve(Y.transpose());
    X = 0.5 * (X + X.transpose());
    X += Mat::Identity(n, n);
    Eigen::LLT<Mat> llt(X);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::NotPositiveDefinite, "Hessian not positive definite at " + point_str(rule_.nodes[i]));
    Mat M = llt.matrixL();
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += 2.0 * std::log(M(k, k));
    logdet[i] = s;
  });
  return base_ + 2.0 * bd - ap - rule_.integrate(logdet);
}

double EnergyContext::calabi(const SymplecticPotential& u) const {
  ReducedScalar r = reduced(u);
  KahanSum s;
  for (size_t i = 0; i < r.SG.size(); ++i) s.add(rule_.weights[i] * r.SG[i] * r.SG[i]);
  return s.value();
}

double EnergyContext::derivative(const SymplecticPotential& u, const Polynomial& f) const {
  ReducedScalar r = reduced(u);
  KahanSum s;
  for (size_t i = 0; i < r.SG.size(); ++i) s.add(rule_.weights[i] * r.SG[i] * f(rule_.nodes[i]));
  return s.value();
}

EnergyReport EnergyContext::report(const SymplecticPotential& u) const {
  EnergyReport rep;
  ReducedScalar r = reduced(u);
  KahanSum s;
  for (size_t i = 0; i < r.SG.size(); ++i) s.add(rule_.weights[i] * r.SG[i] * r.SG[i]);
  rep.calabi = s.value();
  rep.energy = kenergy(u);
  rep.Sbar = Sbar_;
  rep.A_G = A_;
  rep.base_error = base_diag_.error;
  rep.base_converged = base_diag_.converged;
  double target = 2.0 * P_->boundary_measure();
  rep.ibp_defect = std::abs(r.integral_S - target) / target;
  rep.nodes = rule_.size();
  return rep;
}

ChenResult EnergyContext::chen(const SymplecticPotential& u0, const SymplecticPotential& u1) const {
  ChenResult c;
  c.distance = mabuchi_distance(u0, u1, DistanceMode::MeanNormalized);
  c.calabi1 = calabi(u1);
  c.energy0 = kenergy(u0);
  c.energy1 = kenergy(u1);
  c.margin = c.distance * std::sqrt(std::max(0.0, c.calabi1)) - (c.energy1 - c.energy0);
  return c;
}

std::shared_ptr<const EnergyContext> energy_context(const PolytopePtr& P, const TorusSubgroup& G) {
  static std::mutex guard;
  static std::map<std::string, std::shared_ptr<const EnergyContext>> cache;
  std::ostringstream key;
  for (auto& f : P->facets()) {
    for (auto v : f.normal) key << v << ",";
    key << f.offset << ";";
  }
  key << "|" << G.describe();
  {
    std::lock_guard<std::mutex> lock(guard);
    auto it = cache.find(key.str());
    if (it != cache.end()) return it->second;
  }
  auto ctx = std::make_shared<const EnergyContext>(P, G);
  std::lock_guard<std::mutex> lock(guard);
  return cache.emplace(key.str(), ctx).first->second;
}

ReducedScalar reduced_scalar(const SymplecticPotential& u, const TorusSubgroup& G) {
  return energy_context(u.polytope_ptr(), G)->reduced(u);
}

AffineFunction extremal_field_potential(const SymplecticPotential& u, const TorusSubgroup& G) {
  return energy_context(u.polytope_ptr(), G)->extremal_field(u);
}

double modified_kenergy(const SymplecticPotential& u, const TorusSubgroup& G) {
  return energy_context(u.polytope_ptr(), G)->kenergy(u);
}

double modified_calabi(const SymplecticPotential& u, const TorusSubgroup& G) {
  return energy_context(u.polytope_ptr(), G)->calabi(u);
}

double mabuchi_distance(const SymplecticPotential& u0, const SymplecticPotential& u1, DistanceMode mode) {
  if (!u0.polytope().same_as(u1.polytope()))
    throw Error(ErrorKind::PolytopeMismatch, "potentials live on different polytopes");
  const DelzantPolytope& P = u0.polytope();
  Polynomial d = u1.perturbation() - u0.perturbation();
  double sq = integrate_poly(P, d * d);
  if (mode == DistanceMode::MeanNormalized) {
    double m = integrate_poly(P, d);
    sq -= m * m / P.volume();
  }
  return std::sqrt(std::max(0.0, sq));
}

ChenResult chen_check(const SymplecticPotential& u0, const SymplecticPotential& u1, const TorusSubgroup& G) {
  return energy_context(u0.polytope_ptr(), G)->chen(u0, u1);
}

double futaki_character(const SymplecticPotential& u, const TorusSubgroup& G, const AffineFunction& fV) {
  const DelzantPolytope& P = u.polytope();
  auto ctx = energy_context(u.polytope_ptr(), G);
  ReducedScalar r = ctx->reduced(u);
  double mean = integrate_poly(P, fV.polynomial()) / P.volume();
  KahanSum s;
  const QuadratureRule& rule = ctx->rule();
  for (size_t i = 0; i < rule.size(); ++i) s.add(rule.weights[i] * (fV(rule.nodes[i]) - mean) * r.SG[i]);
  return s.value();
}

}  // namespace toric
