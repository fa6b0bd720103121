#include "toric/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "toric/error.hpp"
#include "toric/parallel.hpp"

namespace toric {

namespace {

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  KahanSum s;
  for (double x : v) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

bool is_lattice(const DelzantPolytope& P) {
  for (auto& v : P.vertices())
    for (auto& c : v)
      if (denominator(c) != 1) return false;
  return true;
}

void same_basis(const DiagonalGram& a, const DiagonalGram& b) {
  if (a.basis != b.basis && (!a.basis || !b.basis || a.basis->points != b.basis->points || a.basis->k != b.basis->k))
    throw Error(ErrorKind::BasisMismatch, "hermitian forms live on different lattice bases");
}

int default_uniform(int k) { return std::clamp(2 + k / 6, 2, 5); }

struct Component {
  double c;
  const std::vector<double>* lambda;
};

// objective and gradient of sum_j c_j Phi_j(eta) - <x, eta>
double mixture_objective(const LatticeBasis& B, const std::vector<Component>& comps, const Vec& x, const Vec& eta,
                         Vec* grad) {
  double f = -x.dot(eta);
  if (grad) *grad = -x;
  for (auto& c : comps) {
    FSMoments m = fs_moments(B, *c.lambda, eta);
    f += c.c * m.lse / B.k;
    if (grad) *grad += (c.c / B.k) * m.mean;
  }
  return f;
}

// eta solving sum_j c_j grad Phi_j(eta) = x by damped Newton
Vec solve_eta(const LatticeBasis& B, const std::vector<Component>& comps, const Vec& x, Vec eta, double tol,
              int* iterations) {
  const int n = B.dim;
  const double k = B.k;
  double scale = 1.0 + x.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < 200; ++it) {
    Vec g = -x;
    Mat M = Mat::Zero(n, n);
    double f = -x.dot(eta);
    for (auto& c : comps) {
      FSMoments m = fs_moments(B, *c.lambda, eta);
      g += (c.c / k) * m.mean;
      M += (c.c / k) * m.cov;
      f += c.c * m.lse / k;
    }
    if (g.lpNorm<Eigen::Infinity>() <= tol * scale) {
      if (iterations) *iterations = std::max(*iterations, it);
      return eta;
    }
    Vec d = -M.ldlt().solve(g);
    if (!d.allFinite()) break;
    double slope = g.dot(d);
    double slack = 1e-13 * (1.0 + std::abs(f) + std::abs(x.dot(eta)));
    double gn = g.norm();
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60 && !moved; ++ls, alpha *= 0.5) {
      Vec trial = eta + alpha * d, gt;
      double ft = mixture_objective(B, comps, x, trial, &gt);
      if (!std::isfinite(ft)) continue;
      if (ft <= f + 1e-4 * alpha * slope + slack || gt.norm() <= 0.5 * gn) {
        eta = trial;
        moved = true;
      }
    }
    if (!moved) break;
  }
  std::ostringstream os;
  os << "Legendre inversion did not converge at x = (";
  for (int i = 0; i < n; ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  throw Error(ErrorKind::ToleranceNotMet, os.str());
}

}  // namespace

// ---- lattice points ----

std::shared_ptr<const LatticeBasis> lattice_basis(const DelzantPolytope& P, int k, std::size_t budget) {
  if (k < 1) throw Error(ErrorKind::InvalidInput, "k must be a positive integer");
  const int n = P.dim();
  // padded box; membership below is exact
  std::vector<long long> lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    double mn = 1e300, mx = -1e300;
    for (auto& v : P.vertices_d()) {
      mn = std::min(mn, v[i]);
      mx = std::max(mx, v[i]);
    }
    lo[i] = static_cast<long long>(std::floor(mn * k)) - 1;
    hi[i] = static_cast<long long>(std::ceil(mx * k)) + 1;
  }
  double est = P.volume() * std::pow(static_cast<double>(k), n);
  if (est > 2.0 * budget) {
    std::ostringstream os;
    os << "about " << static_cast<long long>(est) << " lattice points at k = " << k << " exceeds the budget of " << budget;
    throw Error(ErrorKind::BudgetExceeded, os.str());
  }
  auto B = std::make_shared<LatticeBasis>();
  B->k = k;
  B->dim = n;
  IntVec a(n);
  std::vector<Rational> offsets;
  for (auto& f : P.facets()) offsets.push_back(f.offset * k);
  auto inside = [&](const IntVec& p) {
    for (size_t j = 0; j < P.facets().size(); ++j) {
      const Facet& f = P.facets()[j];
      long long s = 0;
      for (int i = 0; i < n; ++i) s += f.normal[i] * p[i];
      if (Rational(s) < offsets[j]) return false;
    }
    return true;
  };
  std::function<void(int)> rec = [&](int d) {
    if (d == n) {
      if (inside(a)) {
        B->points.push_back(a);
        if (B->points.size() > budget) {
          std::ostringstream os;
          os << "more than " << budget << " lattice points at k = " << k;
          throw Error(ErrorKind::BudgetExceeded, os.str());
        }
      }
      return;
    }
    for (long long v = lo[d]; v <= hi[d]; ++v) {
      a[d] = v;
      rec(d + 1);
    }
  };
  rec(0);
  std::sort(B->points.begin(), B->points.end());
  for (auto& p : B->points) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = static_cast<double>(p[i]);
    B->points_d.push_back(v);
  }
  return B;
}

// ---- hermitian forms ----

double DiagonalGram::weight(std::size_t a) const { return std::exp(log_weights[a]); }

DiagonalGram DiagonalGram::scaled(double log_c) const {
  DiagonalGram out = *this;
  for (double& l : out.log_weights) l += log_c;
  return out;
}

double bk_distance(const DiagonalGram& H0, const DiagonalGram& H1) {
  same_basis(H0, H1);
  KahanSum s;
  for (size_t a = 0; a < H0.size(); ++a) {
    double d = H1.log_weights[a] - H0.log_weights[a];
    s.add(d * d);
  }
  return std::sqrt(s.value());
}

DiagonalGram bk_geodesic(const DiagonalGram& H0, const DiagonalGram& H1, double t) {
  same_basis(H0, H1);
  if (t == 0.0) return H0;
  if (t == 1.0) return H1;
  DiagonalGram out = H0;
  for (size_t a = 0; a < H0.size(); ++a) out.log_weights[a] = (1 - t) * H0.log_weights[a] + t * H1.log_weights[a];
  return out;
}

SigmaAction SigmaAction::trivial(int dim) { return SigmaAction{Vec::Zero(dim)}; }

SigmaAction SigmaAction::from_group(const PolytopePtr& P, const TorusSubgroup& G) {
  if (G.rank() == 0) return trivial(P->dim());
  return SigmaAction{energy_context(P, G)->extremal_potential().grad};
}

// ---- Fubini-Study potentials ----

FSMoments fs_moments(const LatticeBasis& B, const std::vector<double>& lambda, const Vec& eta, std::vector<double>* p) {
  const int n = B.dim;
  const size_t N = B.size();
  std::vector<double> e(N);
  double m = -std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < N; ++a) {
    e[a] = B.points_d[a].dot(eta) - lambda[a];
    m = std::max(m, e[a]);
  }
  double s = 0.0;
  for (size_t a = 0; a < N; ++a) {
    e[a] = std::exp(e[a] - m);
    s += e[a];
  }
  FSMoments out;
  out.lse = m + std::log(s);
  out.mean = Vec::Zero(n);
  double inv = 1.0 / s;
  for (size_t a = 0; a < N; ++a) {
    e[a] *= inv;
    out.mean += e[a] * B.points_d[a];
  }
  out.cov = Mat::Zero(n, n);
  for (size_t a = 0; a < N; ++a) {
    Vec d = B.points_d[a] - out.mean;
    out.cov += e[a] * d * d.transpose();
  }
  if (p) *p = std::move(e);
  return out;
}

FSPotential::FSPotential(DiagonalGram H) : H_(std::move(H)) {
  if (!H_.basis || H_.basis->size() == 0) throw Error(ErrorKind::InvalidInput, "empty lattice basis");
  for (double l : H_.log_weights)
    if (!std::isfinite(l)) throw Error(ErrorKind::InvalidInput, "hermitian form weights must be positive and finite");
}

double FSPotential::value(const Vec& eta) const { return fs_moments(*H_.basis, H_.log_weights, eta).lse / k(); }

Vec FSPotential::gradient(const Vec& eta) const { return fs_moments(*H_.basis, H_.log_weights, eta).mean / k(); }

Mat FSPotential::hessian(const Vec& eta) const { return fs_moments(*H_.basis, H_.log_weights, eta).cov / k(); }

FSMoments FSPotential::moments(const Vec& eta, std::vector<double>* p) const {
  return fs_moments(*H_.basis, H_.log_weights, eta, p);
}

Vec FSPotential::legendre(const Vec& x, const Vec& guess) const {
  std::vector<Component> comps{{1.0, &H_.log_weights}};
  return solve_eta(*H_.basis, comps, x, guess, 1e-12, nullptr);
}

Vec FSPotential::legendre(const Vec& x) const {
  // centre of the lattice points as a neutral start
  return legendre(x, Vec::Zero(x.size()));
}

double FSPotential::symplectic_value(const Vec& x) const {
  Vec eta = legendre(x);
  return 0.5 * (x.dot(eta) - value(eta));
}

DiagonalGram hilb(const SymplecticPotential& u, int k) { return Quantizer(u.polytope_ptr(), k).hilb(u); }

FSPotential fs(const DiagonalGram& H) { return FSPotential(H); }

// ---- quantizer ----

Quantizer::Quantizer(PolytopePtr P, int k, QuantOptions opts)
    : Quantizer(P, k, SigmaAction::trivial(P->dim()), opts) {}

Quantizer::Quantizer(PolytopePtr P, int k, SigmaAction act, QuantOptions opts)
    : P_(std::move(P)), k_(k), act_(std::move(act)), opts_(opts) {
  if (!is_lattice(*P_)) throw Error(ErrorKind::InvalidInput, "quantization needs a lattice polytope");
  if (act_.w.size() == 0) act_.w = Vec::Zero(P_->dim());
  if (act_.w.size() != P_->dim()) throw Error(ErrorKind::InvalidInput, "sigma direction has the wrong dimension");
  basis_ = lattice_basis(*P_, k, opts_.budget);
  RuleOptions ro{opts_.points, opts_.uniform > 0 ? opts_.uniform : default_uniform(k), 0};
  rule_ = interior_rule(*P_, ro);
  start_.resize(rule_.size());
  for (size_t i = 0; i < rule_.size(); ++i) {
    Vec eta = Vec::Zero(P_->dim());
    for (auto& f : P_->facets()) eta += (std::log(f.value(rule_.nodes[i])) + 1.0) * f.normal_d;
    start_[i] = eta;
  }
}

double Quantizer::kn() const { return std::pow(static_cast<double>(k_), P_->dim()); }

void Quantizer::check(const DiagonalGram& H) const {
  if (!H.basis || H.basis->k != k_ || H.basis->points != basis_->points)
    throw Error(ErrorKind::BasisMismatch, "hermitian form does not match the lattice basis at this k");
}

std::vector<double> Quantizer::shifted(const DiagonalGram& H) const {
  std::vector<double> out = H.log_weights;
  const double tau = act_.tau(k_);
  for (size_t a = 0; a < out.size(); ++a) out[a] -= tau * basis_->points_d[a].dot(act_.w);
  return out;
}

DiagonalGram Quantizer::hilb(const SymplecticPotential& u) const {
  if (!u.polytope().same_as(*P_)) throw Error(ErrorKind::PolytopeMismatch, "potential lives on a different polytope");
  const size_t M = rule_.size();
  std::vector<double> base(M);
  std::vector<Vec> eta(M);
  parallel_for(M, [&](std::size_t i) {
    const Vec& x = rule_.nodes[i];
    Vec g = u.gradient(x);
    eta[i] = 2.0 * g;
    base[i] = std::log(rule_.weights[i]) + 2.0 * k_ * (u.value(x) - x.dot(g));
  });
  DiagonalGram H{basis_, std::vector<double>(N())};
  parallel_for(N(), [&](std::size_t a) {
    std::vector<double> v(M);
    for (size_t i = 0; i < M; ++i) v[i] = base[i] + basis_->points_d[a].dot(eta[i]);
    H.log_weights[a] = log_sum_exp(v);
  });
  return H;
}

std::vector<double> Quantizer::hilb_exponent_max(const SymplecticPotential& u) const {
  std::vector<double> out(N(), -std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < rule_.size(); ++i) {
    const Vec& x = rule_.nodes[i];
    Vec g = u.gradient(x);
    double c = 2.0 * k_ * (u.value(x) - x.dot(g));
    for (size_t a = 0; a < N(); ++a) out[a] = std::max(out[a], c + 2.0 * basis_->points_d[a].dot(g));
  }
  return out;
}

double Quantizer::bergman(const SymplecticPotential& u, const DiagonalGram& H, const Vec& x) const {
  check(H);
  Vec g = u.gradient(x);
  double c = 2.0 * k_ * (u.value(x) - x.dot(g));
  std::vector<double> v(N());
  for (size_t a = 0; a < N(); ++a) v[a] = c + 2.0 * basis_->points_d[a].dot(g) - H.log_weights[a];
  return std::exp(log_sum_exp(v));
}

std::vector<double> Quantizer::fs_bergman(const DiagonalGram& H, const std::vector<Vec>& xs) const {
  check(H);
  NodeState st = evaluate({{1.0, &H}});
  // int p_a over P
  std::vector<double> lse(rule_.size());
  for (size_t i = 0; i < rule_.size(); ++i) lse[i] = fs_moments(*basis_, H.log_weights, st.eta[i]).lse;
  std::vector<double> mass(N());
  parallel_for(N(), [&](std::size_t a) {
    KahanSum s;
    for (size_t i = 0; i < rule_.size(); ++i)
      s.add(rule_.weights[i] * std::exp(basis_->points_d[a].dot(st.eta[i]) - H.log_weights[a] - lse[i]));
    mass[a] = s.value();
  });
  FSPotential phi(H);
  std::vector<double> out(xs.size());
  for (size_t j = 0; j < xs.size(); ++j) {
    Vec guess = Vec::Zero(P_->dim());
    for (auto& f : P_->facets()) guess += (std::log(f.value(xs[j])) + 1.0) * f.normal_d;
    Vec eta = phi.legendre(xs[j], guess);
    std::vector<double> p;
    phi.moments(eta, &p);
    KahanSum s;
    for (size_t a = 0; a < N(); ++a) s.add(p[a] / mass[a]);
    out[j] = s.value();
  }
  return out;
}

NodeState Quantizer::evaluate(const std::vector<std::pair<double, const DiagonalGram*>>& mix, const DiagonalGram* dir0,
                              const DiagonalGram* dir1, const std::vector<Vec>* guess) const {
  std::vector<Component> comps;
  std::vector<std::vector<double>> shifts;
  for (auto& m : mix) {
    check(*m.second);
    if (m.first != 0.0) comps.push_back({m.first, &m.second->log_weights});
  }
  const bool twist = !act_.is_trivial();
  if (twist) {
    shifts.reserve(comps.size());
    for (auto& m : mix)
      if (m.first != 0.0) shifts.push_back(shifted(*m.second));
  }
  const size_t M = rule_.size();
  const int n = P_->dim();
  const double k = k_;
  NodeState st;
  st.eta.resize(M);
  st.psi_raw.assign(M, 0.0);
  st.lap.assign(M, 1.0);
  if (dir0) st.dphi.assign(M, 0.0);
  std::vector<int> iters(M, 0);
  parallel_for(M, [&](std::size_t i) {
    Vec eta = solve_eta(*basis_, comps, rule_.nodes[i], guess ? (*guess)[i] : start_[i], opts_.newton_tol, &iters[i]);
    st.eta[i] = eta;
    if (twist) {
      Mat Hm = Mat::Zero(n, n), Hpsi = Mat::Zero(n, n);
      Vec gpsi = Vec::Zero(n);
      double psi = 0.0;
      for (size_t j = 0; j < comps.size(); ++j) {
        FSMoments a = fs_moments(*basis_, *comps[j].lambda, eta);
        FSMoments b = fs_moments(*basis_, shifts[j], eta);
        double c = comps[j].c;
        Hm += (c / k) * a.cov;
        Hpsi += (c / k) * (b.cov - a.cov);
        gpsi += (c / k) * (b.mean - a.mean);
        psi += (c / k) * (b.lse - a.lse);
      }
      Mat T = Hm.ldlt().solve(Hpsi + gpsi * gpsi.transpose());
      st.psi_raw[i] = psi;
      st.lap[i] = 1.0 - T.trace() / k;
    }
    if (dir0) {
      st.dphi[i] = (fs_moments(*basis_, dir1->log_weights, eta).lse - fs_moments(*basis_, dir0->log_weights, eta).lse) / k;
    }
  });
  for (int it : iters) st.newton_iterations = std::max(st.newton_iterations, it);
  // normalise int e^psi = N_k / k^n
  std::vector<double> v(M);
  for (size_t i = 0; i < M; ++i) v[i] = std::log(rule_.weights[i]) + st.psi_raw[i];
  st.constant = std::log(static_cast<double>(N()) / kn()) - log_sum_exp(v);
  return st;
}

PsiResult Quantizer::psi(const DiagonalGram& H) const {
  NodeState st = evaluate({{1.0, &H}});
  PsiResult r;
  r.constant = st.constant;
  r.psi.resize(rule_.size());
  std::vector<double> e(rule_.size());
  for (size_t i = 0; i < rule_.size(); ++i) {
    r.psi[i] = st.psi_raw[i] + st.constant;
    e[i] = std::exp(r.psi[i]);
  }
  double target = static_cast<double>(N()) / kn();
  r.residual = std::abs(rule_.integrate(e) - target) / target;
  return r;
}

PsiResult Quantizer::psi(const SymplecticPotential& u) const {
  if (!u.polytope().same_as(*P_)) throw Error(ErrorKind::PolytopeMismatch, "potential lives on a different polytope");
  const size_t M = rule_.size();
  const double tau = act_.tau(k_);
  const Vec shift = tau * act_.w;
  std::vector<double> raw(M, 0.0);
  if (!act_.is_trivial()) {
    parallel_for(M, [&](std::size_t i) {
      const Vec& x = rule_.nodes[i];
      Vec eta = 2.0 * u.gradient(x);
      Vec target = eta + shift;
      // y with 2 grad u(y) = eta + tau w, minimising 2u(y) - <y, target>
      Vec y = x;
      auto F = [&](const Vec& z) { return 2.0 * u.value(z) - z.dot(target); };
      bool done = false;
      for (int it = 0; it < 100 && !done; ++it) {
        Jet j = u.jet(y, 2);
        Vec g = 2.0 * j.grad - target;
        if (g.lpNorm<Eigen::Infinity>() < 1e-13 * (1.0 + target.lpNorm<Eigen::Infinity>())) {
          done = true;
          break;
        }
        Vec d = -(2.0 * j.hess).ldlt().solve(g);
        double alpha = 1.0;
        for (auto& f : P_->facets()) {
          double rate = f.normal_d.dot(d);
          if (rate < 0) alpha = std::min(alpha, 0.9 * f.value(y) / -rate);
        }
        double f0 = F(y);
        double slack = 1e-13 * (1.0 + std::abs(f0) + std::abs(y.dot(target)));
        double gn = g.norm();
        while (alpha > 1e-16) {
          Vec yt = y + alpha * d;
          if (P_->interior(yt)) {
            if (F(yt) <= f0 + 1e-4 * alpha * g.dot(d) + slack) break;
            if ((2.0 * u.gradient(yt) - target).norm() < 0.5 * gn) break;
          }
          alpha *= 0.5;
        }
        if (alpha <= 1e-16) {
          done = gn < 1e-9 * (1.0 + target.norm());
          break;
        }
        y += alpha * d;
      }
      if (!done) throw Error(ErrorKind::ToleranceNotMet, "Legendre inversion of the potential did not converge");
      double phi0 = x.dot(eta) - 2.0 * u.value(x);
      double phi1 = y.dot(target) - 2.0 * u.value(y);
      raw[i] = phi1 - phi0;
    });
  }
  PsiResult r;
  std::vector<double> v(M);
  for (size_t i = 0; i < M; ++i) v[i] = std::log(rule_.weights[i]) + raw[i];
  r.constant = std::log(static_cast<double>(N()) / kn()) - log_sum_exp(v);
  r.psi.resize(M);
  std::vector<double> e(M);
  for (size_t i = 0; i < M; ++i) {
    r.psi[i] = raw[i] + r.constant;
    e[i] = std::exp(r.psi[i]);
  }
  double target = static_cast<double>(N()) / kn();
  r.residual = std::abs(rule_.integrate(e) - target) / target;
  return r;
}

double Quantizer::psi_raw_shift(const DiagonalGram& H, const Vec& eta) const {
  check(H);
  FSPotential phi(H);
  return phi.value(eta + act_.tau(k_) * act_.w) - phi.value(eta);
}

double Quantizer::psi_raw_weights(const DiagonalGram& H, const Vec& eta) const {
  check(H);
  std::vector<double> s = shifted(H);
  return (fs_moments(*basis_, s, eta).lse - fs_moments(*basis_, H.log_weights, eta).lse) / k_;
}

std::vector<double> Quantizer::grad_z(const DiagonalGram& H) const {
  check(H);
  NodeState st = evaluate({{1.0, &H}});
  const size_t M = rule_.size();
  std::vector<double> lse(M), g(M);
  for (size_t i = 0; i < M; ++i) {
    lse[i] = fs_moments(*basis_, H.log_weights, st.eta[i]).lse;
    g[i] = rule_.weights[i] * st.lap[i] * std::exp(st.psi_raw[i] + st.constant);
  }
  const double kn_ = kn();
  std::vector<double> out(N());
  parallel_for(N(), [&](std::size_t a) {
    KahanSum s;
    for (size_t i = 0; i < M; ++i) s.add(g[i] * std::exp(basis_->points_d[a].dot(st.eta[i]) - H.log_weights[a] - lse[i]));
    out[a] = 1.0 - kn_ * s.value();
  });
  return out;
}

double Quantizer::i_energy(const DiagonalGram& H) const {
  check(H);
  return compensated_sum(H.log_weights);
}

double Quantizer::i_sigma(const std::vector<DiagonalGram>& path) const {
  if (path.empty()) throw Error(ErrorKind::InvalidInput, "empty path");
  for (auto& H : path) check(H);
  std::vector<double> gx, gw;
  gauss_legendre(opts_.path_nodes, gx, gw);
  const double factor = kn() * k_;
  KahanSum total;
  for (size_t s = 0; s + 1 < path.size(); ++s) {
    const DiagonalGram& A = path[s];
    const DiagonalGram& B = path[s + 1];
    std::vector<Vec> warm;
    for (int q = 0; q < opts_.path_nodes; ++q) {
      double t = 0.5 * (1.0 + gx[q]);
      NodeState st = evaluate({{1.0 - t, &A}, {t, &B}}, &A, &B, warm.empty() ? nullptr : &warm);
      KahanSum w;
      for (size_t i = 0; i < rule_.size(); ++i)
        w.add(rule_.weights[i] * st.dphi[i] * st.lap[i] * std::exp(st.psi_raw[i] + st.constant));
      total.add(0.5 * gw[q] * factor * w.value());
      warm = std::move(st.eta);
    }
  }
  return total.value();
}

double Quantizer::z_energy(const std::vector<DiagonalGram>& path) const {
  return i_sigma(path) + i_energy(path.back()) - kn() * std::log(kn()) * P_->volume();
}

double Quantizer::z_energy(const DiagonalGram& H, const DiagonalGram& base) const { return z_energy({base, H}); }

double Quantizer::z_difference(const DiagonalGram& H0, const DiagonalGram& H1) const {
  check(H0);
  check(H1);
  KahanSum s;
  for (size_t a = 0; a < N(); ++a) s.add(H1.log_weights[a] - H0.log_weights[a]);
  return i_sigma({H0, H1}) + s.value();
}

BalancedResult Quantizer::balanced_iterate(const DiagonalGram& H0, int steps, double damping, double tol) const {
  if (steps < 1) throw Error(ErrorKind::InvalidInput, "steps must be at least 1");
  if (!(damping > 0)) throw Error(ErrorKind::InvalidInput, "damping must be positive");
  BalancedResult r;
  r.H = H0;
  for (int s = 0;; ++s) {
    std::vector<double> g = grad_z(r.H);
    double res = 0.0;
    for (double v : g) res += v * v;
    res = std::sqrt(res);
    if (!r.residuals.empty() && res > r.residuals.back()) r.monotone = false;
    r.residuals.push_back(res);
    if (res < tol) {
      r.converged = true;
      break;
    }
    if (res > 10.0 * r.residuals.front()) {
      r.diverged = true;
      break;
    }
    if (s == steps) break;
    for (size_t a = 0; a < N(); ++a) {
      double f = 1.0 - g[a];
      if (!(f > 0)) {
        r.diverged = true;
        return r;
      }
      r.H.log_weights[a] += damping * std::log(f);
    }
    r.steps = s + 1;
  }
  return r;
}

// ---- asymptotics ----

void finish_report(AsymptoticReport& r) {
  const auto& e = r.entries;
  if (e.empty()) return;
  // measured = L + B / k
  double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
  for (auto& x : e) {
    double h = 1.0 / x.k;
    s0 += 1;
    s1 += h;
    s2 += h * h;
    t0 += x.measured;
    t1 += h * x.measured;
  }
  double det = s0 * s2 - s1 * s1;
  if (e.size() >= 2 && det != 0) {
    r.fitted_limit = (s2 * t0 - s1 * t1) / det;
    double B = (s0 * t1 - s1 * t0) / det;
    double res = 0;
    for (auto& x : e) res += std::pow(x.measured - r.fitted_limit - B / x.k, 2);
    r.fit_residual = std::sqrt(res / e.size());
  } else {
    r.fitted_limit = e.back().measured;
  }
  auto err = [&](const AsymptoticEntry& x) {
    return std::abs(x.measured - x.target) / std::max(std::abs(x.target), 1e-300);
  };
  r.decreasing = true;
  for (size_t i = 1; i < e.size(); ++i)
    if (err(e[i]) > err(e[i - 1])) r.decreasing = false;
  if (e.size() >= 2) {
    double a = std::log(std::max(err(e.front()), 1e-300)), b = std::log(std::max(err(e.back()), 1e-300));
    r.rate = (b - a) / (std::log(static_cast<double>(e.back().k)) - std::log(static_cast<double>(e.front().k)));
  }
  r.passed = r.decreasing && err(e.back()) <= r.tolerance;
}

std::vector<AsymptoticReport> asymptotic_suite(const SymplecticPotential& u0, const SymplecticPotential& u1,
                                               const TorusSubgroup& G, const SuiteOptions& opts) {
  if (!u0.polytope().same_as(u1.polytope()))
    throw Error(ErrorKind::PolytopeMismatch, "potentials live on different polytopes");
  const PolytopePtr& P = u0.polytope_ptr();
  const int n = P->dim();
  for (size_t i = 1; i < opts.ks.size(); ++i)
    if (opts.ks[i] <= opts.ks[i - 1]) throw Error(ErrorKind::InvalidInput, "ks must be strictly increasing");
  SigmaAction act = SigmaAction::from_group(P, G);
  double d = mabuchi_distance(u0, u1, DistanceMode::Raw);
  auto ctx = energy_context(P, G);
  double dE = ctx->kenergy(u1) - ctx->kenergy(u0);

  AsymptoticReport rd, rz, rb;
  rd.name = "distance";
  rd.provenance = "computed";
  rz.name = "energy";
  rz.provenance = "computed";
  rb.name = "bergman";
  rb.provenance = "calibrated";
  rd.tolerance = opts.distance_tol;
  rz.tolerance = opts.energy_tol;
  rb.tolerance = opts.bergman_tol;
  rd.target = d;
  rz.target = dE;
  rb.target = kBergmanC1;
  // Bergman probe points: centre and halfway to each vertex
  std::vector<Vec> probes{P->center_d()};
  for (auto& v : P->vertices_d()) probes.push_back(0.5 * (v + P->center_d()));
  std::vector<double> S(probes.size());
  for (size_t j = 0; j < probes.size(); ++j) S[j] = abreu_scalar(u1, probes[j]);

  for (int k : opts.ks) {
    Quantizer Q(P, k, act, opts.quant);
    DiagonalGram H0 = Q.hilb(u0), H1 = Q.hilb(u1);
    double kn = Q.kn();
    AsymptoticEntry e;
    e.k = k;
    e.N = Q.N();
    e.measured = bk_distance(H0, H1) / (2.0 * std::pow(k, 0.5 * (n + 2)));
    e.target = d;
    e.ratio = d != 0 ? e.measured / d : 0.0;
    rd.entries.push_back(e);

    AsymptoticEntry z = e;
    z.measured = d == 0 ? 0.0 : (2.0 / kn) * Q.z_difference(H0, H1);
    z.target = dE;
    z.ratio = dE != 0 ? z.measured / dE : 0.0;
    rz.entries.push_back(z);

    // least squares c1 from (rho - k^n) / k^{n-1} = c1 S
    double num = 0, den = 0;
    for (size_t j = 0; j < probes.size(); ++j) {
      double rho = Q.bergman(u1, H1, probes[j]);
      num += (rho - kn) / std::pow(k, n - 1) * S[j];
      den += S[j] * S[j];
    }
    AsymptoticEntry b = e;
    b.measured = num / den;
    b.target = kBergmanC1;
    b.ratio = b.measured / kBergmanC1;
    rb.entries.push_back(b);
  }
  finish_report(rd);
  finish_report(rb);
  if (d == 0) {
    rz.fitted_limit = 0;
    rz.passed = true;
    rz.decreasing = true;
    rd.passed = true;
  } else {
    finish_report(rz);
  }
  return {rd, rz, rb};
}

AsymptoticReport gradz_scaling(const SymplecticPotential& u, const TorusSubgroup& G, const SuiteOptions& opts) {
  const PolytopePtr& P = u.polytope_ptr();
  const int n = P->dim();
  SigmaAction act = SigmaAction::from_group(P, G);
  double ca = modified_calabi(u, G);
  AsymptoticReport r;
  r.name = "grad_z";
  r.provenance = "calibrated";
  r.target = kGradZConst;
  r.tolerance = 0.2;
  for (int k : opts.ks) {
    Quantizer Q(P, k, act, opts.quant);
    auto g = Q.grad_z(Q.hilb(u));
    double s = 0;
    for (double v : g) s += v * v;
    AsymptoticEntry e;
    e.k = k;
    e.N = Q.N();
    e.measured = std::pow(k, 2 - n) * s / ca;
    e.target = kGradZConst;
    e.ratio = e.measured / kGradZConst;
    r.entries.push_back(e);
  }
  finish_report(r);
  return r;
}

QuantizedChen quantized_chen(const SymplecticPotential& u0, const SymplecticPotential& u1, const TorusSubgroup& G,
                             int k, const QuantOptions& opts) {
  const PolytopePtr& P = u0.polytope_ptr();
  Quantizer Q(P, k, SigmaAction::from_group(P, G), opts);
  DiagonalGram H0 = Q.hilb(u0), H1 = Q.hilb(u1);
  QuantizedChen c;
  // distance to the nearest rescaling of H1; Z is scale invariant
  double mean = 0;
  for (size_t a = 0; a < Q.N(); ++a) mean += H1.log_weights[a] - H0.log_weights[a];
  mean /= Q.N();
  c.dk = bk_distance(H0, H1.scaled(-mean));
  auto g = Q.grad_z(H1);
  double s = 0;
  for (double v : g) s += v * v;
  c.grad_norm = std::sqrt(s);
  c.dZ = Q.z_difference(H0, H1);
  c.margin = 2.0 / Q.kn() * (c.dk * c.grad_norm - c.dZ);
  c.continuum = chen_check(u0, u1, G).margin;
  return c;
}

}  // namespace toric
