#include "toric/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "toric/error.hpp"
#include "toric/parallel.hpp"
#include "toric/quadrature.hpp"

namespace toric {

double average_scalar(const DelzantPolytope& P) { return 2.0 * P.boundary_measure() / P.volume(); }

double futaki_linear(const DelzantPolytope& P, const AffineFunction& A, const Polynomial& f) {
  double bd = integrate_boundary_poly(P, f).total;
  double in = integrate_poly(P, A.polynomial() * f);
  return bd - 0.5 * in;
}

namespace {

RPoint exact_point(const Vec& v) {
  RPoint p;
  for (int i = 0; i < v.size(); ++i) p.push_back(exact_rational(v[i]));
  return p;
}

PLConvexFunction dedupe(const PLConvexFunction& f) {
  PLConvexFunction g;
  for (auto& p : f.pieces) {
    bool seen = false;
    for (auto& q : g.pieces)
      if (q.c0 == p.c0 && q.grad == p.grad) seen = true;
    if (!seen) g.pieces.push_back(p);
  }
  return g;
}

// region of P where piece j attains the max
ConvexCell piece_region(const DelzantPolytope& P, const PLConvexFunction& f, size_t j) {
  ConvexCell cell = cell_of(P);
  RPoint gj = exact_point(f.pieces[j].grad);
  Rational cj = exact_rational(f.pieces[j].c0);
  for (size_t i = 0; i < f.pieces.size() && !cell.empty(); ++i) {
    if (i == j) continue;
    RPoint gi = exact_point(f.pieces[i].grad);
    RPoint alpha(gj.size());
    for (size_t k = 0; k < gj.size(); ++k) alpha[k] = gj[k] - gi[k];
    // g_j - g_i >= 0
    cell = clip(cell, alpha, exact_rational(f.pieces[i].c0) - cj);
  }
  return cell;
}

}  // namespace

double integrate_pl(const DelzantPolytope& P, const PLConvexFunction& f, const Polynomial& weight) {
  PLConvexFunction g = dedupe(f);
  KahanSum s;
  for (size_t j = 0; j < g.pieces.size(); ++j) {
    ConvexCell r = piece_region(P, g, j);
    if (r.empty()) continue;
    s.add(integrate_poly(r, g.pieces[j].polynomial() * weight));
  }
  return s.value();
}

double integrate_boundary_pl(const DelzantPolytope& P, const PLConvexFunction& f) {
  PLConvexFunction g = dedupe(f);
  KahanSum s;
  for (int fi = 0; fi < static_cast<int>(P.facets().size()); ++fi) {
    ConvexCell seg = facet_cell(P, fi);
    if (P.dim() == 1) {
      s.add(g(to_vec(seg.vertices[0])));
      continue;
    }
    // split the facet where pieces cross; choose the maximal piece on each sub-segment
    const RPoint &a = seg.vertices[0], &b = seg.vertices[1];
    std::vector<Rational> cuts{Rational(0), Rational(1)};
    for (size_t i = 0; i < g.pieces.size(); ++i)
      for (size_t j = i + 1; j < g.pieces.size(); ++j) {
        RPoint gi = exact_point(g.pieces[i].grad), gj = exact_point(g.pieces[j].grad);
        Rational ci = exact_rational(g.pieces[i].c0), cj = exact_rational(g.pieces[j].c0);
        // h(t) = (g_i - g_j)(a + t (b - a)) = h0 + t h1
        Rational h0 = ci - cj, h1 = 0;
        for (size_t k = 0; k < a.size(); ++k) {
          h0 += (gi[k] - gj[k]) * a[k];
          h1 += (gi[k] - gj[k]) * (b[k] - a[k]);
        }
        if (h1 == 0) continue;
        Rational t = -h0 / h1;
        if (t > 0 && t < 1) cuts.push_back(t);
      }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
      RPoint p(a.size()), q(a.size());
      for (size_t k = 0; k < a.size(); ++k) {
        p[k] = a[k] + (b[k] - a[k]) * cuts[c];
        q[k] = a[k] + (b[k] - a[k]) * cuts[c + 1];
      }
      Vec mid = 0.5 * (to_vec(p) + to_vec(q));
      size_t best = 0;
      for (size_t j = 1; j < g.pieces.size(); ++j)
        if (g.pieces[j](mid) > g.pieces[best](mid)) best = j;
      ConvexCell piece{1, {p, q}};
      s.add(integrate_facet_piece(P, fi, piece, g.pieces[best].polynomial()));
    }
  }
  return s.value();
}

std::vector<bool> redundant_pieces(const DelzantPolytope& P, const PLConvexFunction& f) {
  std::vector<bool> out;
  for (size_t j = 0; j < f.pieces.size(); ++j) {
    bool dup = false;
    for (size_t i = 0; i < j; ++i)
      if (f.pieces[i].c0 == f.pieces[j].c0 && f.pieces[i].grad == f.pieces[j].grad) dup = true;
    out.push_back(dup || piece_region(P, f, j).empty());
  }
  return out;
}

double futaki_linear(const DelzantPolytope& P, const AffineFunction& A, const PLConvexFunction& f) {
  return integrate_boundary_pl(P, f) - 0.5 * integrate_pl(P, f, A.polynomial());
}

ExtremalData extremal_affine(const DelzantPolytope& P) {
  const int n = P.dim();
  std::vector<Polynomial> basis{Polynomial::constant(n, 1.0)};
  for (int i = 0; i < n; ++i) basis.push_back(Polynomial::variable(n, i));
  ExtremalData out;
  out.Sbar = average_scalar(P);
  out.gram = Eigen::MatrixXd(n + 1, n + 1);
  out.rhs = Eigen::VectorXd(n + 1);
  for (int i = 0; i <= n; ++i) {
    out.rhs[i] = 2.0 * integrate_boundary_poly(P, basis[i]).total;
    for (int j = 0; j <= i; ++j) out.gram(i, j) = out.gram(j, i) = integrate_poly(P, basis[i] * basis[j]);
  }
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  LMat G = out.gram.cast<long double>();
  LVec b = out.rhs.cast<long double>();
  Eigen::LDLT<LMat> ldlt(G);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0)
    throw Error(ErrorKind::SingularGram, "Gram matrix of affine functions is singular");
  LVec a = ldlt.solve(b);
  // one step of iterative refinement
  a += ldlt.solve(b - G * a);
  out.A.c0 = static_cast<double>(a[0]);
  out.A.grad = Vec(n);
  for (int i = 0; i < n; ++i) out.A.grad[i] = static_cast<double>(a[i + 1]);
  for (int i = 0; i <= n; ++i) {
    double r = futaki_linear(P, out.A, basis[i]);
    out.residuals.push_back(r);
    out.residual = std::max(out.residual, std::abs(r));
  }
  return out;
}

double relative_df(const DelzantPolytope& P, const ExtremalData& ext, const PLConvexFunction& f) {
  return futaki_linear(P, ext.A, f);
}

double relative_df(const DelzantPolytope& P, const PLConvexFunction& f) {
  return relative_df(P, extremal_affine(P), f);
}

CreaseResult evaluate_crease(const DelzantPolytope& P, const ExtremalData& ext, const Vec& normal, double offset) {
  CreaseResult r;
  r.normal = normal;
  r.offset = offset;
  PLConvexFunction f = PLConvexFunction::crease(normal, offset);
  r.normalization = integrate_pl(P, f, Polynomial::constant(P.dim(), 1.0));
  if (r.normalization <= 0.0) {
    r.skipped = true;
    return r;
  }
  r.value = relative_df(P, ext, f);
  r.normalized = r.value / r.normalization;
  return r;
}

std::vector<Vec> lattice_ball_normals(int dim, int radius) {
  std::vector<Vec> out;
  if (dim == 1) {
    Vec a(1), b(1);
    a << -1;
    b << 1;
    return {a, b};
  }
  for (int x = -radius; x <= radius; ++x)
    for (int y = -radius; y <= radius; ++y) {
      if (x * x + y * y > radius * radius || std::gcd(x, y) != 1) continue;
      Vec v(2);
      v << x, y;
      out.push_back(v);
    }
  return out;
}

StabilityReport stability_scan(const DelzantPolytope& P, const ScanOptions& opts) {
  ExtremalData ext = extremal_affine(P);
  StabilityReport rep;
  rep.tol = opts.tol;
  struct Job {
    Vec nu;
    double c;
  };
  std::vector<Job> jobs;
  for (const Vec& nu : lattice_ball_normals(P.dim(), opts.radius)) {
    double lo = INFINITY, hi = -INFINITY;
    for (const Vec& v : P.vertices_d()) {
      lo = std::min(lo, nu.dot(v));
      hi = std::max(hi, nu.dot(v));
    }
    for (int j = 1; j <= opts.offsets; ++j) jobs.push_back({nu, lo + (hi - lo) * j / (opts.offsets + 1.0)});
  }
  rep.entries.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) { rep.entries[i] = evaluate_crease(P, ext, jobs[i].nu, jobs[i].c); });
  rep.worst = INFINITY;
  for (auto& e : rep.entries) {
    if (e.skipped) {
      ++rep.skipped;
      continue;
    }
    rep.worst = std::min(rep.worst, e.normalized);
  }
  rep.destabilizer_found = rep.worst < -opts.tol;
  return rep;
}

}  // namespace toric
