#include "toric/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <set>

#include "toric/error.hpp"

namespace toric {

namespace {

long double factorial(int n) {
  static std::vector<long double> table = [] {
    std::vector<long double> t(171, 1.0L);
    for (int i = 1; i < 171; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table.at(n);
}

using LambdaExp = std::array<int, kMaxDim + 1>;
using LambdaPoly = std::map<LambdaExp, long double>;

LambdaPoly multiply(const LambdaPoly& a, const LambdaPoly& b) {
  LambdaPoly r;
  for (auto& [ea, ca] : a)
    for (auto& [eb, cb] : b) {
      LambdaExp e;
      for (int i = 0; i <= kMaxDim; ++i) e[i] = ea[i] + eb[i];
      r[e] += ca * cb;
    }
  return r;
}

}  // namespace

double integrate_poly_simplex(const std::vector<Vec>& verts, double measure, const Polynomial& q) {
  const int d = static_cast<int>(verts.size()) - 1;
  const int n = q.dim();
  if (q.is_zero() || measure == 0.0) return 0.0;
  // powers[j][p] = (sum_i lambda_i v_i[j])^p
  std::vector<std::vector<LambdaPoly>> powers(n);
  int maxdeg = q.degree();
  for (int j = 0; j < n; ++j) {
    LambdaPoly one{{LambdaExp{0, 0, 0, 0}, 1.0L}};
    LambdaPoly lin;
    for (int i = 0; i <= d; ++i) {
      LambdaExp e{0, 0, 0, 0};
      e[i] = 1;
      if (verts[i][j] != 0.0) lin[e] += verts[i][j];
    }
    powers[j].push_back(one);
    for (int p = 1; p <= maxdeg; ++p) powers[j].push_back(multiply(powers[j].back(), lin));
  }
  long double total = 0.0L;
  for (auto& [e, c] : q.terms()) {
    LambdaPoly t{{LambdaExp{0, 0, 0, 0}, static_cast<long double>(c)}};
    for (int j = 0; j < n; ++j)
      if (e[j] > 0) t = multiply(t, powers[j][e[j]]);
    for (auto& [k, coef] : t) {
      int sum = 0;
      long double num = 1.0L;
      for (int i = 0; i <= d; ++i) {
        num *= factorial(k[i]);
        sum += k[i];
      }
      total += coef * num / factorial(sum + d);
    }
  }
  return static_cast<double>(total * factorial(d) * measure);
}

double integrate_poly(const ConvexCell& cell, const Polynomial& q) {
  KahanSum s;
  for (auto& simplex : triangulate(cell)) s.add(integrate_poly_simplex(simplex.vertices, simplex.volume, q));
  return s.value();
}

double integrate_poly(const DelzantPolytope& P, const Polynomial& q) { return integrate_poly(cell_of(P), q); }

double integrate_facet_piece(const DelzantPolytope& P, int facet, const ConvexCell& piece, const Polynomial& q) {
  if (piece.empty()) return 0.0;
  const Facet& f = P.facets()[facet];
  if (P.dim() == 1) return q(to_vec(piece.vertices[0]));
  const RPoint &a = piece.vertices[0], &b = piece.vertices[1];
  Rational along = (b[0] - a[0]) * Rational(-f.normal[1]) + (b[1] - a[1]) * Rational(f.normal[0]);
  along /= Rational(f.normal[0] * f.normal[0] + f.normal[1] * f.normal[1]);
  if (along < 0) along = -along;
  return integrate_poly_simplex({to_vec(a), to_vec(b)}, to_double(along), q);
}

BoundaryIntegral integrate_boundary_poly(const DelzantPolytope& P, const Polynomial& q) {
  BoundaryIntegral out;
  KahanSum s;
  for (int i = 0; i < static_cast<int>(P.facets().size()); ++i) {
    double v = integrate_facet_piece(P, i, facet_cell(P, i), q);
    out.per_facet.push_back(v);
    s.add(v);
  }
  out.total = s.value();
  return out;
}

Vec FanPiece::point(double r, double t) const {
  if (v2.size() == 0) return (1.0 - r) * v1 + r * center;
  return (1.0 - r) * (v1 + t * (v2 - v1)) + r * center;
}

double FanPiece::weight(double r) const { return v2.size() == 0 ? jacobian : jacobian * (1.0 - r); }

std::vector<FanPiece> fan_pieces(const DelzantPolytope& P) {
  std::vector<FanPiece> out;
  Vec c = P.center_d();
  for (int i = 0; i < static_cast<int>(P.facets().size()); ++i) {
    const Facet& f = P.facets()[i];
    FanPiece p;
    p.center = c;
    p.facet = i;
    p.v1 = P.vertices_d()[f.vertices[0]];
    if (P.dim() == 1) {
      p.jacobian = std::abs(c[0] - p.v1[0]);
    } else {
      p.v2 = P.vertices_d()[f.vertices[1]];
      Vec e = p.v2 - p.v1, g = c - p.v1;
      p.jacobian = std::abs(e[0] * g[1] - e[1] * g[0]);
    }
    out.push_back(p);
  }
  return out;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  static std::mutex guard;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(guard);
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<double> xs(n), ws(n);
    for (int i = 0; i < n; ++i) {
      long double z = std::cos(M_PI * (i + 0.75) / (n + 0.5)), dp = 0;
      for (int iter = 0; iter < 100; ++iter) {
        long double p0 = 1, p1 = z;
        for (int k = 2; k <= n; ++k) {
          long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        if (n == 1) p0 = 1;
        dp = n * (z * p1 - p0) / (z * z - 1);
        long double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-19L) break;
      }
      long double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (z * p1 - p0) / (z * z - 1);
      xs[n - 1 - i] = static_cast<double>(z);
      ws[n - 1 - i] = static_cast<double>(2.0L / ((1 - z * z) * dp * dp));
    }
    it = cache.emplace(n, std::make_pair(xs, ws)).first;
  }
  x = it->second.first;
  w = it->second.second;
}

namespace {

std::vector<double> breakpoints(int uniform, int levels, bool both_ends) {
  std::set<double> b;
  for (int i = 0; i <= uniform; ++i) b.insert(static_cast<double>(i) / uniform);
  double h = 1.0 / uniform;
  for (int j = 1; j <= levels; ++j) {
    b.insert(h * std::ldexp(1.0, -j));
    if (both_ends) b.insert(1.0 - h * std::ldexp(1.0, -j));
  }
  return {b.begin(), b.end()};
}

}  // namespace

QuadratureRule interior_rule(const DelzantPolytope& P, const RuleOptions& opts) {
  QuadratureRule rule;
  rule.dim = P.dim();
  rule.options = opts;
  std::vector<double> gx, gw;
  gauss_legendre(opts.points, gx, gw);
  auto rb = breakpoints(opts.uniform, opts.grade_levels, false);
  auto tb = breakpoints(opts.uniform, (opts.grade_levels + 1) / 2, true);
  for (auto& piece : fan_pieces(P)) {
    for (size_t i = 0; i + 1 < rb.size(); ++i) {
      double r0 = rb[i], rh = 0.5 * (rb[i + 1] - rb[i]);
      if (P.dim() == 1) {
        ++rule.cells;
        for (int a = 0; a < opts.points; ++a) {
          double r = r0 + rh * (1 + gx[a]);
          rule.nodes.push_back(piece.point(r, 0));
          rule.weights.push_back(gw[a] * rh * piece.weight(r));
        }
        continue;
      }
      for (size_t j = 0; j + 1 < tb.size(); ++j) {
        double t0 = tb[j], th = 0.5 * (tb[j + 1] - tb[j]);
        ++rule.cells;
        for (int a = 0; a < opts.points; ++a) {
          double r = r0 + rh * (1 + gx[a]);
          for (int b = 0; b < opts.points; ++b) {
            double t = t0 + th * (1 + gx[b]);
            rule.nodes.push_back(piece.point(r, t));
            rule.weights.push_back(gw[a] * gw[b] * rh * th * piece.weight(r));
          }
        }
      }
    }
  }
  rule.exact_degree = P.dim() == 1 ? 2 * opts.points - 1 : 2 * opts.points - 2;
  return rule;
}

QuadratureRule boundary_rule(const DelzantPolytope& P, const RuleOptions& opts) {
  QuadratureRule rule;
  rule.dim = P.dim() - 1;
  rule.options = opts;
  for (int i = 0; i < static_cast<int>(P.facets().size()); ++i) {
    const Facet& f = P.facets()[i];
    if (P.dim() == 1) {
      rule.nodes.push_back(P.vertices_d()[f.vertices[0]]);
      rule.weights.push_back(1.0);
      rule.facet.push_back(i);
      ++rule.cells;
      continue;
    }
    std::vector<double> gx, gw;
    gauss_legendre(opts.points, gx, gw);
    auto tb = breakpoints(opts.uniform, opts.grade_levels, true);
    Vec a = P.vertices_d()[f.vertices[0]], b = P.vertices_d()[f.vertices[1]];
    double len = to_double(f.lattice_measure);
    for (size_t j = 0; j + 1 < tb.size(); ++j) {
      double t0 = tb[j], th = 0.5 * (tb[j + 1] - tb[j]);
      ++rule.cells;
      for (int k = 0; k < opts.points; ++k) {
        double t = t0 + th * (1 + gx[k]);
        rule.nodes.push_back(a + t * (b - a));
        rule.weights.push_back(gw[k] * th * len);
        rule.facet.push_back(i);
      }
    }
  }
  rule.exact_degree = 2 * opts.points - 1;
  return rule;
}

double exactness_residual(const DelzantPolytope& P, const QuadratureRule& rule) {
  const int n = P.dim();
  double worst = 0.0;
  for (int deg = 0; deg <= rule.exact_degree; ++deg) {
    for (int a = 0; a <= deg; ++a) {
      if (n == 1 && a != deg) continue;
      std::vector<int> e = n == 1 ? std::vector<int>{deg} : std::vector<int>{a, deg - a};
      Polynomial m = Polynomial::monomial(n, e);
      double exact = rule.dim == n ? integrate_poly(P, m) : integrate_boundary_poly(P, m).total;
      double approx = rule.integrate_fn([&](const Vec& x) { return m(x); });
      double scale = rule.integrate_fn([&](const Vec& x) { return std::abs(m(x)); });
      worst = std::max(worst, std::abs(approx - exact) / std::max(scale, 1e-300));
    }
  }
  return worst;
}

namespace {

// Gauss-Kronrod 7/15 on [-1,1]; odd indices of the Kronrod abscissae are the Gauss nodes
constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Rule15 {
  std::array<double, 15> x, wk, wg;  // wg zero off the Gauss nodes
};

const Rule15& rule15() {
  static const Rule15 r = [] {
    Rule15 q{};
    for (int i = 0; i < 7; ++i) {
      q.x[i] = -kXgk[i];
      q.x[14 - i] = kXgk[i];
      q.wk[i] = q.wk[14 - i] = kWgk[i];
      q.wg[i] = q.wg[14 - i] = (i % 2 == 1) ? kWg[i / 2] : 0.0;
    }
    q.x[7] = 0.0;
    q.wk[7] = kWgk[7];
    q.wg[7] = kWg[3];
    return q;
  }();
  return r;
}

struct Cell {
  int piece = 0;
  double r0 = 0, r1 = 1, t0 = 0, t1 = 1;
  int dr = 0, dt = 0;
  double value = 0, err = 0, er = 0, et = 0;
  std::size_t id = 0;
};

struct WorseFirst {
  bool operator()(const Cell& a, const Cell& b) const {
    if (a.err != b.err) return a.err < b.err;
    return a.id > b.id;
  }
};

// generic adaptive driver over pieces parametrised by (r,t) in [0,1]^dims
template <class Eval>
NumericResult adaptive(int npieces, int dims, Eval&& eval, double tol, const NumericOptions& opts) {
  NumericResult res;
  std::priority_queue<Cell, std::vector<Cell>, WorseFirst> heap;
  std::vector<Cell> done;
  std::size_t next = 0;
  double total = 0, total_err = 0;
  for (int p = 0; p < npieces; ++p) {
    Cell c;
    c.piece = p;
    c.id = next++;
    eval(c);
    res.evaluations += dims == 2 ? 225 : 15;
    total += c.value;
    total_err += c.err;
    heap.push(c);
  }
  while (!heap.empty()) {
    double target = opts.relative ? tol * std::abs(total) : tol;
    if (total_err <= target) break;
    if (heap.size() + done.size() >= opts.max_cells) break;
    Cell c = heap.top();
    heap.pop();
    if (c.err <= 1e-15 * std::abs(c.value) || c.err == 0.0) {
      done.push_back(c);
      continue;
    }
    bool split_r = dims == 1 || c.er >= c.et;
    if (split_r && c.dr >= opts.max_depth) split_r = false;
    if (!split_r && (dims == 1 || c.dt >= opts.max_depth)) {
      if (c.dr >= opts.max_depth) {
        done.push_back(c);
        continue;
      }
      split_r = true;
    }
    Cell a = c, b = c;
    if (split_r) {
      double m = 0.5 * (c.r0 + c.r1);
      a.r1 = m;
      b.r0 = m;
      a.dr = b.dr = c.dr + 1;
    } else {
      double m = 0.5 * (c.t0 + c.t1);
      a.t1 = m;
      b.t0 = m;
      a.dt = b.dt = c.dt + 1;
    }
    a.id = next++;
    b.id = next++;
    eval(a);
    eval(b);
    res.evaluations += dims == 2 ? 450 : 30;
    total += a.value + b.value - c.value;
    total_err += a.err + b.err - c.err;
    heap.push(a);
    heap.push(b);
  }
  while (!heap.empty()) {
    done.push_back(heap.top());
    heap.pop();
  }
  std::sort(done.begin(), done.end(), [](const Cell& a, const Cell& b) {
    if (a.piece != b.piece) return a.piece < b.piece;
    if (a.r0 != b.r0) return a.r0 < b.r0;
    return a.t0 < b.t0;
  });
  KahanSum v, e;
  for (auto& c : done) {
    v.add(c.value);
    e.add(c.err);
  }
  res.value = v.value();
  res.error = e.value();
  res.cells = done.size();
  double target = opts.relative ? tol * std::abs(res.value) : tol;
  res.converged = res.error <= target;
  return res;
}

}  // namespace

NumericResult integrate_numeric(const DelzantPolytope& P, const ScalarField& f, double tol,
                                const NumericOptions& opts) {
  auto pieces = fan_pieces(P);
  const Rule15& q = rule15();
  const int dims = P.dim();
  auto eval = [&](Cell& c) {
    double rh = 0.5 * (c.r1 - c.r0), rm = 0.5 * (c.r1 + c.r0);
    const FanPiece& fp = pieces[c.piece];
    if (dims == 1) {
      double k = 0, g = 0;
      for (int i = 0; i < 15; ++i) {
        double r = rm + rh * q.x[i];
        double v = f(fp.point(r, 0)) * fp.weight(r);
        k += q.wk[i] * v;
        g += q.wg[i] * v;
      }
      c.value = k * rh;
      c.er = std::abs(k - g) * rh;
      c.et = 0;
      c.err = c.er;
      return;
    }
    double th = 0.5 * (c.t1 - c.t0), tm = 0.5 * (c.t1 + c.t0);
    double kk = 0, gk = 0, kg = 0;
    for (int i = 0; i < 15; ++i) {
      double r = rm + rh * q.x[i];
      double wr = fp.weight(r);
      double rowk = 0, rowg = 0;
      for (int j = 0; j < 15; ++j) {
        double v = f(fp.point(r, tm + th * q.x[j])) * wr;
        rowk += q.wk[j] * v;
        rowg += q.wg[j] * v;
      }
      kk += q.wk[i] * rowk;
      gk += q.wg[i] * rowk;
      kg += q.wk[i] * rowg;
    }
    double s = rh * th;
    c.value = kk * s;
    c.er = std::abs(kk - gk) * s;
    c.et = std::abs(kk - kg) * s;
    c.err = c.er + c.et;
  };
  return adaptive(static_cast<int>(pieces.size()), dims, eval, tol, opts);
}

NumericResult integrate_interval(const std::function<double(double)>& f, double a, double b, double tol,
                                 const NumericOptions& opts) {
  const Rule15& q = rule15();
  auto eval = [&](Cell& c) {
    double lo = a + (b - a) * c.r0, hi = a + (b - a) * c.r1;
    double h = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
    double k = 0, g = 0;
    for (int i = 0; i < 15; ++i) {
      double v = f(m + h * q.x[i]);
      k += q.wk[i] * v;
      g += q.wg[i] * v;
    }
    c.value = k * h;
    c.er = std::abs(k - g) * std::abs(h);
    c.et = 0;
    c.err = c.er;
  };
  return adaptive(1, 1, eval, tol, opts);
}

NumericResult integrate_boundary_numeric(const DelzantPolytope& P, const ScalarField& f, double tol,
                                         const NumericOptions& opts) {
  NumericResult out;
  KahanSum v, e;
  bool ok = true;
  const double share = tol / static_cast<double>(P.facets().size());
  for (const Facet& fc : P.facets()) {
    if (P.dim() == 1) {
      v.add(f(P.vertices_d()[fc.vertices[0]]));
      out.evaluations += 1;
      continue;
    }
    Vec a = P.vertices_d()[fc.vertices[0]], b = P.vertices_d()[fc.vertices[1]];
    double len = to_double(fc.lattice_measure);
    auto g = [&](double t) { return f(a + t * (b - a)) * len; };
    NumericResult r = integrate_interval(g, 0.0, 1.0, share, opts);
    v.add(r.value);
    e.add(r.error);
    ok = ok && r.converged;
    out.cells += r.cells;
    out.evaluations += r.evaluations;
  }
  out.value = v.value();
  out.error = e.value();
  out.converged = ok;
  return out;
}

}  // namespace toric
