#include "toric/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "toric/error.hpp"

namespace toric {

double to_double(const Rational& r) { return r.convert_to<double>(); }

Vec to_vec(const RPoint& p) {
  Vec v(static_cast<int>(p.size()));
  for (size_t i = 0; i < p.size(); ++i) v[static_cast<int>(i)] = to_double(p[i]);
  return v;
}

Rational exact_rational(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "non-finite number");
  if (v == 0.0) return Rational(0);
  int e = 0;
  double m = std::frexp(v, &e);  // v = m 2^e, 0.5 <= |m| < 1
  auto mant = static_cast<long long>(std::ldexp(m, 53));
  e -= 53;
  boost::multiprecision::cpp_int num = mant, den = 1;
  if (e > 0)
    num <<= e;
  else
    den <<= -e;
  return Rational(num, den);
}

namespace {

std::string point_str(const RPoint& p) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

Rational form(const IntVec& nu, const RPoint& x) {
  Rational s = 0;
  for (size_t i = 0; i < nu.size(); ++i) s += Rational(nu[i]) * x[i];
  return s;
}

Rational dot(const RPoint& a, const RPoint& b) {
  Rational s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Rational cross(const RPoint& a, const RPoint& b) { return a[0] * b[1] - a[1] * b[0]; }

RPoint sub(const RPoint& a, const RPoint& b) {
  RPoint r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Rational polygon_area(const std::vector<RPoint>& v) {
  Rational a = 0;
  for (size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
  return a / 2;
}

// sort points counter-clockwise around an interior point, exactly
void sort_ccw(std::vector<RPoint>& pts) {
  RPoint c(2, Rational(0));
  for (auto& p : pts) {
    c[0] += p[0];
    c[1] += p[1];
  }
  c[0] /= static_cast<long long>(pts.size());
  c[1] /= static_cast<long long>(pts.size());
  auto half = [&](const RPoint& d) { return d[1] > 0 || (d[1] == 0 && d[0] > 0) ? 0 : 1; };
  std::sort(pts.begin(), pts.end(), [&](const RPoint& p, const RPoint& q) {
    RPoint a = sub(p, c), b = sub(q, c);
    int ha = half(a), hb = half(b);
    if (ha != hb) return ha < hb;
    return cross(a, b) > 0;
  });
}

long long gcd_all(const IntVec& v) {
  long long g = 0;
  for (long long x : v) g = std::gcd(g, x < 0 ? -x : x);
  return g;
}

bool bounded(int n, const std::vector<FacetSpec>& f) {
  if (n == 1) {
    bool pos = false, neg = false;
    for (auto& s : f) {
      pos |= s.normal[0] > 0;
      neg |= s.normal[0] < 0;
    }
    return pos && neg;
  }
  for (auto& s : f) {
    for (int sign : {1, -1}) {
      long long d0 = -sign * s.normal[1], d1 = sign * s.normal[0];
      bool all = true;
      for (auto& t : f)
        if (t.normal[0] * d0 + t.normal[1] * d1 < 0) {
          all = false;
          break;
        }
      if (all) return false;
    }
  }
  return true;
}

}  // namespace

DelzantPolytope DelzantPolytope::build(const std::vector<FacetSpec>& input, std::string label) {
  if (input.empty()) throw Error(ErrorKind::InvalidInput, "no facets");
  const int n = static_cast<int>(input[0].normal.size());
  if (n < 1 || n > 2)
    throw Error(ErrorKind::InvalidInput, "only dimensions 1 and 2 are supported, got " + std::to_string(n));
  if (static_cast<int>(input.size()) < n + 1)
    throw Error(ErrorKind::InvalidInput, "need at least n+1 facets");

  std::vector<FacetSpec> specs;
  for (auto& s : input) {
    if (static_cast<int>(s.normal.size()) != n) throw Error(ErrorKind::InvalidInput, "inconsistent normal length");
    long long g = gcd_all(s.normal);
    if (g == 0) throw Error(ErrorKind::InvalidInput, "zero facet normal");
    FacetSpec t = s;
    for (auto& x : t.normal) x /= g;
    t.offset /= g;
    specs.push_back(t);
  }
  if (!bounded(n, specs)) throw Error(ErrorKind::Unbounded, "facet normals do not positively span");

  auto feasible = [&](const RPoint& x) {
    for (auto& s : specs)
      if (form(s.normal, x) < s.offset) return false;
    return true;
  };

  std::vector<RPoint> verts;
  if (n == 1) {
    for (auto& s : specs) {
      RPoint x{s.offset / Rational(s.normal[0])};
      if (feasible(x)) verts.push_back(x);
    }
  } else {
    for (size_t i = 0; i < specs.size(); ++i)
      for (size_t j = i + 1; j < specs.size(); ++j) {
        const auto &a = specs[i].normal, &b = specs[j].normal;
        long long det = a[0] * b[1] - a[1] * b[0];
        if (det == 0) continue;
        Rational ci = specs[i].offset, cj = specs[j].offset;
        RPoint x{(ci * b[1] - cj * a[1]) / det, (a[0] * cj - b[0] * ci) / det};
        if (feasible(x)) verts.push_back(x);
      }
  }
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  if (static_cast<int>(verts.size()) < n + 1) throw Error(ErrorKind::EmptyInterior, "polytope has empty interior");
  if (n == 2) {
    sort_ccw(verts);
    if (polygon_area(verts) <= 0) throw Error(ErrorKind::EmptyInterior, "polytope has empty interior");
  }

  DelzantPolytope P;
  P.dim_ = n;
  P.label_ = std::move(label);
  P.vertices_ = verts;
  for (size_t i = 0; i < specs.size(); ++i) {
    std::vector<int> on;
    for (size_t v = 0; v < verts.size(); ++v)
      if (form(specs[i].normal, verts[v]) == specs[i].offset) on.push_back(static_cast<int>(v));
    bool duplicate = false;
    for (auto& f : P.facets_)
      if (f.normal == specs[i].normal && f.offset == specs[i].offset) duplicate = true;
    if (static_cast<int>(on.size()) < n || duplicate) {
      P.redundant_.push_back(input[i]);
      P.redundant_index_.push_back(static_cast<int>(i));
      continue;
    }
    Facet f;
    f.normal = specs[i].normal;
    f.offset = specs[i].offset;
    f.input_index = static_cast<int>(i);
    f.normal_d = Vec(n);
    double norm2 = 0;
    for (int k = 0; k < n; ++k) {
      f.normal_d[k] = static_cast<double>(f.normal[k]);
      norm2 += f.normal_d[k] * f.normal_d[k];
    }
    f.offset_d = to_double(f.offset);
    f.lattice_scale = 1.0 / std::sqrt(norm2);
    if (n == 2) {
      // consecutive ccw pair
      int m = static_cast<int>(verts.size());
      int a = on[0], b = on[1];
      if ((a + 1) % m == b)
        f.vertices = {a, b};
      else
        f.vertices = {b, a};
      RPoint e = sub(verts[f.vertices[1]], verts[f.vertices[0]]);
      RPoint dir{Rational(-f.normal[1]), Rational(f.normal[0])};
      f.lattice_measure = dot(e, dir) / Rational(f.normal[0] * f.normal[0] + f.normal[1] * f.normal[1]);
      if (f.lattice_measure < 0) f.lattice_measure = -f.lattice_measure;
    } else {
      f.vertices = on;
      f.lattice_measure = 1;
    }
    P.facets_.push_back(std::move(f));
  }

  P.vertex_facets_.assign(verts.size(), {});
  for (size_t i = 0; i < P.facets_.size(); ++i)
    for (int v : P.facets_[i].vertices) P.vertex_facets_[v].push_back(static_cast<int>(i));
  for (size_t v = 0; v < verts.size(); ++v) {
    const auto& inc = P.vertex_facets_[v];
    if (static_cast<int>(inc.size()) != n)
      throw Error(ErrorKind::NotDelzant, "vertex " + point_str(verts[v]) + " is not simple");
    long long det;
    if (n == 1) {
      det = P.facets_[inc[0]].normal[0];
    } else {
      const auto &a = P.facets_[inc[0]].normal, &b = P.facets_[inc[1]].normal;
      det = a[0] * b[1] - a[1] * b[0];
    }
    if (det != 1 && det != -1)
      throw Error(ErrorKind::NotDelzant,
                  "vertex " + point_str(verts[v]) + " has normal determinant " + std::to_string(det));
  }
  for (size_t v = 0; v < verts.size(); ++v)
    if (n == 2) P.adjacency_.emplace_back(P.vertex_facets_[v][0], P.vertex_facets_[v][1]);

  Rational vol = 0, bd = 0;
  for (auto& f : P.facets_) {
    vol -= f.offset * f.lattice_measure;
    bd += f.lattice_measure;
  }
  P.volume_ = vol / n;
  P.boundary_ = bd;
  P.volume_d_ = to_double(P.volume_);
  P.boundary_d_ = to_double(P.boundary_);
  P.center_.assign(n, Rational(0));
  for (auto& v : verts)
    for (int k = 0; k < n; ++k) P.center_[k] += v[k];
  for (int k = 0; k < n; ++k) P.center_[k] /= static_cast<long long>(verts.size());
  for (auto& v : verts) P.vertices_d_.push_back(to_vec(v));
  return P;
}

bool DelzantPolytope::contains(const RPoint& x) const {
  for (auto& f : facets_)
    if (form(f.normal, x) < f.offset) return false;
  return true;
}

bool DelzantPolytope::interior(const Vec& x) const {
  for (auto& f : facets_)
    if (!(f.value(x) > 0)) return false;
  return true;
}

bool DelzantPolytope::same_as(const DelzantPolytope& o) const {
  if (this == &o) return true;
  if (dim_ != o.dim_ || facets_.size() != o.facets_.size()) return false;
  for (size_t i = 0; i < facets_.size(); ++i)
    if (facets_[i].normal != o.facets_[i].normal || facets_[i].offset != o.facets_[i].offset) return false;
  return true;
}

PolytopePtr build_polytope(const std::vector<FacetSpec>& facets, std::string label) {
  return std::make_shared<const DelzantPolytope>(DelzantPolytope::build(facets, std::move(label)));
}

PolytopePtr blowup_polytope(double s, double eps, double a, double b) {
  if (!(s > 0) || !(a > 0) || !(b > 0) || !(eps != 0) || !std::isfinite(eps))
    throw Error(ErrorKind::InvalidInput, "blowup parameters need s > 0, a > 0, b > 0, eps != 0");
  Rational S = exact_rational(s);
  Rational da = exact_rational(eps * eps * a), db = exact_rational(eps * eps * b);
  if (S - 2 * da <= 0 || S - 2 * db <= 0 || S - da - db <= 0) {
    std::ostringstream os;
    os << "corner cuts overlap: depths " << eps * eps * a << " and " << eps * eps * b << " on side " << s;
    throw Error(ErrorKind::InvalidTruncation, os.str());
  }
  std::vector<FacetSpec> f{
      {{0, 1}, Rational(0)},          // y >= 0
      {{1, 0}, Rational(0)},          // x >= 0
      {{0, -1}, -S},                  // y <= s
      {{-1, 0}, -S},                  // x <= s
      {{1, 1}, da},                   // corner (0,0)
      {{-1, 1}, da - S},              // corner (s,0)
      {{1, -1}, db - S},              // corner (0,s)
      {{-1, -1}, db - 2 * S},         // corner (s,s)
  };
  std::ostringstream label;
  label << "blowup(" << s << "," << eps << "," << a << "," << b << ")";
  return build_polytope(f, label.str());
}

PolytopePtr unit_interval() { return build_polytope({{{1}, 0}, {{-1}, -1}}, "interval"); }

PolytopePtr unit_square() {
  return build_polytope({{{1, 0}, 0}, {{0, 1}, 0}, {{-1, 0}, -1}, {{0, -1}, -1}}, "unit_square");
}

PolytopePtr standard_simplex() {
  return build_polytope({{{1, 0}, 0}, {{0, 1}, 0}, {{-1, -1}, -1}}, "standard_simplex");
}

PolytopePtr hirzebruch_trapezoid() {
  return build_polytope({{{1, 0}, 0}, {{0, 1}, 0}, {{0, -1}, -1}, {{-1, -1}, -2}}, "hirzebruch_trapezoid");
}

PolytopePtr named_polytope(const std::string& name) {
  if (name == "interval") return unit_interval();
  if (name == "unit_square") return unit_square();
  if (name == "standard_simplex") return standard_simplex();
  if (name == "hirzebruch_trapezoid") return hirzebruch_trapezoid();
  throw Error(ErrorKind::InvalidInput, "unknown polytope name '" + name + "'");
}

PolytopePtr unimodular_image(const DelzantPolytope& P, const std::vector<IntVec>& M, const RPoint& t) {
  const int n = P.dim();
  // inverse transpose of a unimodular integer matrix
  std::vector<IntVec> MiT(n, IntVec(n));
  if (n == 1) {
    MiT[0][0] = M[0][0];
  } else {
    long long det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
    if (det != 1 && det != -1) throw Error(ErrorKind::InvalidInput, "matrix is not unimodular");
    // inverse = adj / det ; transpose it
    MiT[0][0] = M[1][1] * det;
    MiT[0][1] = -M[1][0] * det;
    MiT[1][0] = -M[0][1] * det;
    MiT[1][1] = M[0][0] * det;
  }
  std::vector<FacetSpec> out;
  for (auto& f : P.facets()) {
    FacetSpec s;
    s.normal.assign(n, 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s.normal[i] += MiT[i][j] * f.normal[j];
    s.offset = f.offset + form(s.normal, t);
    out.push_back(s);
  }
  return build_polytope(out, P.label() + "'");
}

PolytopePtr scaled_polytope(const DelzantPolytope& P, const Rational& lambda) {
  std::vector<FacetSpec> out;
  for (auto& f : P.facets()) out.push_back({f.normal, f.offset * lambda});
  return build_polytope(out, P.label());
}

ConvexCell cell_of(const DelzantPolytope& P) { return {P.dim(), P.vertices()}; }

ConvexCell facet_cell(const DelzantPolytope& P, int facet) {
  ConvexCell c;
  c.dim = P.dim() - 1;
  for (int v : P.facets()[facet].vertices) c.vertices.push_back(P.vertices()[v]);
  return c;
}

ConvexCell clip(const ConvexCell& cell, const RPoint& alpha, const Rational& beta) {
  ConvexCell out;
  out.dim = cell.dim;
  if (cell.empty()) return out;
  auto side = [&](const RPoint& p) { return dot(alpha, p) - beta; };
  auto cut = [&](const RPoint& p, const RPoint& q, const Rational& sp, const Rational& sq) {
    Rational lam = sp / (sp - sq);
    RPoint r(p.size());
    for (size_t i = 0; i < p.size(); ++i) r[i] = p[i] + (q[i] - p[i]) * lam;
    return r;
  };
  const auto& v = cell.vertices;
  if (cell.dim == 0) {
    if (side(v[0]) >= 0) out.vertices = v;
    return out;
  }
  if (cell.dim == 1) {
    Rational s0 = side(v[0]), s1 = side(v[1]);
    if (s0 < 0 && s1 < 0) return out;
    RPoint a = v[0], b = v[1];
    if (s0 < 0) a = cut(v[0], v[1], s0, s1);
    if (s1 < 0) b = cut(v[0], v[1], s0, s1);
    if (a == b) return out;
    out.vertices = {a, b};
    return out;
  }
  std::vector<RPoint> res;
  size_t m = v.size();
  for (size_t i = 0; i < m; ++i) {
    const RPoint &p = v[i], &q = v[(i + 1) % m];
    Rational sp = side(p), sq = side(q);
    if (sp >= 0) res.push_back(p);
    if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) res.push_back(cut(p, q, sp, sq));
  }
  std::vector<RPoint> clean;
  for (auto& p : res)
    if (clean.empty() || clean.back() != p) clean.push_back(p);
  while (clean.size() > 1 && clean.front() == clean.back()) clean.pop_back();
  if (clean.size() < 3 || polygon_area(clean) == 0) return out;
  out.vertices = clean;
  return out;
}

Rational cell_measure(const ConvexCell& cell) {
  if (cell.empty()) return 0;
  if (cell.dim == 0) return 1;
  if (cell.dim == 1) {
    if (cell.vertices[0].size() != 1) throw Error(ErrorKind::InvalidInput, "embedded segment has no rational length");
    Rational d = cell.vertices[1][0] - cell.vertices[0][0];
    return d < 0 ? Rational(-d) : d;
  }
  return polygon_area(cell.vertices);
}

std::vector<Simplex> triangulate(const ConvexCell& cell) {
  std::vector<Simplex> out;
  if (cell.empty()) return out;
  if (cell.dim < 2) {
    Simplex s;
    for (auto& p : cell.vertices) s.vertices.push_back(to_vec(p));
    if (cell.dim == 0)
      s.volume = 1.0;
    else
      s.volume = (s.vertices[1] - s.vertices[0]).norm();
    out.push_back(s);
    return out;
  }
  const auto& v = cell.vertices;
  for (size_t i = 1; i + 1 < v.size(); ++i) {
    Simplex s;
    s.vertices = {to_vec(v[0]), to_vec(v[i]), to_vec(v[i + 1])};
    s.volume = to_double(cross(sub(v[i], v[0]), sub(v[i + 1], v[0])) / 2);
    out.push_back(s);
  }
  return out;
}

std::vector<Simplex> triangulate(const DelzantPolytope& P) { return triangulate(cell_of(P)); }

}  // namespace toric
