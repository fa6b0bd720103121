#include "toric/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "toric/error.hpp"

namespace toric::io {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidInput, what); }

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where + ": missing \"" + key + "\"");
  return j.at(key);
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) bad(where + ": expected a number");
  return j.get<double>();
}

Rational rational(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number()) return exact_rational(j.get<double>());
  if (j.is_string()) {
    try {
      return Rational(j.get<std::string>());
    } catch (const std::exception&) {
      bad(where + ": cannot read rational '" + j.get<std::string>() + "'");
    }
  }
  bad(where + ": expected a number or a \"p/q\" string");
}

std::string rational_text(const Rational& r) { return r.str(); }

}  // namespace

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

PolytopePtr polytope_from_json(const Json& j) {
  if (j.is_string()) return named_polytope(j.get<std::string>());
  if (!j.is_object()) bad("polytope: expected a name or an object");
  if (j.contains("name")) return named_polytope(j.at("name").get<std::string>());
  if (j.contains("blowup")) {
    const Json& b = j.at("blowup");
    return blowup_polytope(number(require(b, "s", "blowup"), "blowup.s"), number(require(b, "eps", "blowup"), "blowup.eps"),
                           number(require(b, "a", "blowup"), "blowup.a"), number(require(b, "b", "blowup"), "blowup.b"));
  }
  if (j.contains("facets")) {
    const Json& fs = j.at("facets");
    if (!fs.is_array() || fs.empty()) bad("polytope.facets: expected a non-empty array");
    std::vector<FacetSpec> specs;
    for (size_t i = 0; i < fs.size(); ++i) {
      std::string where = "polytope.facets[" + std::to_string(i) + "]";
      const Json& nu = require(fs[i], "normal", where);
      if (!nu.is_array() || nu.empty()) bad(where + ".normal: expected an integer array");
      FacetSpec f;
      for (auto& c : nu) {
        if (!c.is_number_integer()) bad(where + ".normal: entries must be integers");
        f.normal.push_back(c.get<long long>());
      }
      f.offset = rational(require(fs[i], "offset", where), where + ".offset");
      specs.push_back(std::move(f));
    }
    return build_polytope(specs, j.value("label", std::string("custom")));
  }
  bad("polytope: need one of \"name\", \"blowup\", \"facets\"");
}

Json polytope_to_json(const DelzantPolytope& P) {
  Json j;
  j["label"] = P.label();
  j["dim"] = P.dim();
  Json facets = Json::array();
  for (auto& f : P.facets()) {
    Json jf;
    jf["normal"] = f.normal;
    jf["offset"] = rational_text(f.offset);
    facets.push_back(jf);
  }
  j["facets"] = facets;
  Json verts = Json::array();
  for (auto& v : P.vertices()) {
    Json jv = Json::array();
    for (auto& c : v) jv.push_back(rational_text(c));
    verts.push_back(jv);
  }
  j["vertices"] = verts;
  j["volume"] = P.volume();
  j["volume_exact"] = rational_text(P.volume_exact());
  j["boundary_measure"] = to_double(P.boundary_measure_exact());
  j["boundary_measure_exact"] = rational_text(P.boundary_measure_exact());
  return j;
}

Polynomial polynomial_from_json(int dim, const Json& j) {
  Polynomial p = Polynomial::constant(dim, 0.0);
  if (j.is_null()) return p;
  if (!j.is_array()) bad("perturbation: expected an array of terms");
  for (size_t i = 0; i < j.size(); ++i) {
    std::string where = "perturbation[" + std::to_string(i) + "]";
    const Json& e = require(j[i], "exponent", where);
    if (!e.is_array() || static_cast<int>(e.size()) != dim) bad(where + ".exponent: expected " + std::to_string(dim) + " entries");
    std::vector<int> ex;
    for (auto& c : e) {
      if (!c.is_number_integer() || c.get<int>() < 0) bad(where + ".exponent: entries must be non-negative integers");
      ex.push_back(c.get<int>());
    }
    p += Polynomial::monomial(dim, ex, number(require(j[i], "coeff", where), where + ".coeff"));
  }
  return p;
}

Json polynomial_to_json(const Polynomial& p) {
  Json out = Json::array();
  for (auto& [e, c] : p.terms()) {
    Json t;
    t["exponent"] = std::vector<int>(e.begin(), e.begin() + p.dim());
    t["coeff"] = c;
    out.push_back(t);
  }
  return out;
}

SymplecticPotential potential_from_json(const PolytopePtr& P, const Json& j) {
  if (j.is_null()) return SymplecticPotential(P);
  if (!j.is_object()) bad("potential: expected an object");
  return SymplecticPotential(P, polynomial_from_json(P->dim(), j.value("perturbation", Json())));
}

Json potential_to_json(const SymplecticPotential& u) {
  Json j;
  j["perturbation"] = polynomial_to_json(u.perturbation());
  return j;
}

TorusSubgroup group_from_json(int dim, const Json& j) {
  if (j.is_null()) return TorusSubgroup::full(dim);
  if (j.is_string()) {
    if (j == "full") return TorusSubgroup::full(dim);
    if (j == "trivial") return TorusSubgroup::trivial(dim);
    bad("group: unknown name '" + j.get<std::string>() + "'");
  }
  const Json& d = require(j, "directions", "group");
  if (!d.is_array()) bad("group.directions: expected an array");
  std::vector<IntVec> dirs;
  for (auto& v : d) {
    if (!v.is_array() || static_cast<int>(v.size()) != dim) bad("group.directions: each entry needs " + std::to_string(dim) + " integers");
    IntVec w;
    for (auto& c : v) {
      if (!c.is_number_integer()) bad("group.directions: entries must be integers");
      w.push_back(c.get<long long>());
    }
    dirs.push_back(w);
  }
  return TorusSubgroup(dim, dirs);
}

Json group_to_json(const TorusSubgroup& G) {
  Json j;
  j["directions"] = G.directions();
  return j;
}

AffineFunction affine_from_json(const Json& j) {
  const Json& g = require(j, "grad", "affine function");
  if (!g.is_array() || g.empty() || static_cast<int>(g.size()) > kMaxDim) bad("affine function: bad gradient");
  Vec w(static_cast<int>(g.size()));
  for (size_t i = 0; i < g.size(); ++i) w[static_cast<int>(i)] = number(g[i], "affine function.grad");
  return AffineFunction(w, j.contains("c0") ? number(j.at("c0"), "affine function.c0") : 0.0);
}

Json affine_to_json(const AffineFunction& f) {
  Json j;
  j["grad"] = vec_to_json(f.grad);
  j["c0"] = f.c0;
  return j;
}

Json vec_to_json(const Vec& v) {
  Json j = Json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw Error(ErrorKind::InvalidInput, "table row has the wrong number of fields");
  rows_.push_back(std::move(row));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string Table::csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_field(r[i]);
    out += "\r\n";
  };
  line(header_);
  for (auto& r : rows_) line(r);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
  out << text;
}

void write_csv(const std::filesystem::path& path, const Table& t) { write_text(path, t.csv()); }

void write_tsv(const std::filesystem::path& path, const std::string& xname, const std::string& yname,
               const std::vector<std::pair<double, double>>& data) {
  std::string s = "# " + xname + "\t" + yname + "\n";
  for (auto& [x, y] : data) s += format_number(x) + "\t" + format_number(y) + "\n";
  write_text(path, s);
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace toric::io
