#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "toric/canonical.hpp"
#include "toric/polytope.hpp"
#include "toric/potential.hpp"

namespace toric::io {

// insertion-ordered, so reports come out with a stable key order
using Json = nlohmann::ordered_json;

Json read_json_file(const std::filesystem::path& path);
Json parse_json(const std::string& text);

// accepted forms:
//   "unit_square" (any named polytope)
//   {"name": "hirzebruch_trapezoid"}
//   {"blowup": {"s": 3, "eps": 0.5, "a": 1, "b": 2}}
//   {"facets": [{"normal": [1, 0], "offset": 0}, ...], "label": "..."}  offsets may be "p/q" strings
PolytopePtr polytope_from_json(const Json& j);
Json polytope_to_json(const DelzantPolytope& P);

// [{"exponent": [1, 1], "coeff": 0.1}, ...]
Polynomial polynomial_from_json(int dim, const Json& j);
Json polynomial_to_json(const Polynomial& p);

// null -> Guillemin potential; otherwise {"perturbation": [...]}
SymplecticPotential potential_from_json(const PolytopePtr& P, const Json& j);
Json potential_to_json(const SymplecticPotential& u);

// null or "full" -> full torus; "trivial"; {"directions": [[0, 1]]}
TorusSubgroup group_from_json(int dim, const Json& j);
Json group_to_json(const TorusSubgroup& G);

// {"grad": [...], "c0": x}
AffineFunction affine_from_json(const Json& j);
Json affine_to_json(const AffineFunction& f);
Json vec_to_json(const Vec& v);

// shortest text that reads back to the same double
std::string format_number(double v);

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> row);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  // RFC 4180: CRLF records, fields quoted when they hold commas, quotes or line breaks
  std::string csv() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_field(const std::string& s);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_csv(const std::filesystem::path& path, const Table& t);
// two columns, tab separated, one header line starting with '#'
void write_tsv(const std::filesystem::path& path, const std::string& xname, const std::string& yname,
               const std::vector<std::pair<double, double>>& data);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace toric::io
