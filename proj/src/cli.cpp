#include "toric/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "toric/canonical.hpp"
#include "toric/error.hpp"
#include "toric/kenergy.hpp"
#include "toric/parallel.hpp"
#include "toric/quadrature.hpp"
#include "toric/quantization.hpp"

namespace toric::cli {

using io::Json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidInput, what); }

const Json& section(const Json& spec, const char* key) {
  static const Json empty = Json::object();
  if (!spec.contains(key)) return empty;
  const Json& s = spec.at(key);
  if (!s.is_object()) bad(std::string("\"") + key + "\" must be an object");
  return s;
}

double get_double(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) bad(std::string("\"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

int get_int(const Json& j, const char* key, int fallback, int lo = 0) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) bad(std::string("\"") + key + "\" must be an integer");
  int v = j.at(key).get<int>();
  if (v < lo) bad(std::string("\"") + key + "\" must be at least " + std::to_string(lo));
  return v;
}

bool get_bool(const Json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) bad(std::string("\"") + key + "\" must be true or false");
  return j.at(key).get<bool>();
}

std::vector<int> get_ints(const Json& j, const char* key, std::vector<int> fallback) {
  if (!j.contains(key)) return fallback;
  const Json& a = j.at(key);
  if (!a.is_array() || a.empty()) bad(std::string("\"") + key + "\" must be a non-empty integer array");
  std::vector<int> out;
  for (auto& v : a) {
    if (!v.is_number_integer() || v.get<int>() < 1) bad(std::string("\"") + key + "\" entries must be positive integers");
    out.push_back(v.get<int>());
  }
  return out;
}

PolytopePtr polytope_of(const Json& spec) {
  if (!spec.contains("polytope")) bad("config needs a \"polytope\"");
  return io::polytope_from_json(spec.at("polytope"));
}

TorusSubgroup group_of(const Json& spec, int dim, const char* fallback) {
  return io::group_from_json(dim, spec.contains("group") ? spec.at("group") : Json(fallback));
}

void check_tolerances(const Json& j, const std::string& path) {
  if (j.is_object()) {
    for (auto& [k, v] : j.items()) {
      if (k.find("tol") != std::string::npos && !(v.is_number() && v.get<double>() > 0))
        bad("\"" + path + k + "\" must be a positive number");
      check_tolerances(v, path + k + ".");
    }
  } else if (j.is_array()) {
    for (auto& v : j) check_tolerances(v, path);
  }
}

Json report_json(const AsymptoticReport& r) {
  Json j;
  j["name"] = r.name;
  j["provenance"] = r.provenance;
  j["target"] = r.target;
  j["fitted_limit"] = r.fitted_limit;
  j["fit_residual"] = r.fit_residual;
  j["rate"] = r.rate;
  j["tolerance"] = r.tolerance;
  j["decreasing"] = r.decreasing;
  j["passed"] = r.passed;
  Json e = Json::array();
  for (auto& x : r.entries) {
    Json row;
    row["k"] = x.k;
    row["N_k"] = x.N;
    row["measured"] = x.measured;
    row["target"] = x.target;
    row["ratio"] = x.ratio;
    e.push_back(row);
  }
  j["entries"] = e;
  return j;
}

void write_report_table(const fs::path& out, const AsymptoticReport& r) {
  io::Table t({"k", "N_k", "measured", "target", "ratio"});
  std::vector<std::pair<double, double>> plot;
  for (auto& x : r.entries) {
    t.add_row({std::to_string(x.k), std::to_string(x.N), io::format_number(x.measured), io::format_number(x.target),
               io::format_number(x.ratio)});
    plot.emplace_back(x.k, x.ratio);
  }
  io::write_csv(out / (r.name + ".csv"), t);
  io::write_tsv(out / (r.name + ".tsv"), "k", "ratio", plot);
}

Json energy_json(const EnergyReport& r) {
  Json j;
  j["kenergy"] = r.energy;
  j["calabi"] = r.calabi;
  j["Sbar"] = r.Sbar;
  j["extremal_affine"] = io::affine_to_json(r.A_G);
  j["ibp_defect"] = r.ibp_defect;
  j["base_error"] = r.base_error;
  j["base_converged"] = r.base_converged;
  j["nodes"] = r.nodes;
  return j;
}

Json chen_json(const ChenResult& c) {
  Json j;
  j["distance"] = c.distance;
  j["calabi1"] = c.calabi1;
  j["energy0"] = c.energy0;
  j["energy1"] = c.energy1;
  j["margin"] = c.margin;
  return j;
}

// L_Sbar(x_i - mean x_i) for each coordinate
std::vector<double> coordinate_futaki(const DelzantPolytope& P) {
  const int n = P.dim();
  AffineFunction Sb = AffineFunction::constant(n, average_scalar(P));
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    Polynomial xi = Polynomial::variable(n, i);
    double mean = integrate_poly(P, xi) / P.volume();
    out.push_back(futaki_linear(P, Sb, xi - Polynomial::constant(n, mean)));
  }
  return out;
}

ScanOptions scan_options(const Json& s) {
  ScanOptions o;
  o.radius = get_int(s, "radius", o.radius, 1);
  o.offsets = get_int(s, "offsets", o.offsets, 1);
  o.tol = get_double(s, "tol", o.tol);
  return o;
}

Json stability_json(const StabilityReport& r) {
  Json j;
  j["creases"] = r.entries.size();
  j["skipped"] = r.skipped;
  j["worst_normalized"] = r.worst;
  j["destabilizer_found"] = r.destabilizer_found;
  j["tol"] = r.tol;
  return j;
}

void write_creases(const fs::path& out, const StabilityReport& r) {
  io::Table t({"normal", "offset", "value", "normalization", "normalized", "skipped"});
  for (auto& e : r.entries) {
    std::string nu;
    for (int i = 0; i < e.normal.size(); ++i) nu += (i ? " " : "") + io::format_number(e.normal[i]);
    t.add_row({nu, io::format_number(e.offset), io::format_number(e.value), io::format_number(e.normalization),
               io::format_number(e.normalized), e.skipped ? "1" : "0"});
  }
  io::write_csv(out / "creases.csv", t);
}

SuiteOptions suite_options(const Json& q) {
  SuiteOptions o;
  o.ks = get_ints(q, "ks", o.ks);
  if (!std::is_sorted(o.ks.begin(), o.ks.end())) bad("\"ks\" must be ascending");
  o.quant.points = get_int(q, "points", o.quant.points, 1);
  o.quant.uniform = get_int(q, "uniform", o.quant.uniform, 0);
  o.quant.path_nodes = get_int(q, "path_nodes", o.quant.path_nodes, 1);
  o.distance_tol = get_double(q, "distance_tol", o.distance_tol);
  o.energy_tol = get_double(q, "energy_tol", o.energy_tol);
  o.bergman_tol = get_double(q, "bergman_tol", o.bergman_tol);
  return o;
}

// ---- commands ----

Json cmd_extremal(const JobConfig& job, const fs::path&) {
  auto P = polytope_of(job.spec);
  ExtremalData ext = extremal_affine(*P);
  Json r;
  r["polytope"] = io::polytope_to_json(*P);
  r["Sbar"] = ext.Sbar;
  r["extremal_affine"] = io::affine_to_json(ext.A);
  r["residual"] = ext.residual;
  r["residuals"] = ext.residuals;
  if (P->dim() == 2) {
    r["x_gradient_vanishes"] = std::abs(ext.A.grad[0]) <= 1e-10;
    r["y_gradient_vanishes"] = std::abs(ext.A.grad[1]) <= 1e-10;
  }
  return r;
}

Json cmd_futaki(const JobConfig& job, const fs::path&) {
  auto P = polytope_of(job.spec);
  const int n = P->dim();
  SymplecticPotential u = io::potential_from_json(P, job.spec.value("potential", Json()));
  TorusSubgroup G = group_of(job.spec, n, "trivial");
  std::vector<double> L = coordinate_futaki(*P);
  Json r;
  r["Sbar"] = average_scalar(*P);
  Json rows = Json::array();
  bool nonzero = false;
  for (int i = 0; i < n; ++i) {
    Vec w = Vec::Zero(n);
    w[i] = 1.0;
    Json row;
    row["direction"] = io::vec_to_json(w);
    row["linear"] = L[i];
    row["character"] = futaki_character(u, G, AffineFunction(w, 0.0));
    rows.push_back(row);
    nonzero = nonzero || std::abs(L[i]) > 1e-8;
  }
  r["group"] = io::group_to_json(G);
  r["coordinates"] = rows;
  if (job.spec.contains("function")) {
    AffineFunction f = io::affine_from_json(job.spec.at("function"));
    if (f.dim() != n) bad("\"function\" has the wrong dimension");
    double mean = integrate_poly(*P, f.polynomial()) / P->volume();
    Json fj;
    fj["function"] = io::affine_to_json(f);
    fj["linear"] = futaki_linear(*P, AffineFunction::constant(n, average_scalar(*P)),
                                 f.polynomial() - Polynomial::constant(n, mean));
    fj["character"] = futaki_character(u, G, f);
    r["custom"] = fj;
  }
  r["futaki_nonzero"] = nonzero;
  return r;
}

Json cmd_stability(const JobConfig& job, const fs::path& out) {
  auto P = polytope_of(job.spec);
  StabilityReport rep = stability_scan(*P, scan_options(section(job.spec, "scan")));
  write_creases(out, rep);
  Json r = stability_json(rep);
  r["polytope"] = P->label();
  return r;
}

Json cmd_energy(const JobConfig& job, const fs::path&) {
  auto P = polytope_of(job.spec);
  TorusSubgroup G = group_of(job.spec, P->dim(), "full");
  SymplecticPotential u = io::potential_from_json(P, job.spec.value("potential", Json()));
  auto ctx = energy_context(P, G);
  Json r = energy_json(ctx->report(u));
  r["group"] = io::group_to_json(G);
  if (job.spec.contains("potential1")) {
    SymplecticPotential u1 = io::potential_from_json(P, job.spec.at("potential1"));
    r["chen"] = chen_json(ctx->chen(u, u1));
    r["potential1"] = energy_json(ctx->report(u1));
  }
  return r;
}

Json cmd_quantize(const JobConfig& job, const fs::path& out) {
  auto P = polytope_of(job.spec);
  TorusSubgroup G = group_of(job.spec, P->dim(), "trivial");
  SymplecticPotential u0 = io::potential_from_json(P, job.spec.value("potential", Json()));
  if (!job.spec.contains("potential1")) bad("quantize needs \"potential1\"");
  SymplecticPotential u1 = io::potential_from_json(P, job.spec.at("potential1"));
  const Json& q = section(job.spec, "quantization");
  SuiteOptions o = suite_options(q);
  Json reports = Json::array();
  bool all = true;
  for (auto& rep : asymptotic_suite(u0, u1, G, o)) {
    write_report_table(out, rep);
    reports.push_back(report_json(rep));
    all = all && rep.passed;
  }
  if (get_bool(q, "gradz", true)) {
    AsymptoticReport g = gradz_scaling(u1, G, o);
    write_report_table(out, g);
    reports.push_back(report_json(g));
    all = all && g.passed;
  }
  Json r;
  r["group"] = io::group_to_json(G);
  r["reports"] = reports;
  r["all_passed"] = all;
  return r;
}

Json cmd_balanced(const JobConfig& job, const fs::path& out) {
  auto P = polytope_of(job.spec);
  TorusSubgroup G = group_of(job.spec, P->dim(), "full");
  SymplecticPotential u = io::potential_from_json(P, job.spec.value("potential", Json()));
  const Json& q = section(job.spec, "quantization");
  int k = get_int(q, "k", 4, 1);
  int steps = get_int(q, "steps", 200, 1);
  double damping = get_double(q, "damping", 1.0);
  if (!(damping > 0)) bad("\"damping\" must be positive");
  double tol = get_double(q, "tol", 1e-10);
  bool twist = get_bool(q, "twist", false);
  QuantOptions qo;
  qo.points = get_int(q, "points", qo.points, 1);
  qo.uniform = get_int(q, "uniform", qo.uniform, 0);
  SigmaAction act = twist ? SigmaAction::from_group(P, G) : SigmaAction::trivial(P->dim());
  Quantizer Q(P, k, act, qo);
  BalancedResult br = Q.balanced_iterate(Q.hilb(u), steps, damping, tol);

  io::Table t({"step", "residual"});
  std::vector<std::pair<double, double>> plot;
  for (size_t i = 0; i < br.residuals.size(); ++i) {
    t.add_row({std::to_string(i), io::format_number(br.residuals[i])});
    plot.emplace_back(static_cast<double>(i), br.residuals[i]);
  }
  io::write_csv(out / "residuals.csv", t);
  io::write_tsv(out / "residuals.tsv", "step", "residual", plot);

  Json r;
  r["k"] = k;
  r["N_k"] = Q.N();
  r["twist"] = twist;
  r["sigma_w"] = io::vec_to_json(act.w.size() ? act.w : Vec::Zero(P->dim()));
  r["steps"] = br.steps;
  r["converged"] = br.converged;
  r["monotone"] = br.monotone;
  r["diverged"] = br.diverged;
  r["initial_residual"] = br.residuals.front();
  r["final_residual"] = br.residuals.back();
  r["residuals"] = br.residuals;
  std::vector<double> rho = Q.fs_bergman(br.H, Q.rule().nodes);
  auto [lo, hi] = std::minmax_element(rho.begin(), rho.end());
  Json b;
  b["min"] = *lo;
  b["max"] = *hi;
  b["relative_spread"] = (*hi - *lo) / *hi;
  r["bergman"] = b;
  return r;
}

Json cmd_checks(const JobConfig& job, const fs::path& out) {
  auto P = polytope_of(job.spec);
  const int n = P->dim();
  std::string suite = job.spec.value("suite", std::string("chen"));
  std::mt19937_64 rng(job.seed);
  double amp = get_double(job.spec, "amplitude", 0.05);
  Json r;
  r["suite"] = suite;
  r["seed"] = job.seed;
  if (suite == "chen") {
    TorusSubgroup G = group_of(job.spec, n, "full");
    int pairs = get_int(job.spec, "pairs", 100, 1);
    auto ctx = energy_context(P, G);
    io::Table t({"pair", "distance", "calabi1", "energy0", "energy1", "margin"});
    double worst = INFINITY;
    for (int i = 0; i < pairs; ++i) {
      SymplecticPotential a(P, random_cubic_perturbation(*P, rng, amp));
      SymplecticPotential b(P, random_cubic_perturbation(*P, rng, amp));
      ChenResult c = ctx->chen(a, b);
      worst = std::min(worst, c.margin);
      t.add_row({std::to_string(i), io::format_number(c.distance), io::format_number(c.calabi1),
                 io::format_number(c.energy0), io::format_number(c.energy1), io::format_number(c.margin)});
    }
    io::write_csv(out / "chen.csv", t);
    r["group"] = io::group_to_json(G);
    r["pairs"] = pairs;
    r["min_margin"] = worst;
    r["passed"] = worst >= -1e-6;
  } else if (suite == "ibp") {
    int count = get_int(job.spec, "potentials", 5, 1);
    auto ctx = energy_context(P, TorusSubgroup::full(n));
    double worst = 0;
    Json defects = Json::array();
    for (int i = 0; i < count; ++i) {
      SymplecticPotential u(P, i == 0 ? Polynomial::constant(n, 0.0) : random_cubic_perturbation(*P, rng, amp));
      double d = ctx->reduced(u).integral_S / (2.0 * to_double(P->boundary_measure_exact())) - 1.0;
      defects.push_back(d);
      worst = std::max(worst, std::abs(d));
    }
    r["relative_defects"] = defects;
    r["max_defect"] = worst;
    r["passed"] = worst <= 1e-6;
  } else if (suite == "trace") {
    SymplecticPotential u = io::potential_from_json(P, job.spec.value("potential", Json()));
    std::vector<int> ks = get_ints(job.spec, "ks", {1, 2, 3, 4, 5, 6});
    io::Table t({"k", "N_k", "integral", "relative_error"});
    double worst = 0;
    for (int k : ks) {
      Quantizer Q(P, k);
      DiagonalGram H = Q.hilb(u);
      // a rule independent of the one behind H
      QuadratureRule R = interior_rule(*P, {11, 3, 10});
      std::vector<double> rho(R.size());
      for (size_t i = 0; i < rho.size(); ++i) rho[i] = Q.bergman(u, H, R.nodes[i]);
      double I = R.integrate(rho), e = std::abs(I - Q.N()) / Q.N();
      worst = std::max(worst, e);
      t.add_row({std::to_string(k), std::to_string(Q.N()), io::format_number(I), io::format_number(e)});
    }
    io::write_csv(out / "trace.csv", t);
    r["max_relative_error"] = worst;
    r["passed"] = worst <= 1e-6;
  } else if (suite == "extremal") {
    ExtremalData ext = extremal_affine(*P);
    r["residuals"] = ext.residuals;
    r["residual"] = ext.residual;
    r["passed"] = ext.residual <= 1e-10;
  } else if (suite == "convexity") {
    TorusSubgroup G = group_of(job.spec, n, "full");
    int paths = get_int(job.spec, "paths", 20, 1);
    auto ctx = energy_context(P, G);
    double worst = INFINITY;
    for (int i = 0; i < paths; ++i) {
      Polynomial p0 = random_cubic_perturbation(*P, rng, amp), p1 = random_cubic_perturbation(*P, rng, amp);
      std::vector<double> e;
      for (int s = 0; s <= 20; ++s) {
        double t = s / 20.0;
        e.push_back(ctx->kenergy(SymplecticPotential(P, (1 - t) * p0 + t * p1)));
      }
      for (int s = 1; s < 20; ++s) worst = std::min(worst, e[s - 1] - 2 * e[s] + e[s + 1]);
    }
    r["paths"] = paths;
    r["min_second_difference"] = worst;
    r["passed"] = worst >= -1e-8;
  } else {
    bad("unknown checks suite '" + suite + "' (chen, ibp, trace, extremal, convexity)");
  }
  return r;
}

Json cmd_example_blowup(const JobConfig& job, const fs::path& out) {
  const Json& b = section(job.spec, "blowup");
  double s = get_double(b, "s", 3.0), eps = get_double(b, "eps", 0.5), a = get_double(b, "a", 1.0),
         bb = get_double(b, "b", 2.0);
  auto P = blowup_polytope(s, eps, a, bb);
  ExtremalData ext = extremal_affine(*P);
  std::vector<double> L = coordinate_futaki(*P);

  Json r;
  Json params;
  params["s"] = s;
  params["eps"] = eps;
  params["a"] = a;
  params["b"] = bb;
  r["parameters"] = params;
  r["polytope"] = io::polytope_to_json(*P);
  r["Sbar"] = ext.Sbar;
  r["extremal_affine"] = io::affine_to_json(ext.A);
  r["extremal_residual"] = ext.residual;
  r["depends_only_on_y"] = std::abs(ext.A.grad[0]) <= 1e-10;
  r["futaki_x"] = L[0];
  r["futaki_y"] = L[1];
  r["futaki_nonzero"] = std::abs(L[1]) > 1e-8;

  auto ctx = energy_context(P, TorusSubgroup::full(2));
  r["guillemin"] = energy_json(ctx->report(SymplecticPotential(P)));

  // |c| along a family of eps, other parameters fixed
  std::vector<double> scan_eps;
  if (job.spec.contains("eps_scan")) {
    for (auto& v : job.spec.at("eps_scan")) {
      if (!v.is_number()) bad("\"eps_scan\" entries must be numbers");
      scan_eps.push_back(v.get<double>());
    }
  } else {
    for (int i = 1; i <= 8; ++i) scan_eps.push_back(eps * i / 8.0);
  }
  std::vector<std::pair<double, double>> plot;
  Json trend = Json::array();
  for (double e : scan_eps) {
    Json row;
    row["eps"] = e;
    try {
      ExtremalData x = extremal_affine(*blowup_polytope(s, e, a, bb));
      row["y_gradient"] = x.A.grad[1];
      plot.emplace_back(e, x.A.grad[1]);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::InvalidTruncation) throw;
      row["y_gradient"] = nullptr;
      row["rejected"] = err.what();
    }
    trend.push_back(row);
  }
  io::write_tsv(out / "eps_scan.tsv", "eps", "y_gradient", plot);
  r["eps_scan"] = trend;

  if (get_bool(job.spec, "stability", true)) {
    StabilityReport rep = stability_scan(*P, scan_options(section(job.spec, "scan")));
    write_creases(out, rep);
    r["stability"] = stability_json(rep);
  }
  if (job.spec.contains("quantization")) {
    SuiteOptions o = suite_options(section(job.spec, "quantization"));
    AsymptoticReport g = gradz_scaling(SymplecticPotential(P), TorusSubgroup::full(2), o);
    write_report_table(out, g);
    r["quantization"] = report_json(g);
  }
  return r;
}

Json constants_json() {
  auto c = [](double v, const char* prov) {
    Json j;
    j["value"] = v;
    j["provenance"] = prov;
    return j;
  };
  Json j;
  j["bergman_c1"] = c(kBergmanC1, "calibrated");
  j["gradz_constant"] = c(kGradZConst, "calibrated");
  j["sigma_step"] = c(0.25, "theory");
  j["futaki_nonzero_threshold"] = c(1e-8, "specified");
  j["lattice_budget"] = c(static_cast<double>(kLatticeBudget), "specified");
  return j;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"extremal", "futaki", "stability", "energy",
                                          "quantize", "balanced", "checks", "example-blowup"};
  return c;
}

JobConfig parse_job(const Json& spec, const std::string& command) {
  if (!spec.is_object()) bad("config must be a JSON object");
  const auto& cs = commands();
  if (std::find(cs.begin(), cs.end(), command) == cs.end()) bad("unknown command '" + command + "'");
  if (spec.contains("command") && spec.at("command") != command)
    bad("config is for command '" + spec.at("command").get<std::string>() + "', not '" + command + "'");
  check_tolerances(spec, "");
  JobConfig job;
  job.command = command;
  job.spec = spec;
  if (spec.contains("seed")) {
    if (!spec.at("seed").is_number_unsigned()) bad("\"seed\" must be a non-negative integer");
    job.seed = spec.at("seed").get<std::uint64_t>();
  }
  return job;
}

Json run(const JobConfig& job, const fs::path& out) {
  fs::create_directories(out);
  const std::string& c = job.command;
  if (c == "extremal") return cmd_extremal(job, out);
  if (c == "futaki") return cmd_futaki(job, out);
  if (c == "stability") return cmd_stability(job, out);
  if (c == "energy") return cmd_energy(job, out);
  if (c == "quantize") return cmd_quantize(job, out);
  if (c == "balanced") return cmd_balanced(job, out);
  if (c == "checks") return cmd_checks(job, out);
  if (c == "example-blowup") return cmd_example_blowup(job, out);
  bad("unknown command '" + c + "'");
}

Json run_report(const JobConfig& job, const fs::path& out) {
  auto t0 = std::chrono::steady_clock::now();
  Json results = run(job, out);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Json rep;
  rep["tool"] = kToolName;
  rep["version"] = kVersion;
  rep["command"] = job.command;
  rep["seed"] = job.seed;
  rep["inputs"] = job.spec;
  rep["constants"] = constants_json();
  rep["results"] = results;
  rep["wall_time_seconds"] = wall;
  return rep;
}

Json error_json(const std::string& kind, const std::string& message, int exit_code) {
  Json e;
  e["kind"] = kind;
  e["message"] = message;
  e["exit_code"] = exit_code;
  Json j;
  j["error"] = e;
  return j;
}

int main(int argc, char** argv) {
  CLI::App app{"Extremal toric metrics: canonical data, K-energy and quantization"};
  app.set_version_flag("--version", std::string(kVersion));
  std::string command, config, out = ".";
  std::uint64_t seed = 0;
  int threads = -1;
  app.add_option("command", command, "extremal | futaki | stability | energy | quantize | balanced | checks | example-blowup")
      ->required();
  app.add_option("--config", config, "job config (JSON)");
  app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomised suites");
  app.add_option("--threads", threads, "worker threads (default TOOL_THREADS, else all cores)")->check(CLI::NonNegativeNumber);

  auto fail = [](const std::string& kind, const std::string& msg, int code) {
    std::cerr << error_json(kind, msg, code).dump() << "\n";
    return code;
  };
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("InvalidInput", e.what(), 2);
  }

  try {
    if (threads < 0) {
      threads = 0;
      if (const char* env = std::getenv("TOOL_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 0) bad(std::string("TOOL_THREADS must be a non-negative integer, got '") + env + "'");
        threads = static_cast<int>(v);
      }
    }
    set_thread_count(threads);

    Json spec = config.empty() ? Json::object() : io::read_json_file(config);
    JobConfig job = parse_job(spec, command);
    if (seed_opt->count()) job.seed = seed;
    Json rep = run_report(job, out);
    io::write_json(fs::path(out) / "report.json", rep);
    std::cout << "wrote " << (fs::path(out) / "report.json").string() << "\n";
    return 0;
  } catch (const Error& e) {
    return fail(to_string(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const nlohmann::json::exception& e) {
    return fail("InvalidInput", e.what(), 2);
  } catch (const fs::filesystem_error& e) {
    return fail("InvalidInput", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("NumericalFailure", e.what(), 3);
  }
}

}  // namespace toric::cli
