#pragma once

#include <vector>

#include "toric/polynomial.hpp"
#include "toric/polytope.hpp"
#include "toric/potential.hpp"

namespace toric {

// 2 Vol(dP, dsigma) / Vol(P)
double average_scalar(const DelzantPolytope& P);

// L_A(f) = int_dP f dsigma - 1/2 int_P A f dmu
double futaki_linear(const DelzantPolytope& P, const AffineFunction& A, const Polynomial& f);
double futaki_linear(const DelzantPolytope& P, const AffineFunction& A, const PLConvexFunction& f);

// exact integrals of a PL convex function
double integrate_pl(const DelzantPolytope& P, const PLConvexFunction& f, const Polynomial& weight);
double integrate_boundary_pl(const DelzantPolytope& P, const PLConvexFunction& f);
// pieces whose maximality region has zero area
std::vector<bool> redundant_pieces(const DelzantPolytope& P, const PLConvexFunction& f);

struct ExtremalData {
  double Sbar = 0.0;
  AffineFunction A;
  double residual = 0.0;            // max_i |L_A(g_i)| over g in {1, x_1, ..., x_n}
  std::vector<double> residuals;    // per basis function
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
};

ExtremalData extremal_affine(const DelzantPolytope& P);

double relative_df(const DelzantPolytope& P, const PLConvexFunction& f);
double relative_df(const DelzantPolytope& P, const ExtremalData& ext, const PLConvexFunction& f);

struct CreaseResult {
  Vec normal;
  double offset = 0.0;
  double value = 0.0;          // relative DF
  double normalization = 0.0;  // int_P f dmu
  double normalized = 0.0;
  bool skipped = false;        // f vanishes on P
};

struct ScanOptions {
  int radius = 3;
  int offsets = 24;
  double tol = 1e-8;
};

struct StabilityReport {
  std::vector<CreaseResult> entries;
  bool destabilizer_found = false;
  double worst = 0.0;  // minimum normalized value over evaluated creases
  int skipped = 0;
  double tol = 1e-8;
};

CreaseResult evaluate_crease(const DelzantPolytope& P, const ExtremalData& ext, const Vec& normal, double offset);
std::vector<Vec> lattice_ball_normals(int dim, int radius);
StabilityReport stability_scan(const DelzantPolytope& P, const ScanOptions& opts = {});

// int_P f_V S^G(u) dmu with f_V mean-normalised; implemented with the kenergy module
double futaki_character(const SymplecticPotential& u, const TorusSubgroup& G, const AffineFunction& fV);

}  // namespace toric
