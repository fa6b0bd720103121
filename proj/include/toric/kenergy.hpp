#pragma once

#include <memory>
#include <vector>

#include "toric/canonical.hpp"
#include "toric/potential.hpp"
#include "toric/quadrature.hpp"

namespace toric {

// S(u) = -sum_jk d_j d_k (Hess u)^{-1}_{jk}; throws NotPositiveDefinite
double abreu_scalar(const SymplecticPotential& u, const Vec& x);

// Delta f = -1/2 div((Hess u)^{-1} grad f)
double complex_laplacian(const SymplecticPotential& u, const Polynomial& f, const Vec& x);

// L2(P, dmu) projection onto span{<w,x> - mean : w in W}
class KillingProjector {
 public:
  KillingProjector(const DelzantPolytope& P, const TorusSubgroup& G);
  int rank() const { return static_cast<int>(w_.size()); }
  AffineFunction project(const QuadratureRule& rule, const std::vector<double>& values) const;
  // moments[i] = int h <w_i, x> dmu
  AffineFunction from_moments(const Eigen::VectorXd& moments) const;

 private:
  int n_;
  std::vector<Vec> w_;
  std::vector<double> mean_;
  Eigen::MatrixXd gram_;
};

AffineFunction project_killing(const DelzantPolytope& P, const TorusSubgroup& G, const Polynomial& h);
AffineFunction project_killing(const DelzantPolytope& P, const TorusSubgroup& G, const ScalarField& h,
                               const QuadratureRule& rule);

struct EnergyOptions {
  RuleOptions rule{8, 2, 6};
  double singular_tol = 1e-11;
};

struct ReducedScalar {
  std::vector<double> S;    // at rule nodes
  std::vector<double> SG;   // S - Sbar - Pi S
  AffineFunction projection;  // Pi^G S
  double Sbar = 0.0;
  double integral_S = 0.0;  // should equal 2 Vol(dP)
};

struct EnergyReport {
  double energy = 0.0;
  double calabi = 0.0;
  double Sbar = 0.0;
  AffineFunction A_G;
  double base_error = 0.0;
  bool base_converged = true;
  double ibp_defect = 0.0;  // |int S - 2 Vol(dP)| / 2 Vol(dP)
  std::size_t nodes = 0;
};

struct ChenResult {
  double distance = 0.0;
  double calabi1 = 0.0;
  double energy0 = 0.0, energy1 = 0.0;
  double margin = 0.0;
};

// Per (P, G) evaluation context. A_G is computed once from the Guillemin potential and frozen.
class EnergyContext {
 public:
  EnergyContext(PolytopePtr P, TorusSubgroup G, EnergyOptions opts = {});

  const DelzantPolytope& polytope() const { return *P_; }
  const TorusSubgroup& group() const { return G_; }
  const QuadratureRule& rule() const { return rule_; }
  const KillingProjector& projector() const { return proj_; }
  const AffineFunction& extremal_potential() const { return A_; }
  double Sbar() const { return Sbar_; }
  double base_energy() const { return base_; }
  const NumericResult& base_diagnostics() const { return base_diag_; }

  std::vector<double> scalar_at_nodes(const SymplecticPotential& u) const;
  ReducedScalar reduced(const SymplecticPotential& u) const;
  AffineFunction extremal_field(const SymplecticPotential& u) const;

  double kenergy(const SymplecticPotential& u) const;
  double calabi(const SymplecticPotential& u) const;
  // int S^G(u) f dmu
  double derivative(const SymplecticPotential& u, const Polynomial& f) const;
  EnergyReport report(const SymplecticPotential& u) const;
  ChenResult chen(const SymplecticPotential& u0, const SymplecticPotential& u1) const;

 private:
  void check(const SymplecticPotential& u) const;

  PolytopePtr P_;
  TorusSubgroup G_;
  EnergyOptions opts_;
  QuadratureRule rule_;
  KillingProjector proj_;
  std::vector<Mat> chol_;    // Cholesky factor of the Guillemin Hessian
  double Sbar_ = 0.0;
  AffineFunction A_;
  double base_ = 0.0;
  NumericResult base_diag_;
};

// shared context per (P, G); built on first use
std::shared_ptr<const EnergyContext> energy_context(const PolytopePtr& P, const TorusSubgroup& G);

ReducedScalar reduced_scalar(const SymplecticPotential& u, const TorusSubgroup& G);
AffineFunction extremal_field_potential(const SymplecticPotential& u, const TorusSubgroup& G);
double modified_kenergy(const SymplecticPotential& u, const TorusSubgroup& G);
double modified_calabi(const SymplecticPotential& u, const TorusSubgroup& G);

enum class DistanceMode { MeanNormalized, Raw };
double mabuchi_distance(const SymplecticPotential& u0, const SymplecticPotential& u1,
                        DistanceMode mode = DistanceMode::MeanNormalized);
ChenResult chen_check(const SymplecticPotential& u0, const SymplecticPotential& u1, const TorusSubgroup& G);

}  // namespace toric
