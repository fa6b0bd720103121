#pragma once

#include <memory>
#include <string>
#include <vector>

#include "toric/kenergy.hpp"
#include "toric/potential.hpp"
#include "toric/quadrature.hpp"

namespace toric {

// Chart: eta = log|z|^2 on the dense orbit. A Kahler potential Phi(eta) and a symplectic
// potential u are related by Phi = (2u)^*, i.e. eta = 2 grad u(x), x = grad Phi(eta).
// The monomial z^a has pointwise norm e_a(x) = exp(<a, eta> - k Phi(eta)), which in terms of u
// reads exp(2k [u(x) + <a/k - x, grad u(x)>]). All integrals are over P with Lebesgue measure.

struct LatticeBasis {
  int k = 0;
  int dim = 0;
  std::vector<IntVec> points;  // kP cap Z^n, lexicographic
  std::vector<Vec> points_d;
  std::size_t size() const { return points.size(); }
};

constexpr std::size_t kLatticeBudget = 20000;

// throws BudgetExceeded when the count exceeds budget
std::shared_ptr<const LatticeBasis> lattice_basis(const DelzantPolytope& P, int k, std::size_t budget = kLatticeBudget);

// torus-invariant hermitian form, diagonal in the monomial basis; stored as log H_a
struct DiagonalGram {
  std::shared_ptr<const LatticeBasis> basis;
  std::vector<double> log_weights;

  std::size_t size() const { return log_weights.size(); }
  double weight(std::size_t a) const;
  DiagonalGram scaled(double log_c) const;
};

double bk_distance(const DiagonalGram& H0, const DiagonalGram& H1);
// H0^{1-t} H1^t
DiagonalGram bk_geodesic(const DiagonalGram& H0, const DiagonalGram& H1, double t);

// sigma acts on the chart by eta -> eta + tau_k w, tau_k = 1/(4k)
struct SigmaAction {
  Vec w;
  static SigmaAction trivial(int dim);
  // w = gradient of the extremal affine function for G
  static SigmaAction from_group(const PolytopePtr& P, const TorusSubgroup& G);
  double tau(int k) const { return 0.25 / k; }
  bool is_trivial() const { return w.size() == 0 || w.norm() == 0.0; }
};

struct FSMoments {
  double lse = 0.0;  // log sum_a exp(<a, eta> - lambda_a)
  Vec mean;          // E_p[a]
  Mat cov;           // Cov_p[a]
};

// Phi_H(eta) = (1/k) log sum_a exp(<a, eta>) / H_a
class FSPotential {
 public:
  explicit FSPotential(DiagonalGram H);
  const DiagonalGram& gram() const { return H_; }
  int k() const { return H_.basis->k; }

  double value(const Vec& eta) const;
  Vec gradient(const Vec& eta) const;
  Mat hessian(const Vec& eta) const;
  FSMoments moments(const Vec& eta, std::vector<double>* p = nullptr) const;
  // eta with grad Phi(eta) = x
  Vec legendre(const Vec& x, const Vec& guess) const;
  Vec legendre(const Vec& x) const;
  // u_H(x) = 1/2 (<x, eta> - Phi(eta))
  double symplectic_value(const Vec& x) const;

 private:
  DiagonalGram H_;
};

FSMoments fs_moments(const LatticeBasis& B, const std::vector<double>& lambda, const Vec& eta,
                     std::vector<double>* p = nullptr);

struct QuantOptions {
  int points = 8;           // Gauss points per cell direction
  int uniform = 0;          // cells per direction; 0 picks from k
  int path_nodes = 8;       // Gauss-Legendre nodes along potential paths
  double newton_tol = 1e-12;
  std::size_t budget = kLatticeBudget;
};

struct PsiResult {
  std::vector<double> psi;  // at rule nodes, normalised
  double constant = 0.0;    // additive normalisation applied
  double residual = 0.0;    // |int e^psi - N_k/k^n| / (N_k/k^n)
};

struct BalancedResult {
  DiagonalGram H;
  std::vector<double> residuals;  // |grad_z| before each step and at the end
  bool monotone = true;
  bool converged = false;
  bool diverged = false;
  int steps = 0;
};

// per-node state of a (convex combination of) FS potential(s)
struct NodeState {
  std::vector<Vec> eta;
  std::vector<double> psi_raw;
  std::vector<double> lap;     // 1 + (Delta e^psi)/(k e^psi)
  std::vector<double> dphi;    // optional direction values
  double constant = 0.0;       // psi normalisation
  int newton_iterations = 0;   // max over nodes
};

class Quantizer {
 public:
  Quantizer(PolytopePtr P, int k, SigmaAction act, QuantOptions opts = {});
  Quantizer(PolytopePtr P, int k, QuantOptions opts = {});

  const DelzantPolytope& polytope() const { return *P_; }
  const PolytopePtr& polytope_ptr() const { return P_; }
  int k() const { return k_; }
  std::size_t N() const { return basis_->size(); }
  const std::shared_ptr<const LatticeBasis>& basis() const { return basis_; }
  const QuadratureRule& rule() const { return rule_; }
  const SigmaAction& action() const { return act_; }
  double kn() const;  // k^n

  DiagonalGram hilb(const SymplecticPotential& u) const;
  // max over nodes of the Hilb exponent, per lattice point
  std::vector<double> hilb_exponent_max(const SymplecticPotential& u) const;
  // rho_k(x) = sum_a e_a(x) / H_a
  double bergman(const SymplecticPotential& u, const DiagonalGram& H, const Vec& x) const;
  // Bergman function of FS(H): sum_a p_a(x) / int p_a
  std::vector<double> fs_bergman(const DiagonalGram& H, const std::vector<Vec>& xs) const;

  // psi for FS(H), at rule nodes
  PsiResult psi(const DiagonalGram& H) const;
  // psi for a symplectic potential, at rule nodes
  PsiResult psi(const SymplecticPotential& u) const;
  // raw psi of FS(H) at eta, both presentations
  double psi_raw_shift(const DiagonalGram& H, const Vec& eta) const;
  double psi_raw_weights(const DiagonalGram& H, const Vec& eta) const;

  // d/d log H_a of Z
  std::vector<double> grad_z(const DiagonalGram& H) const;
  double i_energy(const DiagonalGram& H) const;
  // I^sigma(FS(path.back())) - I^sigma(FS(path.front())) along straight segments of potentials
  double i_sigma(const std::vector<DiagonalGram>& path) const;
  // Z = I^sigma o FS + I - k^n log(k^n) Vol, with I^sigma(FS(base)) = 0
  double z_energy(const DiagonalGram& H, const DiagonalGram& base) const;
  double z_energy(const std::vector<DiagonalGram>& path) const;
  // Z(H1) - Z(H0) along the straight potential path
  double z_difference(const DiagonalGram& H0, const DiagonalGram& H1) const;

  BalancedResult balanced_iterate(const DiagonalGram& H0, int steps, double damping = 1.0,
                                  double tol = 1e-10) const;

  // mixture sum_j c_j Phi_{H_j}; direction values Phi_dir1 - Phi_dir0 if given
  NodeState evaluate(const std::vector<std::pair<double, const DiagonalGram*>>& mix,
                     const DiagonalGram* dir0 = nullptr, const DiagonalGram* dir1 = nullptr,
                     const std::vector<Vec>* guess = nullptr) const;

 private:
  void check(const DiagonalGram& H) const;
  std::vector<double> shifted(const DiagonalGram& H) const;

  PolytopePtr P_;
  int k_;
  SigmaAction act_;
  QuantOptions opts_;
  std::shared_ptr<const LatticeBasis> basis_;
  QuadratureRule rule_;
  std::vector<Vec> start_;  // Guillemin chart point per node
};

// free-function forms
DiagonalGram hilb(const SymplecticPotential& u, int k);
FSPotential fs(const DiagonalGram& H);

struct AsymptoticEntry {
  int k = 0;
  std::size_t N = 0;
  double measured = 0.0;
  double target = 0.0;
  double ratio = 0.0;
};

struct AsymptoticReport {
  std::string name;
  std::string provenance;  // exact | computed | calibrated | theory
  std::vector<AsymptoticEntry> entries;
  double target = 0.0;
  double fitted_limit = 0.0;  // least squares in 1/k
  double fit_residual = 0.0;
  double rate = 0.0;          // slope of log|error| against log k
  double tolerance = 0.0;
  bool decreasing = false;
  bool passed = false;
};

// relative error at the last k within tolerance, errors decreasing over ks
void finish_report(AsymptoticReport& r);

struct SuiteOptions {
  std::vector<int> ks{4, 8, 12, 16};
  QuantOptions quant;
  double distance_tol = 0.10;
  double energy_tol = 0.15;
  double bergman_tol = 0.05;
};

constexpr double kBergmanC1 = 0.25;   // rho_k = k^n + c1 S k^{n-1} + ...
constexpr double kGradZConst = 1.0 / 16.0;  // k^{2-n} |grad Z|^2 -> c Ca

// scaled d_k, scaled Z differences, Bergman subleading coefficient
std::vector<AsymptoticReport> asymptotic_suite(const SymplecticPotential& u0, const SymplecticPotential& u1,
                                               const TorusSubgroup& G, const SuiteOptions& opts = {});
// k^{2-n} |grad Z(Hilb u)|^2 / Ca^G(u)
AsymptoticReport gradz_scaling(const SymplecticPotential& u, const TorusSubgroup& G, const SuiteOptions& opts = {});

struct QuantizedChen {
  double dk = 0.0;         // mean-normalised B_k distance
  double grad_norm = 0.0;  // |grad Z(H1)|
  double dZ = 0.0;         // Z(H1) - Z(H0)
  double margin = 0.0;     // (2/k^n)(dk |grad Z| - dZ)
  double continuum = 0.0;  // d sqrt(Ca) - dE
};

QuantizedChen quantized_chen(const SymplecticPotential& u0, const SymplecticPotential& u1, const TorusSubgroup& G,
                             int k, const QuantOptions& opts = {});

}  // namespace toric
