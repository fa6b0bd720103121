#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "toric/error.hpp"
#include "toric/kenergy.hpp"
#include "toric/quantization.hpp"

using namespace toric;

namespace {

Vec pt(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Vec pt1(double x) {
  Vec v(1);
  v << x;
  return v;
}

Polynomial mono(int dim, std::vector<int> e, double c) { return Polynomial::monomial(dim, e, c); }

DiagonalGram perturbed(const DiagonalGram& H, std::mt19937_64& rng, double amp) {
  std::normal_distribution<double> N01;
  DiagonalGram out = H;
  for (auto& l : out.log_weights) l += amp * N01(rng);
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double log_factorial(int n) { return std::lgamma(n + 1.0); }

SigmaAction trapezoid_sigma() { return SigmaAction::from_group(hirzebruch_trapezoid(), TorusSubgroup::full(2)); }

}  // namespace

TEST_CASE("lattice basis") {
  CHECK(lattice_basis(*unit_interval(), 3)->size() == 4);
  for (int k : {1, 2, 5, 9}) CHECK(lattice_basis(*unit_square(), k)->size() == static_cast<size_t>((k + 1) * (k + 1)));
  CHECK(lattice_basis(*standard_simplex(), 3)->size() == 10);

  for (auto P : {hirzebruch_trapezoid(), blowup_polytope(5, 1, 1, 2), standard_simplex()})
    for (int k : {1, 2, 3, 7}) CHECK(static_cast<long>(lattice_basis(*P, k)->size()) == oracle::lattice_count(*P, k));

  auto B = lattice_basis(*hirzebruch_trapezoid(), 4);
  for (size_t i = 1; i < B->size(); ++i) CHECK(B->points[i - 1] < B->points[i]);
  for (size_t i = 0; i < B->size(); ++i)
    for (int j = 0; j < 2; ++j) CHECK(B->points_d[i][j] == static_cast<double>(B->points[i][j]));

  CHECK_THROWS_AS(lattice_basis(*unit_square(), 200), Error);
  try {
    lattice_basis(*unit_square(), 200);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BudgetExceeded);
  }
  try {
    Quantizer Q(blowup_polytope(3, 0.5, 1, 2), 2);
    FAIL("non-lattice polytope accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
  }
}

TEST_CASE("hilb of the Guillemin potential") {
  SUBCASE("interval: beta integrals") {
    auto I = unit_interval();
    for (int k : {1, 3, 8}) {
      Quantizer Q(I, k);
      auto H = Q.hilb(SymplecticPotential(I));
      for (int a = 0; a <= k; ++a) {
        double exact = log_factorial(a) + log_factorial(k - a) - log_factorial(k + 1);
        CHECK(H.log_weights[a] == doctest::Approx(exact).epsilon(1e-10));
      }
    }
  }
  SUBCASE("square: product of interval weights, symmetric") {
    auto S = unit_square();
    Quantizer Q(S, 4);
    auto H = Q.hilb(SymplecticPotential(S));
    const auto& B = *Q.basis();
    for (size_t i = 0; i < B.size(); ++i) {
      int a = B.points[i][0], b = B.points[i][1];
      double exact = log_factorial(a) + log_factorial(4 - a) + log_factorial(b) + log_factorial(4 - b) - 2 * log_factorial(5);
      CHECK(H.log_weights[i] == doctest::Approx(exact).epsilon(1e-10));
    }
  }
  SUBCASE("exponent bound and orbit symmetry on the simplex") {
    auto T = standard_simplex();
    SymplecticPotential u(T);
    Quantizer Q(T, 5);
    auto mx = Q.hilb_exponent_max(u);
    const auto& B = *Q.basis();
    for (size_t i = 0; i < B.size(); ++i) {
      Vec y = B.points_d[i] / 5.0;
      if (T->interior(y)) CHECK(mx[i] <= 2 * 5 * u.value(y) + 1e-9);
    }
    auto H = Q.hilb(u);
    // the S3 symmetry of the simplex permutes (a, b, k - a - b)
    for (size_t i = 0; i < B.size(); ++i)
      for (size_t j = 0; j < B.size(); ++j) {
        int a = B.points[i][0], b = B.points[i][1];
        int c = B.points[j][0], d = B.points[j][1];
        if (c == b && d == 5 - a - b) CHECK(H.log_weights[i] == doctest::Approx(H.log_weights[j]).epsilon(1e-10));
      }
  }
  SUBCASE("free function agrees") {
    auto S = unit_square();
    SymplecticPotential u(S, mono(2, {1, 1}, 0.1));
    auto a = hilb(u, 3);
    auto b = Quantizer(S, 3).hilb(u);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a.log_weights[i] == doctest::Approx(b.log_weights[i]).epsilon(1e-13));
  }
}

TEST_CASE("fubini-study potentials") {
  auto T = hirzebruch_trapezoid();
  Quantizer Q(T, 3);
  auto H = Q.hilb(SymplecticPotential(T, mono(2, {2, 1}, 0.05)));
  FSPotential phi = fs(H);
  Vec eta = pt(0.3, -0.7);

  // scaling H by c shifts Phi by -log c / k
  FSPotential psc = fs(H.scaled(std::log(2.5)));
  CHECK(psc.value(eta) == doctest::Approx(phi.value(eta) - std::log(2.5) / 3).epsilon(1e-13));

  // gradient and Hessian against central differences
  const double h = 1e-5;
  Vec g = phi.gradient(eta);
  Mat Hs = phi.hessian(eta);
  for (int j = 0; j < 2; ++j) {
    Vec e = Vec::Zero(2);
    e[j] = h;
    CHECK(g[j] == doctest::Approx((phi.value(eta + e) - phi.value(eta - e)) / (2 * h)).epsilon(1e-8));
    Vec dg = (phi.gradient(eta + e) - phi.gradient(eta - e)) / (2 * h);
    for (int i = 0; i < 2; ++i) CHECK(Hs(i, j) == doctest::Approx(dg[i]).epsilon(1e-7));
  }
  // the moment image is the polytope
  CHECK(T->interior(g));

  // Legendre inversion round trip
  Vec x = pt(0.4, 0.3);
  Vec e2 = phi.legendre(x);
  CHECK((phi.gradient(e2) - x).norm() < 1e-11);
  CHECK(phi.symplectic_value(x) == doctest::Approx(0.5 * (x.dot(e2) - phi.value(e2))).epsilon(1e-13));

  // Guillemin on the square is a fixed point of fs o hilb
  auto S = unit_square();
  SymplecticPotential u0(S);
  Quantizer QS(S, 6);
  FSPotential f0 = fs(QS.hilb(u0));
  for (Vec y : {pt(0.2, 0.7), pt(0.5, 0.5), pt(0.05, 0.9)}) {
    double uf = f0.symplectic_value(y);
    // equal up to the additive constant fixed at the centre
    CHECK(uf - f0.symplectic_value(pt(0.5, 0.5)) == doctest::Approx(u0.value(y) - u0.value(pt(0.5, 0.5))).epsilon(1e-10));
  }
}

TEST_CASE("bergman function") {
  SUBCASE("interval: constant k + 1") {
    auto I = unit_interval();
    SymplecticPotential u(I);
    for (int k : {2, 5}) {
      Quantizer Q(I, k);
      auto H = Q.hilb(u);
      for (double x : {0.01, 0.3, 0.77}) CHECK(Q.bergman(u, H, pt1(x)) == doctest::Approx(k + 1.0).epsilon(1e-10));
    }
  }
  SUBCASE("trace identity") {
    for (auto P : {hirzebruch_trapezoid(), blowup_polytope(5, 1, 1, 2)}) {
      SymplecticPotential u(P, mono(2, {1, 1}, 0.02));
      for (int k : {1, 4}) {
        Quantizer Q(P, k);
        auto H = Q.hilb(u);
        // integrated with a rule independent of the one behind H
        QuadratureRule R = interior_rule(*P, {11, 3, 10});
        std::vector<double> rho(R.size());
        for (size_t i = 0; i < rho.size(); ++i) rho[i] = Q.bergman(u, H, R.nodes[i]);
        CHECK(R.integrate(rho) == doctest::Approx(static_cast<double>(Q.N())).epsilon(1e-6));
      }
    }
  }
  SUBCASE("subleading coefficient") {
    // rho = k^n + c1 S k^{n-1} + O(k^{n-2}); Guillemin on the square has S = 8
    auto S = unit_square();
    SymplecticPotential u(S, mono(2, {2, 0}, 0.05));
    Vec x = pt(0.37, 0.61);
    double s = abreu_scalar(u, x);
    std::vector<double> c;
    for (int k : {8, 16, 32}) {
      Quantizer Q(S, k);
      double rho = Q.bergman(u, Q.hilb(u), x);
      c.push_back((rho - k * k) / (s * k));
    }
    // Richardson in 1/k
    double lim = 2 * c[2] - c[1];
    CHECK(std::abs(c[2] - kBergmanC1) < std::abs(c[0] - kBergmanC1));
    CHECK(lim == doctest::Approx(kBergmanC1).epsilon(0.02));
  }
  SUBCASE("fs bergman at a Guillemin fixed point") {
    auto I = unit_interval();
    Quantizer Q(I, 4);
    auto rho = Q.fs_bergman(Q.hilb(SymplecticPotential(I)), {pt1(0.1), pt1(0.5), pt1(0.93)});
    for (double r : rho) CHECK(r == doctest::Approx(5.0).epsilon(1e-10));
  }
}

TEST_CASE("B_k geometry") {
  auto S = unit_square();
  Quantizer Q(S, 3);
  auto H0 = Q.hilb(SymplecticPotential(S));
  std::mt19937_64 rng(7);
  auto H1 = perturbed(H0, rng, 0.4);

  CHECK(bk_distance(H0, H0.scaled(0.7)) == doctest::Approx(0.7 * std::sqrt(16.0)).epsilon(1e-14));
  CHECK(bk_distance(H0, H1) == doctest::Approx(bk_distance(H1, H0)).epsilon(1e-14));
  auto g0 = bk_geodesic(H0, H1, 0.0), g1 = bk_geodesic(H0, H1, 1.0);
  for (size_t a = 0; a < H0.size(); ++a) {
    CHECK(g0.log_weights[a] == doctest::Approx(H0.log_weights[a]).epsilon(1e-15));
    CHECK(g1.log_weights[a] == doctest::Approx(H1.log_weights[a]).epsilon(1e-15));
  }
  // geodesics have constant speed
  CHECK(bk_distance(H0, bk_geodesic(H0, H1, 0.3)) == doctest::Approx(0.3 * bk_distance(H0, H1)).epsilon(1e-12));

  for (int t = 0; t < 50; ++t) {
    auto A = perturbed(H0, rng, 1.0), B = perturbed(H0, rng, 1.0), C = perturbed(H0, rng, 1.0);
    CHECK(bk_distance(A, C) <= bk_distance(A, B) + bk_distance(B, C) + 1e-12);
  }

  auto other = Quantizer(S, 4).hilb(SymplecticPotential(S));
  CHECK_THROWS_AS(bk_distance(H0, other), Error);
  CHECK_THROWS_AS(Q.grad_z(other), Error);
}

TEST_CASE("twist potential psi") {
  SUBCASE("trivial action gives the normalising constant") {
    auto T = hirzebruch_trapezoid();
    Quantizer Q(T, 4);
    auto r = Q.psi(SymplecticPotential(T));
    double c = std::log(Q.N() / (16.0 * T->volume()));
    for (double v : r.psi) CHECK(v == doctest::Approx(c).epsilon(1e-12));
    auto rf = Q.psi(Q.hilb(SymplecticPotential(T)));
    for (double v : rf.psi) CHECK(v == doctest::Approx(c).epsilon(1e-12));
  }
  SUBCASE("normalisation and the two presentations") {
    auto T = hirzebruch_trapezoid();
    Quantizer Q(T, 6, trapezoid_sigma());
    auto H = Q.hilb(SymplecticPotential(T, mono(2, {1, 1}, 0.03)));
    auto r = Q.psi(H);
    CHECK(r.residual <= 1e-10);
    auto ru = Q.psi(SymplecticPotential(T));
    CHECK(ru.residual <= 1e-10);
    Vec base = pt(0.1, -0.2);
    double d0 = Q.psi_raw_shift(H, base) - Q.psi_raw_weights(H, base);
    for (Vec eta : {pt(1.5, -2.0), pt(-3.0, 0.4), pt(0.0, 5.0)})
      CHECK(Q.psi_raw_shift(H, eta) - Q.psi_raw_weights(H, eta) == doctest::Approx(d0).epsilon(1e-11));
  }
  SUBCASE("4k psi approaches the extremal affine function") {
    auto T = hirzebruch_trapezoid();
    TorusSubgroup G = TorusSubgroup::full(2);
    SymplecticPotential u(T);
    AffineFunction A = energy_context(T, G)->extremal_potential();
    std::vector<double> err;
    for (int k : {4, 8, 16}) {
      Quantizer Q(T, k, SigmaAction::from_group(T, G));
      auto r = Q.psi(u);
      double e = 0;
      for (size_t i = 0; i < r.psi.size(); ++i) e = std::max(e, std::abs(4.0 * k * r.psi[i] - A(Q.rule().nodes[i])));
      err.push_back(e);
    }
    CHECK(err[1] < err[0]);
    CHECK(err[2] < err[1]);
    // first order: halving with k
    CHECK(err[2] / err[1] == doctest::Approx(0.5).epsilon(0.1));
  }
}

TEST_CASE("Z energy") {
  SUBCASE("untwisted closed form") {
    // I(FS(H)) - I(FS(H0)) = -2k (N/V) int (u_H - u_H0) with trivial twist
    auto T = hirzebruch_trapezoid();
    Quantizer Q(T, 3);
    auto H0 = Q.hilb(SymplecticPotential(T));
    std::mt19937_64 rng(3);
    auto H1 = perturbed(H0, rng, 0.3);
    FSPotential f0 = fs(H0), f1 = fs(H1);
    std::vector<double> du(Q.rule().size());
    for (size_t i = 0; i < du.size(); ++i)
      du[i] = f1.symplectic_value(Q.rule().nodes[i]) - f0.symplectic_value(Q.rule().nodes[i]);
    double closed = -2.0 * 3 * Q.N() / T->volume() * Q.rule().integrate(du);
    CHECK(Q.i_sigma({H0, H1}) == doctest::Approx(closed).epsilon(1e-9));
  }
  SUBCASE("scaling") {
    auto S = unit_square();
    Quantizer Q(S, 3);
    auto H0 = Q.hilb(SymplecticPotential(S));
    std::mt19937_64 rng(4);
    auto H = perturbed(H0, rng, 0.3);
    CHECK(Q.i_energy(H.scaled(0.8)) - Q.i_energy(H) == doctest::Approx(16 * 0.8).epsilon(1e-12));
    CHECK(Q.z_energy(H.scaled(0.8), H0) == doctest::Approx(Q.z_energy(H, H0)).epsilon(1e-10));
  }
  SUBCASE("path independence, trivial twist") {
    auto S = unit_square();
    Quantizer Q(S, 4);
    auto H0 = Q.hilb(SymplecticPotential(S));
    std::mt19937_64 rng(5);
    auto H1 = perturbed(H0, rng, 0.3), M = perturbed(H0, rng, 0.2);
    CHECK(std::abs(Q.z_energy({H0, H1}) - Q.z_energy({H0, M, H1})) <= 1e-6);
  }
  SUBCASE("path independence, extremal twist") {
    auto T = hirzebruch_trapezoid();
    Quantizer Q(T, 4, trapezoid_sigma());
    auto H0 = Q.hilb(SymplecticPotential(T));
    std::mt19937_64 rng(5);
    auto H1 = perturbed(H0, rng, 0.3), M = perturbed(H0, rng, 0.2);
    double a = Q.z_energy({H0, H1}), b = Q.z_energy({H0, M, H1});
    INFO("direct ", a, " via ", b);
    CHECK(std::abs(a - b) <= 1e-6);
  }
  SUBCASE("convexity along geodesics") {
    for (bool twist : {false, true}) {
      auto T = hirzebruch_trapezoid();
      Quantizer Q = twist ? Quantizer(T, 4, trapezoid_sigma()) : Quantizer(T, 4);
      auto H0 = Q.hilb(SymplecticPotential(T));
      std::mt19937_64 rng(6);
      auto A = perturbed(H0, rng, 0.4), B = perturbed(H0, rng, 0.4);
      std::vector<double> z;
      for (int i = 0; i <= 10; ++i) z.push_back(Q.z_energy(bk_geodesic(A, B, i / 10.0), H0));
      for (int i = 1; i < 10; ++i) CHECK(z[i - 1] - 2 * z[i] + z[i + 1] >= -1e-6);
    }
  }
}

TEST_CASE("gradient of Z") {
  auto check_fd = [](const Quantizer& Q, unsigned seed) {
    auto H0 = Q.hilb(SymplecticPotential(Q.polytope_ptr()));
    std::mt19937_64 rng(seed);
    auto H = perturbed(H0, rng, 0.3);
    auto D = perturbed(H0, rng, 1.0);
    std::vector<double> dir(H.size());
    for (size_t a = 0; a < dir.size(); ++a) dir[a] = D.log_weights[a] - H0.log_weights[a];
    double exact = dot(Q.grad_z(H), dir);
    double err[2];
    int j = 0;
    for (double t : {1e-2, 1e-3}) {
      DiagonalGram Hp = H, Hm = H;
      for (size_t a = 0; a < dir.size(); ++a) {
        Hp.log_weights[a] += t * dir[a];
        Hm.log_weights[a] -= t * dir[a];
      }
      err[j++] = std::abs((Q.z_energy(Hp, H0) - Q.z_energy(Hm, H0)) / (2 * t) - exact);
    }
    return std::log10(err[0] / err[1]);
  };
  SUBCASE("finite differences, trivial twist") {
    CHECK(check_fd(Quantizer(unit_square(), 4), 11) >= 1.9);
    CHECK(check_fd(Quantizer(hirzebruch_trapezoid(), 3), 12) >= 1.9);
  }
  SUBCASE("finite differences, extremal twist") {
    double order = check_fd(Quantizer(hirzebruch_trapezoid(), 4, trapezoid_sigma()), 13);
    INFO("observed order ", order);
    CHECK(order >= 1.9);
  }
  SUBCASE("sums to zero") {
    auto T = hirzebruch_trapezoid();
    Quantizer Q(T, 4, trapezoid_sigma());
    std::mt19937_64 rng(14);
    auto g = Q.grad_z(perturbed(Q.hilb(SymplecticPotential(T)), rng, 0.3));
    double s = 0;
    for (double v : g) s += v;
    // exact up to quadrature of the Laplacian term
    CHECK(std::abs(s) <= 1e-6 * Q.N());
  }
  SUBCASE("vanishes at the interval fixed point") {
    auto I = unit_interval();
    Quantizer Q(I, 5);
    CHECK(norm(Q.grad_z(Q.hilb(SymplecticPotential(I)))) <= 1e-8);
  }
}

TEST_CASE("balanced iteration") {
  SUBCASE("interval") {
    auto I = unit_interval();
    Quantizer Q(I, 3);
    auto r = Q.balanced_iterate(Q.hilb(SymplecticPotential(I, mono(1, {3}, 0.2))), 200);
    CHECK(r.converged);
    CHECK(r.monotone);
    CHECK(r.residuals.back() < 1e-10);
    CHECK(r.steps <= 200);
    // successive iterates get closer
    auto a = Q.balanced_iterate(Q.hilb(SymplecticPotential(I, mono(1, {3}, 0.2))), 1).H;
    auto b = Q.balanced_iterate(a, 1).H;
    auto c = Q.balanced_iterate(b, 1).H;
    CHECK(bk_distance(b, c) < bk_distance(a, b));
  }
  SUBCASE("square: constant Bergman function at the fixed point") {
    auto S = unit_square();
    Quantizer Q(S, 4);
    auto r = Q.balanced_iterate(Q.hilb(SymplecticPotential(S, mono(2, {1, 1}, 0.1))), 200);
    REQUIRE(r.converged);
    std::vector<Vec> xs;
    for (int i = 1; i < 10; ++i)
      for (int j = 1; j < 10; ++j) xs.push_back(pt(i / 10.0, j / 10.0));
    auto rho = Q.fs_bergman(r.H, xs);
    for (double v : rho) CHECK(v == doctest::Approx(25.0).epsilon(1e-8));
  }
  SUBCASE("octagon with extremal twist: pinned residual trace") {
    auto P = blowup_polytope(5, 1, 1, 2);
    Quantizer Q(P, 6, SigmaAction::from_group(P, TorusSubgroup::full(2)));
    auto r = Q.balanced_iterate(Q.hilb(SymplecticPotential(P)), 4);
    const std::vector<double> pinned{1.24464444448, 1.19452006855, 1.15732081443, 1.12714807488, 1.10158776397};
    REQUIRE(r.residuals.size() == pinned.size());
    for (size_t i = 0; i < pinned.size(); ++i) CHECK(r.residuals[i] == doctest::Approx(pinned[i]).epsilon(1e-6));
  }
}

TEST_CASE("asymptotics") {
  SUBCASE("identical potentials give zero differences") {
    auto S = unit_square();
    SymplecticPotential u(S, mono(2, {1, 1}, 0.1));
    SuiteOptions o;
    o.ks = {2, 4};
    auto reps = asymptotic_suite(u, u, TorusSubgroup::trivial(2), o);
    for (int i = 0; i < 2; ++i)
      for (auto& e : reps[i].entries) CHECK(e.measured == 0.0);
  }
  SUBCASE("gradient norm scaling is consistent across potentials") {
    SuiteOptions o;
    o.ks = {4, 8, 12};
    auto S = unit_square();
    auto a = gradz_scaling(SymplecticPotential(S, mono(2, {1, 1}, 0.1)), TorusSubgroup::trivial(2), o);
    auto b = gradz_scaling(SymplecticPotential(S, mono(2, {3, 0}, 0.1)), TorusSubgroup::trivial(2), o);
    CHECK(a.fitted_limit == doctest::Approx(kGradZConst).epsilon(0.2));
    CHECK(b.fitted_limit == doctest::Approx(kGradZConst).epsilon(0.2));
  }
}
