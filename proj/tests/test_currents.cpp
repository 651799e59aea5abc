#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "resdiv/currents.hpp"
#include "resdiv/weights.hpp"

using namespace resdiv;

namespace {

MixedPoly zt(int n, int j) { return MixedPoly::zeta(n, j); }
MixedPoly cst(int n, cplx c) { return MixedPoly::constant(n, c); }

CPoint random_point(std::mt19937& rng, int n, double rad) {
  std::uniform_real_distribution<double> u(-rad, rad);
  CPoint p(n);
  for (int j = 0; j < n; ++j) p[j] = cplx(u(rng), u(rng));
  return p;
}

// max |(f - dbar) U phi - (phi - R phi)| over random points
double transport_defect(const CurrentFamily& cf, const std::vector<MixedPoly>& phi, double eps, unsigned seed) {
  const auto& f = cf.matrix();
  const Layout& L = cf.layout();
  std::vector<NumFrameMap> fk;
  std::mt19937 rng(seed);
  double worst = 0;
  auto U = cf.U_field(phi);
  for (int s = 0; s < 20; ++s) {
    CPoint zeta = random_point(rng, L.n, 0.8);
    std::vector<cplx> ph;
    for (const auto& p : phi) ph.push_back(p.eval(zeta));
    ExtElem u = U(zeta, zeta, eps);
    ExtElem lhs = -dbar_fd(U, zeta, zeta, eps, 1e-5);
    for (int k = 1; k <= f.length(); ++k) lhs += lower(en_differential(f, k), zeta, zeta).apply(u);
    ExtElem rhs = -cf.R(zeta, eps, ph);
    for (int j = 0; j < f.r; ++j) rhs += ExtElem::monomial(L, key::make(0, key::with_qframe(0, j)), ph[j]);
    worst = std::max(worst, max_abs_diff(lhs, rhs) / std::max(1.0, max_abs(rhs)));
  }
  return worst;
}

}  // namespace

TEST_CASE("minimal inverse") {
  HoloMatrix f(2, {{zt(2, 0), zt(2, 1) + cst(2, 1.0), cst(2, 0.5)}, {cst(2, 2.0), zt(2, 0) * zt(2, 1), zt(2, 1)}});
  CurrentFamily cf(f, ComplexKind::eagon_northcott, RegKind::cutoff);
  CPoint zeta{cplx(0.3, -0.2), cplx(0.1, 0.4)};
  auto d = cf.sigma_data(zeta);
  CHECK((d.F * d.sigma - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-12);
  CHECK(d.v == doctest::Approx(cf.v(zeta)));
  auto s = minimal_inverse(f, zeta);
  // f^1 . sigma_0 = 1 from the exterior element
  cplx acc = 0;
  for (int i = 0; i < 3; ++i)
    acc += f(0, i).eval(zeta) * s.coeff(key::make(s.layout().eframe_bit(i), key::with_sym_exp(0, 0, 1)));
  CHECK(std::abs(acc - 1.0) < 1e-12);
  // singular point
  HoloMatrix g(1, {{zt(1, 0)}});
  CHECK_THROWS_AS(minimal_inverse(g, CPoint{0.0}), ContractViolation);
}

TEST_CASE("eps factor") {
  EpsFactor chi{0, 1, 1}, dchi{1, 0, 2};
  CHECK(chi(3.0, 1.0) == doctest::Approx(0.75));
  CHECK(dchi(3.0, 1.0) == doctest::Approx(1.0 / 16));
  CHECK(chi(3.0, 0.0) == 1.0);
  CHECK(dchi(3.0, 0.0) == 0.0);
}

TEST_CASE("koszul currents satisfy (f - dbar) U = I - R") {
  const int n = 2;
  std::vector<MixedPoly> row{zt(n, 0) * zt(n, 0), zt(n, 1) * zt(n, 1) * zt(n, 1) + cst(n, 0.1) * zt(n, 0)};
  std::vector<MixedPoly> phi{zt(n, 0) + cst(n, 2.0)};
  for (auto reg : {RegKind::hs, RegKind::cutoff}) {
    auto cf = koszul_currents(row, reg);
    CHECK(transport_defect(cf, phi, 0.05, 3) < 1e-6);
    CHECK(transport_defect(cf, phi, 1e-3, 4) < 1e-5);
  }
}

TEST_CASE("koszul currents in three variables") {
  const int n = 3;
  std::vector<MixedPoly> row{zt(n, 0), zt(n, 1) * zt(n, 1), zt(n, 2) + zt(n, 0) * zt(n, 1)};
  auto cf = koszul_currents(row, RegKind::cutoff);
  CHECK(transport_defect(cf, {cst(n, 1.0)}, 0.02, 5) < 1e-6);
  auto hs = koszul_currents(row, RegKind::hs);
  CHECK(transport_defect(hs, {zt(n, 2)}, 0.02, 6) < 1e-6);
}

TEST_CASE("hs and cutoff agree on U_1 as eps -> 0") {
  const int n = 2;
  std::vector<MixedPoly> row{zt(n, 0), zt(n, 1)};
  auto a = koszul_currents(row, RegKind::hs), b = koszul_currents(row, RegKind::cutoff);
  CPoint zeta{0.4, cplx(0, 0.3)};
  std::vector<cplx> one{1.0};
  CHECK(max_abs_diff(a.U(zeta, 0.0, one), b.U(zeta, 0.0, one)) < 1e-12);
  CHECK(max_abs(a.R(zeta, 0.0, one)) == 0.0);
  CHECK(max_abs(b.R(zeta, 0.0, one)) == 0.0);
}

TEST_CASE("eagon-northcott currents satisfy (f - dbar) U = I - R") {
  const int n = 2;
  {
    // r = 3, m = 4: N = 2
    HoloMatrix f(n, {{zt(n, 0), cst(n, 0.3), zt(n, 1), cst(n, 0.0)},
                     {cst(n, 0.0), zt(n, 1), cst(n, 1.0), zt(n, 0)},
                     {zt(n, 1) * zt(n, 0), cst(n, 0.0), zt(n, 0), cst(n, 0.7)}});
    auto cf = en_currents(f);
    CHECK(cf.length() == 2);
    CHECK(transport_defect(cf, {cst(n, 1.0), zt(n, 0), cst(n, -0.5)}, 0.03, 7) < 1e-6);
  }
  {
    // r = 3, m = 5: N = 3
    HoloMatrix f(n, {{zt(n, 0), cst(n, 0.3), zt(n, 1), cst(n, 0.0), zt(n, 0)},
                     {cst(n, 0.0), zt(n, 1), cst(n, 1.0), zt(n, 0), cst(n, 0.2)},
                     {zt(n, 1), cst(n, 0.0), zt(n, 0), cst(n, 0.7), zt(n, 1) * zt(n, 1)}});
    auto cf = en_currents(f);
    CHECK(transport_defect(cf, {zt(n, 1), cst(n, 1.0), cst(n, 0.5)}, 0.03, 8) < 1e-6);
  }
  {
    // (r, m) = (2, 2): N = 1
    HoloMatrix f(n, {{zt(n, 0), cst(n, 1.0)}, {zt(n, 1), zt(n, 0)}});
    auto cf = en_currents(f);
    CHECK(transport_defect(cf, {cst(n, 1.0), zt(n, 1)}, 0.03, 9) < 1e-6);
  }
}

TEST_CASE("R_eps frame degree support") {
  const int n = 2;
  std::vector<MixedPoly> row{zt(n, 0), zt(n, 1), zt(n, 0) * zt(n, 1)};  // m = 3 > n
  auto cf = koszul_currents(row, RegKind::cutoff);
  auto P = cf.eval(CPoint{0.2, 0.3});
  for (const auto& c : P.R)
    for (const auto& x : c.on_basis)
      for (const auto& [k, v] : x.terms()) CHECK(eframe_degree(cf.layout(), k) <= std::min(3, n));
}

TEST_CASE("contract violations") {
  const int n = 2;
  HoloMatrix f(n, {{zt(n, 0), zt(n, 1)}, {zt(n, 1), zt(n, 0)}});
  CHECK_THROWS_AS(CurrentFamily(f, ComplexKind::koszul, RegKind::cutoff), ContractViolation);
  CHECK_THROWS_AS(CurrentFamily(f, ComplexKind::eagon_northcott, RegKind::hs), ContractViolation);
  HoloMatrix g(n, {{zt(n, 0), zt(n, 1), cst(n, 1.0)}, {zt(n, 1), zt(n, 0), cst(n, 1.0)}});
  CHECK_THROWS_AS(en_currents(g), ContractViolation);
}

namespace {

ResidueOptions fast_options() {
  ResidueOptions o;
  o.orders.angular = 8;
  o.orders.radial = 16;
  o.orders.latitude = 16;
  return o;
}

}  // namespace

TEST_CASE("minimal inverse examples") {
  HoloMatrix f1(1, {{zt(1, 0)}});
  auto s = minimal_inverse(f1, CPoint{2.0});
  CHECK(std::abs(s.coeff(key::make(s.layout().eframe_bit(0), key::with_sym_exp(0, 0, 1))) - 0.5) < 1e-15);
  HoloMatrix f2(2, {{zt(2, 0), zt(2, 1)}});
  auto t = minimal_inverse(f2, CPoint{1.0, cplx(0, 1)});
  CHECK(std::abs(t.coeff(key::make(t.layout().eframe_bit(0), key::with_sym_exp(0, 0, 1))) - 0.5) < 1e-15);
  CHECK(std::abs(t.coeff(key::make(t.layout().eframe_bit(1), key::with_sym_exp(0, 0, 1))) - cplx(0, -0.5)) < 1e-15);
}

TEST_CASE("richardson extrapolation") {
  EpsSchedule sch;
  auto eps = sch.values();
  REQUIRE(eps.size() == 6);
  CHECK(eps[0] == doctest::Approx(1.0 / 16));
  std::vector<cplx> v;
  for (double e : eps) v.push_back(2.0 + 3.0 * e + 5.0 * e * e);
  auto r = richardson(eps, v);
  CHECK(std::abs(r.value - 2.0) < 1e-6);
  CHECK(r.converged);
  CHECK_THROWS_AS((EpsSchedule{1.5, 4}.values()), ContractViolation);
}

TEST_CASE("residue normalization") {
  // (delta_h)_1 e_1 = d zeta / (2 pi i)
  CHECK(std::abs(residue_normalization(1, 1) - 1.0 / kTwoPiI) < 1e-15);
  CHECK(std::abs(residue_normalization(2, 2)) > 0);
}

TEST_CASE("one-variable Cauchy oracle") {
  // f = zeta, hs: R_1 = eps d zbar e / (|x|^2 + eps)^2; mass against dz/(2 pi i) -> 1
  Layout L(1, 1, 1);
  auto cf = koszul_currents({zt(1, 0)}, RegKind::hs);
  auto R = cf.R(CPoint{0.3}, 0.01, std::vector<cplx>{1.0});
  const double expect = 0.01 / std::pow(0.09 + 0.01, 2);
  CHECK(std::abs(R.coeff(key::make(L.anti_bit(0) | L.eframe_bit(0), 0)) - expect) < 1e-12);
  auto g = grothendieck_residue({zt(1, 0)}, cst(1, 1.0), RegKind::hs, fast_options());
  CHECK(std::abs(g.value - 1.0) < 1e-4);
  auto g2 = grothendieck_residue({zt(1, 0) * zt(1, 0)}, zt(1, 0), RegKind::cutoff, fast_options());
  CHECK(std::abs(g2.value - 1.0) < 1e-3);
}

TEST_CASE("grothendieck residues in two variables") {
  const int n = 2;
  auto o = fast_options();
  auto cal = grothendieck_residue({zt(n, 0), zt(n, 1)}, cst(n, 1.0), RegKind::cutoff, o);
  CHECK(std::abs(cal.value - 1.0) < 1e-4);
  std::vector<MixedPoly> f{zt(n, 0) * zt(n, 0), zt(n, 1) * zt(n, 1) * zt(n, 1)};
  auto a = grothendieck_residue(f, zt(n, 0) * zt(n, 1) * zt(n, 1), RegKind::cutoff, o);
  auto b = grothendieck_residue(f, zt(n, 0) * zt(n, 1) * zt(n, 1), RegKind::hs, o);
  CHECK(std::abs(a.value - 1.0) < 5e-2);
  CHECK(std::abs(b.value - 1.0) < 5e-2);
  CHECK(std::abs(a.value - b.value) <= 2 * std::max(a.error, b.error));
  CHECK(a.converged);
  auto c = grothendieck_residue({zt(n, 0) * zt(n, 0), zt(n, 1)}, cst(n, 1.0), RegKind::cutoff, o);
  CHECK(std::abs(c.value) < 5e-2);
  CHECK_THROWS_AS(grothendieck_residue({zt(n, 0)}, cst(n, 1.0), RegKind::hs, o), ContractViolation);
}

TEST_CASE("residue pairings detect membership") {
  const int n = 2;
  auto o = fast_options();
  auto cf = koszul_currents({zt(n, 0) * zt(n, 0), zt(n, 1) * zt(n, 1)}, RegKind::cutoff);
  auto test = residue_test_form(cf.layout(), cst(n, 1.0), o.test_rho0, o.test_rho1);
  auto out = residue_pairing(cf, {zt(n, 0) * zt(n, 1)}, test, o);
  CHECK(std::abs(out.value) >= 0.1);
  auto s = zt(n, 0) + zt(n, 1);
  auto in = residue_pairing(cf, {s * s * s * s}, test, o);
  CHECK(std::abs(in.value) < 1e-3);
  // R(f psi) -> 0
  auto fpsi = residue_pairing(cf, {zt(n, 0) * zt(n, 0) * (zt(n, 1) + cst(n, 2.0))}, test, o);
  CHECK(std::abs(fpsi.value) < 1e-3);
}
