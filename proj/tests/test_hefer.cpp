#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "resdiv/hefer.hpp"

using namespace resdiv;

namespace {

MixedPoly zt(int n, int j) { return MixedPoly::zeta(n, j); }
MixedPoly par(int n, int j) { return MixedPoly::param(n, j); }
MixedPoly cst(int n, cplx c) { return MixedPoly::constant(n, c); }

MixedPoly random_holo(std::mt19937& rng, int n, int deg) {
  std::uniform_int_distribution<int> ci(-3, 3), e(0, deg);
  MixedPoly p(n);
  for (int t = 0; t < 4; ++t) {
    MultiDeg d;
    int left = deg;
    for (int j = 0; j < n; ++j) {
      d.holo(j) = static_cast<std::uint8_t>(std::min(left, e(rng)));
      left -= d.holo(j);
    }
    p.add_term(d, cplx(ci(rng), ci(rng)));
  }
  return p;
}

// sum_k 2 pi i h_k (zeta_k - z_k) - (p(zeta) - p(z))
MixedPoly decompose_residual(const MixedPoly& p, const std::vector<MixedPoly>& h) {
  const int n = p.dim();
  MixedPoly acc = poly_at_param(p) - p;
  for (int k = 0; k < n; ++k) acc += kTwoPiI * h[k] * (zt(n, k) - par(n, k));
  return acc;
}

}  // namespace

TEST_CASE("hefer_decompose examples") {
  const int n = 2;
  auto h = hefer_decompose(zt(n, 0) * zt(n, 1));
  CHECK(approx_equal(h[0], zt(n, 1) * (1.0 / kTwoPiI), 1e-15));
  CHECK(approx_equal(h[1], par(n, 0) * (1.0 / kTwoPiI), 1e-15));
  CHECK(decompose_residual(zt(n, 0) * zt(n, 1), h).norm_inf() < 1e-15);
  for (auto& x : hefer_decompose(cst(n, 3.0))) CHECK(x.is_zero());
  auto h2 = hefer_decompose(zt(n, 0) * zt(n, 0));
  CHECK(approx_equal(h2[0], (zt(n, 0) + par(n, 0)) * (1.0 / kTwoPiI), 1e-15));
  CHECK(h2[1].is_zero());
  CHECK_THROWS_AS(hefer_decompose(MixedPoly::zeta_bar(n, 0)), ContractViolation);
  std::mt19937 rng(1);
  for (int i = 0; i < 40; ++i) {
    auto p = random_holo(rng, 3, 4);
    CHECK(decompose_residual(p, hefer_decompose(p)).norm_inf() < 1e-12);
  }
}

TEST_CASE("delta_solve") {
  const int n = 2;
  Layout L(n, 1, 1);
  auto d1 = SymbExt::monomial(L, key::make(L.holo_bit(0), 0), cst(n, 1.0));
  auto d2 = SymbExt::monomial(L, key::make(L.holo_bit(1), 0), cst(n, 1.0));
  SymbExt xi = wedge(SymbExt::scalar(L, kTwoPiI * (zt(n, 0) - par(n, 0))), d2) -
               wedge(SymbExt::scalar(L, kTwoPiI * (zt(n, 1) - par(n, 1))), d1);
  SymbExt sol = delta_solve(xi);
  CHECK(symb_norm(delta_zeta_minus_z(sol) - xi) < 1e-12);
  // the homotopy picks dz1 ^ dz2: delta(dz1 dz2) = 2 pi i ((zeta1-z1) dz2 - (zeta2-z2) dz1)
  CHECK(sol.size() == 1);
  CHECK(std::abs(sol.terms()[0].second.terms().begin()->second - 1.0) < 1e-14);
  CHECK(delta_solve(SymbExt(L)).is_zero());
  // round trip xi = delta(eta)
  std::mt19937 rng(2);
  for (int i = 0; i < 20; ++i) {
    SymbExt eta(L);
    eta.push(key::make(L.holo_bit(0), 0), random_holo(rng, n, 3) * par(n, 1));
    eta.push(key::make(L.holo_bit(1) | L.eframe_bit(0), 0), random_holo(rng, n, 2));
    eta.push(key::make(L.holo_bit(0) | L.holo_bit(1), 0), random_holo(rng, n, 2));
    eta.normalize();
    auto x = delta_zeta_minus_z(eta);
    auto y = delta_solve(x);
    CHECK(symb_norm(delta_zeta_minus_z(y) - x) < 1e-10 * std::max(1.0, symb_norm(x)));
  }
  CHECK_THROWS_AS(delta_solve(d1), ContractViolation);
}

TEST_CASE("Koszul family") {
  auto fam1 = build_koszul_family({zt(1, 0)});
  const Layout& L1 = fam1.layout();
  REQUIRE(fam1.N == 1);
  auto img = fam1.H[0][1].image.at(key::make(L1.eframe_bit(0), 0));
  REQUIRE(img.size() == 1);
  CHECK(img.terms()[0].first == key::make(L1.holo_bit(0), key::with_qframe(0, 0)));
  CHECK(std::abs(img.terms()[0].second.terms().begin()->second - 1.0 / kTwoPiI) < 1e-15);
  CHECK(fam1.hdef_residual() < 1e-14);

  std::mt19937 rng(3);
  for (int i = 0; i < 10; ++i) {
    auto fam = build_koszul_family({random_holo(rng, 2, 2), random_holo(rng, 2, 2)});
    CHECK(fam.N == 2);
    CHECK(fam.hdef_residual() < 1e-10);
    CHECK(fam.diagonal_defect() == 0.0);
    for (int l = 0; l <= 2; ++l) CHECK(fam.H[l][l].image.size() == en_basis(fam.layout(), l).size());
  }
}

TEST_CASE("Eagon-Northcott complex is a complex") {
  const int n = 2;
  std::mt19937 rng(4);
  std::vector<std::vector<MixedPoly>> rows(3);
  for (auto& row : rows)
    for (int i = 0; i < 5; ++i) row.push_back(random_holo(rng, n, 1));
  HoloMatrix f(n, rows);
  CHECK(f.length() == 3);
  const Layout L = f.layout();
  CHECK(en_basis(L, 2).size() == 5);   // L^4 E
  CHECK(en_basis(L, 3).size() == 3);   // L^5 E (x) Q*
  for (int k = 2; k <= 3; ++k) {
    auto c = compose(en_differential(f, k - 1), en_differential(f, k));
    for (auto& [b, v] : c.image) CHECK(symb_norm(v) < 1e-10);
  }
}

TEST_CASE("Eagon-Northcott families") {
  const int n = 2;
  // Z-empty 2 x 2 fixture, det f = 1 - zeta1 zeta2
  HoloMatrix f(n, {{cst(n, 1.0), zt(n, 0)}, {zt(n, 1), cst(n, 1.0)}});
  auto fam = build_en_family(f);
  CHECK(fam.N == 1);
  CHECK(fam.hdef_residual() < 1e-12);
  // H^0_1 e_i = sum_j h_{ji} eps_j
  const Layout& L = fam.layout();
  auto img = fam.H[0][1].image.at(key::make(L.eframe_bit(1), 0));
  CHECK(img.coeff(key::make(L.holo_bit(0), key::with_qframe(0, 0))).norm_inf() == doctest::Approx(1 / (2 * M_PI)));

  // r = 3 family with a nontrivial length
  std::mt19937 rng(5);
  for (int t = 0; t < 3; ++t) {
    std::vector<std::vector<MixedPoly>> rows(3);
    for (auto& row : rows)
      for (int i = 0; i < 4; ++i) row.push_back(random_holo(rng, n, 2));
    auto fam3 = build_en_family(HoloMatrix(n, rows));
    CHECK(fam3.N == 2);
    CHECK(fam3.hdef_residual() < 1e-10);
    CHECK(!fam3.H[0][2].image.empty());
    CHECK(!fam3.H[1][2].image.empty());
  }
  std::vector<std::vector<MixedPoly>> rows2(2, std::vector<MixedPoly>(3, zt(n, 0)));
  CHECK_THROWS_AS(build_en_family(HoloMatrix(n, rows2)), ContractViolation);
  // r = 1 degenerates to the Koszul family
  HoloMatrix row(n, {{zt(n, 0) - cst(n, 2.0), zt(n, 1)}});
  auto a = build_en_family(row), b = build_koszul_family(row.rows[0]);
  CHECK(family_to_json(a) == family_to_json(b));
}

TEST_CASE("closed form H^1_2 for r = 2 satisfies the Hefer identity") {
  // H = delta_{f^1} delta_{h_2} - delta_{h_1} delta_{f^2(z)} as operator on L^3 E (m = 3)
  const int n = 2;
  std::mt19937 rng(6);
  std::vector<std::vector<MixedPoly>> rows(2);
  for (auto& row : rows)
    for (int i = 0; i < 3; ++i) row.push_back(random_holo(rng, n, 2));
  const Layout L(n, 3, 2);
  auto row_op = [&](const std::vector<SymbExt>& g, const SymbExt& x) {
    SymbExt out(L);
    for (const auto& [k, c] : x.terms()) {
      const std::uint32_t m = key::mask(k);
      for (int i = 0; i < 3; ++i) {
        const int bit = 2 * n + i;
        if (!(m & (1u << bit))) continue;
        auto mono = SymbExt::monomial(L, key::make(m & ~(1u << bit), key::comm(k)),
                                      c * cplx(key::pass_sign(m, bit)));
        // forms in x sit left of the frames; g (even 1-form or scalar) goes in front
        out += wedge(g[i], mono);
      }
    }
    return out;
  };
  auto scalars = [&](int j, bool z) {
    std::vector<SymbExt> g;
    for (auto& p : rows[j]) g.push_back(SymbExt::scalar(L, z ? poly_at_param(p) : p));
    return g;
  };
  auto hforms = [&](int j) {
    std::vector<SymbExt> g;
    for (auto& p : rows[j]) g.push_back(hefer_form(L, p));
    return g;
  };
  SymbExt b = SymbExt::monomial(L, key::make(L.eframe_mask(), 0), cst(n, 1.0));
  SymbExt H = row_op(scalars(0, false), row_op(hforms(1), b)) - row_op(hforms(0), row_op(scalars(1, true), b));
  // f_2 = delta_{f^2} delta_{f^1}
  SymbExt f2z = row_op(scalars(1, false), row_op(scalars(0, false), b));
  SymbExt f2w = row_op(scalars(1, true), row_op(scalars(0, true), b));
  CHECK(symb_norm(delta_zeta_minus_z(H) - (f2z - f2w)) < 1e-10);
}

TEST_CASE("family serialization and cache key") {
  const int n = 2;
  HoloMatrix f(n, {{cst(n, 1.0), zt(n, 0)}, {zt(n, 1), cst(n, 1.0)}});
  auto fam = build_en_family(f);
  auto j = family_to_json(fam);
  auto back = family_from_json(nlohmann::json::parse(j.dump()));
  CHECK(family_to_json(back) == j);
  CHECK(back.hdef_residual() < 1e-12);
  HoloMatrix g(n, {{cst(n, 1.0), zt(n, 1)}, {zt(n, 1), cst(n, 1.0)}});
  CHECK(family_cache_key(f) != family_cache_key(g));
  CHECK(family_cache_key(f).size() == 16);
}
