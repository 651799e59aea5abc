// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion ids...]
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "resdiv/divider.hpp"

using namespace resdiv;

namespace {

MixedPoly zt(int n, int j) { return MixedPoly::zeta(n, j); }
MixedPoly cst(int n, cplx c) { return MixedPoly::constant(n, c); }

std::vector<CPoint> sample_points(int count, int n, double rad, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<CPoint> out;
  while (static_cast<int>(out.size()) < count) {
    CPoint p(n);
    double r2 = 0;
    for (auto& c : p) {
      c = cplx(u(rng), u(rng)) * rad;
      r2 += std::norm(c);
    }
    if (r2 < rad * rad) out.push_back(p);
  }
  return out;
}

// Random holomorphic polynomial with Gaussian-integer coefficients, total degree <= deg.
MixedPoly random_holo(std::mt19937& rng, int n, int deg, int terms = 4) {
  std::uniform_int_distribution<int> ci(-3, 3), e(0, deg);
  MixedPoly p(n);
  for (int t = 0; t < terms; ++t) {
    MultiDeg d;
    int left = e(rng);
    for (int j = 0; j < n; ++j) {
      const int x = j + 1 == n ? left : std::uniform_int_distribution<int>(0, left)(rng);
      d.holo(j) = static_cast<std::uint8_t>(x);
      left -= x;
    }
    p.add_term(d, cplx(ci(rng), ci(rng)));
  }
  return p;
}

ExtElem random_elem(std::mt19937& rng, const Layout& L, int parity_req = -1) {
  std::uniform_int_distribution<std::uint32_t> bits(0, (1u << (2 * L.n + 2 * L.m)) - 1);
  std::uniform_int_distribution<int> ci(-3, 3), nt(1, 5), sym(0, 2);
  ExtElem x(L);
  const int terms = nt(rng);
  for (int t = 0; t < terms; ++t) {
    std::uint32_t m = bits(rng);
    if (parity_req >= 0 && (std::popcount(m) & 1) != parity_req) m ^= 1u;
    x.push(key::make(m, key::with_sym_exp(0, 0, sym(rng))), cplx(ci(rng), ci(rng)));
  }
  x.normalize();
  return x;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Verdict {
  bool pass;
  std::string detail;
};

// 1. exterior algebra laws, exact at coefficient level (Gaussian-integer data)
Verdict algebra_laws() {
  std::mt19937 rng(101);
  const Layout L(2, 3, 1);
  std::uniform_int_distribution<int> ci(-3, 3);
  long checks = 0, failures = 0;
  auto check = [&](bool ok) {
    ++checks;
    failures += !ok;
  };
  while (checks < 10000) {
    auto a = random_elem(rng, L), b = random_elem(rng, L), c = random_elem(rng, L);
    check(wedge(wedge(a, b), c) == wedge(a, wedge(b, c)));
    auto oa = random_elem(rng, L, 1), ob = random_elem(rng, L, 1), ea = random_elem(rng, L, 0);
    check(wedge(oa, ob) == -wedge(ob, oa));
    check(wedge(ea, b) == wedge(b, ea));
    std::vector<cplx> co(L.m), v(L.n);
    for (auto& x : co) x = cplx(ci(rng), ci(rng));
    for (auto& x : v) x = cplx(ci(rng), ci(rng));
    for (int par = 0; par < 2; ++par) {
      auto h = random_elem(rng, L, par);
      const double s = par ? -1.0 : 1.0;
      check(contract_frame<cplx>(co, wedge(h, b)) ==
            wedge(contract_frame<cplx>(co, h), b) + wedge(h, contract_frame<cplx>(co, b)).scaled(s));
      check(contract_holo<cplx>(v, wedge(h, b)) ==
            wedge(contract_holo<cplx>(v, h), b) + wedge(h, contract_holo<cplx>(v, b)).scaled(s));
    }
    check(contract_frame<cplx>(co, contract_frame<cplx>(co, a)).is_zero());
    check(contract_holo<cplx>(v, contract_holo<cplx>(v, a)).is_zero());
  }
  // symbolic delta_{zeta - z} squares to zero; 2 pi i is not exact, so relative 1e-12
  for (int it = 0; it < 50; ++it) {
    auto x = lift(random_elem(rng, L));
    x = wedge(x, SymbExt::scalar(L, random_holo(rng, 2, 2) + MixedPoly::param(2, 0)));
    check(symb_norm(delta_zeta_minus_z(delta_zeta_minus_z(x))) <= 1e-12 * symb_norm(x));
  }
  return {failures == 0, std::to_string(checks) + " checks, " + std::to_string(failures) + " failures"};
}

// 2. Hefer decomposition and the (l, k) Hefer identities
Verdict hefer_identities() {
  std::mt19937 rng(202);
  double worst_dec = 0, worst_hdef = 0;
  int families = 0;
  for (int it = 0; it < 50; ++it) {
    const int n = 1 + it % 2;
    const bool matrix = it % 5 == 4;
    const int r = matrix ? 2 : 1, m = matrix ? 2 : 1 + (it / 2) % 3;
    std::vector<std::vector<MixedPoly>> rows(r);
    for (auto& row : rows)
      for (int i = 0; i < m; ++i) row.push_back(random_holo(rng, n, 2));
    HoloMatrix f(n, rows);
    for (const auto& row : rows)
      for (const auto& p : row) {
        auto h = hefer_decompose(p);
        MixedPoly acc = poly_at_param(p) - p;
        for (int k = 0; k < n; ++k) acc += kTwoPiI * h[k] * (zt(n, k) - MixedPoly::param(n, k));
        worst_dec = std::max(worst_dec, acc.norm_inf());
      }
    auto fam = r == 1 ? build_koszul_family(rows[0]) : build_en_family(f);
    worst_hdef = std::max(worst_hdef, fam.hdef_residual());
    ++families;
  }
  return {worst_dec <= 1e-10 && worst_hdef <= 1e-10,
          std::to_string(families) + " families, decompose residual " + fmt(worst_dec) + ", Hefer residual " +
              fmt(worst_hdef)};
}

// 3. reproducing formula with the cutoff weight
Verdict reproducing() {
  std::mt19937 rng(303);
  double worst = 0;
  for (int n = 1; n <= 2; ++n) {
    const Layout L(n, 0, 1);
    auto g = cutoff_weight(L, 1.1, 1.4);
    // g has no top-degree part where the cutoff is 1, so only the annulus contributes
    QuadratureRule rule(Region::annulus(n, 1.1, 1.4), QuadOrders{24, 24, 48, 0, 0.0});
    // angular error grows like (|z| / rho0)^angular: at |z| = 0.9, n = 1 it is ~2e-6
    auto zs = sample_points(10, n, 0.8, 30 + n);
    std::vector<MixedPoly> ps;
    for (int t = 0; t < 10; ++t) ps.push_back(random_holo(rng, n, 4, 5));
    for (const auto& z : zs) {
      auto v = reproduce(ps, z, g, rule);
      for (int t = 0; t < 10; ++t) worst = std::max(worst, std::abs(v[t] - ps[t].eval(z)));
    }
  }
  return {worst <= 1e-6, "max |reproduce - eval| " + fmt(worst) + " over 200 (poly, z)"};
}

// 4. division with empty zero set, two fixtures
Verdict division_z_empty() {
  const int n = 2;
  std::mt19937 rng(404);
  std::vector<MixedPoly> phis{cst(n, 1.0), zt(n, 0) * zt(n, 1) + cst(n, 0.5)};
  for (int k = 0; k < 3; ++k) phis.push_back(random_holo(rng, n, 3));
  auto zs = sample_points(20, n, 0.9, 41);

  std::vector<MixedPoly> row{zt(n, 0) - cst(n, 2.0), zt(n, 1)};
  auto a = divide_koszul(row, phis, zs, DivideConfig{});

  HoloMatrix f(n, {{cst(n, 1.0), zt(n, 0)}, {zt(n, 1), cst(n, 1.0)}});
  DivideConfig cfg;
  cfg.rho0 = 1.05;
  cfg.rho1 = 1.2;
  std::vector<std::vector<MixedPoly>> cols;
  for (int k = 0; k < 5; ++k) cols.push_back({phis[k], phis[(k + 1) % 5]});
  auto b = divide_matrix(f, cols, zs, cfg);

  double zbar = 0;
  auto fa = build_koszul_family(row);
  auto fb = build_en_family(f);
  for (int i = 0; i < 2; ++i) {
    zbar = std::max(zbar, psi_zbar_defect(fa, {phis[2 + i]}, zs[i], DivideConfig{}));
    zbar = std::max(zbar, psi_zbar_defect(fb, cols[2 + i], zs[i], cfg));
  }
  const bool ok = a.max_residual <= 1e-5 && b.max_residual <= 1e-5 && !a.eps_used && !b.eps_used && zbar <= 1e-4;
  return {ok, "koszul residual " + fmt(a.max_residual) + ", (2,2) residual " + fmt(b.max_residual) +
                  ", dpsi/dzbar " + fmt(zbar) + " (20 z x 5 phi each)"};
}

// 5. Grothendieck residues, both regularizations
Verdict residues() {
  ResidueOptions opt;
  opt.orders = QuadOrders{24, 24, 8, 10, 0.0};
  std::ostringstream d;
  bool ok = true;
  for (int n = 1; n <= 2; ++n) {
    std::vector<MixedPoly> f;
    for (int j = 0; j < n; ++j) f.push_back(zt(n, j));
    auto x = grothendieck_residue(f, cst(n, 1.0), RegKind::cutoff, opt);
    // the normalization comes from the Hefer family, not from this fixture, so the
    // calibration is a genuine check limited by the eps extrapolation
    ok = ok && std::abs(x.value - 1.0) <= std::min(2 * x.error, 5e-2);
    d << "calibration n=" << n << " " << fmt(std::abs(x.value - 1.0)) << "+/-" << fmt(x.error) << "; ";
  }
  const int n = 2;
  struct Case {
    std::vector<MixedPoly> f;
    MixedPoly phi;
    cplx expect;
  };
  std::vector<Case> cases{{{zt(n, 0) * zt(n, 0), zt(n, 1) * zt(n, 1) * zt(n, 1)}, zt(n, 0) * zt(n, 1) * zt(n, 1), 1.0},
                          {{zt(n, 0) * zt(n, 0), zt(n, 1)}, cst(n, 1.0), 0.0}};
  for (const auto& c : cases) {
    auto h = grothendieck_residue(c.f, c.phi, RegKind::hs, opt);
    auto k = grothendieck_residue(c.f, c.phi, RegKind::cutoff, opt);
    const bool agree = std::abs(h.value - k.value) <= 2 * (h.error + k.error);
    ok = ok && std::abs(h.value - c.expect) <= 5e-2 && std::abs(k.value - c.expect) <= 5e-2 && agree;
    d << "expect " << fmt(c.expect.real()) << ": hs " << fmt(h.value.real()) << "+/-" << fmt(h.error) << ", cutoff "
      << fmt(k.value.real()) << "+/-" << fmt(k.error) << "; ";
  }
  return {ok, d.str()};
}

// 6. membership battery on (zeta1^2, zeta2^2) against the monomial oracle
Verdict membership() {
  const int n = 2;
  auto s = zt(n, 0) + zt(n, 1);
  HoloMatrix f(n, {{zt(n, 0) * zt(n, 0), zt(n, 1) * zt(n, 1)}});
  auto res = membership_test(f, {{zt(n, 0) * zt(n, 0)}, {zt(n, 0) * zt(n, 1)}, {s * s * s * s}, {s * s}},
                             MembershipConfig{});
  const char* expect[] = {"in", "out", "in", "out"};
  bool ok = true;
  std::ostringstream d;
  for (int i = 0; i < 4; ++i) {
    ok = ok && res[i].verdict == expect[i];
    d << res[i].verdict << "(" << fmt(res[i].ratio) << ") ";
  }
  return {ok, d.str() + "expected in out in out"};
}

// 7. division where the residue annihilates phi
Verdict briancon_skoda() {
  const int n = 2;
  auto s = zt(n, 0) + zt(n, 1);
  auto rep = divide_koszul({zt(n, 0) * zt(n, 0), zt(n, 1) * zt(n, 1)}, {s * s * s * s}, {CPoint{0.0, 0.0}},
                           DivideConfig{});
  const auto& p = rep.points[0];
  return {rep.eps_used && p.residual <= 1e-3 && p.converged,
          "residual at z=0 " + fmt(p.residual) + ", remainder " + fmt(std::abs(p.S[0]))};
}

// 8. regularized (Berndtsson) division against the Koszul division
Verdict berndtsson() {
  const int n = 2;
  std::vector<MixedPoly> f{zt(n, 0) - cst(n, 2.0), zt(n, 1)};
  std::vector<MixedPoly> phis{cst(n, 1.0), zt(n, 0) * zt(n, 1) + cst(n, 0.5)};
  auto zs = sample_points(5, n, 0.6, 81);
  auto b = berndtsson_divide(f, phis, zs, 1e-4, DivideConfig{});
  auto k = divide_koszul(f, phis, zs, DivideConfig{});
  double div = 0, rb = 0, rk = 0;
  for (const auto& p : b.points) {
    div = std::max(div, p.trace["division_defect"].get<double>());
    rb += p.residual * p.residual;
  }
  for (const auto& p : k.points) rk += p.residual * p.residual;
  rb = std::sqrt(rb / b.points.size());
  rk = std::sqrt(rk / k.points.size());
  const double ratio = rb / rk;
  return {div <= 1e-3 && b.max_residual <= 1e-3 && ratio >= 0.1 && ratio <= 10,
          "division defect " + fmt(div) + ", reproduction " + fmt(b.max_residual) + ", rms ratio to koszul " +
              fmt(ratio)};
}

// 9. Hefer decomposition from the Szego kernel
Verdict szego() {
  const int n = 2;
  std::mt19937 rng(909);
  // the kernel decays like |z|^angular; 0.8^96 ~ 5e-10
  QuadratureRule sph(Region::sphere(n), QuadOrders{16, 16, 96, 0, 0.0});
  auto ws = sample_points(20, n, 0.8, 91), zs = sample_points(20, n, 0.8, 92);
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    auto phi = random_holo(rng, n, 3, 5);
    auto p = hefer_via_szego(phi, ws[i], zs[i], sph);
    cplx lhs = 0;
    for (int j = 0; j < n; ++j) lhs += p[j] * (zs[i][j] - ws[i][j]);
    worst = std::max(worst, std::abs(lhs - (phi.eval(zs[i]) - phi.eval(ws[i]))));
  }
  return {worst <= 1e-5, "max identity defect " + fmt(worst) + " over 20 pairs"};
}

// 10. every weight the library constructs is a weight
Verdict weights() {
  double nabla = 0, g00 = 0, offd = 0, zbar = 0;
  int count = 0;
  auto take = [&](const Weight& g, unsigned seed, double zr) {
    auto c = check_weight(g, 200, seed, 1.5, zr);
    nabla = std::max(nabla, c.nabla_residual);
    g00 = std::max(g00, c.g00_defect);
    offd = std::max(offd, c.offdiag);
    zbar = std::max(zbar, c.zbar_defect);
    ++count;
  };
  for (int n = 1; n <= 3; ++n) {
    const Layout L(n, 0, 1);
    take(unit_weight(L), 10 + n, 0.9);
    take(cutoff_weight(L, 1.1, 1.4), 20 + n, 0.9);
    take(cutoff_weight(L, 1.05, 1.2), 30 + n, 0.9);
    take(weight_product(cutoff_weight(L, 1.1, 1.4), cutoff_weight(L, 1.2, 1.45)), 40 + n, 0.9);
  }
  const bool ok = nabla <= 1e-4 && g00 <= 1e-12 && offd == 0.0 && zbar <= 1e-6;
  return {ok, std::to_string(count) + " weights x 200 samples: nabla " + fmt(nabla) + ", g00 " + fmt(g00) +
                  ", offdiag " + fmt(offd) + ", dzbar " + fmt(zbar)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "algebra-laws", 10, algebra_laws},       {2, "hefer-identities", 30, hefer_identities},
      {3, "reproducing-formula", 120, reproducing}, {4, "division-z-empty", 300, division_z_empty},
      {5, "grothendieck-residues", 300, residues},  {6, "membership-battery", 300, membership},
      {7, "briancon-skoda", 180, briancon_skoda},   {8, "berndtsson-cross-check", 120, berndtsson},
      {9, "szego-hefer", 120, szego},               {10, "weight-validity", 60, weights},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= c.budget_s;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("%s %2d %-24s %s [%.1f s / %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), s,
                c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
