#include <cmath>

#include "resdiv/currents.hpp"
#include "resdiv/weights.hpp"

namespace resdiv {

std::vector<double> EpsSchedule::values() const {
  if (!(base > 0 && base < 1) || count < 2) throw ContractViolation("eps schedule: need 0 < base < 1 and count >= 2");
  std::vector<double> e;
  for (int i = 2; i <= count + 1; ++i) e.push_back(std::pow(base, i));
  return e;
}

Extrapolated richardson(const std::vector<double>& eps, const std::vector<cplx>& vals) {
  if (eps.size() != vals.size() || eps.size() < 2) throw ContractViolation("richardson: need >= 2 values");
  Extrapolated r;
  r.eps = eps;
  r.trace = vals;
  std::vector<cplx> A;
  for (std::size_t i = 1; i < vals.size(); ++i) {
    const double q = eps[i] / eps[i - 1];
    A.push_back((vals[i] - q * vals[i - 1]) / (1.0 - q));
  }
  r.value = A.back();
  const double scale = std::max(1.0, std::abs(r.value));
  if (A.size() >= 2) {
    const std::size_t K = A.size() - 1;
    r.extrap_error = std::abs(A[K] - A[K - 1]);
    const double prev = A.size() >= 3 ? std::abs(A[K - 1] - A[K - 2]) : r.extrap_error;
    r.converged = r.extrap_error <= prev + 1e-12 * scale || r.extrap_error <= 1e-8 * scale;
  } else {
    r.extrap_error = std::abs(vals[1] - vals[0]);
  }
  r.error = r.extrap_error;
  return r;
}

cplx residue_normalization(int n, int N) {
  if (N < 1 || N > n) throw ContractViolation("residue_normalization: need 1 <= N <= n");
  std::vector<MixedPoly> row;
  for (int j = 0; j < N; ++j) row.push_back(MixedPoly::zeta(n, j));
  auto fam = build_koszul_family(row);
  const Layout& L = fam.layout();
  auto H = lower(fam.H[0][N], CPoint(n), CPoint(n));
  auto basis = en_basis(L, N);
  ExtElem img = H.apply(ExtElem::monomial(L, basis.at(0), 1.0));
  std::uint32_t dz = 0;
  for (int j = 0; j < N; ++j) dz |= L.holo_bit(j);
  return img.coeff(key::make(dz, key::with_qframe(0, 0)));
}

FormField residue_test_form(const Layout& L, const MixedPoly& t, double rho0, double rho1, std::uint32_t anti) {
  if (anti & ~L.anti_mask()) throw ContractViolation("residue_test_form: bad anti-holomorphic mask");
  std::uint32_t dz = L.holo_mask() | anti;
  return FormField{[L, t, rho0, rho1, dz](const CPoint& zeta, const CPoint&, double) {
                     double r2 = 0;
                     for (const auto& c : zeta) r2 += std::norm(c);
                     const double chi = cutoff_profile(std::sqrt(r2), rho0, rho1);
                     if (chi == 0.0) return ExtElem(L);
                     return ExtElem::monomial(L, key::make(dz, 0), chi * t.eval(zeta));
                   },
                   {L.n, std::popcount(anti), 0}, L};
}

namespace {

std::vector<cplx> run_pass(const CurrentFamily& cf, const std::vector<std::vector<MixedPoly>>& phis,
                           const std::vector<FormField>& tests, const std::vector<MonoKey>& frames,
                           const std::vector<double>& eps, const QuadratureRule& rule, int threads, cplx norm) {
  const Layout& L = cf.layout();
  const int N = std::min(cf.length(), L.n);
  const std::size_t P = phis.size(), T = tests.size(), F = frames.size(), E = eps.size();
  const std::uint32_t fm = L.form_mask();
  const CPoint z0(L.n);
  auto kernel = [&](const CPoint& zeta, double w, cplx* acc) {
    std::vector<ExtElem> tv;
    bool any = false;
    for (const auto& t : tests) {
      tv.push_back(t(zeta, z0, 0.0));
      any = any || !tv.back().terms().empty();
    }
    if (!any) return;
    const CurrentPoint pt = cf.eval(zeta);
    const CurrentPoint::Comp* comp = nullptr;
    for (const auto& c : pt.R)
      if (c.level == N) comp = &c;
    if (!comp) return;
    std::vector<double> fac(E);
    for (std::size_t e = 0; e < E; ++e) fac[e] = w * comp->factor(pt.v, eps[e]);
    for (std::size_t p = 0; p < P; ++p) {
      ExtElem R(L);
      for (std::size_t j = 0; j < comp->on_basis.size(); ++j) {
        const cplx ph = phis[p][j].eval(zeta);
        if (ph != cplx{}) R += comp->on_basis[j].scaled(ph);
      }
      for (std::size_t f = 0; f < F; ++f) {
        ExtElem om(L);
        for (const auto& [k, c] : R.terms()) {
          const std::uint32_t m = key::mask(k);
          if (key::make(m & ~fm, key::comm(k)) == frames[f]) om.push(key::make(m & fm, 0), c);
        }
        om.normalize();
        if (om.terms().empty()) continue;
        for (std::size_t t = 0; t < T; ++t) {
          if (tv[t].terms().empty()) continue;
          const cplx d = norm * form_density(wedge(om, tv[t]), zeta, RegionKind::ball);
          cplx* a = acc + ((p * T + t) * F + f) * E;
          for (std::size_t e = 0; e < E; ++e) a[e] += fac[e] * d;
        }
      }
    }
  };
  return integrate_batch(rule, P * T * F * E, kernel, threads);
}

QuadOrders coarsen(const QuadOrders& o) {
  QuadOrders c = o;
  c.radial = std::max(4, (2 * o.radial) / 3);
  c.latitude = std::max(4, (2 * (o.latitude ? o.latitude : o.radial)) / 3);
  c.angular = std::max(4, (2 * o.angular) / 3);
  return c;
}

}  // namespace

std::vector<std::vector<std::vector<Extrapolated>>> residue_battery(
    const CurrentFamily& cf, const std::vector<std::vector<MixedPoly>>& phis, const std::vector<FormField>& tests,
    const std::vector<MonoKey>& frames, const ResidueOptions& opt) {
  const Layout& L = cf.layout();
  for (const auto& p : phis)
    if (static_cast<int>(p.size()) != cf.matrix().r) throw ContractViolation("residue: phi has the wrong length");
  if (!(opt.test_rho0 > 0 && opt.test_rho0 < opt.test_rho1)) throw ContractViolation("residue: need 0 < rho0 < rho1");
  const auto eps = opt.eps.values();
  const int N = std::min(cf.length(), L.n);
  const cplx norm = cf.matrix().r == 1 ? residue_normalization(L.n, N) : cplx(1.0);
  QuadOrders o = opt.orders;
  o.break_radius = opt.test_rho0;
  Region reg = Region::ball(L.n, opt.test_rho1);
  auto fine = run_pass(cf, phis, tests, frames, eps, QuadratureRule(reg, o), opt.threads, norm);
  std::vector<cplx> coarse;
  if (opt.coarse_check) coarse = run_pass(cf, phis, tests, frames, eps, QuadratureRule(reg, coarsen(o)), opt.threads, norm);
  const std::size_t E = eps.size();
  std::vector<std::vector<std::vector<Extrapolated>>> out(phis.size(),
                                                         std::vector<std::vector<Extrapolated>>(tests.size()));
  for (std::size_t p = 0; p < phis.size(); ++p)
    for (std::size_t t = 0; t < tests.size(); ++t)
      for (std::size_t f = 0; f < frames.size(); ++f) {
        const std::size_t off = ((p * tests.size() + t) * frames.size() + f) * E;
        auto x = richardson(eps, {fine.begin() + off, fine.begin() + off + E});
        if (opt.coarse_check) {
          auto y = richardson(eps, {coarse.begin() + off, coarse.begin() + off + E});
          x.quad_error = std::abs(x.value - y.value);
          x.error += x.quad_error;
        }
        out[p][t].push_back(std::move(x));
      }
  return out;
}

namespace {

std::vector<MonoKey> top_frames(const CurrentFamily& cf) {
  const int N = std::min(cf.length(), cf.layout().n);
  auto b = en_basis(cf.layout(), N);
  if (b.empty()) throw ContractViolation("residue: top level of the complex is zero");
  return b;
}

}  // namespace

Extrapolated residue_pairing(const CurrentFamily& cf, const std::vector<MixedPoly>& phi, const FormField& test,
                             const ResidueOptions& opt) {
  auto frames = top_frames(cf);
  auto res = residue_battery(cf, {phi}, {test}, frames, opt);
  // canonical pairing: sum over the basis of the top level
  Extrapolated acc = res[0][0][0];
  for (std::size_t f = 1; f < frames.size(); ++f) {
    const auto& x = res[0][0][f];
    acc.value += x.value;
    acc.error += x.error;
    acc.extrap_error += x.extrap_error;
    acc.quad_error += x.quad_error;
    acc.converged = acc.converged && x.converged;
    for (std::size_t e = 0; e < acc.trace.size(); ++e) acc.trace[e] += x.trace[e];
  }
  return acc;
}

Extrapolated grothendieck_residue(const std::vector<MixedPoly>& f, const MixedPoly& phi, RegKind reg,
                                  const ResidueOptions& opt) {
  if (f.empty() || static_cast<int>(f.size()) != f[0].dim())
    throw ContractViolation("grothendieck_residue: need m = n");
  auto cf = koszul_currents(f, reg);
  const Layout& L = cf.layout();
  return residue_pairing(cf, {phi}, residue_test_form(L, MixedPoly::constant(L.n, 1.0), opt.test_rho0, opt.test_rho1),
                         opt);
}

}  // namespace resdiv
