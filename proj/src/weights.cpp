#include "resdiv/weights.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace resdiv {

double cutoff_profile(double t, double rho0, double rho1) {
  if (t <= rho0) return 1.0;
  if (t >= rho1) return 0.0;
  const double u = (t - rho0) / (rho1 - rho0);
  return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double cutoff_profile_derivative(double t, double rho0, double rho1) {
  if (t <= rho0 || t >= rho1) return 0.0;
  const double u = (t - rho0) / (rho1 - rho0);
  return -30.0 * u * u * (1.0 - u) * (1.0 - u) / (rho1 - rho0);
}

Weight unit_weight(const Layout& L) {
  Weight g;
  g.kind = WeightKind::trivial;
  g.field = FormField{[L](const CPoint&, const CPoint&, double) { return ExtElem::scalar(L, 1.0); }, {0, 0, 0}, L};
  return g;
}

namespace {

ExtElem one_form(const Layout& L, bool holo, const std::vector<cplx>& c) {
  ExtElem x(L);
  for (int j = 0; j < L.n; ++j) x.push(key::make(holo ? L.holo_bit(j) : L.anti_bit(j), 0), c[j]);
  x.normalize();
  return x;
}

// sum_j d conj(zeta_j) ^ d zeta_j
ExtElem dbar_d_sq(const Layout& L) {
  ExtElem x(L);
  for (int j = 0; j < L.n; ++j)
    x += wedge(ExtElem::gen(L, {Species::AntiDiff, j}, 1.0), ExtElem::gen(L, {Species::HoloDiff, j}, 1.0));
  return x;
}

}  // namespace

Weight cutoff_weight(const Layout& L, double rho0, double rho1) {
  if (!(rho0 > 1.0)) throw ContractViolation("cutoff_weight: rho0 must exceed 1 so the cutoff covers the closed ball");
  if (!(rho1 > rho0)) throw ContractViolation("cutoff_weight: need rho0 < rho1");
  Weight g;
  g.kind = WeightKind::cutoff;
  g.rho0 = rho0;
  g.rho1 = rho1;
  const int n = L.n;
  g.field.layout = L;
  g.field.meta = {n, n, 0};
  g.field.eval = [L, n, rho0, rho1](const CPoint& zeta, const CPoint& z, double) {
    double t2 = 0;
    for (auto c : zeta) t2 += std::norm(c);
    double zn = 0;
    for (auto c : z) zn += std::norm(c);
    if (std::sqrt(zn) >= rho0) throw ContractViolation("cutoff_weight: |z| must be below rho0");
    const double t = std::sqrt(t2);
    ExtElem out = ExtElem::scalar(L, cutoff_profile(t, rho0, rho1));
    if (t <= rho0 || t >= rho1) return out;
    const double dp = cutoff_profile_derivative(t, rho0, rho1);
    std::vector<cplx> a(n), sb(n), dD(n);
    cplx D = t2;
    for (int j = 0; j < n; ++j) {
      D -= std::conj(zeta[j]) * z[j];
      a[j] = dp * zeta[j] / (2 * t);
      dD[j] = zeta[j] - z[j];
    }
    for (int j = 0; j < n; ++j) sb[j] = std::conj(zeta[j]) / (kTwoPiI * D);
    const ExtElem dchi = one_form(L, false, a);
    const ExtElem s = one_form(L, true, sb);
    const ExtElem ds = dbar_d_sq(L).scaled(1.0 / (kTwoPiI * D)) - wedge(one_form(L, false, dD).scaled(1.0 / D), s);
    ExtElem acc = s, term = s;
    for (int k = 1; k < n; ++k) {
      term = wedge(term, ds);
      acc += term;
    }
    out -= wedge(dchi, acc);
    return out;
  };
  return g;
}

std::vector<FormField> boundary_weight_kernels(const Layout& L) {
  std::vector<FormField> out;
  const int n = L.n;
  for (int k = 1; k <= n; ++k) {
    FormField F;
    F.layout = L;
    F.meta = {k, k - 1, 0};
    F.eval = [L, n, k](const CPoint& zeta, const CPoint& z, double) {
      double t2 = 0;
      for (auto c : zeta) t2 += std::norm(c);
      if (std::abs(t2 - 1.0) > 1e-9) throw ContractViolation("boundary kernel: zeta must lie on the unit sphere");
      cplx den = 1.0;
      std::vector<cplx> sb(n);
      for (int j = 0; j < n; ++j) {
        den -= std::conj(zeta[j]) * z[j];
        sb[j] = std::conj(zeta[j]);
      }
      ExtElem x = one_form(L, true, sb);
      const ExtElem dd = dbar_d_sq(L);
      for (int i = 1; i < k; ++i) x = wedge(x, dd);
      return x.scaled(1.0 / (std::pow(kTwoPiI, k) * std::pow(den, k)));
    };
    out.push_back(F);
  }
  return out;
}

Weight weight_product(const Weight& g1, const Weight& g2) {
  if (!(g1.field.layout == g2.field.layout)) throw ContractViolation("weight_product: layout mismatch");
  if (g1.singular && g2.singular) {
    const auto [a1, b1] = *g1.singular;
    const auto [a2, b2] = *g2.singular;
    if (!(b1 < a2 || b2 < a1)) throw ContractViolation("weight_product: singular supports overlap");
  }
  if (g1.kind == WeightKind::trivial) return g2;
  if (g2.kind == WeightKind::trivial) return g1;
  Weight g;
  g.kind = WeightKind::product;
  g.rho0 = std::min(g1.rho0, g2.rho0);
  g.rho1 = std::max(g1.rho1, g2.rho1);
  g.singular = g1.singular ? g1.singular : g2.singular;
  const Layout L = g1.field.layout;
  const int n = L.n;
  g.field.layout = L;
  g.field.meta = {n, n, 0};
  auto f1 = g1.field.eval, f2 = g2.field.eval;
  g.field.eval = [f1, f2, L](const CPoint& zeta, const CPoint& z, double eps) {
    ExtElem p = wedge(f1(zeta, z, eps), f2(zeta, z, eps));
    // truncate above (n, n)
    ExtElem out(L);
    for (const auto& [k, c] : p.terms())
      if (holo_degree(L, k) <= L.n && anti_degree(L, k) <= L.n) out.push(k, c);
    out.normalize();
    return out;
  };
  return g;
}

ExtElem dbar_fd(const FormField& F, const CPoint& zeta, const CPoint& z, double eps, double h) {
  const Layout& L = F.layout;
  ExtElem out(L);
  for (int j = 0; j < L.n; ++j) {
    CPoint a = zeta, b = zeta, c = zeta, d = zeta;
    a[j] += h;
    b[j] -= h;
    c[j] += cplx(0, h);
    d[j] -= cplx(0, h);
    ExtElem dx = F(a, z, eps) - F(b, z, eps);
    ExtElem dy = F(c, z, eps) - F(d, z, eps);
    ExtElem dzb = (dx + dy.scaled(cplx(0, 1))).scaled(1.0 / (4 * h));
    out += wedge(ExtElem::gen(L, {Species::AntiDiff, j}, 1.0), dzb);
  }
  return out;
}

double dzbar_fd(const FormField& F, const CPoint& zeta, const CPoint& z, double eps, double h) {
  double worst = 0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    CPoint a = z, b = z, c = z, d = z;
    a[j] += h;
    b[j] -= h;
    c[j] += cplx(0, h);
    d[j] -= cplx(0, h);
    ExtElem dx = F(zeta, a, eps) - F(zeta, b, eps);
    ExtElem dy = F(zeta, c, eps) - F(zeta, d, eps);
    worst = std::max(worst, max_abs((dx + dy.scaled(cplx(0, 1))).scaled(1.0 / (4 * h))));
  }
  return worst;
}

WeightCheck check_weight(const Weight& g, int samples, unsigned seed, double zeta_radius, double z_radius, double h) {
  const Layout& L = g.field.layout;
  const int n = L.n;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  auto random_point = [&](double radius) {
    for (;;) {
      CPoint p(n);
      double s = 0;
      for (auto& c : p) {
        c = cplx(u(rng), u(rng)) * radius;
        s += std::norm(c);
      }
      if (std::sqrt(s) <= radius) return p;
    }
  };
  WeightCheck out;
  out.samples = samples;
  for (int i = 0; i < samples; ++i) {
    CPoint zeta = random_point(zeta_radius), z = random_point(z_radius);
    ExtElem val = g(zeta, z);
    ExtElem nab = delta_zeta_minus_z(zeta, z, val) - dbar_fd(g.field, zeta, z, 0.0, h);
    out.nabla_residual = std::max(out.nabla_residual, max_abs(nab) / std::max(1.0, max_abs(val)));
    out.g00_defect = std::max(out.g00_defect, std::abs(g(z, z).coeff(0) - 1.0));
    for (const auto& [k, c] : val.terms())
      if (holo_degree(L, k) != anti_degree(L, k)) out.offdiag = std::max(out.offdiag, std::abs(c));
    out.zbar_defect = std::max(out.zbar_defect, dzbar_fd(g.field, zeta, z, 0.0, h));
  }
  return out;
}

}  // namespace resdiv
