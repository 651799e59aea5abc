#include "resdiv/divider.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace resdiv {

cplx reproduce(const MixedPoly& phi, const CPoint& z, const Weight& g, const QuadratureRule& rule, int threads) {
  FormField F{[&](const CPoint& zeta, const CPoint& zz, double) { return g(zeta, zz).scaled(phi.eval(zeta)); },
              g.field.meta, g.field.layout};
  return integrate(F, z, 0.0, rule, threads);
}

std::vector<cplx> reproduce(const std::vector<MixedPoly>& phis, const CPoint& z, const Weight& g,
                            const QuadratureRule& rule, int threads) {
  const RegionKind kind = rule.region().kind;
  return integrate_batch(
      rule, phis.size(),
      [&](const CPoint& zeta, double w, cplx* acc) {
        const cplx d = form_density(g(zeta, z), zeta, kind);
        if (d == cplx{}) return;
        for (std::size_t k = 0; k < phis.size(); ++k) acc[k] += w * d * phis[k].eval(zeta);
      },
      threads);
}

// ---------------------------------------------------------------------------
// Z detection

double min_det_on_ball(const CurrentFamily& cf, double rho) {
  const int n = cf.layout().n;
  QuadratureRule rule(Region::ball(n, rho), QuadOrders{6, 6, 8, 0, 0.0});
  std::vector<std::pair<double, CPoint>> best;
  CPoint zeta;
  double w;
  auto consider = [&](const CPoint& p) {
    best.emplace_back(cf.v(p), p);
  };
  consider(CPoint(n));
  for (std::size_t i = 0; i < rule.size(); ++i) {
    rule.node(i, zeta, w);
    consider(zeta);
  }
  std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  best.resize(std::min<std::size_t>(best.size(), 6));
  double vmin = best.front().first;
  for (auto [v, p] : best) {
    double step = 0.1 * rho;
    for (int it = 0; it < 400 && v > 0 && step > 1e-12; ++it) {
      SigmaData d;
      try {
        d = cf.sigma_data(p);
      } catch (const ContractViolation&) {
        v = 0;
        break;
      }
      double gn = 0;
      for (auto c : d.dv) gn += std::norm(c);
      gn = std::sqrt(gn);
      if (gn == 0) break;
      CPoint q = p;
      double r2 = 0;
      for (int l = 0; l < n; ++l) {
        q[l] -= step * d.dv[l] / gn;
        r2 += std::norm(q[l]);
      }
      if (r2 > rho * rho)
        for (auto& c : q) c *= rho / std::sqrt(r2);
      const double vq = cf.v(q);
      if (vq < v) {
        p = q;
        v = vq;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    vmin = std::min(vmin, v);
  }
  return std::max(vmin, 0.0);
}

bool z_meets_ball(const CurrentFamily& cf, double rho) {
  const int n = cf.layout().n;
  // scale: typical size of v on the sphere of radius rho
  double vmax = 0;
  QuadratureRule rule(Region::ball(n, rho), QuadOrders{4, 4, 6, 0, 0.0});
  CPoint zeta;
  double w;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    rule.node(i, zeta, w);
    vmax = std::max(vmax, cf.v(zeta));
  }
  return min_det_on_ball(cf, rho) <= 1e-10 * std::max(1.0, vmax);
}

// ---------------------------------------------------------------------------
// Division engine

namespace {

struct Engine {
  const HeferFamily& fam;
  const CurrentFamily& cf;
  const std::vector<std::vector<MixedPoly>>& phis;
  const Weight& g;
  const std::vector<double>& eps;
  Layout L;
  int n, m, r, N;
  std::size_t P, E, C;  // C = m + r outputs per (phi, eps)
  std::uint32_t fm, top;

  Engine(const HeferFamily& fam_, const CurrentFamily& cf_, const std::vector<std::vector<MixedPoly>>& phis_,
         const Weight& g_, const std::vector<double>& eps_)
      : fam(fam_), cf(cf_), phis(phis_), g(g_), eps(eps_), L(cf_.layout()), n(L.n), m(L.m), r(L.r),
        N(cf_.length()), P(phis_.size()), E(eps_.size()), C(L.m + L.r), fm(L.form_mask()), top(L.form_mask()) {}

  std::size_t size() const { return P * E * C; }
  std::size_t idx(std::size_t p, std::size_t e, std::size_t c) const { return (p * E + e) * C + c; }

  // Top-degree coefficients of X by output slot (E_1 keys -> 0..m-1, E_0 keys -> m..m+r-1).
  void slots(const ExtElem& X, std::vector<cplx>& out) const {
    std::fill(out.begin(), out.end(), cplx{});
    for (const auto& [k, c] : X.terms()) {
      const std::uint32_t msk = key::mask(k);
      if ((msk & fm) != top) continue;
      const std::uint32_t fr = msk & ~fm;
      const std::uint32_t cm = key::comm(k);
      if (cm == 0 && std::popcount(fr) == 1) {
        out[std::countr_zero(fr) - 2 * n] += c;
      } else if (fr == 0 && key::qframe(cm) >= 0 && cm == key::with_qframe(0, key::qframe(cm))) {
        out[m + key::qframe(cm)] += c;
      }
    }
  }

  void node(const CPoint& z, const CPoint& zeta, double w, cplx* acc) const {
    const ExtElem gz = g(zeta, z);
    int gdeg = 0;
    for (const auto& [k, c] : gz.terms()) gdeg = std::max(gdeg, form_degree(L, k));
    const CurrentPoint pt = cf.eval(zeta);
    const cplx unit = form_density(ExtElem::monomial(L, key::make(top, 0), 1.0), zeta, RegionKind::ball);
    std::vector<std::vector<cplx>> ph(P, std::vector<cplx>(r));
    for (std::size_t p = 0; p < P; ++p)
      for (int j = 0; j < r; ++j) ph[p][j] = phis[p][j].eval(zeta);
    std::vector<cplx> d(C), fac(E);
    std::vector<std::vector<cplx>> dj(r, std::vector<cplx>(C));
    auto run = [&](const std::vector<CurrentPoint::Comp>& comps, int l) {
      for (const auto& comp : comps) {
        const int k = comp.level;
        if (k > N) continue;
        // H^l_k U_k has bidegree (k - l, q) with q = anti degree of the current
        const int q = (l == 1) ? k - 1 : k;
        if ((k - l) + q + gdeg < 2 * n) continue;
        bool nonzero = false;
        for (std::size_t e = 0; e < E; ++e) {
          fac[e] = w * comp.factor(pt.v, eps[e]);
          nonzero = nonzero || fac[e] != 0.0;
        }
        if (!nonzero) continue;
        const NumFrameMap H = lower(fam.H[l][k], zeta, z);
        for (int j = 0; j < r; ++j) {
          slots(wedge(H.apply(comp.on_basis[j]), gz), dj[j]);
          for (auto& x : dj[j]) x *= unit;
        }
        for (std::size_t p = 0; p < P; ++p) {
          std::fill(d.begin(), d.end(), cplx{});
          for (int j = 0; j < r; ++j)
            if (ph[p][j] != cplx{})
              for (std::size_t c = 0; c < C; ++c) d[c] += ph[p][j] * dj[j][c];
          for (std::size_t e = 0; e < E; ++e)
            if (fac[e] != 0.0)
              for (std::size_t c = 0; c < C; ++c) acc[idx(p, e, c)] += fac[e] * d[c];
        }
      }
    };
    run(pt.U, 1);
    run(pt.R, 0);
  }
};

std::vector<cplx> engine_pass(const Engine& eng, const CPoint& z, const DivideConfig& cfg, bool use_eps,
                              bool coarse) {
  auto scale = [&](QuadOrders o) {
    if (!coarse) return o;
    o.radial = std::max(4, 2 * o.radial / 3);
    o.latitude = std::max(4, 2 * (o.latitude ? o.latitude : o.radial) / 3);
    o.angular = std::max(4, 2 * o.angular / 3);
    return o;
  };
  const int n = eng.n;
  std::vector<cplx> acc(eng.size());
  auto kern = [&](const CPoint& zeta, double w, cplx* a) { eng.node(z, zeta, w, a); };
  const bool inner = (use_eps && eng.N >= n) || eng.N >= n + 1;
  if (inner) {
    QuadOrders o = scale(cfg.inner);
    if (!use_eps) o.grading = 0;
    auto v = integrate_batch(QuadratureRule(Region::ball(n, cfg.rho0), o), eng.size(), kern, cfg.threads);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  auto v = integrate_batch(QuadratureRule(Region::annulus(n, cfg.rho0, cfg.rho1), scale(cfg.outer)), eng.size(), kern,
                           cfg.threads);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  return acc;
}

double residual_at(const HoloMatrix& f, const CPoint& z, const std::vector<cplx>& psi, const std::vector<cplx>& S,
                   const std::vector<cplx>& phi) {
  double worst = 0;
  for (int j = 0; j < f.r; ++j) {
    cplx acc = S[j] - phi[j];
    for (int i = 0; i < f.m; ++i) acc += f(j, i).eval(z) * psi[i];
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

void check_points(const std::vector<CPoint>& zs, int n, double rho0) {
  for (const auto& z : zs) {
    if (static_cast<int>(z.size()) != n) throw ContractViolation("divide: z has the wrong dimension");
    double r2 = 0;
    for (auto c : z) r2 += std::norm(c);
    if (std::sqrt(r2) >= std::min(1.0, rho0)) throw ContractViolation("divide: z must lie in the open unit ball");
  }
}

}  // namespace

DivisionReport divide_with_family(const HeferFamily& fam, const std::vector<std::vector<MixedPoly>>& phis,
                                  const std::vector<CPoint>& zs, const DivideConfig& cfg) {
  const HoloMatrix& f = fam.f;
  CurrentFamily cf(f, f.r == 1 ? ComplexKind::koszul : ComplexKind::eagon_northcott, RegKind::cutoff);
  const Layout& L = cf.layout();
  check_points(zs, L.n, cfg.rho0);
  for (const auto& p : phis)
    if (static_cast<int>(p.size()) != f.r) throw ContractViolation("divide: phi must have r entries");
  const Weight g = cutoff_weight(L, cfg.rho0, cfg.rho1);

  DivisionReport rep;
  rep.method = f.r == 1 ? "koszul" : "eagon-northcott";
  rep.n = L.n;
  rep.r = f.r;
  rep.m = f.m;
  rep.eps_used = cfg.eps_mode == EpsMode::always ||
                 (cfg.eps_mode == EpsMode::automatic && z_meets_ball(cf, cfg.rho1));
  rep.eps = rep.eps_used ? cfg.eps.values() : std::vector<double>{0.0};
  rep.tol = cfg.tol > 0 ? cfg.tol : (rep.eps_used ? 1e-3 : 1e-5);
  Engine eng(fam, cf, phis, g, rep.eps);
  const std::size_t E = rep.eps.size();
  rep.ok = true;
  for (const auto& z : zs) {
    std::vector<cplx> fine, coarse;
    try {
      fine = engine_pass(eng, z, cfg, rep.eps_used, false);
      if (rep.eps_used && cfg.coarse_check) coarse = engine_pass(eng, z, cfg, rep.eps_used, true);
    } catch (const ContractViolation& e) {
      if (!rep.eps_used)
        throw ContractViolation(std::string("divide: f is singular on the support; use the eps schedule (") +
                                e.what() + ")");
      throw;
    }
    for (std::size_t p = 0; p < phis.size(); ++p) {
      PointResult pr;
      pr.z = z;
      for (const auto& q : phis[p]) pr.phi.push_back(q.eval(z));
      for (std::size_t c = 0; c < eng.C; ++c) {
        cplx val;
        double err = 0;
        if (!rep.eps_used) {
          val = fine[eng.idx(p, 0, c)];
        } else {
          std::vector<cplx> tr(E), trc(E);
          for (std::size_t e = 0; e < E; ++e) tr[e] = fine[eng.idx(p, e, c)];
          auto x = richardson(rep.eps, tr);
          if (!coarse.empty()) {
            for (std::size_t e = 0; e < E; ++e) trc[e] = coarse[eng.idx(p, e, c)];
            x.quad_error = std::abs(x.value - richardson(rep.eps, trc).value);
            x.error += x.quad_error;
          }
          val = x.value;
          err = x.error;
          const double scale = std::max(1.0, std::abs(x.value));
          pr.converged = pr.converged && (x.converged || x.error <= 1e-2 * rep.tol * scale);
          nlohmann::json t = nlohmann::json::array();
          for (auto v : tr) t.push_back({v.real(), v.imag()});
          pr.trace[(c < eng.C - f.r ? "psi" : "S") + std::to_string(c < eng.C - f.r ? c : c - f.m)] = {
              {"values", t}, {"extrap_error", x.extrap_error}, {"quad_error", x.quad_error}};
        }
        if (static_cast<int>(c) < f.m) {
          pr.psi.push_back(val);
          pr.psi_error = std::max(pr.psi_error, err);
        } else {
          pr.S.push_back(val);
          pr.S_error = std::max(pr.S_error, err);
        }
      }
      pr.residual = residual_at(f, z, pr.psi, pr.S, pr.phi);
      rep.max_residual = std::max(rep.max_residual, pr.residual);
      rep.ok = rep.ok && pr.residual <= rep.tol && pr.converged;
      rep.points.push_back(std::move(pr));
    }
  }
  auto orders = [](const QuadOrders& o) {
    return nlohmann::json{{"radial", o.radial}, {"latitude", o.latitude ? o.latitude : o.radial},
                          {"angular", o.angular}, {"grading", o.grading}};
  };
  rep.diagnostics = {{"weight", {{"kind", "cutoff"}, {"rho0", cfg.rho0}, {"rho1", cfg.rho1}}},
                     {"inner", orders(cfg.inner)},
                     {"outer", orders(cfg.outer)},
                     {"hefer_residual", fam.hdef_residual()},
                     {"hefer_cache_key", family_cache_key(f)}};
  return rep;
}

DivisionReport divide_koszul(const std::vector<MixedPoly>& f, const std::vector<MixedPoly>& phis,
                             const std::vector<CPoint>& zs, const DivideConfig& cfg) {
  if (f.empty()) throw ContractViolation("divide_koszul: empty f");
  auto fam = build_koszul_family(f);
  std::vector<std::vector<MixedPoly>> cols;
  for (const auto& p : phis) cols.push_back({p});
  return divide_with_family(fam, cols, zs, cfg);
}

DivisionReport divide_matrix(const HoloMatrix& f, const std::vector<std::vector<MixedPoly>>& phis,
                             const std::vector<CPoint>& zs, const DivideConfig& cfg) {
  auto fam = build_en_family(f);
  return divide_with_family(fam, phis, zs, cfg);
}

double psi_zbar_defect(const HeferFamily& fam, const std::vector<MixedPoly>& phi, const CPoint& z,
                       const DivideConfig& cfg, double h) {
  const int n = static_cast<int>(z.size());
  double worst = 0;
  for (int k = 0; k < n; ++k) {
    std::vector<CPoint> pts;
    for (cplx d : {cplx(h, 0), cplx(-h, 0), cplx(0, h), cplx(0, -h)}) {
      CPoint q = z;
      q[k] += d;
      pts.push_back(q);
    }
    auto rep = divide_with_family(fam, {phi}, pts, cfg);
    const auto& P = rep.points;
    for (std::size_t i = 0; i < P[0].psi.size(); ++i) {
      const cplx dx = (P[0].psi[i] - P[1].psi[i]) / (2 * h);
      const cplx dy = (P[2].psi[i] - P[3].psi[i]) / (2 * h);
      worst = std::max(worst, std::abs(0.5 * (dx + cplx(0, 1) * dy)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

nlohmann::json cj(cplx c) { return nlohmann::json::array({c.real(), c.imag()}); }
nlohmann::json cjv(const std::vector<cplx>& v) {
  auto a = nlohmann::json::array();
  for (auto c : v) a.push_back(cj(c));
  return a;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

nlohmann::json to_json(const DivisionReport& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points) {
    nlohmann::json j{{"z", cjv(p.z)},           {"phi", cjv(p.phi)},         {"psi", cjv(p.psi)},
                     {"S", cjv(p.S)},           {"residual", p.residual},    {"psi_error", p.psi_error},
                     {"S_error", p.S_error},    {"converged", p.converged}};
    if (!p.trace.is_null()) j["trace"] = p.trace;
    pts.push_back(std::move(j));
  }
  return {{"method", r.method}, {"n", r.n},       {"r", r.r},         {"m", r.m},
          {"eps_used", r.eps_used}, {"eps", r.eps}, {"tol", r.tol},   {"max_residual", r.max_residual},
          {"ok", r.ok},         {"points", pts},  {"diagnostics", r.diagnostics}};
}

std::string to_csv(const DivisionReport& r) {
  std::ostringstream os;
  for (int k = 0; k < r.n; ++k) os << "z" << k << "_re,z" << k << "_im,";
  for (int i = 0; i < r.m; ++i) os << "psi" << i << "_re,psi" << i << "_im,";
  for (int j = 0; j < r.r; ++j) os << "S" << j << "_re,S" << j << "_im,";
  os << "residual,psi_error,S_error,converged\n";
  for (const auto& p : r.points) {
    for (auto c : p.z) os << num(c.real()) << ',' << num(c.imag()) << ',';
    for (auto c : p.psi) os << num(c.real()) << ',' << num(c.imag()) << ',';
    for (auto c : p.S) os << num(c.real()) << ',' << num(c.imag()) << ',';
    os << num(p.residual) << ',' << num(p.psi_error) << ',' << num(p.S_error) << ',' << (p.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Interpolation

std::vector<InterpolationResult> interpolate(const HoloMatrix& f, const std::vector<MixedPoly>& phi,
                                             const std::vector<CPoint>& zs, const DivideConfig& cfg) {
  auto fam = build_en_family(f);
  auto rep = divide_with_family(fam, {phi}, zs, cfg);
  CurrentFamily cf(f, f.r == 1 ? ComplexKind::koszul : ComplexKind::eagon_northcott, RegKind::cutoff);
  std::vector<InterpolationResult> out;
  for (const auto& p : rep.points) {
    InterpolationResult ir;
    ir.z = p.z;
    ir.S = p.S;
    ir.S_error = p.S_error;
    ir.converged = p.converged;
    ir.on_Z = cf.v(p.z) < 1e-12;
    if (ir.on_Z) {
      Eigen::MatrixXcd F(f.r, f.m);
      Eigen::VectorXcd y(f.r);
      for (int j = 0; j < f.r; ++j) {
        y(j) = p.phi[j] - p.S[j];
        for (int i = 0; i < f.m; ++i) F(j, i) = f(j, i).eval(p.z);
      }
      Eigen::VectorXcd x = F.completeOrthogonalDecomposition().solve(y);
      ir.image_defect = (F * x - y).norm();
    }
    out.push_back(std::move(ir));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Berndtsson's formula

DivisionReport berndtsson_divide(const std::vector<MixedPoly>& f, const std::vector<MixedPoly>& phis,
                                 const std::vector<CPoint>& zs, double eps, const DivideConfig& cfg) {
  if (f.empty()) throw ContractViolation("berndtsson_divide: empty f");
  if (!(eps > 0)) throw ContractViolation("berndtsson_divide: eps must be positive");
  const int n = f[0].dim(), m = static_cast<int>(f.size());
  const Layout L(n, 0, 1);
  check_points(zs, n, cfg.rho0);
  const Weight g = cutoff_weight(L, cfg.rho0, cfg.rho1);
  std::vector<SymbExt> h;
  std::vector<std::vector<MixedPoly>> df(m);
  for (int j = 0; j < m; ++j) {
    h.push_back(hefer_form(L, f[j]));
    for (int l = 0; l < n; ++l) df[j].push_back(poly_d(f[j], l));
  }
  const int N = std::min(n + 1, m);
  const std::size_t P = phis.size(), C = m + 1;
  const std::uint32_t top = L.form_mask();

  DivisionReport rep;
  rep.method = "berndtsson";
  rep.n = n;
  rep.r = 1;
  rep.m = m;
  rep.eps = {eps};
  rep.tol = cfg.tol > 0 ? cfg.tol : 1e-3;
  rep.ok = true;
  for (const auto& z : zs) {
    std::vector<cplx> fz(m);
    for (int j = 0; j < m; ++j) fz[j] = f[j].eval(z);
    auto kern = [&](const CPoint& zeta, double w, cplx* acc) {
      std::vector<cplx> fv(m);
      double q = 0;
      for (int j = 0; j < m; ++j) {
        fv[j] = f[j].eval(zeta);
        q += std::norm(fv[j]);
      }
      const double W = q + eps;
      std::vector<cplx> dq(n);  // d|f|^2 / d conj(zeta_l)
      std::vector<std::vector<cplx>> dfb(m, std::vector<cplx>(n));
      for (int j = 0; j < m; ++j)
        for (int l = 0; l < n; ++l) {
          dfb[j][l] = std::conj(df[j][l].eval(zeta));
          dq[l] += fv[j] * dfb[j][l];
        }
      std::vector<cplx> sig(m);
      ExtElem Cf(L);
      cplx B = 0;
      for (int j = 0; j < m; ++j) {
        sig[j] = std::conj(fv[j]) / W;
        B += fz[j] * sig[j];
        ExtElem ds(L);
        for (int l = 0; l < n; ++l)
          ds.push(key::make(L.anti_bit(l), 0), dfb[j][l] / W - std::conj(fv[j]) * dq[l] / (W * W));
        ds.normalize();
        Cf += wedge(ds, lower(h[j], zeta, z));
      }
      const cplx A = eps / W;
      const ExtElem Pf = ExtElem::scalar(L, A + B) + Cf, Qf = ExtElem::scalar(L, A) + Cf;
      std::vector<ExtElem> Pp{ExtElem::scalar(L, 1.0)}, Qp{ExtElem::scalar(L, 1.0)};
      for (int i = 1; i <= N; ++i) {
        Pp.push_back(wedge(Pp.back(), Pf));
        Qp.push_back(wedge(Qp.back(), Qf));
      }
      ExtElem Ssum(L);
      for (int i = 0; i < N; ++i) Ssum += wedge(Pp[i], Qp[N - 1 - i]);
      const ExtElem gz = g(zeta, z);
      const cplx unit = form_density(ExtElem::monomial(L, key::make(top, 0), 1.0), zeta, RegionKind::ball);
      const cplx dpsi = wedge(Ssum, gz).coeff(key::make(top, 0)) * unit;
      const cplx drem = wedge(Qp[N], gz).coeff(key::make(top, 0)) * unit;
      for (std::size_t p = 0; p < P; ++p) {
        const cplx ph = w * phis[p].eval(zeta);
        for (int j = 0; j < m; ++j) acc[p * C + j] += ph * sig[j] * dpsi;
        acc[p * C + m] += ph * drem;
      }
    };
    QuadOrders in = cfg.inner;
    in.grading = 0;
    auto a = integrate_batch(QuadratureRule(Region::ball(n, cfg.rho0), in), P * C, kern, cfg.threads);
    auto b = integrate_batch(QuadratureRule(Region::annulus(n, cfg.rho0, cfg.rho1), cfg.outer), P * C, kern, cfg.threads);
    for (std::size_t p = 0; p < P; ++p) {
      PointResult pr;
      pr.z = z;
      pr.phi = {phis[p].eval(z)};
      cplx fpsi = 0;
      for (int j = 0; j < m; ++j) {
        pr.psi.push_back(a[p * C + j] + b[p * C + j]);
        fpsi += fz[j] * pr.psi.back();
      }
      pr.S = {a[p * C + m] + b[p * C + m]};
      pr.residual = std::abs(fpsi + pr.S[0] - pr.phi[0]);
      pr.trace = {{"division_defect", std::abs(fpsi - pr.phi[0])}};
      rep.max_residual = std::max(rep.max_residual, pr.residual);
      rep.ok = rep.ok && pr.residual <= rep.tol;
      rep.points.push_back(std::move(pr));
    }
  }
  rep.diagnostics = {{"weight", {{"kind", "cutoff"}, {"rho0", cfg.rho0}, {"rho1", cfg.rho1}}},
                     {"power", N},
                     {"note", "S holds the eps-remainder; residual is the total reproduction defect"}};
  return rep;
}

// ---------------------------------------------------------------------------
// Szego-Hefer decomposition

std::vector<cplx> hefer_via_szego(const MixedPoly& phi, const CPoint& w, const CPoint& z, const QuadratureRule& sphere,
                                  int threads) {
  const int n = phi.dim();
  if (sphere.region().kind != RegionKind::sphere || sphere.region().n != n)
    throw ContractViolation("hefer_via_szego: need a sphere rule of matching dimension");
  double wn = 0, zn = 0;
  for (int j = 0; j < n; ++j) {
    wn += std::norm(w[j]);
    zn += std::norm(z[j]);
  }
  if (wn >= 1 || zn >= 1) throw ContractViolation("hefer_via_szego: w and z must lie in the open unit ball");
  auto kern = [&](const CPoint& zeta, double wt, cplx* acc) {
    cplx a = 1.0, b = 1.0;
    for (int j = 0; j < n; ++j) {
      a -= std::conj(zeta[j]) * w[j];
      b -= std::conj(zeta[j]) * z[j];
    }
    cplx K = 0;
    for (int k = 1; k <= n; ++k) K += std::pow(a, -k) * std::pow(b, -(n - k + 1));
    const cplx base = wt * phi.eval(zeta) * K;
    for (int j = 0; j < n; ++j) acc[j] += std::conj(zeta[j]) * base;
  };
  auto p = integrate_batch(sphere, n, kern, threads);
  const double area = sphere.region().measure();
  for (auto& c : p) c /= area;
  return p;
}

// ---------------------------------------------------------------------------
// Membership and smooth obstructions

std::vector<MixedPoly> test_polynomials(int n, int count, int degree, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<MultiDeg> monos;
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; b <= (n > 1 ? degree - a : 0); ++b)
      for (int c = 0; c <= (n > 2 ? degree - a - b : 0); ++c) {
        MultiDeg d;
        d.holo(0) = static_cast<std::uint8_t>(a);
        if (n > 1) d.holo(1) = static_cast<std::uint8_t>(b);
        if (n > 2) d.holo(2) = static_cast<std::uint8_t>(c);
        monos.push_back(d);
      }
  std::vector<MixedPoly> out{MixedPoly::constant(n, 1.0)};
  while (static_cast<int>(out.size()) < count) {
    MixedPoly p(n);
    for (const auto& d : monos) {
      const double re = u(rng), im = u(rng);
      p.add_term(d, cplx(re, im));
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

struct Battery {
  CurrentFamily cf;
  std::vector<FormField> tests;
  std::vector<std::string> labels;
  std::vector<MonoKey> frames;
};

Battery make_battery(const HoloMatrix& f, const MembershipConfig& cfg) {
  if (cfg.battery < 8) throw ContractViolation("membership: the battery needs at least 8 test forms");
  Battery b{f.r == 1 ? koszul_currents(f.rows[0], RegKind::cutoff) : en_currents(f), {}, {}, {}};
  const Layout& L = b.cf.layout();
  const int n = L.n, N = std::min(b.cf.length(), n);
  b.frames = en_basis(L, N);
  if (b.frames.empty()) throw ContractViolation("membership: top level of the complex is zero");
  std::vector<std::uint32_t> Js;
  for (std::uint32_t J = 0; J < (1u << n); ++J)
    if (std::popcount(J) == n - N) Js.push_back(J << n);
  const auto polys = test_polynomials(n, cfg.battery, cfg.test_degree, cfg.seed);
  for (std::size_t t = 0; t < polys.size(); ++t)
    for (auto J : Js) {
      b.tests.push_back(residue_test_form(L, polys[t], cfg.residue.test_rho0, cfg.residue.test_rho1, J));
      b.labels.push_back("t" + std::to_string(t) + (J ? "/J" + std::to_string(J >> n) : ""));
    }
  return b;
}

std::vector<MixedPoly> reference_column(const HoloMatrix& f) {
  const int n = f.n;
  if (f.r == 1 && f.m == n) {
    // Jacobian determinant: its residue is the multiplicity, never zero
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    MixedPoly J(n);
    do {
      int sgn = 1;
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          if (idx[a] > idx[b]) sgn = -sgn;
      MixedPoly t = MixedPoly::constant(n, static_cast<double>(sgn));
      for (int i = 0; i < n; ++i) t = t * poly_d(f(0, i), idx[i]);
      J += t;
    } while (std::next_permutation(idx.begin(), idx.end()));
    return {J};
  }
  std::vector<MixedPoly> col(f.r, MixedPoly(n));
  col[0] = MixedPoly::constant(n, 1.0);
  return col;
}

nlohmann::json xj(const Extrapolated& x) {
  return {{"value", cj(x.value)}, {"error", x.error}, {"converged", x.converged}};
}

}  // namespace

std::vector<MembershipResult> membership_test(const HoloMatrix& f, const std::vector<std::vector<MixedPoly>>& phis,
                                              const MembershipConfig& cfg) {
  Battery b = make_battery(f, cfg);
  auto all = phis;
  const auto ref = reference_column(f);
  all.push_back(ref);
  auto res = residue_battery(b.cf, all, b.tests, b.frames, cfg.residue);
  const auto& R = res.back();
  double scale = 0;
  for (const auto& row : R)
    for (const auto& x : row) scale = std::max(scale, std::abs(x.value));
  if (!(scale > 1e-12)) throw ContractViolation("membership: the reference pairing vanishes (does Z meet the test ball?)");
  std::vector<MembershipResult> out;
  for (std::size_t p = 0; p < phis.size(); ++p) {
    MembershipResult mr;
    nlohmann::json pairs = nlohmann::json::array();
    bool all_conv = true;
    for (std::size_t t = 0; t < b.tests.size(); ++t)
      for (std::size_t fr = 0; fr < b.frames.size(); ++fr) {
        const auto& x = res[p][t][fr];
        const double ratio = std::abs(x.value) / scale;
        if (ratio >= mr.ratio) {
          mr.ratio = ratio;
          mr.ratio_error = x.error / scale;
        }
        all_conv = all_conv && x.converged;
        auto j = xj(x);
        j["test"] = b.labels[t];
        j["frame"] = fr;
        j["reference"] = cj(R[t][fr].value);
        pairs.push_back(std::move(j));
      }
    if (mr.ratio - mr.ratio_error > cfg.theta) mr.verdict = "out";
    else if (mr.ratio + mr.ratio_error < cfg.theta && all_conv) mr.verdict = "in";
    else mr.verdict = "inconclusive";
    mr.evidence = {{"pairings", pairs}, {"scale", scale}, {"theta", cfg.theta}, {"ratio", mr.ratio},
                   {"ratio_error", mr.ratio_error}, {"all_converged", all_conv},
                   {"reference", f.r == 1 && f.m == f.n ? "jacobian" : "e_1"}};
    out.push_back(std::move(mr));
  }
  return out;
}

std::vector<ObstructionRow> smooth_obstruction(const HoloMatrix& f, const std::vector<MixedPoly>& phi,
                                               const std::vector<std::vector<int>>& alphas,
                                               const MembershipConfig& cfg) {
  Battery b = make_battery(f, cfg);
  std::vector<std::vector<MixedPoly>> cols;
  for (const auto& a : alphas) {
    if (static_cast<int>(a.size()) != f.n) throw ContractViolation("smooth_obstruction: alpha has the wrong length");
    std::vector<MixedPoly> c;
    for (const auto& p : phi) c.push_back(poly_dbar(p, a));
    cols.push_back(std::move(c));
  }
  auto res = residue_battery(b.cf, cols, b.tests, b.frames, cfg.residue);
  std::vector<ObstructionRow> out;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    ObstructionRow row{alphas[a], {}};
    for (std::size_t t = 0; t < b.tests.size(); ++t) {
      Extrapolated acc = res[a][t][0];
      for (std::size_t fr = 1; fr < b.frames.size(); ++fr) {
        acc.value += res[a][t][fr].value;
        acc.error += res[a][t][fr].error;
        acc.converged = acc.converged && res[a][t][fr].converged;
      }
      row.pairings.push_back(std::move(acc));
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace resdiv
