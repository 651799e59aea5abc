#include "resdiv/hefer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace resdiv {

HoloMatrix::HoloMatrix(int n_, std::vector<std::vector<MixedPoly>> rows_) : n(n_), rows(std::move(rows_)) {
  r = static_cast<int>(rows.size());
  if (r < 1) throw ContractViolation("HoloMatrix: no rows");
  m = static_cast<int>(rows[0].size());
  if (m < r) throw ContractViolation("HoloMatrix: need m >= r for a generically surjective matrix");
  for (auto& row : rows) {
    if (static_cast<int>(row.size()) != m) throw ContractViolation("HoloMatrix: ragged rows");
    for (auto& p : row) {
      if (p.dim() == 0) p = MixedPoly(n);
      if (p.dim() != n) throw ContractViolation("HoloMatrix: entry has the wrong dimension");
      if (!p.is_holomorphic()) throw ContractViolation("HoloMatrix: entries must be holomorphic in zeta");
    }
  }
}

void to_json(nlohmann::json& j, const HoloMatrix& f) {
  j = nlohmann::json::array();
  for (const auto& row : f.rows) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& p : row) jr.push_back(p);
    j.push_back(jr);
  }
}

void from_json(const nlohmann::json& j, HoloMatrix& f) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    throw ContractViolation("HoloMatrix: expected a non-empty array of non-empty rows");
  std::vector<std::vector<MixedPoly>> rows;
  for (const auto& jr : j) {
    if (!jr.is_array()) throw ContractViolation("HoloMatrix: row is not an array");
    std::vector<MixedPoly> row;
    for (const auto& jp : jr) row.push_back(jp.get<MixedPoly>());
    rows.push_back(std::move(row));
  }
  const int n = rows[0][0].dim();
  f = HoloMatrix(n, std::move(rows));
}

// ---------------------------------------------------------------------------
// Scalar Hefer decomposition

std::vector<MixedPoly> hefer_decompose(const MixedPoly& p) {
  if (!p.is_holomorphic()) throw ContractViolation("hefer_decompose: input must be holomorphic in zeta");
  const int n = p.dim();
  std::vector<MixedPoly> h(n, MixedPoly(n));
  const cplx inv = 1.0 / kTwoPiI;
  for (const auto& [d, c] : p.terms()) {
    // zeta^a - z^a = sum_k z_1^{a_1}..z_{k-1}^{a_{k-1}} (zeta_k^{a_k} - z_k^{a_k}) zeta_{k+1}^{a_{k+1}}..
    for (int k = 0; k < n; ++k) {
      const int a = d.holo(k);
      if (a == 0) continue;
      for (int i = 0; i < a; ++i) {
        MultiDeg e;
        for (int j = 0; j < k; ++j) e.param(j) = d.holo(j);
        for (int j = k + 1; j < n; ++j) e.holo(j) = d.holo(j);
        e.holo(k) = static_cast<std::uint8_t>(i);
        e.param(k) = static_cast<std::uint8_t>(a - 1 - i);
        h[k].add_term(e, c * inv);
      }
    }
  }
  return h;
}

SymbExt hefer_form(const Layout& L, const MixedPoly& p) {
  auto h = hefer_decompose(p);
  SymbExt x(L);
  for (int k = 0; k < L.n; ++k) x.push(key::make(L.holo_bit(k), 0), h[k]);
  x.normalize();
  return x;
}

double symb_norm(const SymbExt& x) {
  double s = 0;
  for (const auto& t : x.terms()) s = std::max(s, t.second.norm_inf());
  return s;
}

SymbExt symb_prune(const SymbExt& x, double tol) {
  const double cut = tol * symb_norm(x);
  return x.map_coeffs([&](const MixedPoly& p) {
    MixedPoly q(p.dim());
    for (const auto& [d, c] : p.terms())
      if (std::abs(c) > cut) q.add_term(d, c);
    return q;
  });
}

SymbExt delta_solve(const SymbExt& xi) {
  const Layout& L = xi.layout();
  if (xi.is_zero()) return SymbExt(L);
  const double scale = std::max(1.0, symb_norm(xi));
  if (symb_norm(delta_zeta_minus_z(xi)) > 1e-10 * scale)
    throw ContractViolation("delta_solve: input is not delta_{zeta-z}-closed");
  const int n = L.n;
  SymbExt out(L);
  for (const auto& [k, c] : xi.terms()) {
    if (key::mask(k) & L.anti_mask()) throw ContractViolation("delta_solve: form has antiholomorphic differentials");
    const int deg = holo_degree(L, k);
    const MixedPoly q = poly_shift_holo(c, +1);  // q(w, z) = c(w + z, z)
    if (q.has_anti()) throw ContractViolation("delta_solve: coefficient is not holomorphic");
    std::map<int, MixedPoly> pieces;
    for (const auto& [d, a] : q.terms()) {
      int w = 0;
      for (int j = 0; j < n; ++j) w += d.holo(j);
      auto it = pieces.try_emplace(w, MixedPoly(n)).first;
      it->second.add_term(d, a);
    }
    const SymbExt mono = SymbExt::monomial(L, k, MixedPoly::constant(n, 1.0));
    for (const auto& [w, piece] : pieces) {
      if (w + deg == 0) {
        if (piece.norm_inf() > 1e-10 * scale)
          throw ContractViolation("delta_solve: closed form with a nonzero constant part");
        continue;
      }
      const cplx factor = 1.0 / (kTwoPiI * static_cast<double>(w + deg));
      for (int j = 0; j < n; ++j) {
        MixedPoly dq = poly_d(piece, j);
        if (dq.is_zero()) continue;
        out += left_mul<MixedPoly>(key::make(L.holo_bit(j), 0), dq * factor, mono);
      }
    }
  }
  return symb_prune(out.map_coeffs([](const MixedPoly& p) { return poly_shift_holo(p, -1); }));
}

// ---------------------------------------------------------------------------
// Eagon-Northcott frames

std::vector<MonoKey> en_basis(const Layout& L, int k) {
  std::vector<MonoKey> out;
  const int r = L.r, m = L.m;
  if (k == 0) {
    for (int j = 0; j < r; ++j) out.push_back(key::make(0, key::with_qframe(0, j)));
    return out;
  }
  if (k == 1) {
    for (int i = 0; i < m; ++i) out.push_back(key::make(L.eframe_bit(i), 0));
    return out;
  }
  const int wdeg = k + r - 1;
  if (wdeg > m) return out;
  // exponent vectors of total degree k - 2 in r slots
  std::vector<std::uint32_t> syms;
  std::vector<int> a(r, 0);
  std::function<void(int, int)> rec = [&](int slot, int left) {
    if (slot == r - 1) {
      a[slot] = left;
      std::uint32_t c = key::with_qdet(0, true);
      for (int j = 0; j < r; ++j) c = key::with_sym_exp(c, j, a[j]);
      syms.push_back(c);
      return;
    }
    for (int e = left; e >= 0; --e) {
      a[slot] = e;
      rec(slot + 1, left - e);
    }
  };
  rec(0, k - 2);
  for (std::uint32_t s = 0; s < (1u << m); ++s) {
    if (std::popcount(s) != wdeg) continue;
    for (auto c : syms) out.push_back(key::make(s << (2 * L.n), c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

int en_level(const Layout& L, MonoKey k) {
  const std::uint32_t c = key::comm(k);
  if (key::qframe(c) >= 0) return 0;
  if (!key::qdet(c)) return 1;
  return eframe_degree(L, k) - L.r + 1;
}

namespace {

// sum_i g[i] ^ delta_{e_i*}(monomial k), g[i] forms with polynomial coefficients
SymbExt contract_row(const Layout& L, const std::vector<SymbExt>& g, MonoKey k, std::uint32_t new_comm) {
  SymbExt out(L);
  const std::uint32_t m = key::mask(k);
  for (int i = 0; i < L.m; ++i) {
    const int bit = 2 * L.n + i;
    if (!(m & (1u << bit)) || g[i].is_zero()) continue;
    const double s = key::pass_sign(m, bit);
    auto mono = SymbExt::monomial(L, key::make(m & ~(1u << bit), new_comm), MixedPoly::constant(L.n, s));
    out += wedge(g[i], mono);
  }
  return out;
}

// Level map E_k -> E_{k-1} built from an r x m array of forms g:
//   k = 1:      e_i -> sum_j g_{ji} eps_j
//   k = 2:      (r = 1 only here) xi det -> sum_i g_{1i} delta_{e_i*} xi
//   k >= 3:     normalized symmetric contraction
SymbFrameMap level_map(const Layout& L, int k, const std::vector<std::vector<SymbExt>>& g, bool odd) {
  SymbFrameMap F{L, odd, {}};
  for (MonoKey b : en_basis(L, k)) {
    SymbExt img(L);
    if (k == 1) {
      const int i = std::countr_zero(key::mask(b)) - 2 * L.n;
      for (int j = 0; j < L.r; ++j) {
        if (g[j][i].is_zero()) continue;
        img += wedge(g[j][i], SymbExt::monomial(L, key::make(0, key::with_qframe(0, j)), MixedPoly::constant(L.n, 1.0)));
      }
    } else if (k == 2) {
      if (L.r != 1) throw ContractViolation("level_map: E_2 -> E_1 is det f for r > 1");
      img = contract_row(L, g[0], b, 0);
    } else {
      const std::uint32_t c = key::comm(b);
      const int total = key::sym_degree(c);
      for (int j = 0; j < L.r; ++j) {
        const int aj = key::sym_exp(c, j);
        if (aj == 0) continue;
        const double w = static_cast<double>(aj) / total;
        img += contract_row(L, g[j], b, key::with_sym_exp(c, j, aj - 1)).scaled(MixedPoly::constant(L.n, w));
      }
    }
    if (!img.is_zero()) F.image.emplace(b, std::move(img));
  }
  return F;
}

std::vector<std::vector<SymbExt>> scalar_rows(const HoloMatrix& f, bool at_param) {
  const Layout L = f.layout();
  std::vector<std::vector<SymbExt>> g(f.r);
  for (int j = 0; j < f.r; ++j)
    for (int i = 0; i < f.m; ++i)
      g[j].push_back(SymbExt::scalar(L, at_param ? poly_at_param(f(j, i)) : f(j, i)));
  return g;
}

SymbFrameMap differential(const HoloMatrix& f, int k, bool at_param) {
  const Layout L = f.layout();
  if (k < 1) throw ContractViolation("en_differential: level must be >= 1");
  if (k == 2 && f.r > 1) {
    SymbFrameMap F{L, true, {}};
    for (MonoKey b : en_basis(L, 2)) {
      SymbExt x = SymbExt::monomial(L, key::make(key::mask(b), 0), MixedPoly::constant(L.n, 1.0));
      for (int j = 0; j < f.r; ++j) {
        std::vector<MixedPoly> row;
        for (int i = 0; i < f.m; ++i) row.push_back(at_param ? poly_at_param(f(j, i)) : f(j, i));
        x = contract_frame<MixedPoly>(row, x);
      }
      if (!x.is_zero()) F.image.emplace(b, std::move(x));
    }
    return F;
  }
  return level_map(L, k, scalar_rows(f, at_param), true);
}

SymbFrameMap identity_map(const Layout& L, int k) {
  SymbFrameMap F{L, false, {}};
  for (MonoKey b : en_basis(L, k)) F.image.emplace(b, SymbExt::monomial(L, b, MixedPoly::constant(L.n, 1.0)));
  return F;
}

SymbFrameMap scaled(SymbFrameMap F, cplx c) {
  for (auto& [k, v] : F.image) v = v.scaled(MixedPoly::constant(F.L.n, c));
  return F;
}

// (delta_h)_p : E_k -> E_{k-p}
SymbFrameMap koszul_power(const HeferFamily& fam, int k, int p) {
  const Layout& L = fam.layout();
  if (p == 0) return identity_map(L, k);
  SymbFrameMap acc = hefer_contraction(fam, k);
  for (int i = 1; i < p; ++i) acc = compose(hefer_contraction(fam, k - i), acc);
  double fact = 1;
  for (int i = 2; i <= p; ++i) fact *= i;
  return scaled(acc, 1.0 / fact);
}

}  // namespace

SymbFrameMap en_differential(const HoloMatrix& f, int k) { return differential(f, k, false); }
SymbFrameMap en_differential_at_param(const HoloMatrix& f, int k) { return differential(f, k, true); }

SymbFrameMap compose(const SymbFrameMap& a, const SymbFrameMap& b) {
  SymbFrameMap c{b.L, a.odd != b.odd, {}};
  for (const auto& [k, v] : b.image) {
    SymbExt img = a.apply(v);
    if (!img.is_zero()) c.image.emplace(k, std::move(img));
  }
  return c;
}

SymbFrameMap hefer_contraction(const HeferFamily& fam, int k) {
  const Layout& L = fam.layout();
  if (k == 2 && L.r > 1) throw ContractViolation("hefer_contraction: not defined on E_2 for r > 1");
  return level_map(L, k, fam.h, false);
}

// ---------------------------------------------------------------------------
// Families

namespace {

HeferFamily family_skeleton(const HoloMatrix& f) {
  HeferFamily fam;
  fam.f = f;
  fam.N = f.length();
  const Layout L = f.layout();
  fam.h.assign(f.r, {});
  for (int j = 0; j < f.r; ++j)
    for (int i = 0; i < f.m; ++i) fam.h[j].push_back(hefer_form(L, f(j, i)));
  fam.H.assign(fam.N + 1, std::vector<SymbFrameMap>(fam.N + 1, SymbFrameMap{L, false, {}}));
  for (int l = 0; l <= fam.N; ++l) fam.H[l][l] = identity_map(L, l);
  fam.fk.assign(fam.N + 1, SymbFrameMap{L, true, {}});
  for (int k = 1; k <= fam.N; ++k) fam.fk[k] = en_differential(f, k);
  return fam;
}

void check_family(const HeferFamily& fam) {
  const double res = fam.hdef_residual();
  if (res > 1e-10) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "Hefer family fails its defining identity (residual %.3g)", res);
    throw ContractViolation(buf);
  }
}

}  // namespace

HeferFamily build_koszul_family(const std::vector<MixedPoly>& row) {
  if (row.empty()) throw ContractViolation("build_koszul_family: empty row");
  HeferFamily fam = family_skeleton(HoloMatrix(row[0].dim(), {row}));
  for (int l = 0; l <= fam.N; ++l)
    for (int k = l + 1; k <= fam.N; ++k) fam.H[l][k] = koszul_power(fam, k, k - l);
  check_family(fam);
  return fam;
}

HeferFamily build_en_family(const HoloMatrix& f) {
  if (f.r == 1) return build_koszul_family(f.rows[0]);
  if (f.r % 2 == 0 && !(f.r == 2 && f.m == 2))
    throw ContractViolation("build_en_family: even r is only supported for (r, m) = (2, 2)");
  HeferFamily fam = family_skeleton(f);
  const Layout L = f.layout();
  const int N = fam.N;
  for (int l = 2; l <= N; ++l)
    for (int k = l + 1; k <= N; ++k) fam.H[l][k] = koszul_power(fam, k, k - l);

  std::vector<SymbFrameMap> fz(N + 1, SymbFrameMap{L, true, {}});
  for (int k = 1; k <= N; ++k) fz[k] = en_differential_at_param(f, k);

  for (int l = std::min(1, N); l >= 0; --l) {
    for (int k = l + 1; k <= N; ++k) {
      SymbFrameMap Hk{L, false, {}};
      for (MonoKey b : en_basis(L, k)) {
        SymbExt img(L);
        if (k == l + 1) {
          // right hand side f_k(zeta) b - f_k(z) b: Hefer forms of the entries
          auto it = fam.fk[k].image.find(b);
          if (it != fam.fk[k].image.end())
            for (const auto& [key_, c] : it->second.terms())
              img += wedge(hefer_form(L, c), SymbExt::monomial(L, key_, MixedPoly::constant(L.n, 1.0)));
        } else {
          SymbExt rhs(L);
          auto it = fam.fk[k].image.find(b);
          if (it != fam.fk[k].image.end()) rhs += fam.H[l][k - 1].apply(it->second);
          auto jt = fam.H[l + 1][k].image.find(b);
          if (jt != fam.H[l + 1][k].image.end()) rhs -= fz[l + 1].apply(jt->second);
          img = delta_solve(rhs);
        }
        if (!img.is_zero()) Hk.image.emplace(b, std::move(img));
      }
      fam.H[l][k] = std::move(Hk);
    }
  }
  check_family(fam);
  return fam;
}

double HeferFamily::hdef_residual(int l, int k) const {
  const Layout& L = layout();
  double worst = 0;
  SymbFrameMap fz{L, true, {}};
  if (l + 1 <= N) fz = en_differential_at_param(f, l + 1);
  for (MonoKey b : en_basis(L, k)) {
    SymbExt lhs(L), rhs(L);
    auto it = H[l][k].image.find(b);
    if (it != H[l][k].image.end()) lhs = delta_zeta_minus_z(it->second);
    if (k >= 1 && k - 1 >= l) {
      auto jt = fk[k].image.find(b);
      if (jt != fk[k].image.end()) rhs += H[l][k - 1].apply(jt->second);
    }
    if (l + 1 <= N) {
      auto jt = H[l + 1][k].image.find(b);
      if (jt != H[l + 1][k].image.end()) rhs -= fz.apply(jt->second);
    }
    const double scale = std::max({1.0, symb_norm(lhs), symb_norm(rhs)});
    worst = std::max(worst, symb_norm(lhs - rhs) / scale);
  }
  return worst;
}

double HeferFamily::hdef_residual() const {
  double worst = 0;
  for (int l = 0; l <= N; ++l)
    for (int k = 0; k <= N; ++k) worst = std::max(worst, hdef_residual(l, k));
  return worst;
}

double HeferFamily::diagonal_defect() const {
  double worst = 0;
  for (int l = 0; l <= N; ++l)
    for (int k = l + 1; k <= N; ++k)
      for (const auto& [b, v] : H[l][k].image)
        for (const auto& [key_, c] : v.terms())
          if ((key::mask(key_) & layout().form_mask()) == 0)
            worst = std::max(worst, poly_at_param(c).norm_inf());
  return worst;
}

// ---------------------------------------------------------------------------
// Serialization

void to_json(nlohmann::json& j, const SymbExt& x) {
  j = nlohmann::json::array();
  for (const auto& [k, c] : x.terms()) j.push_back({{"key", k}, {"coeff", c}});
}

SymbExt symb_from_json(const nlohmann::json& j, const Layout& L) {
  SymbExt x(L);
  for (const auto& t : j) x.push(t.at("key").get<MonoKey>(), t.at("coeff").get<MixedPoly>());
  x.normalize();
  return x;
}

nlohmann::json family_to_json(const HeferFamily& fam) {
  nlohmann::json j;
  j["f"] = fam.f;
  j["N"] = fam.N;
  j["key"] = family_cache_key(fam.f);
  nlohmann::json H = nlohmann::json::array();
  for (const auto& row : fam.H) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& F : row) {
      nlohmann::json jf = nlohmann::json::array();
      for (const auto& [b, v] : F.image) jf.push_back({{"basis", b}, {"image", v}});
      jr.push_back(jf);
    }
    H.push_back(jr);
  }
  j["H"] = H;
  return j;
}

HeferFamily family_from_json(const nlohmann::json& j) {
  HeferFamily fam = family_skeleton(j.at("f").get<HoloMatrix>());
  if (j.at("N").get<int>() != fam.N) throw ContractViolation("family_from_json: inconsistent length");
  const Layout L = fam.f.layout();
  const auto& H = j.at("H");
  for (int l = 0; l <= fam.N; ++l)
    for (int k = 0; k <= fam.N; ++k) {
      SymbFrameMap F{L, false, {}};
      for (const auto& e : H.at(l).at(k)) F.image.emplace(e.at("basis").get<MonoKey>(), symb_from_json(e.at("image"), L));
      fam.H[l][k] = std::move(F);
    }
  return fam;
}

std::string family_cache_key(const HoloMatrix& f) {
  const std::string s = nlohmann::json(f).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace resdiv
