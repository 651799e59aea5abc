#include "resdiv/exterior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace resdiv {

Layout::Layout(int n_, int m_, int r_) : n(n_), m(m_), r(r_) {
  if (n < 1 || n > kMaxDim) throw ContractViolation("Layout: n must be in 1..3");
  if (m < 0 || 2 * n + 2 * m > 32) throw ContractViolation("Layout: too many frame generators");
  if (r < 1 || r > 6) throw ContractViolation("Layout: r must be in 1..6");
}

MonoKey Layout::key_of(Generator g) const {
  const int i = g.index;
  auto check = [&](int bound) {
    if (i < 0 || i >= bound) throw ContractViolation("Layout: generator index out of range");
  };
  switch (g.species) {
    case Species::HoloDiff: check(n); return holo_bit(i);
    case Species::AntiDiff: check(n); return anti_bit(i);
    case Species::EFrame: check(m); return eframe_bit(i);
    case Species::ECoframe: check(m); return ecoframe_bit(i);
    case Species::QFrame: check(r); return key::make(0, key::with_qframe(0, i));
    case Species::QCoframeSym: check(r); return key::make(0, key::with_sym_exp(0, i, 1));
    case Species::QDet: return key::make(0, key::with_qdet(0, true));
  }
  throw ContractViolation("Layout: unknown species");
}

namespace key {

std::uint32_t merge_comm(std::uint32_t a, std::uint32_t b) {
  if (a == 0) return b;
  if (b == 0) return a;
  std::uint32_t c = 0;
  const int qa = qframe(a), qb = qframe(b);
  if (qa >= 0 && qb >= 0) throw ContractViolation("exterior: product of two Q-frame elements");
  if (qa >= 0) c = with_qframe(c, qa);
  if (qb >= 0) c = with_qframe(c, qb);
  if (qdet(a) && qdet(b)) throw ContractViolation("exterior: product of two det Q* factors");
  c = with_qdet(c, qdet(a) || qdet(b));
  for (int k = 0; k < 6; ++k) {
    const int e = sym_exp(a, k) + sym_exp(b, k);
    if (e > 15) throw ContractViolation("exterior: symmetric power overflow");
    c = with_sym_exp(c, k, e);
  }
  return c;
}

}  // namespace key

namespace {

template <class C>
C signed_coeff(const C& c, int s) {
  return s < 0 ? C(-c) : c;
}

}  // namespace

template <class C>
void ExtForm<C>::normalize() {
  if (terms_.size() > 1) {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t i = 0; i < terms_.size();) {
      Term t = std::move(terms_[i]);
      std::size_t j = i + 1;
      for (; j < terms_.size() && terms_[j].first == t.first; ++j) t.second += terms_[j].second;
      if (!coeff_is_zero(t.second)) terms_[w++] = std::move(t);
      i = j;
    }
    terms_.resize(w);
  } else if (terms_.size() == 1 && coeff_is_zero(terms_[0].second)) {
    terms_.clear();
  }
}

template <class C>
C ExtForm<C>::coeff(MonoKey k) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), k,
                             [](const Term& t, MonoKey v) { return t.first < v; });
  if (it != terms_.end() && it->first == k) return it->second;
  return C{};
}

template <class C>
ExtForm<C>& ExtForm<C>::operator+=(const ExtForm& o) {
  if (o.terms_.empty()) return *this;
  if (terms_.empty()) L_ = o.L_;
  else if (!(L_ == o.L_)) throw ContractViolation("exterior: layout mismatch");
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  normalize();
  return *this;
}

template <class C>
ExtForm<C>& ExtForm<C>::operator-=(const ExtForm& o) {
  if (o.terms_.empty()) return *this;
  if (terms_.empty()) L_ = o.L_;
  else if (!(L_ == o.L_)) throw ContractViolation("exterior: layout mismatch");
  for (const auto& t : o.terms_) terms_.emplace_back(t.first, -t.second);
  normalize();
  return *this;
}

template <class C>
ExtForm<C> ExtForm<C>::scaled(const C& c) const {
  ExtForm r(L_);
  r.terms_.reserve(terms_.size());
  for (const auto& [k, v] : terms_) r.push(k, v * c);
  r.normalize();
  return r;
}

template <class C>
ExtForm<C> wedge(const ExtForm<C>& a, const ExtForm<C>& b) {
  if (!(a.layout() == b.layout())) throw ContractViolation("wedge: layout mismatch");
  ExtForm<C> r(a.layout());
  for (const auto& [ka, ca] : a.terms()) {
    const std::uint32_t ma = key::mask(ka);
    for (const auto& [kb, cb] : b.terms()) {
      const std::uint32_t mb = key::mask(kb);
      if (ma & mb) continue;
      const int s = key::wedge_sign(ma, mb);
      const std::uint32_t c = key::merge_comm(key::comm(ka), key::comm(kb));
      r.push(key::make(ma | mb, c), signed_coeff(C(ca * cb), s));
    }
  }
  r.normalize();
  return r;
}

template <class C>
ExtForm<C> left_mul(MonoKey k, const C& c, const ExtForm<C>& x) {
  ExtForm<C> r(x.layout());
  const std::uint32_t mk = key::mask(k);
  for (const auto& [kx, cx] : x.terms()) {
    const std::uint32_t mx = key::mask(kx);
    if (mk & mx) continue;
    const int s = key::wedge_sign(mk, mx);
    r.push(key::make(mk | mx, key::merge_comm(key::comm(k), key::comm(kx))), signed_coeff(C(c * cx), s));
  }
  r.normalize();
  return r;
}

template <class C>
ExtForm<C> contract_frame(std::span<const C> co, const ExtForm<C>& x) {
  const Layout& L = x.layout();
  if (static_cast<int>(co.size()) != L.m) throw ContractViolation("contract: coframe has wrong rank");
  ExtForm<C> r(L);
  for (const auto& [k, c] : x.terms()) {
    const std::uint32_t m = key::mask(k);
    for (int j = 0; j < L.m; ++j) {
      const int g = 2 * L.n + j;
      if (!(m & (1u << g)) || coeff_is_zero(co[j])) continue;
      r.push(key::make(m & ~(1u << g), key::comm(k)), signed_coeff(C(c * co[j]), key::pass_sign(m, g)));
    }
  }
  r.normalize();
  return r;
}

template <class C>
ExtForm<C> contract_holo(std::span<const C> v, const ExtForm<C>& x) {
  const Layout& L = x.layout();
  if (static_cast<int>(v.size()) != L.n) throw ContractViolation("contract: vector field has wrong dimension");
  ExtForm<C> r(L);
  for (const auto& [k, c] : x.terms()) {
    const std::uint32_t m = key::mask(k);
    for (int j = 0; j < L.n; ++j) {
      if (!(m & (1u << j)) || coeff_is_zero(v[j])) continue;
      r.push(key::make(m & ~(1u << j), key::comm(k)), signed_coeff(C(c * v[j]), key::pass_sign(m, j)));
    }
  }
  r.normalize();
  return r;
}

template <class C>
ExtForm<C> contract(const ExtForm<C>& co, const ExtForm<C>& x) {
  const Layout& L = co.layout();
  std::vector<C> coeffs(L.m);
  for (const auto& [k, c] : co.terms()) {
    const std::uint32_t m = key::mask(k);
    if (key::comm(k) != 0 || std::popcount(m) != 1 || !(m & L.ecoframe_mask()))
      throw ContractViolation("contract: operator is not a combination of E-coframe generators");
    coeffs[std::countr_zero(m) - 2 * L.n - L.m] = c;
  }
  return contract_frame<C>(coeffs, x);
}

ExtElem delta_zeta_minus_z(const CPoint& zeta, const CPoint& z, const ExtElem& x) {
  const int n = x.layout().n;
  std::vector<cplx> v(n);
  for (int j = 0; j < n; ++j) v[j] = kTwoPiI * (zeta[j] - z[j]);
  return contract_holo<cplx>(v, x);
}

SymbExt delta_zeta_minus_z(const SymbExt& x) {
  const int n = x.layout().n;
  std::vector<MixedPoly> v;
  for (int j = 0; j < n; ++j) v.push_back((MixedPoly::zeta(n, j) - MixedPoly::param(n, j)) * kTwoPiI);
  return contract_holo<MixedPoly>(v, x);
}

template <class C>
ExtForm<C> bidegree_part(const ExtForm<C>& x, int p, int q, int frame_deg) {
  const Layout& L = x.layout();
  ExtForm<C> r(L);
  for (const auto& [k, c] : x.terms())
    if (holo_degree(L, k) == p && anti_degree(L, k) == q && eframe_degree(L, k) == frame_deg) r.push(k, c);
  r.normalize();
  return r;
}

int interleave_sign(int n) {
  std::uint32_t m = 0;
  int s = 1;
  for (int j = 0; j < n; ++j) {
    s *= key::wedge_sign(m, 1u << j);
    m |= 1u << j;
    s *= key::wedge_sign(m, 1u << (n + j));
    m |= 1u << (n + j);
  }
  return s;
}

cplx lebesgue_factor(int n) {
  cplx f = 1.0;
  for (int j = 0; j < n; ++j) f *= cplx(0.0, -2.0);
  return f;
}

cplx top_volume_coeff(const ExtElem& x) {
  const Layout& L = x.layout();
  const cplx c = x.coeff(key::make(L.form_mask(), 0));
  return c * static_cast<double>(interleave_sign(L.n));
}

std::vector<std::pair<MonoKey, cplx>> top_densities(const ExtElem& x) {
  const Layout& L = x.layout();
  const cplx f = lebesgue_factor(L.n) * static_cast<double>(interleave_sign(L.n));
  std::vector<std::pair<MonoKey, cplx>> out;
  for (const auto& [k, c] : x.terms())
    if ((key::mask(k) & L.form_mask()) == L.form_mask())
      out.emplace_back(key::make(key::mask(k) & ~L.form_mask(), key::comm(k)), c * f);
  return out;
}

SymbExt lift(const ExtElem& x) {
  const int n = x.layout().n;
  return x.map_coeffs([n](const cplx& c) { return MixedPoly::constant(n, c); });
}

ExtElem lower(const SymbExt& x, const CPoint& zeta, const CPoint& z) {
  return x.map_coeffs([&](const MixedPoly& p) { return p.eval(zeta, z); });
}

template <class C>
std::string dump(const ExtForm<C>& x) {
  const Layout& L = x.layout();
  std::ostringstream os;
  for (const auto& [k, c] : x.terms()) {
    if constexpr (std::is_same_v<C, cplx>) os << "(" << c.real() << "," << c.imag() << ")";
    else os << "[" << c.to_string() << "]";
    const std::uint32_t m = key::mask(k);
    for (int j = 0; j < L.n; ++j) if (m & L.holo_bit(j)) os << " dz" << j + 1;
    for (int j = 0; j < L.n; ++j) if (m & L.anti_bit(j)) os << " dzb" << j + 1;
    for (int j = 0; j < L.m; ++j) if (m & L.eframe_bit(j)) os << " e" << j + 1;
    for (int j = 0; j < L.m; ++j) if (m & L.ecoframe_bit(j)) os << " e*" << j + 1;
    const std::uint32_t cm = key::comm(k);
    if (key::qframe(cm) >= 0) os << " eps" << key::qframe(cm) + 1;
    for (int j = 0; j < L.r; ++j)
      if (key::sym_exp(cm, j)) os << " eps*" << j + 1 << "^" << key::sym_exp(cm, j);
    if (key::qdet(cm)) os << " detQ*";
    os << "\n";
  }
  return os.str();
}

double max_abs_diff(const ExtElem& a, const ExtElem& b) { return max_abs(a - b); }

double max_abs(const ExtElem& a) {
  double m = 0;
  for (const auto& t : a.terms()) m = std::max(m, std::abs(t.second));
  return m;
}

template <class C>
ExtForm<C> FrameMap<C>::apply(const ExtForm<C>& x) const {
  ExtForm<C> r(L);
  const std::uint32_t fm = L.form_mask();
  for (const auto& [k, c] : x.terms()) {
    const std::uint32_t m = key::mask(k);
    const MonoKey basis = key::make(m & ~fm, key::comm(k));
    auto it = image.find(basis);
    if (it == image.end()) continue;
    const int deg = std::popcount(m & fm);
    const int s = (odd && (deg & 1)) ? -1 : 1;
    r += left_mul<C>(key::make(m & fm, 0), signed_coeff(c, s), it->second);
  }
  return r;
}

NumFrameMap lower(const SymbFrameMap& f, const CPoint& zeta, const CPoint& z) {
  NumFrameMap r{f.L, f.odd, {}};
  for (const auto& [k, v] : f.image) r.image.emplace(k, lower(v, zeta, z));
  return r;
}

// Explicit instantiations.
template class ExtForm<cplx>;
template class ExtForm<MixedPoly>;
template struct FrameMap<cplx>;
template struct FrameMap<MixedPoly>;

#define RESDIV_INSTANTIATE(C)                                                                  \
  template ExtForm<C> wedge(const ExtForm<C>&, const ExtForm<C>&);                              \
  template ExtForm<C> left_mul(MonoKey, const C&, const ExtForm<C>&);                           \
  template ExtForm<C> contract_frame(std::span<const C>, const ExtForm<C>&);                    \
  template ExtForm<C> contract_holo(std::span<const C>, const ExtForm<C>&);                     \
  template ExtForm<C> contract(const ExtForm<C>&, const ExtForm<C>&);                           \
  template ExtForm<C> bidegree_part(const ExtForm<C>&, int, int, int);                          \
  template std::string dump(const ExtForm<C>&);

RESDIV_INSTANTIATE(cplx)
RESDIV_INSTANTIATE(MixedPoly)

#undef RESDIV_INSTANTIATE

}  // namespace resdiv
