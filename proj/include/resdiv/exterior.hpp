#pragma once

// Z2-graded exterior algebra over the generators
//
//   HoloDiff(1..n) < AntiDiff(1..n) < EFrame(1..m) < ECoframe(1..m)      (anticommuting)
//   QFrame(1..r), QCoframeSym(1..r), QDet                                (commuting tags)
//
// A monomial is stored as a 64-bit key: the low 32 bits are the set of
// anticommuting generators (bit order = the order above, which is the
// canonical wedge order), the high 32 bits pack the commuting tags. All
// signs are relative to the ascending bit order.

#include <bit>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "resdiv/cpoly.hpp"

namespace resdiv {

enum class Species { HoloDiff, AntiDiff, EFrame, ECoframe, QFrame, QCoframeSym, QDet };

struct Generator {
  Species species;
  int index = 0;  // zero-based
};

using MonoKey = std::uint64_t;

/// Ambient dimension n, rank m of E and rank r of Q.
struct Layout {
  int n = 1;
  int m = 0;
  int r = 1;

  Layout() = default;
  Layout(int n_, int m_, int r_);

  bool operator==(const Layout&) const = default;

  std::uint32_t holo_bit(int j) const { return 1u << j; }
  std::uint32_t anti_bit(int j) const { return 1u << (n + j); }
  std::uint32_t eframe_bit(int j) const { return 1u << (2 * n + j); }
  std::uint32_t ecoframe_bit(int j) const { return 1u << (2 * n + m + j); }

  std::uint32_t holo_mask() const { return (1u << n) - 1u; }
  std::uint32_t anti_mask() const { return ((1u << n) - 1u) << n; }
  std::uint32_t form_mask() const { return (1u << (2 * n)) - 1u; }
  std::uint32_t eframe_mask() const { return ((1u << m) - 1u) << (2 * n); }
  std::uint32_t ecoframe_mask() const { return ((1u << m) - 1u) << (2 * n + m); }

  MonoKey key_of(Generator g) const;
};

namespace key {

inline std::uint32_t mask(MonoKey k) { return static_cast<std::uint32_t>(k); }
inline std::uint32_t comm(MonoKey k) { return static_cast<std::uint32_t>(k >> 32); }
inline MonoKey make(std::uint32_t mask, std::uint32_t comm) {
  return (static_cast<MonoKey>(comm) << 32) | mask;
}

// Commuting tag packing: bits 0-2 QFrame index + 1, bit 3 QDet, then 4-bit
// exponents of QCoframeSym(k).
inline int qframe(std::uint32_t c) { return static_cast<int>(c & 7u) - 1; }
inline bool qdet(std::uint32_t c) { return (c >> 3) & 1u; }
inline int sym_exp(std::uint32_t c, int k) { return static_cast<int>((c >> (4 + 4 * k)) & 15u); }
inline int sym_degree(std::uint32_t c) {
  int s = 0;
  for (int k = 0; k < 6; ++k) s += sym_exp(c, k);
  return s;
}
inline std::uint32_t with_qframe(std::uint32_t c, int j) { return (c & ~7u) | static_cast<std::uint32_t>(j + 1); }
inline std::uint32_t without_qframe(std::uint32_t c) { return c & ~7u; }
inline std::uint32_t with_qdet(std::uint32_t c, bool on) { return on ? (c | 8u) : (c & ~8u); }
inline std::uint32_t with_sym_exp(std::uint32_t c, int k, int e) {
  const std::uint32_t sh = 4 + 4 * k;
  return (c & ~(15u << sh)) | (static_cast<std::uint32_t>(e) << sh);
}

/// Merge commuting parts; throws if two QFrame or two QDet tags meet.
std::uint32_t merge_comm(std::uint32_t a, std::uint32_t b);

/// (-1)^{#pairs (i in a, j in b) with i > j}: sign of a ^ b relative to sorted order.
inline int wedge_sign(std::uint32_t a, std::uint32_t b) {
  int parity = 0;
  while (b) {
    const int j = std::countr_zero(b);
    b &= b - 1;
    parity += std::popcount(a >> (j + 1));
  }
  return (parity & 1) ? -1 : 1;
}

/// Sign for removing (or inserting from the left) generator bit g in mask m.
inline int pass_sign(std::uint32_t m, int g) {
  return (std::popcount(m & ((1u << g) - 1u)) & 1) ? -1 : 1;
}

}  // namespace key

inline bool coeff_is_zero(const cplx& c) { return c == cplx{}; }
inline bool coeff_is_zero(const MixedPoly& c) { return c.is_zero(); }

/// Element of the exterior algebra with coefficients in C (complex or MixedPoly).
template <class C>
class ExtForm {
 public:
  using Term = std::pair<MonoKey, C>;

  ExtForm() = default;
  explicit ExtForm(const Layout& L) : L_(L) {}

  static ExtForm scalar(const Layout& L, C c) {
    ExtForm x(L);
    x.push(0, std::move(c));
    x.normalize();
    return x;
  }
  static ExtForm monomial(const Layout& L, MonoKey k, C c) {
    ExtForm x(L);
    x.push(k, std::move(c));
    x.normalize();
    return x;
  }
  static ExtForm gen(const Layout& L, Generator g, C c) { return monomial(L, L.key_of(g), std::move(c)); }

  const Layout& layout() const { return L_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Appends without normalizing; call normalize() afterwards.
  void push(MonoKey k, C c) {
    if (!coeff_is_zero(c)) terms_.emplace_back(k, std::move(c));
  }
  /// Sort by key, merge duplicates, drop zeros.
  void normalize();

  /// Coefficient of monomial k (zero if absent).
  C coeff(MonoKey k) const;

  ExtForm& operator+=(const ExtForm& o);
  ExtForm& operator-=(const ExtForm& o);
  friend ExtForm operator+(ExtForm a, const ExtForm& b) { return a += b; }
  friend ExtForm operator-(ExtForm a, const ExtForm& b) { return a -= b; }
  ExtForm operator-() const {
    ExtForm r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
  }
  /// Multiply every coefficient by c (c commutes with everything).
  ExtForm scaled(const C& c) const;

  template <class F>
  auto map_coeffs(F&& f) const {
    using D = std::decay_t<decltype(f(std::declval<const C&>()))>;
    ExtForm<D> r(L_);
    for (const auto& [k, c] : terms_) r.push(k, f(c));
    r.normalize();
    return r;
  }

  bool operator==(const ExtForm& o) const = default;

 private:
  Layout L_;
  std::vector<Term> terms_;
};

using ExtElem = ExtForm<cplx>;
using SymbExt = ExtForm<MixedPoly>;

// ---------------------------------------------------------------------------
// Operations

template <class C>
ExtForm<C> wedge(const ExtForm<C>& a, const ExtForm<C>& b);

/// Wedge of the monomial (k, c) on the left of x.
template <class C>
ExtForm<C> left_mul(MonoKey k, const C& c, const ExtForm<C>& x);

/// Interior multiplication by sum_j co[j] e_j^* (antiderivation of odd degree).
template <class C>
ExtForm<C> contract_frame(std::span<const C> co, const ExtForm<C>& x);

/// Interior multiplication by the (1,0) vector field sum_j v[j] d/d zeta_j.
template <class C>
ExtForm<C> contract_holo(std::span<const C> v, const ExtForm<C>& x);

/// Contraction by an element that is a combination of single ECoframe generators.
template <class C>
ExtForm<C> contract(const ExtForm<C>& co, const ExtForm<C>& x);

/// delta_{zeta - z}: contraction with 2 pi i sum (zeta_j - z_j) d/d zeta_j.
ExtElem delta_zeta_minus_z(const CPoint& zeta, const CPoint& z, const ExtElem& x);
SymbExt delta_zeta_minus_z(const SymbExt& x);

/// Terms with exactly p HoloDiff, q AntiDiff and frame_deg EFrame generators.
template <class C>
ExtForm<C> bidegree_part(const ExtForm<C>& x, int p, int q, int frame_deg);

/// Coefficient of d zeta_1 ^ d zeta_1bar ^ ... ^ d zeta_n ^ d zeta_nbar (no frame part).
cplx top_volume_coeff(const ExtElem& x);

/// Lebesgue density factor: a top form c * (interleaved monomial) has density c * (-2i)^n.
cplx lebesgue_factor(int n);

/// Sign s with (canonical top monomial) = s * (interleaved top monomial).
int interleave_sign(int n);

/// Splits x into (frame/tag key, Lebesgue density) pairs of its top-degree part.
std::vector<std::pair<MonoKey, cplx>> top_densities(const ExtElem& x);

SymbExt lift(const ExtElem& x);
ExtElem lower(const SymbExt& x, const CPoint& zeta, const CPoint& z);

inline int form_degree(const Layout& L, MonoKey k) { return std::popcount(key::mask(k) & L.form_mask()); }
inline int holo_degree(const Layout& L, MonoKey k) { return std::popcount(key::mask(k) & L.holo_mask()); }
inline int anti_degree(const Layout& L, MonoKey k) { return std::popcount(key::mask(k) & L.anti_mask()); }
inline int eframe_degree(const Layout& L, MonoKey k) { return std::popcount(key::mask(k) & L.eframe_mask()); }
inline int parity(MonoKey k) { return std::popcount(key::mask(k)) & 1; }

/// One line per monomial, generators in canonical order.
template <class C>
std::string dump(const ExtForm<C>& x);

/// Maximal deviation between two numeric elements.
double max_abs_diff(const ExtElem& a, const ExtElem& b);
double max_abs(const ExtElem& a);

/// A linear map on frame/tag monomials with form-valued images, extended to
/// forms by  L(w ^ b) = (-1)^{odd * deg w} w ^ L(b).
template <class C>
struct FrameMap {
  Layout L;
  bool odd = false;
  std::map<MonoKey, ExtForm<C>> image;

  ExtForm<C> apply(const ExtForm<C>& x) const;
};

using SymbFrameMap = FrameMap<MixedPoly>;
using NumFrameMap = FrameMap<cplx>;

NumFrameMap lower(const SymbFrameMap& f, const CPoint& zeta, const CPoint& z);

}  // namespace resdiv
