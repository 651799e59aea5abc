#pragma once

// Hefer forms for the Koszul / Eagon-Northcott complex of an r x m matrix f.
//
// Frame conventions (see exterior.hpp for the generator order):
//   E_0 = Q                     basis  eps_j                (QFrame tag)
//   E_1 = E                     basis  e_i
//   E_k = L^{k+r-1}E (x) S^{k-2}Q* (x) det Q*   (k >= 2)    (EFrame set, sym exponents, QDet)
//   f_1 e_i           = sum_j f_{ji} eps_j
//   f_2 (xi (x) det)  = delta_{f^r} ... delta_{f^1} xi     (delta_{f^1} applied first)
//   f_k (xi (x) S det) = sum_j delta_{f^j} xi (x) (a_j/|a|) S/eps_j*   (k >= 3)
// where a is the exponent vector of the monomial S. The same normalized
// contraction defines delta_h on E_k, k >= 3.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "resdiv/cpoly.hpp"
#include "resdiv/exterior.hpp"

namespace resdiv {

/// r x m matrix of holomorphic polynomials in zeta.
struct HoloMatrix {
  int n = 1;
  int r = 1;
  int m = 1;
  std::vector<std::vector<MixedPoly>> rows;  // rows[j][i] = f_{ji}

  HoloMatrix() = default;
  HoloMatrix(int n_, std::vector<std::vector<MixedPoly>> rows_);

  const MixedPoly& operator()(int j, int i) const { return rows[j][i]; }
  /// Length of the Eagon-Northcott complex, m - r + 1.
  int length() const { return m - r + 1; }
  Layout layout() const { return Layout(n, m, r); }
};

void to_json(nlohmann::json& j, const HoloMatrix& f);
void from_json(const nlohmann::json& j, HoloMatrix& f);

/// h_1..h_n with sum_k 2 pi i h_k (zeta_k - z_k) = p(zeta) - p(z) (telescoping).
std::vector<MixedPoly> hefer_decompose(const MixedPoly& p);

/// The (1,0)-form sum_k h_k d zeta_k of hefer_decompose(p).
SymbExt hefer_form(const Layout& L, const MixedPoly& p);

/// Solves delta_{zeta-z} xi' = xi for a delta-closed holomorphic form (Koszul homotopy in w = zeta - z).
SymbExt delta_solve(const SymbExt& xi);

/// Max coefficient norm of x (as polynomials).
double symb_norm(const SymbExt& x);
/// Drops polynomial coefficients below tol * (largest coefficient in x).
SymbExt symb_prune(const SymbExt& x, double tol = 1e-13);

/// Basis keys of E_k for the given layout; empty if E_k = 0.
std::vector<MonoKey> en_basis(const Layout& L, int k);
/// Level k (0..N) of a frame key.
int en_level(const Layout& L, MonoKey k);

/// f_k : E_k -> E_{k-1} as an odd frame map with polynomial (zeta) entries.
SymbFrameMap en_differential(const HoloMatrix& f, int k);
/// Same with zeta replaced by z.
SymbFrameMap en_differential_at_param(const HoloMatrix& f, int k);

/// Composition a o b of frame maps (images of b are mapped by a).
SymbFrameMap compose(const SymbFrameMap& a, const SymbFrameMap& b);

struct HeferFamily {
  HoloMatrix f;
  int N = 1;
  std::vector<std::vector<SymbExt>> h;             // h[j][i]: Hefer (1,0)-form of f_{ji}
  std::vector<std::vector<SymbFrameMap>> H;        // H[l][k], 0 <= l, k <= N
  std::vector<SymbFrameMap> fk;                    // fk[k] = f_k, k = 1..N (fk[0] unused)

  const Layout& layout() const { return H[0][0].L; }
  /// Max over l, k and basis elements of the (Hdef) residual relative to the coefficient scale.
  double hdef_residual() const;
  /// Residual of the single identity for (l, k).
  double hdef_residual(int l, int k) const;
  /// Max over (l, k), k > l, of the (0,0)-part of H[l][k] at zeta = z (should vanish).
  double diagonal_defect() const;
};

/// H^l_k = (delta_h)_{k-l} for the Koszul complex (r = 1).
HeferFamily build_koszul_family(const std::vector<MixedPoly>& row);

/// Eagon-Northcott family: (delta_h)_{k-l} for l >= 2, homotopy induction for l = 1, 0.
/// Supported shapes: r odd, or (r, m) = (2, 2).
HeferFamily build_en_family(const HoloMatrix& f);

/// delta_h on E_k (k = 1, or k >= 3, or k = 2 when r = 1) as an even frame map.
SymbFrameMap hefer_contraction(const HeferFamily& fam, int k);

void to_json(nlohmann::json& j, const SymbExt& x);
SymbExt symb_from_json(const nlohmann::json& j, const Layout& L);
nlohmann::json family_to_json(const HeferFamily& fam);
HeferFamily family_from_json(const nlohmann::json& j);
/// Content hash of f (FNV-1a over its canonical JSON), used as a cache key.
std::string family_cache_key(const HoloMatrix& f);

}  // namespace resdiv
