#pragma once

// Regularized residue currents U_eps, R_eps for the Koszul (r = 1) and
// Eagon-Northcott complexes, pointwise.
//
// Every component is stored as  scalar(eps) * (eps-independent form)  with
// scalar(eps) = eps^a v^b / (v + eps)^c, so one evaluation per node serves a
// whole eps-schedule. Conventions: (f - dbar) U_eps = I - R_eps, with
//   cutoff:  U_k = chi u_k,  R_k = dbar chi ^ u_k (k >= 1),  R_0 = (1 - chi) I,  chi = v / (v + eps)
//   hs:      U_k = s ^ (dbar s)^{k-1} / (|f|^2 + eps)^k,  R_k = eps (dbar s)^k / (|f|^2 + eps)^{k+1}
// where v = det(f f^*).

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "resdiv/formfield.hpp"
#include "resdiv/hefer.hpp"

namespace resdiv {

enum class ComplexKind { koszul, eagon_northcott };
enum class RegKind { hs, cutoff };

/// eps^a v^b / (v + eps)^c
struct EpsFactor {
  int a = 0, b = 0, c = 0;
  double operator()(double v, double eps) const;
};

/// Linear algebra of f at a point.
struct SigmaData {
  Eigen::MatrixXcd F;                   // r x m
  Eigen::MatrixXcd sigma;               // m x r, f^* (f f^*)^{-1}
  std::vector<Eigen::MatrixXcd> dsigma; // d sigma / d conj(zeta_l), l = 0..n-1
  double v = 0;                         // det f f^*
  std::vector<cplx> dv;                 // d v / d conj(zeta_l)
};

/// Pointwise current components applied to the basis eps_j of E_0.
struct CurrentPoint {
  double v = 0;
  struct Comp {
    int level = 0;                   // k
    EpsFactor factor;
    std::vector<ExtElem> on_basis;   // j = 0..r-1
  };
  std::vector<Comp> U, R;
};

class CurrentFamily {
 public:
  CurrentFamily(HoloMatrix f, ComplexKind kind, RegKind reg);

  const HoloMatrix& matrix() const { return f_; }
  const Layout& layout() const { return L_; }
  int length() const { return f_.length(); }
  ComplexKind complex_kind() const { return kind_; }
  RegKind reg_kind() const { return reg_; }

  SigmaData sigma_data(const CPoint& zeta) const;
  /// det f f^* (or |f|^2) without derivatives.
  double v(const CPoint& zeta) const;
  CurrentPoint eval(const CPoint& zeta) const;

  /// U_eps phi and R_eps phi (sums over k) for phi given by values at zeta.
  ExtElem U(const CPoint& zeta, double eps, std::span<const cplx> phi) const;
  ExtElem R(const CPoint& zeta, double eps, std::span<const cplx> phi) const;
  /// Same as FormFields for polynomial phi (z is ignored).
  FormField U_field(const std::vector<MixedPoly>& phi) const;
  FormField R_field(const std::vector<MixedPoly>& phi) const;

 private:
  HoloMatrix f_;
  ComplexKind kind_;
  RegKind reg_;
  Layout L_;
  std::vector<std::vector<std::vector<MixedPoly>>> df_;  // df_[l][j][i] = d f_{ji} / d zeta_l
};

/// sigma(zeta) = sum_k sigma_k (x) eps_k^* as an exterior element (E-frame with a Q* tag).
ExtElem minimal_inverse(const HoloMatrix& f, const CPoint& zeta);

CurrentFamily koszul_currents(const std::vector<MixedPoly>& row, RegKind reg);
CurrentFamily en_currents(const HoloMatrix& f);

/// Frame/tag key carried by level k of the complex for r = 1 (used to tag the hs forms).
std::uint32_t koszul_tag(int k);

}  // namespace resdiv

#include "resdiv/quadrature.hpp"

namespace resdiv {

/// eps_i = base^i, i = 2..count+1.
struct EpsSchedule {
  double base = 0.25;
  int count = 6;
  std::vector<double> values() const;
};

struct Extrapolated {
  cplx value{};
  double error = 0;         // extrap_error + quad_error
  double extrap_error = 0;  // |A_K - A_{K-1}|
  double quad_error = 0;    // fine vs coarse rule
  std::vector<double> eps;
  std::vector<cplx> trace;  // I(eps_i)
  bool converged = false;   // successive differences decay
};

/// Two-point Richardson in eps (linear leading term) over a geometric schedule.
Extrapolated richardson(const std::vector<double>& eps, const std::vector<cplx>& vals);

struct ResidueOptions {
  QuadOrders orders{24, 24, 16, 10, 0.0};
  EpsSchedule eps;
  double test_rho0 = 0.5;  // test cutoff == 1 on |zeta| <= test_rho0
  double test_rho1 = 0.9;  // and == 0 beyond test_rho1
  int threads = 1;
  bool coarse_check = true;
};

/// Constant c with (delta_h)_N (e_1 ^ ... ^ e_N) = c d zeta_1 ^ ... ^ d zeta_N for f = (zeta_1..zeta_N).
cplx residue_normalization(int n, int N);

/// chi(|zeta|) t(zeta) d zeta_1 ^ ... ^ d zeta_n ^ d conj(zeta)_J with the residue test cutoff
/// (J given as a mask of anti-holomorphic generator bits).
FormField residue_test_form(const Layout& L, const MixedPoly& t, double rho0, double rho1, std::uint32_t anti = 0);

/// Pairings of the top component R_{eps,N} phi (coefficient on `frame`, frame-stripped) with
/// each test form, times residue_normalization. Result [phi][test][frame].
std::vector<std::vector<std::vector<Extrapolated>>> residue_battery(
    const CurrentFamily& cf, const std::vector<std::vector<MixedPoly>>& phis, const std::vector<FormField>& tests,
    const std::vector<MonoKey>& frames, const ResidueOptions& opt);

Extrapolated residue_pairing(const CurrentFamily& cf, const std::vector<MixedPoly>& phi, const FormField& test,
                             const ResidueOptions& opt);

/// m = n, r = 1; zeros of f inside |zeta| < test_rho0.
Extrapolated grothendieck_residue(const std::vector<MixedPoly>& f, const MixedPoly& phi, RegKind reg,
                                  const ResidueOptions& opt);

}  // namespace resdiv
