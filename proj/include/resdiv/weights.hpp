#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "resdiv/formfield.hpp"

namespace resdiv {

enum class WeightKind { trivial, cutoff, boundary, product };

struct Weight {
  WeightKind kind = WeightKind::trivial;
  FormField field;
  double rho0 = 0.0;  // nontrivial part lives in rho0 <= |zeta| <= rho1
  double rho1 = 0.0;
  /// Radii [a, b] where the weight is only a current (boundary weights: [1, 1]).
  std::optional<std::pair<double, double>> singular;

  ExtElem operator()(const CPoint& zeta, const CPoint& z) const { return field(zeta, z, 0.0); }
};

/// Quintic cutoff profile: 1 on [0, rho0], 0 on [rho1, inf).
double cutoff_profile(double t, double rho0, double rho1);
double cutoff_profile_derivative(double t, double rho0, double rho1);

/// The weight 1.
Weight unit_weight(const Layout& L);

/// g = chi - dbar chi ^ sum_{k<n} s ^ (dbar s)^k, s = d|zeta|^2 / (2 pi i (|zeta|^2 - conj(zeta).z)).
Weight cutoff_weight(const Layout& L, double rho0, double rho1);

/// Kernels s ^ (dbar s)^{k-1} = (2 pi i)^{-k} d|zeta|^2 ^ (dbar d |zeta|^2)^{k-1} / (1 - conj(zeta).z)^k,
/// k = 1..n, evaluated on the unit sphere only.
std::vector<FormField> boundary_weight_kernels(const Layout& L);

/// Pointwise product g1 ^ g2; rejects overlapping singular supports.
Weight weight_product(const Weight& g1, const Weight& g2);

/// dbar of a form field by central differences in the real coordinates of zeta.
ExtElem dbar_fd(const FormField& F, const CPoint& zeta, const CPoint& z, double eps, double h);
/// sum_j d/d conj(z_j) of the coefficients of F (holomorphy defect in z), max modulus.
double dzbar_fd(const FormField& F, const CPoint& zeta, const CPoint& z, double eps, double h);

struct WeightCheck {
  double nabla_residual = 0;  // max |(delta - dbar) g| / local scale
  double g00_defect = 0;      // max |g_{0,0}(z) - 1|
  double offdiag = 0;         // max coefficient of (p,q) parts with p != q
  double zbar_defect = 0;     // max |d g / d conj(z)|
  int samples = 0;
};

/// Finite-difference validity check at `samples` random (zeta, z) pairs with
/// |zeta| <= zeta_radius, |z| <= z_radius.
WeightCheck check_weight(const Weight& g, int samples, unsigned seed, double zeta_radius, double z_radius,
                         double h = 1e-4);

}  // namespace resdiv
