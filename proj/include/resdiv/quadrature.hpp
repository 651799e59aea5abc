#pragma once

// Tensor quadrature on balls, annuli and the unit sphere in C^n, n <= 3.
//
// Coordinates: zeta_j = sqrt(t_j) e^{i alpha_j}. Lebesgue measure is
// 2^{-n} dt d(alpha); t = s * that with s = |zeta|^2 and that on the standard
// simplex, so dV = 2^{-n} s^{n-1} ds d(that) d(alpha). On the unit sphere
// d(sigma) = 2^{1-n} d(that) d(alpha).
//   s        Gauss-Legendre on panels (breaks at rho0^2, optional geometric grading toward 0)
//   that     Gauss-Legendre (n = 2), collapsed Gauss-Legendre (n = 3)
//   alpha_j  trapezoid

#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "resdiv/cpoly.hpp"
#include "resdiv/formfield.hpp"

namespace resdiv {

enum class RegionKind { ball, annulus, sphere };

struct Region {
  RegionKind kind = RegionKind::ball;
  int n = 1;
  double rho0 = 0.0;  // inner radius (annulus), panel break (ball)
  double rho1 = 1.0;  // outer radius

  static Region ball(int n, double rho) { return {RegionKind::ball, n, 0.0, rho}; }
  static Region annulus(int n, double r0, double r1) { return {RegionKind::annulus, n, r0, r1}; }
  static Region sphere(int n) { return {RegionKind::sphere, n, 1.0, 1.0}; }
  /// Closed-form measure (volume or surface area).
  double measure() const;
};

struct QuadOrders {
  int radial = 24;
  int latitude = 0;  // 0: same as radial
  int angular = 48;
  int grading = 0;   // number of geometric (ratio 4) panels toward the origin
  double break_radius = 0.0;  // optional extra panel break for balls
};

/// Gauss-Legendre nodes and weights on [-1, 1] (cached).
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order);

class QuadratureRule {
 public:
  QuadratureRule(Region region, QuadOrders orders);
  /// Quasi-Monte Carlo (Halton) rule for solid regions; flagged lower precision.
  static QuadratureRule halton(Region region, std::size_t count);

  const Region& region() const { return region_; }
  const QuadOrders& orders() const { return orders_; }
  bool lower_precision() const { return halton_ > 0; }
  std::size_t size() const;
  /// Node i and its weight (nodes are generated on the fly).
  void node(std::size_t i, CPoint& zeta, double& w) const;
  double total_weight() const;
  /// Panel boundaries in s = |zeta|^2 (diagnostic).
  const std::vector<double>& radial_breaks() const { return breaks_; }

 private:
  QuadratureRule() = default;
  Region region_;
  QuadOrders orders_;
  std::vector<double> breaks_;
  std::vector<double> s_, ws_;            // radial variable s = |zeta|^2
  std::vector<std::vector<double>> t_;    // simplex points (n coordinates)
  std::vector<double> wt_;
  std::vector<double> alpha_;
  std::size_t halton_ = 0;
};

/// Deterministic parallel sum: fn(zeta, w, acc) adds w * values into acc[0..K).
/// Chunks of fixed size are summed in order and combined pairwise, so the result
/// does not depend on the number of threads.
using NodeKernel = std::function<void(const CPoint& zeta, double w, cplx* acc)>;
std::vector<cplx> integrate_batch(const QuadratureRule& rule, std::size_t K, const NodeKernel& fn, int threads = 1);

/// Lebesgue density of the frame-free top-degree part (solid regions) or the
/// surface density of the (2n-1)-form (sphere).
cplx form_density(const ExtElem& x, const CPoint& zeta, RegionKind kind);

/// sum_i w_i density(field(node_i, z, eps)).
cplx integrate(const FormField& field, const CPoint& z, double eps, const QuadratureRule& rule, int threads = 1);

/// Integrated densities of the top-degree parts carrying the given frame/tag keys
/// (other keys are ignored).
std::vector<cplx> integrate_frames(const FormField& field, const CPoint& z, double eps, const QuadratureRule& rule,
                                   const std::vector<MonoKey>& keys, int threads = 1);

/// dr = sum (conj(zeta_j) d zeta_j + zeta_j d conj(zeta_j)) / (2 |zeta|).
ExtElem radial_differential(const Layout& L, const CPoint& zeta);

}  // namespace resdiv
