#pragma once

// Drivers: reproduction, division (Koszul / Eagon-Northcott), interpolation,
// Berndtsson's formula, the Szego-Hefer decomposition, membership and
// smooth-obstruction batteries.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "resdiv/currents.hpp"
#include "resdiv/hefer.hpp"
#include "resdiv/quadrature.hpp"
#include "resdiv/weights.hpp"

namespace resdiv {

enum class EpsMode { automatic, always, never };

struct DivideConfig {
  double rho0 = 1.1;  // cutoff weight radii
  double rho1 = 1.4;
  QuadOrders inner{24, 24, 16, 10, 0.0};  // ball |zeta| <= rho0 (graded toward 0)
  QuadOrders outer{8, 16, 48, 0, 0.0};    // annulus rho0 <= |zeta| <= rho1
  EpsSchedule eps;
  EpsMode eps_mode = EpsMode::automatic;
  int threads = 1;
  bool coarse_check = true;  // second, coarser pass for the quadrature error of extrapolated runs
  double tol = 0;            // 0: 1e-5 (eps = 0 runs), 1e-3 (extrapolated runs)
};

struct PointResult {
  CPoint z;
  std::vector<cplx> phi;  // phi(z)
  std::vector<cplx> psi;  // m values
  std::vector<cplx> S;    // r values
  double residual = 0;    // max_j |f(z) psi + S - phi|_j
  double psi_error = 0;   // extrapolation + quadrature estimate (0 for eps = 0 runs)
  double S_error = 0;
  bool converged = true;
  nlohmann::json trace;   // per-component eps traces (extrapolated runs)
};

struct DivisionReport {
  std::string method;
  int n = 0, r = 0, m = 0;
  bool eps_used = false;
  std::vector<double> eps;
  double tol = 0;
  std::vector<PointResult> points;
  double max_residual = 0;
  bool ok = false;  // all residuals within tol and all extrapolations converged
  nlohmann::json diagnostics;
};

nlohmann::json to_json(const DivisionReport& r);
/// One row per z.
std::string to_csv(const DivisionReport& r);

/// integrate(g_{n,n} phi) with the cutoff weight.
cplx reproduce(const MixedPoly& phi, const CPoint& z, const Weight& g, const QuadratureRule& rule, int threads = 1);
/// Batched form: the weight is evaluated once per node for all phis.
std::vector<cplx> reproduce(const std::vector<MixedPoly>& phis, const CPoint& z, const Weight& g,
                            const QuadratureRule& rule, int threads = 1);

/// Lower bound search for min v = det f f^* on the closed ball of radius rho (descent from a sample grid).
double min_det_on_ball(const CurrentFamily& cf, double rho);
/// True when Z meets the closed ball of radius rho (numerically).
bool z_meets_ball(const CurrentFamily& cf, double rho);

DivisionReport divide_koszul(const std::vector<MixedPoly>& f, const std::vector<MixedPoly>& phis,
                             const std::vector<CPoint>& zs, const DivideConfig& cfg);
/// phis: list of r-columns.
DivisionReport divide_matrix(const HoloMatrix& f, const std::vector<std::vector<MixedPoly>>& phis,
                             const std::vector<CPoint>& zs, const DivideConfig& cfg);
/// Same, with an already built Hefer family.
DivisionReport divide_with_family(const HeferFamily& fam, const std::vector<std::vector<MixedPoly>>& phis,
                                  const std::vector<CPoint>& zs, const DivideConfig& cfg);

/// max over i of |d psi_i / d conj(z_k)| by central differences (step h).
double psi_zbar_defect(const HeferFamily& fam, const std::vector<MixedPoly>& phi, const CPoint& z,
                       const DivideConfig& cfg, double h = 1e-3);

struct InterpolationResult {
  CPoint z;
  std::vector<cplx> S;      // S phi(z)
  double S_error = 0;
  bool on_Z = false;        // f(z) not surjective
  double image_defect = 0;  // distance of phi(z) - S phi(z) from im f(z) (on Z only)
  bool converged = true;
};
std::vector<InterpolationResult> interpolate(const HoloMatrix& f, const std::vector<MixedPoly>& phi,
                                             const std::vector<CPoint>& zs, const DivideConfig& cfg);

/// Berndtsson's representation at fixed eps (r = 1).
DivisionReport berndtsson_divide(const std::vector<MixedPoly>& f, const std::vector<MixedPoly>& phis,
                                 const std::vector<CPoint>& zs, double eps, const DivideConfig& cfg);

/// p_1..p_n with sum_j p_j (z_j - w_j) = phi(z) - phi(w), from the Szego kernel on the unit sphere.
std::vector<cplx> hefer_via_szego(const MixedPoly& phi, const CPoint& w, const CPoint& z, const QuadratureRule& sphere,
                                  int threads = 1);

struct MembershipConfig {
  ResidueOptions residue;
  int battery = 8;        // number of test forms (>= 8)
  unsigned seed = 1;
  double theta = 0.05;
  int test_degree = 2;    // max degree of the random test polynomials
};

struct MembershipResult {
  std::string verdict;    // in, out, inconclusive
  double ratio = 0;       // max |pairing| / scale
  double ratio_error = 0;
  nlohmann::json evidence;
};

/// Verdicts for each phi (r-columns) from one battery pass.
std::vector<MembershipResult> membership_test(const HoloMatrix& f, const std::vector<std::vector<MixedPoly>>& phis,
                                              const MembershipConfig& cfg);

struct ObstructionRow {
  std::vector<int> alpha;
  std::vector<Extrapolated> pairings;  // one per test form
};
std::vector<ObstructionRow> smooth_obstruction(const HoloMatrix& f, const std::vector<MixedPoly>& phi,
                                               const std::vector<std::vector<int>>& alphas,
                                               const MembershipConfig& cfg);

/// Seeded battery of test polynomials (the first is the constant 1).
std::vector<MixedPoly> test_polynomials(int n, int count, int degree, unsigned seed);

}  // namespace resdiv
