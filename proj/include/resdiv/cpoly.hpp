#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace resdiv {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 3;
inline constexpr cplx kTwoPiI{0.0, 6.283185307179586476925286766559};

/// Raised when two objects of incompatible shape are combined.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A point of C^n.
using CPoint = std::vector<cplx>;

/// Exponents of zeta, conj(zeta) and the parameter point z.
struct MultiDeg {
  std::array<std::uint8_t, 3 * kMaxDim> e{};

  std::uint8_t& holo(int j) { return e[j]; }
  std::uint8_t& anti(int j) { return e[kMaxDim + j]; }
  std::uint8_t& param(int j) { return e[2 * kMaxDim + j]; }
  std::uint8_t holo(int j) const { return e[j]; }
  std::uint8_t anti(int j) const { return e[kMaxDim + j]; }
  std::uint8_t param(int j) const { return e[2 * kMaxDim + j]; }

  int total() const;
  bool is_holomorphic() const;  // no anti and no param exponents

  auto operator<=>(const MultiDeg&) const = default;
};

/// Polynomial in zeta, conj(zeta) and z with complex double coefficients.
///
/// Terms are kept in the lexicographic order of the concatenated exponent
/// blocks (holo, anti, param), so two polynomials are equal iff their term
/// maps are equal. Coefficients that become exactly zero are pruned.
class MixedPoly {
 public:
  MixedPoly() = default;
  explicit MixedPoly(int dim);

  static MixedPoly constant(int dim, cplx c);
  static MixedPoly zeta(int dim, int j);
  static MixedPoly zeta_bar(int dim, int j);
  static MixedPoly param(int dim, int j);
  static MixedPoly monomial(int dim, const MultiDeg& d, cplx c);

  int dim() const { return dim_; }
  const std::map<MultiDeg, cplx>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_holomorphic() const;
  bool has_param() const;
  bool has_anti() const;
  int degree() const;
  /// Largest coefficient modulus.
  double norm_inf() const;
  /// Euclidean norm of the coefficient vector.
  double norm2() const;

  void add_term(const MultiDeg& d, cplx c);

  cplx eval(std::span<const cplx> zeta, std::span<const cplx> z) const;
  cplx eval(const CPoint& zeta) const;

  MixedPoly& operator+=(const MixedPoly& o);
  MixedPoly& operator-=(const MixedPoly& o);
  MixedPoly& operator*=(cplx c);
  friend MixedPoly operator+(MixedPoly a, const MixedPoly& b) { return a += b; }
  friend MixedPoly operator-(MixedPoly a, const MixedPoly& b) { return a -= b; }
  friend MixedPoly operator*(const MixedPoly& a, const MixedPoly& b);
  friend MixedPoly operator*(MixedPoly a, cplx c) { return a *= c; }
  friend MixedPoly operator*(cplx c, MixedPoly a) { return a *= c; }
  MixedPoly operator-() const;
  bool operator==(const MixedPoly& o) const = default;

  std::string to_string() const;

 private:
  void check_dim(const MixedPoly& o) const;

  int dim_ = 0;
  std::map<MultiDeg, cplx> terms_;
};

enum class PolyOp { add, sub, mul, scale };

/// Dispatching form of the ring operations; `c` is only used by `scale`.
MixedPoly poly_arith(const MixedPoly& a, const MixedPoly& b, PolyOp op, cplx c = 1.0);

cplx poly_eval(const MixedPoly& p, const CPoint& zeta, const CPoint& z);

/// Complex conjugate: swaps the holo and anti blocks. Rejects z-exponents.
MixedPoly poly_conj(const MixedPoly& p);

/// d^|alpha| / d conj(zeta)^alpha.
MixedPoly poly_dbar(const MixedPoly& p, std::span<const int> alpha);
/// d/d zeta_j.
MixedPoly poly_d(const MixedPoly& p, int j);

/// Replace zeta by z (holo exponents become param exponents).
MixedPoly poly_at_param(const MixedPoly& p);
/// Substitute zeta_j -> zeta_j + s * z_j for every j (s = +1 or -1).
MixedPoly poly_shift_holo(const MixedPoly& p, int s);

/// max |a_d - b_d| <= tol * max(1, |a|_inf, |b|_inf).
bool approx_equal(const MixedPoly& a, const MixedPoly& b, double tol);

// JSON wire format: {"dim": n, "terms": [{"holo":[..],"anti":[..],"param":[..],"re":x,"im":y}]}
void to_json(nlohmann::json& j, const MixedPoly& p);
void from_json(const nlohmann::json& j, MixedPoly& p);

}  // namespace resdiv
