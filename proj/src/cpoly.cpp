#include "resdiv/cpoly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace resdiv {

int MultiDeg::total() const {
  int t = 0;
  for (auto x : e) t += x;
  return t;
}

bool MultiDeg::is_holomorphic() const {
  for (int j = kMaxDim; j < 3 * kMaxDim; ++j)
    if (e[j] != 0) return false;
  return true;
}

MixedPoly::MixedPoly(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw ContractViolation("MixedPoly: dimension must be in 1..3");
}

MixedPoly MixedPoly::constant(int dim, cplx c) {
  MixedPoly p(dim);
  p.add_term(MultiDeg{}, c);
  return p;
}

MixedPoly MixedPoly::zeta(int dim, int j) {
  MixedPoly p(dim);
  MultiDeg d;
  d.holo(j) = 1;
  p.add_term(d, 1.0);
  return p;
}

MixedPoly MixedPoly::zeta_bar(int dim, int j) {
  MixedPoly p(dim);
  MultiDeg d;
  d.anti(j) = 1;
  p.add_term(d, 1.0);
  return p;
}

MixedPoly MixedPoly::param(int dim, int j) {
  MixedPoly p(dim);
  MultiDeg d;
  d.param(j) = 1;
  p.add_term(d, 1.0);
  return p;
}

MixedPoly MixedPoly::monomial(int dim, const MultiDeg& d, cplx c) {
  MixedPoly p(dim);
  p.add_term(d, c);
  return p;
}

void MixedPoly::add_term(const MultiDeg& d, cplx c) {
  for (int j = dim_; j < kMaxDim; ++j)
    if (d.holo(j) || d.anti(j) || d.param(j))
      throw ContractViolation("MixedPoly: exponent beyond the ambient dimension");
  if (c == cplx{}) return;
  auto [it, inserted] = terms_.try_emplace(d, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx{}) terms_.erase(it);
  }
}

bool MixedPoly::is_holomorphic() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const auto& t) { return t.first.is_holomorphic(); });
}

bool MixedPoly::has_param() const {
  for (const auto& [d, c] : terms_)
    for (int j = 0; j < kMaxDim; ++j)
      if (d.param(j)) return true;
  return false;
}

bool MixedPoly::has_anti() const {
  for (const auto& [d, c] : terms_)
    for (int j = 0; j < kMaxDim; ++j)
      if (d.anti(j)) return true;
  return false;
}

int MixedPoly::degree() const {
  int deg = 0;
  for (const auto& [d, c] : terms_) deg = std::max(deg, d.total());
  return deg;
}

double MixedPoly::norm_inf() const {
  double m = 0;
  for (const auto& [d, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

double MixedPoly::norm2() const {
  double s = 0;
  for (const auto& [d, c] : terms_) s += std::norm(c);
  return std::sqrt(s);
}

void MixedPoly::check_dim(const MixedPoly& o) const {
  if (dim_ != o.dim_) throw ContractViolation("MixedPoly: dimension mismatch");
}

MixedPoly& MixedPoly::operator+=(const MixedPoly& o) {
  if (o.dim_ == 0) return *this;
  if (dim_ == 0) dim_ = o.dim_;
  check_dim(o);
  for (const auto& [d, c] : o.terms_) add_term(d, c);
  return *this;
}

MixedPoly& MixedPoly::operator-=(const MixedPoly& o) {
  if (o.dim_ == 0) return *this;
  if (dim_ == 0) dim_ = o.dim_;
  check_dim(o);
  for (const auto& [d, c] : o.terms_) add_term(d, -c);
  return *this;
}

MixedPoly& MixedPoly::operator*=(cplx c) {
  if (c == cplx{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [d, v] : terms_) v *= c;
  return *this;
}

MixedPoly operator*(const MixedPoly& a, const MixedPoly& b) {
  if (a.dim_ == 0 || b.dim_ == 0) return MixedPoly{};
  a.check_dim(b);
  MixedPoly r(a.dim_);
  for (const auto& [da, ca] : a.terms_)
    for (const auto& [db, cb] : b.terms_) {
      MultiDeg d;
      for (std::size_t i = 0; i < d.e.size(); ++i) {
        int s = da.e[i] + db.e[i];
        if (s > 255) throw ContractViolation("MixedPoly: exponent overflow");
        d.e[i] = static_cast<std::uint8_t>(s);
      }
      r.add_term(d, ca * cb);
    }
  return r;
}

MixedPoly MixedPoly::operator-() const {
  MixedPoly r = *this;
  r *= -1.0;
  return r;
}

namespace {

// Power tables for one evaluation: pw[v][k] = x_v^k.
struct PowerTable {
  std::array<std::vector<cplx>, 3 * kMaxDim> pw;

  PowerTable(const MixedPoly& p, std::span<const cplx> zeta, std::span<const cplx> z) {
    std::array<int, 3 * kMaxDim> maxe{};
    for (const auto& [d, c] : p.terms())
      for (std::size_t i = 0; i < maxe.size(); ++i) maxe[i] = std::max<int>(maxe[i], d.e[i]);
    const int n = p.dim();
    for (int blk = 0; blk < 3; ++blk)
      for (int j = 0; j < n; ++j) {
        const int v = blk * kMaxDim + j;
        cplx x = blk == 0 ? zeta[j] : blk == 1 ? std::conj(zeta[j]) : (maxe[v] ? z[j] : cplx{});
        pw[v].resize(maxe[v] + 1);
        pw[v][0] = 1.0;
        for (int k = 1; k <= maxe[v]; ++k) pw[v][k] = pw[v][k - 1] * x;
      }
  }
};

}  // namespace

cplx MixedPoly::eval(std::span<const cplx> zeta, std::span<const cplx> z) const {
  if (terms_.empty()) return 0.0;
  if (static_cast<int>(zeta.size()) != dim_)
    throw ContractViolation("poly_eval: zeta has the wrong dimension");
  if (has_param() && static_cast<int>(z.size()) != dim_)
    throw ContractViolation("poly_eval: z has the wrong dimension");
  PowerTable t(*this, zeta, z);
  cplx acc = 0.0;
  for (const auto& [d, c] : terms_) {
    cplx m = c;
    for (int blk = 0; blk < 3; ++blk)
      for (int j = 0; j < dim_; ++j) {
        const int v = blk * kMaxDim + j;
        if (d.e[v]) m *= t.pw[v][d.e[v]];
      }
    acc += m;
  }
  return acc;
}

cplx MixedPoly::eval(const CPoint& zeta) const { return eval(zeta, std::span<const cplx>{}); }

std::string MixedPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [d, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i)";
    static const char* names[] = {"w", "wb", "z"};
    for (int blk = 0; blk < 3; ++blk)
      for (int j = 0; j < dim_; ++j) {
        const int e = d.e[blk * kMaxDim + j];
        if (e == 0) continue;
        os << "*" << names[blk] << (j + 1);
        if (e > 1) os << "^" << e;
      }
  }
  return os.str();
}

MixedPoly poly_arith(const MixedPoly& a, const MixedPoly& b, PolyOp op, cplx c) {
  switch (op) {
    case PolyOp::add: {
      if (a.dim() != b.dim()) throw ContractViolation("poly_arith: dimension mismatch");
      return a + b;
    }
    case PolyOp::sub: {
      if (a.dim() != b.dim()) throw ContractViolation("poly_arith: dimension mismatch");
      return a - b;
    }
    case PolyOp::mul: return a * b;
    case PolyOp::scale: return a * c;
  }
  throw ContractViolation("poly_arith: unknown op");
}

cplx poly_eval(const MixedPoly& p, const CPoint& zeta, const CPoint& z) { return p.eval(zeta, z); }

MixedPoly poly_conj(const MixedPoly& p) {
  if (p.has_param()) throw ContractViolation("poly_conj: polynomial depends on z");
  MixedPoly r(p.dim());
  for (const auto& [d, c] : p.terms()) {
    MultiDeg e;
    for (int j = 0; j < kMaxDim; ++j) {
      e.holo(j) = d.anti(j);
      e.anti(j) = d.holo(j);
    }
    r.add_term(e, std::conj(c));
  }
  return r;
}

MixedPoly poly_dbar(const MixedPoly& p, std::span<const int> alpha) {
  if (static_cast<int>(alpha.size()) > p.dim())
    throw ContractViolation("poly_dbar: multi-index longer than the dimension");
  MixedPoly r(p.dim());
  for (const auto& [d, c] : p.terms()) {
    MultiDeg e = d;
    double factor = 1.0;
    bool zero = false;
    for (std::size_t j = 0; j < alpha.size() && !zero; ++j) {
      if (alpha[j] < 0) throw ContractViolation("poly_dbar: negative multi-index");
      for (int k = 0; k < alpha[j]; ++k) {
        if (e.anti(j) == 0) {
          zero = true;
          break;
        }
        factor *= e.anti(j);
        --e.anti(j);
      }
    }
    if (!zero) r.add_term(e, c * factor);
  }
  return r;
}

MixedPoly poly_d(const MixedPoly& p, int j) {
  MixedPoly r(p.dim());
  for (const auto& [d, c] : p.terms()) {
    if (d.holo(j) == 0) continue;
    MultiDeg e = d;
    const double k = e.holo(j);
    --e.holo(j);
    r.add_term(e, c * k);
  }
  return r;
}

MixedPoly poly_at_param(const MixedPoly& p) {
  MixedPoly r(p.dim());
  for (const auto& [d, c] : p.terms()) {
    MultiDeg e = d;
    for (int j = 0; j < kMaxDim; ++j) {
      e.param(j) = static_cast<std::uint8_t>(e.param(j) + e.holo(j));
      e.holo(j) = 0;
    }
    r.add_term(e, c);
  }
  return r;
}

MixedPoly poly_shift_holo(const MixedPoly& p, int s) {
  const int n = p.dim();
  // (zeta_j + s z_j)^a expanded once per (j, a).
  MixedPoly r(n);
  for (const auto& [d, c] : p.terms()) {
    MultiDeg rest = d;
    for (int j = 0; j < n; ++j) rest.holo(j) = 0;
    MixedPoly term = MixedPoly::monomial(n, rest, c);
    for (int j = 0; j < n; ++j) {
      const int a = d.holo(j);
      if (a == 0) continue;
      MixedPoly factor(n);
      double binom = 1.0;
      for (int k = 0; k <= a; ++k) {
        MultiDeg e;
        e.holo(j) = static_cast<std::uint8_t>(k);
        e.param(j) = static_cast<std::uint8_t>(a - k);
        const double sign = ((a - k) % 2 != 0 && s < 0) ? -1.0 : 1.0;
        factor.add_term(e, binom * sign);
        binom = binom * (a - k) / (k + 1);
      }
      term = term * factor;
    }
    r += term;
  }
  return r;
}

bool approx_equal(const MixedPoly& a, const MixedPoly& b, double tol) {
  const double scale = std::max({1.0, a.norm_inf(), b.norm_inf()});
  MixedPoly d = a - b;
  return d.norm_inf() <= tol * scale;
}

void to_json(nlohmann::json& j, const MixedPoly& p) {
  j = nlohmann::json::object();
  j["dim"] = p.dim();
  auto terms = nlohmann::json::array();
  for (const auto& [d, c] : p.terms()) {
    std::vector<int> h(p.dim()), a(p.dim()), z(p.dim());
    for (int k = 0; k < p.dim(); ++k) {
      h[k] = d.holo(k);
      a[k] = d.anti(k);
      z[k] = d.param(k);
    }
    terms.push_back({{"holo", h}, {"anti", a}, {"param", z}, {"re", c.real()}, {"im", c.imag()}});
  }
  j["terms"] = std::move(terms);
}

void from_json(const nlohmann::json& j, MixedPoly& p) {
  const int dim = j.at("dim").get<int>();
  MixedPoly r(dim);
  for (const auto& t : j.at("terms")) {
    MultiDeg d;
    auto read_block = [&](const char* key, int blk) {
      if (!t.contains(key)) return;
      const auto& arr = t.at(key);
      if (!arr.is_array() || static_cast<int>(arr.size()) != dim)
        throw ContractViolation(std::string("MixedPoly JSON: '") + key + "' must have length dim");
      for (int k = 0; k < dim; ++k) {
        const int e = arr[k].get<int>();
        if (e < 0 || e > 255) throw ContractViolation("MixedPoly JSON: exponent out of range");
        d.e[blk * kMaxDim + k] = static_cast<std::uint8_t>(e);
      }
    };
    read_block("holo", 0);
    read_block("anti", 1);
    read_block("param", 2);
    const double re = t.value("re", 0.0);
    const double im = t.value("im", 0.0);
    r.add_term(d, {re, im});
  }
  p = std::move(r);
}

}  // namespace resdiv
