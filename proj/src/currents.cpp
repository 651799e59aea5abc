#include "resdiv/currents.hpp"

#include <cmath>

namespace resdiv {

double EpsFactor::operator()(double v, double eps) const {
  double x = 1.0;
  for (int i = 0; i < a; ++i) x *= eps;
  for (int i = 0; i < b; ++i) x *= v;
  for (int i = 0; i < c; ++i) x /= (v + eps);
  return x;
}

std::uint32_t koszul_tag(int k) {
  if (k == 0) return key::with_qframe(0, 0);
  if (k == 1) return 0;
  return key::with_sym_exp(key::with_qdet(0, true), 0, k - 2);
}

CurrentFamily::CurrentFamily(HoloMatrix f, ComplexKind kind, RegKind reg)
    : f_(std::move(f)), kind_(kind), reg_(reg), L_(f_.layout()) {
  if (kind_ == ComplexKind::koszul && f_.r != 1) throw ContractViolation("koszul_currents: f must be a single row");
  if (reg_ == RegKind::hs && f_.r != 1) throw ContractViolation("currents: hs regularization needs r = 1");
  df_.assign(L_.n, std::vector<std::vector<MixedPoly>>(f_.r));
  for (int l = 0; l < L_.n; ++l)
    for (int j = 0; j < f_.r; ++j)
      for (int i = 0; i < f_.m; ++i) df_[l][j].push_back(poly_d(f_(j, i), l));
}

double CurrentFamily::v(const CPoint& zeta) const {
  Eigen::MatrixXcd F(f_.r, f_.m);
  for (int j = 0; j < f_.r; ++j)
    for (int i = 0; i < f_.m; ++i) F(j, i) = f_(j, i).eval(zeta);
  return (F * F.adjoint()).determinant().real();
}

SigmaData CurrentFamily::sigma_data(const CPoint& zeta) const {
  const int r = f_.r, m = f_.m, n = L_.n;
  SigmaData d;
  d.F.resize(r, m);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < m; ++i) d.F(j, i) = f_(j, i).eval(zeta);
  const Eigen::MatrixXcd A = d.F * d.F.adjoint();
  d.v = A.determinant().real();
  if (!(d.v > 1e-300)) throw ContractViolation("currents: f is not surjective at a quadrature node");
  const Eigen::MatrixXcd Ainv = A.inverse();
  d.sigma = d.F.adjoint() * Ainv;
  Eigen::MatrixXcd G(r, m);
  for (int l = 0; l < n; ++l) {
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < m; ++i) G(j, i) = df_[l][j][i].eval(zeta);
    const Eigen::MatrixXcd FG = d.F * G.adjoint();  // d A / d conj(zeta_l)
    d.dsigma.push_back(G.adjoint() * Ainv - d.sigma * FG * Ainv);
    d.dv.push_back(d.v * (Ainv * FG).trace());
  }
  return d;
}

namespace {

ExtElem frame_vector(const Layout& L, const Eigen::MatrixXcd& M, int col, std::uint32_t tag) {
  ExtElem x(L);
  for (int i = 0; i < L.m; ++i) x.push(key::make(L.eframe_bit(i), tag), M(i, col));
  x.normalize();
  return x;
}

// sum_l d conj(zeta_l) ^ M_l[:, col] . e
ExtElem dbar_frame_vector(const Layout& L, const std::vector<Eigen::MatrixXcd>& M, int col) {
  ExtElem x(L);
  for (int l = 0; l < L.n; ++l)
    for (int i = 0; i < L.m; ++i) x.push(key::make(L.anti_bit(l) | L.eframe_bit(i), 0), M[l](i, col));
  x.normalize();
  return x;
}

ExtElem retag(const ExtElem& x, std::uint32_t tag) {
  ExtElem y(x.layout());
  for (const auto& [k, c] : x.terms()) y.push(key::make(key::mask(k), tag), c);
  y.normalize();
  return y;
}

}  // namespace

CurrentPoint CurrentFamily::eval(const CPoint& zeta) const {
  const int r = f_.r, n = L_.n, N = f_.length();
  const int top = std::min(N, n + 1);  // u_k is a (0, k-1)-form
  CurrentPoint P;
  if (reg_ == RegKind::cutoff) {
    SigmaData d = sigma_data(zeta);
    P.v = d.v;
    ExtElem dv(L_);
    for (int l = 0; l < n; ++l) dv.push(key::make(L_.anti_bit(l), 0), d.dv[l]);
    dv.normalize();
    std::vector<ExtElem> sig, dsig;
    for (int k = 0; k < r; ++k) {
      sig.push_back(frame_vector(L_, d.sigma, k, 0));
      dsig.push_back(dbar_frame_vector(L_, d.dsigma, k));
    }
    ExtElem bold = ExtElem::monomial(L_, key::make(0, key::with_qdet(0, true)), 1.0);
    for (int k = 0; k < r; ++k) bold = wedge(bold, sig[k]);
    ExtElem D(L_);
    for (int k = 0; k < r; ++k)
      D += wedge(dsig[k], ExtElem::monomial(L_, key::make(0, key::with_sym_exp(0, k, 1)), 1.0));

    CurrentPoint::Comp R0{0, {1, 0, 1}, {}};
    for (int j = 0; j < r; ++j) R0.on_basis.push_back(ExtElem::monomial(L_, key::make(0, key::with_qframe(0, j)), 1.0));
    P.R.push_back(std::move(R0));
    std::vector<ExtElem> u(r);
    for (int k = 1; k <= top; ++k) {
      CurrentPoint::Comp Uk{k, {0, 1, 1}, {}}, Rk{k, {1, 0, 2}, {}};
      for (int j = 0; j < r; ++j) {
        if (k == 1) u[j] = sig[j];
        else if (k == 2) u[j] = wedge(bold, dsig[j]);
        else u[j] = wedge(D, u[j]);
        Uk.on_basis.push_back(u[j]);
        Rk.on_basis.push_back(wedge(dv, u[j]));
      }
      P.U.push_back(std::move(Uk));
      P.R.push_back(std::move(Rk));
    }
    return P;
  }
  // hs, r = 1
  const int m = f_.m;
  ExtElem s(L_), ds(L_);
  double q = 0;
  for (int i = 0; i < m; ++i) {
    const cplx fi = f_(0, i).eval(zeta);
    q += std::norm(fi);
    s.push(key::make(L_.eframe_bit(i), 0), std::conj(fi));
    for (int l = 0; l < n; ++l)
      ds.push(key::make(L_.anti_bit(l) | L_.eframe_bit(i), 0), std::conj(df_[l][0][i].eval(zeta)));
  }
  s.normalize();
  ds.normalize();
  P.v = q;
  P.R.push_back({0, {1, 0, 1}, {ExtElem::monomial(L_, key::make(0, koszul_tag(0)), 1.0)}});
  ExtElem pw = ExtElem::scalar(L_, 1.0);  // (dbar s)^{k-1}
  for (int k = 1; k <= top; ++k) {
    P.U.push_back({k, {0, 0, k}, {retag(wedge(s, pw), koszul_tag(k))}});
    pw = wedge(pw, ds);
    P.R.push_back({k, {1, 0, k + 1}, {retag(pw, koszul_tag(k))}});
  }
  return P;
}

namespace {

ExtElem combine(const Layout& L, const std::vector<CurrentPoint::Comp>& comps, double v, double eps,
                std::span<const cplx> phi) {
  ExtElem out(L);
  for (const auto& c : comps) {
    const double s = c.factor(v, eps);
    if (s == 0.0) continue;
    for (std::size_t j = 0; j < c.on_basis.size(); ++j)
      if (phi[j] != cplx{}) out += c.on_basis[j].scaled(s * phi[j]);
  }
  return out;
}

std::vector<cplx> eval_phi(const std::vector<MixedPoly>& phi, const CPoint& zeta) {
  std::vector<cplx> out;
  for (const auto& p : phi) out.push_back(p.eval(zeta));
  return out;
}

}  // namespace

ExtElem CurrentFamily::U(const CPoint& zeta, double eps, std::span<const cplx> phi) const {
  if (static_cast<int>(phi.size()) != f_.r) throw ContractViolation("currents: phi has the wrong length");
  auto P = eval(zeta);
  return combine(L_, P.U, P.v, eps, phi);
}

ExtElem CurrentFamily::R(const CPoint& zeta, double eps, std::span<const cplx> phi) const {
  if (static_cast<int>(phi.size()) != f_.r) throw ContractViolation("currents: phi has the wrong length");
  auto P = eval(zeta);
  return combine(L_, P.R, P.v, eps, phi);
}

FormField CurrentFamily::U_field(const std::vector<MixedPoly>& phi) const {
  const int n = L_.n;
  return FormField{[this, phi](const CPoint& zeta, const CPoint&, double eps) { return U(zeta, eps, eval_phi(phi, zeta)); },
                   {0, n, f_.m}, L_};
}

FormField CurrentFamily::R_field(const std::vector<MixedPoly>& phi) const {
  const int n = L_.n;
  return FormField{[this, phi](const CPoint& zeta, const CPoint&, double eps) { return R(zeta, eps, eval_phi(phi, zeta)); },
                   {0, n, f_.m}, L_};
}

ExtElem minimal_inverse(const HoloMatrix& f, const CPoint& zeta) {
  CurrentFamily cf(f, f.r == 1 ? ComplexKind::koszul : ComplexKind::eagon_northcott, RegKind::cutoff);
  auto d = cf.sigma_data(zeta);
  if (d.v < 1e-14) throw ContractViolation("minimal_inverse: f is singular at this point");
  ExtElem x(cf.layout());
  for (int k = 0; k < f.r; ++k) x += frame_vector(cf.layout(), d.sigma, k, key::with_sym_exp(0, k, 1));
  return x;
}

CurrentFamily koszul_currents(const std::vector<MixedPoly>& row, RegKind reg) {
  if (row.empty()) throw ContractViolation("koszul_currents: empty row");
  return CurrentFamily(HoloMatrix(row[0].dim(), {row}), ComplexKind::koszul, reg);
}

CurrentFamily en_currents(const HoloMatrix& f) {
  if (f.r > 1 && f.r % 2 == 0 && !(f.r == 2 && f.m == 2))
    throw ContractViolation("en_currents: even r is only supported for (r, m) = (2, 2)");
  return CurrentFamily(f, ComplexKind::eagon_northcott, RegKind::cutoff);
}

}  // namespace resdiv
