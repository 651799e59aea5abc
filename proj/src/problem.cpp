#include "resdiv/problem.hpp"

#include <numbers>

namespace resdiv {

namespace {

using nlohmann::json;

const json& need(const json& j, const std::string& ptr, const char* key) {
  if (!j.is_object()) throw ProblemError(ptr, "expected an object");
  if (!j.contains(key)) throw ProblemError(ptr + "/" + key, std::string("missing required field '") + key + "'");
  return j.at(key);
}

int get_int(const json& j, const std::string& ptr, int lo, int hi) {
  if (!j.is_number_integer()) throw ProblemError(ptr, "expected an integer");
  const int v = j.get<int>();
  if (v < lo || v > hi)
    throw ProblemError(ptr, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
  return v;
}

double get_num(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw ProblemError(ptr, "expected a number");
  return j.get<double>();
}

const json& get_array(const json& j, const std::string& ptr, std::size_t size = 0) {
  if (!j.is_array()) throw ProblemError(ptr, "expected an array");
  if (size && j.size() != size) throw ProblemError(ptr, "expected " + std::to_string(size) + " entries");
  return j;
}

MixedPoly get_poly(const json& j, const std::string& ptr, int n, bool holomorphic) {
  MixedPoly p;
  try {
    p = j.get<MixedPoly>();
  } catch (const std::exception& e) {
    throw ProblemError(ptr, std::string("bad polynomial: ") + e.what());
  }
  if (p.dim() != n) throw ProblemError(ptr + "/dim", "polynomial dimension differs from n");
  if (holomorphic)
    for (const auto& [d, c] : p.terms())
      for (int k = 0; k < n; ++k)
        if (d.anti(k) || d.param(k)) throw ProblemError(ptr, "entries of f must be holomorphic in zeta");
  for (const auto& [d, c] : p.terms())
    for (int k = 0; k < n; ++k)
      if (d.param(k)) throw ProblemError(ptr, "polynomials may not depend on z");
  return p;
}

CPoint get_point(const json& j, const std::string& ptr, int n) {
  get_array(j, ptr, n);
  CPoint p(n);
  for (int k = 0; k < n; ++k) {
    const std::string q = ptr + "/" + std::to_string(k);
    get_array(j[k], q, 2);
    p[k] = cplx(get_num(j[k][0], q + "/0"), get_num(j[k][1], q + "/1"));
  }
  return p;
}

std::vector<MixedPoly> get_column(const json& j, const std::string& ptr, int n, int r) {
  get_array(j, ptr, r);
  std::vector<MixedPoly> out;
  for (int i = 0; i < r; ++i) out.push_back(get_poly(j[i], ptr + "/" + std::to_string(i), n, false));
  return out;
}

void read_orders(const json& j, const std::string& ptr, QuadOrders& o) {
  if (!j.is_object()) throw ProblemError(ptr, "expected an object");
  if (j.contains("radial")) o.radial = get_int(j["radial"], ptr + "/radial", 2, 512);
  if (j.contains("latitude")) o.latitude = get_int(j["latitude"], ptr + "/latitude", 2, 512);
  if (j.contains("angular")) o.angular = get_int(j["angular"], ptr + "/angular", 2, 1024);
  if (j.contains("grading")) o.grading = get_int(j["grading"], ptr + "/grading", 0, 30);
}

}  // namespace

ProblemSpec parse_problem(const json& j) {
  if (!j.is_object()) throw ProblemError("", "problem must be a JSON object");
  ProblemSpec p;
  p.n = get_int(need(j, "", "n"), "/n", 1, kMaxDim);
  p.r = get_int(need(j, "", "r"), "/r", 1, 3);
  p.m = get_int(need(j, "", "m"), "/m", 1, 6);
  if (p.m < p.r) throw ProblemError("/m", "need m >= r");
  const auto& fj = get_array(need(j, "", "f"), "/f", p.r);
  std::vector<std::vector<MixedPoly>> rows;
  for (int a = 0; a < p.r; ++a) {
    const std::string ra = "/f/" + std::to_string(a);
    get_array(fj[a], ra, p.m);
    rows.emplace_back();
    for (int b = 0; b < p.m; ++b) rows.back().push_back(get_poly(fj[a][b], ra + "/" + std::to_string(b), p.n, true));
  }
  p.f = HoloMatrix(p.n, std::move(rows));
  if (j.contains("phi")) p.phi = get_column(j["phi"], "/phi", p.n, p.r);
  if (j.contains("candidates")) {
    const auto& c = get_array(j["candidates"], "/candidates");
    for (std::size_t i = 0; i < c.size(); ++i)
      p.candidates.push_back(get_column(c[i], "/candidates/" + std::to_string(i), p.n, p.r));
  }
  if (j.contains("alphas")) {
    const auto& a = get_array(j["alphas"], "/alphas");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string q = "/alphas/" + std::to_string(i);
      get_array(a[i], q, p.n);
      std::vector<int> al;
      for (int k = 0; k < p.n; ++k) al.push_back(get_int(a[i][k], q + "/" + std::to_string(k), 0, 8));
      p.alphas.push_back(std::move(al));
    }
  }
  for (const char* key : {"z_points", "w_points"}) {
    if (!j.contains(key)) continue;
    const std::string q = std::string("/") + key;
    const auto& a = get_array(j[key], q);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CPoint z = get_point(a[i], q + "/" + std::to_string(i), p.n);
      double r2 = 0;
      for (auto c : z) r2 += std::norm(c);
      if (r2 >= 1.0) throw ProblemError(q + "/" + std::to_string(i), "points must lie in the open unit ball");
      (key[0] == 'z' ? p.z_points : p.w_points).push_back(z);
    }
  }
  if (j.contains("weight")) {
    const auto& w = j["weight"];
    if (!w.is_object()) throw ProblemError("/weight", "expected an object");
    if (w.contains("kind") && w["kind"] != "cutoff") throw ProblemError("/weight/kind", "only the cutoff weight is supported");
    if (w.contains("rho0")) p.divide.rho0 = get_num(w["rho0"], "/weight/rho0");
    if (w.contains("rho1")) p.divide.rho1 = get_num(w["rho1"], "/weight/rho1");
    if (!(p.divide.rho0 > 1.0)) throw ProblemError("/weight/rho0", "rho0 must exceed 1");
    if (!(p.divide.rho1 > p.divide.rho0)) throw ProblemError("/weight/rho1", "need rho1 > rho0");
  }
  if (j.contains("quadrature")) {
    const auto& q = j["quadrature"];
    read_orders(q, "/quadrature", p.orders);
    if (q.contains("radial")) p.divide.outer.radial = p.orders.radial;
    if (q.contains("angular")) p.divide.outer.angular = p.orders.angular;
    if (q.contains("inner")) read_orders(q["inner"], "/quadrature/inner", p.divide.inner);
    if (q.contains("outer")) read_orders(q["outer"], "/quadrature/outer", p.divide.outer);
    if (q.contains("residue")) read_orders(q["residue"], "/quadrature/residue", p.member.residue.orders);
    if (q.contains("threads")) p.divide.threads = get_int(q["threads"], "/quadrature/threads", 1, 256);
  }
  if (j.contains("eps")) {
    const auto& e = j["eps"];
    if (!e.is_object()) throw ProblemError("/eps", "expected an object");
    if (e.contains("base")) {
      p.divide.eps.base = get_num(e["base"], "/eps/base");
      if (!(p.divide.eps.base > 0 && p.divide.eps.base < 1)) throw ProblemError("/eps/base", "need 0 < base < 1");
    }
    if (e.contains("count")) p.divide.eps.count = get_int(e["count"], "/eps/count", 2, 30);
    if (e.contains("mode")) {
      const auto m = e["mode"];
      if (m == "auto") p.divide.eps_mode = EpsMode::automatic;
      else if (m == "always") p.divide.eps_mode = EpsMode::always;
      else if (m == "never") p.divide.eps_mode = EpsMode::never;
      else throw ProblemError("/eps/mode", "expected auto, always or never");
    }
  }
  if (j.contains("residue")) {
    const auto& r = j["residue"];
    if (!r.is_object()) throw ProblemError("/residue", "expected an object");
    auto& ro = p.member.residue;
    if (r.contains("test_rho0")) ro.test_rho0 = get_num(r["test_rho0"], "/residue/test_rho0");
    if (r.contains("test_rho1")) ro.test_rho1 = get_num(r["test_rho1"], "/residue/test_rho1");
    if (!(ro.test_rho0 > 0 && ro.test_rho1 > ro.test_rho0)) throw ProblemError("/residue", "need 0 < test_rho0 < test_rho1");
    if (r.contains("battery")) p.member.battery = get_int(r["battery"], "/residue/battery", 8, 64);
    if (r.contains("theta")) p.member.theta = get_num(r["theta"], "/residue/theta");
    if (r.contains("test_degree")) p.member.test_degree = get_int(r["test_degree"], "/residue/test_degree", 0, 6);
    if (r.contains("regularization")) {
      if (r["regularization"] == "hs") p.reg = RegKind::hs;
      else if (r["regularization"] == "cutoff") p.reg = RegKind::cutoff;
      else throw ProblemError("/residue/regularization", "expected hs or cutoff");
    }
  }
  p.member.residue.eps = p.divide.eps;
  p.member.residue.threads = p.divide.threads;
  if (p.candidates.empty() && !p.phi.empty()) p.candidates.push_back(p.phi);
  return p;
}

void apply_overrides(ProblemSpec& p, const Overrides& o) {
  if (o.radial > 0) p.orders.radial = p.orders.latitude = p.divide.outer.radial = o.radial;
  if (o.angular > 0) p.orders.angular = p.divide.outer.angular = o.angular;
  if (o.eps_base > 0) {
    if (!(o.eps_base < 1)) throw ProblemError("/eps/base", "need 0 < base < 1");
    p.divide.eps.base = o.eps_base;
  }
  if (o.eps_count > 0) p.divide.eps.count = o.eps_count;
  if (o.rho0 > 0) p.divide.rho0 = o.rho0;
  if (o.rho1 > 0) p.divide.rho1 = o.rho1;
  if (!(p.divide.rho0 > 1.0 && p.divide.rho1 > p.divide.rho0)) throw ProblemError("/weight", "need 1 < rho0 < rho1");
  if (o.threads > 0) p.divide.threads = o.threads;
  if (o.seed >= 0) p.member.seed = static_cast<unsigned>(o.seed);
  p.member.residue.eps = p.divide.eps;
  p.member.residue.threads = p.divide.threads;
}

nlohmann::json convention_sheet(int n) {
  const cplx lf = lebesgue_factor(n), c = residue_normalization(n, n);
  return {{"version", "resdiv-conventions-1"},
          {"delta", "contraction with 2*pi*i * sum (zeta_j - z_j) d/d zeta_j"},
          {"nabla", "delta - dbar"},
          {"lebesgue_factor", {lf.real(), lf.imag()}},
          {"interleave_sign", interleave_sign(n)},
          {"residue_normalization", {c.real(), c.imag()}},
          {"currents", "(f - dbar) U = I - R; cutoff chi = v/(v+eps), v = det f f^*"},
          {"eps_schedule", "eps_i = base^i, i = 2..count+1; two-point Richardson"}};
}

}  // namespace resdiv
