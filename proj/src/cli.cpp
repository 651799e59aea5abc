#include "resdiv/cli.hpp"

#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "resdiv/problem.hpp"

namespace resdiv {

namespace {

using nlohmann::json;

json cj(cplx c) { return json::array({c.real(), c.imag()}); }
json cjv(const std::vector<cplx>& v) {
  json a = json::array();
  for (auto c : v) a.push_back(cj(c));
  return a;
}
json xj(const Extrapolated& x) {
  json t = json::array();
  for (auto v : x.trace) t.push_back(cj(v));
  return {{"value", cj(x.value)},         {"error", x.error},     {"extrap_error", x.extrap_error},
          {"quad_error", x.quad_error},   {"converged", x.converged}, {"eps", x.eps}, {"trace", t}};
}

struct Outcome {
  json result;
  int status = 0;
  std::string csv;
};

void require(bool cond, const std::string& ptr, const std::string& msg) {
  if (!cond) throw ProblemError(ptr, msg);
}

double poly_max_coeff(const MixedPoly& p) {
  double m = 0;
  for (const auto& [d, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}

Outcome cmd_reproduce(const ProblemSpec& p) {
  require(!p.phi.empty(), "/phi", "reproduce needs phi");
  const Layout L(p.n, 0, 1);
  const Weight g = cutoff_weight(L, p.divide.rho0, p.divide.rho1);
  // the top-degree part of g lives where the cutoff is not constant
  QuadratureRule rule(Region::annulus(p.n, p.divide.rho0, p.divide.rho1), p.orders);
  Outcome out;
  json rows = json::array();
  double worst = 0;
  std::ostringstream csv;
  csv << "point,value_re,value_im,exact_re,exact_im,error\n";
  for (std::size_t i = 0; i < p.z_points.size(); ++i) {
    const auto& z = p.z_points[i];
    const cplx v = reproduce(p.phi[0], z, g, rule, p.divide.threads), e = p.phi[0].eval(z);
    worst = std::max(worst, std::abs(v - e));
    rows.push_back({{"z", cjv(z)}, {"value", cj(v)}, {"exact", cj(e)}, {"error", std::abs(v - e)}});
    csv << i << ',' << json(v.real()).dump() << ',' << json(v.imag()).dump() << ',' << json(e.real()).dump() << ','
        << json(e.imag()).dump() << ',' << json(std::abs(v - e)).dump() << '\n';
  }
  out.result = {{"points", rows}, {"max_error", worst}, {"nodes", rule.size()}};
  out.csv = csv.str();
  return out;
}

Outcome cmd_hefer_check(const ProblemSpec& p) {
  Outcome out;
  auto fam = build_en_family(p.f);
  double dec = 0;
  for (int a = 0; a < p.r; ++a)
    for (int b = 0; b < p.m; ++b) {
      const auto& q = p.f(a, b);
      auto h = hefer_decompose(q);
      MixedPoly acc = poly_at_param(q) - q;
      for (int k = 0; k < p.n; ++k) acc += kTwoPiI * h[k] * (MixedPoly::zeta(p.n, k) - MixedPoly::param(p.n, k));
      dec = std::max(dec, poly_max_coeff(acc));
    }
  const double hdef = fam.hdef_residual();
  out.result = {{"length", fam.N},
                {"decompose_residual", dec},
                {"hdef_residual", hdef},
                {"diagonal_defect", fam.diagonal_defect()},
                {"cache_key", family_cache_key(p.f)}};
  bool ok = dec <= 1e-10 && hdef <= 1e-10;
  if (!p.phi.empty() && !p.w_points.empty()) {
    require(p.w_points.size() == p.z_points.size(), "/w_points", "w_points and z_points must pair up");
    QuadratureRule sph(Region::sphere(p.n), p.orders);
    json rows = json::array();
    double worst = 0;
    for (std::size_t i = 0; i < p.w_points.size(); ++i) {
      const auto& w = p.w_points[i];
      const auto& z = p.z_points[i];
      auto c = hefer_via_szego(p.phi[0], w, z, sph, p.divide.threads);
      cplx lhs = 0;
      for (int k = 0; k < p.n; ++k) lhs += c[k] * (z[k] - w[k]);
      const double d = std::abs(lhs - (p.phi[0].eval(z) - p.phi[0].eval(w)));
      worst = std::max(worst, d);
      rows.push_back({{"w", cjv(w)}, {"z", cjv(z)}, {"p", cjv(c)}, {"defect", d}});
    }
    out.result["szego"] = {{"pairs", rows}, {"max_defect", worst}};
    ok = ok && worst <= 1e-5;
  }
  out.result["ok"] = ok;
  out.status = ok ? 0 : 2;
  return out;
}

Outcome cmd_divide(const ProblemSpec& p) {
  require(!p.phi.empty(), "/phi", "divide needs phi");
  Outcome out;
  auto rep = divide_with_family(build_en_family(p.f), {p.phi}, p.z_points, p.divide);
  out.result = to_json(rep);
  out.csv = to_csv(rep);
  out.status = rep.ok ? 0 : 2;
  return out;
}

Outcome cmd_residue(const ProblemSpec& p) {
  require(!p.phi.empty(), "/phi", "residue needs phi");
  require(p.r == 1 && p.m == p.n, "/m", "residue needs r = 1 and m = n");
  Outcome out;
  auto x = grothendieck_residue(p.f.rows[0], p.phi[0], p.reg, p.member.residue);
  out.result = xj(x);
  out.result["regularization"] = p.reg == RegKind::hs ? "hs" : "cutoff";
  out.csv = "value_re,value_im,error,converged\n" + json(x.value.real()).dump() + "," + json(x.value.imag()).dump() +
            "," + json(x.error).dump() + "," + (x.converged ? "1" : "0") + "\n";
  out.status = x.converged ? 0 : 2;
  return out;
}

Outcome cmd_member(const ProblemSpec& p) {
  require(!p.candidates.empty(), "/candidates", "member needs phi or candidates");
  Outcome out;
  auto res = membership_test(p.f, p.candidates, p.member);
  json rows = json::array();
  std::ostringstream csv;
  csv << "candidate,verdict,ratio,ratio_error\n";
  for (std::size_t i = 0; i < res.size(); ++i) {
    rows.push_back({{"verdict", res[i].verdict}, {"ratio", res[i].ratio}, {"ratio_error", res[i].ratio_error},
                    {"evidence", res[i].evidence}});
    csv << i << ',' << res[i].verdict << ',' << json(res[i].ratio).dump() << ',' << json(res[i].ratio_error).dump()
        << '\n';
    if (res[i].verdict == "inconclusive") out.status = 2;
  }
  out.result = {{"candidates", rows}, {"battery", p.member.battery}, {"seed", p.member.seed}, {"theta", p.member.theta}};
  out.csv = csv.str();
  return out;
}

Outcome cmd_interpolate(const ProblemSpec& p) {
  require(!p.phi.empty(), "/phi", "interpolate needs phi");
  Outcome out;
  auto res = interpolate(p.f, p.phi, p.z_points, p.divide);
  json rows = json::array();
  std::ostringstream csv;
  csv << "point,on_Z,image_defect,S_error,converged\n";
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto& x = res[i];
    rows.push_back({{"z", cjv(x.z)}, {"S", cjv(x.S)}, {"S_error", x.S_error}, {"on_Z", x.on_Z},
                    {"image_defect", x.image_defect}, {"converged", x.converged}});
    csv << i << ',' << x.on_Z << ',' << json(x.image_defect).dump() << ',' << json(x.S_error).dump() << ','
        << x.converged << '\n';
    if (!x.converged) out.status = 2;
  }
  out.result = {{"points", rows}};
  out.csv = csv.str();
  return out;
}

Outcome cmd_obstruction(const ProblemSpec& p) {
  require(!p.phi.empty(), "/phi", "obstruction needs phi");
  auto alphas = p.alphas;
  if (alphas.empty()) alphas.push_back(std::vector<int>(p.n, 0));
  Outcome out;
  auto rows = smooth_obstruction(p.f, p.phi, alphas, p.member);
  json jr = json::array();
  std::ostringstream csv;
  csv << "alpha,test,value_re,value_im,error\n";
  for (const auto& row : rows) {
    json pr = json::array();
    std::string al;
    for (int a : row.alpha) al += std::to_string(a);
    for (std::size_t t = 0; t < row.pairings.size(); ++t) {
      const auto& x = row.pairings[t];
      pr.push_back({{"value", cj(x.value)}, {"error", x.error}, {"converged", x.converged}});
      csv << al << ',' << t << ',' << json(x.value.real()).dump() << ',' << json(x.value.imag()).dump() << ','
          << json(x.error).dump() << '\n';
    }
    jr.push_back({{"alpha", row.alpha}, {"pairings", pr}});
  }
  out.result = {{"rows", jr}};
  out.csv = csv.str();
  return out;
}

json error_object(const std::string& kind, const std::string& pointer, const std::string& message) {
  return {{"error", {{"kind", kind}, {"pointer", pointer}, {"message", message}}}};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Division formulas, residue currents and Hefer forms on the unit ball"};
  app.require_subcommand(1);
  std::string input, output, format = "json";
  Overrides ov;
  std::vector<CLI::App*> subs;
  for (const char* name : {"reproduce", "hefer-check", "divide", "residue", "member", "interpolate", "obstruction"}) {
    auto* s = app.add_subcommand(name);
    s->add_option("--input,-i", input, "problem JSON")->required();
    s->add_option("--output,-o", output, "report path (default: stdout)");
    s->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    s->add_option("--radial", ov.radial)->check(CLI::Range(2, 512));
    s->add_option("--angular", ov.angular)->check(CLI::Range(2, 1024));
    s->add_option("--eps-base", ov.eps_base);
    s->add_option("--eps-count", ov.eps_count)->check(CLI::Range(2, 30));
    s->add_option("--rho0", ov.rho0);
    s->add_option("--rho1", ov.rho1);
    s->add_option("--threads", ov.threads)->check(CLI::Range(1, 256));
    s->add_option("--seed", ov.seed)->check(CLI::NonNegativeNumber);
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    out << error_object("usage", "", e.what()).dump(2) << '\n';
    return 1;
  }
  std::string command;
  for (auto* s : subs)
    if (s->parsed()) command = s->get_name();

  try {
    std::ifstream in(input);
    if (!in) throw std::ios_base::failure("cannot open input file '" + input + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      out << error_object("parse", "", e.what()).dump(2) << '\n';
      return 1;
    }
    ProblemSpec p = parse_problem(j);
    apply_overrides(p, ov);
    Outcome o;
    if (command == "reproduce") o = cmd_reproduce(p);
    else if (command == "hefer-check") o = cmd_hefer_check(p);
    else if (command == "divide") o = cmd_divide(p);
    else if (command == "residue") o = cmd_residue(p);
    else if (command == "member") o = cmd_member(p);
    else if (command == "interpolate") o = cmd_interpolate(p);
    else o = cmd_obstruction(p);

    std::string text;
    if (format == "csv") {
      text = o.csv;
    } else {
      json report = {{"command", command},
                     {"conventions", convention_sheet(p.n)},
                     {"problem", {{"n", p.n}, {"r", p.r}, {"m", p.m}, {"f_key", family_cache_key(p.f)}}},
                     {"settings",
                      {{"threads", p.divide.threads},
                       {"seed", p.member.seed},
                       {"eps", {{"base", p.divide.eps.base}, {"count", p.divide.eps.count}}},
                       {"weight", {{"rho0", p.divide.rho0}, {"rho1", p.divide.rho1}}}}},
                     {"status", o.status == 0 ? "ok" : "inconclusive"},
                     {"result", o.result}};
      text = report.dump(2) + "\n";
    }
    if (output.empty()) {
      out << text;
    } else {
      std::ofstream f(output);
      if (!f) throw std::ios_base::failure("cannot write output file '" + output + "'");
      f << text;
      if (!f) throw std::ios_base::failure("write to '" + output + "' failed");
    }
    return o.status;
  } catch (const ProblemError& e) {
    out << error_object("schema", e.pointer, e.what()).dump(2) << '\n';
  } catch (const ContractViolation& e) {
    out << error_object("contract", "", e.what()).dump(2) << '\n';
  } catch (const std::ios_base::failure& e) {
    out << error_object("io", "", e.what()).dump(2) << '\n';
  } catch (const std::exception& e) {
    out << error_object("runtime", "", e.what()).dump(2) << '\n';
  }
  (void)err;
  return 1;
}

}  // namespace resdiv
