#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "resdiv/cli.hpp"
#include "resdiv/problem.hpp"

using nlohmann::json;

namespace {

const std::string kFix = RESDIV_FIXTURES;

struct Run {
  int code;
  std::string out;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "resdiv");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = resdiv::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str()};
}

std::string write_tmp(const std::string& name, const std::string& text) {
  const std::string path = std::string(P_tmpdir) + "/resdiv_cli_" + name;
  std::ofstream(path) << text;
  return path;
}

json fixture(const std::string& name) {
  std::ifstream in(kFix + "/" + name);
  return json::parse(in);
}

std::string pointer_of(const json& problem) {
  try {
    resdiv::parse_problem(problem);
  } catch (const resdiv::ProblemError& e) {
    return e.pointer;
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("schema errors name the offending field") {
  json p = fixture("divide_2x2.json");
  CHECK(pointer_of(p) == "<accepted>");

  json q = p;
  q.erase("n");
  CHECK(pointer_of(q) == "/n");
  q = p;
  q["f"][1][0]["terms"][0]["anti"] = {1, 0};
  CHECK(pointer_of(q) == "/f/1/0");
  q = p;
  q["z_points"][2][0] = {0.9, 0.0};
  q["z_points"][2][1] = {0.5, 0.0};
  CHECK(pointer_of(q) == "/z_points/2");
  q = p;
  q["weight"]["rho0"] = 0.9;
  CHECK(pointer_of(q) == "/weight/rho0");
  q = p;
  q["eps"] = {{"mode", "sometimes"}};
  CHECK(pointer_of(q) == "/eps/mode");
  q = p;
  q["phi"][1]["dim"] = 3;
  CHECK(pointer_of(q) == "/phi/1");
  q = p;
  q["quadrature"]["angular"] = 1;
  CHECK(pointer_of(q) == "/quadrature/angular");
}

TEST_CASE("error envelope and exit codes") {
  auto r = run({"divide", "-i", write_tmp("trunc.json", "{\"n\": ")});
  CHECK(r.code == 1);
  auto j = json::parse(r.out);
  CHECK(j["error"]["kind"] == "parse");

  json p = fixture("divide_2x2.json");
  p["m"] = 1;
  r = run({"divide", "-i", write_tmp("badm.json", p.dump())});
  CHECK(r.code == 1);
  j = json::parse(r.out);
  CHECK(j["error"]["kind"] == "schema");
  CHECK(j["error"]["pointer"] == "/m");

  r = run({"divide"});
  CHECK(r.code == 1);
  CHECK(json::parse(r.out)["error"]["kind"] == "usage");

  r = run({"divide", "-i", "/nonexistent/problem.json"});
  CHECK(r.code == 1);
  CHECK(json::parse(r.out)["error"]["kind"] == "io");

  r = run({"frobnicate", "-i", kFix + "/divide_2x2.json"});
  CHECK(r.code == 1);

  r = run({"residue", "-i", kFix + "/divide_2x2.json"});
  CHECK(r.code == 1);
  CHECK(json::parse(r.out)["error"]["pointer"] == "/m");
}

TEST_CASE("divide report, csv and determinism") {
  const std::string in = kFix + "/divide_2x2.json";
  auto a = run({"divide", "-i", in});
  REQUIRE(a.code == 0);
  auto j = json::parse(a.out);
  CHECK(j["command"] == "divide");
  CHECK(j["status"] == "ok");
  CHECK(j["conventions"]["version"] == "resdiv-conventions-1");
  CHECK(j["result"]["points"].size() == 3);
  CHECK(j["result"]["max_residual"].get<double>() < 1e-5);
  CHECK(json::parse(j.dump()) == j);

  auto b = run({"divide", "-i", in});
  CHECK(a.out == b.out);

  const std::string path = std::string(P_tmpdir) + "/resdiv_cli_out.csv";
  auto c = run({"divide", "-i", in, "--format", "csv", "-o", path});
  CHECK(c.code == 0);
  CHECK(c.out.empty());
  std::ifstream f(path);
  std::string line;
  int rows = 0;
  std::getline(f, line);
  CHECK(line.rfind("z0_re,z0_im", 0) == 0);
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("empty point list gives an empty report") {
  json p = fixture("divide_2x2.json");
  p["z_points"] = json::array();
  auto r = run({"divide", "-i", write_tmp("empty.json", p.dump())});
  CHECK(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["result"]["points"].empty());
  CHECK(j["result"]["ok"] == true);
}

TEST_CASE("overrides reach the engine") {
  json p = fixture("divide_2x2.json");
  p["z_points"] = {p["z_points"][1]};
  const std::string in = write_tmp("one.json", p.dump());
  auto r = run({"divide", "-i", in, "--angular", "12", "--rho0", "1.1", "--rho1", "1.3", "--seed", "5"});
  auto j = json::parse(r.out);
  CHECK(j["result"]["diagnostics"]["outer"]["angular"] == 12);
  CHECK(j["settings"]["weight"]["rho1"].get<double>() == doctest::Approx(1.3));
  CHECK(j["settings"]["seed"] == 5);
  // the coarse angular rule cannot resolve this fixture
  CHECK(r.code == 2);
  CHECK(j["status"] == "inconclusive");
}

TEST_CASE("residue and hefer-check fixtures") {
  auto r = run({"residue", "-i", kFix + "/residue_n2.json"});
  CHECK(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["result"]["value"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::abs(j["result"]["value"][1].get<double>()) < 1e-8);

  r = run({"hefer-check", "-i", kFix + "/hefer_szego_n2.json"});
  CHECK(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["result"]["hdef_residual"].get<double>() < 1e-12);
  CHECK(j["result"]["decompose_residual"].get<double>() < 1e-12);
  CHECK(j["result"]["szego"]["max_defect"].get<double>() < 1e-10);

  r = run({"reproduce", "-i", kFix + "/hefer_szego_n2.json", "--radial", "24", "--angular", "48"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["result"]["max_error"].get<double>() < 1e-6);
}
