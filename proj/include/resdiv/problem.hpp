#pragma once

// Problem files: JSON -> ProblemSpec, with errors that name the offending JSON pointer.

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "resdiv/divider.hpp"

namespace resdiv {

struct ProblemError : std::runtime_error {
  std::string pointer;
  ProblemError(std::string ptr, const std::string& msg) : std::runtime_error(msg), pointer(std::move(ptr)) {}
};

struct ProblemSpec {
  int n = 0, r = 0, m = 0;
  HoloMatrix f;
  std::vector<MixedPoly> phi;                        // one r-column (may be empty)
  std::vector<std::vector<MixedPoly>> candidates;    // membership candidates (defaults to {phi})
  std::vector<std::vector<int>> alphas;              // smooth-obstruction multi-indices
  std::vector<CPoint> z_points, w_points;
  QuadOrders orders{24, 24, 48, 0, 0.0};             // reproduce / sphere rules
  DivideConfig divide;
  MembershipConfig member;
  RegKind reg = RegKind::cutoff;
};

ProblemSpec parse_problem(const nlohmann::json& j);

struct Overrides {
  int radial = 0, angular = 0, threads = 0;
  double eps_base = 0, rho0 = 0, rho1 = 0;
  int eps_count = 0;
  long seed = -1;
};
void apply_overrides(ProblemSpec& p, const Overrides& o);

/// Convention sheet embedded in every report.
nlohmann::json convention_sheet(int n);

}  // namespace resdiv
