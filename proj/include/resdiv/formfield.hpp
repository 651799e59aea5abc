#pragma once

#include <functional>

#include "resdiv/exterior.hpp"

namespace resdiv {

/// Declared bounds of a FormField's output.
struct FieldMeta {
  int max_holo = 0;   // largest number of d zeta factors
  int max_anti = 0;   // largest number of d zeta-bar factors
  int max_frame = 0;  // largest E-frame degree
};

/// Pointwise evaluator (zeta, z, eps) -> exterior algebra element.
struct FormField {
  std::function<ExtElem(const CPoint& zeta, const CPoint& z, double eps)> eval;
  FieldMeta meta;
  Layout layout;

  ExtElem operator()(const CPoint& zeta, const CPoint& z, double eps) const { return eval(zeta, z, eps); }
};

}  // namespace resdiv
