#pragma once

#include <vector>

namespace snspd {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Gauss-Legendre rule of the given order; rules are built once and cached.
const GaussRule& gauss_legendre(int order);

// Weights of the composite Newton-Cotes rule on `intervals` equal cells of
// width h: Simpson, with a 3/8 panel at the upper end for odd counts and the
// trapezoid for a single cell.
std::vector<double> composite_weights(int intervals, double h);

}  // namespace snspd
