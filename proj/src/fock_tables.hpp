#pragma once

#include <vector>

#include "snspd/povm_independent.hpp"

namespace snspd::detail {

// Fock-diagonal tables shared by the independent-window and continuous-wave
// computations, all from one transfer-operator pass per contour point.
struct FockTables {
  ConditionalMatrix p;        // P_{n|m}
  ConditionalMatrix regular;  // regular part of P_{n|m}
  ConditionalMatrix d;        // carry-in averaged over [0, delta]; empty unless requested
  std::vector<double> a, b;   // no click in the final delta: fresh / averaged carry-in
};

FockTables fock_tables(const DetectorConfig& config, int n_max, int m_max, double delta, bool averaged,
                       const QuadratureSpec& spec);

// Clamps round-off excursions outside [0,1]; larger ones are errors.
double clamp_probability(double v, const char* what);

}  // namespace snspd::detail
