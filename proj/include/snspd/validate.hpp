#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace snspd {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured deviation (or statistic)
  double threshold = 0.0;  // pass if value <= threshold
  std::string detail;
};

enum class Suite { quick, full };

// Analytic cross-checks and analytic-vs-simulation comparisons at the
// example parameters (tau_d = 0.05, tau_r = 0.2 in units of tau_m).
std::vector<CheckResult> run_validation(Suite suite, std::uint64_t seed);

// Largest |analytic - empirical| / standard error over all bins. The error
// uses the larger of the two bin probabilities so rare bins stay finite.
double worst_z(const std::vector<double>& analytic, const std::vector<double>& empirical, double windows);

double total_variation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace snspd
