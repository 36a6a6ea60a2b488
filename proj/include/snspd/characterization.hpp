#pragma once

#include <span>
#include <string>
#include <vector>

#include "snspd/detector_model.hpp"

namespace snspd {

struct ReconstructionSpec {
  double bin_width = 0.01;
  double t_max = 1.0;        // histogram horizon; the last 20% should sit on the plateau
  double lambda_hint = 0.0;  // 0: estimate from the plateau
  // Keep only gaps whose preceding gap exceeds this value (0 keeps all).
  double previous_gap_min = 0.0;

  void validate() const;
};

struct Reconstruction {
  EfficiencyProfile profile;  // tabulated at bin centers
  double lambda = 0.0;        // rate used
  bool tail_corrected = false;
  std::size_t samples_used = 0;
  std::vector<std::string> warnings;
};

// Efficiency from the histogram of inter-pulse times: the gap density is
// lambda xi(t) exp(-lambda Phi(t)), so at low rate it is proportional to xi.
Reconstruction reconstruct_efficiency(std::span<const double> samples, const ReconstructionSpec& spec);

}  // namespace snspd
