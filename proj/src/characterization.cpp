#include "snspd/characterization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "snspd/errors.hpp"

namespace snspd {

void ReconstructionSpec::validate() const {
  if (!(bin_width > 0.0)) throw DomainError("bin_width must be > 0");
  if (!(t_max > bin_width)) throw DomainError("t_max must exceed bin_width");
  if (lambda_hint < 0.0) throw DomainError("lambda_hint must be >= 0");
  if (previous_gap_min < 0.0) throw DomainError("previous_gap_min must be >= 0");
}

Reconstruction reconstruct_efficiency(std::span<const double> samples, const ReconstructionSpec& spec) {
  spec.validate();
  std::vector<double> used;
  used.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i] >= 0.0) || !std::isfinite(samples[i])) throw DomainError("gap samples must be finite and >= 0");
    if (spec.previous_gap_min > 0.0 && (i == 0 || samples[i - 1] <= spec.previous_gap_min)) continue;
    used.push_back(samples[i]);
  }
  if (used.empty()) throw DomainError("no gap samples to reconstruct from");

  const int K = static_cast<int>(std::lround(spec.t_max / spec.bin_width));
  const double w = spec.t_max / K;
  std::vector<double> count(K, 0.0);
  for (double s : used) {
    const int k = static_cast<int>(std::floor(s / w));
    if (k < K) count[k] += 1.0;
  }
  const double N = static_cast<double>(used.size());

  // Actuarial hazard: events over the mean number still at risk in the bin.
  // For a renewal stream it equals lambda xi(t) at any rate.
  std::vector<double> hazard(K, 0.0);
  double at_risk = N;
  for (int k = 0; k < K; ++k) {
    const double exposure = (at_risk - 0.5 * count[k]) * w;
    hazard[k] = exposure > 0.0 ? count[k] / exposure : 0.0;
    at_risk -= count[k];
  }

  Reconstruction out;
  out.samples_used = used.size();
  const int first_plateau = std::min(K - 1, static_cast<int>(std::floor(0.8 * K)));
  if (spec.lambda_hint > 0.0) {
    out.lambda = spec.lambda_hint;
  } else {
    double events = 0.0, exposure = 0.0;
    double risk = N;
    for (int k = 0; k < K; ++k) {
      if (k >= first_plateau) {
        events += count[k];
        exposure += (risk - 0.5 * count[k]) * w;
      }
      risk -= count[k];
    }
    if (!(events > 0.0 && exposure > 0.0)) throw DomainError("no events on the plateau; cannot estimate the rate");
    out.lambda = events / exposure;
  }

  out.tail_corrected = out.lambda * spec.t_max > 0.05;
  if (out.tail_corrected) {
    std::ostringstream os;
    os << "lambda * t_max = " << out.lambda * spec.t_max << " > 0.05; survival correction applied";
    out.warnings.push_back(os.str());
  }

  std::vector<double> t(K), xi(K);
  for (int k = 0; k < K; ++k) {
    t[k] = (k + 0.5) * w;
    const double v = out.tail_corrected ? hazard[k] / out.lambda : count[k] / (N * w * out.lambda);
    xi[k] = std::clamp(v, 0.0, 1.0);
  }
  out.profile = EfficiencyProfile::tabulated(std::move(t), std::move(xi));
  return out;
}

}  // namespace snspd
